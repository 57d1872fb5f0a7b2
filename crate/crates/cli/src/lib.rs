//! Experiment drivers behind the `mmv` binary.
//!
//! Each driver expands an [`ExperimentConfig`] into conditions (illuminant
//! pair, grey level, wavelength step), runs them concurrently and returns
//! records in a fixed order so the written outputs do not depend on the
//! thread count.

pub mod output;

use std::collections::BTreeMap;
use std::fs::File;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use mmv_core::baseline::baseline_mmv;
use mmv_core::data::{judd_vos_cmfs, Illuminant, JUDD_VOS_FILE};
use mmv_core::mmv::{classify_transitions, mmv_halfspace_nested, mmv_lp, MismatchProblem, MmvMethod, MmvResult};
use mmv_core::spectral::{load_spectral_table, ColourSystem, TabulatedSpectrum, WavelengthGrid};
use mmv_core::sphere::sample_sphere;

/// Overrides the bundled spectral tables.
pub const DATA_DIR_ENV: &str = "MMV_DATA_DIR";

/// Spectra used by the transition histograms.
pub const HISTOGRAM_SPECTRA: usize = 1000;

/// Failures of the numerical pipeline, as opposed to bad configuration.
#[derive(Debug)]
pub struct NumericalFailure(pub String);

impl std::fmt::Display for NumericalFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NumericalFailure {}

fn numerical<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> anyhow::Error + '_ {
    move |e| NumericalFailure(format!("{what}: {e}")).into()
}

/// Where the colour-matching functions and illuminants come from.
#[derive(Debug, Clone, Default)]
pub struct DataSource {
    pub dir: Option<PathBuf>,
}

impl DataSource {
    /// Bundled tables unless [`DATA_DIR_ENV`] is set.
    pub fn from_env() -> Self {
        Self {
            dir: std::env::var_os(DATA_DIR_ENV).map(PathBuf::from),
        }
    }

    fn load(&self, file: &str) -> Result<Vec<TabulatedSpectrum>> {
        let dir = self.dir.as_ref().expect("only called with a data directory");
        let path = dir.join(file);
        let f = File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
        load_spectral_table(f).with_context(|| format!("cannot parse {}", path.display()))
    }

    /// Judd–Vos observer under `illuminant`, on `grid`.
    pub fn system(&self, illuminant: Illuminant, grid: &WavelengthGrid) -> Result<ColourSystem> {
        let (cmfs, illum) = match &self.dir {
            None => (judd_vos_cmfs(), illuminant.spectrum()),
            Some(_) => {
                let cmfs = self.load(JUDD_VOS_FILE)?;
                let mut illum = self.load(illuminant.file_name())?;
                if cmfs.len() != 3 || illum.len() != 1 {
                    bail!(
                        "expected 3 colour-matching functions and 1 illuminant column, found {} and {}",
                        cmfs.len(),
                        illum.len()
                    );
                }
                (cmfs, illum.remove(0))
            }
        };
        ColourSystem::from_tabulated(&cmfs, &illum, grid)
            .with_context(|| format!("cannot build the {illuminant} colour system"))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub pairs: Vec<(Illuminant, Illuminant)>,
    pub greys: Vec<f64>,
    pub steps_nm: Vec<f64>,
    pub methods: Vec<MmvMethod>,
    /// Direction counts for the LP methods and seed counts for the baseline.
    pub samples: Vec<usize>,
    /// Direction counts for the half-space methods.
    pub halfspace_samples: Vec<usize>,
    pub seed: u64,
    pub data: DataSource,
}

impl ExperimentConfig {
    /// All ordered pairs of distinct illuminants.
    pub fn all_pairs() -> Vec<(Illuminant, Illuminant)> {
        let mut out = Vec::new();
        for a in Illuminant::ALL {
            for b in Illuminant::ALL {
                if a != b {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.pairs.is_empty() {
            bail!("no illuminant pairs selected");
        }
        if self.greys.is_empty() || self.greys.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            bail!("grey levels must lie strictly between 0 and 1");
        }
        if self.steps_nm.is_empty() || self.steps_nm.iter().any(|s| s.is_nan() || *s <= 0.0) {
            bail!("wavelength steps must be positive");
        }
        if self.methods.is_empty() {
            bail!("no methods selected");
        }
        let needs_lp = self.methods.iter().any(|m| !is_halfspace(*m));
        let needs_hs = self.methods.iter().any(|m| is_halfspace(*m));
        if needs_lp && (self.samples.is_empty() || self.samples.contains(&0)) {
            bail!("sample counts must be positive");
        }
        if needs_hs && (self.halfspace_samples.is_empty() || self.halfspace_samples.contains(&0)) {
            bail!("half-space sample counts must be positive");
        }
        Ok(())
    }

    fn conditions(&self) -> Vec<Condition> {
        let mut out = Vec::new();
        for &(phi, psi) in &self.pairs {
            for &grey in &self.greys {
                for &step_nm in &self.steps_nm {
                    out.push(Condition {
                        phi,
                        psi,
                        grey,
                        step_nm,
                    });
                }
            }
        }
        out
    }
}

fn is_halfspace(m: MmvMethod) -> bool {
    matches!(m, MmvMethod::HalfspaceOriginal | MmvMethod::HalfspaceOrthonormal)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Condition {
    #[serde(serialize_with = "output::display")]
    pub phi: Illuminant,
    #[serde(serialize_with = "output::display")]
    pub psi: Illuminant,
    pub grey: f64,
    pub step_nm: f64,
}

impl Condition {
    pub fn problem(&self, data: &DataSource) -> Result<MismatchProblem> {
        let grid = WavelengthGrid::visible(self.step_nm)
            .map_err(|e| anyhow::anyhow!("invalid wavelength step {}: {e}", self.step_nm))?;
        let phi = data.system(self.phi, &grid)?;
        let psi = data.system(self.psi, &grid)?;
        MismatchProblem::flat_grey(phi, psi, self.grey).map_err(numerical("mismatch problem"))
    }

    /// Stem for per-condition output files.
    pub fn slug(&self) -> String {
        format!("{}_{}_g{}_s{}", self.phi, self.psi, self.grey, self.step_nm)
    }
}

/// One volume estimate.
#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub experiment: &'static str,
    #[serde(flatten)]
    pub condition: Condition,
    #[serde(serialize_with = "output::display")]
    pub method: MmvMethod,
    pub samples: usize,
    pub volume: f64,
    /// Points hulled (LP and baseline) or polytope vertices (half-space).
    pub points: usize,
    pub hull_vertices: usize,
    pub hull_faces: usize,
    /// Binding half-spaces; half-space methods only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_halfspaces: Option<usize>,
    /// Transition counts over the first [`HISTOGRAM_SPECTRA`] spectra.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transition_histogram: Option<BTreeMap<usize, usize>>,
    /// OBJ file name relative to the output directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<String>,
    /// Wall time; kept out of the serialised records.
    #[serde(skip)]
    pub elapsed: Duration,
    #[serde(skip)]
    pub result: Option<MmvResult>,
}

impl RunRecord {
    fn new(experiment: &'static str, condition: Condition, result: MmvResult, elapsed: Duration) -> Self {
        Self {
            experiment,
            condition,
            method: result.method,
            samples: result.sample_count,
            volume: result.volume,
            points: result.points.len(),
            hull_vertices: result.hull.vertices().len(),
            hull_faces: result.hull.faces().len(),
            binding_halfspaces: is_halfspace(result.method).then_some(result.binding_count),
            transition_histogram: None,
            mesh: None,
            elapsed,
            result: Some(result),
        }
    }

    fn with_histogram(mut self) -> Self {
        if let Some(r) = &self.result {
            if !r.spectra.is_empty() {
                let mut sub = r.clone();
                sub.spectra.truncate(HISTOGRAM_SPECTRA);
                self.transition_histogram = Some(classify_transitions(&sub));
            }
        }
        self
    }
}

/// Containment checks for one condition of [`run_comparison`].
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    #[serde(flatten)]
    pub condition: Condition,
    pub baseline_volume: f64,
    pub lp_volume: f64,
    pub halfspace_volume: f64,
    /// `1 − baseline / lp`.
    pub baseline_deficit: f64,
    pub baseline_accepted: usize,
    pub baseline_inside_halfspace: bool,
    pub lp_inside_halfspace: bool,
    pub chain_holds: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub records: Vec<RunRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub comparisons: Vec<Comparison>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

/// LP runs at every sample count, from one solve at the largest count.
fn lp_runs(
    experiment: &'static str,
    cond: Condition,
    problem: &MismatchProblem,
    orthonormal: bool,
    samples: &[usize],
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let max = *samples.iter().max().expect("validated");
    let (full, elapsed) = timed(|| mmv_lp(problem, &sample_sphere(6, max, seed), orthonormal));
    let full = full.map_err(numerical("LP method"))?;
    let mut out = Vec::with_capacity(samples.len());
    for &m in samples {
        let r = if m == max {
            full.clone()
        } else {
            full.prefix(m).map_err(numerical("LP method"))?
        };
        let share = elapsed.mul_f64(m as f64 / max as f64);
        out.push(RunRecord::new(experiment, cond, r, share).with_histogram());
    }
    Ok(out)
}

fn halfspace_runs(
    experiment: &'static str,
    cond: Condition,
    problem: &MismatchProblem,
    orthonormal: bool,
    samples: &[usize],
    seed: u64,
) -> Result<Vec<RunRecord>> {
    let mut ts = samples.to_vec();
    ts.sort_unstable();
    ts.dedup();
    let max = *ts.last().expect("validated");
    let (results, elapsed) = timed(|| mmv_halfspace_nested(problem, &sample_sphere(6, max, seed), orthonormal, &ts));
    let results = results.map_err(numerical("half-space method"))?;
    Ok(results
        .into_iter()
        .map(|r| {
            let share = elapsed.mul_f64(r.sample_count as f64 / max as f64);
            RunRecord::new(experiment, cond, r, share)
        })
        .collect())
}

fn baseline_runs(
    experiment: &'static str,
    cond: Condition,
    problem: &MismatchProblem,
    samples: &[usize],
    seed: u64,
) -> Result<Vec<RunRecord>> {
    samples
        .iter()
        .map(|&n| {
            let (r, elapsed) = timed(|| baseline_mmv(problem, n, seed));
            let r = r.map_err(numerical("five-transition baseline"))?;
            Ok(RunRecord::new(experiment, cond, r, elapsed).with_histogram())
        })
        .collect()
}

fn method_runs(experiment: &'static str, cfg: &ExperimentConfig, cond: Condition) -> Result<Vec<RunRecord>> {
    let problem = cond.problem(&cfg.data)?;
    let mut out = Vec::new();
    for &m in &cfg.methods {
        let runs = match m {
            MmvMethod::LpOriginal | MmvMethod::LpOrthonormal => {
                lp_runs(experiment, cond, &problem, m.is_orthonormal(), &cfg.samples, cfg.seed)?
            }
            MmvMethod::HalfspaceOriginal | MmvMethod::HalfspaceOrthonormal => halfspace_runs(
                experiment,
                cond,
                &problem,
                m.is_orthonormal(),
                &cfg.halfspace_samples,
                cfg.seed,
            )?,
            MmvMethod::FiveTransition => baseline_runs(experiment, cond, &problem, &cfg.samples, cfg.seed)?,
        };
        out.extend(runs);
    }
    Ok(out)
}

fn run_all(experiment: &'static str, cfg: &ExperimentConfig) -> Result<Report> {
    cfg.validate()?;
    let per_condition: Vec<Vec<RunRecord>> = cfg
        .conditions()
        .into_par_iter()
        .map(|c| method_runs(experiment, cfg, c))
        .collect::<Result<_>>()?;
    Ok(Report {
        records: per_condition.into_iter().flatten().collect(),
        comparisons: Vec::new(),
    })
}

/// Volumes per wavelength step and sample count.
pub fn run_resolution_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    run_all("resolution_sweep", cfg)
}

/// Volumes against sample count, nested direction sets throughout.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<Report> {
    run_all("convergence", cfg)
}

/// Baseline, LP (orthonormal) and half-space (orthonormal) volumes per
/// condition at the largest configured sample counts, with containment checks.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<Report> {
    let cfg = ExperimentConfig {
        methods: vec![
            MmvMethod::FiveTransition,
            MmvMethod::LpOrthonormal,
            MmvMethod::HalfspaceOrthonormal,
        ],
        samples: cfg.samples.iter().max().into_iter().copied().collect(),
        halfspace_samples: cfg.halfspace_samples.iter().max().into_iter().copied().collect(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let per_condition: Vec<(Vec<RunRecord>, Comparison)> = cfg
        .conditions()
        .into_par_iter()
        .map(|c| {
            let mut runs = method_runs("compare", &cfg, c)?;
            let comparison = compare(c, &runs);
            for r in &mut runs {
                r.mesh = Some(format!("{}_{}.obj", c.slug(), r.method));
            }
            Ok((runs, comparison))
        })
        .collect::<Result<_>>()?;
    let mut report = Report::default();
    for (runs, cmp) in per_condition {
        report.records.extend(runs);
        report.comparisons.push(cmp);
    }
    Ok(report)
}

fn compare(condition: Condition, runs: &[RunRecord]) -> Comparison {
    let get = |m: MmvMethod| {
        runs.iter()
            .find(|r| r.method == m)
            .and_then(|r| r.result.as_ref())
            .expect("all three methods ran")
    };
    let base = get(MmvMethod::FiveTransition);
    let lp = get(MmvMethod::LpOrthonormal);
    let hs = get(MmvMethod::HalfspaceOrthonormal);
    let scale = lp.points.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let slack = 1e-6 * scale;
    Comparison {
        condition,
        baseline_volume: base.volume,
        lp_volume: lp.volume,
        halfspace_volume: hs.volume,
        baseline_deficit: 1.0 - base.volume / lp.volume,
        baseline_accepted: base.points.len(),
        baseline_inside_halfspace: base.points.iter().all(|p| hs.hull.contains(p, slack)),
        lp_inside_halfspace: lp.points.iter().all(|p| hs.hull.contains(p, slack)),
        chain_holds: base.volume < lp.volume && lp.volume <= hs.volume + 1e-9,
    }
}

/// A single method on a single condition, for mesh export.
pub fn run_single(cond: Condition, method: MmvMethod, samples: usize, seed: u64, data: &DataSource) -> Result<RunRecord> {
    let cfg = ExperimentConfig {
        pairs: vec![(cond.phi, cond.psi)],
        greys: vec![cond.grey],
        steps_nm: vec![cond.step_nm],
        methods: vec![method],
        samples: vec![samples],
        halfspace_samples: vec![samples],
        seed,
        data: data.clone(),
    };
    cfg.validate()?;
    let mut runs = method_runs("export_mesh", &cfg, cond)?;
    Ok(runs.pop().expect("one run"))
}
