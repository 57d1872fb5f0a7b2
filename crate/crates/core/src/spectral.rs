//! Wavelength grids, sampled spectra and colour systems.
//!
//! A [`ColourSystem`] is the per-wavelength product of sensor sensitivities and
//! an illuminant, tabulated on a uniform [`WavelengthGrid`]. Colour responses
//! are computed with the rectangle rule scaled by the grid step, so responses
//! stay comparable when the grid is refined.

use std::io::Read;

use nalgebra::DMatrix;
use thiserror::Error;

/// Relative tolerance used when comparing grid parameters.
const GRID_TOL: f64 = 1e-9;

/// Singular values below this fraction of the largest one are treated as zero.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid wavelength grid: {0}")]
    InvalidGrid(String),
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("row {row}: wavelength {wavelength} nm is not strictly increasing")]
    NonMonotone { row: usize, wavelength: f64 },
    #[error("row {row}: non-finite value in column `{column}`")]
    NonFinite { row: usize, column: String },
    #[error("target range {target_min}-{target_max} nm exceeds source range {source_min}-{source_max} nm")]
    OutOfRange {
        target_min: f64,
        target_max: f64,
        source_min: f64,
        source_max: f64,
    },
    #[error("spectra are not sampled on the same wavelength grid")]
    GridMismatch,
    #[error("expected {expected} values, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("colour system is rank deficient at column {index} (singular value ratio {ratio:e})")]
    RankDeficient { index: usize, ratio: f64 },
    #[error("spectral table: {0}")]
    Csv(#[from] csv::Error),
}

/// Uniform sampling of `[lambda_min, lambda_max]` with step `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavelengthGrid {
    lambda_min: f64,
    lambda_max: f64,
    delta: f64,
    q: usize,
}

impl WavelengthGrid {
    pub fn new(lambda_min: f64, lambda_max: f64, delta: f64) -> Result<Self, SpectralError> {
        if !(lambda_min.is_finite() && lambda_max.is_finite() && delta.is_finite()) {
            return Err(SpectralError::InvalidGrid("non-finite bounds".into()));
        }
        if delta <= 0.0 {
            return Err(SpectralError::InvalidGrid(format!("step {delta} must be positive")));
        }
        let span = (lambda_max - lambda_min) / delta;
        let q = (span + GRID_TOL).floor() + 1.0;
        if !(q >= 2.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "range {lambda_min}-{lambda_max} at {delta} nm has fewer than two samples"
            )));
        }
        Ok(Self {
            lambda_min,
            lambda_max,
            delta,
            q: q as usize,
        })
    }

    /// The canonical 380-730 nm grid at the given step.
    pub fn visible(delta: f64) -> Result<Self, SpectralError> {
        Self::new(380.0, 730.0, delta)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn len(&self) -> usize {
        self.q
    }

    pub fn is_empty(&self) -> bool {
        self.q == 0
    }

    /// Wavelength of sample `i`.
    pub fn wavelength(&self, i: usize) -> f64 {
        self.lambda_min + i as f64 * self.delta
    }

    /// Last sample position, which may fall short of `lambda_max`.
    pub fn last(&self) -> f64 {
        self.wavelength(self.q - 1)
    }

    pub fn wavelengths(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.q).map(move |i| self.wavelength(i))
    }

    /// Grids are compatible when they produce the same sample positions.
    pub fn same_as(&self, other: &WavelengthGrid) -> bool {
        let tol = GRID_TOL * self.delta.max(other.delta);
        self.q == other.q
            && (self.lambda_min - other.lambda_min).abs() <= tol
            && (self.delta - other.delta).abs() <= tol
    }
}

/// Values of a spectral quantity on a [`WavelengthGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: WavelengthGrid,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn new(grid: WavelengthGrid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite {
                row: i + 1,
                column: "value".into(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: WavelengthGrid, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_tabulated(&self, name: impl Into<String>) -> TabulatedSpectrum {
        TabulatedSpectrum {
            name: name.into(),
            wavelengths: self.grid.wavelengths().collect(),
            values: self.values.clone(),
        }
    }

    pub fn resample(&self, target: &WavelengthGrid) -> Result<Spectrum, SpectralError> {
        if self.grid.same_as(target) {
            return Ok(Spectrum {
                grid: *target,
                values: self.values.clone(),
            });
        }
        resample(&self.to_tabulated(""), target)
    }
}

/// A named spectrum at the sample positions of its source table, which need
/// not be uniformly spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpectrum {
    pub name: String,
    pub wavelengths: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedSpectrum {
    /// The uniform grid the samples sit on, if they are uniformly spaced.
    pub fn native_grid(&self) -> Option<WavelengthGrid> {
        let n = self.wavelengths.len();
        if n < 2 {
            return None;
        }
        let first = self.wavelengths[0];
        let step = self.wavelengths[1] - first;
        let uniform = self
            .wavelengths
            .iter()
            .enumerate()
            .all(|(i, &w)| (w - (first + i as f64 * step)).abs() <= 1e-6 * step);
        if !uniform {
            return None;
        }
        WavelengthGrid::new(first, self.wavelengths[n - 1], step).ok()
    }

    /// Converts to an on-grid [`Spectrum`] when the samples are uniform.
    pub fn to_spectrum(&self) -> Option<Spectrum> {
        let grid = self.native_grid()?;
        Spectrum::new(grid, self.values.clone()).ok()
    }
}

/// Reads a CSV spectral table: a wavelength column followed by one column per
/// named spectrum. Lines starting with `#` are comments.
///
/// Row numbers in errors count data rows from 1.
pub fn load_spectral_table<R: Read>(source: R) -> Result<Vec<TabulatedSpectrum>, SpectralError> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);
    let names: Vec<String> = reader.headers()?.iter().skip(1).map(str::to_owned).collect();

    let mut wavelengths = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != names.len() + 1 {
            return Err(SpectralError::MalformedRow {
                row,
                reason: format!("expected {} fields, found {}", names.len() + 1, record.len()),
            });
        }
        let parse = |field: &str, column: &str| -> Result<f64, SpectralError> {
            let v: f64 = field.parse().map_err(|_| SpectralError::MalformedRow {
                row,
                reason: format!("cannot parse `{field}` as a number"),
            })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(SpectralError::NonFinite {
                    row,
                    column: column.to_owned(),
                })
            }
        };
        let w = parse(&record[0], "wavelength")?;
        if let Some(&prev) = wavelengths.last() {
            if w <= prev {
                return Err(SpectralError::NonMonotone { row, wavelength: w });
            }
        }
        wavelengths.push(w);
        for (c, name) in names.iter().enumerate() {
            columns[c].push(parse(&record[c + 1], name)?);
        }
    }

    if wavelengths.is_empty() {
        return Ok(Vec::new());
    }
    Ok(names
        .into_iter()
        .zip(columns)
        .map(|(name, values)| TabulatedSpectrum {
            name,
            wavelengths: wavelengths.clone(),
            values,
        })
        .collect())
}

/// Linear interpolation of a tabulated spectrum onto `target`. Extrapolation
/// is refused.
pub fn resample(source: &TabulatedSpectrum, target: &WavelengthGrid) -> Result<Spectrum, SpectralError> {
    let xs = &source.wavelengths;
    let n = xs.len();
    let tol = GRID_TOL * target.delta();
    if n == 0 || target.lambda_min() < xs[0] - tol || target.last() > xs[n - 1] + tol {
        return Err(SpectralError::OutOfRange {
            target_min: target.lambda_min(),
            target_max: target.last(),
            source_min: xs.first().copied().unwrap_or(f64::NAN),
            source_max: xs.last().copied().unwrap_or(f64::NAN),
        });
    }

    let mut values = Vec::with_capacity(target.len());
    let mut seg = 0;
    for w in target.wavelengths() {
        while seg + 1 < n - 1 && xs[seg + 1] < w - tol {
            seg += 1;
        }
        let v = if n == 1 || (w - xs[seg]).abs() <= tol {
            source.values[seg]
        } else if (w - xs[seg + 1]).abs() <= tol {
            source.values[seg + 1]
        } else {
            let t = (w - xs[seg]) / (xs[seg + 1] - xs[seg]);
            source.values[seg] * (1.0 - t) + source.values[seg + 1] * t
        };
        values.push(v);
    }
    Ok(Spectrum {
        grid: *target,
        values,
    })
}

/// A reflectance: grid values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Reflectance {
    grid: WavelengthGrid,
    values: Vec<f64>,
}

impl Reflectance {
    pub fn new(grid: WavelengthGrid, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return Err(SpectralError::MalformedRow {
                row: i + 1,
                reason: format!("reflectance {} outside [0, 1]", values[i]),
            });
        }
        Ok(Self { grid, values })
    }

    /// Clamps into `[0, 1]`; for solver output carrying round-off.
    pub(crate) fn clamped(grid: WavelengthGrid, mut values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        for v in &mut values {
            *v = v.clamp(0.0, 1.0);
        }
        Self { grid, values }
    }

    pub fn constant(grid: WavelengthGrid, level: f64) -> Self {
        Self::clamped(grid, vec![level; grid.len()])
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// A vector of sensor responses.
#[derive(Debug, Clone, PartialEq)]
pub struct ColourResponse(pub Vec<f64>);

impl ColourResponse {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `N` colour system spectra `s_i(λ) = c_i(λ) e(λ)` on a shared grid, stored
/// wavelength-major (`q` rows of `N` values).
#[derive(Debug, Clone, PartialEq)]
pub struct ColourSystem {
    grid: WavelengthGrid,
    n: usize,
    table: Vec<f64>,
}

impl ColourSystem {
    /// Builds a system from columns already on `grid`.
    pub fn from_columns(grid: WavelengthGrid, columns: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let n = columns.len();
        if n == 0 {
            return Err(SpectralError::InvalidGrid("colour system needs at least one sensor".into()));
        }
        let q = grid.len();
        let mut table = vec![0.0; q * n];
        for (i, col) in columns.iter().enumerate() {
            if col.len() != q {
                return Err(SpectralError::LengthMismatch {
                    expected: q,
                    found: col.len(),
                });
            }
            for (j, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(SpectralError::NonFinite {
                        row: j + 1,
                        column: format!("s{i}"),
                    });
                }
                table[j * n + i] = v;
            }
        }
        Ok(Self { grid, n, table })
    }

    /// Resamples tabulated sensitivities and illuminant onto `grid` and forms
    /// their product.
    pub fn from_tabulated(
        cmfs: &[TabulatedSpectrum],
        illuminant: &TabulatedSpectrum,
        grid: &WavelengthGrid,
    ) -> Result<Self, SpectralError> {
        let cmfs = cmfs
            .iter()
            .map(|c| resample(c, grid))
            .collect::<Result<Vec<_>, _>>()?;
        let illuminant = resample(illuminant, grid)?;
        make_colour_system(&cmfs, &illuminant, grid)
    }

    pub fn grid(&self) -> &WavelengthGrid {
        &self.grid
    }

    /// Number of sensors.
    pub fn sensors(&self) -> usize {
        self.n
    }

    /// Number of wavelength samples.
    pub fn samples(&self) -> usize {
        self.grid.len()
    }

    /// The `N` values at wavelength sample `j`.
    pub fn row(&self, j: usize) -> &[f64] {
        &self.table[j * self.n..(j + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.table.chunks_exact(self.n)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.table[j * self.n + i]
    }

    /// `k · s(λ_j)` for every sample.
    pub fn project(&self, k: &[f64]) -> Vec<f64> {
        assert_eq!(k.len(), self.n, "direction dimension must match sensor count");
        self.rows().map(|r| dot(r, k)).collect()
    }

    /// Responses of a raw value slice, without the [`Reflectance`] range check.
    pub fn respond_values(&self, r: &[f64]) -> Vec<f64> {
        assert_eq!(r.len(), self.samples());
        let mut z = vec![0.0; self.n];
        for (row, &rj) in self.rows().zip(r) {
            if rj != 0.0 {
                for (zi, si) in z.iter_mut().zip(row) {
                    *zi += rj * si;
                }
            }
        }
        let d = self.grid.delta();
        z.iter_mut().for_each(|v| *v *= d);
        z
    }

    /// Keeps the listed columns, in order.
    pub fn select(&self, columns: &[usize]) -> ColourSystem {
        let cols: Vec<Vec<f64>> = columns.iter().map(|&i| self.column(i)).collect();
        ColourSystem::from_columns(self.grid, &cols).expect("selected columns come from a valid system")
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Pointwise product of each sensitivity with the illuminant.
pub fn make_colour_system(
    cmfs: &[Spectrum],
    illuminant: &Spectrum,
    grid: &WavelengthGrid,
) -> Result<ColourSystem, SpectralError> {
    if !illuminant.grid().same_as(grid) || cmfs.iter().any(|c| !c.grid().same_as(grid)) {
        return Err(SpectralError::GridMismatch);
    }
    let columns: Vec<Vec<f64>> = cmfs
        .iter()
        .map(|c| c.values().iter().zip(illuminant.values()).map(|(a, b)| a * b).collect())
        .collect();
    ColourSystem::from_columns(*grid, &columns)
}

/// Colour formation: `φ_i = Δλ Σ_j r_j s_i(λ_j)`.
pub fn respond(sys: &ColourSystem, r: &Reflectance) -> Result<ColourResponse, SpectralError> {
    if !sys.grid().same_as(r.grid()) {
        return Err(SpectralError::GridMismatch);
    }
    Ok(ColourResponse(sys.respond_values(r.values())))
}

/// Concatenates two systems column-wise, `phi` first.
pub fn stack(phi: &ColourSystem, psi: &ColourSystem) -> Result<ColourSystem, SpectralError> {
    if !phi.grid().same_as(psi.grid()) {
        return Err(SpectralError::GridMismatch);
    }
    let cols: Vec<Vec<f64>> = (0..phi.sensors())
        .map(|i| phi.column(i))
        .chain((0..psi.sensors()).map(|i| psi.column(i)))
        .collect();
    ColourSystem::from_columns(*phi.grid(), &cols)
}

/// Thin SVD `S = U D Vᵀ` of a colour system table.
#[derive(Debug, Clone)]
pub struct Orthonormalization {
    /// Orthonormal spectra `U = S V D⁻¹`, ordered by decreasing singular value.
    pub basis: ColourSystem,
    pub singular_values: Vec<f64>,
    /// Right singular vectors, `N × N` row-major; column `i` pairs with `basis` column `i`.
    pub right_vectors: Vec<f64>,
}

impl Orthonormalization {
    /// Maps a direction in orthonormal-response space to the direction in
    /// original-response space with the same optimal spectra: `V D⁻¹ k`,
    /// normalised.
    pub fn original_direction(&self, k: &[f64]) -> Vec<f64> {
        let n = self.singular_values.len();
        assert_eq!(k.len(), n);
        let mut out = vec![0.0; n];
        for (r, o) in out.iter_mut().enumerate() {
            *o = (0..n)
                .map(|c| self.right_vectors[r * n + c] * k[c] / self.singular_values[c])
                .sum();
        }
        let norm = dot(&out, &out).sqrt();
        out.iter_mut().for_each(|v| *v /= norm);
        out
    }
}

/// Orthonormal basis of the span of the system's columns.
///
/// Each output column has its largest-magnitude entry positive.
pub fn orthonormalize(sys: &ColourSystem) -> Result<Orthonormalization, SpectralError> {
    let q = sys.samples();
    let n = sys.sensors();
    let s = DMatrix::from_fn(q, n, |j, i| sys.get(j, i));
    let svd = s.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = svd.singular_values[order[0]];

    let mut columns = Vec::with_capacity(n);
    let mut singular_values = Vec::with_capacity(n);
    let mut right_vectors = vec![0.0; n * n];
    for (out_idx, &idx) in order.iter().enumerate() {
        let sigma = svd.singular_values[idx];
        let ratio = if largest > 0.0 { sigma / largest } else { 0.0 };
        if !(ratio > RANK_TOL) {
            return Err(SpectralError::RankDeficient { index: out_idx, ratio });
        }
        let mut col: Vec<f64> = u.column(idx).iter().copied().collect();
        let pivot = col.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        col.iter_mut().for_each(|v| *v *= sign);
        for r in 0..n {
            right_vectors[r * n + out_idx] = sign * v_t[(idx, r)];
        }
        columns.push(col);
        singular_values.push(sigma);
    }
    Ok(Orthonormalization {
        basis: ColourSystem::from_columns(*sys.grid(), &columns)?,
        singular_values,
        right_vectors,
    })
}
