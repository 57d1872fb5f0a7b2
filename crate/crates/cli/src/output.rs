//! Result files: `records.json`, tidy `records.csv`, `comparisons.json` and
//! OBJ meshes.

use std::fmt::Display;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Serialize, Serializer};

use mmv_core::geometry::{Hull3, Point3};

use crate::Report;

pub(crate) fn display<T: Display, S: Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    experiment: &'a str,
    phi: String,
    psi: String,
    grey: f64,
    step_nm: f64,
    method: String,
    samples: usize,
    volume: f64,
    points: usize,
    hull_vertices: usize,
    hull_faces: usize,
    binding_halfspaces: Option<usize>,
}

/// Writes every output of `report` into `dir`, creating it if needed.
pub fn write_report(report: &Report, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;

    let mut json = serde_json::to_string_pretty(&report.records)?;
    json.push('\n');
    fs::write(dir.join("records.json"), json)?;

    let mut w = csv::Writer::from_path(dir.join("records.csv"))?;
    for r in &report.records {
        w.serialize(CsvRow {
            experiment: r.experiment,
            phi: r.condition.phi.to_string(),
            psi: r.condition.psi.to_string(),
            grey: r.condition.grey,
            step_nm: r.condition.step_nm,
            method: r.method.to_string(),
            samples: r.samples,
            volume: r.volume,
            points: r.points,
            hull_vertices: r.hull_vertices,
            hull_faces: r.hull_faces,
            binding_halfspaces: r.binding_halfspaces,
        })?;
    }
    w.flush()?;

    if !report.comparisons.is_empty() {
        let mut json = serde_json::to_string_pretty(&report.comparisons)?;
        json.push('\n');
        fs::write(dir.join("comparisons.json"), json)?;
    }

    for r in &report.records {
        if let (Some(name), Some(res)) = (&r.mesh, &r.result) {
            write_obj(&res.hull, &dir.join(name))?;
        }
    }
    Ok(())
}

/// Triangle mesh of `hull`, outward-facing, 1-based indices.
pub fn write_obj(hull: &Hull3, path: &Path) -> Result<()> {
    let file = fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for v in hull.vertices() {
        writeln!(w, "v {} {} {}", v[0], v[1], v[2])?;
    }
    for f in hull.faces() {
        writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    w.flush()?;
    Ok(())
}

/// Vertices and zero-based triangles of an OBJ file written by [`write_obj`].
pub fn read_obj(path: &Path) -> Result<(Vec<Point3>, Vec<[usize; 3]>)> {
    let file = fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let xs: Vec<f64> = parts.map(str::parse).collect::<Result<_, _>>()?;
                if xs.len() != 3 {
                    bail!("line {}: expected 3 coordinates", n + 1);
                }
                vertices.push([xs[0], xs[1], xs[2]]);
            }
            Some("f") => {
                let ix: Vec<usize> = parts
                    .map(|p| p.split('/').next().unwrap_or(p).parse::<usize>())
                    .collect::<Result<_, _>>()?;
                if ix.len() != 3 || ix.iter().any(|&i| i == 0 || i > vertices.len()) {
                    bail!("line {}: bad triangle", n + 1);
                }
                faces.push([ix[0] - 1, ix[1] - 1, ix[2] - 1]);
            }
            _ => {}
        }
    }
    Ok((vertices, faces))
}
