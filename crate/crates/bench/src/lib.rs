//! Fixtures shared by the benchmarks.

use mmv_core::data::{judd_vos_system, Illuminant};
use mmv_core::mmv::MismatchProblem;
use mmv_core::spectral::WavelengthGrid;

/// Flat 50% grey under `phi`, viewed under `psi`, on the 380–730 nm grid.
pub fn grey_problem(phi: Illuminant, psi: Illuminant, step_nm: f64) -> MismatchProblem {
    let grid = WavelengthGrid::visible(step_nm).expect("valid step");
    MismatchProblem::flat_grey(
        judd_vos_system(phi, &grid).expect("bundled data"),
        judd_vos_system(psi, &grid).expect("bundled data"),
        0.5,
    )
    .expect("grey is always feasible")
}
