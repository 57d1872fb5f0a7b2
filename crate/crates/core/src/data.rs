//! Colour matching functions and illuminants shipped with the crate.

use std::fmt;
use std::str::FromStr;

use crate::spectral::{load_spectral_table, ColourSystem, SpectralError, TabulatedSpectrum, WavelengthGrid};

pub const JUDD_VOS_CSV: &str = include_str!("../data/judd_vos_2deg.csv");
pub const D65_CSV: &str = include_str!("../data/d65.csv");
pub const A_CSV: &str = include_str!("../data/a.csv");
pub const F11_CSV: &str = include_str!("../data/f11.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Illuminant {
    D65,
    A,
    F11,
}

impl Illuminant {
    pub const ALL: [Illuminant; 3] = [Illuminant::D65, Illuminant::A, Illuminant::F11];

    pub fn name(self) -> &'static str {
        match self {
            Illuminant::D65 => "D65",
            Illuminant::A => "A",
            Illuminant::F11 => "F11",
        }
    }

    /// File name of the shipped table, also used for data directory overrides.
    pub fn file_name(self) -> &'static str {
        match self {
            Illuminant::D65 => "d65.csv",
            Illuminant::A => "a.csv",
            Illuminant::F11 => "f11.csv",
        }
    }

    fn csv(self) -> &'static str {
        match self {
            Illuminant::D65 => D65_CSV,
            Illuminant::A => A_CSV,
            Illuminant::F11 => F11_CSV,
        }
    }

    pub fn spectrum(self) -> TabulatedSpectrum {
        single(load_spectral_table(self.csv().as_bytes()).expect("shipped illuminant table parses"))
    }
}

impl fmt::Display for Illuminant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Illuminant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "D65" => Ok(Illuminant::D65),
            "A" => Ok(Illuminant::A),
            "F11" => Ok(Illuminant::F11),
            other => Err(format!("unknown illuminant `{other}` (expected D65, A or F11)")),
        }
    }
}

fn single(mut v: Vec<TabulatedSpectrum>) -> TabulatedSpectrum {
    assert_eq!(v.len(), 1, "illuminant table has one spectrum column");
    v.pop().unwrap()
}

pub const JUDD_VOS_FILE: &str = "judd_vos_2deg.csv";

/// Judd-Vos modified CIE 1931 2° colour matching functions (x̄, ȳ, z̄).
pub fn judd_vos_cmfs() -> Vec<TabulatedSpectrum> {
    load_spectral_table(JUDD_VOS_CSV.as_bytes()).expect("shipped CMF table parses")
}

/// Judd-Vos observer under `illuminant`, on `grid`.
pub fn judd_vos_system(illuminant: Illuminant, grid: &WavelengthGrid) -> Result<ColourSystem, SpectralError> {
    ColourSystem::from_tabulated(&judd_vos_cmfs(), &illuminant.spectrum(), grid)
}
