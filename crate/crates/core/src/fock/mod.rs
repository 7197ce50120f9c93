//! Truncated Fock-space models of a free real scalar field in a periodic
//! 1+1 dimensional box of length `L`.
//!
//! The field is expanded as `φ = Σ_n c_n (a_n e_n + a_n† ē_n)` with
//! `c_n = (2Lω_n)^{-1/2}` and `e_n = e^{-iω_n t + i k_n x}`.

mod lanczos;
mod operator;
mod space;
mod verify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qei_bounds::TwoPointKernel;

pub use lanczos::{lowest_eigenpair, Eigenpair, LanczosOptions, LinearOperator};
pub use operator::{energy_density_matrix, smeared_energy, weighted_energy, FieldOperatorMatrix, VacuumEnergy};
pub use space::{build_space, Occupation, TruncatedFockSpace, DEFAULT_DIMENSION_CAP};
pub use verify::{
    egj_bound, egj_parameters, egj_state, random_state, verify_qei, verify_qei_with, EgjParameters, QeiReport,
    StateRecord, StateSample, StateVector, QEI_REL_TOL,
};

/// Whether the `n = 0` mode is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMode {
    /// Drop `n = 0`; required when `m = 0`.
    #[default]
    Exclude,
    /// Keep `n = 0` with `ω₀ = m`; needs `m > 0`.
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub n: i64,
    pub k: f64,
    pub omega: f64,
}

/// Box modes `k_n = 2πn/L`, `ω_n = √(k_n² + m²)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    length: f64,
    mass: f64,
    zero_mode: ZeroMode,
    modes: Vec<Mode>,
}

impl ModeBasis {
    pub fn new(length: f64, mass: f64, n_min: i64, n_max: i64, zero_mode: ZeroMode) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!("box length must be positive, got {length}")));
        }
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidParameter(format!("mass must be non-negative, got {mass}")));
        }
        if zero_mode == ZeroMode::Include && mass == 0.0 && n_min <= 0 && n_max >= 0 {
            return Err(Error::InvalidParameter("massless zero mode has ω = 0; use a small mass or exclude it".into()));
        }
        let modes: Vec<Mode> = (n_min..=n_max)
            .filter(|&n| n != 0 || zero_mode == ZeroMode::Include)
            .map(|n| {
                let k = 2.0 * std::f64::consts::PI * n as f64 / length;
                Mode { n, k, omega: (k * k + mass * mass).sqrt() }
            })
            .collect();
        if modes.is_empty() {
            return Err(Error::InvalidParameter("mode basis is empty".into()));
        }
        if modes.len() > u16::MAX as usize {
            return Err(Error::InvalidParameter("too many modes".into()));
        }
        Ok(Self { length, mass, zero_mode, modes })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn zero_mode(&self) -> ZeroMode {
        self.zero_mode
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn omega_max(&self) -> f64 {
        self.modes.iter().map(|m| m.omega).fold(0.0, f64::max)
    }

    /// Reference two-point kernel of `:T₀₀:` on a worldline: one line
    /// `(ω_n, ω_n/2L)` per mode.
    pub fn vacuum_kernel(&self) -> TwoPointKernel {
        let lines = self.modes.iter().map(|m| (m.omega, m.omega / (2.0 * self.length))).collect();
        TwoPointKernel::new(lines, None).expect("box frequencies are non-negative")
    }

    /// Unsubtracted vacuum energy density `Σ_n ω_n / 2L` of the retained modes.
    pub fn vacuum_energy_density(&self) -> f64 {
        self.modes.iter().map(|m| m.omega).sum::<f64>() / (2.0 * self.length)
    }
}

/// Model description file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockModel {
    #[serde(rename = "L")]
    pub length: f64,
    pub mass: f64,
    pub n_min: i64,
    pub n_max: i64,
    #[serde(rename = "N_max")]
    pub occupation_cap: usize,
    #[serde(default)]
    pub zero_mode: ZeroMode,
}

impl FockModel {
    pub fn basis(&self) -> Result<ModeBasis> {
        ModeBasis::new(self.length, self.mass, self.n_min, self.n_max, self.zero_mode)
    }

    pub fn build(&self, dimension_cap: usize) -> Result<TruncatedFockSpace> {
        build_space(self.basis()?, self.occupation_cap, dimension_cap)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_mode_policy() {
        let b = ModeBasis::new(10.0, 0.0, -2, 2, ZeroMode::Exclude).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.modes().iter().all(|m| m.omega > 0.0));
        assert!(ModeBasis::new(10.0, 0.0, -2, 2, ZeroMode::Include).is_err());
        let b = ModeBasis::new(10.0, 0.1, -2, 2, ZeroMode::Include).unwrap();
        assert_eq!(b.len(), 5);
        assert!(ModeBasis::new(10.0, 0.0, 0, 0, ZeroMode::Exclude).is_err());
    }

    #[test]
    fn model_json_round_trip() {
        let text = r#"{"L": 50, "mass": 0, "n_min": -20, "n_max": 20, "N_max": 4, "zero_mode": "exclude"}"#;
        let m = FockModel::from_json(text).unwrap();
        assert_eq!(m.basis().unwrap().len(), 40);
        let back: FockModel = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
