use std::io::Write;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::lanczos::{lowest_eigenpair, LanczosOptions};
use super::operator::{inner, FieldOperatorMatrix};
use super::space::TruncatedFockSpace;
use crate::error::{Error, Result};
use crate::qei_bounds::BoundResult;

const UNIT_TOL: f64 = 1e-12;

/// Unit vector on a truncated basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    coeffs: Vec<Complex64>,
}

impl StateVector {
    /// Normalizes `coeffs`; rejects the zero vector.
    pub fn new(mut coeffs: Vec<Complex64>) -> Result<Self> {
        let n = coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidParameter("state vector has zero or non-finite norm".into()));
        }
        coeffs.iter_mut().for_each(|z| *z /= n);
        Ok(Self { coeffs })
    }

    pub fn vacuum(space: &TruncatedFockSpace) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); space.dimension()];
        coeffs[space.vacuum_index()] = Complex64::new(1.0, 0.0);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn norm_defect(&self) -> f64 {
        (self.coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() - 1.0).abs()
    }

    pub fn is_normalized(&self) -> bool {
        self.norm_defect() <= UNIT_TOL
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Complex-normal coefficients from `rng`, normalized.
pub fn random_state(space: &TruncatedFockSpace, rng: &mut ChaCha8Rng) -> StateVector {
    let coeffs: Vec<Complex64> = (0..space.dimension())
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect();
    StateVector::new(coeffs).expect("a Gaussian draw is almost surely non-zero")
}

/// `ζ = ‖AΩ‖` and `η = ⟨AΩ|A|AΩ⟩ / 2ζ²`, with the vectors used to get them.
#[derive(Debug, Clone)]
pub struct EgjParameters {
    pub zeta: f64,
    pub eta: f64,
    /// `AΩ / ζ`.
    pub direction: Vec<Complex64>,
    /// `⟨Ω|A|Ω⟩` (zero for normal-ordered operators).
    pub vacuum_value: f64,
    /// `A (AΩ/ζ)`.
    pub image: Vec<Complex64>,
}

pub fn egj_parameters(a: &FieldOperatorMatrix) -> Result<EgjParameters> {
    let omega = StateVector::vacuum(a.space());
    let a_omega = a.apply(omega.coeffs());
    let vacuum_value = a_omega[0].re;
    let mut v: Vec<Complex64> = a_omega;
    let zeta = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(zeta > 0.0) {
        return Err(Error::AnnihilatesVacuum);
    }
    v.iter_mut().for_each(|z| *z /= zeta);
    let image = a.apply(&v);
    // ⟨v|Av⟩ = ⟨Ω|A³Ω⟩/ζ² for the normalized direction v
    let eta = 0.5 * inner(&v, &image).re;
    Ok(EgjParameters { zeta, eta, direction: v, vacuum_value, image })
}

/// `ψ_α = cos α Ω + sin α AΩ/‖AΩ‖`.
pub fn egj_state(a: &FieldOperatorMatrix, alpha: f64) -> Result<StateVector> {
    egj_parameters(a)?.state(alpha)
}

impl EgjParameters {
    pub fn state(&self, alpha: f64) -> Result<StateVector> {
        let (s, c) = alpha.sin_cos();
        let mut coeffs: Vec<Complex64> = self.direction.iter().map(|z| z * s).collect();
        coeffs[0] += c;
        StateVector::new(coeffs)
    }

    /// `ζ sin 2α + η (1 − cos 2α)`.
    pub fn predicted(&self, alpha: f64) -> f64 {
        self.zeta * (2.0 * alpha).sin() + self.eta * (1.0 - (2.0 * alpha).cos())
    }

    /// `⟨ψ_α|A|ψ_α⟩` on the span of `Ω` and `AΩ`, using `⟨Ω|A v⟩` read off
    /// `A v` (it equals `ζ` only if `A` is hermitian on the truncation).
    pub fn direct(&self, alpha: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        let cross = self.image[0].re;
        let far = inner(&self.direction, &self.image).re;
        c * c * self.vacuum_value + 2.0 * s * c * cross + s * s * far
    }
}

/// `η − √(η² + ζ²)`, the minimum over `α` of `ζ sin 2α + η(1 − cos 2α)`.
pub fn egj_bound(zeta: f64, eta: f64) -> Result<f64> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!("ζ must be positive, got {zeta}")));
    }
    if !eta.is_finite() {
        return Err(Error::InvalidParameter("η must be finite".into()));
    }
    // rationalized form avoids cancellation when η ≫ ζ
    let r = eta.hypot(zeta);
    Ok(if eta > 0.0 { -zeta * zeta / (eta + r) } else { eta - r })
}

/// Which states [`verify_qei`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSample {
    pub random: usize,
    pub seed: u64,
    pub include_vacuum: bool,
    pub include_lowest: bool,
    /// Number of `α` values in `[0, π)` for the `ψ_α` family.
    pub egj_alphas: usize,
}

impl Default for StateSample {
    fn default() -> Self {
        Self { random: 200, seed: 0, include_vacuum: true, include_lowest: true, egj_alphas: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub label: String,
    pub expectation: f64,
    pub margin: f64,
    pub violates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QeiReport {
    pub bound: BoundResult,
    pub tolerance: f64,
    pub min_expectation: f64,
    pub max_expectation: f64,
    pub lowest_eigenvalue: Option<f64>,
    pub lowest_residual: Option<f64>,
    pub violations: usize,
    pub pass: bool,
    pub dimension: usize,
    pub states: Vec<StateRecord>,
}

impl QeiReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("reports are serializable")
    }

    /// Per-state CSV `(label, expectation, margin, violates)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["label", "expectation", "margin", "violates"])?;
        for s in &self.states {
            w.write_record([
                s.label.clone(),
                format!("{:.17e}", s.expectation),
                format!("{:.17e}", s.margin),
                s.violates.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relative slack on the bound used by [`verify_qei`].
pub const QEI_REL_TOL: f64 = 1e-8;

/// Checks `⟨ψ|A|ψ⟩ ≥ bound − tol` over the requested sample, where
/// `tol = error_estimate + 1e-8 · |bound|`.
pub fn verify_qei(a: &FieldOperatorMatrix, bound: &BoundResult, sample: StateSample) -> Result<QeiReport> {
    verify_qei_with(a, bound, sample, QEI_REL_TOL, LanczosOptions::default())
}

/// [`verify_qei`] with an explicit relative slack and eigensolver settings.
pub fn verify_qei_with(
    a: &FieldOperatorMatrix,
    bound: &BoundResult,
    sample: StateSample,
    rel_tol: f64,
    lanczos: LanczosOptions,
) -> Result<QeiReport> {
    if !(rel_tol >= 0.0 && rel_tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("relative tolerance must be non-negative, got {rel_tol}")));
    }
    let space = a.space().clone();
    let tolerance = bound.error_estimate + rel_tol * bound.value.abs();
    let mut states = Vec::new();
    let mut record = |label: String, e: f64| {
        let margin = e - bound.value;
        states.push(StateRecord { label, expectation: e, margin, violates: margin < -tolerance });
    };
    if sample.include_vacuum {
        record("vacuum".into(), a.expectation(StateVector::vacuum(&space).coeffs()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sample.seed);
    for i in 0..sample.random {
        let psi = random_state(&space, &mut rng);
        record(format!("random-{i}"), a.expectation(psi.coeffs()));
    }
    if sample.egj_alphas > 0 {
        let p = egj_parameters(a)?;
        for i in 0..sample.egj_alphas {
            let alpha = std::f64::consts::PI * i as f64 / sample.egj_alphas as f64;
            let psi = p.state(alpha)?;
            record(format!("egj-alpha-{alpha:.6}"), a.expectation(psi.coeffs()));
        }
    }
    let (mut lowest_eigenvalue, mut lowest_residual) = (None, None);
    if sample.include_lowest {
        let start = random_state(&space, &mut rng);
        let e = lowest_eigenpair(a, start.coeffs(), lanczos)?;
        lowest_eigenvalue = Some(e.value);
        lowest_residual = Some(e.residual);
        record("lowest-eigenvector".into(), a.expectation(&e.vector));
    }
    let violations = states.iter().filter(|s| s.violates).count();
    let min_expectation = states.iter().map(|s| s.expectation).fold(f64::INFINITY, f64::min);
    let max_expectation = states.iter().map(|s| s.expectation).fold(f64::NEG_INFINITY, f64::max);
    Ok(QeiReport {
        bound: bound.clone(),
        tolerance,
        min_expectation,
        max_expectation,
        lowest_eigenvalue,
        lowest_residual,
        violations,
        pass: violations == 0,
        dimension: space.dimension(),
        states,
    })
}
