//! Scaling limits of smeared n-point functionals on a flat chart of
//! dimension `D`.
//!
//! Pushforwards `(σ_{λ*}f)(x) = f(x/λ)` contract test functions toward the
//! origin. `N(λ) = ω⁽²⁾(σ_{λ*}f ⊗ σ_{λ*}f)^{-1/2}` (normalized to `N(1) = 1`)
//! is fitted to `λ^α` and `d = D + α` is the canonical dimension.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{egj_bound, weighted_energy, FockModel, StateVector, TruncatedFockSpace, VacuumEnergy};
use crate::quadrature::{integrate_piecewise, Tolerance};
use crate::sampling::{SamplerKind, SamplingFunction};

/// Relative tolerance separating a genuine change from rounding along a sequence.
pub const TREND_TOL: f64 = 1e-9;
/// Fitted `|d|` below this is treated as the boundary `d = 0`.
pub const DIMENSION_TOL: f64 = 1e-6;
/// Largest `|f̂(2ω_max)/f̂(0)|` accepted by the Fock adapter.
pub const WINDOW_TOL: f64 = 1e-4;

/// Separable test function `f(x) = Π_i f_i(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    factors: Vec<SamplingFunction>,
}

impl TestFunction {
    pub fn new(factors: Vec<SamplingFunction>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("test function needs at least one factor".into()));
        }
        Ok(Self { factors })
    }

    pub fn one_dimensional(f: SamplingFunction) -> Self {
        Self { factors: vec![f] }
    }

    /// `Π exp(−x_i²/2τ²)`.
    pub fn gaussian(dim: usize, tau: f64) -> Result<Self> {
        Self::new((0..dim).map(|_| SamplingFunction::gaussian(tau)).collect::<Result<_>>()?)
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[SamplingFunction] {
        &self.factors
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.factors.iter().zip(x).map(|(f, &xi)| f.eval(xi)).product()
    }

    /// `∫ f dᴰx` with the summed quadrature error.
    pub fn integral(&self) -> (f64, f64) {
        let parts: Vec<_> = self.factors.iter().map(|f| f.mass()).collect();
        let value: f64 = parts.iter().map(|p| p.value).product();
        let rel: f64 = parts.iter().map(|p| p.error / p.value.abs().max(f64::MIN_POSITIVE)).sum();
        (value, rel * value.abs())
    }

    /// Bounding box of the support.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.factors.iter().map(|f| f.support()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        let mut sign = 1.0;
        for f in &self.factors {
            let s = match f.kind() {
                SamplerKind::Tabulated => {
                    if f.values().iter().all(|&v| v >= 0.0) {
                        1.0
                    } else if f.values().iter().all(|&v| v <= 0.0) {
                        -1.0
                    } else {
                        return false;
                    }
                }
                _ => f.amplitude().signum(),
            };
            sign *= s;
        }
        sign > 0.0
    }

    pub fn scaled_by(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.factors[0] = out.factors[0].scaled_by(c);
        out
    }

    /// `f̂(k)` of a one-dimensional test function.
    pub fn fourier_1d(&self, k: f64) -> Result<Complex64> {
        if self.dimension() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dimension() });
        }
        Ok(self.factors[0].fourier(k))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("λ must lie in (0, 1], got {lambda}")));
    }
    Ok(())
}

/// `(σ_{λ*}f)(x) = f(x/λ)`; table nodes move to `λ·x_i` carrying their values.
pub fn pushforward(f: &TestFunction, lambda: f64) -> Result<TestFunction> {
    check_lambda(lambda)?;
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let factors = f.factors.iter().map(|g| g.scale_family(1.0 / lambda)).collect::<Result<_>>()?;
    Ok(TestFunction { factors })
}

/// `f_λ = λ^{−D} σ_{λ*}f` after normalizing `∫f = 1`.
pub fn delta_family(f: &TestFunction, lambda: f64) -> Result<TestFunction> {
    if !f.is_nonnegative() {
        return Err(Error::InvalidParameter("delta family needs a nonnegative test function".into()));
    }
    let (mass, _) = f.integral();
    if !(mass > 0.0) {
        return Err(Error::InvalidParameter("test function has zero integral".into()));
    }
    let pushed = pushforward(f, lambda)?;
    Ok(pushed.scaled_by(lambda.powi(-(f.dimension() as i32)) / mass))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelTag {
    Homogeneous { h: f64, c: f64 },
    FockAdapter { model: FockModel, x0: f64 },
    Custom { name: String },
}

/// Smeared n-point functionals `ω⁽ⁿ⁾(f^{⊗n})` of a vacuum-subtracted field.
pub trait ScalingModel: Sync {
    fn dimension(&self) -> usize;
    fn tag(&self) -> ModelTag;
    fn two_point(&self, f: &TestFunction) -> Result<f64>;
    fn three_point(&self, f: &TestFunction) -> Result<f64>;
    fn one_point(&self, _f: &TestFunction) -> Result<f64> {
        Ok(0.0)
    }

    fn n_point(&self, n: usize, f: &TestFunction) -> Result<f64> {
        if f.dimension() != self.dimension() {
            return Err(Error::DimensionMismatch { expected: self.dimension(), found: f.dimension() });
        }
        match n {
            1 => self.one_point(f),
            2 => self.two_point(f),
            3 => self.three_point(f),
            _ => Err(Error::InvalidParameter(format!("n-point order {n} not supported"))),
        }
    }
}

/// `ω⁽²⁾(f̄⊗g) = C ∫₀^∞ k^{2h−1} conj(f̂(k)) ĝ(k) dk` on a one-dimensional chart,
/// with `ω⁽³⁾ ≡ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homogeneous {
    pub h: f64,
    pub c: f64,
}

impl Homogeneous {
    pub fn new(h: f64, c: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite() && c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("homogeneous model needs h > 0, C > 0 (got h={h}, C={c})")));
        }
        Ok(Self { h, c })
    }

    /// Analytic `α = h − D`.
    pub fn alpha(&self) -> f64 {
        self.h - 1.0
    }
}

impl ScalingModel for Homogeneous {
    fn dimension(&self) -> usize {
        1
    }

    fn tag(&self) -> ModelTag {
        ModelTag::Homogeneous { h: self.h, c: self.c }
    }

    fn two_point(&self, f: &TestFunction) -> Result<f64> {
        let g = &f.factors()[0];
        let (cutoff, scale) = g.spectral_extent();
        let mut breaks = vec![0.0];
        let mut b = scale;
        while b < cutoff {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(cutoff);
        let e = 2.0 * self.h - 1.0;
        let tol = Tolerance { abs: 0.0, rel: 1e-12, max_intervals: 20000 };
        let r = integrate_piecewise(|k| if k > 0.0 { k.powf(e) * g.power(k) } else { 0.0 }, &breaks, tol);
        if !r.value.is_finite() {
            return Err(Error::Resolution("homogeneous two-point integral diverged".into()));
        }
        Ok(self.c * r.value)
    }

    fn three_point(&self, _f: &TestFunction) -> Result<f64> {
        Ok(0.0)
    }
}

/// `T(f) = ∫ f(t) :T₀₀:(t, x₀) dt` in a box Fock model, probed in the vacuum.
#[derive(Debug, Clone)]
pub struct FockAdapter {
    model: FockModel,
    space: Arc<TruncatedFockSpace>,
    x0: f64,
}

impl FockAdapter {
    /// Only the two-particle sector enters `ω⁽²⁾` and `ω⁽³⁾`, so the
    /// occupation cap is lowered to 2.
    pub fn new(model: &FockModel, x0: f64) -> Result<Self> {
        let mut m = model.clone();
        m.occupation_cap = 2;
        let space = Arc::new(m.build(usize::MAX)?);
        Ok(Self { model: model.clone(), space, x0 })
    }

    pub fn omega_max(&self) -> f64 {
        self.space.basis().omega_max()
    }

    /// Whether the pair weight `f̂(ω_j + ω_k)` has decayed before the cutoff.
    pub fn resolves(&self, f: &TestFunction) -> bool {
        let g = &f.factors()[0];
        let edge = g.fourier(2.0 * self.omega_max()).norm();
        let zero = g.fourier(0.0).norm();
        edge <= WINDOW_TOL * zero
    }

    /// `[λ_lo, λ_hi]` of the grid points where `σ_{λ*}f` is resolved.
    pub fn window(&self, f: &TestFunction, lambdas: &[f64]) -> Option<(f64, f64)> {
        let ok: Vec<f64> = lambdas
            .iter()
            .copied()
            .filter(|&l| pushforward(f, l).map(|p| self.resolves(&p)).unwrap_or(false))
            .collect();
        let lo = ok.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ok.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (!ok.is_empty()).then_some((lo, hi))
    }

    fn image(&self, f: &TestFunction) -> Result<(Vec<Complex64>, crate::fock::FieldOperatorMatrix)> {
        if !self.resolves(f) {
            return Err(Error::Resolution(format!(
                "test function is not resolved by the mode cutoff ω_max = {}",
                self.omega_max()
            )));
        }
        let g = f.factors()[0].clone();
        let mass = g.mass().value;
        let a = weighted_energy(&self.space, |u| g.fourier(u), mass, self.x0, VacuumEnergy::NormalOrdered, "T(f)")?;
        let omega = StateVector::vacuum(&self.space);
        Ok((a.apply(omega.coeffs()), a))
    }
}

impl ScalingModel for FockAdapter {
    fn dimension(&self) -> usize {
        1
    }

    fn tag(&self) -> ModelTag {
        ModelTag::FockAdapter { model: self.model.clone(), x0: self.x0 }
    }

    fn two_point(&self, f: &TestFunction) -> Result<f64> {
        let (v, _) = self.image(f)?;
        Ok(v.iter().map(|z| z.norm_sqr()).sum())
    }

    fn three_point(&self, f: &TestFunction) -> Result<f64> {
        let (v, a) = self.image(f)?;
        let w = a.apply(&v);
        Ok(v.iter().zip(&w).map(|(x, y)| (x.conj() * y).re).sum())
    }
}

fn check_grid(lambdas: &[f64]) -> Result<()> {
    for &l in lambdas {
        check_lambda(l)?;
    }
    if lambdas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("λ grid must be strictly decreasing".into()));
    }
    Ok(())
}

/// `count` points from `start` down to `stop`, equally spaced in `log λ`.
pub fn geometric_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    check_lambda(start)?;
    check_lambda(stop)?;
    if count < 2 || stop >= start {
        return Err(Error::InvalidParameter("geometric grid needs start > stop and at least two points".into()));
    }
    let r = (stop / start).ln() / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| start * (r * i as f64).exp()).collect();
    out[count - 1] = stop;
    Ok(out)
}

/// `ω⁽ⁿ⁾((σ_{λ*}f)^{⊗n})` for each `λ`, in grid order.
pub fn scaling_sequence<M: ScalingModel + ?Sized>(model: &M, f: &TestFunction, n: usize, lambdas: &[f64]) -> Result<Vec<f64>> {
    lambdas.par_iter().map(|&l| model.n_point(n, &pushforward(f, l)?)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub dimension: usize,
    pub lambdas: Vec<f64>,
    pub n_values: Vec<f64>,
    pub alpha: f64,
    pub canonical_dimension: f64,
    /// RMS residual of `log N` about the fitted line.
    pub residual: f64,
    /// Grid steps where `N` fails to be monotone.
    pub monotonicity_violations: usize,
}

/// Least-squares slope, intercept and RMS residual.
fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("λ grid has no spread".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Ok((slope, icpt, (rss / n).sqrt()))
}

pub fn fit_n_alpha<M: ScalingModel + ?Sized>(model: &M, f: &TestFunction, lambdas: &[f64]) -> Result<ScalingFit> {
    check_grid(lambdas)?;
    if lambdas.len() < 2 {
        return Err(Error::DegenerateFit("need at least two λ values".into()));
    }
    let seq = scaling_sequence(model, f, 2, lambdas)?;
    let base = model.n_point(2, f)?;
    if !(base > 0.0) || seq.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Precondition("two-point sequence must be strictly positive".into()));
    }
    let n_values: Vec<f64> = seq.iter().map(|v| (base / v).sqrt()).collect();
    let lx: Vec<f64> = lambdas.iter().map(|l| l.ln()).collect();
    let ly: Vec<f64> = n_values.iter().map(|v| v.ln()).collect();
    let (alpha, _, residual) = linear_fit(&lx, &ly)?;
    let inc = n_values.windows(2).filter(|w| w[1] > w[0] * (1.0 + TREND_TOL)).count();
    let dec = n_values.windows(2).filter(|w| w[1] < w[0] * (1.0 - TREND_TOL)).count();
    Ok(ScalingFit {
        dimension: model.dimension(),
        lambdas: lambdas.to_vec(),
        n_values,
        alpha,
        canonical_dimension: model.dimension() as f64 + alpha,
        residual,
        monotonicity_violations: inc.min(dec),
    })
}

/// Indices of grid points with `λ ≤ 10 λ_min`.
fn final_decade(lambdas: &[f64]) -> Vec<usize> {
    let lmin = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    (0..lambdas.len()).filter(|&i| lambdas[i] <= 10.0 * lmin * (1.0 + 1e-12)).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.len() >= 2 && v.windows(2).all(|w| w[1] < w[0] - TREND_TOL * w[0].abs().max(w[1].abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VanishingReport {
    pub lambdas: Vec<f64>,
    /// `λ^D N(λ)`.
    pub sequence: Vec<f64>,
    pub monotone_final_decade: bool,
    pub vanishing: bool,
}

/// Checks that `λ^D N(λ)` decreases toward zero along the grid.
pub fn check_vanishing(fit: &ScalingFit) -> Result<VanishingReport> {
    if fit.canonical_dimension < -DIMENSION_TOL {
        return Err(Error::Precondition(format!(
            "strictly positive canonical dimension required, got d = {}",
            fit.canonical_dimension
        )));
    }
    let d = fit.dimension as i32;
    let sequence: Vec<f64> = fit.lambdas.iter().zip(&fit.n_values).map(|(l, n)| l.powi(d) * n).collect();
    let idx = final_decade(&fit.lambdas);
    let tail: Vec<f64> = idx.iter().map(|&i| sequence[i]).collect();
    let monotone = strictly_decreasing(&tail);
    Ok(VanishingReport {
        lambdas: fit.lambdas.clone(),
        sequence,
        monotone_final_decade: monotone,
        vanishing: monotone && fit.canonical_dimension > DIMENSION_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub lambda: f64,
    #[serde(rename = "N")]
    pub n: f64,
    pub zeta: f64,
    pub eta: f64,
    pub eta_over_zeta: f64,
    pub egj_bound: f64,
    /// `λ^{2D} N² ζ²`.
    pub rescaled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub fit: ScalingFit,
    pub records: Vec<TrajectoryRecord>,
    pub zeta_increasing: bool,
    pub bound_decreasing: bool,
    /// Spread of `η/ζ` over the final decade.
    pub eta_ratio_spread: f64,
}

/// `ζ_λ² = ω⁽²⁾(f_λ⊗f_λ)`, `η_λ = ω⁽³⁾(f_λ^{⊗3})/2ζ_λ²` along the delta family.
pub fn zeta_eta_trajectory<M: ScalingModel + ?Sized>(model: &M, f: &TestFunction, lambdas: &[f64]) -> Result<Trajectory> {
    let fit = fit_n_alpha(model, f, lambdas)?;
    let dd = model.dimension() as i32;
    let records = lambdas
        .par_iter()
        .zip(&fit.n_values)
        .map(|(&l, &n)| {
            let fl = delta_family(f, l)?;
            let z2 = model.n_point(2, &fl)?;
            let zeta = z2.sqrt();
            if !(zeta > 0.0) {
                return Err(Error::Precondition(format!("ζ_λ vanishes at λ = {l}")));
            }
            let eta = model.n_point(3, &fl)? / (2.0 * z2);
            Ok(TrajectoryRecord {
                lambda: l,
                n,
                zeta,
                eta,
                eta_over_zeta: eta / zeta,
                egj_bound: egj_bound(zeta, eta)?,
                rescaled: l.powi(2 * dd) * n * n * z2,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let idx = final_decade(lambdas);
    let zetas: Vec<f64> = idx.iter().map(|&i| -records[i].zeta).collect();
    let bounds: Vec<f64> = idx.iter().map(|&i| records[i].egj_bound).collect();
    let ratios: Vec<f64> = idx.iter().map(|&i| records[i].eta_over_zeta).collect();
    let spread = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ratios.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Trajectory {
        fit,
        zeta_increasing: strictly_decreasing(&zetas),
        bound_decreasing: strictly_decreasing(&bounds),
        eta_ratio_spread: spread,
        records,
    })
}

impl Trajectory {
    /// CSV columns `lambda, N, zeta, eta_over_zeta, egj_bound`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lambda", "N", "zeta", "eta_over_zeta", "egj_bound"])?;
        for r in &self.records {
            w.write_record([r.lambda, r.n, r.zeta, r.eta_over_zeta, r.egj_bound].map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pushforward_identity_and_support() {
        let f = TestFunction::one_dimensional(SamplingFunction::bump(-1.0, 2.0).unwrap());
        assert_eq!(pushforward(&f, 1.0).unwrap(), f);
        let p = pushforward(&f, 0.25).unwrap();
        let (a, b) = p.support()[0];
        assert!((a + 0.25).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        assert!(pushforward(&f, 0.0).is_err());
        assert!(pushforward(&f, 1.5).is_err());
    }

    #[test]
    fn homogeneous_gaussian_closed_form() {
        // C π Γ(h) τ^{2−2h}; Γ(2) = 1
        let m = Homogeneous::new(2.0, 1.0).unwrap();
        let f = TestFunction::gaussian(1, 0.7).unwrap();
        let v = m.two_point(&f).unwrap();
        let expect = std::f64::consts::PI * 0.7f64.powf(-2.0);
        assert!((v / expect - 1.0).abs() < 1e-10, "{v} vs {expect}");
    }

    #[test]
    fn vanishing_rejects_negative_dimension() {
        let fit = ScalingFit {
            dimension: 1,
            lambdas: vec![1.0, 0.1],
            n_values: vec![1.0, 1e2],
            alpha: -2.0,
            canonical_dimension: -1.0,
            residual: 0.0,
            monotonicity_violations: 0,
        };
        assert!(matches!(check_vanishing(&fit), Err(Error::Precondition(_))));
    }
}
