//! Lower bounds on time-averaged energy densities along inertial worldlines,
//! and the classical pointwise energy conditions.
//!
//! Every quantum bound here is a non-positive number `B` such that
//! `∫ ⟨:T₀₀:⟩_ψ(t) g(t)² dt ≥ B` for all states in the relevant class.

use std::f64::consts::PI;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_piecewise, Integral, Tolerance};
use crate::sampling::{SamplerKind, SamplingFunction};

/// Below `x = 1 + Q3_SERIES_CUTOFF` the `(x-1)` expansion of `Q₃` is used.
pub const Q3_SERIES_CUTOFF: f64 = 1e-6;
/// Absolute spectral tail the bound integrals may discard.
pub const SPECTRAL_TAIL_BUDGET: f64 = 1e-10;

const SPECTRAL_TOL: Tolerance = Tolerance { abs: 1e-17, rel: 1e-13, max_intervals: 4000 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMethod {
    FordRoman,
    FewsterEveson4d,
    Flanagan2d,
    /// 3/2 of the Flanagan value.
    FewsterEveson2dMassless,
    StaticForm,
    WorldlineKernel,
}

/// A lower bound together with its quadrature error estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub method: BoundMethod,
    pub value: f64,
    pub error_estimate: f64,
    pub inputs: serde_json::Value,
}

impl BoundResult {
    fn new(method: BoundMethod, value: f64, error_estimate: f64, inputs: serde_json::Value) -> Self {
        debug_assert!(value.is_finite() && value <= 0.0, "{method:?} returned {value}");
        Self { method, value, error_estimate: error_estimate.abs(), inputs }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("bound results are always serializable")
    }
}

fn sampler_echo(g: &SamplingFunction) -> serde_json::Value {
    json!({
        "kind": g.kind(),
        "amplitude": g.amplitude(),
        "center": g.center(),
        "dt": g.dt(),
        "support": [g.support().0, g.support().1],
    })
}

/// Ford–Roman bound `-3/(32 π² τ⁴)` for the unit-mass Lorentzian weight.
pub fn ford_roman_rhs(tau: f64) -> Result<BoundResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let value = -3.0 / (32.0 * PI * PI * tau.powi(4));
    Ok(BoundResult::new(BoundMethod::FordRoman, value, 0.0, json!({ "tau": tau })))
}

/// Mass-dependent factor `Q₃` of the massive four-dimensional worldline bound.
pub fn q3(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(Error::InvalidParameter(format!("Q3 is defined on x >= 1, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let d = x - 1.0;
    if d < Q3_SERIES_CUTOFF {
        let r = d.sqrt();
        let s2 = std::f64::consts::SQRT_2;
        return Ok(s2 * d * r * (8.0 / 3.0 - d * (106.0 / 15.0 - d * 5857.0 / 420.0)));
    }
    let y = 1.0 / (x * x);
    Ok((1.0 - y).sqrt() * (1.0 - 0.5 * y) - 0.5 * y * y * (x + (x * x - 1.0).sqrt()).ln())
}

/// Integral of `weight(u) |ĝ(u)|²` over `[lower, ∞)`, truncated at the
/// sampler's spectral extent with the discarded tail folded into the error.
fn spectral_integral<W: Fn(f64) -> f64>(g: &SamplingFunction, lower: f64, extra_breaks: &[f64], weight: W) -> Result<Integral> {
    let (extent, scale) = g.spectral_extent();
    if g.kind() == SamplerKind::Tabulated {
        let nyq = g.nyquist();
        let edge = weight(nyq) * g.power(nyq) * scale;
        if edge > SPECTRAL_TAIL_BUDGET {
            return Err(Error::AliasingRisk { frequency: nyq, nyquist: nyq });
        }
    }
    if lower >= extent {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let mut breaks = vec![lower];
    breaks.extend(extra_breaks.iter().copied().filter(|&b| b > lower && b < extent));
    let mut x = lower + scale;
    while x < extent {
        breaks.push(x);
        x += scale * (1.0 + (x - lower) / scale).sqrt();
    }
    breaks.push(extent);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let integrand = |u: f64| {
        let w = weight(u);
        if w == 0.0 {
            0.0
        } else {
            w * g.power(u)
        }
    };
    let body = integrate_piecewise(integrand, &breaks, SPECTRAL_TOL);
    let tail = integrand(extent).abs() * scale;
    Ok(Integral { value: body.value, error: body.error + tail })
}

/// Four-dimensional worldline bound for a scalar field of mass `m`:
/// `-(1/16π³) ∫_m^∞ |ĝ(u)|² u⁴ Q₃(u/m) du`.
pub fn fewster_eveson_4d(g: &SamplingFunction, mass: f64) -> Result<BoundResult> {
    if !(mass >= 0.0 && mass.is_finite()) {
        return Err(Error::InvalidParameter(format!("mass must be non-negative, got {mass}")));
    }
    let pref = 1.0 / (16.0 * PI.powi(3));
    let r = if mass == 0.0 {
        spectral_integral(g, 0.0, &[], |u| u.powi(4))?
    } else {
        spectral_integral(g, mass, &[], |u| u.powi(4) * q3(u / mass).unwrap_or(0.0))?
    };
    Ok(BoundResult::new(
        BoundMethod::FewsterEveson4d,
        -(pref * r.value),
        pref * r.error,
        json!({ "mass": mass, "sampler": sampler_echo(g) }),
    ))
}

/// Flanagan's two-dimensional massless bound `-(1/6π) ∫ |g'|² dt`.
pub fn flanagan_2d(g: &SamplingFunction) -> Result<BoundResult> {
    let d = g.derivative_norm_sq();
    Ok(BoundResult::new(
        BoundMethod::Flanagan2d,
        -d.value / (6.0 * PI),
        d.error / (6.0 * PI),
        json!({ "sampler": sampler_echo(g) }),
    ))
}

/// Two-dimensional massless bound, fixed at 3/2 of [`flanagan_2d`]: `-(1/4π) ∫ |g'|² dt`.
pub fn fe_2d_massless(g: &SamplingFunction) -> Result<BoundResult> {
    let f = flanagan_2d(g)?;
    Ok(BoundResult::new(
        BoundMethod::FewsterEveson2dMassless,
        1.5 * f.value,
        1.5 * f.error_estimate,
        json!({ "sampler": sampler_echo(g), "definition": "1.5 * flanagan_2d" }),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum QRepr {
    Massive4d { mass: f64 },
    /// `Q(u) = levels[j]` for `thresholds[j] < u <= thresholds[j+1]`.
    Step { thresholds: Vec<f64>, levels: Vec<f64> },
    /// Piecewise-linear through `(u_i, q_i)`; domain `[0, u_last]`.
    Tabulated { u: Vec<f64>, q: Vec<f64> },
    /// `(1/π) ∫_{ω₀}^{u} ρ(ω) dω` for a piecewise-linear density.
    Density { omega0: f64, d_omega: f64, rho: Vec<f64> },
    Sum(Vec<QRepr>),
}

impl QRepr {
    fn eval(&self, u: f64) -> f64 {
        match self {
            QRepr::Massive4d { mass } => {
                if u < *mass || u <= 0.0 {
                    0.0
                } else if *mass == 0.0 {
                    u.powi(4) / (16.0 * PI.powi(3))
                } else {
                    u.powi(4) * q3(u / mass).unwrap_or(0.0) / (16.0 * PI.powi(3))
                }
            }
            QRepr::Step { thresholds, levels } => {
                let k = thresholds.partition_point(|&w| w < u);
                if k == 0 {
                    0.0
                } else {
                    levels[k - 1]
                }
            }
            QRepr::Tabulated { u: us, q } => {
                if u <= us[0] {
                    return q[0];
                }
                let k = us.partition_point(|&x| x < u);
                if k >= us.len() {
                    return q[q.len() - 1];
                }
                let f = (u - us[k - 1]) / (us[k] - us[k - 1]);
                q[k - 1] + f * (q[k] - q[k - 1])
            }
            QRepr::Density { omega0, d_omega, rho } => {
                if u <= *omega0 {
                    return 0.0;
                }
                let cells = rho.len() - 1;
                let x = ((u - omega0) / d_omega).min(cells as f64);
                let full = x.floor() as usize;
                let mut acc = 0.0;
                for c in 0..full.min(cells) {
                    acc += 0.5 * d_omega * (rho[c] + rho[c + 1]);
                }
                if full < cells {
                    let f = x - full as f64;
                    let slope = rho[full + 1] - rho[full];
                    acc += d_omega * f * (rho[full] + 0.5 * slope * f);
                }
                acc / PI
            }
            QRepr::Sum(parts) => parts.iter().map(|p| p.eval(u)).sum(),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match self {
            QRepr::Massive4d { mass } => out.push(*mass),
            QRepr::Step { thresholds, .. } => out.extend(thresholds),
            QRepr::Tabulated { u, .. } => out.extend(u),
            QRepr::Density { omega0, d_omega, rho } => {
                out.extend((0..rho.len()).map(|i| omega0 + i as f64 * d_omega))
            }
            QRepr::Sum(parts) => parts.iter().for_each(|p| p.breakpoints(out)),
        }
    }

    fn domain_max(&self) -> f64 {
        match self {
            QRepr::Tabulated { u, .. } => u[u.len() - 1],
            QRepr::Sum(parts) => parts.iter().map(QRepr::domain_max).fold(f64::INFINITY, f64::min),
            _ => f64::INFINITY,
        }
    }
}

/// Non-negative, non-decreasing spectral weight of a static-form bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QWeight {
    repr: QRepr,
}

impl QWeight {
    /// `Q(u) = u⁴ Q₃(u/m) / (16π³)` on `u >= m`, zero below.
    pub fn fewster_eveson(mass: f64) -> Result<Self> {
        if !(mass >= 0.0 && mass.is_finite()) {
            return Err(Error::InvalidWeight(format!("mass must be non-negative, got {mass}")));
        }
        Ok(Self { repr: QRepr::Massive4d { mass } })
    }

    pub fn zero() -> Self {
        Self { repr: QRepr::Step { thresholds: vec![], levels: vec![] } }
    }

    /// Step function `Q(u) = (1/π) Σ_{ω_j < u} μ_j` of a discrete spectral measure.
    pub fn from_spectral_lines(lines: &[(f64, f64)]) -> Result<Self> {
        let mut sorted: Vec<(f64, f64)> = lines.to_vec();
        if sorted.iter().any(|&(w, m)| !(w >= 0.0 && w.is_finite()) || !(m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidWeight("spectral lines need ω ≥ 0 and μ ≥ 0".into()));
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut thresholds: Vec<f64> = Vec::new();
        let mut levels: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (w, m) in sorted {
            acc += m / PI;
            if thresholds.last() == Some(&w) {
                *levels.last_mut().unwrap() = acc;
            } else {
                thresholds.push(w);
                levels.push(acc);
            }
        }
        Ok(Self { repr: QRepr::Step { thresholds, levels } })
    }

    /// Piecewise-linear weight through `(u_i, q_i)`, starting at `u = 0`.
    pub fn tabulated(u: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if u.len() != q.len() || u.len() < 2 {
            return Err(Error::InvalidWeight("need at least two (u, Q) pairs".into()));
        }
        if u[0] != 0.0 {
            return Err(Error::InvalidWeight("tabulated Q must start at u = 0".into()));
        }
        if u.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidWeight("u must be strictly increasing".into()));
        }
        if q.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidWeight("Q must be finite and non-negative".into()));
        }
        if q.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidWeight("Q must be non-decreasing".into()));
        }
        Ok(Self { repr: QRepr::Tabulated { u, q } })
    }

    fn density(omega0: f64, d_omega: f64, rho: Vec<f64>) -> Self {
        Self { repr: QRepr::Density { omega0, d_omega, rho } }
    }

    pub fn sum(parts: Vec<QWeight>) -> Self {
        Self { repr: QRepr::Sum(parts.into_iter().map(|p| p.repr).collect()) }
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.repr.eval(u)
    }

    /// Upper end of the domain (infinite for closed forms).
    pub fn domain_max(&self) -> f64 {
        self.repr.domain_max()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = Vec::new();
        self.repr.breakpoints(&mut b);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// Two-column CSV `(u, Q(u))`; tabulated weights write their own nodes.
    pub fn write_csv<W: Write>(&self, writer: W, grid: &[f64]) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["u", "Q"])?;
        let nodes: Vec<f64> = match &self.repr {
            QRepr::Tabulated { u, .. } => u.clone(),
            _ => grid.to_vec(),
        };
        for u in nodes {
            w.write_record([format!("{u:.17e}"), format!("{:.17e}", self.eval(u))])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let (mut u, mut q) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidWeight(format!("bad number {s:?}: {e}")));
            u.push(parse(&rec[0])?);
            q.push(parse(&rec[1])?);
        }
        Self::tabulated(u, q)
    }
}

/// Generic static-form bound `-∫₀^∞ Q(u) |ĝ(u)|² du`.
pub fn static_qei(g: &SamplingFunction, q: &QWeight) -> Result<BoundResult> {
    let breaks = q.breakpoints();
    let domain = q.domain_max();
    let (extent, scale) = g.spectral_extent();
    let r = spectral_integral(g, 0.0, &breaks, |u| q.eval(u))?;
    if domain < extent {
        // Q is held at its last value beyond the table; that part must be negligible.
        let tail = integrate(|u| q.eval(domain) * g.power(u), domain, extent, SPECTRAL_TOL).value
            + q.eval(domain) * g.power(extent) * scale;
        if tail > SPECTRAL_TAIL_BUDGET {
            return Err(Error::SpectralTail { cutoff: domain, tail, allowed: SPECTRAL_TAIL_BUDGET });
        }
    }
    Ok(BoundResult::new(
        BoundMethod::StaticForm,
        -r.value,
        r.error,
        json!({ "sampler": sampler_echo(g), "q_breakpoints": breaks.len(), "q_domain_max": domain }),
    ))
}

/// Piecewise-linear continuous spectral density on a uniform ω grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub omega0: f64,
    pub d_omega: f64,
    pub rho: Vec<f64>,
}

/// Reference two-point function along the worldline,
/// `W⁰(t,t') = Σ_j μ_j e^{-iω_j(t-t')} + ∫ ρ(ω) e^{-iω(t-t')} dω`,
/// restricted to non-negative frequencies and weights.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoPointKernel {
    lines: Vec<(f64, f64)>,
    density: Option<SpectralDensity>,
}

impl TwoPointKernel {
    pub fn new(lines: Vec<(f64, f64)>, density: Option<SpectralDensity>) -> Result<Self> {
        for &(w, m) in &lines {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidKernel(format!("negative or non-finite frequency {w}")));
            }
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::InvalidKernel(format!("negative or non-finite weight {m}")));
            }
        }
        if let Some(d) = &density {
            if !(d.omega0 >= 0.0) || !(d.d_omega > 0.0) || d.rho.len() < 2 {
                return Err(Error::InvalidKernel("density needs ω₀ ≥ 0, dω > 0 and two samples".into()));
            }
            if d.rho.iter().any(|&r| !(r >= 0.0 && r.is_finite())) {
                return Err(Error::InvalidKernel("density must be non-negative".into()));
            }
        }
        Ok(Self { lines, density })
    }

    pub fn lines(&self) -> &[(f64, f64)] {
        &self.lines
    }

    pub fn density(&self) -> Option<&SpectralDensity> {
        self.density.as_ref()
    }

    /// `W⁰(t, t')` as a complex number.
    pub fn eval(&self, dt: f64) -> num_complex::Complex64 {
        let mut acc: num_complex::Complex64 = self
            .lines
            .iter()
            .map(|&(w, m)| num_complex::Complex64::from_polar(m, -w * dt))
            .sum();
        if let Some(d) = &self.density {
            let cells = d.rho.len() - 1;
            let mut breaks = Vec::with_capacity(cells + 1);
            for i in 0..=cells {
                breaks.push(d.omega0 + i as f64 * d.d_omega);
            }
            let lin = |w: f64| {
                let x = ((w - d.omega0) / d.d_omega).clamp(0.0, cells as f64);
                let i = (x.floor() as usize).min(cells - 1);
                let f = x - i as f64;
                d.rho[i] * (1.0 - f) + d.rho[i + 1] * f
            };
            let re = integrate_piecewise(|w| lin(w) * (w * dt).cos(), &breaks, Tolerance::default()).value;
            let im = integrate_piecewise(|w| -lin(w) * (w * dt).sin(), &breaks, Tolerance::default()).value;
            acc += num_complex::Complex64::new(re, im);
        }
        acc
    }
}

/// `∫_ω^∞ |ĝ(u)|² du`.
fn tail_power(g: &SamplingFunction, omega: f64) -> Result<Integral> {
    spectral_integral(g, omega, &[], |_| 1.0)
}

/// General worldline bound from a reference two-point kernel.
///
/// Point-splitting the smeared square `∫ g² :Φ²:` and restricting the
/// Fourier variable to the half-space gives
/// `-2 ∫₀^∞ (dξ/2π) F̂(-ξ, ξ)` with `F(t,t') = g(t) g(t') W⁰(t,t')`,
/// which for this kernel is `-(1/π) Σ_j μ_j ∫₀^∞ |ĝ(ξ + ω_j)|² dξ`
/// (plus the density contribution). The induced step weight
/// `Q(u) = (1/π) Σ_{ω_j < u} μ_j` reproduces the same value through
/// [`static_qei`].
pub fn worldline_bound_from_kernel(kernel: &TwoPointKernel, g: &SamplingFunction) -> Result<(BoundResult, QWeight)> {
    let mut by_freq: Vec<(f64, f64)> = kernel.lines.iter().copied().filter(|l| l.1 > 0.0).collect();
    by_freq.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut value = 0.0;
    let mut error = 0.0;
    let mut i = 0;
    while i < by_freq.len() {
        let w = by_freq[i].0;
        let mut mu = 0.0;
        while i < by_freq.len() && by_freq[i].0 == w {
            mu += by_freq[i].1;
            i += 1;
        }
        let p = tail_power(g, w)?;
        value += mu * p.value;
        error += mu * p.error;
    }
    let mut parts = vec![QWeight::from_spectral_lines(&kernel.lines)?];
    if let Some(d) = &kernel.density {
        let cells = d.rho.len() - 1;
        for c in 0..cells {
            let lo = d.omega0 + c as f64 * d.d_omega;
            let (r0, r1) = (d.rho[c], d.rho[c + 1]);
            let inner = |w: f64| {
                let f = (w - lo) / d.d_omega;
                (r0 + f * (r1 - r0)) * tail_power(g, w).map(|p| p.value).unwrap_or(0.0)
            };
            let r = integrate(inner, lo, lo + d.d_omega, Tolerance { abs: 1e-15, rel: 1e-10, max_intervals: 200 });
            value += r.value;
            error += r.error;
        }
        parts.push(QWeight::density(d.omega0, d.d_omega, d.rho.clone()));
    }
    let q = if parts.len() == 1 { parts.pop().unwrap() } else { QWeight::sum(parts) };
    let bound = BoundResult::new(
        BoundMethod::WorldlineKernel,
        -value / PI,
        error / PI,
        json!({
            "sampler": sampler_echo(g),
            "lines": kernel.lines.len(),
            "density": kernel.density.is_some(),
        }),
    );
    Ok((bound, q))
}

/// Symmetric stress-tensor sample `T_ab` (lower indices), signature (+,-,-,-).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StressTensorSample {
    t: [[f64; 4]; 4],
}

pub const MINKOWSKI: [f64; 4] = [1.0, -1.0, -1.0, -1.0];
const NORM_TOL: f64 = 1e-12;

impl StressTensorSample {
    pub fn new(t: [[f64; 4]; 4]) -> Result<Self> {
        for a in 0..4 {
            for b in 0..4 {
                if !t[a][b].is_finite() {
                    return Err(Error::InvalidParameter("stress tensor entries must be finite".into()));
                }
                if (t[a][b] - t[b][a]).abs() > NORM_TOL * (1.0 + t[a][b].abs()) {
                    return Err(Error::InvalidParameter(format!("T is not symmetric at ({a},{b})")));
                }
            }
        }
        Ok(Self { t })
    }

    pub fn diagonal(rho: f64, p: f64) -> Result<Self> {
        let mut t = [[0.0; 4]; 4];
        t[0][0] = rho;
        for i in 1..4 {
            t[i][i] = p;
        }
        Self::new(t)
    }

    /// `T_ab u^a v^b`.
    pub fn contract(&self, u: &[f64; 4], v: &[f64; 4]) -> f64 {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += self.t[a][b] * u[a] * v[b];
            }
        }
        s
    }
}

fn minkowski_norm(u: &[f64; 4]) -> f64 {
    (0..4).map(|a| MINKOWSKI[a] * u[a] * u[a]).sum()
}

fn check_timelike(u: &[f64; 4]) -> Result<()> {
    let scale = u.iter().map(|x| x * x).sum::<f64>();
    if u[0] > 0.0 && minkowski_norm(u) > NORM_TOL * scale {
        Ok(())
    } else {
        Err(Error::NotTimelike(*u))
    }
}

fn check_null(k: &[f64; 4]) -> Result<()> {
    let scale = k.iter().map(|x| x * x).sum::<f64>();
    if k[0] > 0.0 && minkowski_norm(k).abs() <= NORM_TOL * scale {
        Ok(())
    } else {
        Err(Error::NotNull(*k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyConditions {
    pub dec: bool,
    pub wec: bool,
    pub nec: Option<bool>,
}

/// Pointwise classical conditions for the supplied test vectors:
/// `dec`: `T(u,v) ≥ 0`; `wec`: `T(u,u) ≥ 0` and `T(v,v) ≥ 0`;
/// `nec`: `T(k,k) ≥ 0` when a null `k` is given.
pub fn check_classical_conditions(
    t: &StressTensorSample,
    u: &[f64; 4],
    v: &[f64; 4],
    k: Option<&[f64; 4]>,
) -> Result<EnergyConditions> {
    check_timelike(u)?;
    check_timelike(v)?;
    let nec = match k {
        Some(k) => {
            check_null(k)?;
            Some(t.contract(k, k) >= 0.0)
        }
        None => None,
    };
    Ok(EnergyConditions {
        dec: t.contract(u, v) >= 0.0,
        wec: t.contract(u, u) >= 0.0 && t.contract(v, v) >= 0.0,
        nec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ford_roman_values() {
        let pi2 = PI * PI;
        assert_eq!(ford_roman_rhs(1.0).unwrap().value, -3.0 / (32.0 * pi2));
        assert_eq!(ford_roman_rhs(2.0).unwrap().value, -3.0 / (512.0 * pi2));
        assert!(ford_roman_rhs(1e4).unwrap().value.abs() < 1e-17);
        assert!(ford_roman_rhs(0.0).is_err());
        assert!(ford_roman_rhs(-1.0).is_err());
    }

    #[test]
    fn q3_values_and_series_continuity() {
        assert_eq!(q3(1.0).unwrap(), 0.0);
        // arbitrary-precision oracle
        assert!((q3(2.0).unwrap() - 0.716_617_294_032_483_3).abs() < 1e-15);
        assert!(rel(q3(1.0 + 1e-6).unwrap(), 3.771_226_172_572_134e-9) < 1e-9);
        let below = q3(1.0 + 0.999_999e-6).unwrap();
        let above = q3(1.0 + 1.000_001e-6).unwrap();
        assert!(above > below && rel(above, below) < 1e-5);
        assert!((1.0 - q3(1e8).unwrap()) < 1e-15);
        assert_eq!(q3(f64::INFINITY).unwrap(), 1.0);
        assert!(q3(0.99).is_err());
        assert!(q3(f64::NAN).is_err());
    }

    #[test]
    fn fe4d_gaussian_massless() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let b = fewster_eveson_4d(&g, 0.0).unwrap();
        let oracle = -3.0 / (64.0 * PI.powf(1.5));
        assert!(rel(b.value, oracle) < 1e-10, "{} vs {oracle}", b.value);
        assert!(b.error_estimate < 1e-12);
    }

    #[test]
    fn fe4d_decays_with_mass() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let mut last = fewster_eveson_4d(&g, 0.0).unwrap().value;
        for m in [0.5, 1.0, 2.0, 4.0, 8.0] {
            let v = fewster_eveson_4d(&g, m).unwrap().value;
            assert!(v >= last && v <= 0.0, "m = {m}");
            last = v;
        }
        assert_eq!(fewster_eveson_4d(&g, 50.0).unwrap().value, 0.0);
        assert!(fewster_eveson_4d(&g, -1.0).is_err());
    }

    #[test]
    fn flanagan_and_fe_2d() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let f = flanagan_2d(&g).unwrap().value;
        assert!(rel(f, -1.0 / (12.0 * PI.sqrt())) < 1e-15);
        let fe = fe_2d_massless(&g).unwrap().value;
        assert!(rel(fe, -1.0 / (8.0 * PI.sqrt())) < 1e-15);
        assert!(rel(fe / f, 1.5) < 1e-15);
        let zero = g.scaled_by(0.0);
        assert_eq!(flanagan_2d(&zero).unwrap().value, 0.0);
        assert_eq!(fe_2d_massless(&zero).unwrap().value, 0.0);
    }

    #[test]
    fn static_form_with_zero_weight() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        assert_eq!(static_qei(&g, &QWeight::zero()).unwrap().value, 0.0);
        let table = QWeight::tabulated(vec![0.0, 100.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(static_qei(&g, &table).unwrap().value, 0.0);
    }

    #[test]
    fn qweight_validation() {
        assert!(QWeight::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 1.0]).is_err());
        assert!(QWeight::tabulated(vec![0.0, 1.0], vec![-1.0, 1.0]).is_err());
        assert!(QWeight::from_spectral_lines(&[(-1.0, 1.0)]).is_err());
        let q = QWeight::from_spectral_lines(&[(1.0, PI), (2.0, 2.0 * PI), (1.0, PI)]).unwrap();
        assert_eq!(q.eval(1.0), 0.0);
        assert_eq!(q.eval(1.5), 2.0);
        assert_eq!(q.eval(3.0), 4.0);
    }

    #[test]
    fn kernel_rejects_negative_frequency_and_weight() {
        assert!(matches!(TwoPointKernel::new(vec![(-0.1, 1.0)], None), Err(Error::InvalidKernel(_))));
        assert!(matches!(TwoPointKernel::new(vec![(0.1, -1.0)], None), Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn empty_kernel_gives_zero() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let k = TwoPointKernel::new(vec![(0.5, 0.0)], None).unwrap();
        let (b, q) = worldline_bound_from_kernel(&k, &g).unwrap();
        assert_eq!(b.value, 0.0);
        assert_eq!(static_qei(&g, &q).unwrap().value, 0.0);
    }

    #[test]
    fn single_zero_frequency_line() {
        // -(1/π) ∫₀^∞ 2π e^{-u²} du = -√π
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let k = TwoPointKernel::new(vec![(0.0, 1.0)], None).unwrap();
        let (b, q) = worldline_bound_from_kernel(&k, &g).unwrap();
        assert!(rel(b.value, -PI.sqrt()) < 1e-12);
        assert!(rel(static_qei(&g, &q).unwrap().value, b.value) < 1e-10);
    }

    #[test]
    fn density_kernel_matches_induced_weight() {
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let d = SpectralDensity { omega0: 0.2, d_omega: 0.3, rho: vec![0.0, 1.0, 0.5, 0.25, 0.0] };
        let k = TwoPointKernel::new(vec![(0.4, 0.3)], Some(d)).unwrap();
        let (b, q) = worldline_bound_from_kernel(&k, &g).unwrap();
        let s = static_qei(&g, &q).unwrap();
        assert!(rel(s.value, b.value) < 1e-8, "{} vs {}", s.value, b.value);
    }

    #[test]
    fn classical_conditions() {
        let rest = [1.0, 0.0, 0.0, 0.0];
        let dust = StressTensorSample::diagonal(1.0, 0.0).unwrap();
        let c = check_classical_conditions(&dust, &rest, &rest, Some(&[1.0, 1.0, 0.0, 0.0])).unwrap();
        assert!(c.wec && c.dec && c.nec == Some(true));
        let neg = StressTensorSample::diagonal(-1.0, 0.0).unwrap();
        assert!(!check_classical_conditions(&neg, &rest, &rest, None).unwrap().wec);
        let zero = StressTensorSample::new([[0.0; 4]; 4]).unwrap();
        let c = check_classical_conditions(&zero, &rest, &[2.0, 1.0, 0.0, 0.0], Some(&[1.0, 0.0, 1.0, 0.0])).unwrap();
        assert!(c.dec && c.wec && c.nec == Some(true));
        assert!(matches!(
            check_classical_conditions(&zero, &[1.0, 1.0, 0.0, 0.0], &rest, None),
            Err(Error::NotTimelike(_))
        ));
        assert!(matches!(
            check_classical_conditions(&zero, &rest, &rest, Some(&[1.0, 0.5, 0.0, 0.0])),
            Err(Error::NotNull(_))
        ));
        let mut asym = [[0.0; 4]; 4];
        asym[0][1] = 1.0;
        assert!(StressTensorSample::new(asym).is_err());
    }
}
