//! Admissibility of energy-density profiles along a worldline under the
//! two-dimensional massless QWEI, decided through positivity of
//! `H_ρ = −d²/dt² + 6πρ(t)`, and the closed-form delta-pair constraints.
//!
//! Sign convention: in a delta pair the debt pulse enters as `−A` and the
//! repayment as `+A(1+ε)`.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_piecewise, simpson, Tolerance};

/// Regularized pulses are treated as zero beyond this many widths.
pub const PULSE_PAD: f64 = 50.0;
/// Default box half-width in units of `1/(6πA)`.
pub const DEFAULT_BOX: f64 = 50.0;
/// Required grid resolution: `h ≤ σ / POINTS_PER_SIGMA`.
pub const POINTS_PER_SIGMA: f64 = 10.0;
/// Largest grid the solver will build.
pub const MAX_GRID: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub t: f64,
    #[serde(rename = "A")]
    pub amplitude: f64,
}

/// Smooth background `ρ_bg(t)`, linearly interpolated and zero off-grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Background {
    pub start: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl Background {
    pub fn new(start: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || values.len() < 2 || values.iter().any(|v| !v.is_finite()) || !start.is_finite() {
            return Err(Error::InvalidParameter("background needs dt > 0 and two finite samples".into()));
        }
        Ok(Self { start, dt, values })
    }

    pub fn end(&self) -> f64 {
        self.start + self.dt * (self.values.len() - 1) as f64
    }

    pub fn eval(&self, t: f64) -> f64 {
        let x = (t - self.start) / self.dt;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let f = x - i as f64;
        self.values[i] * (1.0 - f) + self.values[i + 1] * f
    }

    /// Two-column CSV `t,rho` on a uniform grid.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let (mut t, mut v) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number {s:?}: {e}")));
            t.push(parse(&rec[0])?);
            v.push(parse(&rec[1])?);
        }
        if t.len() < 2 {
            return Err(Error::InvalidParameter("background CSV needs two rows".into()));
        }
        let dt = t[1] - t[0];
        if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.abs().max(1.0)) {
            return Err(Error::InvalidParameter("background CSV must be uniformly spaced".into()));
        }
        Self::new(t[0], dt, v)
    }
}

/// `ρ(t) = Σ_i A_i δ_σ(t − t_i) + ρ_bg(t)` with unit-mass Gaussian `δ_σ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyProfile {
    pulses: Vec<Pulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    background: Option<Background>,
    sigma: f64,
}

/// On-disk form; `background` is a CSV path relative to the profile file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProfileFile {
    pulses: Vec<Pulse>,
    #[serde(default)]
    background: Option<String>,
    sigma: f64,
}

impl EnergyProfile {
    pub fn new(pulses: Vec<Pulse>, background: Option<Background>, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!("sigma must be positive, got {sigma}")));
        }
        if pulses.iter().any(|p| !p.t.is_finite() || !p.amplitude.is_finite()) {
            return Err(Error::InvalidParameter("pulse times and amplitudes must be finite".into()));
        }
        if pulses.windows(2).any(|w| w[1].t < w[0].t) {
            return Err(Error::InvalidParameter("pulse times must be ordered".into()));
        }
        Ok(Self { pulses, background, sigma })
    }

    /// Debt `−A` at `t = 0`, repayment `A(1+ε)` at `t = T`.
    pub fn delta_pair(a: f64, t: f64, eps: f64, sigma: f64) -> Result<Self> {
        if !(a > 0.0) || !(t > 0.0) {
            return Err(Error::InvalidParameter("A and T must be positive".into()));
        }
        Self::new(vec![Pulse { t: 0.0, amplitude: -a }, Pulse { t, amplitude: a * (1.0 + eps) }], None, sigma)
    }

    pub fn zero(sigma: f64) -> Result<Self> {
        Self::new(vec![], None, sigma)
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn background(&self) -> Option<&Background> {
        self.background.as_ref()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::new(self.pulses.clone(), self.background.clone(), sigma)
    }

    pub fn rho(&self, t: f64) -> f64 {
        let s = self.sigma;
        let norm = 1.0 / (s * (2.0 * PI).sqrt());
        let mut r: f64 = self
            .pulses
            .iter()
            .map(|p| {
                let z = (t - p.t) / s;
                if z.abs() > PULSE_PAD {
                    0.0
                } else {
                    p.amplitude * norm * (-0.5 * z * z).exp()
                }
            })
            .sum();
        if let Some(bg) = &self.background {
            r += bg.eval(t);
        }
        r
    }

    /// Interval outside which `ρ` vanishes (to the pulse padding).
    pub fn support(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in &self.pulses {
            lo = lo.min(p.t - PULSE_PAD * self.sigma);
            hi = hi.max(p.t + PULSE_PAD * self.sigma);
        }
        if let Some(bg) = &self.background {
            lo = lo.min(bg.start);
            hi = hi.max(bg.end());
        }
        (lo < hi).then_some((lo, hi))
    }

    /// Largest pulse magnitude, which sets the natural scale `1/(6πA)`.
    pub fn amplitude_scale(&self) -> f64 {
        self.pulses.iter().map(|p| p.amplitude.abs()).fold(0.0, f64::max)
    }

    pub fn from_json_str(text: &str, base: Option<&Path>) -> Result<Self> {
        let f: ProfileFile = serde_json::from_str(text)?;
        let background = match f.background {
            Some(path) => {
                let p = match base {
                    Some(b) => b.join(path),
                    None => path.into(),
                };
                Some(Background::read_csv(std::fs::File::open(p)?)?)
            }
            None => None,
        };
        Self::new(f.pulses, background, f.sigma)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text, path.parent())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    Dirichlet,
    /// Zero-slope ends on a cell-centred grid; on a box containing the
    /// support of `ρ` this reproduces positivity on the whole line.
    Neumann,
}

/// Finite-difference `−d²/dt² + 6πρ(t)` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchrodingerOperator {
    profile: EnergyProfile,
    a: f64,
    b: f64,
    h: f64,
    boundary: Boundary,
}

impl SchrodingerOperator {
    pub fn new(profile: EnergyProfile, a: f64, b: f64, h: f64, boundary: Boundary) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("invalid interval [{a}, {b}]")));
        }
        if !(h > 0.0) || h > profile.sigma / POINTS_PER_SIGMA * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "grid spacing {h} does not resolve sigma = {} (need h <= sigma/{POINTS_PER_SIGMA})",
                profile.sigma
            )));
        }
        let cells = ((b - a) / h).ceil();
        if cells * 2.0 > MAX_GRID as f64 {
            return Err(Error::Resolution(format!("grid of {cells} cells exceeds the solver limit")));
        }
        let op = Self { profile, a, b, h: (b - a) / cells, boundary };
        if boundary == Boundary::Dirichlet {
            let scale = op.potential_scale();
            let edge = op.potential(a).abs().max(op.potential(b).abs());
            if edge > 1e-12 * scale {
                return Err(Error::InvalidParameter(format!(
                    "potential {edge:e} at the Dirichlet ends is not negligible (scale {scale:e})"
                )));
            }
        }
        Ok(op)
    }

    /// Dirichlet box `[−R, R]` with `R = 50/(6πA)` and `h = σ/10`.
    pub fn dirichlet_default(profile: EnergyProfile) -> Result<Self> {
        let amp = profile.amplitude_scale();
        if !(amp > 0.0) {
            return Err(Error::InvalidParameter("default box needs a non-zero pulse amplitude".into()));
        }
        let r = DEFAULT_BOX / (6.0 * PI * amp);
        let h = profile.sigma / POINTS_PER_SIGMA;
        Self::new(profile, -r, r, h, Boundary::Dirichlet)
    }

    /// Neumann box just containing the support of `ρ`.
    pub fn neumann_tight(profile: EnergyProfile) -> Result<Self> {
        let (lo, hi) = profile.support().ok_or_else(|| Error::InvalidParameter("profile is identically zero".into()))?;
        let margin = 0.05 * (hi - lo);
        let h = profile.sigma / POINTS_PER_SIGMA;
        Self::new(profile, lo - margin, hi + margin, h, Boundary::Neumann)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn profile(&self) -> &EnergyProfile {
        &self.profile
    }

    pub fn potential(&self, t: f64) -> f64 {
        6.0 * PI * self.profile.rho(t)
    }

    fn potential_scale(&self) -> f64 {
        let s = self.profile.sigma;
        let peak = self.profile.pulses.iter().map(|p| p.amplitude.abs()).sum::<f64>() / (s * (2.0 * PI).sqrt());
        let bg = self.profile.background.as_ref().map_or(0.0, |b| b.values.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        6.0 * PI * (peak + bg)
    }

    fn grid(&self, refine: usize) -> Grid {
        let cells = ((self.b - self.a) / self.h).round() as usize * refine;
        let h = (self.b - self.a) / cells as f64;
        let (n, offset) = match self.boundary {
            Boundary::Dirichlet => (cells - 1, 1.0),
            Boundary::Neumann => (cells, 0.5),
        };
        let v = (0..n).map(|i| self.potential(self.a + (i as f64 + offset) * h)).collect();
        Grid { v, h, boundary: self.boundary }
    }
}

struct Grid {
    v: Vec<f64>,
    h: f64,
    boundary: Boundary,
}

impl Grid {
    /// Number of eigenvalues below `lambda` (Sturm count from the `LDLᵀ` pivots).
    fn count_below(&self, lambda: f64) -> usize {
        let n = self.v.len();
        let h2 = self.h * self.h;
        let mut count = 0;
        let mut q = 0.0;
        for i in 0..n {
            let edge = self.boundary == Boundary::Neumann && (i == 0 || i + 1 == n);
            let diag = if edge { 1.0 } else { 2.0 } + h2 * (self.v[i] - lambda);
            q = if i == 0 { diag } else { diag - 1.0 / q };
            if q == 0.0 {
                q = -f64::EPSILON;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lowest(&self) -> f64 {
        let n = self.v.len();
        let h2 = self.h * self.h;
        let vmin = self.v.iter().copied().fold(f64::INFINITY, f64::min);
        // Rayleigh quotient of a trial vector is an upper bound
        let trial: Vec<f64> = match self.boundary {
            Boundary::Neumann => vec![1.0; n],
            Boundary::Dirichlet => (0..n).map(|i| (PI * (i + 1) as f64 / (n + 1) as f64).sin()).collect(),
        };
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..n {
            let edge = self.boundary == Boundary::Neumann && (i == 0 || i + 1 == n);
            let d = if edge { 1.0 } else { 2.0 } / h2 + self.v[i];
            let mut ax = d * trial[i];
            if i > 0 {
                ax -= trial[i - 1] / h2;
            }
            if i + 1 < n {
                ax -= trial[i + 1] / h2;
            }
            num += trial[i] * ax;
            den += trial[i] * trial[i];
        }
        let mut lo = vmin - 1e-300_f64.max(vmin.abs() * 1e-12);
        let mut hi = num / den + (num / den).abs() * 1e-12 + 1e-300;
        let resolution = f64::EPSILON * (4.0 / h2 + self.v.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        for _ in 0..400 {
            if hi - lo <= resolution.max(1e-15 * lo.abs().max(hi.abs())) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Lowest eigenvalue with a Richardson error estimate from `h` and `h/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    /// Richardson-extrapolated value `(4λ_{h/2} − λ_h)/3`.
    pub value: f64,
    pub error_estimate: f64,
    pub coarse: f64,
    pub fine: f64,
    pub points: usize,
}

pub fn lowest_eigenvalue(op: &SchrodingerOperator) -> Result<EigenEstimate> {
    let g1 = op.grid(1);
    let g2 = op.grid(2);
    let coarse = g1.lowest();
    let fine = g2.lowest();
    Ok(EigenEstimate {
        value: (4.0 * fine - coarse) / 3.0,
        error_estimate: (fine - coarse).abs() / 3.0,
        coarse,
        fine,
        points: g2.v.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub admissible: bool,
    /// Lowest eigenvalue of `H_ρ` on the Neumann box.
    pub margin: f64,
    pub tolerance: f64,
}

/// `H_ρ ≥ 0` decided on a Neumann box containing the support of `ρ`.
pub fn admissible(profile: &EnergyProfile) -> Result<Admissibility> {
    if profile.support().is_none() {
        return Ok(Admissibility { admissible: true, margin: 0.0, tolerance: 0.0 });
    }
    let op = SchrodingerOperator::neumann_tight(profile.clone())?;
    let e = lowest_eigenvalue(&op)?;
    let tolerance = e.error_estimate;
    Ok(Admissibility { admissible: e.value >= -tolerance, margin: e.value, tolerance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPairConstraint {
    pub t_max: f64,
    /// `None` when `T ≥ T_max` (no repayment suffices).
    pub eps_min: Option<f64>,
}

/// `T_max = 1/(6πA)`, `ε_min = 6πAT/(1 − 6πAT)`.
pub fn delta_pair_constraints(a: f64, t: f64) -> Result<DeltaPairConstraint> {
    if !(a > 0.0 && a.is_finite()) || !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("A and T must be positive, got A = {a}, T = {t}")));
    }
    let kappa = 6.0 * PI * a;
    let x = kappa * t;
    Ok(DeltaPairConstraint { t_max: 1.0 / kappa, eps_min: (x < 1.0).then(|| x / (1.0 - x)) })
}

/// Threshold located numerically on grids `h` and `h/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub error_estimate: f64,
    pub coarse: f64,
    pub fine: f64,
}

fn bisect_threshold<F: Fn(f64, usize) -> Result<bool>>(lo: f64, hi: f64, ok: F) -> Result<ThresholdEstimate> {
    let solve = |refine: usize| -> Result<f64> {
        let (mut lo, mut hi) = (lo, hi);
        if ok(lo, refine)? || !ok(hi, refine)? {
            return Err(Error::Precondition(format!("threshold not bracketed by [{lo}, {hi}]")));
        }
        for _ in 0..200 {
            if hi - lo <= 1e-12 * hi.abs().max(lo.abs()) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if ok(mid, refine)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };
    let coarse = solve(1)?;
    let fine = solve(2)?;
    Ok(ThresholdEstimate { value: fine, error_estimate: (fine - coarse).abs() / 3.0, coarse, fine })
}

fn positive_on(profile: &EnergyProfile, refine: usize) -> Result<bool> {
    let op = SchrodingerOperator::neumann_tight(profile.clone())?;
    Ok(op.grid(refine).count_below(0.0) == 0)
}

/// Smallest repayment fraction `ε` with `H_ρ ≥ 0` for a regularized delta pair.
pub fn eps_min_numeric(a: f64, t: f64, sigma: f64) -> Result<ThresholdEstimate> {
    let c = delta_pair_constraints(a, t)?;
    let analytic = c.eps_min.ok_or_else(|| Error::Precondition("T is beyond the maximum loan term".into()))?;
    let hi = 4.0 * analytic + 4.0;
    bisect_threshold(0.0, hi, |eps, refine| positive_on(&EnergyProfile::delta_pair(a, t, eps, sigma)?, refine))
}

/// Largest `ε` the regularization resolves: keeps `A(1+ε)/σ · σ² = A(1+ε)σ`
/// at `0.05/(6π)`, so the repayment pulse still acts like a delta.
pub fn resolvable_eps(a: f64, sigma: f64) -> f64 {
    (0.05 / (6.0 * PI * a * sigma) - 1.0).max(0.0)
}

/// Numerical maximum loan term: the largest `T` for which the delta pair
/// becomes admissible at the largest resolvable repayment.
pub fn loan_term_boundary(a: f64, sigma: f64) -> Result<ThresholdEstimate> {
    if !(a > 0.0) || !(sigma > 0.0) {
        return Err(Error::InvalidParameter("A and sigma must be positive".into()));
    }
    let kappa = 6.0 * PI * a;
    let eps = resolvable_eps(a, sigma);
    // admissible below the boundary, so bisect on "inadmissible"
    bisect_threshold(0.05 / kappa, 1.5 / kappa, |t, refine| {
        Ok(!positive_on(&EnergyProfile::delta_pair(a, t, eps, sigma)?, refine)?)
    })
}

/// A parameterized set of test functions `g` for the variational check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFamily {
    /// `g(t) = exp(−(t−c)²/2τ²)`.
    Gaussian { centers: Vec<f64>, widths: Vec<f64> },
    /// Half-Gaussian rise `exp(−(t−c)²/2ℓ²)` for `t < c`, then a linear fall
    /// from 1 at `c` to 0 at `c + w`, zero afterwards.
    Ramp { tails: Vec<f64>, starts: Vec<f64>, widths: Vec<f64> },
}

fn spread(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let r = (hi / lo).ln();
    (0..n).map(|i| if n == 1 { lo } else { lo * (r * i as f64 / (n - 1) as f64).exp() }).collect()
}

impl TestFamily {
    /// Gaussians with centres spread over `[lo, hi]` and geometric widths.
    pub fn gaussian_grid(lo: f64, hi: f64, n_centers: usize, w_lo: f64, w_hi: f64, n_widths: usize) -> Self {
        TestFamily::Gaussian { centers: spread(lo, hi, n_centers), widths: geometric(w_lo, w_hi, n_widths) }
    }

    /// Ramps starting in `[lo, hi]` with geometric fall widths and tails.
    pub fn ramp_grid(
        lo: f64,
        hi: f64,
        n_starts: usize,
        (w_lo, w_hi, n_widths): (f64, f64, usize),
        (l_lo, l_hi, n_tails): (f64, f64, usize),
    ) -> Self {
        TestFamily::Ramp {
            tails: geometric(l_lo, l_hi, n_tails),
            starts: spread(lo, hi, n_starts),
            widths: geometric(w_lo, w_hi, n_widths),
        }
    }

    fn members(&self) -> Vec<Member> {
        match self {
            TestFamily::Gaussian { centers, widths } => widths
                .iter()
                .flat_map(|&tau| centers.iter().map(move |&c| Member::Gaussian { c, tau }))
                .collect(),
            TestFamily::Ramp { tails, starts, widths } => tails
                .iter()
                .flat_map(|&l| {
                    starts.iter().flat_map(move |&c| widths.iter().map(move |&w| Member::Ramp { l, c, w }))
                })
                .collect(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            TestFamily::Gaussian { centers, widths } => {
                !centers.is_empty() && !widths.is_empty() && widths.iter().all(|w| *w > 0.0)
            }
            TestFamily::Ramp { tails, starts, widths } => {
                !starts.is_empty()
                    && !widths.is_empty()
                    && !tails.is_empty()
                    && widths.iter().chain(tails).all(|w| *w > 0.0)
            }
        };
        if ok && self.members().iter().all(Member::is_finite) {
            Ok(())
        } else {
            Err(Error::InvalidParameter("test-function family needs members with positive widths".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Member {
    Gaussian { c: f64, tau: f64 },
    Ramp { l: f64, c: f64, w: f64 },
}

impl Member {
    fn is_finite(&self) -> bool {
        match *self {
            Member::Gaussian { c, tau } => c.is_finite() && tau.is_finite(),
            Member::Ramp { l, c, w } => l.is_finite() && c.is_finite() && w.is_finite(),
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Member::Gaussian { c, tau } => (-(t - c).powi(2) / (2.0 * tau * tau)).exp(),
            Member::Ramp { l, c, w } => {
                if t < c {
                    (-(t - c).powi(2) / (2.0 * l * l)).exp()
                } else if t < c + w {
                    1.0 - (t - c) / w
                } else {
                    0.0
                }
            }
        }
    }

    fn norm_sq(&self) -> f64 {
        match *self {
            Member::Gaussian { tau, .. } => tau * PI.sqrt(),
            Member::Ramp { l, w, .. } => 0.5 * l * PI.sqrt() + w / 3.0,
        }
    }

    fn derivative_norm_sq(&self) -> f64 {
        match *self {
            Member::Gaussian { tau, .. } => PI.sqrt() / (2.0 * tau),
            Member::Ramp { l, w, .. } => PI.sqrt() / (4.0 * l) + 1.0 / w,
        }
    }

    /// `∫ δ_σ(t − t_p) g(t)² dt`.
    fn pulse_overlap(&self, tp: f64, sigma: f64) -> f64 {
        match *self {
            Member::Gaussian { c, tau } => {
                let s2 = tau * tau + 2.0 * sigma * sigma;
                tau / s2.sqrt() * (-(tp - c).powi(2) / s2).exp()
            }
            Member::Ramp { c, w, .. } => {
                let (lo, hi) = (tp - 12.0 * sigma, tp + 12.0 * sigma);
                let mut breaks = vec![lo];
                breaks.extend([c, c + w].into_iter().filter(|&b| b > lo && b < hi));
                breaks.push(hi);
                let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
                let f = |t: f64| norm * (-0.5 * ((t - tp) / sigma).powi(2)).exp() * self.eval(t).powi(2);
                integrate_piecewise(f, &breaks, Tolerance { abs: 1e-15, rel: 1e-12, max_intervals: 200 }).value
            }
        }
    }

    /// `(∫ρg² + (1/6π)∫g′²) / ∫g²`.
    fn value(&self, profile: &EnergyProfile) -> f64 {
        let mut v: f64 = profile.pulses.iter().map(|p| p.amplitude * self.pulse_overlap(p.t, profile.sigma)).sum();
        if let Some(bg) = &profile.background {
            let f: Vec<f64> = (0..bg.values.len())
                .map(|i| bg.values[i] * self.eval(bg.start + i as f64 * bg.dt).powi(2))
                .collect();
            v += simpson(&f, bg.dt);
        }
        (v + self.derivative_norm_sq() / (6.0 * PI)) / self.norm_sq()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunctionReport {
    /// Most negative `(∫ρg² + (1/6π)∫g′²)/∫g²` over the family.
    pub best_value: f64,
    pub best: Member,
    pub certifies_inadmissible: bool,
    pub evaluated: usize,
}

/// Flanagan's inequality tested on each member of the family; a negative
/// optimum certifies inadmissibility, a non-negative one is inconclusive.
pub fn test_function_constraint(profile: &EnergyProfile, family: &TestFamily) -> Result<TestFunctionReport> {
    family.validate()?;
    let members = family.members();
    let mut best = (f64::INFINITY, members[0]);
    for m in &members {
        let v = m.value(profile);
        if v < best.0 {
            best = (v, *m);
        }
    }
    Ok(TestFunctionReport {
        best_value: best.0,
        best: best.1,
        certifies_inadmissible: best.0 < 0.0,
        evaluated: members.len(),
    })
}

/// Largest `ε` that some family member still certifies as inadmissible for
/// a delta pair; the value is affine in `ε`, so each member gives it directly.
/// Returns `None` if no member certifies even at `ε = 0`.
pub fn test_function_eps_threshold(a: f64, t: f64, sigma: f64, family: &TestFamily) -> Result<Option<f64>> {
    family.validate()?;
    let base = EnergyProfile::delta_pair(a, t, 0.0, sigma)?;
    let mut best: Option<f64> = None;
    for m in family.members() {
        let v0 = m.value(&base);
        let slope = a * m.pulse_overlap(t, sigma) / m.norm_sq();
        if v0 < 0.0 {
            let e = if slope > 0.0 { -v0 / slope } else { f64::INFINITY };
            best = Some(best.map_or(e, |b: f64| b.max(e)));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_pair_closed_forms() {
        let a = 1.0 / (6.0 * PI);
        assert_eq!(delta_pair_constraints(a, 0.5).unwrap().eps_min, Some(1.0));
        assert!((delta_pair_constraints(a, 0.9).unwrap().eps_min.unwrap() - 9.0).abs() < 1e-14);
        assert_eq!(delta_pair_constraints(a, 1.2).unwrap().eps_min, None);
        assert!(delta_pair_constraints(a, 0.999_999).unwrap().eps_min.unwrap() > 1e5);
        assert!(delta_pair_constraints(0.0, 1.0).is_err());
        assert!(delta_pair_constraints(1.0, -1.0).is_err());
    }

    #[test]
    fn free_dirichlet_laplacian() {
        let p = EnergyProfile::zero(0.1).unwrap();
        let op = SchrodingerOperator::new(p, -1.0, 1.0, 0.01, Boundary::Dirichlet).unwrap();
        let e = lowest_eigenvalue(&op).unwrap();
        let exact = (PI / 2.0_f64).powi(2);
        assert!((e.value - exact).abs() < 1e-8, "{} vs {exact}", e.value);
        assert!(e.error_estimate > 0.0 && e.error_estimate < 1e-4);
    }

    #[test]
    fn attractive_pulse_binds() {
        let p = EnergyProfile::new(vec![Pulse { t: 0.0, amplitude: -0.01 }], None, 0.05).unwrap();
        let op = SchrodingerOperator::new(p, -80.0, 80.0, 0.005, Boundary::Dirichlet).unwrap();
        let e = lowest_eigenvalue(&op).unwrap();
        // weak delta well of strength κ binds at −κ²/4
        let kappa = 6.0 * PI * 0.01;
        assert!(e.value < 0.0);
        assert!((e.value + kappa * kappa / 4.0).abs() < 0.05 * kappa * kappa / 4.0, "{}", e.value);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let p = EnergyProfile::zero(0.1).unwrap();
        assert!(matches!(
            SchrodingerOperator::new(p, -1.0, 1.0, 0.05, Boundary::Dirichlet),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn nonnegative_profiles_are_admissible() {
        let p = EnergyProfile::new(vec![Pulse { t: 0.0, amplitude: 0.3 }, Pulse { t: 1.0, amplitude: 0.1 }], None, 1e-3)
            .unwrap();
        assert!(admissible(&p).unwrap().admissible);
        assert!(admissible(&EnergyProfile::zero(0.1).unwrap()).unwrap().admissible);
    }

    #[test]
    fn delta_pair_admissibility_examples() {
        let a = 1.0 / (6.0 * PI);
        let sigma = 1e-3;
        assert!(admissible(&EnergyProfile::delta_pair(a, 0.5, 2.0, sigma).unwrap()).unwrap().admissible);
        assert!(!admissible(&EnergyProfile::delta_pair(a, 0.5, 0.5, sigma).unwrap()).unwrap().admissible);
        for eps in [1.0, 10.0, 100.0] {
            assert!(!admissible(&EnergyProfile::delta_pair(a, 1.2, eps, sigma).unwrap()).unwrap().admissible);
        }
    }

    #[test]
    fn test_functions_on_trivial_profiles() {
        let gauss = TestFamily::gaussian_grid(-2.0, 2.0, 9, 0.1, 10.0, 9);
        let ramp = TestFamily::ramp_grid(-1.0, 1.0, 5, (0.1, 5.0, 5), (1.0, 100.0, 3));
        let single = EnergyProfile::new(vec![Pulse { t: 0.0, amplitude: 1.0 }], None, 0.01).unwrap();
        for fam in [&gauss, &ramp] {
            let r = test_function_constraint(&EnergyProfile::zero(0.1).unwrap(), fam).unwrap();
            assert!(!r.certifies_inadmissible && r.best_value > 0.0);
            assert!(!test_function_constraint(&single, fam).unwrap().certifies_inadmissible);
        }
    }

    #[test]
    fn ramp_certifies_beyond_the_loan_term() {
        let a = 1.0 / (6.0 * PI);
        let ramp = TestFamily::ramp_grid(-0.2, 0.2, 21, (0.5, 1.5, 41), (10.0, 1000.0, 3));
        let p = EnergyProfile::delta_pair(a, 1.3, 50.0, 1e-3).unwrap();
        assert!(test_function_constraint(&p, &ramp).unwrap().certifies_inadmissible);
        assert!(!admissible(&p).unwrap().admissible);
    }

    #[test]
    fn profile_json() {
        let text = r#"{"pulses": [{"t": 0.0, "A": -0.1}, {"t": 1.0, "A": 0.3}], "sigma": 0.001}"#;
        let p = EnergyProfile::from_json_str(text, None).unwrap();
        assert_eq!(p.pulses().len(), 2);
        let bad = r#"{"pulses": [{"t": 1.0, "A": -0.1}, {"t": 0.0, "A": 0.3}], "sigma": 0.001}"#;
        assert!(EnergyProfile::from_json_str(bad, None).is_err());
    }
}
