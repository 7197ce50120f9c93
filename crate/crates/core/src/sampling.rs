//! Real sampling (weight) functions `g(t)` and their Fourier transforms.
//!
//! Fourier transforms use the convention `ĝ(u) = ∫ g(t) e^{iut} dt`
//! throughout the crate. Closed forms are used whenever a kind admits one;
//! otherwise integrals run over the grid samples (composite Simpson) or over
//! the closed-form profile (adaptive Gauss–Kronrod).

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{self, integrate, integrate_piecewise, Integral, Tolerance};
use crate::special::bessel_k0;

/// Minimum number of grid points across the characteristic width.
pub const MIN_POINTS_PER_WIDTH: usize = 16;
/// Default grid spacing in units of the characteristic width.
pub const DEFAULT_POINTS_PER_WIDTH: f64 = 100.0;
/// Half-width of the default window for non-compact kinds, in units of τ.
pub const DEFAULT_WINDOW: f64 = 12.0;

/// Closed-form tag of a sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SamplerKind {
    /// `exp(-t²/2τ²)`
    Gaussian { tau: f64 },
    /// `sqrt(τ / (π (t² + τ²)))`, unit L² mass.
    LorentzianSqrt { tau: f64 },
    /// `exp(-1/(1-s²))` with `s` mapping `[a, b]` onto `[-1, 1]`.
    Bump { a: f64, b: f64 },
    /// Samples only.
    Tabulated,
}

/// How to lay out the time grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GridSpec {
    /// `dt = width/100` over the default window.
    #[default]
    Default,
    /// Given spacing over the default window.
    Spacing(f64),
    /// Given spacing over an explicit window.
    Window { dt: f64, start: f64, end: f64 },
}

/// Caller-selected overall normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Keep the closed-form profile as written.
    Profile,
    /// Rescale so that `∫ g² dt = 1`.
    UnitL2,
    /// Rescale so that `∫ g dt = 1`.
    UnitMass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingFunction {
    kind: SamplerKind,
    amplitude: f64,
    center: f64,
    start: f64,
    dt: f64,
    values: Vec<f64>,
    support: (f64, f64),
}

fn bump_profile(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

fn bump_profile_derivative(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let q = 1.0 - s * s;
        bump_profile(s) * (-2.0 * s / (q * q))
    }
}

/// Build a sampler of the given kind on the requested grid.
pub fn make_sampler(kind: SamplerKind, grid: GridSpec) -> Result<SamplingFunction> {
    SamplingFunction::new(kind, 0.0, grid)
}

impl SamplingFunction {
    pub fn gaussian(tau: f64) -> Result<Self> {
        make_sampler(SamplerKind::Gaussian { tau }, GridSpec::Default)
    }

    pub fn lorentzian_sqrt(tau: f64) -> Result<Self> {
        make_sampler(SamplerKind::LorentzianSqrt { tau }, GridSpec::Default)
    }

    pub fn bump(a: f64, b: f64) -> Result<Self> {
        make_sampler(SamplerKind::Bump { a, b }, GridSpec::Default)
    }

    /// Closed-form sampler centred at `center` instead of the origin.
    /// Bumps ignore the centre (their support fixes the location).
    pub fn new(kind: SamplerKind, center: f64, grid: GridSpec) -> Result<Self> {
        if !center.is_finite() {
            return Err(invalid("sampler centre must be finite"));
        }
        let (width, window) = match kind {
            SamplerKind::Gaussian { tau } | SamplerKind::LorentzianSqrt { tau } => {
                if !(tau > 0.0 && tau.is_finite()) {
                    return Err(invalid(format!("width tau must be positive, got {tau}")));
                }
                (tau, (center - DEFAULT_WINDOW * tau, center + DEFAULT_WINDOW * tau))
            }
            SamplerKind::Bump { a, b } => {
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(invalid(format!("bump needs a < b, got [{a}, {b}]")));
                }
                (b - a, (a, b))
            }
            SamplerKind::Tabulated => {
                return Err(invalid("tabulated samplers are built from samples"));
            }
        };
        let center = if matches!(kind, SamplerKind::Bump { .. }) { 0.0 } else { center };
        let (dt, start, end) = match grid {
            GridSpec::Default => (width / DEFAULT_POINTS_PER_WIDTH, window.0, window.1),
            GridSpec::Spacing(dt) => (dt, window.0, window.1),
            GridSpec::Window { dt, start, end } => (dt, start, end),
        };
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {dt}")));
        }
        if !(end > start) {
            return Err(invalid("grid window is empty"));
        }
        let points = width / dt;
        if points < MIN_POINTS_PER_WIDTH as f64 {
            return Err(Error::GridTooCoarse { points, required: MIN_POINTS_PER_WIDTH });
        }
        let support = match kind {
            SamplerKind::Bump { a, b } => (a, b),
            _ => window,
        };
        if start > support.0 + 1e-12 * width || end < support.1 - 1e-12 * width {
            return Err(invalid("grid does not cover the support"));
        }
        let n = ((end - start) / dt).round() as usize + 1;
        let mut g = Self {
            kind,
            amplitude: 1.0,
            center,
            start,
            dt,
            values: Vec::new(),
            support,
        };
        g.values = (0..n).map(|i| g.eval(start + i as f64 * dt)).collect();
        Ok(g)
    }

    /// Sampler defined only by uniformly spaced samples starting at `start`.
    pub fn tabulated(start: f64, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !start.is_finite() {
            return Err(invalid("tabulated grid needs finite start and dt > 0"));
        }
        if values.len() < MIN_POINTS_PER_WIDTH {
            return Err(Error::GridTooCoarse {
                points: values.len() as f64,
                required: MIN_POINTS_PER_WIDTH,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("sample values must be finite"));
        }
        let end = start + (values.len() - 1) as f64 * dt;
        Ok(Self {
            kind: SamplerKind::Tabulated,
            amplitude: 1.0,
            center: 0.0,
            start,
            dt,
            values,
            support: (start, end),
        })
    }

    /// Read two-column CSV `(t, g(t))` with a one-line header.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut ts = Vec::new();
        let mut gs = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() < 2 {
                return Err(invalid("sampler CSV needs two columns"));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| invalid(format!("bad number {s:?}: {e}")));
            ts.push(parse(&rec[0])?);
            gs.push(parse(&rec[1])?);
        }
        if ts.len() < 2 {
            return Err(invalid("sampler CSV needs at least two rows"));
        }
        let dt = (ts[ts.len() - 1] - ts[0]) / (ts.len() - 1) as f64;
        for (i, t) in ts.iter().enumerate() {
            if (t - (ts[0] + i as f64 * dt)).abs() > 1e-9 * dt.abs().max(1.0) {
                return Err(invalid("sampler CSV must be uniformly spaced"));
            }
        }
        Self::tabulated(ts[0], dt, gs)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "g"])?;
        for (t, g) in self.times().zip(&self.values) {
            w.write_record([format!("{t:.17e}"), format!("{g:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn kind(&self) -> SamplerKind {
        self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.start + i as f64 * self.dt)
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// τ for Gaussian/Lorentzian, `b - a` for bumps, the span for tables.
    pub fn characteristic_width(&self) -> f64 {
        match self.kind {
            SamplerKind::Gaussian { tau } | SamplerKind::LorentzianSqrt { tau } => tau,
            SamplerKind::Bump { a, b } => b - a,
            SamplerKind::Tabulated => self.support.1 - self.support.0,
        }
    }

    pub fn nyquist(&self) -> f64 {
        PI / self.dt
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0 || self.values.iter().all(|&v| v == 0.0)
    }

    /// Multiply the sampler by a constant.
    pub fn scaled_by(&self, factor: f64) -> Self {
        let mut g = self.clone();
        g.amplitude *= factor;
        g.values.iter_mut().for_each(|v| *v *= factor);
        g
    }

    pub fn normalized(&self, norm: Normalization) -> Result<Self> {
        let size = match norm {
            Normalization::Profile => return Ok(self.clone()),
            Normalization::UnitL2 => self.norm_sq().value.sqrt(),
            Normalization::UnitMass => self.mass().value,
        };
        if !(size.abs() > 0.0) {
            return Err(invalid("cannot normalize a vanishing sampler"));
        }
        Ok(self.scaled_by(1.0 / size))
    }

    /// `g(t)`: closed form where available, linear interpolation for tables.
    pub fn eval(&self, t: f64) -> f64 {
        let s = t - self.center;
        self.amplitude
            * match self.kind {
                SamplerKind::Gaussian { tau } => (-s * s / (2.0 * tau * tau)).exp(),
                SamplerKind::LorentzianSqrt { tau } => (tau / (PI * (s * s + tau * tau))).sqrt(),
                SamplerKind::Bump { a, b } => bump_profile((2.0 * t - (a + b)) / (b - a)),
                SamplerKind::Tabulated => return self.interpolate(t),
            }
    }

    fn interpolate(&self, t: f64) -> f64 {
        let x = (t - self.start) / self.dt;
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let frac = x - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// `g'(t)` from the closed form; `None` for tabulated samplers.
    pub fn eval_derivative(&self, t: f64) -> Option<f64> {
        let s = t - self.center;
        let d = match self.kind {
            SamplerKind::Gaussian { tau } => -s / (tau * tau) * (-s * s / (2.0 * tau * tau)).exp(),
            SamplerKind::LorentzianSqrt { tau } => {
                let q = s * s + tau * tau;
                -s / q * (tau / (PI * q)).sqrt()
            }
            SamplerKind::Bump { a, b } => {
                bump_profile_derivative((2.0 * t - (a + b)) / (b - a)) * 2.0 / (b - a)
            }
            SamplerKind::Tabulated => return None,
        };
        Some(self.amplitude * d)
    }

    /// `∫ g dt`.
    pub fn mass(&self) -> Integral {
        match self.kind {
            SamplerKind::Gaussian { tau } => exact(self.amplitude * tau * (2.0 * PI).sqrt()),
            SamplerKind::LorentzianSqrt { .. } => exact(f64::INFINITY),
            SamplerKind::Bump { a, b } => {
                let r = integrate(|t| self.eval(t), a, b, Tolerance::default());
                r
            }
            SamplerKind::Tabulated => quadrature::simpson_with_error(&self.values, self.dt),
        }
    }

    /// `∫ g² dt`.
    pub fn norm_sq(&self) -> Integral {
        let a2 = self.amplitude * self.amplitude;
        match self.kind {
            SamplerKind::Gaussian { tau } => exact(a2 * tau * PI.sqrt()),
            SamplerKind::LorentzianSqrt { .. } => exact(a2),
            SamplerKind::Bump { a, b } => integrate(|t| self.eval(t).powi(2), a, b, Tolerance::default()),
            SamplerKind::Tabulated => {
                let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
                quadrature::simpson_with_error(&sq, self.dt)
            }
        }
    }

    /// `∫ |g'|² dt`.
    pub fn derivative_norm_sq(&self) -> Integral {
        let a2 = self.amplitude * self.amplitude;
        match self.kind {
            SamplerKind::Gaussian { tau } => exact(a2 * PI.sqrt() / (2.0 * tau)),
            SamplerKind::LorentzianSqrt { tau } => exact(a2 / (8.0 * tau * tau)),
            SamplerKind::Bump { a, b } => integrate(
                |t| self.eval_derivative(t).unwrap_or(0.0).powi(2),
                a,
                b,
                Tolerance::default(),
            ),
            SamplerKind::Tabulated => {
                let d = self.derivative();
                let sq: Vec<f64> = d.values.iter().map(|v| v * v).collect();
                quadrature::simpson_with_error(&sq, self.dt)
            }
        }
    }

    /// Samples of `g'` on the same grid, returned as a tabulated sampler.
    ///
    /// Closed-form kinds are differentiated exactly; tables use centred
    /// differences with one-sided second-order stencils at the ends.
    pub fn derivative(&self) -> SamplingFunction {
        let n = self.values.len();
        let values: Vec<f64> = if self.kind == SamplerKind::Tabulated {
            let v = &self.values;
            let h = self.dt;
            (0..n)
                .map(|i| {
                    if i == 0 {
                        (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                    } else if i == n - 1 {
                        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                    } else {
                        (v[i + 1] - v[i - 1]) / (2.0 * h)
                    }
                })
                .collect()
        } else {
            self.times().map(|t| self.eval_derivative(t).unwrap_or(0.0)).collect()
        };
        SamplingFunction {
            kind: SamplerKind::Tabulated,
            amplitude: 1.0,
            center: 0.0,
            start: self.start,
            dt: self.dt,
            values,
            support: self.support,
        }
    }

    /// `g_λ(t) = g(λ t)`.
    pub fn scale_family(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid(format!("scale factor must be positive, got {lambda}")));
        }
        let mut out = self.clone();
        out.kind = match self.kind {
            SamplerKind::Gaussian { tau } => SamplerKind::Gaussian { tau: tau / lambda },
            SamplerKind::LorentzianSqrt { tau } => {
                out.amplitude /= lambda.sqrt();
                SamplerKind::LorentzianSqrt { tau: tau / lambda }
            }
            SamplerKind::Bump { a, b } => SamplerKind::Bump { a: a / lambda, b: b / lambda },
            SamplerKind::Tabulated => SamplerKind::Tabulated,
        };
        out.center = self.center / lambda;
        out.start = self.start / lambda;
        out.dt = self.dt / lambda;
        out.support = (self.support.0 / lambda, self.support.1 / lambda);
        // The new grid node t_i/λ carries the old sample g(t_i) exactly.
        Ok(out)
    }

    /// `ĝ(u) = ∫ g(t) e^{iut} dt` at a single frequency.
    pub fn fourier(&self, u: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, u * self.center);
        let a = self.amplitude;
        match self.kind {
            SamplerKind::Gaussian { tau } => {
                phase * a * tau * (2.0 * PI).sqrt() * (-0.5 * tau * tau * u * u).exp()
            }
            SamplerKind::LorentzianSqrt { tau } => {
                if u == 0.0 {
                    Complex64::new(f64::INFINITY, 0.0)
                } else {
                    phase * a * 2.0 * (tau / PI).sqrt() * bessel_k0(tau * u.abs())
                }
            }
            SamplerKind::Bump { a: lo, b: hi } => oscillatory(|t| self.eval(t), lo, hi, u),
            SamplerKind::Tabulated => grid_fourier(&self.values, self.start, self.dt, u),
        }
    }

    /// `∫ g(t)² e^{iut} dt`; this is the weight that smears `:T₀₀:`.
    pub fn square_fourier(&self, u: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, u * self.center);
        let a2 = self.amplitude * self.amplitude;
        match self.kind {
            SamplerKind::Gaussian { tau } => phase * a2 * tau * PI.sqrt() * (-0.25 * tau * tau * u * u).exp(),
            SamplerKind::LorentzianSqrt { tau } => phase * a2 * (-tau * u.abs()).exp(),
            SamplerKind::Bump { a: lo, b: hi } => oscillatory(|t| self.eval(t).powi(2), lo, hi, u),
            SamplerKind::Tabulated => {
                let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
                grid_fourier(&sq, self.start, self.dt, u)
            }
        }
    }

    /// `|ĝ(u)|²`.
    pub fn power(&self, u: f64) -> f64 {
        self.fourier(u).norm_sqr()
    }

    /// Frequency beyond which `|ĝ|²` (weighted by up to `u⁴`) is negligible,
    /// and a typical decay scale used to place quadrature breakpoints.
    pub fn spectral_extent(&self) -> (f64, f64) {
        match self.kind {
            SamplerKind::Gaussian { tau } => (10.0 / tau, 1.0 / tau),
            SamplerKind::LorentzianSqrt { tau } => (30.0 / tau, 1.0 / tau),
            SamplerKind::Bump { a, b } => {
                let w = b - a;
                ((self.nyquist()).min(2000.0 / w), 4.0 / w)
            }
            SamplerKind::Tabulated => (self.nyquist(), 2.0 * PI / (self.support.1 - self.support.0)),
        }
    }

    /// Sample `ĝ` on a symmetric frequency grid.
    pub fn fourier_transform(&self, freq: &FrequencyGrid) -> Result<SpectralFunction> {
        if freq.max > self.nyquist() {
            return Err(Error::AliasingRisk { frequency: freq.max, nyquist: self.nyquist() });
        }
        let us = freq.points();
        let values = us.iter().map(|&u| self.fourier(u)).collect();
        Ok(SpectralFunction { du: freq.du, max: freq.max, frequencies: us, values })
    }
}

fn exact(value: f64) -> Integral {
    Integral { value, error: 0.0 }
}

/// Trapezoid sum: Simpson's embedded `2dt` rule would alias at `u = π/dt`.
fn grid_fourier(values: &[f64], start: f64, dt: f64, u: f64) -> Complex64 {
    let last = values.len() - 1;
    let (mut re, mut im) = (0.0, 0.0);
    for (i, v) in values.iter().enumerate() {
        let wi = if i == 0 || i == last { 0.5 * dt } else { dt };
        let t = start + i as f64 * dt;
        let (s, c) = (u * t).sin_cos();
        re += wi * v * c;
        im += wi * v * s;
    }
    Complex64::new(re, im)
}

/// `∫_lo^hi f(t) e^{iut} dt` by adaptive quadrature split into half periods.
fn oscillatory<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, u: f64) -> Complex64 {
    let periods = (u.abs() * (hi - lo) / PI).ceil().max(1.0) as usize;
    let pieces = periods.min(4096);
    let breaks: Vec<f64> = (0..=pieces).map(|k| lo + (hi - lo) * k as f64 / pieces as f64).collect();
    let tol = Tolerance { abs: 1e-17, rel: 1e-13, max_intervals: 200 };
    let re = integrate_piecewise(|t| f(t) * (u * t).cos(), &breaks, tol);
    let im = integrate_piecewise(|t| f(t) * (u * t).sin(), &breaks, tol);
    Complex64::new(re.value, im.value)
}

/// Symmetric uniform frequency grid `u_j = j du`, `|u_j| <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    pub du: f64,
    pub max: f64,
}

impl FrequencyGrid {
    pub fn new(du: f64, max: f64) -> Result<Self> {
        if !(du > 0.0) || !(max > du) {
            return Err(invalid("frequency grid needs 0 < du < max"));
        }
        Ok(Self { du, max })
    }

    pub fn points(&self) -> Vec<f64> {
        let n = (self.max / self.du).floor() as i64;
        (-n..=n).map(|j| j as f64 * self.du).collect()
    }
}

/// Samples of `ĝ(u)` on a symmetric frequency grid.
#[derive(Debug, Clone)]
pub struct SpectralFunction {
    pub du: f64,
    pub max: f64,
    pub frequencies: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl SpectralFunction {
    /// Largest `|ĝ(-u) - conj ĝ(u)|` over the grid.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.values.len();
        (0..n)
            .filter(|&i| self.values[i].is_finite())
            .map(|i| (self.values[n - 1 - i] - self.values[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// `(1/2π) ∫ |ĝ|² du` over the grid (Simpson).
    pub fn parseval_norm_sq(&self) -> f64 {
        let p: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        quadrature::simpson(&p, self.du) / (2.0 * PI)
    }
}

/// `(1/2π) ∫_ℝ |ĝ(u)|² du` by adaptive quadrature of the spectrum.
pub fn spectral_norm_sq(g: &SamplingFunction) -> Integral {
    let (extent, scale) = g.spectral_extent();
    let mut breaks = vec![0.0];
    let mut x = scale.min(extent);
    while x < extent {
        breaks.push(x);
        x *= 2.0;
    }
    breaks.push(extent);
    let tol = Tolerance { abs: 1e-16, rel: 1e-12, max_intervals: 2000 };
    let r = integrate_piecewise(|u| g.power(u) + g.power(-u), &breaks, tol);
    Integral { value: r.value / (2.0 * PI), error: r.error / (2.0 * PI) }
}
