//! Weyl quantization of phase-space symbols and Wigner functions for one
//! degree of freedom on a uniform grid.
//!
//! Position grid: `x_j = −X + j·dx`, `j < N`, `dx = 2X/N`. Symbols live on the
//! midpoint grid `x_m = −X + m·dx/2` (`m ≤ 2N−2`) times the momentum grid
//! `p_k = (k − N)·dp` (`k < 2N`), `dp = πħ/(N·dx)`. On these grids the
//! discrete Weyl operator and the discrete Wigner function satisfy the
//! expectation identity exactly.
//!
//! Wigner functions follow `W = ∫dy e^{ipy} ψ̄(x+ħy/2) ψ(x−ħy/2)` (over
//! `‖ψ‖²`), so `⟨F_w⟩ = ∫ F W dx dp/2π` for every `ħ`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_X: f64 = 8.0;
pub const DEFAULT_N: usize = 256;
/// Relative size of the symbol at the momentum edges that counts as overflow.
pub const P_TAIL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x_max: f64,
    pub n: usize,
    pub hbar: f64,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self { x_max: DEFAULT_X, n: DEFAULT_N, hbar: 1.0 }
    }
}

impl PhaseGrid {
    pub fn new(x_max: f64, n: usize, hbar: f64) -> Result<Self> {
        if !(x_max > 0.0 && x_max.is_finite()) || n < 4 || !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidParameter(format!("invalid phase grid X={x_max}, N={n}, hbar={hbar}")));
        }
        Ok(Self { x_max, n, hbar })
    }

    pub fn with_hbar(self, hbar: f64) -> Result<Self> {
        Self::new(self.x_max, self.n, hbar)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.x_max / self.n as f64
    }

    pub fn dp(&self) -> f64 {
        PI * self.hbar / (self.n as f64 * self.dx())
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.x_max + j as f64 * self.dx()
    }

    pub fn x_mid(&self, m: usize) -> f64 {
        -self.x_max + m as f64 * 0.5 * self.dx()
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64) * self.dp()
    }

    pub fn mid_points(&self) -> usize {
        2 * self.n - 1
    }

    pub fn p_points(&self) -> usize {
        2 * self.n
    }
}

/// How the symbol behaves at large `|p|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PSupport {
    /// Must be negligible at the momentum edges.
    #[default]
    Compact,
    /// Polynomial growth accepted; quantized as the truncated grid operator.
    Polynomial,
}

/// Real symbol `F(x_m, p_k)` on the midpoint × momentum grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceSymbol {
    grid: PhaseGrid,
    values: Vec<f64>,
    support: PSupport,
}

impl PhaseSpaceSymbol {
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: PhaseGrid, support: PSupport, f: F) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.mid_points() * grid.p_points());
        for m in 0..grid.mid_points() {
            let x = grid.x_mid(m);
            for k in 0..grid.p_points() {
                values.push(f(x, grid.p(k)));
            }
        }
        Self::from_values(grid, support, values)
    }

    /// Row-major values, `values[m * 2N + k]`.
    pub fn from_values(grid: PhaseGrid, support: PSupport, values: Vec<f64>) -> Result<Self> {
        let expected = grid.mid_points() * grid.p_points();
        if values.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("symbol values must be finite".into()));
        }
        Ok(Self { grid, values, support })
    }

    pub fn constant(grid: PhaseGrid, c: f64) -> Result<Self> {
        Self::from_fn(grid, PSupport::Polynomial, |_, _| c)
    }

    /// `(x² + p²)/2`.
    pub fn harmonic(grid: PhaseGrid) -> Result<Self> {
        Self::from_fn(grid, PSupport::Polynomial, |x, p| 0.5 * (x * x + p * p))
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn support(&self) -> PSupport {
        self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, m: usize, k: usize) -> f64 {
        self.values[m * self.grid.p_points() + k]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn check_p_support(&self) -> Result<()> {
        if self.support == PSupport::Polynomial {
            return Ok(());
        }
        let np = self.grid.p_points();
        let scale = self.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let edge = (0..self.grid.mid_points())
            .map(|m| self.value(m, 0).abs().max(self.value(m, np - 1).abs()))
            .fold(0.0f64, f64::max);
        if edge > P_TAIL * scale {
            return Err(Error::InvalidParameter(format!(
                "symbol p-support overflows the momentum grid (edge/max = {:e})",
                edge / scale
            )));
        }
        Ok(())
    }

    /// CSV rows `(x, p, F)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "p", "F"])?;
        for m in 0..self.grid.mid_points() {
            for k in 0..self.grid.p_points() {
                w.write_record([
                    format!("{:.17e}", self.grid.x_mid(m)),
                    format!("{:.17e}", self.grid.p(k)),
                    format!("{:.17e}", self.value(m, k)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads values written by [`write_csv`](Self::write_csv) for `grid`.
    pub fn read_csv<R: Read>(reader: R, grid: PhaseGrid, support: PSupport) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let v: f64 = rec[2].parse().map_err(|e| Error::InvalidParameter(format!("bad symbol value: {e}")))?;
            values.push(v);
        }
        Self::from_values(grid, support, values)
    }
}

/// Complex samples `ψ(x_j)` with `dx Σ|ψ_j|² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: PhaseGrid,
    values: Vec<Complex64>,
}

impl WaveFunction {
    /// Normalizes the samples under the grid measure.
    pub fn normalized(grid: PhaseGrid, mut values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, found: values.len() });
        }
        let norm = (grid.dx() * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidParameter("wave function has zero or non-finite norm".into()));
        }
        values.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { grid, values })
    }

    /// Accepts samples that are already unit-normalized (to 1e-10).
    pub fn new(grid: PhaseGrid, values: Vec<Complex64>) -> Result<Self> {
        let w = Self { grid, values };
        if w.values.len() != grid.n {
            return Err(Error::DimensionMismatch { expected: grid.n, found: w.values.len() });
        }
        if (w.norm_sq() - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("wave function norm² is {}", w.norm_sq())));
        }
        Ok(w)
    }

    /// Oscillator eigenstate `n` of `(x² + p²)/2` (unit mass and frequency).
    pub fn oscillator(grid: PhaseGrid, n: usize) -> Result<Self> {
        let h = grid.hbar;
        let vals: Vec<Complex64> = (0..grid.n)
            .map(|j| {
                let x = grid.x(j) / h.sqrt();
                let mut prev = 0.0;
                let mut cur = PI.powf(-0.25) * (-0.5 * x * x).exp();
                for k in 0..n {
                    let next = (2.0 / (k + 1) as f64).sqrt() * x * cur - (k as f64 / (k + 1) as f64).sqrt() * prev;
                    prev = cur;
                    cur = next;
                }
                Complex64::new(cur * h.powf(-0.25), 0.0)
            })
            .collect();
        Self::normalized(grid, vals)
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// Reads rows `(x, re, im)` with a header; `x` must match the grid nodes.
    pub fn read_csv<R: Read>(reader: R, grid: PhaseGrid) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let mut values = Vec::new();
        for (j, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::InvalidParameter(format!("row {j} needs columns x, re, im")))?
                    .parse()
                    .map_err(|e| Error::InvalidParameter(format!("row {j}: {e}")))
            };
            let x = field(0)?;
            if (x - grid.x(j)).abs() > 1e-9 * grid.x_max {
                return Err(Error::InvalidParameter(format!("row {j}: x = {x} is not the grid node {}", grid.x(j))));
            }
            values.push(Complex64::new(field(1)?, field(2)?));
        }
        Self::normalized(grid, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "re", "im"])?;
        for (j, z) in self.values.iter().enumerate() {
            w.write_record([self.grid.x(j), z.re, z.im].map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `|ψ|²` at the two ends of the grid.
    pub fn boundary_density(&self) -> f64 {
        self.values[0].norm_sqr().max(self.values[self.grid.n - 1].norm_sqr())
    }

    /// `dx Σ ψ̄_i A_ij ψ_j`.
    pub fn expectation(&self, a: &DMatrix<Complex64>) -> Complex64 {
        let psi = nalgebra::DVector::from_column_slice(&self.values);
        let apsi = a * &psi;
        psi.dotc(&apsi) * self.grid.dx()
    }
}

/// `A_ij = (1/2N) Σ_k F(x_{i+j}, p_k) e^{i p_k (x_i − x_j)/ħ}`, the grid form of
/// the Weyl kernel with the `dx` of `Σ_j` folded out; apply with
/// [`WaveFunction::expectation`] or as `(F_w ψ)_i = Σ_j A_ij ψ_j`.
pub fn weyl_quantize(f: &PhaseSpaceSymbol) -> Result<DMatrix<Complex64>> {
    f.check_p_support()?;
    let g = f.grid;
    let n = g.n;
    let np = g.p_points();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(np);
    // kernel[m][s mod np] = (1/np) Σ_k F(m,k) e^{2πi(k−N)s/np}
    let mut kernel = vec![Complex64::new(0.0, 0.0); g.mid_points() * np];
    let mut buf = vec![Complex64::new(0.0, 0.0); np];
    for m in 0..g.mid_points() {
        for k in 0..np {
            buf[k] = Complex64::new(f.value(m, k), 0.0);
        }
        fft.process(&mut buf);
        for s in 0..np {
            let sign = if s % 2 == 0 { 1.0 } else { -1.0 };
            kernel[m * np + s] = buf[s] * (sign / np as f64);
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let s = (i as isize - j as isize).rem_euclid(np as isize) as usize;
            a[(i, j)] = kernel[(i + j) * np + s];
        }
    }
    Ok(a)
}

/// Largest `|A − A†|` entry.
pub fn hermiticity_defect(a: &DMatrix<Complex64>) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ascending eigenvalues of the hermitian part of `A`.
pub fn eigenvalues(a: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// `W(m, k)` on the midpoint × full momentum grid (row-major, `2N` per row).
fn full_wigner(psi: &WaveFunction) -> Vec<Complex64> {
    let g = psi.grid;
    let n = g.n as isize;
    let np = g.p_points();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(np);
    let pref = 2.0 * g.dx() / g.hbar / psi.norm_sq();
    let mut out = vec![Complex64::new(0.0, 0.0); g.mid_points() * np];
    let mut buf = vec![Complex64::new(0.0, 0.0); np];
    let v = &psi.values;
    for m in 0..g.mid_points() as isize {
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        // s ≡ m (mod 2); i = (m+s)/2, j = (m−s)/2 within [0, N)
        let mut s = -(m.min(2 * (n - 1) - m));
        while s <= m.min(2 * (n - 1) - m) {
            let i = (m + s) / 2;
            let j = (m - s) / 2;
            let sign = if s.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[s.rem_euclid(np as isize) as usize] = v[i as usize].conj() * v[j as usize] * sign;
            s += 2;
        }
        fft.process(&mut buf);
        for k in 0..np {
            out[m as usize * np + k] = buf[k] * pref;
        }
    }
    out
}

/// Wigner function on the position grid and the central momentum band
/// `p_k = (k − N/2)·dp`, `k < N`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFunction {
    pub grid: PhaseGrid,
    /// Row-major `values[j * N + k]`.
    pub values: Vec<f64>,
    /// Largest imaginary part discarded.
    pub imaginary_defect: f64,
    /// `|ψ|²` at the grid ends; above 1e-12 the box truncates the state.
    pub boundary_density: f64,
}

impl WignerFunction {
    pub fn truncation_warning(&self) -> bool {
        self.boundary_density > 1e-12
    }

    pub fn p(&self, k: usize) -> f64 {
        (k as f64 - (self.grid.n / 2) as f64) * self.grid.dp()
    }

    pub fn value(&self, j: usize, k: usize) -> f64 {
        self.values[j * self.grid.n + k]
    }

    /// `∫ W dx dp / 2π`.
    pub fn normalization(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp() / (2.0 * PI)
    }

    /// `∫ W dp / 2π` at each `x_j`.
    pub fn position_marginal(&self) -> Vec<f64> {
        let n = self.grid.n;
        (0..n).map(|j| self.values[j * n..(j + 1) * n].iter().sum::<f64>() * self.grid.dp() / (2.0 * PI)).collect()
    }

    /// `∫ W dx / 2π` at each band momentum.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let n = self.grid.n;
        (0..n).map(|k| (0..n).map(|j| self.value(j, k)).sum::<f64>() * self.grid.dx() / (2.0 * PI)).collect()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// CSV rows `(x, p, W)`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "p", "W"])?;
        for j in 0..self.grid.n {
            for k in 0..self.grid.n {
                w.write_record([
                    format!("{:.17e}", self.grid.x(j)),
                    format!("{:.17e}", self.p(k)),
                    format!("{:.17e}", self.value(j, k)),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn wigner(psi: &WaveFunction) -> Result<WignerFunction> {
    let g = psi.grid;
    if !(psi.norm_sq() > 0.0) {
        return Err(Error::InvalidParameter("wave function is zero".into()));
    }
    let full = full_wigner(psi);
    let n = g.n;
    let np = g.p_points();
    let mut values = Vec::with_capacity(n * n);
    let mut imaginary_defect: f64 = 0.0;
    for j in 0..n {
        let m = 2 * j;
        for k in 0..n {
            let z = full[m * np + k + n / 2];
            imaginary_defect = imaginary_defect.max(z.im.abs());
            values.push(z.re);
        }
    }
    Ok(WignerFunction { grid: g, values, imaginary_defect, boundary_density: psi.boundary_density() })
}

/// `∫ F W_ψ dx dp / 2π` on the midpoint × momentum grid.
pub fn expectation_via_wigner(f: &PhaseSpaceSymbol, psi: &WaveFunction) -> Result<f64> {
    if f.grid != psi.grid {
        return Err(Error::InvalidParameter("symbol and wave function are on different grids".into()));
    }
    let g = f.grid;
    let w = full_wigner(psi);
    let acc: f64 = f.values.iter().zip(&w).map(|(fv, wv)| fv * wv.re).sum();
    Ok(acc * 0.5 * g.dx() * g.dp() / (2.0 * PI))
}

/// `C = max(0, −λ_min(F_w))` for a pointwise non-negative symbol.
pub fn garding_constant(f: &PhaseSpaceSymbol) -> Result<f64> {
    if f.min_value() < 0.0 {
        return Err(Error::InvalidParameter(format!("symbol takes negative values (min {})", f.min_value())));
    }
    let a = weyl_quantize(f)?;
    let lmin = eigenvalues(&a)[0];
    Ok((-lmin).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GardingPoint {
    pub hbar: f64,
    pub constant: f64,
}

/// `C(ħ)` for a symbol given as a function, on `grid` with each `ħ`.
pub fn garding_scan<F: Fn(f64, f64) -> f64 + Sync>(
    grid: PhaseGrid,
    support: PSupport,
    hbars: &[f64],
    f: F,
) -> Result<Vec<GardingPoint>> {
    hbars
        .iter()
        .map(|&hbar| {
            let s = PhaseSpaceSymbol::from_fn(grid.with_hbar(hbar)?, support, &f)?;
            Ok(GardingPoint { hbar, constant: garding_constant(&s)? })
        })
        .collect()
}

/// Smooth non-negative symbol vanishing on the diagonal `x = p`:
/// `(x − p)² exp(−(x² + p²)/2)`.
pub fn diagonal_bump(x: f64, p: f64) -> f64 {
    (x - p).powi(2) * (-0.5 * (x * x + p * p)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> PhaseGrid {
        PhaseGrid::new(6.0, 64, 1.0).unwrap()
    }

    #[test]
    fn constant_symbol_is_identity() {
        let a = weyl_quantize(&PhaseSpaceSymbol::constant(small(), 1.0).unwrap()).unwrap();
        let id = DMatrix::<Complex64>::identity(64, 64);
        let d = (&a - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(d < 1e-14);
    }

    #[test]
    fn position_symbol_is_multiplication() {
        let g = small();
        let a = weyl_quantize(&PhaseSpaceSymbol::from_fn(g, PSupport::Polynomial, |x, _| x).unwrap()).unwrap();
        for i in 0..g.n {
            for j in 0..g.n {
                let expect = if i == j { g.x(i) } else { 0.0 };
                assert!((a[(i, j)] - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn overflowing_symbol_is_rejected() {
        let s = PhaseSpaceSymbol::from_fn(small(), PSupport::Compact, |_, p| 1.0 / (1.0 + p * p)).unwrap();
        assert!(weyl_quantize(&s).is_err());
    }

    #[test]
    fn oscillator_wigner_values() {
        let g = PhaseGrid::default();
        let w0 = wigner(&WaveFunction::oscillator(g, 0).unwrap()).unwrap();
        let w1 = wigner(&WaveFunction::oscillator(g, 1).unwrap()).unwrap();
        let (j0, k0) = (g.n / 2, g.n / 2);
        assert_eq!(g.x(j0), 0.0);
        assert_eq!(w0.p(k0), 0.0);
        assert!((w0.value(j0, k0) - 2.0).abs() < 1e-10);
        assert!((w1.value(j0, k0) + 2.0).abs() < 1e-10);
        assert!(w0.imaginary_defect < 1e-12);
        assert!(!w0.truncation_warning());
    }

    #[test]
    fn garding_rejects_negative_symbols() {
        let s = PhaseSpaceSymbol::from_fn(small(), PSupport::Polynomial, |x, _| x).unwrap();
        assert!(garding_constant(&s).is_err());
        let one = PhaseSpaceSymbol::constant(small(), 1.0).unwrap();
        assert_eq!(garding_constant(&one).unwrap(), 0.0);
        let x2 = PhaseSpaceSymbol::from_fn(small(), PSupport::Polynomial, |x, _| x * x).unwrap();
        assert_eq!(garding_constant(&x2).unwrap(), 0.0);
    }
}
