use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::lanczos::LinearOperator;
use super::space::TruncatedFockSpace;
use crate::error::{Error, Result};
use crate::sampling::{SamplerKind, SamplingFunction};

const HERMITIAN_TOL: f64 = 1e-12;
/// Largest dimension [`FieldOperatorMatrix::to_dense`] will materialize.
pub const DENSE_CAP: usize = 6000;

/// Whether the vacuum contribution `Σ ω_n/2L` is subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VacuumEnergy {
    #[default]
    NormalOrdered,
    Unsubtracted,
}

/// Quadratic operator
/// `A = c·1 + Σ_jk M_jk a_j†a_k + ½ Σ_jk (P_jk a_j a_k + P̄_jk a_j†a_k†)`
/// on a truncated Fock space, with `M` hermitian and `P` symmetric.
///
/// It is stored through its mode coefficients and applied matrix-free; the
/// action is that of the compression of `A` to the truncated space.
#[derive(Debug, Clone)]
pub struct FieldOperatorMatrix {
    space: Arc<TruncatedFockSpace>,
    m: Vec<Complex64>,
    p: Vec<Complex64>,
    shift: f64,
    label: String,
}

impl FieldOperatorMatrix {
    /// `m` and `p` are row-major `modes × modes`.
    pub fn from_coefficients(
        space: Arc<TruncatedFockSpace>,
        m: Vec<Complex64>,
        p: Vec<Complex64>,
        shift: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let nm = space.modes();
        if m.len() != nm * nm {
            return Err(Error::DimensionMismatch { expected: nm * nm, found: m.len() });
        }
        if p.len() != nm * nm {
            return Err(Error::DimensionMismatch { expected: nm * nm, found: p.len() });
        }
        Ok(Self { space, m, p, shift, label: label.into() })
    }

    pub fn space(&self) -> &Arc<TruncatedFockSpace> {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    /// Identity coefficient (zero unless the vacuum energy is kept).
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn number_conserving(&self) -> &[Complex64] {
        &self.m
    }

    pub fn pair(&self) -> &[Complex64] {
        &self.p
    }

    /// Largest deviation from `M = M†`, `P = Pᵀ`, relative to the largest entry.
    pub fn hermiticity_defect(&self) -> f64 {
        let nm = self.space.modes();
        let scale = self.m.iter().chain(&self.p).map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let mut d: f64 = 0.0;
        for j in 0..nm {
            for k in 0..nm {
                d = d.max((self.m[j * nm + k] - self.m[k * nm + j].conj()).norm());
                d = d.max((self.p[j * nm + k] - self.p[k * nm + j]).norm());
            }
        }
        d / scale
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.m.iter_mut().chain(out.p.iter_mut()).for_each(|z| *z *= factor);
        out.shift *= factor;
        out
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply_into(x, &mut y);
        y
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        let sp = &*self.space;
        let dim = sp.dimension();
        assert_eq!(x.len(), dim, "state dimension mismatch");
        assert_eq!(y.len(), dim, "output dimension mismatch");
        let nm = sp.modes();
        let cap = sp.occupation_cap();
        let n_low = sp.states_below(cap);
        let n_low2 = sp.states_below(cap - 1);
        let add = sp.add_table();
        let zero = Complex64::new(0.0, 0.0);

        // d[t][k] = <t| a_k |x> = sqrt(n_k(t)+1) x(t+k)
        let d: Vec<Complex64> = (0..n_low * nm)
            .into_par_iter()
            .map(|i| {
                let up = add[i] as usize;
                let c = sp.count(up, i % nm) as f64;
                c.sqrt() * x[up]
            })
            .collect();

        // h[t][j] = Σ_k M_jk d[t][k] + ½ Σ_{k∈occ(t)} conj(P_jk) sqrt(n_k(t)) x(t-k)
        // f[t][j] = Σ_k P_jk d[t][k]
        let mut h = vec![zero; n_low * nm];
        let mut f = vec![zero; n_low * nm];
        h.par_chunks_mut(nm).zip(f.par_chunks_mut(nm)).enumerate().for_each(|(t, (hr, fr))| {
            let dr = &d[t * nm..(t + 1) * nm];
            for j in 0..nm {
                let mr = &self.m[j * nm..(j + 1) * nm];
                let pr = &self.p[j * nm..(j + 1) * nm];
                let mut em = zero;
                let mut ep = zero;
                for k in 0..nm {
                    em += mr[k] * dr[k];
                    ep += pr[k] * dr[k];
                }
                let mut g = zero;
                for o in sp.occupations(t) {
                    g += pr[o.mode as usize].conj() * ((o.count as f64).sqrt() * x[o.minus as usize]);
                }
                hr[j] = em + 0.5 * g;
                fr[j] = ep;
            }
        });

        y.par_iter_mut().enumerate().for_each(|(s, ys)| {
            let mut acc = self.shift * x[s];
            for o in sp.occupations(s) {
                acc += (o.count as f64).sqrt() * h[o.minus as usize * nm + o.mode as usize];
            }
            if s < n_low2 {
                let occ = sp.occupations(s);
                let mut pair = zero;
                for j in 0..nm {
                    let nj = occ.iter().find(|o| o.mode as usize == j).map_or(0, |o| o.count as usize);
                    let up = add[s * nm + j] as usize;
                    pair += ((nj + 1) as f64).sqrt() * f[up * nm + j];
                }
                acc += 0.5 * pair;
            }
            *ys = acc;
        });
    }

    /// `⟨ψ|A|ψ⟩` (real part; the imaginary part vanishes for hermitian `A`).
    pub fn expectation(&self, psi: &[Complex64]) -> f64 {
        let y = self.apply(psi);
        inner(psi, &y).re
    }

    pub fn vacuum_expectation(&self) -> f64 {
        let mut omega = vec![Complex64::new(0.0, 0.0); self.dimension()];
        omega[0] = Complex64::new(1.0, 0.0);
        self.expectation(&omega)
    }

    /// Dense matrix on the truncated basis (small spaces only).
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dimension();
        if n > DENSE_CAP {
            return Err(Error::DimensionCap { dimension: n, cap: DENSE_CAP });
        }
        let mut out = DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..n {
            e[c] = Complex64::new(1.0, 0.0);
            let col = self.apply(&e);
            for r in 0..n {
                out[(r, c)] = col[r];
            }
            e[c] = Complex64::new(0.0, 0.0);
        }
        Ok(out)
    }
}

impl LinearOperator for FieldOperatorMatrix {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_into(x, y)
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Builds `∫ w(t) :T₀₀:(t, x₀) dt` from `ŵ(u) = ∫ w(t) e^{iut} dt`.
/// The plain energy density at `(t, x)` corresponds to `ŵ(u) = e^{iut}`.
pub fn weighted_energy<W: Fn(f64) -> Complex64>(
    space: &Arc<TruncatedFockSpace>,
    w_hat: W,
    w_total: f64,
    x0: f64,
    vacuum: VacuumEnergy,
    label: &str,
) -> Result<FieldOperatorMatrix> {
    let basis = space.basis();
    let modes = basis.modes();
    let nm = modes.len();
    let l = basis.length();
    let m2 = basis.mass() * basis.mass();
    let c: Vec<f64> = modes.iter().map(|md| (2.0 * l * md.omega).powf(-0.5)).collect();
    let mut cache: HashMap<u64, Complex64> = HashMap::new();
    let mut what = |u: f64| -> Result<Complex64> {
        let u = if u == 0.0 { 0.0 } else { u };
        if let Some(v) = cache.get(&u.to_bits()) {
            return Ok(*v);
        }
        let v = w_hat(u);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Resolution(format!("weight transform is not finite at u = {u}")));
        }
        cache.insert(u.to_bits(), v);
        Ok(v)
    };
    let mut m = vec![Complex64::new(0.0, 0.0); nm * nm];
    let mut p = vec![Complex64::new(0.0, 0.0); nm * nm];
    for j in 0..nm {
        for k in 0..nm {
            let (a, b) = (modes[j], modes[k]);
            let cc = c[j] * c[k];
            let r = a.omega * b.omega + a.k * b.k + m2;
            let s = -a.omega * b.omega - a.k * b.k + m2;
            let wm = what(a.omega - b.omega)?;
            let wp = what(a.omega + b.omega)?;
            m[j * nm + k] = cc * r * wm * Complex64::from_polar(1.0, (b.k - a.k) * x0);
            p[j * nm + k] = cc * s * wp.conj() * Complex64::from_polar(1.0, (a.k + b.k) * x0);
        }
    }
    let shift = match vacuum {
        VacuumEnergy::NormalOrdered => 0.0,
        VacuumEnergy::Unsubtracted => basis.vacuum_energy_density() * w_total,
    };
    FieldOperatorMatrix::from_coefficients(space.clone(), m, p, shift, label)
}

/// Normal-ordered energy density `:T₀₀:(t, x)`.
pub fn energy_density_matrix(space: &Arc<TruncatedFockSpace>, t: f64, x: f64) -> Result<FieldOperatorMatrix> {
    if !(t.is_finite() && x.is_finite()) {
        return Err(Error::InvalidParameter("(t, x) must be finite".into()));
    }
    weighted_energy(space, |u| Complex64::from_polar(1.0, u * t), 1.0, x, VacuumEnergy::NormalOrdered, "T00(t,x)")
}

/// `A = ∫ g(t)² :T₀₀:(t, x₀) dt`.
pub fn smeared_energy(
    space: &Arc<TruncatedFockSpace>,
    g: &SamplingFunction,
    x0: f64,
    vacuum: VacuumEnergy,
) -> Result<FieldOperatorMatrix> {
    let omega_max = space.basis().omega_max();
    if g.kind() == SamplerKind::Tabulated && g.dt() > 0.1 / omega_max {
        return Err(Error::Resolution(format!(
            "time step {} does not resolve ω_max = {omega_max} (need dt <= {})",
            g.dt(),
            0.1 / omega_max
        )));
    }
    let total = g.norm_sq().value;
    weighted_energy(space, |u| g.square_fourier(u), total, x0, vacuum, "smeared T00")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_space, ModeBasis, ZeroMode};

    fn space(nmodes: i64, mass: f64, cap: usize) -> Arc<TruncatedFockSpace> {
        let b = ModeBasis::new(7.0, mass, -nmodes, nmodes, ZeroMode::Exclude).unwrap();
        Arc::new(build_space(b, cap, 100_000).unwrap())
    }

    /// Naive oracle: dense ladder matrices on an explicit occupation basis.
    fn dense_ladder(sp: &TruncatedFockSpace, k: usize) -> DMatrix<Complex64> {
        let n = sp.dimension();
        let mut a = DMatrix::zeros(n, n);
        for s in 0..n {
            let mut v = sp.occupation_vector(s);
            if v[k] > 0 {
                let c = (v[k] as f64).sqrt();
                v[k] -= 1;
                let t = sp.index_of(&v).unwrap();
                a[(t, s)] = Complex64::new(c, 0.0);
            }
        }
        a
    }

    #[test]
    fn matrix_free_apply_matches_ladder_products() {
        let sp = space(2, 0.3, 3);
        let g = SamplingFunction::gaussian(1.3).unwrap();
        let op = smeared_energy(&sp, &g, 0.4, VacuumEnergy::NormalOrdered).unwrap();
        let nm = sp.modes();
        let n = sp.dimension();
        let ladders: Vec<_> = (0..nm).map(|k| dense_ladder(&sp, k)).collect();
        let mut oracle = DMatrix::<Complex64>::zeros(n, n);
        for j in 0..nm {
            for k in 0..nm {
                let mjk = op.number_conserving()[j * nm + k];
                let pjk = op.pair()[j * nm + k];
                oracle += ladders[j].adjoint() * &ladders[k] * mjk;
                let aa = &ladders[j] * &ladders[k];
                oracle += &aa * (0.5 * pjk);
                oracle += aa.adjoint() * (0.5 * pjk.conj());
            }
        }
        // compress: the dense product above is already the truncated action for
        // a_j a_k; a†a† terms leaving the space are dropped by construction.
        let dense = op.to_dense().unwrap();
        let diff = (&dense - &oracle).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13, "max deviation {diff}");
        let herm = (&dense - dense.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(herm < 1e-13);
        assert!(op.is_hermitian());
        assert!(op.vacuum_expectation().abs() < 1e-15);
    }

    #[test]
    fn one_particle_spatial_average() {
        let sp = space(3, 0.0, 2);
        let l = sp.basis().length();
        for mode in 0..sp.modes() {
            let mut occ = vec![0; sp.modes()];
            occ[mode] = 1;
            let s = sp.index_of(&occ).unwrap();
            let mut psi = vec![Complex64::new(0.0, 0.0); sp.dimension()];
            psi[s] = Complex64::new(1.0, 0.0);
            let op = energy_density_matrix(&sp, 0.0, 1.1).unwrap();
            let w = sp.basis().modes()[mode].omega;
            assert!((op.expectation(&psi) - w / l).abs() < 1e-14);
        }
    }

    #[test]
    fn unsubtracted_vacuum_is_a_shift() {
        let sp = space(2, 0.0, 2);
        let g = SamplingFunction::gaussian(1.0).unwrap();
        let op = smeared_energy(&sp, &g, 0.0, VacuumEnergy::Unsubtracted).unwrap();
        let expect = sp.basis().vacuum_energy_density() * g.norm_sq().value;
        assert!((op.vacuum_expectation() - expect).abs() < 1e-14);
    }

    #[test]
    fn coarse_table_is_rejected() {
        let sp = space(2, 0.0, 2);
        let vals: Vec<f64> = (0..41).map(|i| (-(0.5 * i as f64 - 10.0).powi(2) / 8.0).exp()).collect();
        let g = SamplingFunction::tabulated(-10.0, 0.5, vals).unwrap();
        assert!(matches!(smeared_energy(&sp, &g, 0.0, VacuumEnergy::NormalOrdered), Err(Error::Resolution(_))));
    }
}
