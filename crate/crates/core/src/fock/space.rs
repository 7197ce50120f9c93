use std::collections::HashMap;

use super::ModeBasis;
use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION_CAP: usize = 200_000;

/// One occupied mode of a basis state: `n_mode(s) = count`, and `minus` is
/// the index of the state with one quantum removed from that mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Occupation {
    pub mode: u16,
    pub count: u16,
    pub minus: u32,
}

/// Occupation-number basis with total occupation `≤ N_max`.
///
/// States are ordered by total occupation, then lexicographically by their
/// non-decreasing list of occupied mode indices. Index 0 is the vacuum.
#[derive(Debug, Clone)]
pub struct TruncatedFockSpace {
    basis: ModeBasis,
    n_max: usize,
    dim: usize,
    /// `sector_start[N]` is the first index with total occupation `N`.
    sector_start: Vec<usize>,
    occ_offsets: Vec<u32>,
    occ: Vec<Occupation>,
    /// For states with `|t| < N_max`: index of `t + e_k`, row-major `[t][k]`.
    add: Vec<u32>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > usize::MAX as u128 {
            return None;
        }
    }
    Some(r as usize)
}

/// Number of occupation vectors over `modes` modes with total `≤ n_max`.
pub(crate) fn dimension_of(modes: usize, n_max: usize) -> Option<usize> {
    binomial(modes + n_max, n_max)
}

pub fn build_space(basis: ModeBasis, n_max: usize, dimension_cap: usize) -> Result<TruncatedFockSpace> {
    TruncatedFockSpace::new(basis, n_max, dimension_cap)
}

impl TruncatedFockSpace {
    pub fn new(basis: ModeBasis, n_max: usize, dimension_cap: usize) -> Result<Self> {
        let nm = basis.len();
        if nm == 0 {
            return Err(Error::InvalidParameter("at least one mode is required".into()));
        }
        if n_max < 2 {
            return Err(Error::InvalidParameter(format!("N_max must be at least 2, got {n_max}")));
        }
        let dim = dimension_of(nm, n_max).unwrap_or(usize::MAX);
        if dim > dimension_cap || dim > u32::MAX as usize {
            return Err(Error::DimensionCap { dimension: dim, cap: dimension_cap });
        }

        let mut tuples: Vec<Vec<u16>> = Vec::with_capacity(dim);
        let mut sector_start = Vec::with_capacity(n_max + 2);
        for total in 0..=n_max {
            sector_start.push(tuples.len());
            let mut cur = vec![0u16; total];
            enumerate(&mut cur, 0, 0, nm as u16, &mut tuples);
        }
        sector_start.push(tuples.len());
        debug_assert_eq!(tuples.len(), dim);

        let index: HashMap<&[u16], u32> = tuples.iter().enumerate().map(|(i, t)| (t.as_slice(), i as u32)).collect();

        let mut occ_offsets = Vec::with_capacity(dim + 1);
        let mut occ = Vec::new();
        let mut scratch = Vec::with_capacity(n_max);
        for t in &tuples {
            occ_offsets.push(occ.len() as u32);
            let mut i = 0;
            while i < t.len() {
                let mode = t[i];
                let mut j = i;
                while j < t.len() && t[j] == mode {
                    j += 1;
                }
                scratch.clear();
                scratch.extend_from_slice(&t[..i]);
                scratch.extend_from_slice(&t[i + 1..]);
                occ.push(Occupation { mode, count: (j - i) as u16, minus: index[scratch.as_slice()] });
                i = j;
            }
        }
        occ_offsets.push(occ.len() as u32);

        let n_low = sector_start[n_max];
        let mut add = Vec::with_capacity(n_low * nm);
        for t in &tuples[..n_low] {
            for k in 0..nm as u16 {
                scratch.clear();
                scratch.extend_from_slice(t);
                let pos = scratch.partition_point(|&m| m <= k);
                scratch.insert(pos, k);
                add.push(index[scratch.as_slice()]);
            }
        }
        drop(index);

        Ok(Self { basis, n_max, dim, sector_start, occ_offsets, occ, add })
    }

    pub fn basis(&self) -> &ModeBasis {
        &self.basis
    }

    pub fn occupation_cap(&self) -> usize {
        self.n_max
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.basis.len()
    }

    /// Number of states with total occupation `< N`.
    pub fn states_below(&self, total: usize) -> usize {
        self.sector_start[total.min(self.n_max + 1)]
    }

    pub fn vacuum_index(&self) -> usize {
        0
    }

    pub fn occupations(&self, s: usize) -> &[Occupation] {
        &self.occ[self.occ_offsets[s] as usize..self.occ_offsets[s + 1] as usize]
    }

    /// Occupation of `mode` in state `s`.
    pub fn count(&self, s: usize, mode: usize) -> usize {
        self.occupations(s).iter().find(|o| o.mode as usize == mode).map_or(0, |o| o.count as usize)
    }

    pub fn total_occupation(&self, s: usize) -> usize {
        self.occupations(s).iter().map(|o| o.count as usize).sum()
    }

    /// Index of `s + e_k`; requires `|s| < N_max`.
    pub fn raise(&self, s: usize, k: usize) -> Option<usize> {
        if s < self.sector_start[self.n_max] {
            Some(self.add[s * self.modes() + k] as usize)
        } else {
            None
        }
    }

    pub(crate) fn add_table(&self) -> &[u32] {
        &self.add
    }

    /// Dense occupation vector `(n_0, …, n_{M-1})` of state `s`.
    pub fn occupation_vector(&self, s: usize) -> Vec<usize> {
        let mut v = vec![0; self.modes()];
        for o in self.occupations(s) {
            v[o.mode as usize] = o.count as usize;
        }
        v
    }

    /// Index of a state given its occupation vector.
    pub fn index_of(&self, occupation: &[usize]) -> Option<usize> {
        if occupation.len() != self.modes() {
            return None;
        }
        let mut s = 0;
        for (k, &n) in occupation.iter().enumerate() {
            for _ in 0..n {
                s = self.raise(s, k)?;
            }
        }
        Some(s)
    }
}

fn enumerate(cur: &mut Vec<u16>, pos: usize, min: u16, modes: u16, out: &mut Vec<Vec<u16>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for m in min..modes {
        cur[pos] = m;
        enumerate(cur, pos + 1, m, modes, out);
    }
}
