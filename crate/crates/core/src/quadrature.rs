//! Quadrature rules on uniform grids and adaptive Gauss–Kronrod for smooth
//! closed-form integrands.

/// Result of a quadrature together with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

/// Composite Simpson weights for `n` uniformly spaced samples with spacing `h`.
///
/// An even sample count closes with the Simpson 3/8 rule over the last four
/// points, so any `n >= 4` is accurate to fourth order. `n = 2` and `n = 3`
/// fall back to the trapezoid and plain Simpson rules.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![0.0; n];
    match n {
        0 => {}
        1 => w[0] = 0.0,
        2 => {
            w[0] = h / 2.0;
            w[1] = h / 2.0;
        }
        _ => {
            let simpson_end = if n % 2 == 1 { n - 1 } else { n - 4 };
            // 1-4-2-4-...-4-1 over [0, simpson_end]
            for i in (0..simpson_end).step_by(2) {
                w[i] += h / 3.0;
                w[i + 1] += 4.0 * h / 3.0;
                w[i + 2] += h / 3.0;
            }
            if n % 2 == 0 {
                let s = n - 4;
                w[s] += 3.0 * h / 8.0;
                w[s + 1] += 9.0 * h / 8.0;
                w[s + 2] += 9.0 * h / 8.0;
                w[s + 3] += 3.0 * h / 8.0;
            }
        }
    }
    w
}

/// Composite Simpson integral of uniformly spaced samples.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Simpson integral with a Richardson-style error estimate obtained by
/// comparing against the same rule on every other sample.
pub fn simpson_with_error(values: &[f64], h: f64) -> Integral {
    let value = simpson(values, h);
    let error = if values.len() >= 9 {
        let coarse: Vec<f64> = values.iter().step_by(2).copied().collect();
        // The coarse grid may stop one sample short of the fine grid.
        let covered = (coarse.len() - 1) * 2 + 1;
        let fine_part = simpson(&values[..covered], h);
        ((fine_part - simpson(&coarse, 2.0 * h)) / 15.0).abs()
    } else {
        0.0
    };
    Integral { value, error }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Integral {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Integral {
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-15,
            rel: 1e-12,
            max_intervals: 4000,
        }
    }
}

/// Globally adaptive Gauss–Kronrod (7/15) integration over a finite interval.
///
/// The interval with the largest error estimate is bisected until the total
/// estimate drops below `max(abs, rel * |I|)`. Partial sums are accumulated
/// left to right so the result does not depend on bisection history.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0 };
    }
    let mut pieces: Vec<(f64, f64, Integral)> = vec![(a, b, gauss_kronrod_15(&f, a, b))];
    loop {
        let total: f64 = pieces.iter().map(|p| p.2.value).sum();
        let err: f64 = pieces.iter().map(|p| p.2.error).sum();
        if err <= tol.abs.max(tol.rel * total.abs()) || pieces.len() >= tol.max_intervals {
            break;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.2.error > acc.1 { (i, p.2.error) } else { acc });
        let (lo, hi, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            pieces.push((lo, hi, gauss_kronrod_15(&f, lo, hi)));
            break;
        }
        pieces.push((lo, mid, gauss_kronrod_15(&f, lo, mid)));
        pieces.push((mid, hi, gauss_kronrod_15(&f, mid, hi)));
    }
    pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
    pieces.iter().fold(Integral { value: 0.0, error: 0.0 }, |acc, p| Integral {
        value: acc.value + p.2.value,
        error: acc.error + p.2.error,
    })
}

/// Integral over `[a, ∞)` via the map `u = a + scale * s / (1 - s)`.
///
/// `scale` should be of the order of the integrand's decay length.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64, tol: Tolerance) -> Integral {
    let g = |s: f64| {
        let one_minus = 1.0 - s;
        let u = a + scale * s / one_minus;
        let jac = scale / (one_minus * one_minus);
        let v = f(u) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(g, 0.0, 1.0, tol)
}

/// Integral of `f` over `[a, b]` split at the supplied interior breakpoints.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: Tolerance) -> Integral {
    breaks.windows(2).fold(Integral { value: 0.0, error: 0.0 }, |acc, w| {
        let part = integrate(&f, w[0], w[1], tol);
        Integral {
            value: acc.value + part.value,
            error: acc.error + part.error,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn simpson_is_exact_for_cubics() {
        for n in [3usize, 4, 5, 8, 11] {
            let h = 2.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| {
                let x = -1.0 + i as f64 * h;
                x * x * x + 2.0 * x * x + 1.0
            }).collect();
            let exact = 4.0 / 3.0 + 2.0;
            assert!((simpson(&v, h) - exact).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn gauss_kronrod_handles_log_singularity() {
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, Tolerance::default());
        assert!((r.value + 1.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn semi_infinite_gaussian() {
        let r = integrate_to_infinity(|u| (-u * u).exp(), 0.0, 1.0, Tolerance::default());
        assert!((r.value - PI.sqrt() / 2.0).abs() < 1e-13);
    }
}
