//! Modified Bessel function K₀ for the Lorentzian-square-root sampler.

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Modified Bessel function of the second kind, order zero, for `x > 0`.
///
/// Power series below `x = 2`, Steed's continued fraction above.
pub fn bessel_k0(x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x.is_infinite() {
        return 0.0;
    }
    if x <= 2.0 {
        k0_series(x)
    } else {
        k0_scaled_cf(x) * (-x).exp()
    }
}

/// `exp(x) K₀(x)`; finite for large arguments where `K₀` underflows.
pub fn bessel_k0_scaled(x: f64) -> f64 {
    if x <= 2.0 {
        bessel_k0(x) * x.exp()
    } else {
        k0_scaled_cf(x)
    }
}

// K0(x) = -(ln(x/2) + γ) I0(x) + Σ_{k≥1} H_k (x²/4)^k / (k!)²
fn k0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut i0 = 1.0;
    let mut tail = 0.0;
    let mut harmonic = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail += harmonic * term;
        if term < 1e-18 * i0 {
            break;
        }
    }
    -((0.5 * x).ln() + EULER_GAMMA) * i0 + tail
}

fn k0_scaled_cf(x: f64) -> f64 {
    const EPS: f64 = 1e-17;
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000 {
        let fi = i as f64;
        a -= 2.0 * (fi - 1.0);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            break;
        }
    }
    (PI / (2.0 * x)).sqrt() / s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_to_infinity, Tolerance};

    #[test]
    fn reference_values() {
        // Abramowitz & Stegun table 9.8
        let cases = [
            (0.1, 2.427_069_024_702_016_6),
            (1.0, 0.421_024_438_240_708_3),
            (2.0, 0.113_893_872_749_533_4),
            (5.0, 3.691_098_334_042_594_3e-3),
        ];
        for (x, k) in cases {
            assert!((bessel_k0(x) - k).abs() < 1e-14 * k, "x = {x}: {}", bessel_k0(x));
        }
    }

    #[test]
    fn matches_integral_representation() {
        // K0(x) = ∫₀^∞ exp(-x cosh s) ds
        for x in [0.05, 0.7, 1.9, 2.1, 3.3, 10.0, 40.0] {
            let r = integrate_to_infinity(|s: f64| (-x * (s.cosh() - 1.0)).exp(), 0.0, 1.0, Tolerance::default());
            let scaled = r.value;
            assert!((bessel_k0_scaled(x) - scaled).abs() < 1e-12 * scaled, "x = {x}");
        }
    }
}
