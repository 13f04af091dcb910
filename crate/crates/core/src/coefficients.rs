//! Distortion coefficients `s_kappa`, `sigma`, `tau`, their suprema, and the
//! smooth absolute value `F_a(x) = a^{-1} log(e^{ax} + e^{-ax})`.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::extreal::ExtReal;

const SERIES_CUTOFF: f64 = 1e-4;

/// Above this value of `sqrt(-kappa) * theta` the hyperbolic ratio is formed from exponentials.
const HYPERBOLIC_SWITCH: f64 = 20.0;

/// `omega_kappa = pi / sqrt(kappa)` for `kappa > 0`, infinite otherwise.
pub fn omega(kappa: f64) -> ExtReal {
    if kappa > 0.0 {
        ExtReal::Finite(PI / kappa.sqrt())
    } else {
        ExtReal::Infinite
    }
}

/// `sin(sqrt(k) th)/(sqrt(k) th)`, `1`, or `sinh(sqrt(-k) th)/(sqrt(-k) th)` by the sign of `kappa`.
pub fn s_kappa(kappa: f64, theta: f64) -> f64 {
    if kappa == 0.0 {
        return 1.0;
    }
    let x = kappa.abs().sqrt() * theta;
    let x2 = x * x;
    if x < SERIES_CUTOFF {
        let sign = if kappa > 0.0 { -1.0 } else { 1.0 };
        return 1.0 + sign * x2 / 6.0 + x2 * x2 / 120.0;
    }
    if kappa > 0.0 {
        x.sin() / x
    } else {
        x.sinh() / x
    }
}

/// `sinh(t x) / sinh(x)` without overflow, for `x > 0`.
fn sinh_ratio(t: f64, x: f64) -> f64 {
    if x <= HYPERBOLIC_SWITCH {
        (t * x).sinh() / x.sinh()
    } else {
        ((t - 1.0) * x).exp() * (-(-2.0 * t * x).exp_m1()) / (-(-2.0 * x).exp_m1())
    }
}

/// `sigma_kappa^{(t)}(theta)`; infinite on the closed branch `theta >= omega_kappa`.
pub fn sigma(kappa: f64, t: f64, theta: f64) -> ExtReal {
    debug_assert!((0.0..=1.0).contains(&t) && theta >= 0.0);
    if kappa == 0.0 {
        return ExtReal::Finite(t);
    }
    if kappa > 0.0 && theta >= PI / kappa.sqrt() {
        return ExtReal::Infinite;
    }
    if t == 0.0 {
        return ExtReal::ZERO;
    }
    let x = kappa.abs().sqrt() * theta;
    if kappa < 0.0 && x > HYPERBOLIC_SWITCH {
        return ExtReal::Finite(sinh_ratio(t, x));
    }
    ExtReal::Finite(t * s_kappa(kappa, t * theta) / s_kappa(kappa, theta))
}

/// `(sigma^{(t),0}, sigma^{(t),1}) = (sigma^{(1-t)}, sigma^{(t)})`.
pub fn sigma_pair(kappa: f64, t: f64, theta: f64) -> [ExtReal; 2] {
    [sigma(kappa, 1.0 - t, theta), sigma(kappa, t, theta)]
}

/// `tau_{K,N}^{(t)}(theta) = t^{1/N} sigma_{K/(N-1)}^{(t)}(theta)^{1-1/N}` for `N < 0`.
pub fn tau(k: f64, n: f64, t: f64, theta: f64) -> Result<ExtReal> {
    if !(n < 0.0) {
        return Err(Error::InvalidDimension(n));
    }
    let kappa = k / (n - 1.0);
    let s = sigma(kappa, t, theta);
    match s {
        ExtReal::Infinite => Ok(ExtReal::Infinite),
        ExtReal::Finite(_) if t == 0.0 => Ok(ExtReal::ZERO),
        ExtReal::Finite(v) => {
            // t * (s(t th)/s(th))^{1 - 1/N}, which avoids t^{1/N} blowing up for small t.
            let ratio = v / t;
            Ok(ExtReal::Finite(t * ratio.powf(1.0 - 1.0 / n)))
        }
    }
}

/// `(tau^{(t),0}, tau^{(t),1}) = (tau^{(1-t)}, tau^{(t)})`.
pub fn tau_pair(k: f64, n: f64, t: f64, theta: f64) -> Result<[ExtReal; 2]> {
    Ok([tau(k, n, 1.0 - t, theta)?, tau(k, n, t, theta)?])
}

/// Supremum of a continuous function over `[lo, hi]`: a 65-point scan refined by golden-section search.
pub fn sup_on_interval(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if !(hi > lo) {
        return f(lo);
    }
    const COARSE: usize = 64;
    let step = (hi - lo) / COARSE as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=COARSE {
        let x = if i == COARSE { hi } else { lo + i as f64 * step };
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut a = lo + best_i.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best_i + 1) as f64 * step).min(hi);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() <= 1e-14 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    best.max(fc).max(fd)
}

/// `sup_{theta in [0, theta_max]} tau_{K,N}^{(t)}(theta)`.
pub fn tau_sup(k: f64, n: f64, t: f64, theta_max: f64) -> Result<ExtReal> {
    if !(n < 0.0) {
        return Err(Error::InvalidDimension(n));
    }
    if tau(k, n, t, theta_max)?.is_infinite() {
        return Ok(ExtReal::Infinite);
    }
    let v = sup_on_interval(|th| tau(k, n, t, th).map(ExtReal::to_f64).unwrap_or(f64::NAN), 0.0, theta_max);
    Ok(ExtReal::Finite(v))
}

/// `sup_{theta in [lo, hi]} sigma_kappa^{(t)}(theta)`.
pub fn sigma_sup(kappa: f64, t: f64, lo: f64, hi: f64) -> ExtReal {
    if sigma(kappa, t, hi).is_infinite() {
        return ExtReal::Infinite;
    }
    ExtReal::Finite(sup_on_interval(|th| sigma(kappa, t, th).to_f64(), lo, hi))
}

/// `F_a(x) = a^{-1} log(e^{ax} + e^{-ax})`, evaluated as `|x| + a^{-1} log(1 + e^{-2a|x|})`.
pub fn f_softabs(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "softness parameter must be positive");
    let ax = x.abs();
    ax + (-2.0 * a * ax).exp().ln_1p() / a
}

/// Upper gap `a^{-1} log 2` between `F_a` and `|x|`.
pub fn f_softabs_gap(a: f64) -> f64 {
    LN_2 / a
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn s_kappa_values() {
        assert_eq!(s_kappa(0.0, 7.0), 1.0);
        for k in [-3.0, -1.0, 0.5, 2.0] {
            assert_eq!(s_kappa(k, 0.0), 1.0);
        }
        assert_relative_eq!(s_kappa(-1.0, 1.0), 1f64.sinh(), max_relative = 1e-15);
        assert_relative_eq!(s_kappa(-1.0, 1.0), 1.1752011936438014, max_relative = 1e-15);
    }

    #[test]
    fn series_branch_is_continuous() {
        for k in [-2.0f64, 2.0] {
            let th = SERIES_CUTOFF / k.abs().sqrt();
            let below = s_kappa(k, th * (1.0 - 1e-9));
            let above = s_kappa(k, th * (1.0 + 1e-9));
            assert!((below - above).abs() < 1e-14);
        }
    }

    #[test]
    fn sigma_identities() {
        for k in [-2.0, 0.0, 0.7] {
            assert_eq!(sigma(k, 1.0, 1.0), ExtReal::Finite(1.0));
            assert_relative_eq!(sigma(k, 0.3, 0.0).to_f64(), 0.3, max_relative = 1e-12);
            assert_eq!(sigma(k, 0.0, 1.0), ExtReal::ZERO);
        }
        assert_eq!(sigma(0.0, 0.4, 123.0), ExtReal::Finite(0.4));
    }

    #[test]
    fn sigma_hyperbolic_half() {
        for th in [0.1f64, 1.0, 5.0, 30.0, 100.0] {
            let expect = 1.0 / (2.0 * (th / 2.0).cosh());
            assert_relative_eq!(sigma(-1.0, 0.5, th).to_f64(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn sigma_closed_branch() {
        let k = 1.0;
        assert_eq!(sigma(k, 0.5, PI), ExtReal::Infinite);
        assert!(sigma(k, 0.5, PI * (1.0 - 1e-9)).is_finite());
    }

    #[test]
    fn tau_flat_and_invalid() {
        for t in [0.0, 0.2, 1.0] {
            assert_eq!(tau(0.0, -1.0, t, 3.0).unwrap(), ExtReal::Finite(t));
        }
        assert!(matches!(tau(1.0, 0.0, 0.5, 1.0), Err(Error::InvalidDimension(_))));
        assert!(matches!(tau(1.0, 2.0, 0.5, 1.0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn tau_half_closed_form() {
        // K = 1, N = -1, theta = 2: (1/2) cosh((theta/2) sqrt(K/(1-N)))^{1/N - 1}
        let (k, n, th) = (1.0f64, -1.0f64, 2.0f64);
        let closed = 0.5 * ((th / 2.0) * (k / (1.0 - n)).sqrt()).cosh().powf(1.0 / n - 1.0);
        let v = tau(k, n, 0.5, th).unwrap().to_f64();
        assert!((v - closed).abs() < 1e-12, "{v} vs {closed}");
    }

    #[test]
    fn tau_infinite_branch_for_negative_k() {
        let (k, n) = (-1.0f64, -1.0f64);
        let w = PI * ((n - 1.0) / k).sqrt();
        assert_eq!(tau(k, n, 0.3, w).unwrap(), ExtReal::Infinite);
        assert!(tau(k, n, 0.3, 0.99 * w).unwrap().is_finite());
    }

    #[test]
    fn tau_sup_cases() {
        for k in [0.5, 1.0, 4.0] {
            let s = tau_sup(k, -2.0, 0.3, 10.0).unwrap().to_f64();
            assert!(s <= 0.3 + 1e-15);
        }
        assert_eq!(tau_sup(0.0, -2.0, 0.3, 10.0).unwrap(), ExtReal::Finite(0.3));
        let w = PI * 2f64.sqrt();
        assert_eq!(tau_sup(-1.0, -1.0, 0.3, w).unwrap(), ExtReal::Infinite);
    }

    #[test]
    fn tau_sup_matches_dense_grid() {
        let (k, n, t) = (-1.0, -1.0, 0.3);
        let theta_max = 0.9 * PI * 2f64.sqrt();
        let samples = 100_000;
        let grid_max = (0..=samples)
            .map(|i| tau(k, n, t, theta_max * i as f64 / samples as f64).unwrap().to_f64())
            .fold(f64::NEG_INFINITY, f64::max);
        let s = tau_sup(k, n, t, theta_max).unwrap().to_f64();
        assert!(s.is_finite());
        assert_relative_eq!(s, grid_max, max_relative = 1e-6);
    }

    #[test]
    fn softabs_examples() {
        assert_relative_eq!(f_softabs(1.0, 0.0), LN_2, max_relative = 1e-15);
        assert!((f_softabs(64.0, 0.5) - 0.5).abs() < 1e-8);
        // no overflow far out
        assert_eq!(f_softabs(1e3, 1e3), 1e3);
    }

    #[test]
    fn softabs_preserves_convexity_inequality() {
        // f'' + beta f >= 0 and f >= 0 on the grid implies the same for F_a(f).
        let h = 1e-3;
        type Case = (fn(f64) -> f64, f64, f64, f64);
        let cases: [Case; 4] = [
            (|x| x.sin(), 1.0, 0.01, PI - 0.01),
            (|x| 2.0 * x + 1.0, 3.0, 0.0, 3.0),
            (|x| x.cosh(), 0.0, -2.0, 2.0),
            (|x| (2.0 * x).sin(), 4.0, 0.01, PI / 2.0 - 0.01),
        ];
        for a in [0.5, 1.0, 4.0, 16.0] {
            for (f, beta, lo, hi) in cases {
                let g = |x: f64| f_softabs(a, f(x));
                let steps = ((hi - lo) / h) as usize;
                for i in 1..steps {
                    let x = lo + i as f64 * h;
                    let d2 = (g(x + h) - 2.0 * g(x) + g(x - h)) / (h * h);
                    let r = d2 + beta * g(x);
                    assert!(r >= -1e-4 * (1.0 + g(x)), "a={a} x={x} r={r}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn softabs_bounds(a in 0.01f64..100.0, x in -50.0f64..50.0) {
            let v = f_softabs(a, x);
            prop_assert!(v >= x.abs());
            prop_assert!(v - x.abs() <= f_softabs_gap(a) * (1.0 + 1e-12));
            prop_assert!((f_softabs(a, -x) - v).abs() == 0.0);
        }

        #[test]
        fn sigma_decreasing_for_negative_kappa(kappa in -5.0f64..-0.01, t in 0.01f64..0.99, th in 0.0f64..20.0) {
            let a = sigma(kappa, t, th).to_f64();
            let b = sigma(kappa, t, th + 0.05).to_f64();
            prop_assert!(b < a);
        }

        #[test]
        fn sigma_vanishes_at_infinity(kappa in -5.0f64..-0.01, t in 0.01f64..0.99) {
            let x = 800.0 / ((1.0 - t) * (-kappa).sqrt());
            prop_assert!(sigma(kappa, t, x).to_f64() < 1e-100);
        }

        #[test]
        fn endpoint_identities(kappa in -4.0f64..4.0, k in -4.0f64..4.0, n in -10.0f64..-0.05, th in 0.0f64..1.5) {
            prop_assert_eq!(sigma(kappa, 0.0, th), ExtReal::ZERO);
            if let ExtReal::Finite(v) = sigma(kappa, 1.0, th) {
                prop_assert!((v - 1.0).abs() < 1e-15);
            }
            if let ExtReal::Finite(v) = tau(k, n, 1.0, th).unwrap() {
                prop_assert!((v - 1.0).abs() < 1e-14);
            }
        }

        #[test]
        fn pair_sums_to_one_at_zero(kappa in -4.0f64..4.0, t in 0.0f64..1.0, k in -4.0f64..4.0, n in -10.0f64..-0.05) {
            let [a, b] = sigma_pair(kappa, t, 0.0);
            prop_assert!((a.to_f64() + b.to_f64() - 1.0).abs() < 1e-12);
            let [c, d] = tau_pair(k, n, t, 0.0).unwrap();
            prop_assert!((c.to_f64() + d.to_f64() - 1.0).abs() < 1e-12);
        }
    }
}
