use mmlab::cd::*;
use mmlab::concentration::Condition;
use mmlab::config::{CdBudget, ConvexityTolerance};
use mmlab::experiments::{cosh_family, random_smooth_measure};
use mmlab::transport::{Kind, WeightedOneDimSpace};
use mmlab::{Error, ExtReal, ProbWeights};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Quantile function of a piecewise-constant density with cell masses `p` on `[lo, lo + h m]`,
/// together with the density value at the quantile.
fn quantile(p: &[f64], lo: f64, h: f64, u: f64) -> (f64, usize) {
    let mut acc = 0.0;
    for (k, &m) in p.iter().enumerate() {
        if m > 0.0 && acc + m >= u {
            return (lo + h * (k as f64 + (u - acc) / m), k);
        }
        acc += m;
    }
    let k = p.iter().rposition(|m| *m > 0.0).unwrap();
    (lo + h * (k + 1) as f64, k)
}

/// Both sides of the inequality on a segment by a fine midpoint rule in the quantile variable.
fn cd_oracle(space: &WeightedOneDimSpace, p0: &[f64], p1: &[f64], k: f64, np: f64, t: f64, star: bool, samples: usize) -> (f64, f64) {
    let (lo, h) = (space.origin(), space.h());
    let mu = space.cell_masses();
    let coef = |s: f64, theta: f64| -> f64 {
        if star {
            mmlab::coefficients::sigma(k / np, s, theta).to_f64()
        } else {
            mmlab::coefficients::tau(k, np, s, theta).unwrap().to_f64()
        }
    };
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for j in 0..samples {
        let u = (j as f64 + 0.5) / samples as f64;
        let (x0, c0) = quantile(p0, lo, h, u);
        let (x1, c1) = quantile(p1, lo, h, u);
        let (d0, d1) = (p0[c0] / h, p1[c1] / h);
        let xt = (1.0 - t) * x0 + t * x1;
        let ct = (((xt - lo) / h) as usize).min(mu.len() - 1);
        let jac = (1.0 - t) / d0 + t / d1;
        let rho_t = 1.0 / (jac * mu[ct] / h);
        lhs += rho_t.powf(-1.0 / np);
        let theta = (x0 - x1).abs();
        let (r0, r1) = (p0[c0] / mu[c0], p1[c1] / mu[c1]);
        rhs += coef(1.0 - t, theta) * r0.powf(-1.0 / np) + coef(t, theta) * r1.powf(-1.0 / np);
    }
    (lhs / samples as f64, rhs / samples as f64)
}

fn smooth_pair(space: &WeightedOneDimSpace, seed: u64) -> (ProbWeights, ProbWeights) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_smooth_measure(space, &mut rng, 3, 1.0).unwrap();
    let b = random_smooth_measure(space, &mut rng, 3, 1.0).unwrap();
    (a, b)
}

fn grid9() -> Vec<f64> {
    (0..=8).map(|i| i as f64 / 8.0).collect()
}

#[test]
fn entropy_of_conditioned_reference() {
    let mu = ProbWeights::uniform(8);
    let nu = ProbWeights::new(vec![0.25, 0.25, 0.25, 0.25, 0.0, 0.0, 0.0, 0.0]).unwrap();
    for np in [-0.5, -1.0, -3.0] {
        let v = renyi_entropy(&mu, &nu, np).unwrap().to_f64();
        assert!((v - 0.5f64.powf(1.0 / np)).abs() < 1e-13);
    }
    assert!((renyi_entropy(&mu, &nu, -1.0).unwrap().to_f64() - 2.0).abs() < 1e-13);
}

proptest! {
    #[test]
    fn entropy_at_least_one(w in prop::collection::vec(0.0f64..1.0, 2..12), v in prop::collection::vec(0.01f64..1.0, 2..12), np in -5.0f64..-0.05) {
        let n = w.len().min(v.len());
        prop_assume!(w[..n].iter().sum::<f64>() > 0.0);
        let nu = ProbWeights::normalized(w[..n].to_vec()).unwrap();
        let mu = ProbWeights::normalized(v[..n].to_vec()).unwrap();
        let s = renyi_entropy(&mu, &nu, np).unwrap().to_f64();
        prop_assert!(s >= 1.0);
        let same = nu.as_slice().iter().zip(mu.as_slice()).all(|(a, b)| (a - b).abs() < 1e-12);
        prop_assert_eq!(s == 1.0, same || s - 1.0 < 1e-15);
        prop_assert_eq!(renyi_entropy(&mu, &mu, np).unwrap(), ExtReal::ONE);
    }
}

#[test]
fn both_sides_match_quantile_oracle() {
    let space = WeightedOneDimSpace::from_density(Kind::Segment, -1.0, 3.0, 48, |x| 1.0 + 0.5 * x.sin()).unwrap();
    let m = space.grid_size();
    let mut p0 = vec![0.0; m];
    let mut p1 = vec![0.0; m];
    for c in 2..20 {
        p0[c] = 1.0 + (c % 3) as f64;
    }
    for c in 25..45 {
        p1[c] = 2.0 + (c % 2) as f64;
    }
    let p0 = ProbWeights::normalized(p0).unwrap();
    let p1 = ProbWeights::normalized(p1).unwrap();
    for (k, star) in [(1.0, false), (1.0, true), (-0.5, false), (-0.5, true), (0.0, false)] {
        for np in [-1.0, -0.4] {
            for t in [0.25, 0.5, 0.8] {
                let variant = if star { Condition::CdStar } else { Condition::Cd };
                let rep = cd_check_1d(&space, &p0, &p1, k, -1.0, &[t], &[np], variant, &CdOptions::default()).unwrap();
                let (lo, ro) = cd_oracle(&space, p0.as_slice(), p1.as_slice(), k, np, t, star, 400_000);
                let cell = &rep.cells[0];
                // the midpoint rule is first order across the density jumps
                assert!((cell.lhs.to_f64() - lo).abs() < 1e-5 * lo, "lhs {} vs {lo}", cell.lhs.to_f64());
                assert!((cell.rhs.to_f64() - ro).abs() < 1e-5 * ro, "rhs {} vs {ro} at K={k} N'={np} t={t} star={star}", cell.rhs.to_f64());
            }
        }
    }
}

#[test]
fn flat_rhs_is_convex_combination() {
    let space = cosh_family(1.0, -1.0, 1.0, 3.0, 128).unwrap().space;
    for seed in 0..5 {
        let (p0, p1) = smooth_pair(&space, seed);
        for np in [-1.0, -0.5, -0.1] {
            let s0 = renyi_entropy_1d(&space, &p0, np).unwrap().to_f64();
            let s1 = renyi_entropy_1d(&space, &p1, np).unwrap().to_f64();
            for t in [0.0, 0.3, 0.5, 1.0] {
                let r = cd_rhs(&space, &p0, &p1, 0.0, np, t, Condition::Cd).unwrap().to_f64();
                let want = (1.0 - t) * s0 + t * s1;
                assert!((r - want).abs() <= 1e-10 * want.max(1.0), "{r} vs {want}");
                let r = cd_rhs(&space, &p0, &p1, 0.0, np, t, Condition::CdStar).unwrap().to_f64();
                assert!((r - want).abs() <= 1e-10 * want.max(1.0));
            }
        }
    }
}

#[test]
fn identical_reference_marginals_give_one() {
    let space = cosh_family(1.0, -1.0, 1.0, 3.0, 64).unwrap().space;
    let mu = space.reference();
    for t in [0.0, 0.4, 1.0] {
        let r = cd_rhs(&space, &mu, &mu, 2.5, -0.7, t, Condition::Cd).unwrap().to_f64();
        assert!((r - 1.0).abs() < 1e-12);
    }
}

#[test]
fn closed_branch_gives_infinite_rhs() {
    // K < 0: tau is infinite once theta >= pi sqrt((N' - 1)/K)
    let space = WeightedOneDimSpace::uniform(Kind::Segment, 10.0, 100).unwrap();
    let p0 = space.conditioned_on_interval(0.0, 1.0).unwrap();
    let p1 = space.conditioned_on_interval(9.0, 10.0).unwrap();
    let k = -1.0f64;
    let np = -1.0;
    assert!(std::f64::consts::PI * ((np - 1.0) / k).sqrt() < 8.0);
    assert_eq!(cd_rhs(&space, &p0, &p1, k, np, 0.5, Condition::Cd).unwrap(), ExtReal::Infinite);
    let near0 = space.conditioned_on_interval(0.0, 1.0).unwrap();
    let near1 = space.conditioned_on_interval(1.0, 2.0).unwrap();
    assert!(cd_rhs(&space, &near0, &near1, k, np, 0.5, Condition::Cd).unwrap().is_finite());
}

#[test]
fn endpoints_are_equalities() {
    let space = cosh_family(1.0, -1.0, 1.0, 3.0, 256).unwrap().space;
    for seed in 10..20 {
        let (p0, p1) = smooth_pair(&space, seed);
        for (k, variant) in [(1.0, Condition::Cd), (-2.0, Condition::Cd), (3.0, Condition::CdStar), (-1.0, Condition::CdStar)] {
            let r = cd_check_1d(&space, &p0, &p1, k, -1.0, &[0.0, 1.0], &[-1.0, -0.5, -0.1], variant, &CdOptions::default()).unwrap();
            for c in &r.cells {
                assert!(c.relative_margin >= -1e-9, "{c:?}");
                if c.rhs.is_finite() {
                    assert!(c.relative_margin <= 1e-9, "{c:?}");
                }
            }
        }
    }
}

#[test]
fn cosh_family_passes_both_conditions() {
    let space = cosh_family(1.0, -1.0, 1.0, 3.0, 256).unwrap().space;
    for seed in 100..110 {
        let (p0, p1) = smooth_pair(&space, seed);
        for variant in [Condition::Cd, Condition::CdStar] {
            let r = cd_check_1d(&space, &p0, &p1, 1.0, -1.0, &grid9(), &default_n_prime_grid(-1.0), variant, &CdOptions::default())
                .unwrap();
            assert!(r.pass, "{variant:?} seed {seed}: {} at t={} N'={}", r.min_margin, r.worst_t, r.worst_n_prime);
            assert_eq!(r.cells.len(), 9 * 4);
        }
    }
}

#[test]
fn calibrated_budget_is_covered_by_default() {
    let fitted = mmlab::experiments::calibrate_cd_budget((256, 512), 50, 1000, 10.0).unwrap();
    let def = CdBudget::default();
    for h in [6.0 / 256.0, 6.0 / 512.0, 6.0 / 2048.0] {
        assert!(fitted.tol(h) <= def.tol(h), "{fitted:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn reduced_condition_dominates_for_nonnegative_k(seed in 0u64..1000, k in 0.0f64..3.0, n in -3.0f64..-0.3) {
        let space = cosh_family(1.0, -1.0, 1.0, 3.0, 96).unwrap().space;
        let (p0, p1) = smooth_pair(&space, seed);
        let np = default_n_prime_grid(n);
        let opts = CdOptions::default();
        let cd = cd_check_1d(&space, &p0, &p1, k, n, &grid9(), &np, Condition::Cd, &opts).unwrap();
        let star = cd_check_1d(&space, &p0, &p1, k, n, &grid9(), &np, Condition::CdStar, &opts).unwrap();
        for (a, b) in cd.cells.iter().zip(&star.cells) {
            prop_assert!(b.relative_margin >= a.relative_margin - cd.tolerance);
        }
    }
}

#[test]
fn flat_circle_is_not_positively_curved() {
    let s = WeightedOneDimSpace::uniform(Kind::Circle, std::f64::consts::TAU, 256).unwrap();
    let p0 = s.conditioned_on_interval(0.0, 0.5).unwrap();
    let p1 = s.conditioned_on_interval(2.0, 2.5).unwrap();
    for variant in [Condition::Cd, Condition::CdStar] {
        let r = cd_check_1d(&s, &p0, &p1, 1.0, -1.0, &grid9(), &default_n_prime_grid(-1.0), variant, &CdOptions::default()).unwrap();
        assert!(!r.pass);
        assert!(r.worst_t > 0.0 && r.worst_t < 1.0);
        let flat = cd_check_1d(&s, &p0, &p1, 0.0, -1.0, &grid9(), &default_n_prime_grid(-1.0), variant, &CdOptions::default()).unwrap();
        assert!(flat.pass);
    }
}

#[test]
fn circle_arc_restriction_and_cut() {
    let s = WeightedOneDimSpace::uniform(Kind::Circle, 8.0, 64).unwrap();
    let mu = s.reference();
    let half = s.conditioned_on_interval(0.0, 5.0).unwrap();
    let r = cd_check_1d(&s, &mu, &half, 0.0, -1.0, &[0.5], &[-1.0], Condition::Cd, &CdOptions::default());
    assert!(matches!(r, Err(Error::DomainError(_))));
    let opts = CdOptions {
        cut: Some(0),
        ..CdOptions::default()
    };
    let r = cd_check_1d(&s, &mu, &half, 0.0, -1.0, &[0.5], &[-1.0], Condition::Cd, &opts).unwrap();
    assert!(r.pass);
    // a short arc straddling the chart origin is accepted without a cut
    let mut w = vec![0.0; 64];
    for c in [62, 63, 0, 1] {
        w[c] = 0.25;
    }
    let wrap = ProbWeights::new(w).unwrap();
    let near = s.conditioned_on_interval(1.0, 2.0).unwrap();
    assert!(cd_check_1d(&s, &wrap, &near, 0.0, -1.0, &[0.5], &[-1.0], Condition::Cd, &CdOptions::default()).is_ok());
}

#[test]
fn grid_validation() {
    let s = WeightedOneDimSpace::uniform(Kind::Segment, 1.0, 16).unwrap();
    let mu = s.reference();
    let o = CdOptions::default();
    assert!(matches!(cd_check_1d(&s, &mu, &mu, 0.0, -1.0, &[1.5], &[-1.0], Condition::Cd, &o), Err(Error::DomainError(_))));
    assert!(matches!(cd_check_1d(&s, &mu, &mu, 0.0, -1.0, &[0.5], &[-2.0], Condition::Cd, &o), Err(Error::DomainError(_))));
    assert!(matches!(cd_check_1d(&s, &mu, &mu, 0.0, 1.0, &[0.5], &[-1.0], Condition::Cd, &o), Err(Error::InvalidDimension(_))));
}

#[test]
fn report_json_spells_out_infinities() {
    let space = WeightedOneDimSpace::uniform(Kind::Segment, 10.0, 100).unwrap();
    let p0 = space.conditioned_on_interval(0.0, 1.0).unwrap();
    let p1 = space.conditioned_on_interval(9.0, 10.0).unwrap();
    let r = cd_check_1d(&space, &p0, &p1, -1.0, -1.0, &[0.5], &[-1.0], Condition::Cd, &CdOptions::default()).unwrap();
    let js = serde_json::to_string(&r).unwrap();
    assert!(js.contains("\"inf\""), "{js}");
    assert!(r.pass);
}

fn reflect(space: &WeightedOneDimSpace) -> WeightedOneDimSpace {
    let mut ld = space.log_density().to_vec();
    ld.reverse();
    WeightedOneDimSpace::new(space.kind(), space.total_length(), ld).unwrap().with_origin(space.origin())
}

#[test]
fn bm_reflection_and_relabeling() {
    let space = WeightedOneDimSpace::from_density(Kind::Segment, 0.0, 4.0, 400, |x| (0.3 * x).exp() * (1.0 + 0.2 * x.cos())).unwrap();
    let refl = reflect(&space);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    use rand::Rng;
    for _ in 0..30 {
        let mut iv = || {
            let a = rng.gen_range(0.0..3.5);
            Interval::new(a, a + rng.gen_range(0.05..0.5)).unwrap()
        };
        let (a0, a1) = (iv(), iv());
        let t = rng.gen_range(0.0..1.0);
        let k = rng.gen_range(-0.5..2.0);
        let m = bm_check(&space, a0, a1, t, k, -1.0, 0.0).unwrap().margin;
        let swapped = bm_check(&space, a1, a0, 1.0 - t, k, -1.0, 0.0).unwrap().margin;
        assert!((m - swapped).abs() <= 1e-12 * m.abs().max(1.0), "{m} vs {swapped}");
        let r = |i: Interval| Interval::new(4.0 - i.b, 4.0 - i.a).unwrap();
        let mirrored = bm_check(&refl, r(a0), r(a1), t, k, -1.0, 0.0).unwrap().margin;
        assert!((m - mirrored).abs() <= 1e-9 * m.abs().max(1.0), "{m} vs {mirrored}");
    }
}

#[test]
fn bm_on_certified_segment() {
    let space = cosh_family(1.0, -1.0, 1.0, 3.0, 512).unwrap().space;
    for (a0, a1) in [((-2.5, -1.0), (0.5, 2.0)), ((-1.0, -0.2), (0.1, 0.3)), ((-3.0, -2.9), (2.0, 3.0))] {
        let r = bm_check(
            &space,
            Interval::new(a0.0, a0.1).unwrap(),
            Interval::new(a1.0, a1.1).unwrap(),
            0.5,
            1.0,
            -1.0,
            1e-9,
        )
        .unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn bm_circle_unrolls_and_checks_diameter() {
    let s = WeightedOneDimSpace::uniform(Kind::Circle, 10.0, 100).unwrap();
    let a0 = Interval::new(9.0, 9.5).unwrap();
    let a1 = Interval::new(0.5, 1.0).unwrap();
    let r = bm_check(&s, a0, a1, 0.5, 0.0, -1.0, 1e-12).unwrap();
    // midpoint set is [9.75, 10.25], mass 0.05
    assert!((r.masses[2] - 0.05).abs() < 1e-12);
    assert!(r.pass);
    let far = Interval::new(4.0, 4.5).unwrap();
    assert!(bm_check(&s, a0, far, 0.5, 0.0, -1.0, 0.0).is_err());
}

#[test]
fn convexity_residuals_converge_quadratically() {
    // g = exp(-f/N) = 2 + sin x, exact relative residual (K/N) - sin x/(2 + sin x)
    let (k, n) = (-0.2, -1.0);
    let err = |h: f64| {
        let m = (4.0 / h).round() as usize;
        let h = 4.0 / m as f64;
        let xs: Vec<f64> = (0..=m).map(|i| i as f64 * h).collect();
        let f: Vec<f64> = xs.iter().map(|x| -n * (2.0 + x.sin()).ln()).collect();
        let r = kn_convexity_check(&f, k, n, h, false, &ConvexityTolerance::default()).unwrap();
        let i = r.argmin;
        let exact = k / n - xs[i].sin() / (2.0 + xs[i].sin());
        (r.min_relative_residual - exact).abs()
    };
    for h in [1e-2, 2e-3] {
        let ratio = err(h) / err(h / 2.0);
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn sinh_exponent_is_convex_on_truncations() {
    let a = (0.25f64 + 0.5).sqrt();
    let h = 1e-3;
    let xs: Vec<f64> = (0..=10_000).map(|i| -5.0 + i as f64 * h).collect();
    let f: Vec<f64> = xs.iter().map(|x| 2.0 * a * x.sinh()).collect();
    let r = kn_convexity_check(&f, 1.0, -2.0, h, false, &ConvexityTolerance::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.residuals.len(), xs.len() - 2);
    assert_eq!(r.offset, 1);
}

#[test]
fn lemma_suite_passes_and_is_reproducible() {
    let cfg = LemmaSuiteConfig {
        trials: 300,
        seed: 11,
        ..LemmaSuiteConfig::default()
    };
    let r = entropy_lemma_suite(None, &cfg).unwrap();
    assert!(r.all_pass(), "{:?}", r.failures.first());
    assert!(r.tallies.iter().all(|t| t.trials == 300 && t.passed == 300));
    let again = entropy_lemma_suite(None, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&r).unwrap(), serde_json::to_string(&again).unwrap());
}

#[test]
fn lemma_equality_cases() {
    use mmlab::space::{condition_measure, pushforward};
    let mu = ProbWeights::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
    let nu = ProbWeights::new(vec![0.4, 0.0, 0.5, 0.1]).unwrap();
    let np = -1.5;
    let s = renyi_entropy(&mu, &nu, np).unwrap().to_f64();
    let id: Vec<usize> = (0..4).collect();
    let pushed = renyi_entropy(&pushforward(&mu, &id, 4).unwrap(), &pushforward(&nu, &id, 4).unwrap(), np).unwrap().to_f64();
    assert!((pushed - s).abs() < 1e-14);
    let supp = nu.support();
    let cond = renyi_entropy(&mu, &condition_measure(&nu, &supp).unwrap(), np).unwrap().to_f64();
    assert!((cond - s).abs() < 1e-14);
}

#[test]
fn lemma_suite_on_given_space() {
    let space = mmlab::FiniteMmSpace::on_line(vec![0.0, 1.0, 3.0, 3.5], ProbWeights::uniform(4)).unwrap();
    let cfg = LemmaSuiteConfig {
        trials: 100,
        ..LemmaSuiteConfig::default()
    };
    assert!(entropy_lemma_suite(Some(&space), &cfg).unwrap().all_pass());
}

#[test]
fn volume_growth_examples() {
    let radii = [1.0, 2.0, 4.0, 8.0, 16.0];
    let g = volume_growth_probe(|x| -x * x, 1.0, 0.0, &radii, DEFAULT_GROWTH_FACTOR).unwrap();
    assert!(!g.divergent);
    let exact = (std::f64::consts::PI / 2.0).sqrt().ln();
    assert!((g.log_values[4] - exact).abs() < 1e-9);
    let poly = volume_growth_probe(|x| 6.0 * (1.0 + x * x).ln(), 50.0, 0.0, &radii, DEFAULT_GROWTH_FACTOR).unwrap();
    assert!(!poly.divergent);
    let a = 0.75f64.sqrt();
    for c in [0.1, 1.0, 10.0] {
        let s = volume_growth_probe(|x| -2.0 * a * x.sinh(), c, 0.0, &radii, DEFAULT_GROWTH_FACTOR).unwrap();
        assert!(s.divergent);
        // dominated by the left endpoint, where the exponent is 2a sinh R - C R^2
        assert!(s.log_values[4] > 2.0 * a * 16f64.sinh() - c * 256.0 - 30.0);
    }
    assert!(volume_growth_probe(|x| x, 1.0, 0.0, &[2.0, 1.0], 1.5).is_err());
}
