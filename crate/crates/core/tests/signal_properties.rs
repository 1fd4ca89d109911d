use mixsep_core::distributions::ks_distance;
use mixsep_core::shape_restricted::least_concave_majorant;
use mixsep_core::signal::{concavify, estimate_fs, lfdr, recover_signal};
use mixsep_core::sim::ScenarioConfig;
use mixsep_core::{rng, CriterionEvaluator, KnownCdf, PiecewiseLinearConcaveFn, SortedSample, StepCdf};
use proptest::prelude::*;

fn setting_ii(n: usize, alpha: f64, seed: u64) -> SortedSample {
    SortedSample::new(ScenarioConfig::SettingII { n, alpha }.generate(&mut rng::seeded(seed))).unwrap()
}

fn hull_at(c: &PiecewiseLinearConcaveFn, x: f64) -> f64 {
    if x >= c.last_knot() {
        c.values()[c.values().len() - 1]
    } else {
        c.value_at(x).unwrap()
    }
}

/// Sup distance on a fine grid of `[0, 1]` plus the given extra points.
fn sup_on_unit<F: Fn(f64) -> f64>(f: F, target: &KnownCdf, extra: &[f64]) -> f64 {
    (0..=10_000)
        .map(|i| i as f64 / 10_000.0)
        .chain(extra.iter().copied())
        .map(|x| (f(x) - target.cdf(x)).abs())
        .fold(0.0, f64::max)
}

fn step_sup(f: &StepCdf, target: &KnownCdf) -> f64 {
    // the step function attains its sup at a jump or just before one
    let mut sup: f64 = 0.0;
    let mut prev = 0.0;
    for (&x, &v) in f.locations().iter().zip(f.values()) {
        let t = target.cdf(x);
        sup = sup.max((v - t).abs()).max((prev - t).abs());
        prev = v;
    }
    sup.max(1.0 - prev)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn concave_majorant_is_closer_to_concave_truth() {
    let fs = KnownCdf::beta(1.0, 10.0).unwrap();
    let u = KnownCdf::standard_uniform();
    for seed in 0..30 {
        let s = setting_ii(2000, 0.2, 70 + seed);
        let step = estimate_fs(&s, &u, 0.2).unwrap();
        let hull = concavify(&step).unwrap();
        let dagger = sup_on_unit(|x| hull_at(&hull, x), &fs, hull.knots());
        let check = step_sup(&step, &fs);
        assert!(dagger <= check + 1e-12, "seed {seed}: {dagger} > {check}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hull_equals_brute_force_majorant(ys in prop::collection::vec(-3.0f64..3.0, 1..25), gaps in prop::collection::vec(0.01f64..2.0, 25)) {
        let mut xs = Vec::with_capacity(ys.len());
        let mut x = 0.0;
        for g in gaps.iter().take(ys.len()) {
            x += g;
            xs.push(x);
        }
        let hull = least_concave_majorant(&xs, &ys).unwrap();
        for i in 0..xs.len() {
            // smallest concave majorant at x_i: best chord over a point on each side
            let mut best = ys[i];
            for j in 0..=i {
                for k in i..xs.len() {
                    if j < k {
                        let t = (xs[i] - xs[j]) / (xs[k] - xs[j]);
                        best = best.max(ys[j] + t * (ys[k] - ys[j]));
                    }
                }
            }
            prop_assert!((hull.value_at(xs[i]).unwrap() - best).abs() < 1e-9);
        }
    }

    #[test]
    fn lfdr_is_a_probability_and_rises_under_uniform_background(n in 50usize..800, alpha in 0.05f64..0.9, seed in any::<u64>()) {
        let u = KnownCdf::standard_uniform();
        let s = setting_ii(n, alpha, seed);
        let est = recover_signal(&s, &u, alpha).unwrap();
        let points: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let curve = lfdr(&points, alpha, &est.density, &u).unwrap();
        prop_assert!(curve.values().iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(curve.values().windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn density_integral_telescopes(n in 20usize..500, alpha in 0.05f64..1.0, seed in any::<u64>()) {
        let s = setting_ii(n, alpha, seed);
        let est = recover_signal(&s, &KnownCdf::standard_uniform(), alpha).unwrap();
        let c = &est.fs_concave;
        let span = c.values()[c.values().len() - 1] - c.values()[0];
        prop_assert!((est.density.integral() - span).abs() < 1e-10);
        prop_assert!(est.density.values().windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn unit_proportion_reduces_to_empirical_cdf() {
    let fs = KnownCdf::beta(1.0, 10.0).unwrap();
    for seed in 0..10 {
        let x = fs.sample(400, seed);
        let s = SortedSample::new(x.clone()).unwrap();
        let step = estimate_fs(&s, &KnownCdf::standard_uniform(), 1.0).unwrap();
        assert!((step.sup_distance(&fs) - ks_distance(&x, &fs)).abs() < 1e-12);
    }
}

#[test]
fn plug_in_error_shrinks_with_sample_size() {
    let fs = KnownCdf::beta(1.0, 10.0).unwrap();
    let u = KnownCdf::standard_uniform();
    let medians: Vec<f64> = [2_000usize, 20_000]
        .iter()
        .map(|&n| {
            let errs = (0..20)
                .map(|seed| {
                    let s = setting_ii(n, 0.1, 5000 + seed);
                    let alpha = CriterionEvaluator::new(&s, &u).curve(200).unwrap().elbow().unwrap().estimate;
                    estimate_fs(&s, &u, alpha.max(0.005)).unwrap().sup_distance(&fs)
                })
                .collect();
            median(errs)
        })
        .collect();
    assert!(medians[1] < medians[0], "{medians:?}");
}

#[test]
fn density_near_truth_on_most_seeds() {
    let fs = KnownCdf::beta(1.0, 10.0).unwrap();
    let u = KnownCdf::standard_uniform();
    let seeds = 60;
    let mut close = [0usize; 2];
    for seed in 0..seeds {
        let est = recover_signal(&setting_ii(5000, 0.1, 8000 + seed), &u, 0.1).unwrap();
        for (slot, x) in [0.05, 0.1].into_iter().enumerate() {
            let truth = fs.density(x).unwrap();
            if (est.density.eval(x) - truth).abs() <= 0.2 * truth {
                close[slot] += 1;
            }
        }
    }
    assert!(close.iter().all(|&c| 2 * c > seeds as usize), "{close:?}");
}

#[test]
fn negative_support_is_rejected() {
    let x = KnownCdf::standard_normal().sample(200, 1);
    let s = SortedSample::new(x).unwrap();
    let step = estimate_fs(&s, &KnownCdf::standard_normal(), 0.5).unwrap();
    assert!(concavify(&step).is_err());
}
