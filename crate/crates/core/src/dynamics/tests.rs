use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;

use super::*;
use crate::lattice::RotationContext;
use crate::real::parse_real;
use crate::region::{construct, initial_basis};

const GOLDEN: &str = "0.618033988749894848204586834365638117720309179805762862135448622705260462818902449707207204";
const SQRT2_M1: &str = "0.414213562373095048801688724209698078569671875376948073176679737990732478462107038850387534";
const SQRT3_M1: &str = "0.732050807568877293527446341505872366942805253810380628055806979451933016908800037081146187";

fn golden() -> RotationContext {
    RotationContext::from_decimal(&[GOLDEN], 256).unwrap()
}

fn plane() -> RotationContext {
    RotationContext::from_decimal(&[SQRT2_M1, SQRT3_M1], 256).unwrap()
}

fn origin(s: usize) -> Vec<Float> {
    vec![Float::new(256); s]
}

fn close(x: &Float, expected: &str) -> bool {
    let y = parse_real(expected, 256).unwrap();
    Float::with_val(256, x - &y).abs() < 1e-70
}

#[test]
fn full_torus_has_no_remainder() {
    let geom = initial_basis(&plane()).geometry().unwrap();
    let x0 = vec![Float::with_val(256, 0.3), Float::with_val(256, 0.9)];
    let trace = remainder_trace(&geom, &x0, 1000, 10).unwrap();
    assert_eq!(trace.visits, 1000);
    assert!(trace.samples.iter().all(|s| s.remainder.is_zero()));
    assert!(trace.max_abs.is_zero());
}

#[test]
fn golden_remainders() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let trace = remainder_trace(&geom, &origin(1), 3, 1).unwrap();
    let r: Vec<&Float> = trace.samples.iter().map(|s| &s.remainder).collect();
    assert!(close(r[0], GOLDEN));
    assert!(close(
        r[1],
        "0.236067977499789696409173668731276235440618359611525724270897245410520925637804899414414408"
    ));
    assert!(close(
        r[2],
        "0.854101966249684544613760503096914353160927539417288586406345868115781388456707349121621613"
    ));
    // the largest value so far is the one at N = 3
    assert_eq!(trace.max_abs, *r[2]);
}

#[test]
fn consecutive_remainders_step_by_volume() {
    let geom = construct(&plane(), &[1, 2, 1, 2]).unwrap().geometry().unwrap();
    let trace = remainder_trace(&geom, &origin(2), 2000, 1).unwrap();
    let vol = geom.volume();
    for w in trace.samples.windows(2) {
        let d = Float::with_val(256, &w[1].remainder - &w[0].remainder);
        let down = Float::with_val(256, &d + vol);
        let up = Float::with_val(256, &down - 1u32);
        assert!(down.abs() < 1e-70 || up.abs() < 1e-70);
    }
}

#[test]
fn half_interval_remainder_grows() {
    let ctx = golden();
    let geom =
        RegionGeometry::from_parallelotope(&ctx, vec![vec![Float::with_val(256, 0.5)]], ctx.alpha().to_vec()).unwrap();
    let trace = remainder_trace(&geom, &origin(1), 10_000, 1000).unwrap();
    assert_eq!(*trace.max_abs_upto(10_000).unwrap(), 2.0);
    assert_eq!(trace.max_abs, 2.0);
}

#[test]
fn precision_budget_is_enforced() {
    let ctx = RotationContext::from_decimal(&[GOLDEN], 64).unwrap();
    let geom = initial_basis(&ctx).geometry().unwrap();
    assert!(matches!(
        remainder_trace(&geom, &[Float::new(64)], 10, 1),
        Err(Error::PrecisionBudget { .. })
    ));
}

#[test]
fn golden_returns() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let naive = naive_returns(&geom, &origin(1), 5, 1000).unwrap();
    assert_eq!(naive.times(), vec![2, 5, 7, 10, 13]);
    let renorm = renormalized_returns(&geom, 5).unwrap();
    assert_eq!(renorm.times(), vec![2, 5, 7, 10, 13]);
    assert_eq!(renorm.method, ReturnMethod::Renormalized);
    for (a, b) in naive.entries.iter().zip(&renorm.entries) {
        assert!(Float::with_val(256, &a.u[0] - &b.u[0]).abs() < 1e-70);
    }
}

#[test]
fn full_torus_returns_every_step() {
    let geom = initial_basis(&plane()).geometry().unwrap();
    assert_eq!(
        naive_returns(&geom, &origin(2), 6, 10).unwrap().times(),
        vec![1, 2, 3, 4, 5, 6]
    );
    assert_eq!(renormalized_returns(&geom, 6).unwrap().times(), vec![1, 2, 3, 4, 5, 6]);
}

#[test]
fn plane_returns_agree() {
    let geom = construct(&plane(), &[1]).unwrap().geometry().unwrap();
    let naive = naive_returns(&geom, &origin(2), 1000, 1 << 20).unwrap();
    let renorm = renormalized_returns(&geom, 1000).unwrap();
    assert_eq!(naive.times(), renorm.times());
}

#[test]
fn naive_returns_need_a_start_in_the_region() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let x0 = vec![Float::with_val(256, 0.5)];
    assert!(matches!(naive_returns(&geom, &x0, 3, 100), Err(Error::Precondition(_))));
}

#[test]
fn non_returning_scan_reports_cap() {
    let geom = construct(&golden(), &[1, 1, 1, 1]).unwrap().geometry().unwrap();
    assert!(matches!(
        naive_returns(&geom, &origin(1), 1, 3),
        Err(Error::NonReturning { from: 0, cap: 3 })
    ));
}

#[test]
fn trace_counts_match_return_times() {
    let geom = construct(&plane(), &[1, 2]).unwrap().geometry().unwrap();
    let times = renormalized_returns(&geom, 400).unwrap().times();
    let n_max = *times.last().unwrap() as u64;
    let trace = remainder_trace(&geom, &origin(2), n_max, 7).unwrap();
    for sample in &trace.samples {
        // the start plus every return before N
        let count = 1 + times.iter().filter(|&&t| (t as u64) < sample.n).count();
        let mut expected = Float::with_val(256, geom.volume() * sample.n);
        expected = Float::with_val(256, count) - expected;
        assert!(Float::with_val(256, &expected - &sample.remainder).abs() < 1e-70);
    }
}

#[test]
fn hyperplanes_of_the_golden_region() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let pts = hyperplane_points(&geom, 0, 1).unwrap();
    assert!(pts[0].is_zero());
    assert_eq!(pts[1].n(), 2);

    let pts = hyperplane_points(&geom, -100, 100).unwrap();
    assert_eq!(pts.len(), 201);
    assert!(pts.windows(2).all(|w| w[0].n() < w[1].n()));
    let times = renormalized_returns(&geom, 100).unwrap().times();
    let ns: Vec<i64> = pts[101..].iter().map(|p| p.n()).collect();
    assert_eq!(ns, times);
}

#[test]
fn hyperplanes_of_the_plane_region() {
    let geom = construct(&plane(), &[1, 2, 1]).unwrap().geometry().unwrap();
    let pts = hyperplane_points(&geom, -60, 60).unwrap();
    assert_eq!(pts.len(), 121);
    assert!(pts.windows(2).all(|w| w[0].n() < w[1].n()));
}

#[test]
fn orbit_points_are_two_sided() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let all = orbit_lattice_points(&geom, -5, 5).unwrap();
    assert_eq!(orbit_lattice_points(&geom, -5, -1).unwrap(), all[..5]);
    assert_eq!(orbit_lattice_points(&geom, 2, 5).unwrap(), all[7..]);
    let ns: Vec<i64> = all.iter().map(|p| p.n()).collect();
    assert_eq!(ns, vec![-14, -11, -8, -6, -3, 0, 2, 5, 7, 10, 13]);
}

#[test]
fn rauzy_holds_for_special_regions() {
    let geom = construct(&golden(), &[1]).unwrap().geometry().unwrap();
    let report = verify_rauzy(&geom, 1000, 5).unwrap();
    assert!(report.passed(), "{report:?}");
    assert!(*report.results[1].max_residual.as_ref().unwrap() < geom.context().tolerance());
    assert!(report.results[0].max_residual.is_none());

    let torus = initial_basis(&plane()).geometry().unwrap();
    assert!(verify_rauzy(&torus, 200, 1).unwrap().passed());
}

#[test]
fn rauzy_is_deterministic() {
    let geom = construct(&plane(), &[1, 2]).unwrap().geometry().unwrap();
    assert_eq!(
        verify_rauzy(&geom, 100, 9).unwrap(),
        verify_rauzy(&geom, 100, 9).unwrap()
    );
}

#[test]
fn rauzy_rejects_the_control_interval() {
    let ctx = golden();
    let geom =
        RegionGeometry::from_parallelotope(&ctx, vec![vec![Float::with_val(256, 0.5)]], ctx.alpha().to_vec()).unwrap();
    let report = verify_rauzy(&geom, 100, 3).unwrap();
    assert!(report.results[0].pass);
    assert!(!report.results[1].pass);
    assert!(report.results[1].witness.is_some());
    assert!(matches!(report.into_result(), Err(Error::VerificationFailure(_))));
}

#[test]
fn renormalized_needs_a_basis() {
    let ctx = golden();
    let geom =
        RegionGeometry::from_parallelotope(&ctx, vec![vec![Float::with_val(256, 0.5)]], ctx.alpha().to_vec()).unwrap();
    assert!(matches!(renormalized_returns(&geom, 3), Err(Error::Precondition(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn naive_and_renormalized_agree(seed in 0u64..10_000, s in 1usize..=3, len in 0usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let alpha: Vec<String> = (0..s)
            .map(|_| format!("0.{}", (0..45).map(|_| char::from(b'0' + rng.gen_range(0..10u8))).collect::<String>()))
            .collect();
        let ctx = RotationContext::from_decimal(&alpha, 256).unwrap();
        let steps: Vec<usize> = (0..len).map(|_| rng.gen_range(1..=s)).collect();
        let geom = construct(&ctx, &steps).unwrap().geometry().unwrap();
        let naive = naive_returns(&geom, &origin(s), 200, 1 << 24).unwrap();
        let renorm = renormalized_returns(&geom, 200).unwrap();
        prop_assert_eq!(naive.times(), renorm.times());
        prop_assert!(renorm.times().windows(2).all(|w| w[0] < w[1]));
    }
}
