use proptest::prelude::*;
use sublab_core::{
    capacity_bracket, choquet, conjugate_expect_step, expect_step, DistributionFamily, StepDistribution,
    TestFunction,
};

fn member() -> impl Strategy<Value = StepDistribution> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..=4)
        .prop_map(|atoms| StepDistribution::normalized(atoms).unwrap())
}

fn family() -> impl Strategy<Value = DistributionFamily> {
    prop::collection::vec(member(), 1..=4).prop_map(|m| DistributionFamily::new(m).unwrap())
}

fn function() -> impl Strategy<Value = TestFunction> {
    prop::collection::btree_map(-300i32..300, -2.0f64..2.0, 1..=6).prop_map(|pts| {
        let (bp, vals): (Vec<f64>, Vec<f64>) = pts.into_iter().map(|(k, v)| (k as f64 / 100.0, v)).unzip();
        TestFunction::new(bp, vals).unwrap()
    })
}

fn tol(vals: &[f64]) -> f64 {
    1e-12 * (1.0 + vals.iter().map(|v| v.abs()).sum::<f64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn monotone(fam in family(), x in function(), bump in function()) {
        let nonneg = TestFunction::new(
            bump.breakpoints().to_vec(),
            bump.values().iter().map(|v| v.abs()).collect(),
        ).unwrap();
        let ex = expect_step(&fam, &x);
        let ey = expect_step(&fam, &x.add(&nonneg));
        prop_assert!(ey >= ex - tol(&[ex, ey]));
    }

    #[test]
    fn constants_and_translation(fam in family(), x in function(), c in -10.0f64..10.0) {
        prop_assert!((expect_step(&fam, &TestFunction::constant(c)) - c).abs() <= tol(&[c]));
        let ex = expect_step(&fam, &x);
        prop_assert!((expect_step(&fam, &x.shift(c)) - ex - c).abs() <= tol(&[ex, c]));
    }

    #[test]
    fn sub_additive_and_homogeneous(fam in family(), x in function(), y in function(), l in 0.0f64..10.0) {
        let (ex, ey) = (expect_step(&fam, &x), expect_step(&fam, &y));
        let exy = expect_step(&fam, &x.add(&y));
        prop_assert!(exy <= ex + ey + tol(&[ex, ey, exy]));
        let el = expect_step(&fam, &x.scale(l));
        prop_assert!((el - l * ex).abs() <= tol(&[el, l * ex]));
    }

    #[test]
    fn conjugate_below_upper(fam in family(), x in function()) {
        let (lo, hi) = (conjugate_expect_step(&fam, &x), expect_step(&fam, &x));
        prop_assert!(lo <= hi + tol(&[lo, hi]));
        prop_assert!((conjugate_expect_step(&fam, &x) + expect_step(&fam, &x.negate())).abs() <= tol(&[lo]));
    }

    #[test]
    fn holder_two_two(fam in family(), x in function(), y in function()) {
        let lhs = fam.sup_expect(|z| (x.eval(z) * y.eval(z)).abs());
        let rhs = fam.sup_expect(|z| x.eval(z).powi(2)).sqrt() * fam.sup_expect(|z| y.eval(z).powi(2)).sqrt();
        prop_assert!(lhs <= rhs + tol(&[lhs, rhs]));
    }

    #[test]
    fn capacity_bracket_is_ordered(fam in family(), t in -3.0f64..3.0, w in 1e-6f64..0.5) {
        let b = capacity_bracket(&fam, t, w).unwrap();
        prop_assert!(b.lower <= b.upper + 1e-15);
        let unit = -1e-12..=1.0 + 1e-12;
        prop_assert!(unit.contains(&b.lower) && unit.contains(&b.upper));
        let exact = fam.sup_expect(|z| if z >= t { 1.0 } else { 0.0 });
        prop_assert!(b.lower <= exact + 1e-15 && exact <= b.upper + 1e-15);
    }

    #[test]
    fn choquet_of_a_point_mass_is_the_point(c in -2.0f64..2.0) {
        let v = choquet(|t| if c >= t { 1.0 } else { 0.0 }, (-3.0, 3.0), 1e-3).unwrap();
        prop_assert!((v - c).abs() <= 1e-3 + 1e-12);
    }
}

#[test]
fn classical_family_is_linear() {
    let fam = DistributionFamily::singleton(StepDistribution::new(vec![(-1.0, 0.3), (0.5, 0.2), (2.0, 0.5)]).unwrap());
    let x = TestFunction::new(vec![-1.0, 0.0, 2.0], vec![1.0, -1.0, 3.0]).unwrap();
    let y = TestFunction::positive_part(4.0).unwrap();
    let sum = expect_step(&fam, &x.add(&y));
    assert!((sum - expect_step(&fam, &x) - expect_step(&fam, &y)).abs() < 1e-14);
    assert_eq!(conjugate_expect_step(&fam, &x), expect_step(&fam, &x));
    // x(0.5) = 0 by interpolation: 0.3 * 1 + 0.5 * 3
    assert!((expect_step(&fam, &x) - 1.8).abs() < 1e-14);
}
