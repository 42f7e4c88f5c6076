//! Property tests for the constrained-pair machinery: constraint residuals,
//! the Eq-style identity between the square-root product and `q(1 − t)`,
//! branch ordering, swap symmetry, and radius/t round trips.

use num_complex::Complex64;
use proptest::prelude::*;

use qberezin::{
    kernel_inner, pair_lambda, radius_for_t, solve_pairs, t_of_pair, t_range, DiskPoint,
    PairBranch, QParam,
};

const TAU: f64 = std::f64::consts::TAU;

fn q_strategy() -> impl Strategy<Value = f64> {
    0.05f64..=1.0
}

fn branch_strategy() -> impl Strategy<Value = PairBranch> {
    prop_oneof![Just(PairBranch::Plus), Just(PairBranch::Minus)]
}

proptest! {
    #[test]
    fn pair_residual_below_tolerance(
        qv in q_strategy(),
        r in 1e-6f64..=0.99,
        theta in 0.0f64..TAU,
        branch in branch_strategy(),
    ) {
        let q = QParam::new(qv).unwrap();
        let w1 = DiskPoint::from_polar(r, theta).unwrap();
        let pair = solve_pairs(q, w1, branch).unwrap();
        let residual = (kernel_inner(pair.w1(), pair.w2()) - qv).norm();
        prop_assert!(residual <= 1e-10, "residual {residual}");
    }

    #[test]
    fn circle_residual_below_tolerance(qv in 0.05f64..1.0, theta in 0.0f64..TAU) {
        let q = QParam::new(qv).unwrap();
        let pair = solve_pairs(q, DiskPoint::origin(), PairBranch::CirclePhase(theta)).unwrap();
        let residual = (kernel_inner(pair.w1(), pair.w2()) - qv).norm();
        prop_assert!(residual <= 1e-10);
        prop_assert!((pair.w2().modulus() - (1.0 - qv * qv).sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn sqrt_product_equals_q_one_minus_t(
        qv in q_strategy(),
        r in 1e-4f64..=0.99,
        theta in 0.0f64..TAU,
        branch in branch_strategy(),
    ) {
        let q = QParam::new(qv).unwrap();
        let pair = solve_pairs(q, DiskPoint::from_polar(r, theta).unwrap(), branch).unwrap();
        let lhs = ((1.0 - pair.w1().value().norm_sqr())
            * (1.0 - pair.w2().value().norm_sqr()))
        .sqrt();
        let rhs = qv * (Complex64::new(1.0, 0.0) - pair.w1().value().conj() * pair.w2().value());
        prop_assert!((Complex64::new(lhs, 0.0) - rhs).norm() <= 1e-10);
        prop_assert!(rhs.re > 0.0);
    }

    #[test]
    fn branch_ordering(qv in 0.05f64..=1.0, r in 1e-4f64..=0.999) {
        let (lp, lm) = pair_lambda(QParam::new(qv).unwrap(), r).unwrap();
        prop_assert!(lp >= lm);
        if qv < 1.0 {
            prop_assert!(lp > lm);
        } else {
            prop_assert_eq!(lp, lm);
        }
        prop_assert!(lp < 1.0 / r && lm > -1.0 / r);
    }

    #[test]
    fn swapped_pair_still_satisfies_constraint(
        qv in q_strategy(),
        r in 1e-4f64..=0.98,
        theta in 0.0f64..TAU,
        branch in branch_strategy(),
    ) {
        let q = QParam::new(qv).unwrap();
        let pair = solve_pairs(q, DiskPoint::from_polar(r, theta).unwrap(), branch).unwrap();
        let swapped = pair.swapped().unwrap();
        prop_assert!(swapped.residual() <= 1e-10);
        prop_assert!((swapped.t() - pair.t()).abs() <= 1e-12);
    }

    #[test]
    fn radius_round_trips_through_t(
        qv in 0.05f64..=0.999,
        u in 0.001f64..=0.999,
        minus in proptest::bool::ANY,
    ) {
        let q = QParam::new(qv).unwrap();
        let (t, branch) = if minus {
            let lo = t_range(q).lo;
            (lo + u * (0.999 - lo), PairBranch::Minus)
        } else {
            (u * 0.999, PairBranch::Plus)
        };
        let r = radius_for_t(q, t, branch).unwrap();
        prop_assert!(r > 0.0 && r < 1.0);
        let pair = solve_pairs(q, DiskPoint::from_polar(r, 0.0).unwrap(), branch).unwrap();
        let t_back = t_of_pair(&pair).unwrap();
        prop_assert!((t_back - t).abs() <= 1e-10, "t {t} round-tripped to {t_back}");
    }

    #[test]
    fn kernel_coeff_partial_norm_identity(
        re in -0.7f64..=0.7,
        im in -0.7f64..=0.7,
        n in 0usize..64,
    ) {
        prop_assume!(re * re + im * im < 0.98);
        let w = DiskPoint::new(Complex64::new(re, im)).unwrap();
        let coeffs = qberezin::normalized_kernel_coeffs(w, n);
        let partial: f64 = coeffs.iter().map(|z| z.norm_sqr()).sum();
        let expected = 1.0 - w.modulus().powi(2 * (n as i32 + 1));
        prop_assert!((partial - expected).abs() <= 1e-12);
        prop_assert!(partial <= 1.0 + 1e-12);
    }
}

/// The minimum of t over a dense radial grid sits at `(q−1)/(q+1)` near
/// `r = √((1−q)/(1+q))`, and the supremum pushes past 0.999 by `r = 0.9995`.
#[test]
fn t_range_attainment_on_dense_grids() {
    for qv in [0.2, 0.5, 1.0 / 3.0, 0.8] {
        let q = QParam::new(qv).unwrap();
        let mut min_t = f64::INFINITY;
        let mut argmin_r = 0.0;
        let mut max_t = f64::NEG_INFINITY;
        let n = 4000;
        for i in 0..=n {
            let r = 1e-6 + (0.9995 - 1e-6) * i as f64 / n as f64;
            for branch in [PairBranch::Plus, PairBranch::Minus] {
                let t = qberezin::kernel::t_at_radius(q, r, branch).unwrap();
                if t < min_t {
                    min_t = t;
                    argmin_r = r;
                }
                max_t = max_t.max(t);
            }
        }
        let expected_min = (qv - 1.0) / (qv + 1.0);
        let expected_argmin = ((1.0 - qv) / (1.0 + qv)).sqrt();
        assert!(
            (min_t - expected_min).abs() < 1e-6,
            "q = {qv}: min {min_t} vs {expected_min}"
        );
        assert!(
            (argmin_r - expected_argmin).abs() < 1e-3,
            "q = {qv}: argmin {argmin_r} vs {expected_argmin}"
        );
        assert!(max_t > 0.999, "q = {qv}: sup {max_t}");
    }
}
