//! Acceptance suite: one test per criterion, each printing its own
//! pass/fail line through the harness. Criterion 15 (CLI determinism and
//! figure panel counts) lives in the CLI crate's acceptance target.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qberezin::operators::FiniteRankTerm;
use qberezin::{
    adjoint_value, berezin_value_closed, berezin_value_series, convexity_midpoint_test,
    estimate_berq, hausdorff, kernel_inner, rotation_test, sample_range, solve_pairs, AffineOp,
    ConstrainedPair, ConvexityVerdict, DiskPoint, OperatorSpec, PairBranch, QParam,
    RadialSchedule, SampleGrid, SequenceLaw,
};

const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn grid(qv: f64, nr: usize, na: usize, r_max: f64) -> SampleGrid {
    SampleGrid::new(q(qv), nr, na, r_max, RadialSchedule::UniformInT, true).unwrap()
}

/// Seeded random constrained pairs; one in seven uses the circle branch.
/// Draws whose `w₂` lands within 0.01 of the boundary are rejected so the
/// series oracle stays within its truncation cap at tight tolerances.
fn random_pairs(seed: u64, count: usize, r_cap: f64) -> Vec<ConstrainedPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::with_capacity(count);
    while pairs.len() < count {
        let qv: f64 = rng.random_range(0.05..=1.0);
        let theta: f64 = rng.random_range(0.0..TAU);
        if pairs.len() % 7 == 6 {
            pairs.push(
                solve_pairs(q(qv), DiskPoint::origin(), PairBranch::CirclePhase(theta)).unwrap(),
            );
            continue;
        }
        let r: f64 = rng.random_range(1e-4..=r_cap);
        let branch = if rng.random::<bool>() { PairBranch::Plus } else { PairBranch::Minus };
        let pair =
            solve_pairs(q(qv), DiskPoint::from_polar(r, theta).unwrap(), branch).unwrap();
        if pair.w2().modulus() <= 0.99 {
            pairs.push(pair);
        }
    }
    pairs
}

fn banded_three() -> OperatorSpec {
    OperatorSpec::Banded {
        bands: vec![
            SequenceLaw::Geometric { beta: c(0.5, 0.0) },
            SequenceLaw::Alternating { a: 0.3, b: 0.2 },
            SequenceLaw::ExplicitList {
                values: vec![c(0.25, 0.0), c(-0.1, 0.0)],
            },
        ],
    }
}

#[test]
fn criterion_01_pair_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..10_000 {
        let qv: f64 = rng.random_range(0.05..=1.0);
        let theta: f64 = rng.random_range(0.0..TAU);
        if i % 10 == 0 {
            let pair =
                solve_pairs(q(qv), DiskPoint::origin(), PairBranch::CirclePhase(theta)).unwrap();
            let residual = (kernel_inner(pair.w1(), pair.w2()) - qv).norm();
            assert!(residual <= 1e-10, "circle case {i}: residual {residual}");
            continue;
        }
        let r: f64 = rng.random_range(1e-6..=0.99);
        let w1 = DiskPoint::from_polar(r, theta).unwrap();
        for branch in [PairBranch::Plus, PairBranch::Minus] {
            let pair = solve_pairs(q(qv), w1, branch).unwrap();
            let residual = (kernel_inner(pair.w1(), pair.w2()) - qv).norm();
            assert!(
                residual <= 1e-10,
                "sample {i} (q = {qv}, r = {r}): residual {residual}"
            );
        }
    }
}

#[test]
fn criterion_02_t_range_extremes() {
    let qv = q(1.0 / 3.0);
    let n = 4000;
    let mut min_t = f64::INFINITY;
    let mut argmin_r = 0.0;
    let mut sup_t = f64::NEG_INFINITY;
    let mut argsup_r = 0.0;
    for i in 0..=n {
        let r = 1e-6 + (0.9995 - 1e-6) * i as f64 / n as f64;
        for branch in [PairBranch::Plus, PairBranch::Minus] {
            let t = qberezin::kernel::t_at_radius(qv, r, branch).unwrap();
            if t < min_t {
                min_t = t;
                argmin_r = r;
            }
            if t > sup_t {
                sup_t = t;
                argsup_r = r;
            }
        }
    }
    assert!((min_t + 0.5).abs() <= 1e-6, "grid min {min_t}");
    assert!(
        (argmin_r - 0.5f64.sqrt()).abs() <= 1e-3,
        "argmin {argmin_r} vs {}",
        0.5f64.sqrt()
    );
    assert!(sup_t >= 0.999, "grid sup {sup_t}");
    assert!((argsup_r - 0.9995).abs() <= 1e-12, "sup at r = {argsup_r}");
}

#[test]
fn criterion_03_oracle_equivalence() {
    let ops: Vec<OperatorSpec> = vec![
        OperatorSpec::RankOneMonomial { n: 1, m: 2 },
        OperatorSpec::FiniteRank {
            terms: vec![
                FiniteRankTerm {
                    g: vec![1.0, 0.5, 0.0, 0.25],
                    h: vec![0.0, 1.0, -0.5],
                },
                FiniteRankTerm {
                    g: vec![0.0, 0.0, 1.0],
                    h: vec![1.0, 1.0],
                },
            ],
        },
        OperatorSpec::DiagonalModSquared {
            weights: SequenceLaw::MonomialAtK { k: 2 },
        },
        OperatorSpec::DiagonalGeneral {
            alpha: SequenceLaw::PowersOfI,
        },
        OperatorSpec::MultPoly {
            coeffs: vec![c(1.0, 1.0), c(1.0, 1.0)],
        },
        OperatorSpec::ToeplitzTwoCos,
        OperatorSpec::WeightedShift {
            weights: SequenceLaw::Geometric { beta: c(0.5, 0.0) },
        },
        banded_three(),
        OperatorSpec::CompositionLinear {
            xi: c(0.0, std::f64::consts::FRAC_PI_4),
        },
        OperatorSpec::CompositionMobius { alpha: c(-0.5, 0.0) },
    ];
    assert_eq!(ops.len(), 10);
    for (k, op) in ops.iter().enumerate() {
        let pairs = random_pairs(100 + k as u64, 100, 0.9);
        for pair in &pairs {
            let closed = berezin_value_closed(op, pair).unwrap().value;
            let series = berezin_value_series(op, pair, 1e-10).unwrap().value;
            let gap = (closed - series).norm();
            assert!(
                gap <= 1e-8,
                "{op}: |closed − series| = {gap:.3e} at q = {}, r = {}",
                pair.q().value(),
                pair.w1().modulus()
            );
        }
    }
}

#[test]
fn criterion_04_monomial_diagonal_endpoints() {
    let op = OperatorSpec::DiagonalModSquared {
        weights: SequenceLaw::MonomialAtK { k: 1 },
    };
    let cloud = sample_range(&op, &grid(0.5, 600, 4, 0.995)).unwrap();
    let values = cloud.values();
    let min = values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let max = values.iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let max_im = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    assert!((min + 2.0 / 9.0).abs() <= 1e-4, "min {min}");
    assert!((max - 0.125).abs() <= 1e-4, "max {max}");
    assert!(max_im <= 1e-10, "imaginary part {max_im}");
}

#[test]
fn criterion_05_geometric_diagonal_sup() {
    let op = OperatorSpec::DiagonalModSquared {
        weights: SequenceLaw::Geometric { beta: c(0.5, 0.0) },
    };
    let cloud = sample_range(&op, &grid(0.5, 400, 4, 0.995)).unwrap();
    let analytic_sup = 2.0 * 0.5 / (0.5 + 1.0 - 0.5 * (0.5 - 1.0));
    let mut max = f64::NEG_INFINITY;
    for v in cloud.values() {
        assert!(v.im.abs() <= 1e-12);
        assert!(v.re > 0.0, "nonpositive value {v}");
        assert!(v.re <= analytic_sup + 1e-12);
        max = max.max(v.re);
    }
    assert!((max - analytic_sup).abs() <= 1e-6, "sup {max} vs {analytic_sup}");
    assert!((analytic_sup - 0.5714286).abs() < 1e-6);
}

#[test]
fn criterion_06_mult_z_disc() {
    let op = OperatorSpec::MultPoly {
        coeffs: vec![c(0.0, 0.0), c(1.0, 0.0)],
    };
    let cloud = sample_range(&op, &grid(0.7, 48, 256, 0.995)).unwrap();
    for v in cloud.values() {
        assert!(v.norm() <= 0.7 + 1e-9, "|{v}| outside the closed disc");
    }
    let est = estimate_berq(&op, q(0.7), 60_000).unwrap();
    assert!(est >= 0.7 - 1e-3, "estimate {est}");
    assert!(est <= 0.7 + 1e-9);
    let defect = rotation_test(&cloud, 7);
    assert!(
        defect <= 2.0 * cloud.resolution,
        "rotation defect {defect} vs resolution {}",
        cloud.resolution
    );
}

#[test]
fn criterion_07_toeplitz_identity() {
    let op = OperatorSpec::ToeplitzTwoCos;
    for pair in random_pairs(7, 1000, 0.9) {
        let series = berezin_value_series(&op, &pair, 1e-11).unwrap().value;
        let analytic =
            pair.q().value() * (pair.w2().value() + pair.w1().value().conj());
        let gap = (series - analytic).norm();
        assert!(gap <= 1e-10, "gap {gap:.3e}");
    }
    // q = 1: everything real, strictly inside (−2, 2)
    let cloud = sample_range(&op, &grid(1.0, 64, 64, 0.995)).unwrap();
    for v in cloud.values() {
        assert!(v.im.abs() <= 1e-8);
        assert!(v.re > -2.0 && v.re < 2.0);
    }
}

#[test]
fn criterion_08_weighted_shift_discs() {
    let circle_radius = 0.5 * (1.0f64 - 0.25).sqrt();
    let cases = [
        (
            OperatorSpec::WeightedShift {
                weights: SequenceLaw::Geometric { beta: c(0.5, 0.0) },
            },
            circle_radius,
        ),
        (
            OperatorSpec::WeightedShift {
                weights: SequenceLaw::Alternating { a: 1.0, b: 0.5 },
            },
            1.0 * circle_radius,
        ),
    ];
    for (op, expected_circle) in cases {
        let cloud = sample_range(&op, &grid(0.5, 48, 256, 0.995)).unwrap();
        let defect = rotation_test(&cloud, 7);
        assert!(
            defect <= 2.0 * cloud.resolution,
            "{op}: defect {defect} vs resolution {}",
            cloud.resolution
        );
        let circle = cloud.branch_subcloud("circle");
        assert!(!circle.is_empty());
        for p in &circle.points {
            assert!(
                (p.value.norm() - expected_circle).abs() <= 1e-10,
                "{op}: circle modulus {}",
                p.value.norm()
            );
        }
    }
}

#[test]
fn criterion_09_composition_linear() {
    // ξ = −1: real values in (0, 1], sup within 1e−6 of 1
    let op = OperatorSpec::CompositionLinear { xi: c(-1.0, 0.0) };
    let cloud = sample_range(&op, &grid(0.5, 400, 2, 0.995)).unwrap();
    let mut sup = f64::NEG_INFINITY;
    for v in cloud.values() {
        assert!(v.im.abs() <= 1e-12);
        assert!(v.re > 0.0 && v.re <= 1.0 + 1e-12);
        sup = sup.max(v.re);
    }
    assert!((sup - 1.0).abs() <= 1e-6, "sup {sup}");

    // ξ = iπ/4: a genuine nonconvexity witness
    let op = OperatorSpec::CompositionLinear {
        xi: c(0.0, std::f64::consts::FRAC_PI_4),
    };
    let cloud = sample_range(&op, &grid(0.5, 1200, 1, 0.995)).unwrap();
    match convexity_midpoint_test(&cloud, 4000, 42).unwrap() {
        ConvexityVerdict::NonconvexWitness { distance, .. } => {
            assert!(distance > 10.0 * cloud.resolution);
        }
        ConvexityVerdict::ConvexWithinTolerance => panic!("expected a nonconvexity witness"),
    }
}

#[test]
fn criterion_10_powers_of_i_nonconvex() {
    let op = OperatorSpec::DiagonalGeneral {
        alpha: SequenceLaw::PowersOfI,
    };
    let cloud = sample_range(&op, &grid(0.5, 1200, 1, 0.995)).unwrap();
    match convexity_midpoint_test(&cloud, 4000, 42).unwrap() {
        ConvexityVerdict::NonconvexWitness { distance, .. } => {
            assert!(distance > 10.0 * cloud.resolution);
        }
        ConvexityVerdict::ConvexWithinTolerance => panic!("expected a nonconvexity witness"),
    }
}

#[test]
fn criterion_11_mobius_conjugation_symmetry() {
    for alpha in [c(-0.5, 0.0), 0.3 * Complex64::from_polar(1.0, std::f64::consts::PI / 5.0)] {
        let op = OperatorSpec::CompositionMobius { alpha };
        let psi = alpha.arg();
        let rot = Complex64::from_polar(1.0, 2.0 * psi);
        for (k, pair) in random_pairs(11, 500, 0.95).iter().enumerate() {
            let reflected = ConstrainedPair::from_points(
                pair.q(),
                DiskPoint::new(pair.w1().value().conj() * rot).unwrap(),
                DiskPoint::new(pair.w2().value().conj() * rot).unwrap(),
            )
            .expect("reflected pair must satisfy the constraint");
            let v = berezin_value_closed(&op, pair).unwrap().value;
            let v_reflected = berezin_value_closed(&op, &reflected).unwrap().value;
            assert!(
                (v - v_reflected.conj()).norm() <= 1e-10,
                "pair {k}: {v} vs conj {v_reflected}"
            );
        }
    }
    // α = 0 collapses to the constant cloud {q}
    let op = OperatorSpec::CompositionMobius { alpha: c(0.0, 0.0) };
    let cloud = sample_range(&op, &grid(0.5, 32, 16, 0.99)).unwrap();
    for v in cloud.values() {
        assert!((v - 0.5).norm() <= 1e-12);
    }
}

#[test]
fn criterion_12_algebraic_identities() {
    // affine pointwise identity, exact to 1e−12 at the coefficient level
    let inner = OperatorSpec::DiagonalGeneral {
        alpha: SequenceLaw::PowersOfI,
    };
    let affine = AffineOp::new(c(0.7, -0.2), inner.clone(), c(0.3, 0.1));
    for pair in random_pairs(12, 60, 0.7) {
        let series = affine.value_series(&pair, 1e-13).unwrap();
        let expected = c(0.7, -0.2) * berezin_value_closed(&inner, &pair).unwrap().value
            + c(0.3, 0.1) * pair.q().value();
        assert!((series - expected).norm() <= 1e-12);
    }
    let g = grid(0.5, 32, 24, 0.8);
    let base_cloud = sample_range(&inner, &g).unwrap();
    let affine_cloud =
        qberezin::geometry::sample_range_with(&g, |p| affine.value_closed(p)).unwrap();
    for (a, b) in affine_cloud.points.iter().zip(&base_cloud.points) {
        let expected = c(0.7, -0.2) * b.value + c(0.3, 0.1) * 0.5;
        assert!((a.value - expected).norm() <= 1e-12);
    }

    // adjoint cloud against the conjugated cloud; r_max high enough that
    // both parameterizations cover the same set
    let shift = OperatorSpec::WeightedShift {
        weights: SequenceLaw::Geometric { beta: c(0.5, 0.0) },
    };
    let g = grid(0.5, 64, 128, 0.95);
    let cloud = sample_range(&shift, &g).unwrap();
    let star_cloud =
        qberezin::geometry::sample_range_with(&g, |p| adjoint_value(&shift, p, 1e-9)).unwrap();
    let conj_cloud = cloud.map_values(|v| v.conj());
    let d = hausdorff(&star_cloud, &conj_cloud);
    let res = cloud.resolution.max(star_cloud.resolution);
    assert!(d <= 2.0 * res, "adjoint Hausdorff {d} vs resolution {res}");

    // unitary invariance under U = C_{ξz}, ξ = e^{iπ/3}
    let xi = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_3);
    let t_op = OperatorSpec::WeightedShift {
        weights: SequenceLaw::Geometric { beta: c(0.3, 0.0) },
    };
    let u = OperatorSpec::CompositionLinear { xi };
    let u_star = OperatorSpec::CompositionLinear { xi: xi.conj() };
    let g = grid(0.5, 64, 128, 0.95);
    let base = sample_range(&t_op, &g).unwrap();
    let conjugated = qberezin::geometry::sample_range_with(&g, |pair| {
        qberezin::operators::series_value_with(
            |coeffs| {
                let after_u_star = qberezin::apply_coeffs(&u_star, coeffs)?;
                let after_t = qberezin::apply_coeffs(&t_op, &after_u_star)?;
                qberezin::apply_coeffs(&u, &after_t)
            },
            1.0,
            pair,
            1e-9,
            qberezin::operators::default_truncation_cap(),
        )
    })
    .unwrap();
    let d = hausdorff(&conjugated, &base);
    let res = base.resolution.max(conjugated.resolution);
    assert!(d <= 2.0 * res, "unitary Hausdorff {d} vs resolution {res}");

    // triangle inequality on ber_q estimates over a shared grid
    let r_op = OperatorSpec::DiagonalModSquared {
        weights: SequenceLaw::Geometric { beta: c(0.4, 0.0) },
    };
    let t_diag = OperatorSpec::DiagonalGeneral {
        alpha: SequenceLaw::ExplicitList {
            values: vec![c(0.6, 0.0), c(-0.3, 0.2), c(0.1, 0.0)],
        },
    };
    let budget = 30_000;
    let est_r = estimate_berq(&r_op, q(0.5), budget).unwrap();
    let est_t = estimate_berq(&t_diag, q(0.5), budget).unwrap();
    let est_sum = qberezin::geometry::estimate_berq_with(q(0.5), budget, |pair| {
        Ok(berezin_value_closed(&r_op, pair)?.value + berezin_value_closed(&t_diag, pair)?.value)
    })
    .unwrap()
    .value;
    assert!(
        est_sum <= est_r + est_t + 1e-6,
        "triangle: {est_sum} vs {est_r} + {est_t}"
    );
}

#[test]
fn criterion_13_q_one_collapse() {
    let ops = [
        OperatorSpec::ToeplitzTwoCos,
        OperatorSpec::WeightedShift {
            weights: SequenceLaw::Geometric { beta: c(0.5, 0.0) },
        },
        OperatorSpec::DiagonalGeneral {
            alpha: SequenceLaw::PowersOfI,
        },
    ];
    let g = grid(1.0, 24, 16, 0.8);
    for op in &ops {
        let cloud = sample_range(op, &g).unwrap();
        for p in &cloud.points {
            // at q = 1 the solver returns w₂ = w₁ exactly
            assert_eq!(p.w1.value(), p.w2.value());
            let pair = ConstrainedPair::from_points(q(1.0), p.w1, p.w2).unwrap();
            let classical = berezin_value_series(op, &pair, 1e-13).unwrap().value;
            assert!(
                (p.value - classical).norm() <= 1e-12,
                "{op}: {} vs classical {classical}",
                p.value
            );
        }
    }
}

#[test]
fn criterion_14_banded_containment() {
    let op = banded_three();
    let sum_m = qberezin::operator_norm_bound(&op);
    let cloud = sample_range(&op, &grid(0.6, 64, 32, 0.995)).unwrap();
    for v in cloud.values() {
        assert!(v.norm() < sum_m, "|{v}| = {} not strictly inside {sum_m}", v.norm());
    }
}
