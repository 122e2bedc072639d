use proptest::prelude::*;
use qcorr::matrix::{operator_norm, svd, trace_norm, Matrix};
use qcorr::norms::{
    bell_functional_from_svd, classical_lower_bound, classical_upper_bound, gamma2_bracket, gamma2_oracle,
    gamma2_star_orthogonal, infty_to_one_exact, infty_to_one_heuristic, quantum_classical_gap, tau_gap_bound,
    tau_gap_from, BellFunctional, Certificate, EpsNormKind, NormError, SignPair, KG,
};
use qcorr::sample::{bi_invariant, coupled_gaussians, gaussian, haar_orthogonal, unit_rows_correlation, SeedSpec};

fn seed(t: u64) -> SeedSpec {
    SeedSpec::new(0xbe11, t)
}

/// All `2^(r+c)` sign pairs, without the symmetry or Gray-code shortcuts.
fn brute_force_eps(a: &Matrix) -> f64 {
    let (r, c) = (a.rows(), a.cols());
    let mut best = f64::NEG_INFINITY;
    for x in 0u64..1 << r {
        for y in 0u64..1 << c {
            let s = |bits: u64, i: usize| if bits >> i & 1 == 1 { -1.0 } else { 1.0 };
            let v: f64 = (0..r)
                .flat_map(|i| (0..c).map(move |j| (i, j)))
                .map(|(i, j)| a.get(i, j) * s(x, i) * s(y, j))
                .sum();
            best = best.max(v);
        }
    }
    best
}

fn hadamard4() -> Matrix {
    Matrix::from_fn(4, 4, |i, j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}

fn chsh() -> Matrix {
    Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap()
}

fn rotation(theta: f64) -> Matrix {
    Matrix::from_rows(&[vec![theta.cos(), -theta.sin()], vec![theta.sin(), theta.cos()]]).unwrap()
}

#[test]
fn exact_injective_norm_examples() {
    for n in [1, 3, 6] {
        let (v, pair) = infty_to_one_exact(&Matrix::identity(n)).unwrap();
        assert_eq!(v, n as f64);
        assert_eq!(pair.value(&Matrix::identity(n)), n as f64);
        assert_eq!(infty_to_one_exact(&Matrix::filled(n, n, 1.0)).unwrap().0, (n * n) as f64);
    }
    assert_eq!(infty_to_one_exact(&chsh()).unwrap().0, 2.0);
    assert_eq!(infty_to_one_exact(&hadamard4()).unwrap().0, 8.0);
    assert!(matches!(
        infty_to_one_exact(&Matrix::identity(25)),
        Err(NormError::ExceedsExactCap { n: 25, cap: 24 })
    ));
}

#[test]
fn exact_matches_brute_force_on_rectangles() {
    for t in 0..60u64 {
        let (r, c) = (1 + t as usize % 6, 1 + (t as usize / 6) % 5);
        let a = gaussian(r, c, seed(t));
        let (v, pair) = infty_to_one_exact(&a).unwrap();
        let b = brute_force_eps(&a);
        assert!((v - b).abs() <= 1e-12 * b.abs().max(1.0), "{r}x{c}: {v} vs {b}");
        assert!((pair.value(&a) - v).abs() <= 1e-12 * v.abs().max(1.0));
    }
}

#[test]
fn heuristic_examples() {
    let (v, _) = infty_to_one_heuristic(&Matrix::identity(7), 3, seed(0));
    assert_eq!(v, 7.0);
    for t in 0..50u64 {
        let a = gaussian(9, 9, seed(t));
        let one = infty_to_one_heuristic(&a, 1, seed(t)).0;
        let many = infty_to_one_heuristic(&a, 100, seed(t)).0;
        assert!(many >= one);
        assert!(many <= infty_to_one_exact(&a).unwrap().0 + 1e-12);
    }
}

#[test]
fn gamma2_star_of_orthogonal_is_n() {
    assert_eq!(gamma2_star_orthogonal(&Matrix::identity(5)).unwrap(), 5.0);
    for t in 0..10u64 {
        let o = haar_orthogonal(12, seed(t)).unwrap();
        assert_eq!(gamma2_star_orthogonal(&o).unwrap(), 12.0);
        assert_eq!(gamma2_star_orthogonal(&rotation(t as f64 * 0.7)).unwrap(), 2.0);
    }
    assert!(matches!(
        gamma2_star_orthogonal(&Matrix::diag(&[1.0, 2.0])),
        Err(NormError::NotOrthogonal { .. })
    ));
}

#[test]
fn gamma2_bracket_examples() {
    let o = haar_orthogonal(10, seed(3)).unwrap();
    let b = gamma2_bracket(&o).unwrap();
    assert!((b.lower - 1.0).abs() < 1e-10 && (b.upper - 1.0).abs() < 1e-10);
    let mut d = vec![0.0; 8];
    d[0] = 1.0;
    let b = gamma2_bracket(&Matrix::diag(&d)).unwrap();
    assert!((b.lower - 0.125).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
    assert!(b.lower_certificate.verify().is_ok() && b.upper_certificate.verify().is_ok());
    assert!(matches!(gamma2_bracket(&Matrix::zeros(3, 3)), Err(NormError::ZeroMatrix)));
}

#[test]
fn gamma2_oracle_examples() {
    assert!((gamma2_oracle(&Matrix::identity(4), 1e-8).unwrap() - 1.0).abs() < 1e-7);
    assert!((gamma2_oracle(&rotation(0.3), 1e-8).unwrap() - 1.0).abs() < 1e-7);
    for t in 0..30u64 {
        let o = haar_orthogonal(8, seed(t)).unwrap();
        assert!((gamma2_oracle(&o, 1e-8).unwrap() - 1.0).abs() < 1e-6);
    }
    // rank one u vᵗ has γ₂ = ‖u‖_∞‖v‖_∞
    let u = [0.5, -2.0, 1.0];
    let v = [3.0, 1.0, -0.25];
    let r1 = Matrix::from_fn(3, 3, |i, j| u[i] * v[j]);
    assert!((gamma2_oracle(&r1, 1e-9).unwrap() - 6.0).abs() < 1e-6);
    assert!(matches!(
        gamma2_oracle(&Matrix::identity(13), 1e-6),
        Err(NormError::OracleTooLarge { .. })
    ));
}

#[test]
fn bell_functional_examples() {
    let o = haar_orthogonal(6, seed(1)).unwrap();
    let bf = bell_functional_from_svd(&o).unwrap();
    assert!(bf.a.sub(&o).max_abs() < 1e-10);
    let bf = bell_functional_from_svd(&Matrix::diag(&[2.0, 1.0])).unwrap();
    assert!(bf.a.sub(&Matrix::identity(2)).max_abs() < 1e-12);
    for t in 0..20u64 {
        let o = haar_orthogonal(16, seed(100 + t)).unwrap();
        let bf = bell_functional_from_svd(&o).unwrap();
        assert_eq!(bf.kind, EpsNormKind::Exact);
        let r = bf.eps_one_norm / 16.0;
        assert!((0.7..=1.0).contains(&r), "{r}");
    }
    let singular = Matrix::diag(&[1.0, 0.0, 2.0]);
    assert!(bell_functional_from_svd(&singular).unwrap().near_singular);
}

#[test]
fn classical_bounds_pin_small_cases() {
    let i2 = Matrix::identity(2);
    assert!((classical_lower_bound(&i2, &BellFunctional::exact(i2.clone()).unwrap()).unwrap() - 1.0).abs() < 1e-15);
    let up = classical_upper_bound(&i2, 16, 1e-9).unwrap();
    assert!((up.decomposition.weight_sum() - 1.0).abs() < 1e-9);
    assert_eq!(up.decomposition.atoms.len(), 2);

    let ones = Matrix::filled(5, 5, 1.0);
    let up = classical_upper_bound(&ones, 16, 1e-9).unwrap();
    assert!((up.decomposition.weight_sum() - 1.0).abs() < 1e-9);

    let c = chsh();
    let lo = classical_lower_bound(&c, &BellFunctional::exact(c.clone()).unwrap()).unwrap();
    let up = classical_upper_bound(&c, 16, 1e-9).unwrap();
    assert!((lo - 2.0).abs() < 1e-12);
    assert!((up.decomposition.weight_sum() - 2.0).abs() < 1e-6);
    assert!(up.decomposition.certificate(&c).verify().is_ok());
}

#[test]
fn gaussian_200_lower_bound() {
    let n = 200;
    let t = gaussian(n, n, seed(7)).scale(1.0 / (n as f64).sqrt());
    let bf = bell_functional_from_svd(&t).unwrap();
    assert_eq!(bf.kind, EpsNormKind::OperatorBound);
    let lo = classical_lower_bound(&t, &bf).unwrap();
    let target = ((16.0f64 / 15.0).sqrt() - 0.05) * trace_norm(&t).unwrap() / n as f64;
    assert!(lo >= target, "{lo} < {target}");
}

#[test]
fn orthogonal_gap_at_16() {
    let draws = 200;
    let hits = (0..draws)
        .filter(|&t| {
            let o = haar_orthogonal(16, seed(500 + t)).unwrap();
            quantum_classical_gap(&o).unwrap() >= 1.03
        })
        .count();
    assert!(hits as f64 >= 0.8 * draws as f64, "{hits}/{draws}");
    assert!(quantum_classical_gap(&Matrix::filled(6, 6, 1.0)).unwrap() <= 1.0 + 1e-12);
}

#[test]
fn tau_gap_decays_and_dominates_pairings() {
    let hits = (0..40u64).filter(|&t| tau_gap_bound(50, 4000, seed(t)) <= 0.2).count();
    assert!(hits >= 38, "{hits}/40");
    assert_eq!(tau_gap_bound(10, 30, seed(1)), tau_gap_bound(10, 30, seed(1)));
    // ⟨R, A⟩ ≤ ‖R‖_π ‖A‖_{∞→1} ≤ bound · ‖A‖_{∞→1}
    let (n, m) = (8, 20);
    for t in 0..10u64 {
        let (g, h) = coupled_gaussians(n, m, seed(t));
        let r = unit_rows_correlation(n, m, seed(t)).sub(&g.matmul_transpose(&h).scale(1.0 / m as f64));
        let bound = tau_gap_from(&g, &h).bound;
        assert!(bound >= 0.0);
        let mut stream = seed(1000 + t).stream();
        for k in 0..100 {
            let a = if k % 2 == 0 {
                let alpha: Vec<f64> = (0..n).map(|_| stream.sign()).collect();
                let beta: Vec<f64> = (0..n).map(|_| stream.sign()).collect();
                Matrix::from_fn(n, n, |i, j| alpha[i] * beta[j])
            } else {
                stream.gaussian(n, n)
            };
            let eps = infty_to_one_exact(&a).unwrap().0;
            assert!(r.inner(&a) <= bound * eps * (1.0 + 1e-12));
        }
    }
}

#[test]
fn duality_sandwich_and_grothendieck_on_500_inputs() {
    for t in 0..500u64 {
        let a = gaussian(6, 6, seed(10_000 + t));
        let up = classical_upper_bound(&a, 4000, 1e-9).unwrap();
        let w = up.decomposition.weight_sum();
        assert!(up.decomposition.certificate(&a).verify().is_ok());
        let bf = bell_functional_from_svd(&a).unwrap();
        let lo = classical_lower_bound(&a, &bf).unwrap();
        let random = BellFunctional::exact(gaussian(6, 6, seed(20_000 + t))).unwrap();
        let lo2 = classical_lower_bound(&a, &random).unwrap();
        assert!(lo <= w * (1.0 + 1e-9) && lo2 <= w * (1.0 + 1e-9), "trial {t}: {lo} {lo2} {w}");
        assert!(up.dual_lower <= w * (1.0 + 1e-9));
        assert!(up.certified);
        let b = gamma2_bracket(&a).unwrap();
        assert!(b.lower <= w * (1.0 + 1e-9));
        assert!(w <= KG.kg_upper * b.upper + 1e-9);
    }
}

#[test]
fn oracle_inside_bracket_on_bi_invariant() {
    for t in 0..25u64 {
        let mut stream = seed(30_000 + t).stream();
        let spectrum: Vec<f64> = (0..8).map(|_| stream.uniform() * 3.0).collect();
        let a = bi_invariant(&spectrum, seed(t)).unwrap();
        let b = gamma2_bracket(&a).unwrap();
        let g = gamma2_oracle(&a, 1e-8).unwrap();
        assert!(g >= b.lower - 1e-6 && g <= b.upper + 1e-6, "{} <= {g} <= {}", b.lower, b.upper);
    }
}

#[test]
fn tampered_certificates_fail() {
    let c = chsh();
    let up = classical_upper_bound(&c, 16, 1e-9).unwrap();
    let Certificate::Decomposition { target, mut weights, atoms, residual, value } = up.decomposition.certificate(&c)
    else {
        panic!("decomposition certificate expected");
    };
    weights[0] *= 1.5;
    let bad = Certificate::Decomposition { target, weights, atoms, residual, value };
    assert!(bad.verify().is_err());

    let good = Certificate::SignPairValue {
        matrix: Matrix::identity(5),
        pair: SignPair::ones(5, 5),
        value: 5.0,
    };
    assert_eq!(good.verify().unwrap(), 5.0);
    let wrong = Certificate::SignPairValue {
        matrix: Matrix::identity(5),
        pair: SignPair::ones(5, 5),
        value: 5.5,
    };
    assert!(wrong.verify().is_err());
}

fn small_square() -> impl Strategy<Value = Matrix> {
    (2usize..6).prop_flat_map(|n| {
        prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap())
    })
}

fn signed_permutation(n: usize, s: u64) -> Matrix {
    let mut stream = seed(s).stream();
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, (stream.next_u64() % (i as u64 + 1)) as usize);
    }
    let signs: Vec<f64> = (0..n).map(|_| stream.sign()).collect();
    Matrix::from_fn(n, n, |i, j| if perm[i] == j { signs[i] } else { 0.0 })
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norms_are_one_homogeneous(a in small_square(), c in 0.01f64..100.0) {
        prop_assume!(a.max_abs() > 1e-3);
        let ca = a.scale(c);
        prop_assert!(rel(infty_to_one_exact(&ca).unwrap().0, c * infty_to_one_exact(&a).unwrap().0) < 1e-12);
        prop_assert!(rel(trace_norm(&ca).unwrap(), c * trace_norm(&a).unwrap()) < 1e-12);
        prop_assert!(rel(operator_norm(&ca).unwrap(), c * operator_norm(&a).unwrap()) < 1e-12);
        let (b, cb) = (gamma2_bracket(&a).unwrap(), gamma2_bracket(&ca).unwrap());
        prop_assert!(rel(cb.lower, c * b.lower) < 1e-12);
        prop_assert!(rel(cb.upper, c * b.upper) < 1e-9);
        let w = classical_upper_bound(&a, 4000, 1e-10).unwrap().decomposition.weight_sum();
        let cw = classical_upper_bound(&ca, 4000, 1e-10).unwrap().decomposition.weight_sum();
        prop_assert!(rel(cw, c * w) < 1e-8);
    }

    #[test]
    fn norms_ignore_transpose_permutation_and_signs(a in small_square(), s in 0u64..10_000) {
        prop_assume!(a.max_abs() > 1e-3);
        let n = a.rows();
        let (p, q) = (signed_permutation(n, s), signed_permutation(n, s + 1));
        let moved = p.matmul(&a).matmul(&q);
        for b in [a.transpose(), moved] {
            prop_assert!(rel(infty_to_one_exact(&b).unwrap().0, infty_to_one_exact(&a).unwrap().0) < 1e-12);
            prop_assert!(rel(trace_norm(&b).unwrap(), trace_norm(&a).unwrap()) < 1e-12);
            prop_assert!(rel(gamma2_bracket(&b).unwrap().lower, gamma2_bracket(&a).unwrap().lower) < 1e-12);
            let wa = classical_upper_bound(&a, 4000, 1e-10).unwrap().decomposition.weight_sum();
            let wb = classical_upper_bound(&b, 4000, 1e-10).unwrap().decomposition.weight_sum();
            prop_assert!(rel(wa, wb) < 1e-8);
        }
        if n <= 5 {
            let ga = gamma2_oracle(&a, 1e-9).unwrap();
            let gb = gamma2_oracle(&a.transpose(), 1e-9).unwrap();
            prop_assert!((ga - gb).abs() <= 1e-6 * ga.max(1.0));
        }
    }

    #[test]
    fn orthogonal_injective_norm_at_most_n(n in 1usize..14, s in 0u64..10_000) {
        let o = haar_orthogonal(n, seed(s)).unwrap();
        prop_assert!(infty_to_one_exact(&o).unwrap().0 <= n as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn sign_pair_value_matches_its_matrix(a in small_square(), s in 0u64..1000) {
        let n = a.rows();
        let mut stream = seed(s).stream();
        let alpha: Vec<i8> = (0..n).map(|_| stream.sign() as i8).collect();
        let beta: Vec<i8> = (0..n).map(|_| stream.sign() as i8).collect();
        let pair: SignPair = serde_json::from_value(serde_json::json!({"alpha": alpha, "beta": beta})).unwrap();
        let direct = a.inner(&pair.to_matrix());
        prop_assert!((pair.value(&a) - direct).abs() <= 1e-12 * a.max_abs() * (n * n) as f64);
        prop_assert!(pair.value(&a) <= infty_to_one_exact(&a).unwrap().0 + 1e-12);
    }

    #[test]
    fn bell_lower_bound_below_gamma2_times_kg(a in small_square()) {
        prop_assume!(a.max_abs() > 1e-3);
        let bf = bell_functional_from_svd(&a).unwrap();
        let lo = classical_lower_bound(&a, &bf).unwrap();
        let b = gamma2_bracket(&a).unwrap();
        prop_assert!(lo <= KG.kg_upper * b.upper * (1.0 + 1e-12));
        prop_assert!(b.lower <= b.upper * (1.0 + 1e-12));
        let t = svd(&a).unwrap();
        prop_assert!((t.sigma.iter().sum::<f64>() - a.inner(&bf.a)).abs() <= 1e-9 * t.sigma[0] * a.rows() as f64);
    }
}
