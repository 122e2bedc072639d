use qcorr::matrix::{flatness_ratio, singular_values, trace_norm, Matrix};
use qcorr::norms::tau_gap_from;
use qcorr::sample::{
    bi_invariant, coupled_gaussians, gaussian, gaussian_product, haar_orthogonal, uniform_sphere,
    unit_rows_correlation, EnsembleSpec, SeedSpec,
};
use qcorr::spectral::empirical_spectrum;

fn seed(t: u64) -> SeedSpec {
    SeedSpec::new(11, t)
}

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn same_seed_same_matrix() {
    let specs = [
        EnsembleSpec::Gaussian { n: 5 },
        EnsembleSpec::HaarOrthogonal { n: 5 },
        EnsembleSpec::BiInvariant { n: 3, spectrum: vec![3.0, 1.0, 0.5] },
        EnsembleSpec::GaussianProduct { n: 4, m: 2 },
        EnsembleSpec::UnitRowsCorrelation { n: 4, m: 3 },
    ];
    for spec in specs {
        let a = spec.sample(seed(3)).unwrap();
        let b = spec.sample(seed(3)).unwrap();
        assert_eq!(a.data(), b.data());
        assert_ne!(a.data(), spec.sample(seed(4)).unwrap().data());
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<EnsembleSpec>(&json).unwrap(), spec);
    }
    assert!(serde_json::from_str::<EnsembleSpec>(r#"{"kind":"gaussian","n":3,"extra":1}"#).is_err());
    assert!(EnsembleSpec::BiInvariant { n: 3, spectrum: vec![1.0] }.sample(seed(0)).is_err());
}

#[test]
fn haar_left_invariance_ks() {
    // P: a fixed signed permutation
    let n = 4;
    let perm = [2usize, 0, 3, 1];
    let signs = [-1.0, 1.0, -1.0, 1.0];
    let p = Matrix::from_fn(n, n, |i, j| if perm[i] == j { signs[i] } else { 0.0 });
    let draws = 10_000u64;
    let plain: Vec<f64> = (0..draws).map(|t| haar_orthogonal(n, seed(t)).unwrap().get(0, 0)).collect();
    let rotated: Vec<f64> = (0..draws)
        .map(|t| p.matmul(&haar_orthogonal(n, seed(draws + t)).unwrap()).get(0, 0))
        .collect();
    // 1% critical value: 1.628·√(2/N)
    let critical = 1.628 * (2.0 / draws as f64).sqrt();
    let d = ks_two_sample(plain, rotated);
    assert!(d < critical, "KS {d} vs {critical}");
}

#[test]
fn haar_one_by_one_is_a_fair_sign() {
    let plus = (0..10_000u64)
        .filter(|&t| haar_orthogonal(1, seed(t)).unwrap().get(0, 0) > 0.0)
        .count();
    assert!((plus as f64 / 1e4 - 0.5).abs() < 0.01);
}

#[test]
fn bi_invariant_keeps_its_spectrum() {
    let s = [4.0, 0.5, 2.0, 1.0, 0.0];
    let a = bi_invariant(&s, seed(9)).unwrap();
    let sv = singular_values(&a).unwrap();
    for (x, y) in sv.iter().zip([4.0, 2.0, 1.0, 0.5, 0.0]) {
        assert!((x - y).abs() < 1e-9);
    }
    let expected = 5.0 * 4.0 / 7.5;
    assert!((flatness_ratio(&a).unwrap() - expected).abs() < 1e-9);
    let o = bi_invariant(&[1.0; 6], seed(2)).unwrap();
    assert!((trace_norm(&o).unwrap() - 6.0).abs() < 1e-9);
    assert!(bi_invariant(&[1.0, -1.0], seed(0)).is_err());
}

#[test]
fn product_entries_mean_and_variance() {
    let (n, m) = (4, 8);
    let mut xs = Vec::new();
    for t in 0..10_000u64 {
        xs.extend_from_slice(gaussian_product(n, m, seed(t)).data());
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.05, "{mean}");
    assert!((var / m as f64 - 1.0).abs() < 0.03, "{var}");
}

#[test]
fn product_spectrum_mean_is_one() {
    let e = empirical_spectrum(200, 100, seed(1)).unwrap();
    assert!((e.mean() - 1.0).abs() < 0.05);
    assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10));
}

#[test]
fn unit_row_correlations() {
    let tau = unit_rows_correlation(6, 1, seed(0));
    assert!(tau.data().iter().all(|&x| x == 1.0 || x == -1.0));
    let mut sq = 0.0;
    let mut count = 0;
    for t in 0..1000u64 {
        let tau = unit_rows_correlation(10, 10, seed(t));
        assert!(tau.max_abs() <= 1.0 + 1e-12);
        sq += tau.data().iter().map(|x| x * x).sum::<f64>();
        count += 100;
    }
    assert!((sq / count as f64 - 0.1).abs() < 0.005);
}

#[test]
fn unit_rows_share_draws_with_the_product() {
    // |τ_ij − (GHᵗ/m)_ij| ≤ ‖τ − GHᵗ/m‖_π ≤ tau_gap bound, with a = e_i e_jᵗ as the functional
    for t in 0..20u64 {
        let (n, m) = (8, 50);
        let tau = unit_rows_correlation(n, m, seed(t));
        let prod = gaussian_product(n, m, seed(t)).scale(1.0 / m as f64);
        let (g, h) = coupled_gaussians(n, m, seed(t));
        assert_eq!(g.matmul_transpose(&h).scale(1.0 / m as f64), prod);
        let bound = tau_gap_from(&g, &h).bound;
        assert!(tau.sub(&prod).max_abs() <= bound);
    }
}

#[test]
fn sphere_moments() {
    let n = 400;
    let mut l1 = 0.0;
    let mut sum = 0.0;
    let draws = 400;
    for t in 0..draws {
        let psi = uniform_sphere(n, seed(t));
        let norm: f64 = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        l1 += psi.iter().map(|x| x.abs()).sum::<f64>() / (n as f64).sqrt();
        sum += psi.iter().sum::<f64>();
    }
    assert!((l1 / draws as f64 - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01);
    // Σψ_i has variance 1 per draw
    assert!((sum / draws as f64).abs() < 4.0 / (draws as f64).sqrt());
}

#[test]
fn gaussian_entry_moments() {
    let g = gaussian(1000, 1000, seed(5));
    let xs = g.data();
    let mean = xs.iter().sum::<f64>() / 1e6;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 1e6;
    assert!(mean.abs() < 0.01 && (var - 1.0).abs() < 0.01);
}
