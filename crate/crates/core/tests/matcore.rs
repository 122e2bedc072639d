use proptest::prelude::*;
use qcorr::matrix::{flatness_ratio, operator_norm, singular_values, svd, trace_norm, Matrix};
use qcorr::sample::{gaussian, haar_orthogonal, SeedSpec};

/// Textbook one-sided Jacobi: rotate column pairs of `A` until they are
/// mutually orthogonal; the column norms are then the singular values.
fn jacobi_singular_values(a: &Matrix) -> Vec<f64> {
    let n = a.cols();
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    for _ in 0..60 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..a.rows() {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    cols[p][i] = c * x - s * y;
                    cols[q][i] = s * x + c * y;
                }
            }
        }
        if off < 1e-14 {
            break;
        }
    }
    let mut s: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn seed(t: u64) -> SeedSpec {
    SeedSpec::new(0x5eed, t)
}

#[test]
fn svd_small_cases() {
    let s = svd(&Matrix::identity(3)).unwrap();
    assert_eq!(s.sigma, vec![1.0, 1.0, 1.0]);
    let s = svd(&Matrix::diag(&[3.0, -4.0])).unwrap();
    assert!((s.sigma[0] - 4.0).abs() < 1e-14 && (s.sigma[1] - 3.0).abs() < 1e-14);
}

#[test]
fn svd_gaussian_8_matches_jacobi_reference() {
    let g = gaussian(8, 8, seed(1));
    let t = svd(&g).unwrap();
    assert!(t.reconstruct().sub(&g).frobenius() / g.frobenius() < 1e-10);
    let reference = jacobi_singular_values(&g);
    for (a, b) in t.sigma.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12 * reference[0], "{a} vs {b}");
    }
}

#[test]
fn svd_reconstruction_on_1000_inputs() {
    for k in 0..1000u64 {
        let n = 2 + (k as usize % 63);
        let g = gaussian(n, n, seed(1000 + k));
        let t = svd(&g).unwrap();
        let r = t.reconstruct().sub(&g).frobenius() / g.frobenius();
        assert!(r <= 1e-9, "n={n} residual {r}");
    }
}

#[test]
fn low_rank_inputs_match_jacobi_reference() {
    // products G·Hᵗ with inner dimension k < n are exactly rank k
    for k in 0..200u64 {
        let (n, r) = (10 + (k as usize % 11), 1 + (k as usize % 4));
        let g = gaussian(n, r, seed(5000 + k));
        let h = gaussian(n, r, seed(9000 + k));
        let a = g.matmul_transpose(&h);
        let t = svd(&a).unwrap();
        assert!(t.reconstruct().sub(&a).frobenius() / a.frobenius() < 1e-9);
        let reference = jacobi_singular_values(&a);
        let fast = singular_values(&a).unwrap();
        for ((x, y), z) in t.sigma.iter().zip(&fast).zip(&reference) {
            assert!((x - z).abs() < 1e-10 * reference[0] && (y - z).abs() < 1e-10 * reference[0]);
        }
    }
}

#[test]
fn norms_of_identity_and_orthogonal() {
    for n in [1, 4, 9] {
        assert!((trace_norm(&Matrix::identity(n)).unwrap() - n as f64).abs() < 1e-12);
        assert!((operator_norm(&Matrix::identity(n)).unwrap() - 1.0).abs() < 1e-12);
        let o = haar_orthogonal(n, seed(n as u64)).unwrap();
        assert!((trace_norm(&o).unwrap() - n as f64).abs() < 1e-10);
        assert!((flatness_ratio(&o).unwrap() - 1.0).abs() < 1e-10);
    }
    assert_eq!(operator_norm(&Matrix::zeros(3, 3)).unwrap(), 0.0);
}

#[test]
fn flatness_of_spike_is_n() {
    let mut d = vec![0.0; 7];
    d[0] = 1.0;
    assert!((flatness_ratio(&Matrix::diag(&d)).unwrap() - 7.0).abs() < 1e-12);
}

#[test]
fn gaussian_300_flatness() {
    let n = 300;
    let t = gaussian(n, n, seed(77)).scale(1.0 / (n as f64).sqrt());
    let f = flatness_ratio(&t).unwrap();
    assert!((f - 2.0 / (8.0 / (3.0 * std::f64::consts::PI))).abs() < 0.05, "{f}");
}

fn square() -> impl Strategy<Value = Matrix> {
    (1usize..8).prop_flat_map(|n| {
        prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |d| Matrix::new(n, n, d).unwrap())
    })
}

proptest! {
    #[test]
    fn duality_with_orthogonal(a in square(), s in 0u64..1000) {
        let o = haar_orthogonal(a.rows(), seed(s)).unwrap();
        let pairing = a.matmul_transpose(&o).trace();
        prop_assert!(pairing.abs() <= trace_norm(&a).unwrap() * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn operator_trace_sandwich(a in square()) {
        let n = a.rows() as f64;
        let op = operator_norm(&a).unwrap();
        let tr = trace_norm(&a).unwrap();
        prop_assert!(op <= tr * (1.0 + 1e-12) + 1e-12);
        prop_assert!(tr <= n * op * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn svd_reconstructs_and_is_orthogonal(a in square()) {
        prop_assume!(!a.is_zero());
        let t = svd(&a).unwrap();
        prop_assert!(t.reconstruct().sub(&a).frobenius() <= 1e-9 * a.frobenius());
        prop_assert!(t.u.orthogonality_residual() <= 1e-9);
        prop_assert!(t.v.orthogonality_residual() <= 1e-9);
        prop_assert!(t.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn csv_round_trip(a in square()) {
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        prop_assert_eq!(Matrix::read_csv(buf.as_slice()).unwrap(), a);
    }
}
