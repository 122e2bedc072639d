use num_complex::Complex64;
use qcorr::sample::SeedSpec;
use qcorr::spectral::{
    alpha_threshold, alpha_threshold_with, c_alpha, cubic_residual, density, empirical_spectrum, ks_distance,
    stieltjes, support_upper, EmpiricalSpectrum, SpectralError, DEFAULT_GRID_POINTS,
};

const ALPHAS: [f64; 6] = [0.05, 0.1269, 0.5, 1.0, 4.0, 16.0];

fn seed(t: u64) -> SeedSpec {
    SeedSpec::new(0x5bec, t)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let k = xs.len();
    if k % 2 == 1 {
        xs[k / 2]
    } else {
        0.5 * (xs[k / 2 - 1] + xs[k / 2])
    }
}

#[test]
fn stieltjes_far_from_the_support() {
    for alpha in ALPHAS {
        let z = Complex64::new(0.0, 100.0);
        let s = stieltjes(alpha, z).unwrap();
        assert!((s + 1.0 / z).norm() <= 1e-3, "alpha {alpha}");
    }
}

#[test]
fn stieltjes_solves_the_cubic_and_is_herglotz() {
    for alpha in ALPHAS {
        for re in [-3.0, -0.1, 0.0, 0.05, 0.5, 1.0, 2.5, 6.0, 12.0, 40.0] {
            for im in [1e-6, 1e-3, 0.1, 1.0, 10.0] {
                let z = Complex64::new(re, im);
                let s = stieltjes(alpha, z).unwrap();
                assert!(s.im > 0.0, "alpha {alpha} z {z}");
                assert!(cubic_residual(alpha, z, s) <= 1e-12, "alpha {alpha} z {z}");
            }
        }
    }
    assert!(stieltjes(1.0, Complex64::new(1.0, 1e-6)).unwrap().im > 0.0);
    assert!(matches!(
        stieltjes(1.0, Complex64::new(1.0, -1.0)),
        Err(SpectralError::LowerHalfPlane { .. })
    ));
    assert!(matches!(stieltjes(0.0, Complex64::new(1.0, 1.0)), Err(SpectralError::InvalidAlpha(_))));
}

#[test]
fn stieltjes_matches_the_tabulated_density() {
    // s(z) = ∫ f(x)/(x − z) dx + atom/(0 − z), trapezoid on the law's own grid
    for alpha in [0.5, 1.0, 4.0] {
        let law = density(alpha, DEFAULT_GRID_POINTS).unwrap();
        for z in [Complex64::new(1.0, 1.0), Complex64::new(-1.0, 0.5), Complex64::new(8.0, 2.0)] {
            let mut acc = Complex64::new(law.zero_atom, 0.0) / (-z);
            for k in 1..law.grid.len() {
                let (x0, x1) = (law.grid[k - 1], law.grid[k]);
                let f0 = law.density[k - 1] / (x0 - z);
                let f1 = law.density[k] / (x1 - z);
                acc += 0.5 * (f0 + f1) * (x1 - x0);
            }
            let s = stieltjes(alpha, z).unwrap();
            assert!((s - acc).norm() <= 5e-3, "alpha {alpha} z {z}: {s} vs {acc}");
        }
    }
}

#[test]
fn support_edge_at_one() {
    // at α = 1 the discriminant of the real cubic is x³(4x − 27) up to a
    // positive factor, so the edge sits at 27/4
    let law = density(1.0, DEFAULT_GRID_POINTS).unwrap();
    let step = law.grid[law.grid.len() - 1] - law.grid[law.grid.len() - 2];
    assert!((law.support_upper - 6.75).abs() <= step);
    assert!((support_upper(1.0).unwrap() - 6.75).abs() <= 1e-9);
}

#[test]
fn density_invariants() {
    for alpha in ALPHAS {
        let law = density(alpha, DEFAULT_GRID_POINTS).unwrap();
        assert!((law.mass - 1.0).abs() <= 1e-3, "mass {} at {alpha}", law.mass);
        assert!((law.first_moment - 1.0).abs() <= 1e-3, "moment {} at {alpha}", law.first_moment);
        assert!(law.density.iter().all(|&f| f >= 0.0));
        assert!(law.cdf.windows(2).all(|w| w[0] <= w[1]));
        assert!((law.zero_atom - (1.0 - alpha).max(0.0)).abs() < 1e-15);
        assert!(law.c_alpha <= 1.0 + 1e-3, "Jensen at {alpha}");
        assert!(law.c_alpha > 0.0);
    }
    assert!(matches!(density(1.0, 50), Err(SpectralError::GridTooSmall(50))));
}

#[test]
fn large_alpha_approaches_single_gaussian_constant() {
    let target = 8.0 / (3.0 * std::f64::consts::PI);
    assert!((c_alpha(16.0).unwrap() - target).abs() <= 0.02);
}

#[test]
fn c_one_matches_monte_carlo() {
    let mc: f64 = (0..20u64).map(|t| empirical_spectrum(500, 500, seed(t)).unwrap().mean_sqrt()).sum::<f64>() / 20.0;
    let quad = c_alpha(1.0).unwrap();
    assert!((mc - quad).abs() <= 0.01, "{mc} vs {quad}");
}

#[test]
fn first_moment_matches_monte_carlo() {
    for (n, m) in [(200, 20), (200, 100), (100, 400)] {
        let mc: f64 = (0..10u64).map(|t| empirical_spectrum(n, m, seed(t)).unwrap().mean()).sum::<f64>() / 10.0;
        assert!((mc - 1.0).abs() <= 0.03, "{n}x{m}: {mc}");
    }
}

#[test]
fn threshold_examples() {
    let g = (16.0f64 / 15.0).sqrt();
    let a0 = alpha_threshold(g).unwrap();
    assert!((a0 - 0.1269).abs() <= 1e-3, "{a0}");
    assert!(alpha_threshold(2.0 * g).unwrap() > a0);
    let finer = alpha_threshold_with(g, 2 * DEFAULT_GRID_POINTS, 1e-5).unwrap();
    assert!((finer - a0).abs() <= 2e-4, "{finer} vs {a0}");
    // the solver's own C_α fed back as the constant
    for alpha in [0.3f64, 0.7, 1.0] {
        let g = alpha.sqrt() / c_alpha(alpha).unwrap();
        let root = alpha_threshold(g).unwrap();
        assert!((root - alpha).abs() <= 1e-3, "{root} vs {alpha}");
    }
    assert!(matches!(alpha_threshold(0.0), Err(SpectralError::InvalidGap(_))));
    assert!(matches!(alpha_threshold(0.5), Err(SpectralError::NoSignChange { .. })));
}

#[test]
fn ks_examples() {
    let law = density(0.5, DEFAULT_GRID_POINTS).unwrap();
    let d = ks_distance(&empirical_spectrum(400, 200, seed(0)).unwrap(), &law).unwrap();
    assert!(d <= 0.05, "{d}");

    let small: Vec<f64> = (0..20u64)
        .map(|t| ks_distance(&empirical_spectrum(100, 50, seed(t)).unwrap(), &law).unwrap())
        .collect();
    let large: Vec<f64> = (0..20u64)
        .map(|t| ks_distance(&empirical_spectrum(400, 200, seed(100 + t)).unwrap(), &law).unwrap())
        .collect();
    assert!(small.iter().chain(&large).all(|&d| (0.0..=1.0).contains(&d)));
    assert!(median(large) < median(small));

    // the law against its own quantiles
    let n = 1000;
    let eigenvalues: Vec<f64> = (0..n).map(|i| law.quantile((i as f64 + 0.5) / n as f64)).collect();
    let own = EmpiricalSpectrum { eigenvalues, n, m: n / 2 };
    assert!(ks_distance(&own, &law).unwrap() <= 1.0 / n as f64 + 1e-3);

    let wrong = empirical_spectrum(40, 40, seed(0)).unwrap();
    assert!(matches!(ks_distance(&wrong, &law), Err(SpectralError::AlphaMismatch { .. })));
}

#[test]
fn empirical_spectrum_is_psd() {
    let e = empirical_spectrum(200, 100, seed(3)).unwrap();
    assert_eq!(e.eigenvalues.len(), 200);
    assert!(e.eigenvalues.iter().all(|&l| l >= -1e-10));
    assert!((e.mean() - 1.0).abs() <= 0.05);
    // rank m: n − m exact zeros
    assert_eq!(e.eigenvalues.iter().filter(|&&l| l == 0.0).count(), 100);
}
