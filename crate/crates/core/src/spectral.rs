//! The limiting eigenvalue law of `GHᵗHGᵗ/(nm)` for independent `n×m` Gaussians
//! `G`, `H` with `m/n → α`.
//!
//! The law is pinned down through its Stieltjes transform `s(z) = ∫ (x − z)⁻¹ dF(x)`,
//! a root of the cubic
//!
//! ```text
//! z² s³ − z (α − 1) s² − α z s − α = 0.
//! ```
//!
//! The density comes from Stieltjes inversion `f(x) = Im s(x + iε) / π`. For
//! `α < 1` the matrix has rank `m < n`, which puts an atom of mass `1 − α` at zero.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{singular_values, MatrixError};
use crate::sample::{gaussian_product, SeedSpec};

pub const DEFAULT_GRID_POINTS: usize = 4000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("Im z must be positive, got z = {re} + {im}i")]
    LowerHalfPlane { re: f64, im: f64 },
    #[error("no admissible root with Im s > 0; roots {roots:?}")]
    RootSelection { roots: [(f64, f64); 3] },
    #[error("grid_points must be at least 100, got {0}")]
    GridTooSmall(usize),
    #[error("normalization failed: total mass {mass}, first moment {first_moment}")]
    Normalization { mass: f64, first_moment: f64 },
    #[error("no sign change of the threshold equation on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("law has alpha {law} but the spectrum has m/n = {empirical}")]
    AlphaMismatch { law: f64, empirical: f64 },
    #[error("gap constant must be positive, got {0}")]
    InvalidGap(f64),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn check_alpha(alpha: f64) -> Result<(), SpectralError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(SpectralError::InvalidAlpha(alpha))
    }
}

/// The three roots of the cubic in `s` at `z`, polished by Newton steps.
pub fn cubic_roots(alpha: f64, z: Complex64) -> [Complex64; 3] {
    // monic form s³ + a s² + b s + c
    let a = -(alpha - 1.0) / z;
    let b = -alpha / z;
    let c = -alpha / (z * z);
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let (c1, c2) = (-q / 2.0 + disc, -q / 2.0 - disc);
    let big = if c1.norm() >= c2.norm() { c1 } else { c2 };
    let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut roots = [Complex64::new(0.0, 0.0); 3];
    if big.norm() == 0.0 {
        roots = [-a / 3.0; 3];
    } else {
        let cr = big.cbrt();
        let mut rot = Complex64::new(1.0, 0.0);
        for r in roots.iter_mut() {
            let u = cr * rot;
            *r = u - p / (3.0 * u) - a / 3.0;
            rot *= w;
        }
    }
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + a) * *r + b) * *r + c;
            let df = (3.0 * *r + 2.0 * a) * *r + b;
            if df.norm() == 0.0 {
                break;
            }
            let next = *r - f / df;
            if next.is_finite() {
                *r = next;
            }
        }
    }
    roots
}

/// Residual of the defining relation `−zs − zs²(α − 1 − zs)/α = 1`, relative to
/// the size of its terms before cancellation. Near the atom at zero `α − 1 − zs`
/// cancels to rounding level while `zs²` is huge, so the factor is bounded by
/// `|α − 1| + |zs|` rather than its computed value.
pub fn cubic_residual(alpha: f64, z: Complex64, s: Complex64) -> f64 {
    let zs = z * s;
    let t1 = -zs;
    let t2 = -zs * s * (alpha - 1.0 - zs) / alpha;
    let scale = 1.0 + zs.norm() + (zs * s).norm() * ((alpha - 1.0).abs() + zs.norm()) / alpha;
    (t1 + t2 - 1.0).norm() / scale
}

/// Generous bound on the support of the law, used only to bound scans.
pub fn support_overestimate(alpha: f64) -> f64 {
    10.0 * (1.0 + 1.0 / alpha.sqrt()).powi(2)
}

/// The Stieltjes transform `s(z)` for `Im z > 0`.
///
/// Of the roots with `Im s > 0`, only those obeying `|s| ≤ 1/dist(z, supp F)`
/// can be transforms of a probability measure. A measure on `[0, L]` also has
/// `Im(zs) ≥ 0` and `Im((z − L)s) ≤ 0`, which separates the branches left of
/// the support. Among the survivors the largest `Im s` is taken.
pub fn stieltjes(alpha: f64, z: Complex64) -> Result<Complex64, SpectralError> {
    check_alpha(alpha)?;
    if !(z.im > 0.0) {
        return Err(SpectralError::LowerHalfPlane { re: z.re, im: z.im });
    }
    let roots = cubic_roots(alpha, z);
    let top = support_overestimate(alpha);
    let nearest = z.re.clamp(0.0, top);
    let bound = 1.0 / Complex64::new(z.re - nearest, z.im).norm();
    roots
        .iter()
        .filter(|&&s| {
            let slack = 1e-9 * (z.norm() + top) * s.norm();
            s.im > 0.0
                && s.norm() <= bound * (1.0 + 1e-9)
                && (z * s).im >= -slack
                && ((z - top) * s).im <= slack
        })
        .max_by(|x, y| x.im.total_cmp(&y.im))
        .copied()
        .ok_or(SpectralError::RootSelection {
            roots: roots.map(|r| (r.re, r.im)),
        })
}

/// True when the real cubic at `x > 0` has a complex-conjugate root pair,
/// i.e. `x` lies inside the support of the continuous part.
pub fn in_support(alpha: f64, x: f64) -> bool {
    if x <= 0.0 {
        return false;
    }
    let (a, b, c, d) = (x * x, -x * (alpha - 1.0), -alpha * x, -alpha);
    let disc = 18.0 * a * b * c * d - 4.0 * b.powi(3) * d + b * b * c * c
        - 4.0 * a * c.powi(3)
        - 27.0 * a * a * d * d;
    disc < 0.0
}

/// Upper edge of the support: the largest `x` with a complex root pair.
pub fn support_upper(alpha: f64) -> Result<f64, SpectralError> {
    check_alpha(alpha)?;
    let top = support_overestimate(alpha);
    let steps = 200_000;
    let h = top / steps as f64;
    let mut x = top;
    while x > 0.0 && !in_support(alpha, x) {
        x -= h;
    }
    if x <= 0.0 {
        return Err(SpectralError::Normalization {
            mass: 0.0,
            first_moment: 0.0,
        });
    }
    let (mut lo, mut hi) = (x, x + h);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if in_support(alpha, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(lo)
}

/// The density at `x`, from `s(x + iε)` with `ε = min(1e-6, step/10, 1e-3·x)`.
/// Zero off the support, which removes the `O(ε)` tail outside it.
pub fn density_at(alpha: f64, x: f64, step: f64) -> Result<f64, SpectralError> {
    if !in_support(alpha, x) {
        return Ok(0.0);
    }
    let eps = 1e-6f64.min(step / 10.0).min(1e-3 * x);
    Ok((stieltjes(alpha, Complex64::new(x, eps))?.im / std::f64::consts::PI).max(0.0))
}

/// The discretized law at ratio `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLaw {
    pub alpha: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    /// `F(x)` at each grid point, including the atom.
    pub cdf: Vec<f64>,
    /// Mass `max(0, 1 − α)` at zero.
    pub zero_atom: f64,
    pub support_upper: f64,
    /// `∫ √t dF(t)`.
    pub c_alpha: f64,
    pub mass: f64,
    pub first_moment: f64,
}

/// Tabulates the law on `grid_points` abscissae: a graded sub-grid
/// `x = 0.02L(k/K)⁴` on the lowest 2% of `[0, L]` for the hard edge at zero,
/// then a uniform grid. Integrals use Simpson's rule, in `u = (x/0.02L)^{1/4}`
/// on the graded piece.
pub fn density(alpha: f64, grid_points: usize) -> Result<SpectralLaw, SpectralError> {
    check_alpha(alpha)?;
    if grid_points < 100 {
        return Err(SpectralError::GridTooSmall(grid_points));
    }
    let upper = support_upper(alpha)?;
    let split = 0.02 * upper;
    let kg = (grid_points / 4) & !1;
    let ku = (grid_points - kg) & !1;

    let mut grid = Vec::with_capacity(kg + ku + 1);
    let mut density = Vec::with_capacity(kg + ku + 1);
    // graded piece, with weights w.r.t. u for Simpson
    let mut jac = Vec::with_capacity(kg + 1);
    let du = 1.0 / kg as f64;
    for k in 0..=kg {
        let u = k as f64 * du;
        let x = split * u.powi(4);
        let step = 4.0 * split * u.powi(3) * du;
        grid.push(x);
        density.push(density_at(alpha, x, step.max(1e-300))?);
        jac.push(4.0 * split * u.powi(3));
    }
    let hx = (upper - split) / ku as f64;
    for k in 1..=ku {
        let x = split + k as f64 * hx;
        grid.push(x);
        density.push(density_at(alpha, x, hx)?);
    }

    let simpson = |vals: &[f64], h: f64| -> f64 {
        let last = vals.len() - 1;
        let mut acc = vals[0] + vals[last];
        for (i, v) in vals.iter().enumerate().take(last).skip(1) {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * v;
        }
        acc * h / 3.0
    };
    let integrate = |g: &dyn Fn(f64) -> f64| -> f64 {
        let lower: Vec<f64> = (0..=kg).map(|k| g(grid[k]) * density[k] * jac[k]).collect();
        let upper_vals: Vec<f64> = (kg..=kg + ku).map(|k| g(grid[k]) * density[k]).collect();
        simpson(&lower, du) + simpson(&upper_vals, hx)
    };
    let zero_atom = (1.0 - alpha).max(0.0);
    let mass = zero_atom + integrate(&|_| 1.0);
    let first_moment = integrate(&|x| x);
    let c_alpha = integrate(&|x| x.sqrt());
    if (mass - 1.0).abs() > 1e-3 || (first_moment - 1.0).abs() > 1e-3 {
        return Err(SpectralError::Normalization { mass, first_moment });
    }

    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = zero_atom;
    cdf.push(acc);
    for k in 1..grid.len() {
        let piece = if k <= kg {
            0.5 * (density[k - 1] * jac[k - 1] + density[k] * jac[k]) * du
        } else {
            0.5 * (density[k - 1] + density[k]) * (grid[k] - grid[k - 1])
        };
        acc += piece;
        cdf.push(acc.min(1.0));
    }
    Ok(SpectralLaw {
        alpha,
        grid,
        density,
        cdf,
        zero_atom,
        support_upper: upper,
        c_alpha,
        mass,
        first_moment,
    })
}

impl SpectralLaw {
    /// `F(x)`, linearly interpolated between grid points.
    pub fn cdf_at(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let last = self.grid.len() - 1;
        if x >= self.grid[last] {
            return 1.0;
        }
        let k = self.grid.partition_point(|&g| g <= x).max(1);
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
        (self.cdf[k - 1] + t * (self.cdf[k] - self.cdf[k - 1])).clamp(0.0, 1.0)
    }

    /// Smallest grid-interpolated `x` with `F(x) ≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        if p <= self.zero_atom {
            return 0.0;
        }
        let k = self.cdf.partition_point(|&c| c < p);
        if k >= self.grid.len() {
            return self.support_upper;
        }
        let (c0, c1) = (self.cdf[k - 1], self.cdf[k]);
        let t = if c1 > c0 { (p - c0) / (c1 - c0) } else { 1.0 };
        self.grid[k - 1] + t * (self.grid[k] - self.grid[k - 1])
    }

    /// Writes `x,density` rows with a header.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), MatrixError> {
        let mut w = csv::Writer::from_writer(writer);
        let err = |e: csv::Error| MatrixError::Csv(e.to_string());
        w.write_record(["x", "density"]).map_err(err)?;
        for (x, f) in self.grid.iter().zip(&self.density) {
            w.write_record([format!("{x:.16e}"), format!("{f:.16e}")]).map_err(err)?;
        }
        w.flush().map_err(|e| MatrixError::Csv(e.to_string()))
    }
}

/// `C_α = ∫ √t dF(t)` on the default grid.
pub fn c_alpha(alpha: f64) -> Result<f64, SpectralError> {
    Ok(density(alpha, DEFAULT_GRID_POINTS)?.c_alpha)
}

/// Solves `gap_constant · C_α / √α = 1` by bisection to `1e-4` in `α`.
pub fn alpha_threshold(gap_constant: f64) -> Result<f64, SpectralError> {
    alpha_threshold_with(gap_constant, DEFAULT_GRID_POINTS, 1e-4)
}

pub fn alpha_threshold_with(gap_constant: f64, grid_points: usize, tol: f64) -> Result<f64, SpectralError> {
    if !(gap_constant > 0.0 && gap_constant.is_finite()) {
        return Err(SpectralError::InvalidGap(gap_constant));
    }
    let h = |alpha: f64| -> Result<f64, SpectralError> {
        Ok(gap_constant * density(alpha, grid_points)?.c_alpha / alpha.sqrt() - 1.0)
    };
    let lo = 0.01;
    let mut hi = 1.0;
    let h_lo = h(lo)?;
    let mut h_hi = h(hi)?;
    // C_α/√α decreases in α, so the root is where h turns from positive to negative
    let mut doublings = 0;
    while h_lo > 0.0 && h_hi > 0.0 && doublings < 8 {
        hi *= 2.0;
        h_hi = h(hi)?;
        doublings += 1;
    }
    if !(h_lo > 0.0 && h_hi <= 0.0) {
        return Err(SpectralError::NoSignChange { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if h(mid)? > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Sorted eigenvalues of `GHᵗHGᵗ/(nm)` for one draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSpectrum {
    pub eigenvalues: Vec<f64>,
    pub n: usize,
    pub m: usize,
}

impl EmpiricalSpectrum {
    pub fn mean(&self) -> f64 {
        self.eigenvalues.iter().sum::<f64>() / self.n as f64
    }

    pub fn mean_sqrt(&self) -> f64 {
        self.eigenvalues.iter().map(|x| x.sqrt()).sum::<f64>() / self.n as f64
    }
}

/// Eigenvalues as squared singular values of `GHᵗ/√(nm)`. Singular values at
/// rounding level (below `n·ε·σ_max`) are set to exactly zero, since for
/// `m < n` the product has exact rank `m`.
pub fn empirical_spectrum(n: usize, m: usize, seed: SeedSpec) -> Result<EmpiricalSpectrum, SpectralError> {
    let p = gaussian_product(n, m, seed).scale(1.0 / ((n * m) as f64).sqrt());
    let sv = singular_values(&p)?;
    let floor = n as f64 * f64::EPSILON * sv[0];
    let mut eigenvalues: Vec<f64> = sv
        .into_iter()
        .map(|s| if s <= floor { 0.0 } else { s * s })
        .collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(EmpiricalSpectrum { eigenvalues, n, m })
}

/// `sup_x |F_n(x) − F(x)|`, evaluated on both sides of every eigenvalue.
pub fn ks_distance(emp: &EmpiricalSpectrum, law: &SpectralLaw) -> Result<f64, SpectralError> {
    let ratio = emp.m as f64 / emp.n as f64;
    if (ratio - law.alpha).abs() > 1e-6 {
        return Err(SpectralError::AlphaMismatch {
            law: law.alpha,
            empirical: ratio,
        });
    }
    let ev = &emp.eigenvalues;
    let n = ev.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < ev.len() {
        let x = ev[i];
        let mut j = i;
        while j < ev.len() && ev[j] == x {
            j += 1;
        }
        // left limits: F_n(x⁻) = i/n; F jumps only at zero
        let left = if x == 0.0 { 0.0 } else { law.cdf_at(x) };
        let right = law.cdf_at(x);
        d = d.max((left - i as f64 / n).abs()).max((right - j as f64 / n).abs());
        i = j;
    }
    Ok(d.clamp(0.0, 1.0))
}
