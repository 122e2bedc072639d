//! The factorization norm `γ₂(T) = inf { ‖X‖_{ℓ2→ℓ∞} ‖Y‖_{ℓ1→ℓ2} : T = XY }`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::certificate::Certificate;
use super::{NormBracket, NormError};
use crate::matrix::{require_square, svd, svd_unverified, Matrix, SvdTriple};

/// Largest size accepted by [`gamma2_oracle`].
pub const ORACLE_CAP: usize = 12;

/// `γ₂*(O) = n` for an orthogonal `n×n` matrix `O`.
pub fn gamma2_star_orthogonal(o: &Matrix) -> Result<f64, NormError> {
    require_square(o)?;
    let residual = o.orthogonality_residual();
    if residual > 1e-9 {
        return Err(NormError::NotOrthogonal { residual });
    }
    Ok(o.rows() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gamma2Options {
    /// Maximum number of diagonal rescalings applied to the SVD factorization.
    /// Zero gives the plain `X = U√Σ`, `Y = √ΣVᵗ` bound.
    pub rescale_steps: usize,
    /// Rescaling stops once `upper ≤ (1 + rescale_tol) · dual` for the
    /// rescaled dual bound.
    pub rescale_tol: f64,
}

impl Default for Gamma2Options {
    fn default() -> Self {
        Self {
            rescale_steps: 10,
            rescale_tol: 5e-4,
        }
    }
}

/// A bracket on `γ₂` together with the unrefined SVD-factorization value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gamma2Bracket {
    pub bracket: NormBracket,
    /// `max_i ‖row_i(U√Σ)‖ · max_j ‖col_j(√ΣVᵗ)‖` before any rescaling.
    pub svd_upper: f64,
    /// Best dual value `‖D_a T D_b‖₁ / (‖a‖‖b‖)` seen while rescaling.
    pub rescaled_lower: f64,
    pub rescale_steps: usize,
}

/// `‖T‖₁/n ≤ γ₂(T) ≤ upper`, where `upper` comes from the SVD factorization
/// improved by diagonal rescaling.
pub fn gamma2_bracket(t: &Matrix) -> Result<NormBracket, NormError> {
    Ok(gamma2_bracket_with(t, Gamma2Options::default())?.bracket)
}

pub fn gamma2_bracket_with(t: &Matrix, opts: Gamma2Options) -> Result<Gamma2Bracket, NormError> {
    require_square(t)?;
    if t.is_zero() {
        return Err(NormError::ZeroMatrix);
    }
    let n = t.rows();
    let base = svd(t)?;
    let lower = base.sigma.iter().sum::<f64>() / n as f64;
    let lower_certificate = Certificate::Gamma2Dual {
        target: t.clone(),
        dual: base.polar(),
        value: lower,
    };

    let ones = vec![1.0; n];
    let mut best = Scaled::new(&base, ones.clone(), ones);
    let svd_upper = best.upper;
    let mut rescaled_lower = lower;
    let mut current = best.clone();
    let mut steps = 0;
    while steps < opts.rescale_steps && best.upper > (1.0 + opts.rescale_tol) * rescaled_lower {
        let a = rebalance(&current.a, &current.row_sq);
        let b = rebalance(&current.b, &current.col_sq);
        let m = Matrix::from_fn(n, n, |i, j| a[i] * t.get(i, j) * b[j]);
        current = Scaled::new(&svd_unverified(&m)?, a, b);
        steps += 1;
        rescaled_lower = rescaled_lower.max(current.dual);
        if current.upper < best.upper {
            best = current.clone();
        }
    }

    let (x, y) = best.factors();
    let upper_certificate = Certificate::Factorization {
        target: t.clone(),
        value: factorization_value(&x, &y),
        x,
        y,
    };
    let upper = upper_certificate.value();
    Ok(Gamma2Bracket {
        bracket: NormBracket {
            lower,
            upper,
            lower_certificate,
            upper_certificate,
        },
        svd_upper,
        rescaled_lower,
        rescale_steps: steps,
    })
}

fn factorization_value(x: &Matrix, y: &Matrix) -> f64 {
    let r = x.row_norms().into_iter().fold(0.0, f64::max);
    let c = y.col_norms().into_iter().fold(0.0, f64::max);
    r * c
}

/// SVD of `D_a T D_b`, yielding `X = D_a⁻¹ U√Σ` and `Y = √ΣVᵗ D_b⁻¹`.
#[derive(Clone)]
struct Scaled {
    svd: SvdTriple,
    a: Vec<f64>,
    b: Vec<f64>,
    row_sq: Vec<f64>,
    col_sq: Vec<f64>,
    upper: f64,
    dual: f64,
}

impl Scaled {
    fn new(svd: &SvdTriple, a: Vec<f64>, b: Vec<f64>) -> Self {
        let n = a.len();
        let energy = |m: &Matrix, i: usize| -> f64 {
            (0..n).map(|k| m.get(i, k).powi(2) * svd.sigma[k]).sum()
        };
        let row_sq: Vec<f64> = (0..n).map(|i| energy(&svd.u, i) / (a[i] * a[i])).collect();
        let col_sq: Vec<f64> = (0..n).map(|j| energy(&svd.v, j) / (b[j] * b[j])).collect();
        let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let upper = (max(&row_sq) * max(&col_sq)).sqrt();
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dual = svd.sigma.iter().sum::<f64>() / (norm(&a) * norm(&b));
        Self {
            svd: svd.clone(),
            a,
            b,
            row_sq,
            col_sq,
            upper,
            dual,
        }
    }

    fn factors(&self) -> (Matrix, Matrix) {
        let n = self.a.len();
        let root: Vec<f64> = self.svd.sigma.iter().map(|s| s.sqrt()).collect();
        let x = Matrix::from_fn(n, n, |i, k| self.svd.u.get(i, k) * root[k] / self.a[i]);
        let y = Matrix::from_fn(n, n, |k, j| root[k] * self.svd.v.get(j, k) / self.b[j]);
        (x, y)
    }
}

/// Multiplies each weight by its squared row norm relative to the mean, so
/// heavy rows of the factor are damped in the next round.
fn rebalance(w: &[f64], sq: &[f64]) -> Vec<f64> {
    let live: Vec<f64> = sq.iter().copied().filter(|&s| s > 0.0).collect();
    if live.is_empty() {
        return w.to_vec();
    }
    let mean = live.iter().sum::<f64>() / live.len() as f64;
    w.iter()
        .zip(sq)
        .map(|(&wi, &s)| if s > 0.0 { wi * (s / mean).clamp(0.25, 4.0) } else { wi })
        .collect()
}

/// `γ₂(t)` to within `tol` by a log-barrier interior-point method on
/// `min c` subject to `[[P, t], [tᵗ, Q]] ⪰ 0`, `P_ii ≤ c`, `Q_jj ≤ c`.
pub fn gamma2_oracle(t: &Matrix, tol: f64) -> Result<f64, NormError> {
    let (lo, hi) = gamma2_oracle_interval(t, tol)?;
    Ok(0.5 * (lo + hi))
}

/// The certified interval `[lower, upper]` of width at most `tol` around `γ₂(t)`.
pub fn gamma2_oracle_interval(t: &Matrix, tol: f64) -> Result<(f64, f64), NormError> {
    require_square(t)?;
    let n = t.rows();
    if n > ORACLE_CAP {
        return Err(NormError::OracleTooLarge { n, cap: ORACLE_CAP });
    }
    if !(tol > 0.0) {
        return Err(NormError::InvalidArgument("tol must be positive".into()));
    }
    if t.is_zero() {
        return Ok((0.0, 0.0));
    }
    Barrier::new(t).solve(tol)
}

/// Variables: upper triangles of `P` and `Q`, then `c`.
struct Barrier {
    n: usize,
    t: Matrix,
    /// For each variable except `c`: its (row, col) block positions in the 2n×2n matrix.
    basis: Vec<Vec<(usize, usize)>>,
    /// Index of the diagonal variable `P_ii` (first n) and `Q_jj` (next n).
    diag_vars: Vec<usize>,
}

impl Barrier {
    fn new(t: &Matrix) -> Self {
        let n = t.rows();
        let mut basis = Vec::new();
        let mut diag_vars = vec![0; 2 * n];
        for block in 0..2 {
            let off = block * n;
            for p in 0..n {
                for q in p..n {
                    if p == q {
                        diag_vars[off + p] = basis.len();
                        basis.push(vec![(off + p, off + p)]);
                    } else {
                        basis.push(vec![(off + p, off + q), (off + q, off + p)]);
                    }
                }
            }
        }
        Self {
            n,
            t: t.clone(),
            basis,
            diag_vars,
        }
    }

    fn dim(&self) -> usize {
        self.basis.len() + 1
    }

    fn lmi(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n;
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                m[(i, n + j)] = self.t.get(i, j);
                m[(n + j, i)] = self.t.get(i, j);
            }
        }
        for (k, entries) in self.basis.iter().enumerate() {
            for &(r, c) in entries {
                m[(r, c)] += x[k];
            }
        }
        m
    }

    fn slacks(&self, x: &DVector<f64>) -> Vec<f64> {
        let c = x[self.dim() - 1];
        self.diag_vars.iter().map(|&k| c - x[k]).collect()
    }

    /// Barrier value, or `None` outside the interior.
    fn phi(&self, x: &DVector<f64>) -> Option<f64> {
        let chol = self.lmi(x).cholesky()?;
        let logdet: f64 = chol.l_dirty().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
        let mut value = -logdet;
        for s in self.slacks(x) {
            if s <= 0.0 {
                return None;
            }
            value -= s.ln();
        }
        Some(value)
    }

    fn grad_hess(&self, x: &DVector<f64>, tau: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let dim = self.dim();
        let cvar = dim - 1;
        let s_inv = self.lmi(x).cholesky()?.inverse();
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);
        for (k, ek) in self.basis.iter().enumerate() {
            g[k] = -ek.iter().map(|&(r, c)| s_inv[(c, r)]).sum::<f64>();
            for (l, el) in self.basis.iter().enumerate().skip(k) {
                // tr(S A S B) with A, B sparse 0/1 symmetric basis matrices
                let mut v = 0.0;
                for &(j, kk) in ek {
                    for &(ll, i) in el {
                        v += s_inv[(i, j)] * s_inv[(kk, ll)];
                    }
                }
                h[(k, l)] = v;
                h[(l, k)] = v;
            }
        }
        g[cvar] += tau;
        for (slack, &k) in self.slacks(x).iter().zip(&self.diag_vars) {
            let inv = 1.0 / slack;
            // slack = c − x_k
            g[cvar] -= inv;
            g[k] += inv;
            let inv2 = inv * inv;
            h[(cvar, cvar)] += inv2;
            h[(k, k)] += inv2;
            h[(cvar, k)] -= inv2;
            h[(k, cvar)] -= inv2;
        }
        Some((g, h))
    }

    fn solve(&self, tol: f64) -> Result<(f64, f64), NormError> {
        let n = self.n;
        let dim = self.dim();
        let cvar = dim - 1;
        let op = crate::matrix::operator_norm(&self.t)?;
        let c0 = op + 1.0;
        let mut x = DVector::zeros(dim);
        for &k in &self.diag_vars {
            x[k] = c0;
        }
        x[cvar] = c0 + 1.0;
        let nu = 4.0 * n as f64;
        let mut tau = nu / c0;
        let fail = |x: &DVector<f64>, tau: f64| NormError::Gamma2NotConverged {
            lower: x[cvar] - nu / tau,
            upper: x[cvar],
        };
        for _outer in 0..80 {
            for _newton in 0..100 {
                let Some((g, h)) = self.grad_hess(&x, tau) else {
                    return Err(fail(&x, tau));
                };
                let Some(chol) = h.cholesky() else {
                    return Err(fail(&x, tau));
                };
                let dx = -chol.solve(&g);
                let decrement = -g.dot(&dx);
                if decrement < 1e-10 {
                    break;
                }
                let f0 = tau * x[cvar] + self.phi(&x).ok_or_else(|| fail(&x, tau))?;
                let mut step = 1.0;
                loop {
                    let cand = &x + step * &dx;
                    if let Some(p) = self.phi(&cand) {
                        if tau * cand[cvar] + p <= f0 - 0.25 * step * decrement {
                            x = cand;
                            break;
                        }
                    }
                    step *= 0.5;
                    if step < 1e-14 {
                        return Err(fail(&x, tau));
                    }
                }
            }
            if nu / tau <= tol {
                return Ok((x[cvar] - nu / tau, x[cvar]));
            }
            tau *= 8.0;
        }
        Err(fail(&x, tau))
    }
}
