//! Bounds on the projective norm `‖T‖_{ℓ∞⊗πℓ∞}`, the smallest total weight of
//! a decomposition of `T` into sign matrices `αβᵗ`.
//!
//! Lower bounds come from Bell functionals `A`: `‖T‖_π ≥ ⟨T, A⟩ / ‖A‖_{∞→1}`.
//! Upper bounds come from explicit decompositions, found by column generation
//! over sign-matrix atoms.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::certificate::Certificate;
use super::signs::{infty_to_one_exact_capped, infty_to_one_heuristic, SignPair, EXACT_CAP};
use super::NormError;
use crate::matrix::{operator_norm, svd, Matrix};
use crate::sample::SeedSpec;

/// The published interval around the real Grothendieck constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrothendieckConstants {
    pub kg_lower: f64,
    pub kg_upper: f64,
}

pub const KG: GrothendieckConstants = GrothendieckConstants {
    kg_lower: 1.67696,
    kg_upper: 1.78221,
};

/// How the functional norm of a [`BellFunctional`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsNormKind {
    /// Exact enumeration.
    Exact,
    /// `n · ‖A‖_∞`, a valid upper bound.
    OperatorBound,
    /// Alternating ascent; a lower bound, so not usable for certification.
    Heuristic,
}

/// `n · ‖A‖_∞`, inflated by one part in 10¹² to absorb rounding in `‖A‖_∞`.
pub fn operator_eps_bound(n: usize, op: f64) -> f64 {
    n as f64 * op * (1.0 + 1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    pub a: Matrix,
    pub eps_one_norm: f64,
    pub kind: EpsNormKind,
    /// The attaining signs when the norm was computed exactly.
    pub witness: Option<SignPair>,
    /// Alternating-ascent value, reported alongside a non-exact norm.
    pub heuristic_norm: Option<f64>,
    /// Set when the source matrix was numerically singular, so `UVᵗ` is not unique.
    pub near_singular: bool,
}

impl BellFunctional {
    /// Wraps a functional whose `‖·‖_{∞→1}` is computed exactly.
    pub fn exact(a: Matrix) -> Result<Self, NormError> {
        let (eps_one_norm, pair) = super::signs::infty_to_one_exact(&a)?;
        Ok(Self {
            a,
            eps_one_norm,
            kind: EpsNormKind::Exact,
            witness: Some(pair),
            heuristic_norm: None,
            near_singular: false,
        })
    }

    pub fn is_certified(&self) -> bool {
        self.kind != EpsNormKind::Heuristic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BellOptions {
    pub exact_cap: usize,
    /// Restarts for the heuristic estimate above `exact_cap`; zero skips it.
    pub heuristic_restarts: usize,
    pub heuristic_seed: u64,
}

impl Default for BellOptions {
    fn default() -> Self {
        Self {
            exact_cap: EXACT_CAP,
            heuristic_restarts: 20,
            heuristic_seed: 0,
        }
    }
}

/// The Bell functional `UVᵗ` from the SVD of `t`.
pub fn bell_functional_from_svd(t: &Matrix) -> Result<BellFunctional, NormError> {
    bell_functional_with(t, BellOptions::default())
}

pub fn bell_functional_with(t: &Matrix, opts: BellOptions) -> Result<BellFunctional, NormError> {
    let dec = svd(t)?;
    let a = dec.polar();
    let n = t.rows();
    let near_singular = dec.sigma[n - 1] <= 1e-12 * dec.sigma[0];
    if n <= opts.exact_cap {
        let (eps_one_norm, pair) = infty_to_one_exact_capped(&a, opts.exact_cap)?;
        return Ok(BellFunctional {
            a,
            eps_one_norm,
            kind: EpsNormKind::Exact,
            witness: Some(pair),
            heuristic_norm: None,
            near_singular,
        });
    }
    let heuristic_norm = (opts.heuristic_restarts > 0).then(|| {
        infty_to_one_heuristic(&a, opts.heuristic_restarts, SeedSpec::new(opts.heuristic_seed, 0)).0
    });
    let eps_one_norm = operator_eps_bound(n, operator_norm(&a)?);
    Ok(BellFunctional {
        a,
        eps_one_norm,
        kind: EpsNormKind::OperatorBound,
        witness: None,
        heuristic_norm,
        near_singular,
    })
}

/// `⟨t, a⟩ / ‖a‖_{∞→1}`, a lower bound on the classical norm of `t`.
pub fn classical_lower_bound(t: &Matrix, a: &BellFunctional) -> Result<f64, NormError> {
    if !(a.eps_one_norm > 0.0) {
        return Err(NormError::ZeroFunctionalNorm(a.eps_one_norm));
    }
    if (t.rows(), t.cols()) != (a.a.rows(), a.a.cols()) {
        return Err(NormError::InvalidArgument("functional shape differs from t".into()));
    }
    Ok(t.inner(&a.a) / a.eps_one_norm)
}

/// The certificate behind [`classical_lower_bound`]. `None` for heuristic norms.
pub fn bell_certificate(t: &Matrix, a: &BellFunctional) -> Option<Certificate> {
    if !a.is_certified() {
        return None;
    }
    Some(Certificate::BellBound {
        target: t.clone(),
        functional: a.a.clone(),
        eps_norm: a.eps_one_norm,
        eps_kind: a.kind,
        value: classical_lower_bound(t, a).ok()?,
    })
}

/// `Σ weights_k · α_k β_kᵗ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDecomposition {
    pub weights: Vec<f64>,
    pub atoms: Vec<SignPair>,
    /// Largest entrywise reconstruction error.
    pub residual: f64,
}

impl ConvexDecomposition {
    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn reconstruct(&self, rows: usize, cols: usize) -> Matrix {
        let mut out = Matrix::zeros(rows, cols);
        for (w, p) in self.weights.iter().zip(&self.atoms) {
            out = out.add(&p.to_matrix().scale(*w));
        }
        out
    }

    pub fn certificate(&self, target: &Matrix) -> Certificate {
        Certificate::Decomposition {
            target: target.clone(),
            weights: self.weights.clone(),
            atoms: self.atoms.clone(),
            residual: self.residual,
            value: self.weight_sum(),
        }
    }
}

/// Result of column generation: the decomposition and the dual bound it closed against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalUpper {
    pub decomposition: ConvexDecomposition,
    /// `⟨t, Y⟩ / ‖Y‖_{∞→1}` for the final dual iterate `Y`.
    pub dual_lower: f64,
    pub dual: Matrix,
    /// False when pricing fell back to the heuristic.
    pub certified: bool,
    pub pivots: usize,
}

/// Minimizes total weight over sign-matrix decompositions of `t` by column
/// generation, pricing with `‖Y‖_{∞→1}` of the dual iterate.
pub fn classical_upper_bound(t: &Matrix, max_atoms: usize, tol: f64) -> Result<ClassicalUpper, NormError> {
    if !(tol > 0.0) {
        return Err(NormError::InvalidArgument("tol must be positive".into()));
    }
    Simplex::new(t)?.run(max_atoms, tol)
}

/// Revised simplex over atoms, kept as a dense basis inverse.
struct Simplex {
    t: Matrix,
    rows: usize,
    cols: usize,
    target: DVector<f64>,
    basis: Vec<SignPair>,
    inverse: DMatrix<f64>,
    weights: DVector<f64>,
}

/// Sign vectors `1, 1 − 2e₁, …, 1 − 2e_{k−1}`: a basis of `ℝᵏ`.
fn sign_basis(k: usize) -> Vec<Vec<i8>> {
    (0..k)
        .map(|i| {
            let mut v = vec![1i8; k];
            if i > 0 {
                v[i] = -1;
            }
            v
        })
        .collect()
}

fn atom_vec(p: &SignPair) -> DVector<f64> {
    let cols = p.beta.len();
    DVector::from_fn(p.alpha.len() * cols, |k, _| {
        f64::from(p.alpha[k / cols] * p.beta[k % cols])
    })
}

/// Total order on atoms used by Bland's rule.
fn atom_key(p: &SignPair) -> (Vec<i8>, Vec<i8>) {
    let c = p.clone().canonical();
    (c.alpha, c.beta)
}

impl Simplex {
    fn new(t: &Matrix) -> Result<Self, NormError> {
        let (rows, cols) = (t.rows(), t.cols());
        let va = sign_basis(rows);
        let vb = sign_basis(cols);
        // coordinates of t in the product basis: C = V⁻¹ t W⁻ᵗ
        let vm = DMatrix::from_fn(rows, rows, |i, k| f64::from(va[k][i]));
        let wm = DMatrix::from_fn(cols, cols, |j, k| f64::from(vb[k][j]));
        let vinv = vm.try_inverse().expect("sign basis is invertible");
        let winv = wm.try_inverse().expect("sign basis is invertible");
        let coords = &vinv * t.to_nalgebra() * winv.transpose();
        let mut basis = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let c = coords[(i, j)];
                let mut alpha = va[i].clone();
                if c < 0.0 {
                    alpha.iter_mut().for_each(|s| *s = -*s);
                }
                basis.push(SignPair {
                    alpha,
                    beta: vb[j].clone(),
                });
            }
        }
        let target = DVector::from_row_slice(t.data());
        let mut s = Self {
            t: t.clone(),
            rows,
            cols,
            target,
            basis,
            inverse: DMatrix::zeros(0, 0),
            weights: DVector::zeros(0),
        };
        s.refactor()?;
        Ok(s)
    }

    fn refactor(&mut self) -> Result<(), NormError> {
        let size = self.rows * self.cols;
        let mut b = DMatrix::zeros(size, size);
        for (k, p) in self.basis.iter().enumerate() {
            b.set_column(k, &atom_vec(p));
        }
        self.inverse = b
            .try_inverse()
            .ok_or_else(|| NormError::InvalidArgument("simplex basis became singular".into()))?;
        self.weights = (&self.inverse * &self.target).map(|w| if w.abs() < 1e-13 { 0.0 } else { w });
        Ok(())
    }

    fn price(&self, y: &Matrix, exact: bool) -> (f64, SignPair) {
        if exact {
            infty_to_one_exact_capped(y, EXACT_CAP).expect("within cap")
        } else {
            infty_to_one_heuristic(y, 50, SeedSpec::new(0x5eed, 0))
        }
    }

    fn decomposition(&self) -> ConvexDecomposition {
        let mut weights = Vec::new();
        let mut atoms = Vec::new();
        for (w, p) in self.weights.iter().zip(&self.basis) {
            if *w > 0.0 {
                weights.push(*w);
                atoms.push(p.clone());
            }
        }
        let mut d = ConvexDecomposition {
            weights,
            atoms,
            residual: 0.0,
        };
        d.residual = d.reconstruct(self.rows, self.cols).sub(&self.t).max_abs();
        d
    }

    fn run(mut self, max_atoms: usize, tol: f64) -> Result<ClassicalUpper, NormError> {
        let exact = self.rows.min(self.cols) <= EXACT_CAP;
        let mut pivots = 0;
        let mut since_refactor = 0;
        let mut degenerate_run = 0;
        let mut best_lower: f64 = 0.0;
        loop {
            let y_vec = self.inverse.tr_mul(&DVector::from_element(self.basis.len(), 1.0));
            let y = Matrix::new(self.rows, self.cols, y_vec.iter().copied().collect())?;
            let (price, pair) = self.price(&y, exact);
            if price > 0.0 {
                best_lower = best_lower.max(self.t.inner(&y) / price);
            }
            if price <= 1.0 + tol {
                let decomposition = self.decomposition();
                if decomposition.residual > tol {
                    return Err(NormError::Reconstruction {
                        residual: decomposition.residual,
                        tol,
                    });
                }
                return Ok(ClassicalUpper {
                    decomposition,
                    dual_lower: best_lower,
                    dual: y,
                    certified: exact,
                    pivots,
                });
            }
            if pivots >= max_atoms {
                return Err(NormError::AtomBudget {
                    budget: max_atoms,
                    best: Box::new(self.decomposition()),
                    lower: best_lower,
                });
            }
            // after a long degenerate stretch, enter the smallest improving atom (Bland)
            let entering = if degenerate_run > 50 && self.rows + self.cols <= 20 {
                self.bland_entering(&y, tol).unwrap_or(pair)
            } else {
                pair
            };
            let column = atom_vec(&entering);
            let d = &self.inverse * &column;
            let mut leave: Option<(f64, usize)> = None;
            for k in 0..d.len() {
                if d[k] > 1e-11 {
                    let ratio = self.weights[k] / d[k];
                    let better = match leave {
                        None => true,
                        Some((r, l)) => {
                            ratio < r - 1e-14
                                || (ratio <= r + 1e-14 && atom_key(&self.basis[k]) < atom_key(&self.basis[l]))
                        }
                    };
                    if better {
                        leave = Some((ratio, k));
                    }
                }
            }
            let Some((step, l)) = leave else {
                // unbounded direction is impossible for a positive-cost problem
                return Err(NormError::InvalidArgument("simplex ratio test found no pivot".into()));
            };
            degenerate_run = if step <= 1e-14 { degenerate_run + 1 } else { 0 };
            // rank-one update of the basis inverse
            let pivot = d[l];
            let row_l = self.inverse.row(l).into_owned() / pivot;
            for k in 0..d.len() {
                if k != l && d[k] != 0.0 {
                    let factor = d[k];
                    let mut r = self.inverse.row_mut(k);
                    r -= factor * &row_l;
                }
            }
            self.inverse.set_row(l, &row_l);
            for k in 0..d.len() {
                self.weights[k] -= step * d[k];
            }
            self.weights[l] = step;
            self.basis[l] = entering;
            pivots += 1;
            since_refactor += 1;
            if since_refactor >= 50 {
                self.refactor()?;
                since_refactor = 0;
            }
        }
    }

    /// Smallest atom (in [`atom_key`] order) with reduced cost below `−tol`.
    fn bland_entering(&self, y: &Matrix, tol: f64) -> Option<SignPair> {
        let (r, c) = (self.rows, self.cols);
        let in_basis: HashSet<(Vec<i8>, Vec<i8>)> = self.basis.iter().map(atom_key).collect();
        let mut best: Option<SignPair> = None;
        for xa in 0u32..1 << (r - 1) {
            let alpha: Vec<i8> = (0..r)
                .map(|i| if i > 0 && xa >> (i - 1) & 1 == 1 { -1 } else { 1 })
                .collect();
            for xb in 0u32..1 << c {
                let beta: Vec<i8> = (0..c).map(|j| if xb >> j & 1 == 1 { -1 } else { 1 }).collect();
                let p = SignPair {
                    alpha: alpha.clone(),
                    beta,
                };
                if p.value(y) > 1.0 + tol
                    && !in_basis.contains(&atom_key(&p))
                    && best.as_ref().is_none_or(|b| atom_key(&p) < atom_key(b))
                {
                    best = Some(p);
                }
            }
        }
        best
    }
}
