//! The injective norm `‖A‖_{∞→1} = max Σ a_ij α_i β_j` over sign vectors.

use serde::{Deserialize, Serialize};

use super::NormError;
use crate::matrix::Matrix;
use crate::sample::SeedSpec;

/// Largest dimension for which [`infty_to_one_exact`] enumerates.
pub const EXACT_CAP: usize = 24;

/// A pair of sign vectors; the rank-one sign matrix `αβᵗ`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSignPair")]
pub struct SignPair {
    pub alpha: Vec<i8>,
    pub beta: Vec<i8>,
}

#[derive(Deserialize)]
struct RawSignPair {
    alpha: Vec<i8>,
    beta: Vec<i8>,
}

impl TryFrom<RawSignPair> for SignPair {
    type Error = String;

    fn try_from(raw: RawSignPair) -> Result<Self, Self::Error> {
        if raw.alpha.iter().chain(&raw.beta).any(|&s| s != 1 && s != -1) {
            return Err("sign vectors must contain only 1 and -1".into());
        }
        if raw.alpha.is_empty() || raw.beta.is_empty() {
            return Err("sign vectors must be non-empty".into());
        }
        Ok(SignPair {
            alpha: raw.alpha,
            beta: raw.beta,
        })
    }
}

impl SignPair {
    pub fn ones(rows: usize, cols: usize) -> Self {
        Self {
            alpha: vec![1; rows],
            beta: vec![1; cols],
        }
    }

    /// `Σ a_ij α_i β_j`.
    pub fn value(&self, a: &Matrix) -> f64 {
        assert_eq!((a.rows(), a.cols()), (self.alpha.len(), self.beta.len()));
        let mut total = 0.0;
        for (i, &ai) in self.alpha.iter().enumerate() {
            let row: f64 = a
                .row(i)
                .iter()
                .zip(&self.beta)
                .map(|(&x, &b)| x * f64::from(b))
                .sum();
            total += f64::from(ai) * row;
        }
        total
    }

    /// The sign matrix `αβᵗ`.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.alpha.len(), self.beta.len(), |i, j| {
            f64::from(self.alpha[i] * self.beta[j])
        })
    }

    /// The representative of `±(α, β)` with `α₀ = +1`.
    pub fn canonical(mut self) -> Self {
        if self.alpha[0] < 0 {
            self.alpha.iter_mut().for_each(|s| *s = -*s);
            self.beta.iter_mut().for_each(|s| *s = -*s);
        }
        self
    }
}

#[inline]
fn sign_of(x: f64) -> i8 {
    if x >= 0.0 {
        1
    } else {
        -1
    }
}

/// Exact `‖a‖_{∞→1}` with an attaining sign pair.
///
/// Enumerates the `2^{k−1}` sign vectors on the shorter side `k` in Gray-code
/// order with the first sign fixed, updating `aᵗα` by one row per step.
pub fn infty_to_one_exact(a: &Matrix) -> Result<(f64, SignPair), NormError> {
    infty_to_one_exact_capped(a, EXACT_CAP)
}

pub fn infty_to_one_exact_capped(a: &Matrix, cap: usize) -> Result<(f64, SignPair), NormError> {
    let k = a.rows().min(a.cols());
    if k > cap {
        return Err(NormError::ExceedsExactCap { n: k, cap });
    }
    if a.rows() > a.cols() {
        let (_, p) = infty_to_one_exact_capped(&a.transpose(), cap)?;
        let p = SignPair {
            alpha: p.beta,
            beta: p.alpha,
        }
        .canonical();
        return Ok((p.value(a), p));
    }
    let (n, cols) = (a.rows(), a.cols());
    let mut alpha = vec![1i8; n];
    let mut s: Vec<f64> = a.tr_mul_vec(&vec![1.0; n]);
    let l1 = |s: &[f64]| s.iter().map(|x| x.abs()).sum::<f64>();
    let mut best_value = l1(&s);
    let mut best_alpha = alpha.clone();
    let steps: u64 = 1u64 << (n - 1);
    for step in 1..steps {
        let i = step.trailing_zeros() as usize + 1;
        let old = f64::from(alpha[i]);
        alpha[i] = -alpha[i];
        if step % 4096 == 0 {
            // drop accumulated rounding from the incremental updates
            let af: Vec<f64> = alpha.iter().map(|&x| f64::from(x)).collect();
            s = a.tr_mul_vec(&af);
        } else {
            for (sj, &aij) in s.iter_mut().zip(a.row(i)) {
                *sj -= 2.0 * old * aij;
            }
        }
        let v = l1(&s);
        if v > best_value {
            best_value = v;
            best_alpha.copy_from_slice(&alpha);
        }
    }
    debug_assert_eq!(s.len(), cols);
    let pair = pair_from_alpha(a, best_alpha);
    Ok((pair.value(a), pair))
}

fn pair_from_alpha(a: &Matrix, alpha: Vec<i8>) -> SignPair {
    let af: Vec<f64> = alpha.iter().map(|&x| f64::from(x)).collect();
    let beta = a.tr_mul_vec(&af).into_iter().map(sign_of).collect();
    SignPair { alpha, beta }.canonical()
}

/// A lower bound on `‖a‖_{∞→1}` by alternating ascent from random starts.
///
/// The result never decreases as `restarts` grows with a fixed seed, since the
/// starts form a prefix of one stream.
pub fn infty_to_one_heuristic(a: &Matrix, restarts: usize, seed: SeedSpec) -> (f64, SignPair) {
    let mut stream = seed.stream();
    let mut best: Option<(f64, SignPair)> = None;
    for _ in 0..restarts.max(1) {
        let start: Vec<i8> = (0..a.rows()).map(|_| sign_of(stream.sign())).collect();
        let (v, p) = ascend(a, start);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, p));
        }
    }
    best.expect("at least one restart")
}

/// Alternates `β = sign(aᵗα)`, `α = sign(aβ)` until neither step gains more
/// than a relative 1e-12.
pub fn ascend(a: &Matrix, mut alpha: Vec<i8>) -> (f64, SignPair) {
    let to_f = |v: &[i8]| v.iter().map(|&x| f64::from(x)).collect::<Vec<f64>>();
    let stalled = |new: f64, old: f64| new <= old + 1e-12 * old.abs().max(1.0);
    let mut value = f64::NEG_INFINITY;
    let mut pair = SignPair::ones(a.rows(), a.cols());
    loop {
        let s = a.tr_mul_vec(&to_f(&alpha));
        let beta: Vec<i8> = s.iter().map(|&x| sign_of(x)).collect();
        let v: f64 = s.iter().map(|x| x.abs()).sum();
        if stalled(v, value) {
            break;
        }
        value = v;
        pair = SignPair {
            alpha: alpha.clone(),
            beta,
        };
        let r = a.mul_vec(&to_f(&pair.beta));
        let v: f64 = r.iter().map(|x| x.abs()).sum();
        if stalled(v, value) {
            break;
        }
        value = v;
        alpha = r.iter().map(|&x| sign_of(x)).collect();
        pair.alpha.clone_from(&alpha);
    }
    let pair = pair.canonical();
    (pair.value(a), pair)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(a: &Matrix) -> f64 {
        let (n, m) = (a.rows(), a.cols());
        let mut best = f64::NEG_INFINITY;
        for x in 0..1u32 << n {
            for y in 0..1u32 << m {
                let p = SignPair {
                    alpha: (0..n).map(|i| if x >> i & 1 == 1 { -1 } else { 1 }).collect(),
                    beta: (0..m).map(|j| if y >> j & 1 == 1 { -1 } else { 1 }).collect(),
                };
                best = best.max(p.value(a));
            }
        }
        best
    }

    #[test]
    fn small_cases() {
        let i4 = Matrix::identity(4);
        let (v, p) = infty_to_one_exact(&i4).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(p.value(&i4), 4.0);
        assert_eq!(infty_to_one_exact(&Matrix::filled(5, 5, 1.0)).unwrap().0, 25.0);
        let chsh = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
        assert_eq!(infty_to_one_exact(&chsh).unwrap().0, 2.0);
        let h2 = [[1.0, 1.0], [1.0, -1.0]];
        let h4 = Matrix::from_fn(4, 4, |i, j| h2[i / 2][j / 2] * h2[i % 2][j % 2]);
        assert_eq!(infty_to_one_exact(&h4).unwrap().0, 8.0);
    }

    #[test]
    fn matches_brute_force() {
        for t in 0..30 {
            let rows = 1 + t % 5;
            let cols = 1 + (t / 5) % 5;
            let a = crate::sample::gaussian(rows, cols, SeedSpec::new(9, t as u64));
            let (v, p) = infty_to_one_exact(&a).unwrap();
            assert!((v - brute(&a)).abs() < 1e-12);
            assert_eq!(p.alpha[0], 1);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let a = Matrix::identity(5);
        assert!(matches!(
            infty_to_one_exact_capped(&a, 4),
            Err(NormError::ExceedsExactCap { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn heuristic_on_identity() {
        let (v, _) = infty_to_one_heuristic(&Matrix::identity(7), 1, SeedSpec::new(1, 1));
        assert_eq!(v, 7.0);
    }

    #[test]
    fn sign_pair_json_rejects_zero() {
        assert!(serde_json::from_str::<SignPair>(r#"{"alpha":[1,0],"beta":[1,1]}"#).is_err());
        let p: SignPair = serde_json::from_str(r#"{"alpha":[1,-1],"beta":[-1,1]}"#).unwrap();
        assert_eq!(p.to_matrix().get(0, 0), -1.0);
    }
}
