//! Seeded samplers for the random ensembles: Gaussian matrices, Haar orthogonal
//! matrices, bi-orthogonally invariant matrices with a prescribed spectrum,
//! Gaussian products `G·Hᵗ` and the unit-row correlation `τ`.
//!
//! Every sampler is a pure function of its parameters and a [`SeedSpec`]. The
//! Gaussian generator is fixed (ChaCha8 feeding Box–Muller), so a seed produces
//! the same matrix on every platform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{norm2, Matrix, MatrixError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SampleError {
    #[error("spectrum entry {index} is negative ({value})")]
    NegativeSpectrum { index: usize, value: f64 },
    #[error("QR of the Gaussian draw broke down {attempts} times")]
    QrBreakdown { attempts: usize },
    #[error("invalid ensemble: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// The splitmix64 finaliser, used as the published stream-mixing function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub trial_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, trial_index: u64) -> Self {
        Self {
            master_seed,
            trial_index,
        }
    }

    pub fn stream_seed(&self) -> u64 {
        splitmix64(self.master_seed ^ splitmix64(self.trial_index))
    }

    pub fn stream(&self) -> Stream {
        Stream::from_seed(self.stream_seed())
    }
}

/// A random stream with a portable Gaussian generator.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl Stream {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// A standard normal variate (Box–Muller, second variate cached).
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normals(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }

    pub fn gaussian(&mut self, n: usize, m: usize) -> Matrix {
        Matrix::from_fn(n, m, |_, _| self.normal())
    }

    pub fn haar_orthogonal(&mut self, n: usize) -> Result<Matrix, SampleError> {
        const ATTEMPTS: usize = 3;
        for _ in 0..ATTEMPTS {
            let g = self.gaussian(n, n);
            let qr = g.to_nalgebra().qr();
            let (q, r) = (qr.q(), qr.r());
            let scale = g.max_abs().max(f64::MIN_POSITIVE);
            if (0..n).any(|j| r[(j, j)].abs() <= 1e-12 * scale) {
                continue;
            }
            // without this sign correction QR output is not Haar distributed
            return Ok(Matrix::from_fn(n, n, |i, j| q[(i, j)] * r[(j, j)].signum()));
        }
        Err(SampleError::QrBreakdown { attempts: ATTEMPTS })
    }

    pub fn unit_vector(&mut self, n: usize) -> Vec<f64> {
        loop {
            let mut v = self.normals(n);
            let norm = norm2(&v);
            if norm > 1e-300 {
                v.iter_mut().for_each(|x| *x /= norm);
                return v;
            }
        }
    }
}

/// An `n×m` matrix of independent standard normals.
pub fn gaussian(n: usize, m: usize, seed: SeedSpec) -> Matrix {
    seed.stream().gaussian(n, m)
}

pub fn haar_orthogonal(n: usize, seed: SeedSpec) -> Result<Matrix, SampleError> {
    seed.stream().haar_orthogonal(n)
}

/// `U·diag(spectrum)·Vᵗ` with independent Haar `U` and `V`.
pub fn bi_invariant(spectrum: &[f64], seed: SeedSpec) -> Result<Matrix, SampleError> {
    if spectrum.is_empty() {
        return Err(SampleError::InvalidSpec("empty spectrum".into()));
    }
    if let Some((index, &value)) = spectrum
        .iter()
        .enumerate()
        .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
    {
        return Err(SampleError::NegativeSpectrum { index, value });
    }
    let n = spectrum.len();
    let mut stream = seed.stream();
    let u = stream.haar_orthogonal(n)?;
    let v = stream.haar_orthogonal(n)?;
    let us = Matrix::from_fn(n, n, |i, j| u.get(i, j) * spectrum[j]);
    Ok(us.matmul_transpose(&v))
}

/// The two independent `n×m` Gaussians `G` and `H` behind both
/// [`gaussian_product`] and [`unit_rows_correlation`] for a given seed.
pub fn coupled_gaussians(n: usize, m: usize, seed: SeedSpec) -> (Matrix, Matrix) {
    let mut stream = seed.stream();
    let g = stream.gaussian(n, m);
    let h = stream.gaussian(n, m);
    (g, h)
}

/// `G·Hᵗ` for independent `n×m` Gaussians.
pub fn gaussian_product(n: usize, m: usize, seed: SeedSpec) -> Matrix {
    let (g, h) = coupled_gaussians(n, m, seed);
    g.matmul_transpose(&h)
}

/// `τ_ij = ⟨g_i/‖g_i‖, h_j/‖h_j‖⟩`, built from the same `G`, `H` as
/// [`gaussian_product`] under the same seed.
pub fn unit_rows_correlation(n: usize, m: usize, seed: SeedSpec) -> Matrix {
    let (g, h) = coupled_gaussians(n, m, seed);
    let mut stream = Stream::from_seed(splitmix64(seed.stream_seed()));
    let u = normalize_rows(&g, &mut stream);
    let v = normalize_rows(&h, &mut stream);
    u.matmul_transpose(&v).map(|x| x.clamp(-1.0, 1.0))
}

/// Rows scaled to unit length. A (numerically) zero row is replaced by a fresh
/// uniform direction, which happens with probability zero.
pub fn normalize_rows(a: &Matrix, stream: &mut Stream) -> Matrix {
    let mut rows = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let r = a.row(i);
        let norm = norm2(r);
        if norm > 1e-300 {
            rows.push(r.iter().map(|x| x / norm).collect());
        } else {
            rows.push(stream.unit_vector(a.cols()));
        }
    }
    Matrix::from_rows(&rows).expect("rows share one length")
}

/// A uniformly distributed point of the unit sphere in `ℝⁿ`.
pub fn uniform_sphere(n: usize, seed: SeedSpec) -> Vec<f64> {
    seed.stream().unit_vector(n)
}

/// A random ensemble, as named in experiment and CLI configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Gaussian { n: usize },
    HaarOrthogonal { n: usize },
    BiInvariant { n: usize, spectrum: Vec<f64> },
    GaussianProduct { n: usize, m: usize },
    UnitRowsCorrelation { n: usize, m: usize },
}

impl EnsembleSpec {
    pub fn n(&self) -> usize {
        match *self {
            Self::Gaussian { n }
            | Self::HaarOrthogonal { n }
            | Self::BiInvariant { n, .. }
            | Self::GaussianProduct { n, .. }
            | Self::UnitRowsCorrelation { n, .. } => n,
        }
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        let n = self.n();
        if n == 0 {
            return Err(SampleError::InvalidSpec("n must be positive".into()));
        }
        match self {
            Self::BiInvariant { spectrum, .. } if spectrum.len() != n => Err(
                SampleError::InvalidSpec(format!(
                    "spectrum has {} entries, n = {n}",
                    spectrum.len()
                )),
            ),
            Self::GaussianProduct { m: 0, .. } | Self::UnitRowsCorrelation { m: 0, .. } => {
                Err(SampleError::InvalidSpec("m must be positive".into()))
            }
            _ => Ok(()),
        }
    }

    /// Draws one `n×n` matrix.
    pub fn sample(&self, seed: SeedSpec) -> Result<Matrix, SampleError> {
        self.validate()?;
        Ok(match self {
            Self::Gaussian { n } => gaussian(*n, *n, seed),
            Self::HaarOrthogonal { n } => haar_orthogonal(*n, seed)?,
            Self::BiInvariant { spectrum, .. } => bi_invariant(spectrum, seed)?,
            Self::GaussianProduct { n, m } => gaussian_product(*n, *m, seed),
            Self::UnitRowsCorrelation { n, m } => unit_rows_correlation(*n, *m, seed),
        })
    }
}
