//! Matrix-free linear operators: forward/adjoint application plus a norm bound.
//!
//! The deblurring experiments need a Gaussian blur with reflexive (symmetric)
//! boundary handling; images are stored row-major as flat `Vec<f64>` so the
//! operator never materializes a dense matrix.

use crate::error::{DsError, Result};
use crate::vec_ops::{dot, norm_sq};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A linear operator `A` together with its adjoint and an upper bound on `‖A‖²`.
///
/// Implementations must satisfy `⟨apply(x), y⟩ = ⟨x, apply_adjoint(y)⟩` and
/// `‖apply(x)‖² ≤ norm_sq_bound·‖x‖²`.
pub trait LinearMap: Send + Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>>;
    fn norm_sq_bound(&self) -> f64;
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(DsError::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Identity on `ℝ^n`.
pub struct Identity {
    dim: usize,
}

impl Identity {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl LinearMap for Identity {
    fn dim_in(&self) -> usize {
        self.dim
    }
    fn dim_out(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        Ok(x.to_vec())
    }
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, y.len())?;
        Ok(y.to_vec())
    }
    fn norm_sq_bound(&self) -> f64 {
        1.0
    }
}

/// Dense row-major matrix, for small test problems.
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    norm_sq_bound: f64,
}

impl DenseMatrix {
    /// `data` is row-major with `rows*cols` entries. The norm bound is the
    /// squared Frobenius norm, which dominates `‖A‖²`.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(DsError::InvalidArgument(format!(
                "dense matrix: {}x{} needs {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        let fro_sq = norm_sq(&data);
        Ok(Self {
            rows,
            cols,
            data,
            norm_sq_bound: fro_sq,
        })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self::new(n, n, data).unwrap()
    }
}

impl LinearMap for DenseMatrix {
    fn dim_in(&self) -> usize {
        self.cols
    }
    fn dim_out(&self) -> usize {
        self.rows
    }
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            out[r] = dot(&self.data[r * self.cols..(r + 1) * self.cols], x);
        }
        Ok(out)
    }
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            for c in 0..self.cols {
                out[c] += row[c] * y[r];
            }
        }
        Ok(out)
    }
    fn norm_sq_bound(&self) -> f64 {
        self.norm_sq_bound
    }
}

/// Square odd-sized convolution kernel with nonnegative entries summing to 1.
#[derive(Clone, Debug)]
pub struct Kernel {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size % 2 == 0 || size == 0 {
            return Err(DsError::InvalidArgument(format!(
                "kernel size must be odd and positive, got {size}"
            )));
        }
        if weights.len() != size * size {
            return Err(DsError::InvalidArgument(format!(
                "kernel needs {} weights, got {}",
                size * size,
                weights.len()
            )));
        }
        if weights.iter().any(|w| *w < 0.0) {
            return Err(DsError::InvalidArgument(
                "kernel entries must be nonnegative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(DsError::InvalidArgument(format!(
                "kernel entries must sum to 1, got {sum}"
            )));
        }
        Ok(Self { size, weights })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.size + j]
    }

    /// k[i][j] = k[j][i] = k[-i][-j] on the centered grid.
    pub fn is_rotationally_symmetric(&self) -> bool {
        let n = self.size;
        for i in 0..n {
            for j in 0..n {
                let v = self.get(i, j);
                if (v - self.get(j, i)).abs() > 1e-14
                    || (v - self.get(n - 1 - i, n - 1 - j)).abs() > 1e-14
                {
                    return false;
                }
            }
        }
        true
    }
}

/// Normalized Gaussian lowpass kernel: entries proportional to
/// `exp(−(i²+j²)/(2σ²))` on the centered index grid.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Result<Kernel> {
    if size % 2 == 0 || size == 0 {
        return Err(DsError::InvalidArgument(format!(
            "gaussian kernel size must be odd and positive, got {size}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(DsError::InvalidArgument(format!(
            "gaussian kernel sigma must be positive, got {sigma}"
        )));
    }
    let half = (size / 2) as i64;
    let mut weights = Vec::with_capacity(size * size);
    for i in -half..=half {
        for j in -half..=half {
            weights.push((-((i * i + j * j) as f64) / (2.0 * sigma * sigma)).exp());
        }
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(Kernel { size, weights })
}

/// 2-D correlation with reflexive (symmetric) boundary handling.
///
/// Out-of-range indices are mirrored across the boundary edge without
/// repeating the edge pixel's reflection axis beyond one copy, i.e. the
/// padding of `[a b c]` to the left is `[b a | a b c]`. A constant image is a
/// fixed point, so `‖A‖² = 1` is attained and declared as the norm bound.
pub struct BlurOperator {
    rows: usize,
    cols: usize,
    kernel: Kernel,
}

impl BlurOperator {
    pub fn new(rows: usize, cols: usize, kernel: Kernel) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(DsError::InvalidArgument(
                "blur operator needs positive image dimensions".into(),
            ));
        }
        Ok(Self { rows, cols, kernel })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn reflect(mut i: i64, n: i64) -> usize {
        loop {
            if i < 0 {
                i = -i - 1;
            } else if i >= n {
                i = 2 * n - 1 - i;
            } else {
                return i as usize;
            }
        }
    }
}

impl LinearMap for BlurOperator {
    fn dim_in(&self) -> usize {
        self.rows * self.cols
    }
    fn dim_out(&self) -> usize {
        self.rows * self.cols
    }

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows * self.cols, x.len())?;
        let (rows, cols) = (self.rows as i64, self.cols as i64);
        let half = (self.kernel.size / 2) as i64;
        let mut out = vec![0.0; x.len()];
        for r in 0..rows {
            for c in 0..cols {
                let mut acc = 0.0;
                for i in -half..=half {
                    let rr = Self::reflect(r + i, rows);
                    for j in -half..=half {
                        let cc = Self::reflect(c + j, cols);
                        acc += self.kernel.get((i + half) as usize, (j + half) as usize)
                            * x[rr * self.cols + cc];
                    }
                }
                out[(r * cols + c) as usize] = acc;
            }
        }
        Ok(out)
    }

    // Exact transpose of apply: scatter each output contribution back to the
    // mirrored source pixel. Coincides with apply for rotationally symmetric
    // kernels.
    fn apply_adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.rows * self.cols, y.len())?;
        let (rows, cols) = (self.rows as i64, self.cols as i64);
        let half = (self.kernel.size / 2) as i64;
        let mut out = vec![0.0; y.len()];
        for r in 0..rows {
            for c in 0..cols {
                let w = y[(r * cols + c) as usize];
                for i in -half..=half {
                    let rr = Self::reflect(r + i, rows);
                    for j in -half..=half {
                        let cc = Self::reflect(c + j, cols);
                        out[rr * self.cols + cc] +=
                            self.kernel.get((i + half) as usize, (j + half) as usize) * w;
                    }
                }
            }
        }
        Ok(out)
    }

    fn norm_sq_bound(&self) -> f64 {
        1.0
    }
}

/// Relative-change stopping tolerance for the power iteration.
const POWER_ITERATION_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct PowerIteration {
    pub estimate: f64,
    /// Rayleigh quotients of `A*A`, one per completed iteration.
    pub rayleigh_history: Vec<f64>,
}

/// Power-iteration estimate of `‖A‖²`, the largest eigenvalue of `A*A`.
///
/// Deterministic for a fixed seed; the returned value never exceeds the
/// operator's declared norm bound.
pub fn operator_norm_sq(op: &dyn LinearMap, iters: usize, seed: u64) -> Result<f64> {
    Ok(operator_norm_sq_detailed(op, iters, seed)?.estimate)
}

pub fn operator_norm_sq_detailed(
    op: &dyn LinearMap,
    iters: usize,
    seed: u64,
) -> Result<PowerIteration> {
    if iters == 0 {
        return Err(DsError::InvalidArgument(
            "power iteration needs at least one iteration".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x: Vec<f64> = (0..op.dim_in()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut history = Vec::new();
    let mut estimate = 0.0;
    for _ in 0..iters {
        let xn = norm_sq(&x).sqrt();
        if xn == 0.0 {
            // zero operator (or start vector annihilated): spectral norm 0
            estimate = 0.0;
            history.push(0.0);
            break;
        }
        for v in &mut x {
            *v /= xn;
        }
        let bx = op.apply_adjoint(&op.apply(&x)?)?;
        let rayleigh = dot(&x, &bx);
        history.push(rayleigh);
        let prev = estimate;
        estimate = rayleigh;
        x = bx;
        if prev > 0.0 && (estimate - prev).abs() <= POWER_ITERATION_TOL * prev {
            break;
        }
    }
    let bound = op.norm_sq_bound();
    if estimate > bound {
        estimate = bound;
    }
    Ok(PowerIteration {
        estimate,
        rayleigh_history: history,
    })
}
