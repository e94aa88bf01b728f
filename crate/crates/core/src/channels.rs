//! Completely positive maps in Kraus form and their superoperator matrices.
//!
//! Vectorization is row-major: `vec(X)[i*d + j] = X[i, j]`, so
//! `vec(A X B) = (A kron B^T) vec(X)` and the superoperator column indexed by
//! `(i, j)` is `vec(F(|i><j|))`. Composition `F o G` is the matrix product
//! `F.matrix * G.matrix`.

use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::sampling::{complex_gaussian, random_matrix};
use crate::stats::fit_geometric_rate;

/// Structural tolerance for the unital / trace-preserving flags.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Iteration cap for [`power_limit`].
pub const MAX_POWER_STEPS: usize = 10_000;

/// `Z -> sum_k K_k Z K_k^dagger` with every `K_k` of shape `dim_out x dim_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::Invalid("a channel needs at least one Kraus operator".into()))?;
        let (dim_out, dim_in) = first.shape();
        if let Some(bad) = kraus.iter().find(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::dims(
                "KrausChannel::new",
                format!("{dim_out}x{dim_in}"),
                format!("{}x{}", bad.rows(), bad.cols()),
            ));
        }
        Ok(Self {
            dim_in,
            dim_out,
            kraus,
        })
    }

    /// Unitary conjugation `Z -> U Z U^dagger`.
    pub fn unitary(u: ComplexMatrix) -> Result<Self> {
        Self::new(vec![u])
    }

    pub fn identity(d: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(d)]).expect("one operator")
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    fn check_input(&self, z: &ComplexMatrix, dim: usize, op: &'static str) -> Result<()> {
        if z.shape() != (dim, dim) {
            return Err(Error::dims(
                op,
                format!("{dim}x{dim}"),
                format!("{}x{}", z.rows(), z.cols()),
            ));
        }
        Ok(())
    }

    /// `sum_k K_k z K_k^dagger`.
    pub fn apply(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_input(z, self.dim_in, "apply")?;
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out.add_scaled(c64(1.0, 0.0), &(&(k * z) * &k.adjoint()));
        }
        Ok(out)
    }

    /// Hilbert-Schmidt dual `sum_k K_k^dagger rho K_k`, characterized by
    /// `Tr(dual(rho) X) = Tr(rho apply(X))`.
    pub fn dual_apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_input(rho, self.dim_out, "dual_apply")?;
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out.add_scaled(c64(1.0, 0.0), &(&(&k.adjoint() * rho) * k));
        }
        Ok(out)
    }

    /// The dual map as a channel in its own right.
    pub fn dual(&self) -> Self {
        Self::new(self.kraus.iter().map(ComplexMatrix::adjoint).collect()).expect("same shapes")
    }

    /// `max |sum K K^dagger - 1|`.
    pub fn unital_deviation(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            s.add_scaled(c64(1.0, 0.0), &(k * &k.adjoint()));
        }
        s.max_abs_diff(&ComplexMatrix::identity(self.dim_out))
    }

    /// `max |sum K^dagger K - 1|`.
    pub fn trace_preserving_deviation(&self) -> f64 {
        let mut s = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            s.add_scaled(c64(1.0, 0.0), &(&k.adjoint() * k));
        }
        s.max_abs_diff(&ComplexMatrix::identity(self.dim_in))
    }

    pub fn is_unital(&self) -> bool {
        self.unital_deviation() <= STRUCTURE_TOL
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving_deviation() <= STRUCTURE_TOL
    }

    /// Superoperator matrix `sum_k K_k kron conj(K_k)`; requires `dim_in == dim_out`.
    pub fn to_superoperator(&self) -> Result<SuperOperator> {
        if self.dim_in != self.dim_out {
            return Err(Error::dims(
                "to_superoperator",
                format!("square map ({}x{})", self.dim_in, self.dim_in),
                format!("{} -> {}", self.dim_in, self.dim_out),
            ));
        }
        let d = self.dim_in;
        let mut m = ComplexMatrix::zeros(d * d, d * d);
        for k in &self.kraus {
            m.add_scaled(c64(1.0, 0.0), &k.kron(&k.conj()));
        }
        Ok(SuperOperator { dim: d, matrix: m })
    }
}

/// A linear map on `d x d` operators as a `d^2 x d^2` matrix in the
/// matrix-unit basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperOperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl SuperOperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.shape() != (dim * dim, dim * dim) {
            return Err(Error::dims(
                "SuperOperator::from_matrix",
                format!("{0}x{0}", dim * dim),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim),
        }
    }

    /// Tabulates an arbitrary map on `d x d` operators.
    ///
    /// Linearity is spot-checked on random combinations; a deviation above
    /// `1e-8` (relative to the output scale) is rejected.
    pub fn from_fn<F>(dim: usize, f: F) -> Result<Self>
    where
        F: Fn(&ComplexMatrix) -> ComplexMatrix,
    {
        let d2 = dim * dim;
        let mut matrix = ComplexMatrix::zeros(d2, d2);
        for i in 0..dim {
            for j in 0..dim {
                let image = f(&ComplexMatrix::unit(dim, i, j));
                if image.shape() != (dim, dim) {
                    return Err(Error::dims(
                        "to_superoperator",
                        format!("{dim}x{dim} image"),
                        format!("{}x{}", image.rows(), image.cols()),
                    ));
                }
                let col = i * dim + j;
                for (row, &z) in image.as_slice().iter().enumerate() {
                    matrix[(row, col)] = z;
                }
            }
        }
        let s = Self { dim, matrix };

        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..3 {
            let x = random_matrix(&mut rng, dim, dim);
            let y = random_matrix(&mut rng, dim, dim);
            let (a, b) = (complex_gaussian(&mut rng), complex_gaussian(&mut rng));
            let mut comb = x.scale(a);
            comb.add_scaled(b, &y);
            let direct = f(&comb);
            let mut lin = f(&x).scale(a);
            lin.add_scaled(b, &f(&y));
            let scale = 1.0 + lin.max_abs();
            let deviation = direct.max_abs_diff(&lin) / scale;
            let tabulated = s.apply(&comb)?.max_abs_diff(&lin) / scale;
            let worst = deviation.max(tabulated);
            if worst > 1e-8 {
                return Err(Error::NotLinear { deviation: worst });
            }
        }
        Ok(s)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        if z.shape() != (self.dim, self.dim) {
            return Err(Error::dims(
                "SuperOperator::apply",
                format!("{0}x{0}", self.dim),
                format!("{}x{}", z.rows(), z.cols()),
            ));
        }
        let v = self.matrix.apply_vec(z.as_slice())?;
        ComplexMatrix::new(self.dim, self.dim, v)
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::dims("compose", self.dim, other.dim));
        }
        Ok(Self {
            dim: self.dim,
            matrix: self.matrix.try_matmul(&other.matrix)?,
        })
    }

    pub fn pow(&self, n: u32) -> Self {
        Self {
            dim: self.dim,
            matrix: self.matrix.pow(n).expect("square"),
        }
    }

    /// Superoperator trace `sum_{a,b} <a| F(|a><b|) |b>`.
    pub fn trace(&self) -> C64 {
        let d = self.dim;
        let mut t = c64(0.0, 0.0);
        for a in 0..d {
            for b in 0..d {
                // <a| F(|a><b|) |b> is the (a,b) entry of column (a,b).
                let idx = a * d + b;
                t += self.matrix[(idx, idx)];
            }
        }
        t
    }

    /// `sum_{ij} <F_ij, F(F_ij)>_HS` for the orthonormal operator basis
    /// `F_ij = U |i><j| U^dagger`. Equal to [`Self::trace`] for any unitary `U`.
    pub fn trace_in_basis(&self, u: &ComplexMatrix) -> Result<C64> {
        let d = self.dim;
        let ud = u.adjoint();
        let mut t = c64(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                let f = &(u * &ComplexMatrix::unit(d, i, j)) * &ud;
                t += ComplexMatrix::hs_inner(&f, &self.apply(&f)?)?;
            }
        }
        Ok(t)
    }

    /// Choi matrix `sum_{ij} |i><j| kron F(|i><j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let d = self.dim;
        let mut c = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let image = self.apply(&ComplexMatrix::unit(d, i, j)).expect("shape");
                c.add_scaled(c64(1.0, 0.0), &ComplexMatrix::unit(d, i, j).kron(&image));
            }
        }
        c
    }

    /// Smallest Choi eigenvalue; `None` if the Choi matrix is not Hermitian.
    pub fn min_choi_eigenvalue(&self) -> Option<f64> {
        self.choi().eig_hermitian().ok().map(|e| e.values[0])
    }

    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        self.matrix.eigenvalues()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }
}

/// The completely depolarizing map `M -> Tr(M)/d * 1`.
pub fn depolarizing_limit(dim: usize) -> SuperOperator {
    let id = ComplexMatrix::identity(dim);
    SuperOperator::from_fn(dim, |m| id.scale(m.trace().expect("square") / dim as f64))
        .expect("linear map")
}

#[derive(Debug, Clone)]
pub struct PowerLimit {
    pub limit: SuperOperator,
    /// Fitted geometric rate of `||F^n - F_inf||_max`; `0` when the first
    /// power is already the fixed point.
    pub rate: f64,
    /// Number of powers computed before successive powers agreed to `tol`.
    pub steps: usize,
}

/// Iterates `F^n` until successive powers differ by less than `tol`
/// (max-entry norm), then fits the decay rate on the last ten
/// pre-convergence iterates.
pub fn power_limit(ch: &KrausChannel, tol: f64) -> Result<PowerLimit> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let deviation = ch.unital_deviation();
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotUnital { deviation });
    }
    let s = ch.to_superoperator()?;

    let mut recent: VecDeque<SuperOperator> = VecDeque::with_capacity(11);
    let mut current = s.clone();
    let mut steps = None;
    let mut last_diff = f64::INFINITY;
    for step in 1..=MAX_POWER_STEPS {
        let next = current.compose(&s)?;
        last_diff = next.max_abs_diff(&current);
        if recent.len() == 10 {
            recent.pop_front();
        }
        recent.push_back(current);
        current = next;
        if last_diff < tol {
            steps = Some(step);
            break;
        }
    }
    let steps = steps.ok_or(Error::NoConvergence {
        steps: MAX_POWER_STEPS,
        last_diff,
    })?;

    // Square a few times so the reference limit sits far below the fit window.
    let mut limit = current;
    for _ in 0..6 {
        limit = limit.compose(&limit)?;
    }

    let first = steps + 1 - recent.len();
    let points: Vec<(f64, f64)> = recent
        .iter()
        .enumerate()
        .map(|(i, p)| ((first + i) as f64, p.max_abs_diff(&limit)))
        .collect();
    let rate = fit_geometric_rate(&points).unwrap_or(0.0);
    Ok(PowerLimit { limit, rate, steps })
}
