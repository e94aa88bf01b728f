//! Seeded random operators for property tests and the verification reports.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::aklt::ObservableSpec;
use crate::linalg::{c64, ComplexMatrix, C64};

/// Standard complex Gaussian: real and imaginary parts `N(0, 1/2)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c64(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_gaussian(rng)).collect();
    ComplexMatrix::new(rows, cols, data).expect("positive dimensions")
}

/// `(G + G^dagger) / 2` for a Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    random_matrix(rng, d, d).hermitian_part()
}

/// Random positive semidefinite matrix `G G^dagger`.
pub fn random_psd<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, d);
    &g * &g.adjoint()
}

/// Random density matrix (trace one, PSD).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let p = random_psd(rng, d);
    let t = p.trace().expect("square").re;
    p.scale_real(1.0 / t)
}

/// Haar-ish unitary via Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> ComplexMatrix {
    let g = random_matrix(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j);
        for q in &cols {
            let proj: C64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        cols.push(v);
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (j, col) in cols.iter().enumerate() {
        for (i, &z) in col.iter().enumerate() {
            u[(i, j)] = z;
        }
    }
    u
}

/// Random single-site spin-1 operator, Hermitized when `hermitian`.
pub fn random_site_operator<R: Rng + ?Sized>(rng: &mut R, hermitian: bool) -> ComplexMatrix {
    if hermitian {
        random_hermitian(rng, 3)
    } else {
        random_matrix(rng, 3, 3)
    }
}

/// Random product observable on `n` consecutive sites.
pub fn random_factored_observable<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    hermitian: bool,
) -> ObservableSpec {
    let factors = (0..n).map(|_| random_site_operator(rng, hermitian)).collect();
    ObservableSpec::factored(factors).expect("3x3 factors")
}

/// Random full (generally entangled) observable on `n` sites.
pub fn random_full_observable<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    hermitian: bool,
) -> ObservableSpec {
    let d = 3usize.pow(n as u32);
    let m = if hermitian {
        random_hermitian(rng, d)
    } else {
        random_matrix(rng, d, d)
    };
    ObservableSpec::full(n, m).expect("3^n matrix")
}
