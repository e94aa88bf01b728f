//! The AKLT tensors, finite periodic chains and the spin-1 Hamiltonian.
//!
//! Finite-chain states are left unnormalized: the amplitude of
//! `|k_1 ... k_n>` is `Tr(A_{k_1} ... A_{k_n})` and its squared norm is
//! `Tr_so(Phi^n) = 1 + 3 (-1/3)^n`. Normalized expectations divide by
//! [`finite_expectation`] of the identity.

use serde::{Deserialize, Serialize};

use crate::channels::{KrausChannel, SuperOperator};
use crate::error::{Error, Result};
use crate::linalg::{c64, pauli, ComplexMatrix, C64};

/// Largest chain for which state vectors are built.
pub const MAX_STATE_SITES: usize = 10;
/// Largest observable support for transfer-operator and oracle evaluation.
pub const MAX_OBSERVABLE_SITES: usize = 8;

pub const PHYS_DIM: usize = 3;
pub const BOND_DIM: usize = 2;

const ZERO: C64 = c64(0.0, 0.0);

/// `A_+ = sqrt(2/3) sigma^+`, `A_0 = sqrt(1/3) sigma^z`, `A_- = -sqrt(2/3) sigma^-`.
#[derive(Debug, Clone, PartialEq)]
pub struct AkltTensors {
    pub a_plus: ComplexMatrix,
    pub a_zero: ComplexMatrix,
    pub a_minus: ComplexMatrix,
}

impl Default for AkltTensors {
    fn default() -> Self {
        Self::new()
    }
}

impl AkltTensors {
    pub fn new() -> Self {
        let s23 = (2.0f64 / 3.0).sqrt();
        let s13 = (1.0f64 / 3.0).sqrt();
        Self {
            a_plus: pauli::plus().scale_real(s23),
            a_zero: pauli::z().scale_real(s13),
            a_minus: pauli::minus().scale_real(-s23),
        }
    }

    /// In physical basis order `(+, 0, -)`.
    pub fn as_array(&self) -> [&ComplexMatrix; 3] {
        [&self.a_plus, &self.a_zero, &self.a_minus]
    }

    pub fn to_vec(&self) -> Vec<ComplexMatrix> {
        self.as_array().into_iter().cloned().collect()
    }

    /// `Phi(Z) = sum_k A_k Z A_k^dagger`.
    pub fn transfer_channel(&self) -> KrausChannel {
        KrausChannel::new(self.to_vec()).expect("three 2x2 tensors")
    }

    /// `(max |sum A A^dagger - 1|, max |sum A^dagger A - 1|)`.
    pub fn gauge_deviations(&self) -> (f64, f64) {
        let ch = self.transfer_channel();
        (ch.unital_deviation(), ch.trace_preserving_deviation())
    }
}

/// Row-major 2x2 block used in the hot loops.
pub(crate) type Mat2 = [C64; 4];

fn to_mat2(m: &ComplexMatrix) -> Mat2 {
    let s = m.as_slice();
    [s[0], s[1], s[2], s[3]]
}

pub(crate) fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

pub(crate) fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [a[0].conj(), a[2].conj(), a[1].conj(), a[3].conj()]
}

fn mat2_transpose(a: &Mat2) -> Mat2 {
    [a[0], a[2], a[1], a[3]]
}

/// All products `A_{k_1} ... A_{k_n}`, indexed with `k_1` as the slowest digit.
pub(crate) fn string_products(n: usize) -> Vec<Mat2> {
    let tensors = AkltTensors::new();
    let a: Vec<Mat2> = tensors.as_array().into_iter().map(to_mat2).collect();
    let mut out: Vec<Mat2> = vec![[c64(1.0, 0.0), ZERO, ZERO, c64(1.0, 0.0)]];
    for _ in 0..n {
        out = out
            .iter()
            .flat_map(|p| a.iter().map(move |ak| mat2_mul(p, ak)))
            .collect();
    }
    out
}

/// Digits of a multi-index, site 1 first.
pub fn digits(mut index: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for slot in d.iter_mut().rev() {
        *slot = index % PHYS_DIM;
        index /= PHYS_DIM;
    }
    d
}

fn check_sites(n: usize, max: usize, range: &'static str) -> Result<()> {
    if n == 0 || n > max {
        return Err(Error::OutOfRange {
            what: "n_sites",
            value: n,
            range,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObservableForm {
    /// `3^n x 3^n` matrix in the multi-site basis.
    Full(ComplexMatrix),
    /// `Y_1 (x) ... (x) Y_n`.
    Factored(Vec<ComplexMatrix>),
}

/// A local observable on `n_sites` consecutive sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "crate::serde_repr::ObservableRepr", into = "crate::serde_repr::ObservableRepr")]
pub struct ObservableSpec {
    n_sites: usize,
    form: ObservableForm,
}

impl ObservableSpec {
    pub fn factored(factors: Vec<ComplexMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Invalid("an observable needs at least one site".into()));
        }
        if let Some((site, bad)) = factors
            .iter()
            .enumerate()
            .find(|(_, f)| f.shape() != (PHYS_DIM, PHYS_DIM))
        {
            return Err(Error::dims(
                "ObservableSpec factor",
                "3x3",
                format!("{}x{} at site {}", bad.rows(), bad.cols(), site + 1),
            ));
        }
        Ok(Self {
            n_sites: factors.len(),
            form: ObservableForm::Factored(factors),
        })
    }

    pub fn full(n_sites: usize, matrix: ComplexMatrix) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::Invalid("an observable needs at least one site".into()));
        }
        let d = PHYS_DIM
            .checked_pow(n_sites as u32)
            .ok_or_else(|| Error::Invalid(format!("n_sites = {n_sites} is too large")))?;
        if matrix.shape() != (d, d) {
            return Err(Error::dims(
                "ObservableSpec full matrix",
                format!("{d}x{d} for {n_sites} sites"),
                format!("{}x{}", matrix.rows(), matrix.cols()),
            ));
        }
        Ok(Self {
            n_sites,
            form: ObservableForm::Full(matrix),
        })
    }

    pub fn identity(n_sites: usize) -> Self {
        Self::factored(vec![ComplexMatrix::identity(PHYS_DIM); n_sites]).expect("n_sites > 0")
    }

    /// `Y_1 (x) 1^{(x)(gap)} (x) Y_2`.
    pub fn two_point(first: ComplexMatrix, second: ComplexMatrix, distance: usize) -> Result<Self> {
        let mut f = vec![first];
        f.extend(std::iter::repeat_n(ComplexMatrix::identity(PHYS_DIM), distance.saturating_sub(1)));
        f.push(second);
        Self::factored(f)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn form(&self) -> &ObservableForm {
        &self.form
    }

    pub fn factors(&self) -> Option<&[ComplexMatrix]> {
        match &self.form {
            ObservableForm::Factored(f) => Some(f),
            ObservableForm::Full(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        PHYS_DIM.pow(self.n_sites as u32)
    }

    /// `<k_1..k_n| Y |l_1..l_n>` with flat multi-indices.
    pub fn element(&self, k: usize, l: usize) -> C64 {
        match &self.form {
            ObservableForm::Full(m) => m[(k, l)],
            ObservableForm::Factored(f) => {
                let mut k = k;
                let mut l = l;
                let mut prod = c64(1.0, 0.0);
                for y in f.iter().rev() {
                    prod *= y[(k % PHYS_DIM, l % PHYS_DIM)];
                    if prod == ZERO {
                        return ZERO;
                    }
                    k /= PHYS_DIM;
                    l /= PHYS_DIM;
                }
                prod
            }
        }
    }

    /// Expands to the full matrix; factors kron'd in site order.
    pub fn to_full(&self) -> ComplexMatrix {
        match &self.form {
            ObservableForm::Full(m) => m.clone(),
            ObservableForm::Factored(f) => ComplexMatrix::kron_all(f).expect("non-empty"),
        }
    }

    /// Observable on the concatenated block `self` then `other`.
    pub fn tensor(&self, other: &Self) -> Self {
        match (&self.form, &other.form) {
            (ObservableForm::Factored(a), ObservableForm::Factored(b)) => {
                Self::factored(a.iter().chain(b).cloned().collect()).expect("3x3 factors")
            }
            _ => Self::full(self.n_sites + other.n_sites, self.to_full().kron(&other.to_full()))
                .expect("consistent dimensions"),
        }
    }

    /// Pads with identities: `1^{(x)left} (x) Y (x) 1^{(x)right}`.
    pub fn embed(&self, left: usize, right: usize) -> Self {
        let mut out = self.clone();
        if left > 0 {
            out = ObservableSpec::identity(left).tensor(&out);
        }
        if right > 0 {
            out = out.tensor(&ObservableSpec::identity(right));
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        match &self.form {
            ObservableForm::Full(m) => Self::full(self.n_sites, m.adjoint()).expect("same shape"),
            ObservableForm::Factored(f) => {
                Self::factored(f.iter().map(ComplexMatrix::adjoint).collect()).expect("3x3")
            }
        }
    }

    /// Product `self * other` of observables on the same sites.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.n_sites != other.n_sites {
            return Err(Error::dims("ObservableSpec::compose", self.n_sites, other.n_sites));
        }
        match (&self.form, &other.form) {
            (ObservableForm::Factored(a), ObservableForm::Factored(b)) => {
                Self::factored(a.iter().zip(b).map(|(x, y)| x * y).collect())
            }
            _ => Self::full(self.n_sites, &self.to_full() * &other.to_full()),
        }
    }
}

/// Unnormalized periodic AKLT state on `n_sites` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct MpsState {
    pub n_sites: usize,
    pub amplitudes: Vec<C64>,
}

impl MpsState {
    pub fn squared_norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Amplitude of `|k_1 .. k_n>` given as digits in `0..3`.
    pub fn amplitude(&self, ks: &[usize]) -> C64 {
        let idx = ks.iter().fold(0, |acc, &k| acc * PHYS_DIM + k);
        self.amplitudes[idx]
    }
}

/// `|psi> = sum_k Tr(A_{k_1} ... A_{k_n}) |k_1 ... k_n>`, for `1 <= n <= 10`.
pub fn build_mps_state(n: usize) -> Result<MpsState> {
    check_sites(n, MAX_STATE_SITES, "1..=10")?;
    let amplitudes = string_products(n).iter().map(|p| p[0] + p[3]).collect();
    Ok(MpsState {
        n_sites: n,
        amplitudes,
    })
}

/// The lifted map
/// `Y^(M) = sum_{k,l} <k|Y|l> A_{k_n}^dagger .. A_{k_1}^dagger M A_{l_1} .. A_{l_n}`
/// as a superoperator, evaluated directly from the matrix elements.
pub fn hat_map(y: &ObservableSpec) -> Result<SuperOperator> {
    check_sites(y.n_sites(), MAX_OBSERVABLE_SITES, "1..=8")?;
    let n = y.n_sites();
    let prods = string_products(n);
    let dim = prods.len();

    // S = sum_k B_k^dagger kron W_k, W_k = sum_l <k|Y|l> B_l^T.
    let mut s = ComplexMatrix::zeros(4, 4);
    for k in 0..dim {
        let mut w: Mat2 = [ZERO; 4];
        for (l, bl) in prods.iter().enumerate() {
            let yk = y.element(k, l);
            if yk == ZERO {
                continue;
            }
            let blt = mat2_transpose(bl);
            for (wi, bi) in w.iter_mut().zip(blt) {
                *wi += yk * bi;
            }
        }
        if w.iter().all(|z| *z == ZERO) {
            continue;
        }
        let bkd = mat2_adjoint(&prods[k]);
        for i1 in 0..2 {
            for j1 in 0..2 {
                let a = bkd[i1 * 2 + j1];
                if a == ZERO {
                    continue;
                }
                for i2 in 0..2 {
                    for j2 in 0..2 {
                        s[(i1 * 2 + i2, j1 * 2 + j2)] += a * w[i2 * 2 + j2];
                    }
                }
            }
        }
    }
    SuperOperator::from_matrix(BOND_DIM, s)
}

/// `omega_n(Y) = <psi^(n)| Y |psi^(n)> = Tr_so(Y^)` (unnormalized).
pub fn finite_expectation(y: &ObservableSpec) -> Result<C64> {
    Ok(hat_map(y)?.trace())
}

/// Brute-force `<psi^(n)| Y |psi^(n)>` from the 3^n amplitudes, without any
/// transfer-operator machinery.
pub fn exact_oracle(y: &ObservableSpec) -> Result<C64> {
    check_sites(y.n_sites(), MAX_OBSERVABLE_SITES, "1..=8")?;
    let psi = build_mps_state(y.n_sites())?;
    let y_psi = match y.form() {
        ObservableForm::Full(m) => m.apply_vec(&psi.amplitudes)?,
        ObservableForm::Factored(f) => apply_product(f, &psi.amplitudes),
    };
    Ok(psi
        .amplitudes
        .iter()
        .zip(&y_psi)
        .map(|(a, b)| a.conj() * b)
        .sum())
}

/// Applies `Y_1 (x) ... (x) Y_n` to a 3^n vector site by site.
pub fn apply_product(factors: &[ComplexMatrix], v: &[C64]) -> Vec<C64> {
    let n = factors.len();
    let mut cur = v.to_vec();
    for (site, y) in factors.iter().enumerate() {
        let inner = PHYS_DIM.pow((n - site - 1) as u32);
        let outer = PHYS_DIM.pow(site as u32);
        let mut next = vec![ZERO; cur.len()];
        for o in 0..outer {
            for a in 0..PHYS_DIM {
                for b in 0..PHYS_DIM {
                    let yab = y[(a, b)];
                    if yab == ZERO {
                        continue;
                    }
                    let dst = (o * PHYS_DIM + a) * inner;
                    let src = (o * PHYS_DIM + b) * inner;
                    for i in 0..inner {
                        next[dst + i] += yab * cur[src + i];
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spin1 {
    pub sx: ComplexMatrix,
    pub sy: ComplexMatrix,
    pub sz: ComplexMatrix,
}

impl Spin1 {
    pub fn axis(&self, axis: Axis) -> &ComplexMatrix {
        match axis {
            Axis::X => &self.sx,
            Axis::Y => &self.sy,
            Axis::Z => &self.sz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Invalid(format!("unknown axis {other:?}"))),
        }
    }
}

/// Spin-1 matrices in the `(|+>, |0>, |->)` basis, `S^z = diag(1, 0, -1)`.
pub fn spin1_operators() -> Spin1 {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sx = ComplexMatrix::from_real_rows(&[&[0.0, r, 0.0], &[r, 0.0, r], &[0.0, r, 0.0]]);
    let sy = ComplexMatrix::from_rows(&[
        vec![ZERO, c64(0.0, -r), ZERO],
        vec![c64(0.0, r), ZERO, c64(0.0, -r)],
        vec![ZERO, c64(0.0, r), ZERO],
    ]);
    let sz = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, -1.0]]);
    Spin1 { sx, sy, sz }
}

/// `S_i . S_j + (S_i . S_j)^2 / 3` on two spin-1 sites (9x9).
pub fn two_site_term() -> ComplexMatrix {
    let s = spin1_operators();
    let dot = &(&s.sx.kron(&s.sx) + &s.sy.kron(&s.sy)) + &s.sz.kron(&s.sz);
    let sq = &dot * &dot;
    &dot + &sq.scale_real(1.0 / 3.0)
}

/// Embeds a 9x9 two-site operator on sites `(i, j)` (zero-based) of `n`.
fn embed_two_site(h: &ComplexMatrix, i: usize, j: usize, n: usize, out: &mut ComplexMatrix) {
    let dim = PHYS_DIM.pow(n as u32);
    let wi = PHYS_DIM.pow((n - 1 - i) as u32);
    let wj = PHYS_DIM.pow((n - 1 - j) as u32);
    for col in 0..dim {
        let di = (col / wi) % PHYS_DIM;
        let dj = (col / wj) % PHYS_DIM;
        let base = col - di * wi - dj * wj;
        let hc = di * PHYS_DIM + dj;
        for a in 0..PHYS_DIM {
            for b in 0..PHYS_DIM {
                let v = h[(a * PHYS_DIM + b, hc)];
                if v != ZERO {
                    out[(base + a * wi + b * wj, col)] += v;
                }
            }
        }
    }
}

/// Dense AKLT Hamiltonian on `2 <= n <= 8` sites; periodic adds the `(n, 1)` bond.
pub fn aklt_hamiltonian(n: usize, periodic: bool) -> Result<ComplexMatrix> {
    if !(2..=MAX_OBSERVABLE_SITES).contains(&n) {
        return Err(Error::OutOfRange {
            what: "n_sites",
            value: n,
            range: "2..=8",
        });
    }
    let h = two_site_term();
    let dim = PHYS_DIM.pow(n as u32);
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..n - 1 {
        embed_two_site(&h, i, i + 1, n, &mut out);
    }
    // For n = 2 the ring closes with a second copy of the same bond.
    if periodic {
        embed_two_site(&h, n - 1, 0, n, &mut out);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_factored_observable, random_full_observable, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn tensors_are_exact_and_gauged() {
        let t = AkltTensors::new();
        assert_eq!(t.a_plus[(0, 1)], c64((2.0f64 / 3.0).sqrt(), 0.0));
        assert_eq!(t.a_zero[(1, 1)], c64(-(1.0f64 / 3.0).sqrt(), 0.0));
        assert_eq!(t.a_minus[(1, 0)], c64(-(2.0f64 / 3.0).sqrt(), 0.0));
        let (u, tp) = t.gauge_deviations();
        assert!(u < 1e-14 && tp < 1e-14, "{u} {tp}");
    }

    #[test]
    fn mps_small_chains() {
        let one = build_mps_state(1).unwrap();
        assert!(one.amplitudes.iter().all(|z| z.norm() < 1e-15));

        let two = build_mps_state(2).unwrap();
        assert!((two.amplitude(&[0, 2]) - c64(-2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((two.amplitude(&[2, 0]) - c64(-2.0 / 3.0, 0.0)).norm() < 1e-12);
        assert!((two.amplitude(&[1, 1]) - c64(2.0 / 3.0, 0.0)).norm() < 1e-12);
        // Brute-force sum of |amplitude|^2.
        assert!((two.squared_norm() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mps_amplitudes_match_matrix_products() {
        let t = AkltTensors::new();
        let a = t.as_array();
        let psi = build_mps_state(4).unwrap();
        for idx in 0..81 {
            let ks = digits(idx, 4);
            let prod = ks.iter().skip(1).fold(a[ks[0]].clone(), |acc, &k| &acc * a[k]);
            assert!((psi.amplitudes[idx] - prod.trace().unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn mps_norm_is_transfer_trace() {
        let s = AkltTensors::new().transfer_channel().to_superoperator().unwrap();
        for n in 1..=8 {
            let psi = build_mps_state(n).unwrap();
            let tr = s.pow(n as u32).trace();
            assert!((psi.squared_norm() - tr.re).abs() < 1e-10 && tr.im.abs() < 1e-12);
        }
    }

    #[test]
    fn mps_rejects_out_of_range() {
        assert!(build_mps_state(0).is_err());
        assert!(build_mps_state(11).is_err());
    }

    #[test]
    fn hat_of_identity_is_transfer_power() {
        let s = AkltTensors::new().transfer_channel().to_superoperator().unwrap();
        for n in 1..=4 {
            let h = hat_map(&ObservableSpec::identity(n)).unwrap();
            assert!(h.max_abs_diff(&s.pow(n as u32)) < 1e-12);
        }
    }

    #[test]
    fn hat_map_matches_kraus_definition() {
        // Direct evaluation of the defining sum on matrix units, n = 2.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let y = random_full_observable(&mut rng, 2, false);
        let a = AkltTensors::new();
        let a = a.as_array();
        let h = hat_map(&y).unwrap();
        let m = random_matrix(&mut rng, 2, 2);
        let mut direct = ComplexMatrix::zeros(2, 2);
        for k in 0..9 {
            for l in 0..9 {
                let (k1, k2) = (k / 3, k % 3);
                let (l1, l2) = (l / 3, l % 3);
                let left = &a[k2].adjoint() * &a[k1].adjoint();
                let right = a[l1] * a[l2];
                direct.add_scaled(y.element(k, l), &(&(&left * &m) * &right));
            }
        }
        assert!(h.apply(&m).unwrap().approx_eq(&direct, 1e-12));
    }

    #[test]
    fn finite_expectation_agrees_with_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for trial in 0..50 {
            let n = 2 + trial % 3;
            let y = if trial % 2 == 0 {
                random_factored_observable(&mut rng, n, trial % 4 == 0)
            } else {
                random_full_observable(&mut rng, n, trial % 3 == 0)
            };
            let a = finite_expectation(&y).unwrap();
            let b = exact_oracle(&y).unwrap();
            assert!((a - b).norm() < 1e-9, "trial {trial}: {a} vs {b}");
        }
    }

    #[test]
    fn pinned_two_site_values() {
        let s = spin1_operators();
        let id2 = ObservableSpec::identity(2);
        assert!((finite_expectation(&id2).unwrap() - c64(4.0 / 3.0, 0.0)).norm() < 1e-12);

        let sz_i = ObservableSpec::factored(vec![s.sz.clone(), ComplexMatrix::identity(3)]).unwrap();
        assert!(finite_expectation(&sz_i).unwrap().norm() < 1e-12);

        // Enumeration: (+,-) and (-,+) each contribute (-1)(4/9); (0,0) has S^z = 0.
        let zz = ObservableSpec::factored(vec![s.sz.clone(), s.sz.clone()]).unwrap();
        let raw = exact_oracle(&zz).unwrap();
        assert!((raw - c64(-8.0 / 9.0, 0.0)).norm() < 1e-12, "{raw}");
        let normalized = raw / exact_oracle(&id2).unwrap();
        assert!((normalized - c64(-2.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn oracle_is_real_for_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for n in 1..=4 {
            let y = random_full_observable(&mut rng, n, true);
            assert!(exact_oracle(&y).unwrap().im.abs() < 1e-12);
        }
        let psi = build_mps_state(3).unwrap();
        let id = exact_oracle(&ObservableSpec::identity(3)).unwrap();
        assert!((id.re - psi.squared_norm()).abs() < 1e-14);
    }

    #[test]
    fn block_composition_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for _ in 0..10 {
            let y = random_full_observable(&mut rng, 2, false);
            let z = random_factored_observable(&mut rng, 1, false);
            let joint = hat_map(&y.tensor(&z)).unwrap();
            let hy = hat_map(&y).unwrap();
            let hz = hat_map(&z).unwrap();
            // The right-hand block acts last: (Y (x) Z)^ = Z^ o Y^.
            assert!(joint.max_abs_diff(&hz.compose(&hy).unwrap()) < 1e-10);
        }
    }

    #[test]
    fn observable_spec_validation() {
        assert!(ObservableSpec::factored(vec![]).is_err());
        assert!(ObservableSpec::factored(vec![ComplexMatrix::identity(2)]).is_err());
        assert!(ObservableSpec::full(2, ComplexMatrix::identity(8)).is_err());
        let f = ObservableSpec::factored(vec![
            spin1_operators().sx,
            spin1_operators().sz,
        ])
        .unwrap();
        let full = ObservableSpec::full(2, f.to_full()).unwrap();
        for k in 0..9 {
            for l in 0..9 {
                assert_eq!(f.element(k, l), full.element(k, l));
            }
        }
        assert!(hat_map(&ObservableSpec::identity(9)).is_err());
    }

    #[test]
    fn spin1_algebra() {
        let s = spin1_operators();
        let i = c64(0.0, 1.0);
        let zero = ComplexMatrix::zeros(3, 3);
        let c1 = &ComplexMatrix::commutator(&s.sx, &s.sy) - &s.sz.scale(i);
        let c2 = &ComplexMatrix::commutator(&s.sy, &s.sz) - &s.sx.scale(i);
        let c3 = &ComplexMatrix::commutator(&s.sz, &s.sx) - &s.sy.scale(i);
        for c in [c1, c2, c3] {
            assert!(c.approx_eq(&zero, 1e-14));
        }
        let casimir = &(&(&s.sx * &s.sx) + &(&s.sy * &s.sy)) + &(&s.sz * &s.sz);
        assert!(casimir.approx_eq(&ComplexMatrix::identity(3).scale_real(2.0), 1e-14));
        let plus = [c64(1.0, 0.0), ZERO, ZERO];
        assert_eq!(s.sz.apply_vec(&plus).unwrap(), plus.to_vec());
    }

    #[test]
    fn two_site_spectrum() {
        let h = aklt_hamiltonian(2, false).unwrap();
        assert!(h.is_hermitian(1e-12));
        let eig = h.eig_hermitian().unwrap();
        // Singlet and triplet sit at -2/3, the quintet at 4/3.
        for v in &eig.values[..4] {
            assert!((v + 2.0 / 3.0).abs() < 1e-10);
        }
        for v in &eig.values[4..] {
            assert!((v - 4.0 / 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn mps_is_eigenvector_of_periodic_hamiltonian() {
        for n in 3..=6 {
            let h = aklt_hamiltonian(n, true).unwrap();
            assert!(h.is_hermitian(1e-12));
            let psi = build_mps_state(n).unwrap();
            let hpsi = h.apply_vec(&psi.amplitudes).unwrap();
            let e0 = -2.0 * n as f64 / 3.0;
            let res: f64 = hpsi
                .iter()
                .zip(&psi.amplitudes)
                .map(|(a, b)| (a - b * e0).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(res / psi.squared_norm().sqrt() < 1e-9, "n={n} residual {res}");
        }
    }

    #[test]
    fn hamiltonian_range() {
        assert!(aklt_hamiltonian(1, true).is_err());
        assert!(aklt_hamiltonian(9, false).is_err());
    }

    #[test]
    fn apply_product_matches_kron() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let y = random_factored_observable(&mut rng, 3, false);
        let v: Vec<C64> = (0..27).map(|_| crate::sampling::complex_gaussian(&mut rng)).collect();
        let a = apply_product(y.factors().unwrap(), &v);
        let b = y.to_full().apply_vec(&v).unwrap();
        let dev = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }
}
