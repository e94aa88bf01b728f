//! Hidden quantum Markov models on a hidden/output chain.
//!
//! A model is a generative triple: an initial functional on the hidden
//! algebra, a hidden transition expectation `E_H: B_H (x) B_H -> B_H` and an
//! emission expectation `E_HO: B_H (x) B_O -> B_H`. The two one-step block
//! maps differ only in the order these are composed:
//!
//! ```text
//! conventional  F_{a,b}(x) = E_H(E_HO(a (x) b) (x) x)
//! causal        G_{a,b}(x) = E_HO(E_H(a (x) x) (x) b)
//! ```
//!
//! The joint state of a causal model is evaluated by the backward recursion
//! `T_0 = 1`, `T_{k+1} = G_{a_{n-k}, b_{n-k}}(T_k)`, `Psi = phi(T_n)`.
//!
//! With `E_H(X (x) Z) = Tr(X)/2 Z`, AKLT emission and `phi = Tr/2`, the
//! observation process reproduces the infinite-volume AKLT state.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::aklt::{digits, AkltTensors, ObservableForm, ObservableSpec, MAX_OBSERVABLE_SITES, PHYS_DIM};
use crate::channels::STRUCTURE_TOL;
use crate::error::{Error, Result};
use crate::linalg::{c64, pauli, ComplexMatrix, C64};
use crate::sampling::{random_hermitian, random_matrix};

pub const MAX_JOINT_SITES: usize = 12;
/// Full (non-product) observables are expanded in matrix units; keep it small.
pub const MAX_FULL_OBSERVATION_SITES: usize = 4;

/// A completely positive map `B_A (x) B_B -> B_out`, unital when it is a
/// transition expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionExpectation {
    /// `X (x) Z -> scale * Tr(X) * Z`.
    RankOneTrace(f64),
    /// `W -> V^dagger W V` for `V: H_out -> H_A (x) H_B`.
    Isometry(ComplexMatrix),
    /// `W -> sum_i V_i^dagger W V_i`, each `V_i: H_out -> H_A (x) H_B`.
    Kraus(Vec<ComplexMatrix>),
    /// `X (x) Y -> sum_{k,l} <k|Y|l> K_k X K_l^dagger`.
    KrausPairs(Vec<ComplexMatrix>),
}

impl TransitionExpectation {
    pub fn apply(&self, x: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
        for m in [x, z] {
            if !m.is_square() {
                return Err(Error::NotSquare {
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
        }
        match self {
            TransitionExpectation::RankOneTrace(scale) => Ok(z.scale(x.trace()? * *scale)),
            TransitionExpectation::Isometry(v) => conjugate(&x.kron(z), std::slice::from_ref(v)),
            TransitionExpectation::Kraus(vs) => conjugate(&x.kron(z), vs),
            TransitionExpectation::KrausPairs(ks) => {
                if z.rows() != ks.len() {
                    return Err(Error::dims(
                        "emission",
                        format!("{0}x{0} output operator", ks.len()),
                        format!("{}x{}", z.rows(), z.cols()),
                    ));
                }
                let d = ks.first().map_or(0, ComplexMatrix::rows);
                if ks.iter().any(|k| k.shape() != (d, x.rows())) {
                    return Err(Error::dims(
                        "emission",
                        format!("Kraus operators {d}x{}", x.rows()),
                        "inconsistent Kraus shapes",
                    ));
                }
                let mut out = ComplexMatrix::zeros(d, d);
                for (k, kk) in ks.iter().enumerate() {
                    let left = kk * x;
                    for (l, kl) in ks.iter().enumerate() {
                        let w = z[(k, l)];
                        if w != c64(0.0, 0.0) {
                            out.add_scaled(w, &(&left * &kl.adjoint()));
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    /// `max |E(1 (x) 1) - 1|` for input dimensions `(d_a, d_b)`.
    pub fn unital_deviation(&self, d_a: usize, d_b: usize) -> Result<f64> {
        let out = self.apply(&ComplexMatrix::identity(d_a), &ComplexMatrix::identity(d_b))?;
        Ok(out.max_abs_diff(&ComplexMatrix::identity(out.rows())))
    }
}

fn conjugate(w: &ComplexMatrix, vs: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let first = vs
        .first()
        .ok_or_else(|| Error::Invalid("empty Kraus family".into()))?;
    let d = first.cols();
    let mut out = ComplexMatrix::zeros(d, d);
    for v in vs {
        if v.rows() != w.rows() || v.cols() != d {
            return Err(Error::dims(
                "transition Kraus operator",
                format!("{}x{d}", w.rows()),
                format!("{}x{}", v.rows(), v.cols()),
            ));
        }
        out.add_scaled(c64(1.0, 0.0), &(&(&v.adjoint() * w) * v));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    Trace,
    NormalizedTrace,
    /// `X -> Tr(rho X)`.
    Density(ComplexMatrix),
}

impl InitialState {
    pub fn eval(&self, x: &ComplexMatrix) -> Result<C64> {
        match self {
            InitialState::Trace => x.trace(),
            InitialState::NormalizedTrace => Ok(x.trace()? / x.rows() as f64),
            InitialState::Density(rho) => rho.try_matmul(x)?.trace(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    Conventional,
    Causal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HqmmModel {
    pub initial_state: InitialState,
    pub hidden: TransitionExpectation,
    pub emission: TransitionExpectation,
    pub ordering: Ordering,
}

impl HqmmModel {
    /// Rank-one hidden transition, AKLT emission, normalized-trace start.
    pub fn aklt(ordering: Ordering) -> Self {
        Self {
            initial_state: InitialState::NormalizedTrace,
            hidden: TransitionExpectation::RankOneTrace(0.5),
            emission: aklt_emission(),
            ordering,
        }
    }

    pub fn aklt_causal() -> Self {
        Self::aklt(Ordering::Causal)
    }

    /// Hidden transition `V^dagger (.) V` with the valence-bond isometry.
    pub fn aklt_isometry(ordering: Ordering) -> Self {
        Self {
            hidden: TransitionExpectation::Isometry(isometry_v()),
            ..Self::aklt(ordering)
        }
    }

    /// `(d_H, d_O)` implied by the emission map.
    pub fn dims(&self) -> Result<(usize, usize)> {
        match &self.emission {
            TransitionExpectation::KrausPairs(ks) => {
                let k = ks
                    .first()
                    .ok_or_else(|| Error::Invalid("emission needs Kraus operators".into()))?;
                Ok((k.rows(), ks.len()))
            }
            _ => match &self.initial_state {
                InitialState::Density(rho) => {
                    let d_h = rho.rows();
                    let rows = match &self.emission {
                        TransitionExpectation::Isometry(v) => v.rows(),
                        TransitionExpectation::Kraus(vs) if !vs.is_empty() => vs[0].rows(),
                        _ => {
                            return Err(Error::Invalid(
                                "cannot infer output dimension of a rank-one emission".into(),
                            ))
                        }
                    };
                    if rows % d_h != 0 {
                        return Err(Error::dims("emission", format!("multiple of {d_h}"), rows));
                    }
                    Ok((d_h, rows / d_h))
                }
                _ => Err(Error::Invalid(
                    "non-Kraus-pair emission needs a density initial state to fix dimensions".into(),
                )),
            },
        }
    }

    /// Checks dimensions, unitality of both expectations and `phi(1) > 0`.
    pub fn validate(&self) -> Result<()> {
        let (d_h, d_o) = self.dims()?;
        let phi1 = self.initial_state.eval(&ComplexMatrix::identity(d_h))?;
        if phi1.re.is_nan() || phi1.re <= 0.0 || phi1.im.abs() > STRUCTURE_TOL {
            return Err(Error::Invalid(format!(
                "initial state must be strictly positive on the unit, got {phi1}"
            )));
        }
        let dev_h = self.hidden.unital_deviation(d_h, d_h)?;
        if dev_h > STRUCTURE_TOL {
            return Err(Error::NotUnital { deviation: dev_h });
        }
        let dev_o = self.emission.unital_deviation(d_h, d_o)?;
        if dev_o > STRUCTURE_TOL {
            return Err(Error::NotUnital { deviation: dev_o });
        }
        Ok(())
    }

    /// `E_H(E_HO(a (x) b) (x) x)`.
    pub fn conventional_block(
        &self,
        a: &ComplexMatrix,
        b: &ComplexMatrix,
        x: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let e = self.emission.apply(a, b)?;
        self.hidden.apply(&e, x)
    }

    /// `E_HO(E_H(a (x) x) (x) b)`.
    pub fn causal_block(
        &self,
        a: &ComplexMatrix,
        b: &ComplexMatrix,
        x: &ComplexMatrix,
    ) -> Result<ComplexMatrix> {
        let h = self.hidden.apply(a, x)?;
        self.emission.apply(&h, b)
    }

    pub fn block(&self, a: &ComplexMatrix, b: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
        match self.ordering {
            Ordering::Conventional => self.conventional_block(a, b, x),
            Ordering::Causal => self.causal_block(a, b, x),
        }
    }

    /// `T_n = G_{a_1,b_1} o ... o G_{a_n,b_n}(1)` without the initial functional.
    pub fn causal_recursion(&self, pairs: &[(ComplexMatrix, ComplexMatrix)]) -> Result<ComplexMatrix> {
        if self.ordering != Ordering::Causal {
            return Err(Error::NonCausalOrdering);
        }
        if pairs.is_empty() || pairs.len() > MAX_JOINT_SITES {
            return Err(Error::OutOfRange {
                what: "pair count",
                value: pairs.len(),
                range: "1..=12",
            });
        }
        let (d_h, _) = self.dims()?;
        let mut t = ComplexMatrix::identity(d_h);
        for (a, b) in pairs.iter().rev() {
            t = self.causal_block(a, b, &t)?;
        }
        Ok(t)
    }

    /// `Psi_HO(a_1 (x) b_1 (x) ... (x) a_n (x) b_n)` for a causal model.
    pub fn joint_state(&self, pairs: &[(ComplexMatrix, ComplexMatrix)]) -> Result<C64> {
        let t = self.causal_recursion(pairs)?;
        self.initial_state.eval(&t)
    }

    /// `psi_O(Y) = Psi_HO(1 (x) Y)`.
    ///
    /// Product observables go straight through the recursion; full
    /// observables (at most four sites) are expanded in matrix units.
    pub fn observation_process(&self, y: &ObservableSpec) -> Result<C64> {
        let (d_h, d_o) = self.dims()?;
        let id = ComplexMatrix::identity(d_h);
        match y.form() {
            ObservableForm::Factored(f) => {
                if f.len() > MAX_OBSERVABLE_SITES {
                    return Err(Error::OutOfRange {
                        what: "n_sites",
                        value: f.len(),
                        range: "1..=8",
                    });
                }
                let pairs: Vec<_> = f.iter().map(|b| (id.clone(), b.clone())).collect();
                self.joint_state(&pairs)
            }
            ObservableForm::Full(m) => {
                let n = y.n_sites();
                if n > MAX_FULL_OBSERVATION_SITES {
                    return Err(Error::OutOfRange {
                        what: "n_sites (full observable)",
                        value: n,
                        range: "1..=4",
                    });
                }
                if d_o != PHYS_DIM {
                    return Err(Error::dims("observation_process", d_o, PHYS_DIM));
                }
                let mut total = c64(0.0, 0.0);
                for k in 0..m.rows() {
                    let kd = digits(k, n);
                    for l in 0..m.cols() {
                        let w = m[(k, l)];
                        if w == c64(0.0, 0.0) {
                            continue;
                        }
                        let ld = digits(l, n);
                        let pairs: Vec<_> = kd
                            .iter()
                            .zip(&ld)
                            .map(|(&a, &b)| (id.clone(), ComplexMatrix::unit(PHYS_DIM, a, b)))
                            .collect();
                        total += w * self.joint_state(&pairs)?;
                    }
                }
                Ok(total)
            }
        }
    }
}

/// `X (x) Y -> sum_{k,l} <k|Y|l> A_k X A_l^dagger`.
pub fn aklt_emission() -> TransitionExpectation {
    TransitionExpectation::KrausPairs(AkltTensors::new().to_vec())
}

/// `E_H(X (x) Z) = Tr(X)/2 Z`.
pub fn e_hidden(x: &ComplexMatrix, z: &ComplexMatrix) -> Result<ComplexMatrix> {
    TransitionExpectation::RankOneTrace(0.5).apply(x, z)
}

/// AKLT emission `sum_{k,l} <k|y|l> A_k x A_l^dagger`.
pub fn e_emission(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    aklt_emission().apply(x, y)
}

/// Conventional block of the rank-one AKLT model: `Tr(E_HO(a (x) b))/2 * x`.
pub fn block_map_conventional(a: &ComplexMatrix, b: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    HqmmModel::aklt(Ordering::Conventional).conventional_block(a, b, x)
}

/// Causal block of the rank-one AKLT model:
/// `Tr(a)/2 * sum_{k,l} <k|b|l> A_k x A_l^dagger`.
pub fn block_map_causal(a: &ComplexMatrix, b: &ComplexMatrix, x: &ComplexMatrix) -> Result<ComplexMatrix> {
    HqmmModel::aklt_causal().causal_block(a, b, x)
}

/// `V|up> = psi^-`, `V|down> = psi^+` as a 4x2 matrix.
pub fn isometry_v() -> ComplexMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    // Two-qubit basis order: uu, ud, du, dd.
    ComplexMatrix::from_real_rows(&[&[0.0, 0.0], &[r, r], &[-r, r], &[0.0, 0.0]])
}

/// Block maps with the isometric hidden transition `E_H(W) = V^dagger W V`:
///
/// ```text
/// conventional  sum <k|b|l> V^dagger (A_k a A_l^dagger (x) x) V
/// causal        sum <k|b|l> A_k V^dagger (x (x) a) V A_l^dagger
/// ```
///
/// Note the causal step feeds `x (x) a`, with the carried operator first.
pub fn block_map_isometry(
    ordering: Ordering,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let hidden = TransitionExpectation::Isometry(isometry_v());
    let emission = aklt_emission();
    match ordering {
        Ordering::Conventional => hidden.apply(&emission.apply(a, b)?, x),
        Ordering::Causal => emission.apply(&hidden.apply(x, a)?, b),
    }
}

/// Closed Kraus expansion of the rank-one AKLT causal model:
/// `2^{-(n+1)} prod Tr(a_m) sum prod <k_m|b_m|l_m> Tr(A_{k_1}..A_{k_n} A_{l_n}^dagger..A_{l_1}^dagger)`.
///
/// Enumerates all index strings; intended as an independent check of the
/// recursion for short chains.
pub fn joint_state_closed_form(pairs: &[(ComplexMatrix, ComplexMatrix)]) -> Result<C64> {
    let n = pairs.len();
    if n == 0 || n > 6 {
        return Err(Error::OutOfRange {
            what: "pair count",
            value: n,
            range: "1..=6",
        });
    }
    let tensors = AkltTensors::new();
    let a = tensors.as_array();
    let mut prefactor = c64(0.5f64.powi(n as i32 + 1), 0.0);
    for (am, bm) in pairs {
        if am.shape() != (2, 2) || bm.shape() != (PHYS_DIM, PHYS_DIM) {
            return Err(Error::dims("joint_state_closed_form", "(2x2, 3x3) pairs", format!("({:?}, {:?})", am.shape(), bm.shape())));
        }
        prefactor *= am.trace()?;
    }
    let strings = PHYS_DIM.pow(n as u32);
    let ket: Vec<ComplexMatrix> = (0..strings)
        .map(|k| {
            digits(k, n)
                .iter()
                .fold(ComplexMatrix::identity(2), |acc, &d| &acc * a[d])
        })
        .collect();
    let mut sum = c64(0.0, 0.0);
    for (k, bk) in ket.iter().enumerate() {
        let kd = digits(k, n);
        for (l, bl) in ket.iter().enumerate() {
            let ld = digits(l, n);
            let w: C64 = pairs
                .iter()
                .zip(kd.iter().zip(&ld))
                .map(|((_, b), (&km, &lm))| b[(km, lm)])
                .product();
            if w == c64(0.0, 0.0) {
                continue;
            }
            sum += w * (bk * &bl.adjoint()).trace()?;
        }
    }
    Ok(prefactor * sum)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub x: ComplexMatrix,
    pub conventional: ComplexMatrix,
    pub causal: ComplexMatrix,
    /// `max |conventional - causal|`.
    pub gap: f64,
}

impl Witness {
    pub fn evaluate(
        family: WitnessFamily,
        a: ComplexMatrix,
        b: ComplexMatrix,
        x: ComplexMatrix,
    ) -> Result<Self> {
        let (conventional, causal) = match family {
            WitnessFamily::RankOne => (
                block_map_conventional(&a, &b, &x)?,
                block_map_causal(&a, &b, &x)?,
            ),
            WitnessFamily::Isometry => (
                block_map_isometry(Ordering::Conventional, &a, &b, &x)?,
                block_map_isometry(Ordering::Causal, &a, &b, &x)?,
            ),
        };
        let gap = conventional.max_abs_diff(&causal);
        Ok(Self {
            a,
            b,
            x,
            conventional,
            causal,
            gap,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessFamily {
    RankOne,
    Isometry,
}

/// Best conventional/causal separation over `trials` random Hermitian
/// triples, seeded with the analytic candidate `(1, 1, sigma_z)`.
pub fn search_witness<R: Rng + ?Sized>(family: WitnessFamily, rng: &mut R, trials: usize) -> Result<Witness> {
    let mut best = Witness::evaluate(
        family,
        pauli::identity(),
        ComplexMatrix::identity(PHYS_DIM),
        pauli::z(),
    )?;
    for _ in 0..trials {
        let cand = Witness::evaluate(
            family,
            random_hermitian(rng, 2),
            random_hermitian(rng, PHYS_DIM),
            random_hermitian(rng, 2),
        )?;
        if cand.gap > best.gap {
            best = cand;
        }
    }
    Ok(best)
}

/// Random `(a, b)` hidden/output pairs; non-Hermitian unless `hermitian`.
pub fn random_pairs<R: Rng + ?Sized>(rng: &mut R, n: usize, hermitian: bool) -> Vec<(ComplexMatrix, ComplexMatrix)> {
    (0..n)
        .map(|_| {
            if hermitian {
                (random_hermitian(rng, 2), random_hermitian(rng, PHYS_DIM))
            } else {
                (random_matrix(rng, 2, 2), random_matrix(rng, PHYS_DIM, PHYS_DIM))
            }
        })
        .collect()
}
