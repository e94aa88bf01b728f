//! The infinite-volume AKLT state as a finitely correlated state.
//!
//! Three independent evaluation paths are provided and cross-checked in
//! tests:
//!
//! * [`omega_local`]: the closed-form sum
//!   `1/2 sum <k|Y|l> Tr(A_{k_1}..A_{k_n} A_{l_n}^dagger..A_{l_1}^dagger)`;
//! * [`omega_fcs_form`]: iterated insertion maps `E_Y` of the triple
//!   `(M_2, E, rho)` applied to the unit and read out by `rho`;
//! * [`embedded_expectation`]: the finite ring `Tr_so(Phi^p o Y^ o Phi^m)`,
//!   which converges to the other two as the padding grows.

use crate::aklt::{
    hat_map, mat2_adjoint, mat2_mul, spin1_operators, string_products, AkltTensors, Axis,
    ObservableSpec, MAX_OBSERVABLE_SITES, PHYS_DIM,
};
use crate::channels::SuperOperator;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, C64};
use crate::stats::fit_geometric_rate;

pub const MAX_FCS_FACTORS: usize = 12;
pub const MAX_EMBED_SITES: usize = 6;
pub const MAX_PADDING: usize = 200;
pub const MAX_CORRELATOR_DISTANCE: usize = 20;

/// Errors at or below this are treated as round-off when fitting rates.
pub const FIT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceFunctional {
    Trace,
    /// `Tr / d`; the one that normalizes the AKLT state.
    NormalizedTrace,
}

impl ReferenceFunctional {
    pub fn eval(self, b: &ComplexMatrix) -> Result<C64> {
        let t = b.trace()?;
        Ok(match self {
            ReferenceFunctional::Trace => t,
            ReferenceFunctional::NormalizedTrace => t / b.rows() as f64,
        })
    }
}

/// Auxiliary algebra `M_d`, transition expectation
/// `E(X (x) Y) = sum_{k,k'} <k'|Y|k> A_k^dagger X A_{k'}`, reference functional.
#[derive(Debug, Clone, PartialEq)]
pub struct FcsTriple {
    pub aux_dim: usize,
    pub kraus: Vec<ComplexMatrix>,
    pub reference: ReferenceFunctional,
    pub unit: ComplexMatrix,
}

impl FcsTriple {
    pub fn aklt() -> Self {
        Self {
            aux_dim: 2,
            kraus: AkltTensors::new().to_vec(),
            reference: ReferenceFunctional::NormalizedTrace,
            unit: ComplexMatrix::identity(2),
        }
    }

    pub fn with_reference(mut self, reference: ReferenceFunctional) -> Self {
        self.reference = reference;
        self
    }

    pub fn transition(&self, x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.aux_dim;
        let p = self.kraus.len();
        if x.shape() != (d, d) {
            return Err(Error::dims("FcsTriple::transition", format!("{d}x{d}"), format!("{}x{}", x.rows(), x.cols())));
        }
        if y.shape() != (p, p) {
            return Err(Error::dims("FcsTriple::transition", format!("{p}x{p}"), format!("{}x{}", y.rows(), y.cols())));
        }
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, ak) in self.kraus.iter().enumerate() {
            let left = &ak.adjoint() * x;
            for (kp, akp) in self.kraus.iter().enumerate() {
                let w = y[(kp, k)];
                if w != c64(0.0, 0.0) {
                    out.add_scaled(w, &(&left * akp));
                }
            }
        }
        Ok(out)
    }

    /// `E_Y = E( . (x) Y)` as a superoperator.
    pub fn insertion_map(&self, y: &ComplexMatrix) -> Result<SuperOperator> {
        // Validate once so the tabulating closure cannot fail.
        self.transition(&self.unit, y)?;
        SuperOperator::from_fn(self.aux_dim, |x| self.transition(x, y).expect("validated"))
    }

    /// `max |E(1 (x) 1) - e|`.
    pub fn unit_deviation(&self) -> f64 {
        let id = ComplexMatrix::identity(self.kraus.len());
        self.transition(&self.unit, &id)
            .map(|e| e.max_abs_diff(&self.unit))
            .unwrap_or(f64::INFINITY)
    }

    /// `rho(E_{Y_1} o ... o E_{Y_m}(e))`, innermost map for the last site.
    pub fn evaluate(&self, factors: &[ComplexMatrix]) -> Result<C64> {
        let mut x = self.unit.clone();
        for y in factors.iter().rev() {
            x = self.transition(&x, y)?;
        }
        self.reference.eval(&x)
    }
}

fn check_support(y: &ObservableSpec, max: usize, range: &'static str) -> Result<()> {
    if y.n_sites() > max {
        return Err(Error::OutOfRange {
            what: "n_sites",
            value: y.n_sites(),
            range,
        });
    }
    Ok(())
}

/// Closed-form infinite-volume expectation
/// `1/2 sum_{k,l} <k|Y|l> Tr(A_{k_1}..A_{k_n} A_{l_n}^dagger..A_{l_1}^dagger)`.
pub fn omega_local(y: &ObservableSpec) -> Result<C64> {
    check_support(y, MAX_OBSERVABLE_SITES, "1..=8")?;
    let prods = string_products(y.n_sites());
    let daggers: Vec<_> = prods.iter().map(mat2_adjoint).collect();
    let zero = c64(0.0, 0.0);
    let mut total = zero;
    for (k, bk) in prods.iter().enumerate() {
        let mut acc = [zero; 4];
        for (l, bl) in daggers.iter().enumerate() {
            let w = y.element(k, l);
            if w == zero {
                continue;
            }
            for (a, b) in acc.iter_mut().zip(bl) {
                *a += w * b;
            }
        }
        let p = mat2_mul(bk, &acc);
        total += p[0] + p[3];
    }
    Ok(total * 0.5)
}

/// `1/2 Tr(Y^(1))` with the lifted map of [`hat_map`] (daggers on the left).
pub fn omega_from_hat(y: &ObservableSpec) -> Result<C64> {
    let h = hat_map(y)?;
    Ok(h.apply(&ComplexMatrix::identity(2))?.trace()? * 0.5)
}

/// `omega(Y_1 (x) ... (x) Y_m)` through the AKLT triple, `1 <= m <= 12`.
pub fn omega_fcs_form(factors: &[ComplexMatrix]) -> Result<C64> {
    if factors.is_empty() || factors.len() > MAX_FCS_FACTORS {
        return Err(Error::OutOfRange {
            what: "factor count",
            value: factors.len(),
            range: "1..=12",
        });
    }
    FcsTriple::aklt().evaluate(factors)
}

/// `Tr_so(Phi^p o Y^ o Phi^m)`: `Y` embedded in a periodic ring of
/// `m + n + p` sites (unnormalized).
pub fn embedded_expectation(y: &ObservableSpec, m: usize, p: usize) -> Result<C64> {
    check_support(y, MAX_EMBED_SITES, "1..=6")?;
    for (what, v) in [("m", m), ("p", p)] {
        if v > MAX_PADDING {
            return Err(Error::OutOfRange {
                what,
                value: v,
                range: "0..=200",
            });
        }
    }
    let phi = AkltTensors::new().transfer_channel().to_superoperator()?;
    let h = hat_map(y)?;
    Ok(phi.pow(p as u32).compose(&h)?.compose(&phi.pow(m as u32))?.trace())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub m: usize,
    pub p: usize,
    pub value: C64,
    pub abs_error: f64,
}

/// Evaluates [`embedded_expectation`] on the given `(m, p)` pairs against
/// [`omega_local`].
pub fn convergence_sweep(
    y: &ObservableSpec,
    schedule: impl IntoIterator<Item = (usize, usize)>,
) -> Result<Vec<SweepPoint>> {
    let omega = omega_local(y)?;
    schedule
        .into_iter()
        .map(|(m, p)| {
            let value = embedded_expectation(y, m, p)?;
            Ok(SweepPoint {
                m,
                p,
                value,
                abs_error: (value - omega).norm(),
            })
        })
        .collect()
}

/// `(m, m)` for `m` in `0..=max`.
pub fn symmetric_schedule(max: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..=max).map(|m| (m, m))
}

/// Decay rate of the sweep error per padding site, fitted against `m + p`
/// on points above [`FIT_FLOOR`].
pub fn padding_rate(points: &[SweepPoint]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|s| s.abs_error > FIT_FLOOR)
        .map(|s| ((s.m + s.p) as f64, s.abs_error))
        .collect();
    fit_geometric_rate(&pts)
}

/// `omega(S^a (x) 1^{(x)(r-1)} (x) S^a)` for `1 <= r <= 20`.
pub fn correlator(axis: Axis, r: usize) -> Result<f64> {
    if r == 0 || r > MAX_CORRELATOR_DISTANCE {
        return Err(Error::OutOfRange {
            what: "distance",
            value: r,
            range: "1..=20",
        });
    }
    let s = spin1_operators();
    let op = s.axis(axis).clone();
    let mut factors = vec![op.clone()];
    factors.extend(std::iter::repeat_n(ComplexMatrix::identity(PHYS_DIM), r - 1));
    factors.push(op);
    let v = FcsTriple::aklt().evaluate(&factors)?;
    if v.im.abs() > 1e-10 {
        return Err(Error::Invalid(format!(
            "correlator has imaginary residue {:e}",
            v.im
        )));
    }
    Ok(v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aklt::{finite_expectation, spin1_operators};
    use crate::sampling::{random_factored_observable, random_full_observable, random_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn normalization() {
        for n in 1..=6 {
            let v = omega_local(&ObservableSpec::identity(n)).unwrap();
            assert!((v - c64(1.0, 0.0)).norm() < 1e-12, "n={n}: {v}");
            let f = omega_fcs_form(&vec![ComplexMatrix::identity(3); n]).unwrap();
            assert!((f - c64(1.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn plain_trace_reference_doubles_the_norm() {
        let t = FcsTriple::aklt().with_reference(ReferenceFunctional::Trace);
        let v = t.evaluate(&[ComplexMatrix::identity(3)]).unwrap();
        assert!((v - c64(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn unit_condition() {
        assert!(FcsTriple::aklt().unit_deviation() < 1e-12);
    }

    #[test]
    fn single_and_nearest_neighbour_values() {
        let s = spin1_operators();
        let sz = ObservableSpec::factored(vec![s.sz.clone()]).unwrap();
        assert!(omega_local(&sz).unwrap().norm() < 1e-12);
        let zz = ObservableSpec::factored(vec![s.sz.clone(), s.sz.clone()]).unwrap();
        let v = omega_local(&zz).unwrap();
        assert!((v - c64(-4.0 / 9.0, 0.0)).norm() < 1e-12, "{v}");
        let f = omega_fcs_form(&[s.sz.clone(), s.sz.clone()]).unwrap();
        assert!((f - v).norm() < 1e-10);
    }

    #[test]
    fn identity_insertion_is_dual_transfer() {
        let t = FcsTriple::aklt();
        let e_id = t.insertion_map(&ComplexMatrix::identity(3)).unwrap();
        let dual = AkltTensors::new().transfer_channel().dual().to_superoperator().unwrap();
        assert!(e_id.max_abs_diff(&dual) < 1e-12);
    }

    #[test]
    fn evaluation_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for trial in 0..30 {
            let n = 1 + trial % 4;
            let y = random_factored_observable(&mut rng, n, trial % 2 == 0);
            let closed = omega_local(&y).unwrap();
            let hat = omega_from_hat(&y).unwrap();
            let fcs = omega_fcs_form(y.factors().unwrap()).unwrap();
            let ring = embedded_expectation(&y, 30, 30).unwrap();
            assert!((closed - hat).norm() < 1e-10, "hat path {closed} vs {hat}");
            assert!((closed - fcs).norm() < 1e-10, "fcs path {closed} vs {fcs}");
            assert!((closed - ring).norm() < 1e-9, "ring path {closed} vs {ring}");
        }
    }

    #[test]
    fn full_observables_use_the_same_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let y = random_full_observable(&mut rng, 2, false);
            let ring = embedded_expectation(&y, 30, 30).unwrap();
            assert!((omega_local(&y).unwrap() - ring).norm() < 1e-9);
        }
    }

    #[test]
    fn translation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for n in 1..=3 {
            let y = random_full_observable(&mut rng, n, false);
            let base = omega_local(&y).unwrap();
            let right = omega_local(&y.embed(0, 1)).unwrap();
            let left = omega_local(&y.embed(1, 0)).unwrap();
            assert!((base - right).norm() < 1e-10 && (base - left).norm() < 1e-10);
        }
    }

    #[test]
    fn positivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        for n in 1..=3 {
            let y = random_full_observable(&mut rng, n, false);
            let yy = y.adjoint().compose(&y).unwrap();
            let v = omega_local(&yy).unwrap();
            assert!(v.re > -1e-10 && v.im.abs() < 1e-10);
        }
    }

    #[test]
    fn embedded_without_padding_is_finite_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        let y = random_factored_observable(&mut rng, 3, false);
        let a = embedded_expectation(&y, 0, 0).unwrap();
        assert!((a - finite_expectation(&y).unwrap()).norm() < 1e-12);
        let id = embedded_expectation(&ObservableSpec::identity(2), 50, 50).unwrap();
        assert!((id - c64(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn embedding_uses_padding_on_both_sides() {
        // Tr_so(Phi^p o Y^ o Phi^m) is the ring expectation of 1^m (x) Y (x) 1^p.
        let mut rng = ChaCha8Rng::seed_from_u64(46);
        let y = random_factored_observable(&mut rng, 2, false);
        let direct = crate::aklt::exact_oracle(&y.embed(2, 1)).unwrap();
        assert!((embedded_expectation(&y, 2, 1).unwrap() - direct).norm() < 1e-10);
    }

    #[test]
    fn embedded_bounds() {
        let y = ObservableSpec::identity(7);
        assert!(embedded_expectation(&y, 0, 0).is_err());
        assert!(embedded_expectation(&ObservableSpec::identity(1), 201, 0).is_err());
        assert!(omega_fcs_form(&[]).is_err());
        assert!(omega_fcs_form(&vec![ComplexMatrix::identity(3); 13]).is_err());
    }

    #[test]
    fn padding_decay_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let y = random_full_observable(&mut rng, 2, false);
        let pts = convergence_sweep(&y, symmetric_schedule(25)).unwrap();
        let rate = padding_rate(&pts).unwrap();
        assert!((rate - 1.0 / 3.0).abs() < 0.02, "rate {rate}");
        assert!(pts[25].abs_error < 1e-10);
    }

    #[test]
    fn correlator_values() {
        let c1 = correlator(Axis::Z, 1).unwrap();
        assert!((c1 + 4.0 / 9.0).abs() < 1e-10);
        let mut prev = c1;
        for r in 2..=11 {
            let c = correlator(Axis::Z, r).unwrap();
            assert!((c / prev + 1.0 / 3.0).abs() < 1e-9);
            for axis in [Axis::X, Axis::Y] {
                assert!((correlator(axis, r).unwrap() - c).abs() < 1e-10);
            }
            prev = c;
        }
        assert!(correlator(Axis::Z, 0).is_err());
        assert!(correlator(Axis::Z, 21).is_err());
        assert!(correlator(Axis::Z, 20).is_ok());
    }

    #[test]
    fn transition_rejects_bad_shapes() {
        let t = FcsTriple::aklt();
        let mut rng = ChaCha8Rng::seed_from_u64(48);
        assert!(t.transition(&random_matrix(&mut rng, 3, 3), &ComplexMatrix::identity(3)).is_err());
        assert!(t.transition(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).is_err());
    }
}
