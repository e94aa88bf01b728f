//! Browser bindings for `www/index.html`.
//!
//! Each exported function has a plain-Rust twin (`*_values`) that the native
//! tests call; the exported wrapper only converts errors to `JsError`.

use aklt_core::aklt::Axis;
use aklt_core::fcs::{convergence_sweep, correlator, symmetric_schedule};
use aklt_core::hqmm::{Witness, WitnessFamily};
use aklt_core::linalg::{pauli, ComplexMatrix};
use aklt_core::sampling::random_factored_observable;
use aklt_core::{c64, Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_axis(axis: &str) -> Result<Axis> {
    axis.parse()
        .map_err(|_| Error::Invalid(format!("axis must be x, y or z, got {axis:?}")))
}

pub fn correlator_values(axis: &str, max_distance: usize) -> Result<Vec<f64>> {
    let axis = parse_axis(axis)?;
    (1..=max_distance).map(|r| correlator(axis, r)).collect()
}

/// `<S^a_1 S^a_{1+r}>` for `r = 1..=max_distance`.
#[wasm_bindgen]
pub fn correlator_curve(axis: &str, max_distance: u32) -> std::result::Result<Vec<f64>, JsError> {
    correlator_values(axis, max_distance as usize).map_err(js)
}

pub fn convergence_values(seed: u64, m_max: usize) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let y = random_factored_observable(&mut rng, 2, false);
    Ok(convergence_sweep(&y, symmetric_schedule(m_max))?
        .iter()
        .map(|s| s.abs_error)
        .collect())
}

/// `|embedded(Y, m, m) - omega(Y)|` for `m = 0..=m_max`, random two-site `Y`.
#[wasm_bindgen]
pub fn convergence_curve(seed: u32, m_max: u32) -> std::result::Result<Vec<f64>, JsError> {
    convergence_values(seed.into(), m_max as usize).map_err(js)
}

/// `c_0 1 + c_x sigma_x + c_y sigma_y + c_z sigma_z`.
fn from_pauli(c: &[f64]) -> Result<ComplexMatrix> {
    if c.len() != 4 {
        return Err(Error::Invalid(format!("expected 4 Pauli coefficients, got {}", c.len())));
    }
    let mut m = pauli::identity().scale_real(c[0]);
    for (k, s) in [pauli::x(), pauli::y(), pauli::z()].iter().enumerate() {
        m.add_scaled(c64(c[k + 1], 0.0), s);
    }
    Ok(m)
}

/// Real parts of `Tr(sigma_k M)/2`; exact for Hermitian `M`.
fn to_pauli(m: &ComplexMatrix) -> Vec<f64> {
    [pauli::identity(), pauli::x(), pauli::y(), pauli::z()]
        .iter()
        .map(|s| (s * m).trace().expect("2x2").re / 2.0)
        .collect()
}

pub fn block_map_values(family: &str, a: &[f64], b: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let family = match family {
        "rank_one" => WitnessFamily::RankOne,
        "isometry" => WitnessFamily::Isometry,
        other => return Err(Error::Invalid(format!("unknown family {other:?}"))),
    };
    if b.len() != 3 {
        return Err(Error::Invalid(format!("expected 3 diagonal entries for b, got {}", b.len())));
    }
    let bm = ComplexMatrix::from_diag(&b.iter().map(|&v| c64(v, 0.0)).collect::<Vec<_>>());
    let w = Witness::evaluate(family, from_pauli(a)?, bm, from_pauli(x)?)?;
    let mut out = to_pauli(&w.conventional);
    out.extend(to_pauli(&w.causal));
    out.push(w.gap);
    Ok(out)
}

/// Conventional and causal one-step block maps for Hermitian `a`, `x` (Pauli
/// coefficients) and diagonal `b`. Returns `[F_0, F_x, F_y, F_z, G_0, ..., gap]`.
#[wasm_bindgen]
pub fn block_maps(family: &str, a: &[f64], b: &[f64], x: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
    block_map_values(family, a, b, x).map_err(js)
}
