//! JSON shapes shared by the CLI and the browser demo.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//! Parsing into the `*Repr` types checks syntax only; converting them into
//! domain types checks dimensions, so callers can tell the two failures apart.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::aklt::{ObservableForm, ObservableSpec};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix};

type RowsRepr = Vec<Vec<[f64; 2]>>;

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: RowsRepr = (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| [self[(i, j)].re, self[(i, j)].im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = RowsRepr::deserialize(d)?;
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(D::Error::custom("matrix must have at least one row and column"));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
            return Err(D::Error::custom(format!(
                "ragged matrix: row {i} has {} entries, row 0 has {cols}",
                r.len()
            )));
        }
        let n = rows.len();
        let data = rows.into_iter().flatten().map(|[re, im]| c64(re, im)).collect();
        ComplexMatrix::new(n, cols, data).map_err(D::Error::custom)
    }
}

/// `{"n_sites": n, "factors": [...]}` or `{"n_sites": n, "full": M}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableRepr {
    pub n_sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<ComplexMatrix>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub full: Option<ComplexMatrix>,
}

impl TryFrom<ObservableRepr> for ObservableSpec {
    type Error = Error;

    fn try_from(r: ObservableRepr) -> Result<Self> {
        let spec = match (r.factors, r.full) {
            (Some(f), None) => ObservableSpec::factored(f)?,
            (None, Some(m)) => ObservableSpec::full(r.n_sites, m)?,
            _ => {
                return Err(Error::Invalid(
                    "exactly one of \"factors\" or \"full\" must be given".into(),
                ))
            }
        };
        if spec.n_sites() != r.n_sites {
            return Err(Error::dims(
                "ObservableSpec",
                format!("n_sites = {}", r.n_sites),
                format!("{} factors", spec.n_sites()),
            ));
        }
        Ok(spec)
    }
}

impl From<ObservableSpec> for ObservableRepr {
    fn from(s: ObservableSpec) -> Self {
        let n_sites = s.n_sites();
        match s.form().clone() {
            ObservableForm::Factored(f) => Self {
                n_sites,
                factors: Some(f),
                full: None,
            },
            ObservableForm::Full(m) => Self {
                n_sites,
                factors: None,
                full: Some(m),
            },
        }
    }
}

/// `{"kraus": [K_1, K_2, ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelRepr {
    pub kraus: Vec<ComplexMatrix>,
}

impl TryFrom<ChannelRepr> for KrausChannel {
    type Error = Error;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        KrausChannel::new(r.kraus)
    }
}

impl From<&KrausChannel> for ChannelRepr {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            kraus: ch.kraus().to_vec(),
        }
    }
}
