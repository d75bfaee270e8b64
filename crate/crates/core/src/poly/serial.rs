use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use super::graded::GradedPolynomial;
use super::multi_index::MultiIndex;
use crate::error::{Error, Result};

/// Wire form of one polynomial term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub exponents: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

impl GradedPolynomial {
    /// Nonzero terms as records, graded-lex ordered.
    pub fn to_records(&self) -> Vec<TermRecord> {
        self.terms()
            .map(|(j, c)| TermRecord { exponents: j.components().to_vec(), re: c.re, im: c.im })
            .collect()
    }

    /// Parses records for a known dimension. The dimension is passed in
    /// because an empty record list carries none.
    pub fn from_records(dim: usize, records: &[TermRecord]) -> Result<Self> {
        let terms = records
            .iter()
            .map(|r| {
                if r.exponents.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: r.exponents.len() });
                }
                if !r.re.is_finite() || !r.im.is_finite() {
                    return Err(Error::InvalidInput("non-finite coefficient".into()));
                }
                Ok((MultiIndex::new(r.exponents.clone()), Complex64::new(r.re, r.im)))
            })
            .collect::<Result<Vec<_>>>()?;
        GradedPolynomial::from_terms(dim, terms)
    }
}

impl Serialize for GradedPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_records().serialize(serializer)
    }
}
