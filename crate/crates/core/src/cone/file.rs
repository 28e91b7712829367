//! JSON ingestion of custom cones given as rational tensor entries.

use std::path::Path;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::ConeOperator;
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, Rational};

/// An integer written either as a JSON number or as a decimal string (for big values).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum IntValue {
    Int(i64),
    Str(String),
}

impl IntValue {
    fn to_bigint(&self) -> Result<BigInt> {
        match self {
            IntValue::Int(v) => Ok(BigInt::from(*v)),
            IntValue::Str(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid integer '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub coeff_index: usize,
    pub value_num: IntValue,
    pub value_den: IntValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeFile {
    #[serde(rename = "U")]
    pub dim: usize,
    pub block_dims: Vec<usize>,
    pub entries: Vec<FileEntry>,
    /// Coefficients of the constant polynomial 1; defaults to e₀.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one: Option<Vec<String>>,
    /// A point with Λ(x) ≻ 0 to start Newton iterations from; defaults to `one`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interior: Option<Vec<String>>,
}

impl ConeFile {
    pub fn into_operator(self) -> Result<ConeOperator> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let den = e.value_den.to_bigint()?;
            if num_traits::Zero::is_zero(&den) {
                return Err(Error::Parse("zero denominator in cone entry".into()));
            }
            let v = Rational::new(e.value_num.to_bigint()?, den);
            entries.push((e.block, e.row, e.col, e.coeff_index, v));
        }
        let mut op = ConeOperator::from_entries(self.dim, self.block_dims, entries)?;
        if let Some(one) = self.one {
            op.set_one(parse_all(&one)?)?;
        }
        if let Some(x) = self.interior {
            op.set_interior_hint(parse_all(&x)?)?;
        }
        op.check_injective()?;
        Ok(op)
    }

    pub fn from_operator(op: &ConeOperator) -> Self {
        let mut entries = Vec::new();
        for b in 0..op.block_dims().len() {
            for e in op.entries(b) {
                entries.push(FileEntry {
                    block: b,
                    row: e.row,
                    col: e.col,
                    coeff_index: e.index,
                    value_num: IntValue::Str(e.value.numer().to_string()),
                    value_den: IntValue::Str(e.value.denom().to_string()),
                });
            }
        }
        ConeFile {
            dim: op.dim(),
            block_dims: op.block_dims().to_vec(),
            entries,
            one: Some(op.one().iter().map(format_rational).collect()),
            interior: op.interior_hint.as_ref().map(|x| x.iter().map(format_rational).collect()),
        }
    }

    pub fn load(path: &Path) -> Result<ConeOperator> {
        let text = std::fs::read_to_string(path)?;
        let file: ConeFile = serde_json::from_str(&text)?;
        file.into_operator()
    }
}

fn parse_all(v: &[String]) -> Result<Vec<Rational>> {
    v.iter().map(|s| parse_rational(s)).collect()
}
