//! JSON exchange format for complex matrices: `{"re": …, "im": …}` per entry,
//! row-major nested arrays.

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Entry {
    fn from(z: Complex64) -> Self {
        Entry { re: z.re, im: z.im }
    }
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        Complex64::new(e.re, e.im)
    }
}

pub fn matrix_to_rows(a: &CMatrix) -> Vec<Vec<Entry>> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].into()).collect())
        .collect()
}

/// Rebuilds a square matrix from nested rows; rejects ragged or non-square input.
pub fn matrix_from_rows(rows: &[Vec<Entry>]) -> Result<CMatrix, String> {
    let m = rows.len();
    if rows.iter().any(|r| r.len() != m) {
        return Err(format!("matrix rows must all have length {m}"));
    }
    let a = CMatrix::from_fn(m, m, |i, j| rows[i][j].into());
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err("matrix entries must be finite".into());
    }
    Ok(a)
}

/// `#[serde(with = "matrix")]` for a single [`CMatrix`].
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(a: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_rows(a).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = Vec::<Vec<Entry>>::deserialize(d)?;
        matrix_from_rows(&rows).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "matrix_list")]` for `Vec<CMatrix>`.
pub mod matrix_list {
    use super::*;

    pub fn serialize<S: Serializer>(list: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        list.iter().map(matrix_to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let raw = Vec::<Vec<Vec<Entry>>>::deserialize(d)?;
        raw.iter()
            .map(|rows| matrix_from_rows(rows).map_err(D::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "complex_list")]` for `Vec<Complex64>`.
pub mod complex_list {
    use super::*;

    pub fn serialize<S: Serializer>(list: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        list.iter().map(|&z| Entry::from(z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<Entry>::deserialize(d)?.into_iter().map(Into::into).collect())
    }
}

/// `#[serde(with = "complex")]` for one `Complex64`.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Entry::from(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(Entry::deserialize(d)?.into())
    }
}

/// `#[serde(with = "complex_groups")]` for `Vec<Vec<Complex64>>`.
pub mod complex_groups {
    use super::*;

    pub fn serialize<S: Serializer>(list: &[Vec<Complex64>], s: S) -> Result<S::Ok, S::Error> {
        list.iter()
            .map(|g| g.iter().map(|&z| Entry::from(z)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Complex64>>, D::Error> {
        Ok(Vec::<Vec<Entry>>::deserialize(d)?
            .into_iter()
            .map(|g| g.into_iter().map(Into::into).collect())
            .collect())
    }
}

/// `#[serde(with = "option_matrix")]` for `Option<CMatrix>`.
pub mod option_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(a: &Option<CMatrix>, s: S) -> Result<S::Ok, S::Error> {
        a.as_ref().map(matrix_to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMatrix>, D::Error> {
        match Option::<Vec<Vec<Entry>>>::deserialize(d)? {
            Some(rows) => matrix_from_rows(&rows).map(Some).map_err(D::Error::custom),
            None => Ok(None),
        }
    }
}
