//! JSON encoding of complex scalars (`[re, im]`) and matrices (row-major nested arrays).

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, C64};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: C64) -> JsonComplex {
    [z.re, z.im]
}

pub fn complex_from_json(v: JsonComplex) -> C64 {
    C64::new(v[0], v[1])
}

pub fn matrix_to_json(m: &CMat) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect())
        .collect()
}

/// Rejects ragged input.
pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMat, String> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nc) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMat::from_fn(nr, nc, |i, j| complex_from_json(rows[i][j])))
}

/// `#[serde(with = "crate::serial::matrix")]` adapter.
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = JsonMatrix::deserialize(d)?;
        matrix_from_json(&rows).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "crate::serial::complex")]` adapter.
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_json(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(complex_from_json(JsonComplex::deserialize(d)?))
    }
}

/// `#[serde(with = "crate::serial::matrices")]` adapter for `Vec<CMat>`.
pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        Vec::<JsonMatrix>::deserialize(d)?
            .iter()
            .map(|m| matrix_from_json(m).map_err(serde::de::Error::custom))
            .collect()
    }
}
