//! JSON encodings shared by every file format.
//!
//! Complex numbers are `[re, im]` pairs, matrices are row-major nested
//! arrays. A matrix with zero rows carries no column count, so readers that
//! know the expected width use [`cmat::reshape`] afterwards.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, CVec};

pub const SCHEMA_VERSION: u32 = 1;

pub fn complex_to_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn pair_to_complex(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_pair(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Ok(pair_to_complex(<[f64; 2]>::deserialize(d)?))
    }
}

pub mod cmat {
    use super::*;
    use serde::de::Error as _;

    pub fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| complex_to_pair(m[(i, j)])).collect())
            .collect()
    }

    pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat, String> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err("ragged matrix rows".into());
        }
        Ok(CMat::from_fn(nrows, ncols, |i, j| {
            pair_to_complex(rows[i][j])
        }))
    }

    /// Gives a `0 x 0` matrix decoded from `[]` its intended shape.
    pub fn reshape(m: CMat, rows: usize, cols: usize) -> Result<CMat, String> {
        if m.shape() == (rows, cols) {
            Ok(m)
        } else if m.nrows() == 0 && rows * cols == 0 {
            Ok(CMat::zeros(rows, cols))
        } else {
            Err(format!(
                "expected a {rows}x{cols} matrix, found {}x{}",
                m.nrows(),
                m.ncols()
            ))
        }
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }
}

pub mod cvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|z| complex_to_pair(*z))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVec::from_iterator(
            v.len(),
            v.into_iter().map(pair_to_complex),
        ))
    }
}

pub mod opt_cvec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<CVec>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(|z| complex_to_pair(*z)).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CVec>, D::Error> {
        let v = Option::<Vec<[f64; 2]>>::deserialize(d)?;
        Ok(v.map(|v| CVec::from_iterator(v.len(), v.into_iter().map(pair_to_complex))))
    }
}
