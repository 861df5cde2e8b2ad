//! JSON file formats.
//!
//! Matrices are `{"rows": r, "cols": c, "data": [row-major]}`. A subspace is a
//! matrix record of its orthonormal basis with `"subspace": true`, so
//! `rows` is the ambient dimension and `cols` the subspace dimension.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, StrataError};
use crate::linalg::Mat;
use crate::projection::GraphParam;
use crate::scalar::Scalar;
use crate::subspace::{Subspace, ToleranceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> MatrixRecord<T> {
    pub fn from_matrix(m: &Mat<T>) -> Self {
        let (rows, cols) = m.shape();
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Self { rows, cols, data }
    }

    pub fn to_matrix(&self) -> Result<Mat<T>> {
        if self.data.len() != self.rows * self.cols {
            return Err(StrataError::InvalidRecord(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        if self.data.iter().any(|x| !x.is_finite()) {
            return Err(StrataError::InvalidRecord("non-finite entry".into()));
        }
        Ok(Mat::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceRecord<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
    pub subspace: bool,
}

impl<T: Scalar> SubspaceRecord<T> {
    pub fn from_subspace(s: &Subspace<T>) -> Self {
        let m = MatrixRecord::from_matrix(s.basis());
        Self { rows: m.rows, cols: m.cols, data: m.data, subspace: true }
    }

    /// Spans the recorded columns (which need not be orthonormal).
    pub fn to_subspace(&self, tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
        if !self.subspace {
            return Err(StrataError::InvalidRecord("missing \"subspace\": true".into()));
        }
        let m = MatrixRecord { rows: self.rows, cols: self.cols, data: self.data.clone() }.to_matrix()?;
        Subspace::new(m, tol)
    }
}

/// `#[serde(with = "matrix_format")]` for `Mat<T>` fields.
pub mod matrix_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(m: &Mat<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixRecord::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat<T>, D::Error> {
        let r = MatrixRecord::<T>::deserialize(d)?;
        r.to_matrix().map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "opt_matrix_format")]` for `Option<Mat<T>>` fields.
pub mod opt_matrix_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(m: &Option<Mat<T>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.as_ref().map(MatrixRecord::from_matrix).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Mat<T>>, D::Error> {
        let r = Option::<MatrixRecord<T>>::deserialize(d)?;
        r.map(|r| r.to_matrix().map_err(serde::de::Error::custom)).transpose()
    }
}

/// `#[serde(with = "subspace_format")]` for `Subspace<T>` fields. The stored
/// basis is written verbatim; reading re-orthonormalizes at default tolerance.
pub mod subspace_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &Subspace<T>, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceRecord::from_subspace(v).serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Subspace<T>, D::Error> {
        let r = SubspaceRecord::<T>::deserialize(d)?;
        r.to_subspace(&ToleranceConfig::default()).map_err(serde::de::Error::custom)
    }
}

/// `#[serde(with = "subspace_list_format")]` for `Vec<Subspace<T>>` fields.
pub mod subspace_list_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &[Subspace<T>], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(SubspaceRecord::from_subspace).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Subspace<T>>, D::Error> {
        let r = Vec::<SubspaceRecord<T>>::deserialize(d)?;
        let tol = ToleranceConfig::default();
        r.iter()
            .map(|x| x.to_subspace(&tol).map_err(serde::de::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "matrix_list_format")]` for `Vec<Mat<T>>` fields.
pub mod matrix_list_format {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<T: Scalar, S: Serializer>(v: &[Mat<T>], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(MatrixRecord::from_matrix).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Mat<T>>, D::Error> {
        let r = Vec::<MatrixRecord<T>>::deserialize(d)?;
        r.iter().map(|x| x.to_matrix().map_err(serde::de::Error::custom)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphParamRecord<T> {
    pub domain: SubspaceRecord<T>,
    pub codomain: SubspaceRecord<T>,
    pub coeff: MatrixRecord<T>,
}

impl<T: Scalar> GraphParamRecord<T> {
    pub fn from_param(g: &GraphParam<T>) -> Self {
        Self {
            domain: SubspaceRecord::from_subspace(g.domain()),
            codomain: SubspaceRecord::from_subspace(g.codomain()),
            coeff: MatrixRecord::from_matrix(g.coeff()),
        }
    }

    /// Rebuilds the parameter. The recorded bases must already be orthonormal,
    /// since `coeff` is expressed in them.
    pub fn to_param(&self, tol: &ToleranceConfig<T>) -> Result<GraphParam<T>> {
        let domain = self.domain.to_subspace(tol)?;
        let codomain = self.codomain.to_subspace(tol)?;
        let raw_d = MatrixRecord { rows: self.domain.rows, cols: self.domain.cols, data: self.domain.data.clone() }.to_matrix()?;
        let raw_c = MatrixRecord { rows: self.codomain.rows, cols: self.codomain.cols, data: self.codomain.data.clone() }.to_matrix()?;
        let drift = crate::linalg::max_abs_diff(&raw_d, domain.basis())
            .max(crate::linalg::max_abs_diff(&raw_c, codomain.basis()));
        if drift > T::lit(1e-12) {
            return Err(StrataError::InvalidRecord("graph parameter bases are not orthonormal".into()));
        }
        GraphParam::new(domain, codomain, self.coeff.to_matrix()?, tol)
    }
}

pub fn read_json<V: DeserializeOwned>(path: impl AsRef<Path>) -> std::io::Result<V> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<V: Serialize>(path: impl AsRef<Path>, value: &V) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(path, text)
}

pub fn read_matrix<T: Scalar>(path: impl AsRef<Path>) -> std::io::Result<Mat<T>> {
    let r: MatrixRecord<T> = read_json(path)?;
    r.to_matrix().map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_record_is_row_major() {
        let m = Mat::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let r = MatrixRecord::from_matrix(&m);
        assert_eq!(r.data, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"rows":2,"cols":3,"data":[1.0,2.0,3.0,4.0,5.0,6.0]}"#);
        assert_eq!(r.to_matrix().unwrap(), m);
    }

    #[test]
    fn bad_record_length_is_rejected() {
        let r = MatrixRecord { rows: 2, cols: 2, data: vec![1.0f64; 3] };
        assert!(matches!(r.to_matrix(), Err(StrataError::InvalidRecord(_))));
    }

    #[test]
    fn subspace_record_flag() {
        let s = Subspace::<f64>::coordinate(3, &[1]);
        let r = SubspaceRecord::from_subspace(&s);
        let text = serde_json::to_string(&r).unwrap();
        assert_eq!(text, r#"{"rows":3,"cols":1,"data":[0.0,1.0,0.0],"subspace":true}"#);
        let back = r.to_subspace(&ToleranceConfig::default()).unwrap();
        assert!(back.same_as(&s));
        let plain = SubspaceRecord { subspace: false, ..r };
        assert!(plain.to_subspace(&ToleranceConfig::default()).is_err());
    }

    #[test]
    fn graph_param_round_trip() {
        let tol = ToleranceConfig::default();
        let g = GraphParam::new(
            Subspace::<f64>::coordinate(3, &[0]),
            Subspace::coordinate(3, &[1, 2]),
            Mat::from_row_slice(2, 1, &[2.0, -1.0]),
            &tol,
        )
        .unwrap();
        let rec = GraphParamRecord::from_param(&g);
        let text = serde_json::to_string(&rec).unwrap();
        let back: GraphParamRecord<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_param(&tol).unwrap(), g);
    }
}
