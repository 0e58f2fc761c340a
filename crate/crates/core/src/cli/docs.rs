//! File formats: kind-tagged matrix documents and the composite plane,
//! block and MLR-model documents built from them.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::grassmann::{GrTangentAtI, OnbFrame, Projector};
use crate::matker::{Mat, SpdMatrix, SymMatrix};
use crate::spd_gyro::SpdMetric;
use crate::spd_mlr::{BlockDiagSet, Hypergyroplane, MlrClass, MlrModel};

use super::json::to_document_string;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Sym,
    Spd,
    Onb,
    Projector,
    /// Symmetric `n × n` without `p`; a Grassmann tangent block
    /// `p × (n − p)` with `p`.
    Tangent,
}

impl fmt::Display for MatrixKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatrixKind::Sym => "sym",
            MatrixKind::Spd => "spd",
            MatrixKind::Onb => "onb",
            MatrixKind::Projector => "projector",
            MatrixKind::Tangent => "tangent",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDocument {
    pub kind: MatrixKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub data: Vec<Vec<f64>>,
}

fn rows_of(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn violation(kind: MatrixKind, e: GyroError) -> GyroError {
    match e {
        GyroError::KindViolation(_) | GyroError::ParseError(_) => e,
        other => GyroError::KindViolation(format!("{kind} document: {other}")),
    }
}

impl MatrixDocument {
    pub fn from_sym(s: &SymMatrix) -> Self {
        Self::plain(MatrixKind::Sym, s.as_mat(), None)
    }

    pub fn from_spd(p: &SpdMatrix) -> Self {
        Self::plain(MatrixKind::Spd, p.as_mat(), None)
    }

    pub fn from_onb(u: &OnbFrame) -> Self {
        Self::plain(MatrixKind::Onb, u.as_mat(), Some(u.p()))
    }

    pub fn from_projector(p: &Projector) -> Self {
        Self::plain(MatrixKind::Projector, p.as_mat(), Some(p.p()))
    }

    pub fn from_gr_tangent(x: &GrTangentAtI) -> Self {
        Self::plain(MatrixKind::Tangent, x.block(), Some(x.p()))
    }

    fn plain(kind: MatrixKind, m: &Mat, p: Option<usize>) -> Self {
        let n = if kind == MatrixKind::Tangent && p.is_some() { m.nrows() + m.ncols() } else { m.nrows() };
        MatrixDocument { kind, n, p, data: rows_of(m) }
    }

    /// Rows × columns implied by `kind`, `n` and `p`.
    fn shape(&self) -> Result<(usize, usize)> {
        let need_p = |what: &str| {
            self.p
                .ok_or_else(|| GyroError::ParseError(format!("{what} document needs p")))
                .and_then(|p| {
                    if p >= 1 && p < self.n {
                        Ok(p)
                    } else {
                        Err(GyroError::ParseError(format!("p = {p} outside 1..{}", self.n)))
                    }
                })
        };
        match self.kind {
            MatrixKind::Sym | MatrixKind::Spd => {
                if self.p.is_some() {
                    return Err(GyroError::ParseError(format!("{} document takes no p", self.kind)));
                }
                Ok((self.n, self.n))
            }
            MatrixKind::Projector => {
                if self.p.is_some() {
                    need_p("projector")?;
                }
                Ok((self.n, self.n))
            }
            MatrixKind::Onb => Ok((self.n, need_p("onb")?)),
            MatrixKind::Tangent => match self.p {
                None => Ok((self.n, self.n)),
                Some(_) => {
                    let p = need_p("tangent")?;
                    Ok((p, self.n - p))
                }
            },
        }
    }

    /// The data as a matrix, checking only the declared shape.
    pub fn matrix(&self) -> Result<Mat> {
        if self.n == 0 {
            return Err(GyroError::ParseError("n must be at least 1".into()));
        }
        let (r, c) = self.shape()?;
        if self.data.len() != r || self.data.iter().any(|row| row.len() != c) {
            return Err(GyroError::ParseError(format!(
                "{} document with n = {} needs {r}x{c} data",
                self.kind, self.n
            )));
        }
        Ok(Mat::from_fn(r, c, |i, j| self.data[i][j]))
    }

    fn expect_kind(&self, kinds: &[MatrixKind]) -> Result<()> {
        if kinds.contains(&self.kind) {
            Ok(())
        } else {
            let want: Vec<String> = kinds.iter().map(|k| k.to_string()).collect();
            Err(GyroError::KindViolation(format!("expected {}, got {}", want.join(" or "), self.kind)))
        }
    }

    pub fn to_sym(&self) -> Result<SymMatrix> {
        self.expect_kind(&[MatrixKind::Sym, MatrixKind::Tangent, MatrixKind::Spd])?;
        if self.p.is_some() {
            return Err(GyroError::KindViolation("expected a symmetric matrix, got a Grassmann tangent".into()));
        }
        SymMatrix::new(self.matrix()?).map_err(|e| violation(self.kind, e))
    }

    pub fn to_spd(&self) -> Result<SpdMatrix> {
        self.expect_kind(&[MatrixKind::Spd])?;
        SpdMatrix::new(self.matrix()?).map_err(|e| violation(self.kind, e))
    }

    pub fn to_onb(&self) -> Result<OnbFrame> {
        self.expect_kind(&[MatrixKind::Onb])?;
        OnbFrame::new(self.matrix()?).map_err(|e| violation(self.kind, e))
    }

    pub fn to_projector(&self) -> Result<Projector> {
        self.expect_kind(&[MatrixKind::Projector])?;
        let p = Projector::new(self.matrix()?).map_err(|e| violation(self.kind, e))?;
        match self.p {
            Some(q) if q != p.p() => Err(GyroError::KindViolation(format!(
                "projector document declares p = {q} but has rank {}",
                p.p()
            ))),
            _ => Ok(p),
        }
    }

    pub fn to_gr_tangent(&self) -> Result<GrTangentAtI> {
        self.expect_kind(&[MatrixKind::Tangent])?;
        if self.p.is_none() {
            return Err(GyroError::KindViolation("Grassmann tangent document needs p".into()));
        }
        GrTangentAtI::new(self.n, self.matrix()?).map_err(|e| violation(self.kind, e))
    }

    /// Checks the shape and the invariants of the declared kind.
    pub fn validate(&self) -> Result<()> {
        let m = self.matrix()?;
        if m.iter().any(|x| !x.is_finite()) {
            return Err(GyroError::KindViolation("non-finite entry".into()));
        }
        match self.kind {
            MatrixKind::Sym => self.to_sym().map(|_| ()),
            MatrixKind::Spd => self.to_spd().map(|_| ()),
            MatrixKind::Onb => self.to_onb().map(|_| ()),
            MatrixKind::Projector => self.to_projector().map(|_| ()),
            MatrixKind::Tangent if self.p.is_some() => self.to_gr_tangent().map(|_| ()),
            MatrixKind::Tangent => self.to_sym().map(|_| ()),
        }
    }
}

impl FromStr for MatrixDocument {
    type Err = GyroError;

    fn from_str(s: &str) -> Result<Self> {
        let doc: MatrixDocument = parse_json(s)?;
        doc.validate()?;
        Ok(doc)
    }
}

fn parse_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| GyroError::ParseError(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))
}

/// Writes any document in the 17-significant-digit style.
pub fn store_document<T: Serialize>(doc: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_document_string(doc)?).map_err(|e| GyroError::Io(format!("{}: {e}", path.display())))
}

/// Reads and validates a document.
pub fn load_document<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    parse_json(&read(path)?)
}

pub fn load_matrix(path: &Path) -> Result<MatrixDocument> {
    read(path)?.parse()
}

pub fn store_matrix(doc: &MatrixDocument, path: &Path) -> Result<()> {
    store_document(doc, path)
}

/// One hypergyroplane: base point (spd) and normal (sym or tangent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneRecord {
    pub base: MatrixDocument,
    pub normal: MatrixDocument,
}

impl PlaneRecord {
    pub fn from_plane(h: &Hypergyroplane) -> Self {
        PlaneRecord {
            base: MatrixDocument::from_spd(h.base()),
            normal: MatrixDocument::from_sym(h.normal()),
        }
    }

    pub fn to_plane(&self, metric: SpdMetric) -> Result<Hypergyroplane> {
        self.base.validate()?;
        self.normal.validate()?;
        Hypergyroplane::new(metric, self.base.to_spd()?, self.normal.to_sym()?)
    }
}

fn parse_metric(s: &str) -> Result<SpdMetric> {
    s.parse().map_err(|_| GyroError::ParseError(format!("unknown metric {s:?}")))
}

/// One plane per block, for `spd mlr-dist`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneDocument {
    pub metric: String,
    pub planes: Vec<PlaneRecord>,
}

impl PlaneDocument {
    pub fn from_planes(metric: SpdMetric, planes: &[Hypergyroplane]) -> Self {
        PlaneDocument {
            metric: metric.tag().into(),
            planes: planes.iter().map(PlaneRecord::from_plane).collect(),
        }
    }

    pub fn to_planes(&self) -> Result<Vec<Hypergyroplane>> {
        let metric = parse_metric(&self.metric)?;
        if self.planes.is_empty() {
            return Err(GyroError::ParseError("plane document lists no planes".into()));
        }
        self.planes.iter().map(|r| r.to_plane(metric)).collect()
    }
}

/// Diagonal blocks of a block-diagonal SPD point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlocksDocument {
    pub blocks: Vec<MatrixDocument>,
}

impl BlocksDocument {
    pub fn from_set(x: &BlockDiagSet) -> Self {
        BlocksDocument { blocks: x.blocks().iter().map(MatrixDocument::from_spd).collect() }
    }

    pub fn to_set(&self) -> Result<BlockDiagSet> {
        let blocks = self
            .blocks
            .iter()
            .map(|d| {
                d.validate()?;
                d.to_spd()
            })
            .collect::<Result<Vec<_>>>()?;
        BlockDiagSet::new(blocks)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassRecord {
    pub planes: Vec<PlaneRecord>,
}

/// Serialized form of an [`MlrModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MlrModelDocument {
    pub metric: String,
    pub classes: Vec<ClassRecord>,
}

impl MlrModelDocument {
    pub fn from_model(model: &MlrModel) -> Self {
        MlrModelDocument {
            metric: model.metric().tag().into(),
            classes: model
                .classes()
                .iter()
                .map(|c| ClassRecord { planes: c.planes.iter().map(PlaneRecord::from_plane).collect() })
                .collect(),
        }
    }

    pub fn to_model(&self) -> Result<MlrModel> {
        let metric = parse_metric(&self.metric)?;
        let classes = self
            .classes
            .iter()
            .map(|c| {
                let planes = c.planes.iter().map(|r| r.to_plane(metric)).collect::<Result<Vec<_>>>()?;
                Ok(MlrClass { planes })
            })
            .collect::<Result<Vec<_>>>()?;
        MlrModel::new(metric, classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::gen_spd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn store_then_load_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = gen_spd(&mut rng, 4).unwrap().point;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        store_matrix(&MatrixDocument::from_spd(&p), &path).unwrap();
        let back = load_matrix(&path).unwrap().to_spd().unwrap();
        for (a, b) in p.as_mat().iter().zip(back.as_mat().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn spd_with_negative_eigenvalue_is_a_kind_violation() {
        let text = r#"{"kind": "spd", "n": 2, "data": [[1.0, 0.0], [0.0, -1.0]]}"#;
        let err = text.parse::<MatrixDocument>().unwrap_err();
        assert_eq!(err.name(), "KindViolation");
    }

    #[test]
    fn non_orthonormal_onb_is_a_kind_violation() {
        let text = r#"{"kind": "onb", "n": 3, "p": 1, "data": [[1.0], [1.0], [0.0]]}"#;
        let err = text.parse::<MatrixDocument>().unwrap_err();
        assert_eq!(err.name(), "KindViolation");
    }

    #[test]
    fn malformed_shapes_are_parse_errors() {
        for text in [
            r#"{"kind": "sym", "n": 2, "data": [[1.0, 0.0]]}"#,
            r#"{"kind": "onb", "n": 3, "data": [[1.0], [0.0], [0.0]]}"#,
            r#"{"kind": "onb", "n": 3, "p": 3, "data": [[1.0], [0.0], [0.0]]}"#,
            r#"{"kind": "cube", "n": 1, "data": [[1.0]]}"#,
            r#"{"kind": "spd", "n": 1, "data": [[1.0]], "extra": 1}"#,
            "not json",
        ] {
            let err = text.parse::<MatrixDocument>().unwrap_err();
            assert_eq!(err.name(), "ParseError", "{text}");
        }
    }

    #[test]
    fn kinds_are_not_interchangeable() {
        let proj = MatrixDocument::from_projector(&Projector::identity(3, 1).unwrap());
        assert_eq!(proj.to_spd().unwrap_err().name(), "KindViolation");
        let text = r#"{"kind": "projector", "n": 3, "p": 2, "data": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]}"#;
        assert_eq!(text.parse::<MatrixDocument>().unwrap_err().name(), "KindViolation");
    }

    #[test]
    fn grassmann_tangent_documents_use_the_block_shape() {
        let x = GrTangentAtI::new(5, Mat::from_fn(2, 3, |i, j| (i + j) as f64 * 0.1)).unwrap();
        let doc = MatrixDocument::from_gr_tangent(&x);
        assert_eq!((doc.n, doc.p, doc.data.len(), doc.data[0].len()), (5, Some(2), 2, 3));
        let text = to_document_string(&doc).unwrap();
        assert_eq!(text.parse::<MatrixDocument>().unwrap().to_gr_tangent().unwrap(), x);
    }

    #[test]
    fn model_document_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let planes: Vec<Hypergyroplane> = (0..3)
            .map(|k| {
                let w = SymMatrix::from_diagonal(&[1.0 + k as f64, -0.5]);
                Hypergyroplane::new(SpdMetric::Ai, gen_spd(&mut rng, 2).unwrap().point, w).unwrap()
            })
            .collect();
        let model = MlrModel::from_planes(SpdMetric::Ai, planes).unwrap();
        let doc = MlrModelDocument::from_model(&model);
        let back: MlrModelDocument = serde_json::from_str(&to_document_string(&doc).unwrap()).unwrap();
        assert_eq!(back.to_model().unwrap(), model);
    }
}
