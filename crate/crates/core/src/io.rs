//! JSON file formats: matrices, block matrices, map specifications and reports.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c64, ComplexMatrix, ComplexVector};
use crate::maps::{from_choi, make_decomposable, NamedMap, PositiveMap};
use crate::stormer::OperatorBlockMatrix;

/// `{"rows": r, "cols": c, "data": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let mut data = Vec::with_capacity(m.len());
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let z = m[(r, c)];
                data.push([z.re, z.im]);
            }
        }
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    /// Column vector as an `n × 1` matrix.
    pub fn from_vector(v: &ComplexVector) -> Self {
        MatrixFile {
            rows: v.len(),
            cols: 1,
            data: v.iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Input(
                "matrix must have at least one row and column".into(),
            ));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Input(format!(
                "data has {} entries, expected {}x{} = {}",
                self.data.len(),
                self.rows,
                self.cols,
                self.rows * self.cols
            )));
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Input("matrix contains non-finite values".into()));
        }
        Ok(ComplexMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|[re, im]| c64(*re, *im)),
        ))
    }
}

/// `{"n": n, "d": d, "blocks": [[MatrixFile; n]; n]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockFile {
    pub n: usize,
    pub d: usize,
    pub blocks: Vec<Vec<MatrixFile>>,
}

impl BlockFile {
    pub fn from_blocks(x: &OperatorBlockMatrix) -> Self {
        let blocks = (0..x.n())
            .map(|i| {
                (0..x.n())
                    .map(|j| MatrixFile::from_matrix(x.block(i, j)))
                    .collect()
            })
            .collect();
        BlockFile {
            n: x.n(),
            d: x.d(),
            blocks,
        }
    }

    pub fn to_blocks(&self) -> Result<OperatorBlockMatrix> {
        if self.blocks.len() != self.n || self.blocks.iter().any(|row| row.len() != self.n) {
            return Err(Error::Input(format!(
                "expected {0}x{0} nested block lists",
                self.n
            )));
        }
        let mut blocks = Vec::with_capacity(self.n * self.n);
        for row in &self.blocks {
            for b in row {
                let m = b.to_matrix()?;
                if m.shape() != (self.d, self.d) {
                    return Err(Error::Input(format!(
                        "block is {}x{}, expected {2}x{2}",
                        m.nrows(),
                        m.ncols(),
                        self.d
                    )));
                }
                blocks.push(m);
            }
        }
        OperatorBlockMatrix::new(self.n, self.d, blocks).map_err(|e| Error::Input(e.to_string()))
    }
}

/// Map specification for `map-test`: exactly one of `fixture`,
/// `kraus_cp`/`kraus_cocp`, or `choi`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    /// Dimension for the `identity` and `transpose` fixtures (default 3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_cp: Option<Vec<MatrixFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus_cocp: Option<Vec<MatrixFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choi: Option<MatrixFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dim: Option<usize>,
}

impl MapFile {
    pub fn to_map(&self) -> Result<PositiveMap> {
        let has_kraus = self.kraus_cp.is_some() || self.kraus_cocp.is_some();
        let forms = [self.fixture.is_some(), has_kraus, self.choi.is_some()];
        if forms.iter().filter(|&&f| f).count() != 1 {
            return Err(Error::Input(
                "map file needs exactly one of: fixture, kraus_cp/kraus_cocp, choi".into(),
            ));
        }
        if let Some(name) = &self.fixture {
            let dim = self.dim.unwrap_or(3);
            if dim == 0 {
                return Err(Error::Input("fixture dimension must be positive".into()));
            }
            return match name.as_str() {
                "identity" => Ok(PositiveMap::Named(NamedMap::Identity(dim))),
                "transpose" => Ok(PositiveMap::Named(NamedMap::Transpose(dim))),
                "choi3" => Ok(PositiveMap::Named(NamedMap::Choi3)),
                other => Err(Error::Input(format!(
                    "unknown fixture {other:?} (expected identity, transpose or choi3)"
                ))),
            };
        }
        if has_kraus {
            let load = |list: &Option<Vec<MatrixFile>>| -> Result<Vec<ComplexMatrix>> {
                list.iter().flatten().map(MatrixFile::to_matrix).collect()
            };
            return make_decomposable(load(&self.kraus_cp)?, load(&self.kraus_cocp)?)
                .map_err(|e| Error::Input(e.to_string()));
        }
        let choi = self.choi.as_ref().expect("checked above").to_matrix()?;
        let (k, l) = match (self.input_dim, self.output_dim) {
            (Some(k), Some(l)) => (k, l),
            _ => return Err(Error::Input("choi maps need input_dim and output_dim".into())),
        };
        from_choi(choi, k, l).map_err(|e| Error::Input(e.to_string()))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    parse::<MatrixFile>(path)?.to_matrix()
}

pub fn read_blocks(path: &Path) -> Result<OperatorBlockMatrix> {
    parse::<BlockFile>(path)?.to_blocks()
}

pub fn read_map(path: &Path) -> Result<PositiveMap> {
    parse::<MapFile>(path)?.to_map()
}

/// Outcome label of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Degenerate,
    Inconclusive,
}

impl Verdict {
    pub fn from_bool(holds: bool) -> Self {
        if holds {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Degenerate => "degenerate",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceEcho {
    pub abs: f64,
    pub rel: f64,
    pub rcond: f64,
}

/// Machine-readable command report. Maps are ordered so output is
/// byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub verdict: Verdict,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub artifacts: BTreeMap<String, serde_json::Value>,
    pub seed: u64,
    pub tolerance: ToleranceEcho,
}

impl Report {
    pub fn new(command: &str, verdict: Verdict, seed: u64, tolerance: ToleranceEcho) -> Self {
        Report {
            command: command.to_string(),
            verdict,
            metrics: BTreeMap::new(),
            artifacts: BTreeMap::new(),
            seed,
            tolerance,
        }
    }

    /// Records a metric; non-finite values are left out (JSON has no encoding
    /// for them).
    pub fn metric(&mut self, name: &str, value: f64) -> &mut Self {
        if value.is_finite() {
            self.metrics.insert(name.to_string(), value);
        }
        self
    }

    pub fn artifact<T: Serialize>(&mut self, name: &str, value: &T) -> &mut Self {
        let v = serde_json::to_value(value).expect("artifact serializes");
        self.artifacts.insert(name.to_string(), v);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Plain-text rendering: verdict and metrics, artifacts summarized by name.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, self.verdict.as_str());
        for (k, v) in &self.metrics {
            out.push_str(&format!("  {k} = {v:e}\n"));
        }
        if !self.artifacts.is_empty() {
            let names: Vec<&str> = self.artifacts.keys().map(String::as_str).collect();
            out.push_str(&format!("  artifacts: {} (use --json)\n", names.join(", ")));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::trial_rng;
    use crate::random::gaussian;
    use proptest::prelude::*;

    #[test]
    fn matrix_file_validation() {
        let bad = MatrixFile {
            rows: 2,
            cols: 2,
            data: vec![[1.0, 0.0]; 3],
        };
        assert!(matches!(bad.to_matrix(), Err(Error::Input(_))));
        let empty = MatrixFile {
            rows: 0,
            cols: 0,
            data: vec![],
        };
        assert!(empty.to_matrix().is_err());
        assert!(
            serde_json::from_str::<MatrixFile>(r#"{"rows":1,"cols":1,"data":[[1.0,0.0]],"x":1}"#).is_err()
        );
        assert!(serde_json::from_str::<MatrixFile>(r#"{"rows":1,"cols":1,"data":[[1.0,0.0]"#).is_err());
    }

    #[test]
    fn block_file_validation() {
        let mut rng = trial_rng(1, 0);
        let m = gaussian(&mut rng, 4, 4);
        let x = OperatorBlockMatrix::from_assembled(2, 2, &m).unwrap();
        let mut file = BlockFile::from_blocks(&x);
        assert_eq!(file.to_blocks().unwrap(), x);
        file.d = 3;
        assert!(file.to_blocks().is_err());
        file.d = 2;
        file.blocks.pop();
        assert!(file.to_blocks().is_err());
    }

    #[test]
    fn map_file_forms() {
        let fixture: MapFile = serde_json::from_str(r#"{"fixture":"choi3"}"#).unwrap();
        assert_eq!(fixture.to_map().unwrap().input_dim(), 3);
        let id: MapFile = serde_json::from_str(r#"{"fixture":"identity","dim":2}"#).unwrap();
        assert_eq!(id.to_map().unwrap().input_dim(), 2);
        let unknown: MapFile = serde_json::from_str(r#"{"fixture":"nope"}"#).unwrap();
        assert!(unknown.to_map().is_err());
        let empty = MapFile::default();
        assert!(empty.to_map().is_err());
        let kraus: MapFile =
            serde_json::from_str(r#"{"kraus_cocp":[{"rows":1,"cols":2,"data":[[1,0],[0,1]]}]}"#).unwrap();
        let phi = kraus.to_map().unwrap();
        assert_eq!((phi.input_dim(), phi.output_dim()), (2, 1));
        let choi: MapFile = serde_json::from_str(
            r#"{"choi":{"rows":1,"cols":1,"data":[[1,0]]},"input_dim":1,"output_dim":1}"#,
        )
        .unwrap();
        assert!(choi.to_map().is_ok());
        let missing: MapFile =
            serde_json::from_str(r#"{"choi":{"rows":1,"cols":1,"data":[[1,0]]}}"#).unwrap();
        assert!(missing.to_map().is_err());
    }

    #[test]
    fn report_skips_non_finite_metrics() {
        let echo = ToleranceEcho {
            abs: 1e-10,
            rel: 1e-9,
            rcond: 1e-12,
        };
        let mut r = Report::new("x", Verdict::Inconclusive, 0, echo);
        r.metric("a", 1.5).metric("b", f64::INFINITY);
        assert_eq!(r.metrics.len(), 1);
        let parsed: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(parsed, r);
        assert!(r.to_json().contains("\"verdict\": \"inconclusive\""));
    }

    proptest! {
        #[test]
        fn matrix_json_round_trips_exactly(
            rows in 1usize..5,
            cols in 1usize..5,
            seed in any::<u64>(),
            scale in -300i32..300,
        ) {
            let mut rng = trial_rng(seed, 0);
            let m = gaussian(&mut rng, rows, cols) * c64(10f64.powi(scale / 10), 0.0);
            let text = serde_json::to_string(&MatrixFile::from_matrix(&m)).unwrap();
            let back: MatrixFile = serde_json::from_str(&text).unwrap();
            prop_assert_eq!(back.to_matrix().unwrap(), m);
        }
    }
}
