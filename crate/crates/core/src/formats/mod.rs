//! CSV files exchanged between pipeline stages.
//!
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the written values bit for bit.

use std::fs::File;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::diffusion::MODEL_SCHEMA;
use crate::geometry::{PointCloud, Vec3};
use crate::scene::SCENE_SCHEMA;
use crate::scoring::Annotation;

pub const CLOUD_FILE: &str = "cloud.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const PRED_FILE: &str = "pred.csv";
pub const REPORT_FILE: &str = "report.json";

pub const CLOUD_HEADER: [&str; 7] = ["x", "y", "z", "nx", "ny", "nz", "instance_id"];
pub const LABELS_HEADER: [&str; 12] = [
    "point_index",
    "x",
    "y",
    "z",
    "nx",
    "ny",
    "nz",
    "seal",
    "wrench",
    "collision",
    "visibility",
    "score",
];
pub const PRED_HEADER: [&str; 8] = ["point_index", "x", "y", "z", "nx", "ny", "nz", "confidence"];

pub const CLOUD_SCHEMA: &str = "cloud/1";
pub const LABELS_SCHEMA: &str = "labels/1";
pub const PRED_SCHEMA: &str = "pred/1";
pub const REPORT_SCHEMA: &str = "report/1";

/// Every on-disk format with its version tag.
pub fn schema_versions() -> [(&'static str, &'static str); 6] {
    [
        ("scene.json", SCENE_SCHEMA),
        (CLOUD_FILE, CLOUD_SCHEMA),
        (LABELS_FILE, LABELS_SCHEMA),
        ("model.json", MODEL_SCHEMA),
        (PRED_FILE, PRED_SCHEMA),
        (REPORT_FILE, REPORT_SCHEMA),
    ]
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: expected header {expected:?}, found {found:?}")]
    Header {
        path: PathBuf,
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("{path}, line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: u64,
        msg: String,
    },
    #[error("cannot write {what}: {msg}")]
    Incomplete { what: &'static str, msg: String },
}

/// One row of `labels.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRow {
    pub point_index: usize,
    pub point: Vec3,
    pub normal: Vec3,
    pub seal: f64,
    pub wrench: f64,
    pub collision: f64,
    pub visibility: f64,
    pub score: f64,
}

impl From<&Annotation> for LabelRow {
    fn from(a: &Annotation) -> Self {
        LabelRow {
            point_index: a.point_index,
            point: a.candidate.contact,
            normal: a.candidate.approach,
            seal: a.scores.seal,
            wrench: a.scores.wrench,
            collision: a.scores.collision,
            visibility: a.scores.visibility,
            score: a.scores.combined,
        }
    }
}

/// One row of `pred.csv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredRow {
    pub point_index: usize,
    pub point: Vec3,
    pub normal: Vec3,
    pub confidence: f64,
}

fn writer(path: &Path, header: &[&str]) -> Result<csv::Writer<File>, FormatError> {
    let csv_err = |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<(), FormatError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let csv_err = |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = writer(path, header)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush().map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_rows(path: &Path, header: &[&str]) -> Result<Vec<(u64, Vec<String>)>, FormatError> {
    let csv_err = |source| FormatError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|source| FormatError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(file);
    let found: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header {
        return Err(FormatError::Header {
            path: path.to_path_buf(),
            expected: header.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(rows)
}

struct Fields<'a> {
    path: &'a Path,
    line: u64,
    values: &'a [String],
}

impl Fields<'_> {
    fn parse<T: std::str::FromStr>(&self, i: usize) -> Result<T, FormatError> {
        self.values[i]
            .trim()
            .parse()
            .map_err(|_| FormatError::Parse {
                path: self.path.to_path_buf(),
                line: self.line,
                msg: format!("bad value {:?} in column {}", self.values[i], i + 1),
            })
    }

    fn real(&self, i: usize) -> Result<f64, FormatError> {
        let v: f64 = self.parse(i)?;
        if !v.is_finite() {
            return Err(FormatError::Parse {
                path: self.path.to_path_buf(),
                line: self.line,
                msg: format!("non-finite value in column {}", i + 1),
            });
        }
        Ok(v)
    }

    fn vec3(&self, i: usize) -> Result<Vec3, FormatError> {
        Ok(Vec3::new(
            self.real(i)?,
            self.real(i + 1)?,
            self.real(i + 2)?,
        ))
    }
}

fn fmt3(v: &Vec3) -> [String; 3] {
    [v.x.to_string(), v.y.to_string(), v.z.to_string()]
}

pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<(), FormatError> {
    let normals = cloud.normals.as_ref().ok_or(FormatError::Incomplete {
        what: "cloud",
        msg: "normals missing".into(),
    })?;
    let ids = cloud.instance_ids.as_ref().ok_or(FormatError::Incomplete {
        what: "cloud",
        msg: "instance ids missing".into(),
    })?;
    let rows = cloud
        .points
        .iter()
        .zip(normals)
        .zip(ids)
        .map(|((p, n), id)| {
            let mut r: Vec<String> = fmt3(p).into();
            r.extend(fmt3(n));
            r.push(id.to_string());
            r
        });
    write_rows(path, &CLOUD_HEADER, rows)
}

pub fn read_cloud(path: &Path) -> Result<PointCloud, FormatError> {
    let rows = read_rows(path, &CLOUD_HEADER)?;
    let (mut pts, mut normals, mut ids) = (Vec::new(), Vec::new(), Vec::new());
    for (line, values) in &rows {
        let f = Fields {
            path,
            line: *line,
            values,
        };
        pts.push(f.vec3(0)?);
        normals.push(f.vec3(3)?);
        ids.push(f.parse::<u32>(6)?);
    }
    let bad = |e: crate::geometry::GeometryError| FormatError::Parse {
        path: path.to_path_buf(),
        line: 0,
        msg: e.to_string(),
    };
    PointCloud::new(pts)
        .with_normals(normals)
        .map_err(bad)?
        .with_instance_ids(ids)
        .map_err(bad)
}

pub fn write_labels(path: &Path, rows: &[LabelRow]) -> Result<(), FormatError> {
    let rows = rows.iter().map(|r| {
        let mut v = vec![r.point_index.to_string()];
        v.extend(fmt3(&r.point));
        v.extend(fmt3(&r.normal));
        v.extend([r.seal, r.wrench, r.collision, r.visibility, r.score].map(|x| x.to_string()));
        v
    });
    write_rows(path, &LABELS_HEADER, rows)
}

pub fn read_labels(path: &Path) -> Result<Vec<LabelRow>, FormatError> {
    read_rows(path, &LABELS_HEADER)?
        .iter()
        .map(|(line, values)| {
            let f = Fields {
                path,
                line: *line,
                values,
            };
            Ok(LabelRow {
                point_index: f.parse(0)?,
                point: f.vec3(1)?,
                normal: f.vec3(4)?,
                seal: f.real(7)?,
                wrench: f.real(8)?,
                collision: f.real(9)?,
                visibility: f.real(10)?,
                score: f.real(11)?,
            })
        })
        .collect()
}

pub fn write_predictions(path: &Path, rows: &[PredRow]) -> Result<(), FormatError> {
    let rows = rows.iter().map(|r| {
        let mut v = vec![r.point_index.to_string()];
        v.extend(fmt3(&r.point));
        v.extend(fmt3(&r.normal));
        v.push(r.confidence.to_string());
        v
    });
    write_rows(path, &PRED_HEADER, rows)
}

pub fn read_predictions(path: &Path) -> Result<Vec<PredRow>, FormatError> {
    read_rows(path, &PRED_HEADER)?
        .iter()
        .map(|(line, values)| {
            let f = Fields {
                path,
                line: *line,
                values,
            };
            Ok(PredRow {
                point_index: f.parse(0)?,
                point: f.vec3(1)?,
                normal: f.vec3(4)?,
                confidence: f.real(7)?,
            })
        })
        .collect()
}
