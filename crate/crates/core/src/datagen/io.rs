use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Truth;
use crate::error::{Error, Result};
use crate::geometry::{ball_to_lorentz, lorentz_to_ball, BallPoint, LorentzPoint};
use crate::label::Label;

/// Which model the coordinates of a dataset live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointModel {
    /// Columns `x1..xd`.
    Ball,
    /// Columns `z0..zd`.
    Lorentz,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    BallToLorentz,
    LorentzToBall,
}

/// Labelled points with labels either in `{-1, +1}` (binary) or in `{0, 1, …}` (class ids).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    model: PointModel,
    rows: Vec<Vec<f64>>,
    labels: Vec<i64>,
}

fn check_alphabet(labels: &[i64]) -> std::result::Result<(), String> {
    let binary = labels.iter().all(|&l| l == -1 || l == 1);
    if binary {
        return Ok(());
    }
    match labels.iter().find(|&&l| l < 0) {
        Some(l) => Err(format!(
            "label {l} is outside both alphabets ({{-1, +1}} or class ids 0..K-1)"
        )),
        None => Ok(()),
    }
}

impl Dataset {
    fn build(model: PointModel, rows: Vec<Vec<f64>>, labels: Vec<i64>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} points but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        check_alphabet(&labels).map_err(Error::InvalidArgument)?;
        Ok(Dataset { model, rows, labels })
    }

    pub fn from_ball(points: &[BallPoint], labels: Vec<i64>) -> Result<Self> {
        Self::build(PointModel::Ball, points.iter().map(|x| x.coords().to_vec()).collect(), labels)
    }

    pub fn from_binary(points: &[BallPoint], labels: &[Label]) -> Result<Self> {
        Self::from_ball(points, labels.iter().map(|&l| i64::from(l)).collect())
    }

    pub fn from_lorentz(points: &[LorentzPoint], labels: Vec<i64>) -> Result<Self> {
        Self::build(PointModel::Lorentz, points.iter().map(|z| z.coords().to_vec()).collect(), labels)
    }

    pub fn model(&self) -> PointModel {
        self.model
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Intrinsic dimension `d` (the hyperboloid rows have `d + 1` coordinates).
    pub fn dim(&self) -> usize {
        let n = self.rows.first().map_or(0, Vec::len);
        match self.model {
            PointModel::Ball => n,
            PointModel::Lorentz => n.saturating_sub(1),
        }
    }

    pub fn ball_points(&self) -> Result<Vec<BallPoint>> {
        if self.model != PointModel::Ball {
            return Err(Error::invalid("dataset holds hyperboloid points"));
        }
        self.rows.iter().map(|r| BallPoint::new(r.clone())).collect()
    }

    pub fn lorentz_points(&self) -> Result<Vec<LorentzPoint>> {
        if self.model != PointModel::Lorentz {
            return Err(Error::invalid("dataset holds ball points"));
        }
        self.rows.iter().map(|r| LorentzPoint::new(r.clone())).collect()
    }

    /// True when every label is `-1` or `+1`.
    pub fn is_binary(&self) -> bool {
        self.labels.iter().all(|&l| l == -1 || l == 1)
    }

    pub fn binary_labels(&self) -> Result<Vec<Label>> {
        self.labels.iter().map(|&l| Label::try_from(l)).collect()
    }

    /// Distinct labels in increasing order.
    pub fn class_ids(&self) -> Vec<i64> {
        self.labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect()
    }
}

/// Pointwise model change; labels are kept.
pub fn convert_dataset(data: &Dataset, direction: Direction) -> Result<Dataset> {
    match (direction, data.model) {
        (Direction::BallToLorentz, PointModel::Ball) => {
            let pts: Vec<LorentzPoint> = data.ball_points()?.iter().map(ball_to_lorentz).collect();
            Dataset::from_lorentz(&pts, data.labels.clone())
        }
        (Direction::LorentzToBall, PointModel::Lorentz) => {
            let pts: Vec<BallPoint> = data.lorentz_points()?.iter().map(lorentz_to_ball).collect();
            Dataset::from_ball(&pts, data.labels.clone())
        }
        _ => Err(Error::invalid("dataset is already in the target model")),
    }
}

fn header(model: PointModel, width: usize) -> Vec<String> {
    let mut h: Vec<String> = match model {
        PointModel::Ball => (1..=width).map(|j| format!("x{j}")).collect(),
        PointModel::Lorentz => (0..width).map(|j| format!("z{j}")).collect(),
    };
    h.push("label".into());
    h
}

/// Writes `x1,…,xd,label` (or `z0,…,zd,label`) with 17 significant digits per float.
pub fn write_dataset(data: &Dataset, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let width = data.rows.first().map_or(0, Vec::len);
    writeln!(out, "{}", header(data.model, width).join(","))?;
    let mut line = String::new();
    for (row, label) in data.rows.iter().zip(&data.labels) {
        line.clear();
        for c in row {
            line.push_str(&format!("{c:.16e},"));
        }
        line.push_str(&label.to_string());
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let invalid = |line: usize, message: String| Error::Validation {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => invalid(0, format!("{other:?}")),
        })?;
    let head = reader.headers().map_err(|e| invalid(1, e.to_string()))?.clone();
    if head.is_empty() || (head.len() == 1 && head[0].is_empty()) {
        return Err(Error::Empty("dataset file has no header"));
    }
    let width = head.len() - 1;
    let model = if head.iter().eq(header(PointModel::Ball, width).iter().map(String::as_str)) {
        PointModel::Ball
    } else if width >= 2
        && head.iter().eq(header(PointModel::Lorentz, width).iter().map(String::as_str))
    {
        PointModel::Lorentz
    } else {
        return Err(invalid(
            1,
            format!("expected header x1,…,xd,label or z0,…,zd,label, got {}", head.iter().collect::<Vec<_>>().join(",")),
        ));
    };
    if width == 0 {
        return Err(invalid(1, "no coordinate columns".into()));
    }

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            invalid(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width + 1 {
            return Err(invalid(line, format!("expected {} fields, got {}", width + 1, rec.len())));
        }
        let coords = rec
            .iter()
            .take(width)
            .map(|f| f.parse::<f64>().map_err(|_| invalid(line, format!("not a number: {f:?}"))))
            .collect::<Result<Vec<f64>>>()?;
        let label: i64 = rec[width]
            .parse()
            .map_err(|_| invalid(line, format!("label is not an integer: {:?}", &rec[width])))?;
        let checked = match model {
            PointModel::Ball => BallPoint::new(coords).map(BallPoint::into_inner),
            PointModel::Lorentz => LorentzPoint::new(coords).map(LorentzPoint::into_inner),
        };
        rows.push(checked.map_err(|e| invalid(line, e.to_string()))?);
        labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Empty("dataset file has no rows"));
    }
    check_alphabet(&labels).map_err(|m| invalid(0, m))?;
    Ok(Dataset { model, rows, labels })
}

pub fn write_truth(truth: &Truth, path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, truth)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_truth(path: &Path) -> Result<Truth> {
    let truth: Truth = serde_json::from_reader(File::open(path)?)?;
    if truth.p.len() != truth.w_star.len() || truth.p.is_empty() {
        return Err(Error::Validation {
            path: path.to_path_buf(),
            line: 0,
            message: "p and w_star must be non-empty and of equal length".into(),
        });
    }
    Ok(truth)
}
