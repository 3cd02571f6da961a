//! Field files.
//!
//! Point clouds are CSV with the header `x_1,...,x_d,label`. Grids are a one
//! line JSON header `{dim, lo, hi, resolution, label_set}` followed by the
//! labels in row-major order, one grid row (last axis) per CSV line.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::builtin_field;
use crate::error::{Error, Result};
use crate::field::{Label, LabelField, Representation};

#[derive(Debug, Serialize, Deserialize)]
struct GridHeader {
    dim: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
    resolution: Vec<usize>,
    label_set: Vec<Label>,
}

pub fn read_point_cloud<R: Read>(reader: R) -> Result<LabelField> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let d = header.len().checked_sub(1).filter(|d| *d > 0).ok_or_else(|| {
        Error::Parse("point cloud header needs x_1..x_d,label".into())
    })?;
    for (i, name) in header.iter().enumerate() {
        let want = if i == d { "label".to_string() } else { format!("x_{}", i + 1) };
        if name != want {
            return Err(Error::Parse(format!("header column {} is {name:?}, expected {want:?}", i + 1)));
        }
    }
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |what: &str| Error::Parse(format!("row {}: {what}", row + 2));
        if rec.len() != d + 1 {
            return Err(bad("wrong number of columns"));
        }
        let x = (0..d)
            .map(|k| rec[k].parse::<f64>().map_err(|_| bad("coordinate is not a number")))
            .collect::<Result<Vec<_>>>()?;
        points.push(x);
        labels.push(rec[d].parse::<Label>().map_err(|_| bad("label is not an integer"))?);
    }
    LabelField::point_cloud(points, labels, None)
}

pub fn write_point_cloud<W: Write>(field: &LabelField, writer: W) -> Result<()> {
    let Representation::PointCloud(c) = field.representation() else {
        return Err(Error::InvalidParameter("not a point cloud".into()));
    };
    let d = field.dim();
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=d).map(|k| format!("x_{k}")).collect();
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..c.len() {
        let mut rec: Vec<String> = c.point(i).iter().map(|v| v.to_string()).collect();
        rec.push(c.labels()[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_grid<R: Read>(reader: R) -> Result<LabelField> {
    let mut lines = BufReader::new(reader).lines();
    let first = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))??;
    let header: GridHeader = serde_json::from_str(&first)?;
    if header.lo.len() != header.dim || header.hi.len() != header.dim || header.resolution.len() != header.dim {
        return Err(Error::Parse("grid header arrays must have length dim".into()));
    }
    let mut labels = Vec::new();
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for cell in line.split(',') {
            labels.push(
                cell.trim()
                    .parse::<Label>()
                    .map_err(|_| Error::Parse(format!("line {}: label {cell:?} is not an integer", row + 2)))?,
            );
        }
    }
    let set: BTreeSet<Label> = header.label_set.into_iter().collect();
    LabelField::grid(header.lo, header.hi, header.resolution, labels, Some(set))
}

pub fn write_grid<W: Write>(field: &LabelField, mut writer: W) -> Result<()> {
    let Representation::Grid(g) = field.representation() else {
        return Err(Error::InvalidParameter("not a grid".into()));
    };
    let header = GridHeader {
        dim: field.dim(),
        lo: g.lo().to_vec(),
        hi: g.hi().to_vec(),
        resolution: g.resolution().to_vec(),
        label_set: field.label_set().iter().copied().collect(),
    };
    writeln!(writer, "{}", serde_json::to_string(&header)?)?;
    let row = *g.resolution().last().unwrap();
    for chunk in g.labels().chunks(row) {
        let line: Vec<String> = chunk.iter().map(|l| l.to_string()).collect();
        writeln!(writer, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads a grid (JSON header) or point cloud (CSV) file.
pub fn read_field_file(path: &Path) -> Result<LabelField> {
    let text = std::fs::read(path)?;
    let starts_json = text.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{');
    if starts_json {
        read_grid(text.as_slice())
    } else {
        read_point_cloud(text.as_slice())
    }
}

/// Writes a grid or point cloud in its file format.
pub fn write_field_file(field: &LabelField, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    match field.representation() {
        Representation::Grid(_) => write_grid(field, &mut buf)?,
        Representation::PointCloud(_) => write_point_cloud(field, &mut buf)?,
        Representation::Oracle(_) => {
            return Err(Error::Unsupported("oracle fields have no file format".into()))
        }
    }
    std::fs::write(path, buf)?;
    Ok(())
}

/// An existing file path, or else a catalog name such as `cube:n=3,a=0.5`.
pub fn load_field(spec: &str) -> Result<LabelField> {
    let path = Path::new(spec);
    if path.is_file() {
        read_field_file(path)
    } else {
        builtin_field(spec)
    }
}
