//! CSV and JSON artifacts, and ingestion of external records.
//!
//! Every writer has a matching reader. Reals are written with 17 significant
//! digits so a write/read cycle reproduces them bit for bit.
//!
//! | artifact | header |
//! |----------|--------|
//! | series   | `t,<channel>...` |
//! | windows  | `window_index,point_index,coord0,...` |
//! | window index | `window_index,start_index,start_time` |
//! | diagrams | `window_index,dim,birth,death,capped` |
//! | features | `window_index,start_time,len1,...` |
//! | tagged   | `window_index,start_time,label,len1,...` |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{de::DeserializeOwned, Serialize};

use crate::cluster::{KMeansModel, TaggedWindow};
use crate::embed::{PointCloud, TimeSeries, Window};
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::ph::{Bar, PersistenceDiagram};

/// Seventeen significant digits; parses back to the same `f64`.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn create(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new().from_writer(BufWriter::new(file)))
}

fn open(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file))
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

/// Parses the cells of one record, reporting the file line on failure.
struct Row<'a> {
    path: &'a Path,
    record: &'a csv::StringRecord,
}

impl Row<'_> {
    fn line(&self) -> usize {
        self.record.position().map_or(0, |p| p.line() as usize)
    }

    fn bad(&self, message: String) -> Error {
        Error::BadCell { path: self.path.to_path_buf(), row: self.line(), message }
    }

    fn cell(&self, i: usize) -> Result<&str> {
        self.record.get(i).ok_or_else(|| self.bad(format!("missing column {}", i + 1)))
    }

    fn real(&self, i: usize) -> Result<f64> {
        let s = self.cell(i)?;
        s.parse().map_err(|_| self.bad(format!("column {}: `{s}` is not a number", i + 1)))
    }

    fn index(&self, i: usize) -> Result<usize> {
        let s = self.cell(i)?;
        s.parse().map_err(|_| self.bad(format!("column {}: `{s}` is not a non-negative integer", i + 1)))
    }

    fn flag(&self, i: usize) -> Result<bool> {
        match self.cell(i)? {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            s => Err(self.bad(format!("column {}: `{s}` is not a boolean", i + 1))),
        }
    }
}

fn expect_header(path: &Path, reader: &mut csv::Reader<File>, fixed: &[&str], prefix: &str) -> Result<usize> {
    let header = reader.headers()?.clone();
    if header.len() < fixed.len() || header.iter().zip(fixed).any(|(h, f)| h != *f) {
        return Err(format_err(path, format!("expected header starting with `{}`", fixed.join(","))));
    }
    for (i, h) in header.iter().enumerate().skip(fixed.len()) {
        let want = format!("{prefix}{}", i - fixed.len() + usize::from(prefix == "len"));
        if !prefix.is_empty() && h != want {
            return Err(format_err(path, format!("unexpected column `{h}`, wanted `{want}`")));
        }
    }
    Ok(header.len() - fixed.len())
}

pub fn write_series(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(std::iter::once("t").chain(series.channel_names().iter().map(String::as_str)))?;
    for (t, s) in series.times().iter().zip(series.samples()) {
        w.write_record(std::iter::once(fmt_real(*t)).chain(s.iter().map(|&x| fmt_real(x))))?;
    }
    finish(w, path)
}

/// Column names of a headed CSV.
pub fn csv_header(path: &Path) -> Result<Vec<String>> {
    let mut reader = open(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    if header.iter().all(String::is_empty) {
        return Err(format_err(path, "missing header row"));
    }
    Ok(header)
}

/// Reads a series written by [`write_series`]: first column time, the rest
/// channels.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let header = csv_header(path)?;
    if header.len() < 2 {
        return Err(format_err(path, "need a time column and at least one channel"));
    }
    ingest_csv(path, &header[0], &header[1..], false)
}

pub fn write_windows(path: &Path, index_path: &Path, windows: &[Window]) -> Result<()> {
    let dim = windows.first().map_or(0, |w| w.cloud.dim());
    let mut w = create(path)?;
    let mut header = vec!["window_index".to_string(), "point_index".to_string()];
    header.extend((0..dim).map(|j| format!("coord{j}")));
    w.write_record(&header)?;
    for (wi, win) in windows.iter().enumerate() {
        if win.cloud.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: win.cloud.dim() });
        }
        for (pi, p) in win.cloud.points().enumerate() {
            let mut rec = vec![wi.to_string(), pi.to_string()];
            rec.extend(p.iter().map(|&x| fmt_real(x)));
            w.write_record(&rec)?;
        }
    }
    finish(w, path)?;

    let mut w = create(index_path)?;
    w.write_record(["window_index", "start_index", "start_time"])?;
    for (wi, win) in windows.iter().enumerate() {
        w.write_record([wi.to_string(), win.start_index.to_string(), fmt_real(win.start_time)])?;
    }
    finish(w, index_path)
}

/// Inverse of [`write_windows`]. Windows must appear in index order.
pub fn read_windows(path: &Path, index_path: &Path) -> Result<Vec<Window>> {
    let mut reader = open(path)?;
    let dim = expect_header(path, &mut reader, &["window_index", "point_index"], "coord")?;
    if dim == 0 {
        return Err(format_err(path, "no coordinate columns"));
    }
    let mut clouds: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = Row { path, record: &record };
        let wi = row.index(0)?;
        let pi = row.index(1)?;
        if wi == clouds.len() {
            clouds.push(Vec::new());
        } else if wi + 1 != clouds.len() {
            return Err(row.bad(format!("window {wi} out of order")));
        }
        if pi * dim != clouds[wi].len() {
            return Err(row.bad(format!("point {pi} out of order")));
        }
        for j in 0..dim {
            clouds[wi].push(row.real(2 + j)?);
        }
    }

    let mut reader = open(index_path)?;
    expect_header(index_path, &mut reader, &["window_index", "start_index", "start_time"], "")?;
    let mut windows = Vec::with_capacity(clouds.len());
    let mut clouds = clouds.into_iter();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = Row { path: index_path, record: &record };
        if row.index(0)? != i {
            return Err(row.bad(format!("expected window {i}")));
        }
        let coords = clouds
            .next()
            .ok_or_else(|| row.bad(format!("window {i} has no points in {}", path.display())))?;
        windows.push(Window { start_index: row.index(1)?, start_time: row.real(2)?, cloud: PointCloud::new(coords, dim)? });
    }
    if clouds.next().is_some() {
        return Err(format_err(index_path, "fewer index rows than windows"));
    }
    Ok(windows)
}

pub fn write_diagrams(path: &Path, diagrams: &[PersistenceDiagram]) -> Result<()> {
    let mut w = create(path)?;
    w.write_record(["window_index", "dim", "birth", "death", "capped"])?;
    for (wi, d) in diagrams.iter().enumerate() {
        for b in &d.bars {
            w.write_record([wi.to_string(), b.dim.to_string(), fmt_real(b.birth), fmt_real(b.death), b.capped.to_string()])?;
        }
    }
    finish(w, path)
}

/// Inverse of [`write_diagrams`]. The file carries only bars, so `max_dim`
/// and `r` are supplied; each window's `t_max` is recovered from its capped
/// deaths (every window has at least one capped degree-0 bar).
pub fn read_diagrams(path: &Path, max_dim: usize, r: f64) -> Result<Vec<PersistenceDiagram>> {
    let mut reader = open(path)?;
    expect_header(path, &mut reader, &["window_index", "dim", "birth", "death", "capped"], "")?;
    let mut per_window: Vec<Vec<Bar>> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = Row { path, record: &record };
        let wi = row.index(0)?;
        if wi == per_window.len() {
            per_window.push(Vec::new());
        } else if wi + 1 != per_window.len() {
            return Err(row.bad(format!("window {wi} out of order")));
        }
        let bar = Bar { dim: row.index(1)?, birth: row.real(2)?, death: row.real(3)?, capped: row.flag(4)? };
        if !(bar.birth <= bar.death) {
            return Err(row.bad("birth after death".into()));
        }
        per_window[wi].push(bar);
    }
    if per_window.is_empty() {
        return Err(format_err(path, "no bars"));
    }
    Ok(per_window
        .into_iter()
        .map(|bars| {
            let t_max = bars
                .iter()
                .filter(|b| b.capped)
                .map(|b| b.death - r)
                .next()
                .unwrap_or_else(|| bars.iter().map(|b| b.death).fold(0.0, f64::max));
            PersistenceDiagram::new(bars, max_dim, t_max, r)
        })
        .collect())
}

fn write_vectors<'a>(
    path: &Path,
    width: usize,
    with_label: bool,
    rows: impl Iterator<Item = (usize, f64, Option<usize>, &'a [f64])>,
) -> Result<()> {
    let mut w = create(path)?;
    let mut header = vec!["window_index".to_string(), "start_time".to_string()];
    if with_label {
        header.push("label".into());
    }
    header.extend((1..=width).map(|j| format!("len{j}")));
    w.write_record(&header)?;
    for (wi, t, label, lengths) in rows {
        if lengths.len() != width {
            return Err(Error::DimensionMismatch { expected: width, actual: lengths.len() });
        }
        let mut rec = vec![wi.to_string(), fmt_real(t)];
        rec.extend(label.map(|l| l.to_string()));
        rec.extend(lengths.iter().map(|&x| fmt_real(x)));
        w.write_record(&rec)?;
    }
    finish(w, path)
}

pub fn write_features(path: &Path, features: &[FeatureVector]) -> Result<()> {
    let width = features.first().map_or(0, |f| f.lengths.len());
    write_vectors(path, width, false, features.iter().map(|f| (f.window_index, f.start_time, None, f.lengths.as_slice())))
}

pub fn read_features(path: &Path) -> Result<Vec<FeatureVector>> {
    let mut reader = open(path)?;
    let width = expect_header(path, &mut reader, &["window_index", "start_time"], "len")?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = Row { path, record: &record };
        let lengths = (0..width).map(|j| row.real(2 + j)).collect::<Result<_>>()?;
        out.push(FeatureVector { window_index: row.index(0)?, start_time: row.real(1)?, lengths });
    }
    if out.is_empty() {
        return Err(format_err(path, "no feature rows"));
    }
    Ok(out)
}

pub fn write_tagged(path: &Path, tagged: &[TaggedWindow]) -> Result<()> {
    let width = tagged.first().map_or(0, |t| t.features.len());
    write_vectors(path, width, true, tagged.iter().map(|t| (t.window_index, t.start_time, Some(t.label), t.features.as_slice())))
}

pub fn read_tagged(path: &Path) -> Result<Vec<TaggedWindow>> {
    let mut reader = open(path)?;
    let width = expect_header(path, &mut reader, &["window_index", "start_time", "label"], "len")?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = Row { path, record: &record };
        let features = (0..width).map(|j| row.real(3 + j)).collect::<Result<_>>()?;
        out.push(TaggedWindow { window_index: row.index(0)?, start_time: row.real(1)?, label: row.index(2)?, features });
    }
    Ok(out)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_model(path: &Path, model: &KMeansModel) -> Result<()> {
    write_json(path, model)
}

pub fn read_model(path: &Path) -> Result<KMeansModel> {
    let model: KMeansModel = read_json(path)?;
    if model.centroids.len() != model.k || model.k == 0 {
        return Err(format_err(path, format!("model declares k = {} but has {} centroids", model.k, model.centroids.len())));
    }
    let dim = model.dim();
    if model.centroids.iter().any(|c| c.len() != dim || c.iter().any(|x| !x.is_finite())) {
        return Err(format_err(path, "centroids must be finite and of equal length"));
    }
    Ok(model)
}

/// Loads `time_column` and `value_columns` (in that order) from a headed CSV.
///
/// Rows are sorted by time; equal times are rejected. An empty or
/// non-numeric value cell is an error unless `interpolate` is set, in which
/// case it is filled linearly in time from its neighbours (leading and
/// trailing gaps cannot be filled).
pub fn ingest_csv(path: &Path, time_column: &str, value_columns: &[String], interpolate: bool) -> Result<TimeSeries> {
    if value_columns.is_empty() {
        return Err(Error::InvalidParameter("select at least one value column".into()));
    }
    let mut reader = open(path)?;
    let header = reader.headers()?.clone();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format_err(path, format!("no column named `{name}` (have: {})", header.iter().collect::<Vec<_>>().join(", "))))
    };
    let time_idx = find(time_column)?;
    let value_idx: Vec<usize> = value_columns.iter().map(|c| find(c)).collect::<Result<_>>()?;

    // (time, line, values)
    let mut rows: Vec<(f64, usize, Vec<Option<f64>>)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row = Row { path, record: &record };
        let t = row.real(time_idx)?;
        if !t.is_finite() {
            return Err(row.bad(format!("time `{t}` is not finite")));
        }
        let mut values = Vec::with_capacity(value_idx.len());
        for &c in &value_idx {
            let cell = row.cell(c)?;
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => values.push(Some(v)),
                _ if interpolate => values.push(None),
                _ => {
                    let what = if cell.is_empty() { "missing value".to_string() } else { format!("`{cell}` is not a number") };
                    return Err(row.bad(format!("column `{}`: {what}", &header[c])));
                }
            }
        }
        rows.push((t, row.line(), values));
    }
    if rows.len() < 2 {
        return Err(Error::TooShort { required: 2, actual: rows.len() });
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut dups: Vec<f64> = rows.windows(2).filter(|w| w[0].0 == w[1].0).map(|w| w[0].0).collect();
    if !dups.is_empty() {
        dups.dedup();
        return Err(Error::DuplicateTimestamps(dups));
    }

    let times: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let mut channels = Vec::with_capacity(value_idx.len());
    for (c, name) in value_columns.iter().enumerate() {
        let raw: Vec<Option<f64>> = rows.iter().map(|r| r.2[c]).collect();
        let mut filled = Vec::with_capacity(raw.len());
        for (i, v) in raw.iter().enumerate() {
            let v = match v {
                Some(v) => *v,
                None => {
                    let before = (0..i).rev().find(|&j| raw[j].is_some());
                    let after = (i + 1..raw.len()).find(|&j| raw[j].is_some());
                    let (Some(a), Some(b)) = (before, after) else {
                        return Err(Error::BadCell {
                            path: path.to_path_buf(),
                            row: rows[i].1,
                            message: format!("column `{name}`: cannot interpolate a gap at the edge of the record"),
                        });
                    };
                    let (ya, yb) = (raw[a].unwrap(), raw[b].unwrap());
                    let w = (times[i] - times[a]) / (times[b] - times[a]);
                    let v = ya + w * (yb - ya);
                    log::info!("{}: row {}: filled `{name}` at t = {} with {v}", path.display(), rows[i].1, times[i]);
                    v
                }
            };
            filled.push(v);
        }
        channels.push(filled);
    }
    TimeSeries::from_channels(times, channels, value_columns.to_vec())
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
