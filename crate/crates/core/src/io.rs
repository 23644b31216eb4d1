//! Text and CSV formats.
//!
//! * moments: one `ℓ re im` line per index, `#` comments allowed
//! * spectrum dump: `x value` per line
//! * data CSV: header row, numeric features, optional trailing `label`
//! * query log: `step,eta,point_id,label`
//! * final labels: `point_id,label,source`
//! * field dump: `id F-value in-set`

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::masc::{FinalLabels, LabelSource, QueryRecord};
use crate::metric::PointCloud;
use crate::signal::{MomentSequence, Spectrum};
use crate::support::SupportField;
use crate::synth::Dataset;
use crate::Label;

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

pub fn parse_moments(text: &str, path: &Path) -> Result<MomentSequence> {
    let mut entries: Vec<(i64, Complex64)> = Vec::new();
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::parse(path, line, "expected `l re im`"));
        }
        let idx: i64 = f[0]
            .parse()
            .map_err(|_| Error::parse(path, line, "bad index"))?;
        let re: f64 = f[1].parse().map_err(|_| Error::parse(path, line, "bad real part"))?;
        let im: f64 = f[2]
            .parse()
            .map_err(|_| Error::parse(path, line, "bad imaginary part"))?;
        entries.push((idx, Complex64::new(re, im)));
    }
    let n = entries
        .iter()
        .map(|(l, _)| l.unsigned_abs() as usize + 1)
        .max()
        .ok_or_else(|| Error::parse(path, 0, "no moments"))?;
    let mut values = vec![None; 2 * n - 1];
    for (l, v) in entries {
        let slot = &mut values[(l + n as i64 - 1) as usize];
        if slot.replace(v).is_some() {
            return Err(Error::parse(path, 0, format!("index {l} given twice")));
        }
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| Error::parse(path, 0, format!("missing index {}", i as i64 - (n as i64 - 1)))))
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::new(n, values)
}

pub fn read_moments(path: &Path) -> Result<MomentSequence> {
    parse_moments(&read_to_string(path)?, path)
}

pub fn format_moments(m: &MomentSequence) -> String {
    let mut out = String::new();
    for (l, v) in m.iter() {
        let _ = writeln!(out, "{l} {} {}", v.re, v.im);
    }
    out
}

pub fn format_spectrum(s: &Spectrum) -> String {
    let mut out = String::with_capacity(s.len() * 32);
    for (x, v) in s.grid.iter().zip(&s.values) {
        let _ = writeln!(out, "{x} {v}");
    }
    out
}

/// Parse a data CSV. A last column named `label` (case-insensitive) holds
/// integer class labels and is split off as ground truth.
pub fn parse_dataset(text: &str, path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, 1, e.to_string()))?
        .clone();
    if headers.is_empty() {
        return Err(Error::parse(path, 1, "missing header row"));
    }
    let has_label = headers
        .iter()
        .next_back()
        .is_some_and(|h| h.eq_ignore_ascii_case("label"));
    let features = headers.len() - usize::from(has_label);
    if features == 0 {
        return Err(Error::parse(path, 1, "no feature columns"));
    }
    let mut data = Vec::new();
    let mut truth = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::parse(path, line, e.to_string()))?;
        if rec.len() != headers.len() {
            return Err(Error::parse(
                path,
                line,
                format!("expected {} fields, got {}", headers.len(), rec.len()),
            ));
        }
        for (c, field) in rec.iter().take(features).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::parse(path, line, format!("column {c}: bad number `{field}`")))?;
            data.push(v);
        }
        if has_label {
            let l: Label = rec[features]
                .parse()
                .map_err(|_| Error::parse(path, line, format!("bad label `{}`", &rec[features])))?;
            truth.push(l);
        }
    }
    if data.is_empty() {
        return Err(Error::parse(path, 2, "no data rows"));
    }
    Ok(Dataset {
        cloud: PointCloud::new(features, data)?,
        truth: has_label.then_some(truth),
    })
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    parse_dataset(&read_to_string(path)?, path)
}

pub fn format_dataset(data: &Dataset) -> String {
    let dim = data.cloud.dim();
    let mut out = String::new();
    let header: Vec<String> = (0..dim).map(|c| format!("x{c}")).collect();
    out.push_str(&header.join(","));
    if data.truth.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, row) in data.cloud.rows().enumerate() {
        let fields: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        if let Some(t) = &data.truth {
            let _ = write!(out, ",{}", t[i]);
        }
        out.push('\n');
    }
    out
}

pub fn format_query_log(log: &[QueryRecord]) -> String {
    let mut out = String::from("step,eta,point_id,label\n");
    for q in log {
        let _ = writeln!(out, "{},{},{},{}", q.step, q.eta, q.point, q.label);
    }
    out
}

pub fn parse_query_log(text: &str, path: &Path) -> Result<Vec<QueryRecord>> {
    let mut out = Vec::new();
    for (line, l) in data_lines(text).skip(1) {
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        let bad = || Error::parse(path, line, "expected step,eta,point_id,label");
        if f.len() != 4 {
            return Err(bad());
        }
        out.push(QueryRecord {
            step: f[0].parse().map_err(|_| bad())?,
            eta: f[1].parse().map_err(|_| bad())?,
            point: f[2].parse().map_err(|_| bad())?,
            label: f[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}

pub fn format_labels(labels: &FinalLabels) -> String {
    let mut out = String::from("point_id,label,source\n");
    for (i, (l, s)) in labels.labels.iter().zip(&labels.sources).enumerate() {
        let _ = writeln!(out, "{i},{l},{}", s.as_str());
    }
    out
}

pub fn parse_labels(text: &str, path: &Path) -> Result<FinalLabels> {
    let mut labels = Vec::new();
    let mut sources = Vec::new();
    for (line, l) in data_lines(text).skip(1) {
        let f: Vec<&str> = l.split(',').map(str::trim).collect();
        let bad = || Error::parse(path, line, "expected point_id,label,source");
        if f.len() != 3 {
            return Err(bad());
        }
        let id: usize = f[0].parse().map_err(|_| bad())?;
        if id != labels.len() {
            return Err(Error::parse(path, line, format!("expected point {} next", labels.len())));
        }
        labels.push(f[1].parse().map_err(|_| bad())?);
        sources.push(f[2].parse::<LabelSource>().map_err(|_| bad())?);
    }
    Ok(FinalLabels { labels, sources })
}

pub fn format_field(field: &SupportField, mask: &[bool]) -> String {
    let mut out = String::new();
    for (i, (f, m)) in field.values().iter().zip(mask).enumerate() {
        let _ = writeln!(out, "{i} {f} {}", u8::from(*m));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{moments_from_sources, PointSourceModel};

    #[test]
    fn moments_round_trip() {
        let m = moments_from_sources(&PointSourceModel::new(&[(2.0, 0.3)]).unwrap(), 4).unwrap();
        let p = Path::new("m.txt");
        assert_eq!(parse_moments(&format_moments(&m), p).unwrap(), m);
        assert!(parse_moments("0 1 0\n1 1 0\n", p).is_err());
        assert!(parse_moments("0 1\n", p).is_err());
        assert!(parse_moments("# c\n0 1 0\n0 1 0\n", p).is_err());
    }

    #[test]
    fn dataset_with_and_without_labels() {
        let p = Path::new("d.csv");
        let d = parse_dataset("a,b,label\n1,2,0\n3,4,1\n", p).unwrap();
        assert_eq!(d.cloud.dim(), 2);
        assert_eq!(d.truth, Some(vec![0, 1]));
        let d = parse_dataset("a,b\n1,2\n", p).unwrap();
        assert!(d.truth.is_none());
        assert!(parse_dataset("a,b\n1,x\n", p).is_err());
        assert!(parse_dataset("a,label\n1,-1\n", p).is_err());
        assert!(parse_dataset("a,b\n", p).is_err());
        let again = parse_dataset(&format_dataset(&parse_dataset("a,b,label\n1.5,2,0\n", p).unwrap()), p).unwrap();
        assert_eq!(again.cloud.row(0), &[1.5, 2.0]);
    }

    #[test]
    fn labels_and_log_round_trip() {
        let fl = FinalLabels {
            labels: vec![3, 1],
            sources: vec![LabelSource::Queried, LabelSource::Knn],
        };
        let p = Path::new("l.csv");
        assert_eq!(parse_labels(&format_labels(&fl), p).unwrap(), fl);
        let log = vec![QueryRecord { step: 1, eta: 0.011, point: 4, label: 2 }];
        assert_eq!(parse_query_log(&format_query_log(&log), p).unwrap(), log);
        assert_eq!(format_query_log(&log), "step,eta,point_id,label\n1,0.011,4,2\n");
    }
}
