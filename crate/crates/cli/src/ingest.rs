//! CSV ingestion and export.
//!
//! The design matrix is `(Intercept)`, the group column, then the remaining
//! covariates in declaration order. Numeric columns are used as they are;
//! any column with a non-numeric entry is categorical and expands to one
//! indicator per level except the first. Levels and cluster labels are
//! sorted numerically when every value parses as a number, otherwise
//! lexically.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::path::Path;

use bayes_rmst::SurvivalDataset;
use serde::Serialize;

use crate::error::{CliError, Result, RowError};

/// Which input columns play which role.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSpec {
    pub time: String,
    pub event: String,
    pub group: String,
    /// `None` uses every column not named elsewhere, in file order.
    pub covariates: Option<Vec<String>>,
    /// `None` puts every row in one cluster.
    pub cluster: Option<String>,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        Self {
            time: "time".into(),
            event: "event".into(),
            group: "group".into(),
            covariates: None,
            cluster: Some(DEFAULT_CLUSTER.into()),
        }
    }
}

const DEFAULT_CLUSTER: &str = "cluster";
const MISSING: [&str; 4] = ["", "NA", "NaN", "."];

fn numeric_aware_sort(values: &mut [String]) {
    let numbers: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok()).collect();
    if numbers.is_some() {
        values.sort_by(|a, b| {
            let (x, y) = (a.parse::<f64>().unwrap(), b.parse::<f64>().unwrap());
            x.partial_cmp(&y).unwrap_or(Ordering::Equal).then_with(|| a.cmp(b))
        });
    } else {
        values.sort();
    }
}

fn levels_of(raw: &[String]) -> Vec<String> {
    let mut levels: Vec<String> = raw.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    numeric_aware_sort(&mut levels);
    levels
}

/// Encoded design columns of one covariate.
fn encode(name: &str, raw: &[String]) -> Vec<(String, Vec<f64>)> {
    let numeric: Option<Vec<f64>> = raw.iter().map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite())).collect();
    if let Some(values) = numeric {
        return vec![(name.to_string(), values)];
    }
    let levels = levels_of(raw);
    levels[1..]
        .iter()
        .map(|level| {
            let col = raw.iter().map(|v| f64::from(u8::from(v == level))).collect();
            (format!("{name}[{level}]"), col)
        })
        .collect()
}

/// Reads a dataset from a CSV file with a header row.
pub fn ingest_csv(path: &Path, spec: &ColumnSpec) -> Result<SurvivalDataset> {
    let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let find = |name: &str| header.iter().position(|h| h == name);

    let mut wanted = vec![spec.time.clone(), spec.event.clone(), spec.group.clone()];
    let cluster = match &spec.cluster {
        Some(c) if find(c).is_some() => Some(c.clone()),
        // The default cluster column is optional.
        Some(c) if c == DEFAULT_CLUSTER => None,
        Some(c) => {
            wanted.push(c.clone());
            None
        }
        None => None,
    };
    let covariates: Vec<String> = match &spec.covariates {
        Some(list) => list.clone(),
        None => header
            .iter()
            .filter(|h| ![&spec.time, &spec.event, &spec.group].contains(h) && Some(*h) != cluster.as_ref())
            .cloned()
            .collect(),
    };
    wanted.extend(covariates.iter().cloned());
    let missing: Vec<String> = wanted.iter().filter(|w| find(w).is_none()).cloned().collect();
    if !missing.is_empty() {
        return Err(CliError::MissingColumns { path: path.to_path_buf(), columns: missing });
    }
    let (ti, ei) = (find(&spec.time).unwrap(), find(&spec.event).unwrap());
    let ci = cluster.as_deref().and_then(find);
    let mut cov_names = vec![spec.group.clone()];
    cov_names.extend(covariates.iter().cloned());
    let cov_idx: Vec<usize> = cov_names.iter().map(|c| find(c).unwrap()).collect();

    let mut errors = Vec::new();
    let mut time = Vec::new();
    let mut event = Vec::new();
    let mut raw_cov: Vec<Vec<String>> = vec![Vec::new(); cov_idx.len()];
    let mut raw_cluster = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let line = r + 2;
        let record = match record {
            Ok(rec) => rec,
            Err(e) => {
                errors.push(RowError { line, message: e.to_string() });
                continue;
            }
        };
        let field = |i: usize| record.get(i).unwrap_or("");
        let mut push_err = |message: String| errors.push(RowError { line, message });
        match field(ti).parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => time.push(t),
            _ => push_err(format!("{} `{}` is not a positive number", spec.time, field(ti))),
        }
        match field(ei) {
            "1" => event.push(true),
            "0" => event.push(false),
            v => push_err(format!("{} `{v}` must be 0 or 1", spec.event)),
        }
        for (k, &i) in cov_idx.iter().enumerate() {
            let v = field(i);
            if MISSING.contains(&v) {
                push_err(format!("missing value in {}", cov_names[k]));
            }
            raw_cov[k].push(v.to_string());
        }
        if let Some(i) = ci {
            let v = field(i);
            if v.is_empty() {
                push_err(format!("missing value in {}", cluster.as_deref().unwrap()));
            }
            raw_cluster.push(v.to_string());
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Rows { path: path.to_path_buf(), errors });
    }
    let n = time.len();
    if n == 0 {
        return Err(CliError::Usage(format!("{} has no data rows", path.display())));
    }

    let mut names = vec!["(Intercept)".to_string()];
    let mut columns: Vec<Vec<f64>> = vec![vec![1.0; n]];
    for (k, raw) in raw_cov.iter().enumerate() {
        let encoded = encode(&cov_names[k], raw);
        if k == 0 {
            let ok = encoded.len() == 1 && encoded[0].1.iter().all(|&x| x == 0.0 || x == 1.0);
            if !ok {
                return Err(CliError::Usage(format!(
                    "group column `{}` must hold two levels (or 0/1)",
                    spec.group
                )));
            }
        }
        for (name, col) in encoded {
            names.push(name);
            columns.push(col);
        }
    }
    let design: Vec<Vec<f64>> = (0..n).map(|i| columns.iter().map(|c| c[i]).collect()).collect();

    let (labels, index) = if ci.is_some() {
        let labels = levels_of(&raw_cluster);
        let index = raw_cluster.iter().map(|v| labels.iter().position(|l| l == v).unwrap()).collect();
        (labels, index)
    } else {
        (vec!["all".to_string()], vec![0; n])
    };
    Ok(SurvivalDataset::new(time, event, design, index, names, labels)?)
}

/// Writes `time,event,cluster` and every non-intercept design column, in a
/// form [`ingest_csv`] reads back to the same dataset.
pub fn export_csv(data: &SurvivalDataset, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let csv_err = |source| CliError::Csv { path: path.to_path_buf(), source };
        let mut header = vec!["time".to_string(), "event".into(), "cluster".into()];
        header.extend(data.covariate_names()[1..].iter().cloned());
        w.write_record(&header).map_err(csv_err)?;
        for i in 0..data.len() {
            let mut rec = vec![
                data.time(i).to_string(),
                u8::from(data.event(i)).to_string(),
                data.cluster_labels()[data.cluster(i)].clone(),
            ];
            rec.extend(data.row(i)[1..].iter().map(f64::to_string));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    }
    crate::output::write_atomic(path, &buf)
}
