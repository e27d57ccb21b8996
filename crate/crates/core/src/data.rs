//! Right-censored, clustered survival data with a design matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One dataset: times, event flags, a row-major design matrix whose first
/// column is the intercept and second the group indicator, and a cluster
/// index per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalDataset {
    time: Vec<f64>,
    event: Vec<bool>,
    design: Vec<f64>,
    n_coef: usize,
    cluster: Vec<usize>,
    covariate_names: Vec<String>,
    cluster_labels: Vec<String>,
}

impl SurvivalDataset {
    /// Builds and validates a dataset.
    ///
    /// `cluster` holds zero-based indices into `cluster_labels`; every label
    /// must be used by at least one row.
    pub fn new(
        time: Vec<f64>,
        event: Vec<bool>,
        design: Vec<Vec<f64>>,
        cluster: Vec<usize>,
        covariate_names: Vec<String>,
        cluster_labels: Vec<String>,
    ) -> Result<Self> {
        let n = time.len();
        if n == 0 {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if event.len() != n || design.len() != n || cluster.len() != n {
            return Err(Error::Data(format!(
                "column lengths differ: time {n}, event {}, design {}, cluster {}",
                event.len(),
                design.len(),
                cluster.len()
            )));
        }
        let q = design[0].len();
        if q == 0 {
            return Err(Error::Data("design matrix has no columns".into()));
        }
        if covariate_names.len() != q {
            return Err(Error::Data(format!(
                "{} covariate names for {q} design columns",
                covariate_names.len()
            )));
        }
        let mut flat = Vec::with_capacity(n * q);
        for (i, row) in design.iter().enumerate() {
            if row.len() != q {
                return Err(Error::Data(format!("row {} has {} covariates, expected {q}", i + 1, row.len())));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                return Err(Error::Data(format!("row {} has non-finite covariate {x}", i + 1)));
            }
            flat.extend_from_slice(row);
        }
        if let Some((i, t)) = time.iter().enumerate().find(|(_, t)| !(**t > 0.0 && t.is_finite())) {
            return Err(Error::Data(format!("row {} has non-positive time {t}", i + 1)));
        }
        let m = cluster_labels.len();
        let mut used = vec![false; m];
        for (i, &c) in cluster.iter().enumerate() {
            if c >= m {
                return Err(Error::Data(format!("row {} has cluster index {c} out of range", i + 1)));
            }
            used[c] = true;
        }
        if let Some(c) = used.iter().position(|u| !u) {
            return Err(Error::Data(format!("cluster `{}` has no rows", cluster_labels[c])));
        }
        Ok(Self {
            time,
            event,
            design: flat,
            n_coef: q,
            cluster,
            covariate_names,
            cluster_labels,
        })
    }

    /// Single-cluster dataset with default names (`x0`, `x1`, ...).
    pub fn unclustered(time: Vec<f64>, event: Vec<bool>, design: Vec<Vec<f64>>) -> Result<Self> {
        let n = time.len();
        let q = design.first().map_or(0, Vec::len);
        let names = (0..q).map(|j| format!("x{j}")).collect();
        Self::new(time, event, design, vec![0; n], names, vec!["1".into()])
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn n_coef(&self) -> usize {
        self.n_coef
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_labels.len()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.time[i]
    }

    pub fn event(&self, i: usize) -> bool {
        self.event[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.design[i * self.n_coef..(i + 1) * self.n_coef]
    }

    pub fn cluster(&self, i: usize) -> usize {
        self.cluster[i]
    }

    pub fn times(&self) -> &[f64] {
        &self.time
    }

    pub fn events(&self) -> &[bool] {
        &self.event
    }

    pub fn clusters(&self) -> &[usize] {
        &self.cluster
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn cluster_labels(&self) -> &[String] {
        &self.cluster_labels
    }

    /// Row indices grouped by cluster.
    pub fn rows_by_cluster(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n_clusters()];
        for (i, &c) in self.cluster.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Rows belonging to one cluster, as a standalone single-cluster dataset.
    pub fn cluster_subset(&self, c: usize) -> Result<Self> {
        let rows: Vec<usize> = (0..self.len()).filter(|&i| self.cluster[i] == c).collect();
        if rows.is_empty() {
            return Err(Error::Data(format!("cluster index {c} has no rows")));
        }
        Self::new(
            rows.iter().map(|&i| self.time[i]).collect(),
            rows.iter().map(|&i| self.event[i]).collect(),
            rows.iter().map(|&i| self.row(i).to_vec()).collect(),
            vec![0; rows.len()],
            self.covariate_names.clone(),
            vec![self.cluster_labels[c].clone()],
        )
    }

    /// Appends one row (used to build perturbed datasets in tests).
    pub fn push_row(&mut self, time: f64, event: bool, x: &[f64], cluster: usize) -> Result<()> {
        if x.len() != self.n_coef {
            return Err(Error::Data(format!("row has {} covariates, expected {}", x.len(), self.n_coef)));
        }
        if !(time > 0.0 && time.is_finite()) {
            return Err(Error::Data(format!("non-positive time {time}")));
        }
        if cluster >= self.n_clusters() {
            return Err(Error::Data(format!("cluster index {cluster} out of range")));
        }
        self.time.push(time);
        self.event.push(event);
        self.design.extend_from_slice(x);
        self.cluster.push(cluster);
        Ok(())
    }

    pub fn event_count(&self) -> usize {
        self.event.iter().filter(|e| **e).count()
    }
}
