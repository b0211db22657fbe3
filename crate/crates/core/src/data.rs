//! Multi-view datasets: CSV ingestion, manifests, synthetic blobs and
//! anchor sampling.
//!
//! Matrix files are header-free CSV with one sample per row. A manifest is a
//! plain text file with one `view=<path>` line per view and an optional
//! `labels=<path>` line; relative paths resolve against the manifest's
//! directory.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::seq::SliceRandom;

use crate::error::{GcaeError, Result};
use crate::linalg::{gaussian_matrix, seeded_rng, streams, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<DenseMatrix>,
    labels: Option<Vec<usize>>,
    /// Original label values, indexed by remapped label.
    label_values: Vec<i64>,
}

impl MultiViewDataset {
    pub fn new(views: Vec<DenseMatrix>, labels: Option<Vec<usize>>) -> Result<Self> {
        let Some(first) = views.first() else {
            return Err(GcaeError::invalid("a dataset needs at least one view"));
        };
        let n = first.nrows();
        for (v, view) in views.iter().enumerate() {
            if view.nrows() == 0 || view.ncols() == 0 {
                return Err(GcaeError::invalid(format!("view {v} is empty")));
            }
            if view.nrows() != n {
                return Err(GcaeError::shape(
                    "dataset",
                    format!("view {v} has {} rows, view 0 has {n}", view.nrows()),
                ));
            }
            if !view.iter().all(|x| x.is_finite()) {
                return Err(GcaeError::NonFinite(format!("view {v}")));
            }
        }
        let mut label_values = Vec::new();
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(GcaeError::shape(
                    "dataset",
                    format!("{} labels for {n} samples", labels.len()),
                ));
            }
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            label_values = (0..classes as i64).collect();
        }
        Ok(Self {
            views,
            labels,
            label_values,
        })
    }

    /// Builds a dataset from arbitrary integer labels, remapping them to
    /// contiguous ids in increasing order of the original value.
    pub fn with_raw_labels(views: Vec<DenseMatrix>, raw: &[i64]) -> Result<Self> {
        let (labels, values) = remap_labels(raw);
        let mut ds = Self::new(views, Some(labels))?;
        ds.label_values = values;
        Ok(ds)
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].nrows()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[DenseMatrix] {
        &self.views
    }

    pub fn view(&self, v: usize) -> &DenseMatrix {
        &self.views[v]
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn label_values(&self) -> &[i64] {
        &self.label_values
    }

    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|_| self.label_values.len())
    }

    /// Horizontal concatenation of all views.
    pub fn concatenated(&self) -> DenseMatrix {
        let n = self.n_samples();
        let total: usize = self.views.iter().map(|v| v.ncols()).sum();
        let mut out = DenseMatrix::zeros(n, total);
        let mut offset = 0;
        for view in &self.views {
            out.view_mut((0, offset), (n, view.ncols())).copy_from(view);
            offset += view.ncols();
        }
        out
    }

    /// Writes one CSV per view plus labels and a manifest into `dir`.
    /// Returns the manifest path.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|source| GcaeError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        let mut manifest = String::new();
        for (v, view) in self.views.iter().enumerate() {
            let name = format!("view{v}.csv");
            save_matrix(view, &dir.join(&name))?;
            manifest.push_str(&format!("view={name}\n"));
        }
        if let Some(labels) = &self.labels {
            let raw: Vec<i64> = labels.iter().map(|&l| self.label_values[l]).collect();
            save_labels(&raw, &dir.join("labels.csv"))?;
            manifest.push_str("labels=labels.csv\n");
        }
        let path = dir.join("manifest.txt");
        write_text(&path, &manifest)?;
        Ok(path)
    }
}

/// Anchor rows shared across views: the same sample indices for every view.
#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    pub indices: Vec<usize>,
    pub anchors: Vec<DenseMatrix>,
}

impl AnchorSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Samples `t` distinct rows, reused across all views.
pub fn sample_anchors(ds: &MultiViewDataset, t: usize, seed: u64) -> Result<AnchorSet> {
    let n = ds.n_samples();
    if t == 0 || t > n {
        return Err(GcaeError::invalid(format!("anchor count {t} outside [1, {n}]")));
    }
    let mut rng = seeded_rng(seed, streams::ANCHORS);
    let indices = index::sample(&mut rng, n, t).into_vec();
    let anchors = ds
        .views()
        .iter()
        .map(|view| DenseMatrix::from_fn(t, view.ncols(), |i, j| view[(indices[i], j)]))
        .collect();
    Ok(AnchorSet { indices, anchors })
}

/// Parameters for [`synth_multiview`].
#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub n_samples: usize,
    pub n_clusters: usize,
    pub dims: Vec<usize>,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

/// Gaussian blobs sharing one cluster assignment across all views.
///
/// Centers are drawn from a standard normal and rescaled so that the closest
/// pair in each view sits `separation * max(noise, 1)` apart; samples are
/// `center + noise * N(0, I)`. Cluster sizes differ by at most one.
pub fn synth_multiview(params: &SynthParams) -> Result<MultiViewDataset> {
    let SynthParams {
        n_samples,
        n_clusters,
        ref dims,
        separation,
        noise,
        seed,
    } = *params;
    if n_clusters == 0 || n_samples == 0 || n_clusters > n_samples {
        return Err(GcaeError::invalid(format!(
            "need 1 <= clusters ({n_clusters}) <= samples ({n_samples})"
        )));
    }
    if dims.is_empty() || dims.contains(&0) {
        return Err(GcaeError::invalid("every view needs a positive dimension"));
    }
    if !(separation > 0.0 && separation.is_finite()) || !(noise >= 0.0 && noise.is_finite()) {
        return Err(GcaeError::invalid("separation must be positive and noise nonnegative"));
    }

    let mut rng = seeded_rng(seed, streams::SYNTH);
    let mut labels: Vec<usize> = (0..n_samples).map(|i| i % n_clusters).collect();
    labels.shuffle(&mut rng);

    let target = separation * noise.max(1.0);
    let mut views = Vec::with_capacity(dims.len());
    for &d in dims {
        let mut centers = gaussian_matrix(n_clusters, d, &mut rng);
        if n_clusters > 1 {
            let mut closest = f64::INFINITY;
            for a in 0..n_clusters {
                for b in a + 1..n_clusters {
                    closest = closest.min((centers.row(a) - centers.row(b)).norm());
                }
            }
            // Coincident draws have probability zero; guard anyway.
            let scale = if closest > 0.0 { target / closest } else { target };
            centers *= scale;
        }
        let jitter = gaussian_matrix(n_samples, d, &mut rng);
        let view = DenseMatrix::from_fn(n_samples, d, |i, j| {
            centers[(labels[i], j)] + noise * jitter[(i, j)]
        });
        views.push(view);
    }
    MultiViewDataset::new(views, Some(labels))
}

/// Reads a manifest and every file it lists.
pub fn load_manifest(path: &Path) -> Result<MultiViewDataset> {
    let text = read_text(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut views = Vec::new();
    let mut labels = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_error(path, format!("line {}: expected key=value", lineno + 1)));
        };
        let file = base.join(value.trim());
        match key.trim() {
            "view" => {
                let m = load_matrix(&file)?;
                views.push(m);
            }
            "labels" => labels = Some(load_labels(&file)?),
            other => {
                return Err(parse_error(path, format!("line {}: unknown key `{other}`", lineno + 1)));
            }
        }
    }
    if views.is_empty() {
        return Err(parse_error(path, "manifest lists no views".to_string()));
    }
    match labels {
        Some(raw) => MultiViewDataset::with_raw_labels(views, &raw),
        None => MultiViewDataset::new(views, None),
    }
}

/// Maps arbitrary integer labels onto `0..c` in increasing order of value.
pub fn remap_labels(raw: &[i64]) -> (Vec<usize>, Vec<i64>) {
    let mut ids = BTreeMap::new();
    for &l in raw {
        ids.entry(l).or_insert(0usize);
    }
    let values: Vec<i64> = ids.keys().copied().collect();
    for (i, v) in ids.values_mut().enumerate() {
        *v = i;
    }
    (raw.iter().map(|l| ids[l]).collect(), values)
}

/// Writes `m` as header-free CSV. Values use the shortest representation
/// that parses back to the identical `f64`.
pub fn save_matrix(m: &DenseMatrix, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(m.nrows() * m.ncols() * 8);
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&m[(i, j)].to_string());
        }
        out.push('\n');
    }
    write_text(path, &out)
}

pub fn load_matrix(path: &Path) -> Result<DenseMatrix> {
    let rows = read_csv_rows(path)?;
    let Some(first) = rows.first() else {
        return Err(parse_error(path, "empty matrix file".to_string()));
    };
    let cols = first.len();
    let mut data = Vec::with_capacity(rows.len() * cols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(parse_error(
                path,
                format!("row {} has {} fields, expected {cols}", i + 1, row.len()),
            ));
        }
        for cell in row {
            let x: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, format!("row {}: `{cell}` is not a number", i + 1)))?;
            if !x.is_finite() {
                return Err(parse_error(path, format!("row {}: non-finite value", i + 1)));
            }
            data.push(x);
        }
    }
    Ok(DenseMatrix::from_row_slice(rows.len(), cols, &data))
}

pub fn save_labels(labels: &[i64], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    write_text(path, &out)
}

/// Reads integer labels. A single column is expected, but every cell is
/// taken in row-major order, so a one-line list also works.
pub fn load_labels(path: &Path) -> Result<Vec<i64>> {
    let rows = read_csv_rows(path)?;
    let mut out = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        for cell in row {
            let l: i64 = cell
                .parse()
                .map_err(|_| parse_error(path, format!("row {}: `{cell}` is not an integer", i + 1)))?;
            out.push(l);
        }
    }
    if out.is_empty() {
        return Err(parse_error(path, "no labels".to_string()));
    }
    Ok(out)
}

fn read_csv_rows(path: &Path) -> Result<Vec<Vec<String>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> GcaeError {
    if let csv::ErrorKind::Io(_) = e.kind() {
        match e.into_kind() {
            csv::ErrorKind::Io(source) => GcaeError::Io {
                path: path.to_path_buf(),
                source,
            },
            _ => unreachable!(),
        }
    } else {
        parse_error(path, e.to_string())
    }
}

fn parse_error(path: &Path, detail: String) -> GcaeError {
    GcaeError::Parse {
        path: path.to_path_buf(),
        detail,
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| GcaeError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let io = |source| GcaeError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)
}
