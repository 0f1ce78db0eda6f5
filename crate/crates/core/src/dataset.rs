//! Point clouds, CSV ingestion and deterministic subsampling.
//!
//! CSV layout: one header row `x0,x1,...,x{d-1}[,label]`, decimal floats,
//! LF or CRLF line endings. Files we write use LF and 17 significant digits,
//! which round-trips every `f64` bit-exactly.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// N points in d dimensions; point ids are the row indices `0..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    points: Array2<f64>,
}

impl PointCloud {
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, d) = points.dim();
        if n == 0 || d == 0 {
            return Err(Error::invalid(format!(
                "point cloud must have N >= 1 and d >= 1, got {n}x{d}"
            )));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite coordinate at point {}, dim {}",
                pos / d,
                pos % d
            )));
        }
        Ok(PointCloud { points })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let points = Array2::from_shape_vec((rows.len(), d), flat)
            .map_err(|e| Error::invalid(e.to_string()))?;
        Self::new(points)
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn point(&self, i: usize) -> ArrayView1<'_, f64> {
        self.points.row(i)
    }

    pub fn ids(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Column `j` as an owned vector.
    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.points.column(j).to_vec()
    }

    /// Rows `idx` in the given order, reindexed from 0.
    pub fn select(&self, idx: &[usize]) -> PointCloud {
        PointCloud {
            points: self.points.select(Axis(0), idx),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W, labels: Option<&[usize]>) -> Result<()> {
        write_points(out, self, labels).map_err(|e| Error::io("<csv writer>", e))
    }

    pub fn save(&self, path: &Path, labels: Option<&[usize]>) -> Result<()> {
        write_atomic(path, |w| write_points(w, self, labels))
    }
}

/// Point cloud with an optional integer class per point.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledPointCloud {
    pub cloud: PointCloud,
    pub labels: Option<Vec<usize>>,
    /// Original label strings, indexed by integer label.
    pub label_names: Vec<String>,
}

impl LabeledPointCloud {
    pub fn unlabeled(cloud: PointCloud) -> Self {
        LabeledPointCloud {
            cloud,
            labels: None,
            label_names: Vec::new(),
        }
    }

    /// Keep the rows in `idx`; labels follow their points.
    pub fn select(&self, idx: &[usize]) -> LabeledPointCloud {
        LabeledPointCloud {
            cloud: self.cloud.select(idx),
            labels: self
                .labels
                .as_ref()
                .map(|l| idx.iter().map(|&i| l[i]).collect()),
            label_names: self.label_names.clone(),
        }
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.label_names.len()];
        if let Some(labels) = &self.labels {
            for &l in labels {
                counts[l] += 1;
            }
        }
        counts
    }
}

/// Reads a points CSV. With `has_labels` the last column is a class label
/// (string or numeric), mapped to integers in order of first appearance.
pub fn load_points(path: &Path, has_labels: bool) -> Result<LabeledPointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_points(file, has_labels)
}

pub fn read_points<R: std::io::Read>(input: R, has_labels: bool) -> Result<LabeledPointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let header_len = reader
        .headers()
        .map_err(|e| Error::Parse {
            row: 0,
            message: e.to_string(),
        })?
        .len();
    let d = if has_labels {
        header_len.saturating_sub(1)
    } else {
        header_len
    };
    if d == 0 {
        return Err(Error::Parse {
            row: 0,
            message: "header has no coordinate columns".into(),
        });
    }

    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut label_index: HashMap<String, usize> = HashMap::new();
    let mut label_names = Vec::new();
    let mut rows = 0usize;

    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != header_len {
            return Err(Error::Parse {
                row,
                message: format!("expected {header_len} fields, found {}", record.len()),
            });
        }
        for (j, field) in record.iter().take(d).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {j}: '{field}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column {j}: non-finite value"),
                });
            }
            coords.push(v);
        }
        if has_labels {
            let name = record.get(d).unwrap_or_default().to_string();
            let next = label_names.len();
            let id = *label_index.entry(name.clone()).or_insert_with(|| {
                label_names.push(name);
                next
            });
            labels.push(id);
        }
        rows += 1;
    }

    if rows == 0 {
        return Err(Error::Parse {
            row: 1,
            message: "no data rows".into(),
        });
    }
    let points = Array2::from_shape_vec((rows, d), coords).expect("row lengths checked");
    Ok(LabeledPointCloud {
        cloud: PointCloud::new(points)?,
        labels: has_labels.then_some(labels),
        label_names,
    })
}

fn write_points<W: Write>(
    mut out: W,
    cloud: &PointCloud,
    labels: Option<&[usize]>,
) -> std::io::Result<()> {
    let d = cloud.dim();
    let header: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    write!(out, "{}", header.join(","))?;
    if labels.is_some() {
        write!(out, ",label")?;
    }
    writeln!(out)?;
    for (i, row) in cloud.points.outer_iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{}", fmt_f64(*v))?;
        }
        if let Some(l) = labels {
            write!(out, ",{}", l[i])?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes through a temp file in the destination directory, then renames.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut w = BufWriter::new(&mut tmp);
        body(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Indices of a uniform without-replacement sample of `min(n, total)` items,
/// returned in ascending order. Partial Fisher–Yates on a seeded stream.
pub fn subsample_indices(total: usize, n: usize, seed: u64) -> Vec<usize> {
    if n >= total {
        return (0..total).collect();
    }
    let mut idx: Vec<usize> = (0..total).collect();
    let mut rng = Stream::new(seed);
    for i in 0..n {
        let j = i + rng.next_below((total - i) as u64) as usize;
        idx.swap(i, j);
    }
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

pub fn subsample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::invalid("subsample size must be >= 1"));
    }
    Ok(cloud.select(&subsample_indices(cloud.len(), n, seed)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn parse(text: &str, labels: bool) -> Result<LabeledPointCloud> {
        read_points(text.as_bytes(), labels)
    }

    #[test]
    fn minimal_unlabeled_row() {
        let lp = parse("x0,x1\n0.0,0.0\n", false).unwrap();
        assert_eq!(lp.cloud.len(), 1);
        assert_eq!(lp.cloud.dim(), 2);
        assert!(lp.labels.is_none());
    }

    #[test]
    fn non_numeric_field_names_row() {
        match parse("x0,x1\n1.0,abc\n", false) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn ragged_row_rejected() {
        match parse("x0,x1\n1.0,2.0\n3.0\n", false) {
            Err(Error::Parse { row, .. }) => assert_eq!(row, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn crlf_and_first_appearance_labels() {
        let lp = parse("x0,label\r\n1,b\r\n2,a\r\n3,b\r\n4,7\r\n", true).unwrap();
        assert_eq!(lp.labels.unwrap(), vec![0, 1, 0, 2]);
        assert_eq!(lp.label_names, vec!["b", "a", "7"]);
    }

    #[test]
    fn numeric_labels_accepted() {
        let lp = parse("x0,x1,label\n1,2,3\n4,5,3\n6,7,1\n", true).unwrap();
        assert_eq!(lp.cloud.dim(), 2);
        assert_eq!(lp.labels.unwrap(), vec![0, 0, 1]);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_points(Path::new("/nonexistent/pts.csv"), false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn non_finite_cloud_rejected() {
        assert!(PointCloud::from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(PointCloud::from_rows(&[]).is_err());
    }

    #[test]
    fn subsample_saturates_in_order() {
        let cloud = PointCloud::from_rows(&[vec![3.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(subsample(&cloud, 5, 9).unwrap(), cloud);
        assert_eq!(subsample(&cloud, 3, 9).unwrap(), cloud);
    }

    #[test]
    fn subsample_large_is_reproducible() {
        let a = subsample_indices(40_000, 1200, 7);
        let b = subsample_indices(40_000, 1200, 7);
        assert_eq!(a.len(), 1200);
        assert_eq!(a, b);
        assert_eq!(a.iter().collect::<HashSet<_>>().len(), 1200);
    }

    #[test]
    fn subsample_seeds_differ() {
        let a: HashSet<usize> = subsample_indices(100, 50, 1).into_iter().collect();
        let b: HashSet<usize> = subsample_indices(100, 50, 2).into_iter().collect();
        assert_ne!(a, b);
    }

    #[test]
    fn subsample_is_roughly_uniform() {
        let mut hits = vec![0usize; 20];
        for seed in 0..2000 {
            for i in subsample_indices(20, 5, seed) {
                hits[i] += 1;
            }
        }
        // Expected 500 per index.
        assert!(hits.iter().all(|&h| (400..600).contains(&h)), "{hits:?}");
    }
}
