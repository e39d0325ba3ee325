//! Data ingestion: matrix/response/group-spec CSV loading, standardisation,
//! and feature expansion (third-order polynomials and dummy coding).
//!
//! File formats:
//! - matrix CSV: comma-separated, `.` decimal, optional single header row;
//! - response CSV: one numeric column, optional header;
//! - group-spec CSV: header `level,group,column`, one row per membership,
//!   1-based column indices, arbitrary group labels, columns not listed at a
//!   level are ungrouped there.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupHierarchy;

/// Per-column centering/scaling applied to X and the centering applied to y.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Standardization {
    pub x_mean: Vec<f64>,
    /// Sample standard deviation divisor per column.
    pub x_scale: Vec<f64>,
    pub y_mean: f64,
}

impl Standardization {
    /// Map standardised-scale coefficients back to the original scale,
    /// returning `(beta_original, intercept)`.
    pub fn original_scale(&self, beta_std: &DVector<f64>) -> (DVector<f64>, f64) {
        let beta: DVector<f64> =
            DVector::from_fn(beta_std.len(), |j, _| beta_std[j] / self.x_scale[j]);
        let intercept =
            self.y_mean - beta.iter().zip(self.x_mean.iter()).map(|(b, m)| b * m).sum::<f64>();
        (beta, intercept)
    }
}

/// A group of expanded columns declared by a feature-expansion step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    pub name: String,
    /// 0-based column indices into the expanded matrix.
    pub columns: Vec<usize>,
}

/// A design matrix with its response, column names, and ingestion records.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub names: Vec<String>,
    pub standardization: Option<Standardization>,
    /// Groups declared by feature expansion (empty otherwise).
    pub groups: Vec<FeatureGroup>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>, names: Vec<String>) -> Result<Self> {
        if y.len() != x.nrows() {
            return Err(Error::Shape(format!(
                "X has {} rows but y has {}",
                x.nrows(),
                y.len()
            )));
        }
        if names.len() != x.ncols() {
            return Err(Error::Shape(format!(
                "X has {} columns but {} names were given",
                x.ncols(),
                names.len()
            )));
        }
        Ok(Dataset { x, y, names, standardization: None, groups: Vec::new() })
    }
}

/// Rows of parsed cells plus a flag for a detected header line.
fn read_numeric_csv(path: &Path) -> Result<(Vec<Vec<f64>>, Option<Vec<String>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(i + 1);
        let cells: Vec<&str> = record.iter().collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, usize> = cells
            .iter()
            .enumerate()
            .map(|(c, v)| v.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(vals) => {
                if let Some(w) = width {
                    if vals.len() != w {
                        return Err(Error::Parse {
                            line,
                            msg: format!("row has {} cells, expected {w}", vals.len()),
                        });
                    }
                } else {
                    width = Some(vals.len());
                }
                rows.push(vals);
            }
            Err(col) => {
                if rows.is_empty() && header.is_none() {
                    header = Some(cells.iter().map(|s| s.to_string()).collect());
                } else {
                    return Err(Error::Parse {
                        line,
                        msg: format!("cell {} ('{}') is not numeric", col + 1, cells[col]),
                    });
                }
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Ingestion(format!("{} contains no data rows", path.display())));
    }
    Ok((rows, header))
}

/// Load a rectangular numeric CSV; returns the matrix and column names
/// (synthesised as x1..xp when no header is present).
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<(DMatrix<f64>, Vec<String>)> {
    let (rows, header) = read_numeric_csv(path.as_ref())?;
    let p = rows[0].len();
    let names = match header {
        Some(h) => {
            if h.len() != p {
                return Err(Error::Parse {
                    line: 1,
                    msg: format!("header has {} fields but data rows have {p}", h.len()),
                });
            }
            h
        }
        None => (1..=p).map(|j| format!("x{j}")).collect(),
    };
    let x = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
    Ok((x, names))
}

/// Load a single-column numeric CSV as the response vector.
pub fn load_response_csv(path: impl AsRef<Path>) -> Result<DVector<f64>> {
    let (rows, _) = read_numeric_csv(path.as_ref())?;
    if rows[0].len() != 1 {
        return Err(Error::Ingestion(format!(
            "response file must have one column, found {}",
            rows[0].len()
        )));
    }
    Ok(DVector::from_fn(rows.len(), |i, _| rows[i][0]))
}

/// Load a group-spec CSV (`level,group,column`) into a validated hierarchy
/// over `p` predictors.
pub fn load_group_spec(path: impl AsRef<Path>, p: usize) -> Result<GroupHierarchy> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path.as_ref())?;
    {
        let headers = reader.headers().map_err(|e| Error::Parse { line: 1, msg: e.to_string() })?;
        let expect = ["level", "group", "column"];
        let got: Vec<String> = headers.iter().map(|h| h.to_ascii_lowercase()).collect();
        if got != expect {
            return Err(Error::Parse {
                line: 1,
                msg: format!("group spec header must be 'level,group,column', found '{}'", got.join(",")),
            });
        }
    }

    // (level value, group label, 0-based column) triples.
    let mut triples: Vec<(u32, String, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let level: u32 = record[0]
            .parse()
            .ok()
            .filter(|&l| l >= 1)
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("level '{}' is not a positive integer", &record[0]),
            })?;
        let column: usize = record[2]
            .parse()
            .ok()
            .filter(|&c: &usize| c >= 1)
            .ok_or_else(|| Error::Parse {
                line,
                msg: format!("column '{}' is not a positive integer", &record[2]),
            })?;
        if column > p {
            return Err(Error::Validation(format!(
                "group spec references column {column} but the matrix has {p} columns"
            )));
        }
        triples.push((level, record[1].to_string(), column - 1));
    }

    let mut level_values: Vec<u32> = triples.iter().map(|t| t.0).collect();
    level_values.sort_unstable();
    level_values.dedup();

    let mut levels: Vec<Vec<u32>> = vec![vec![0; p]; level_values.len()];
    for (level, label, col) in &triples {
        let k = level_values.binary_search(level).unwrap();
        // Labels are arbitrary; map them to dense ids per level.
        let labels: Vec<String> = triples
            .iter()
            .filter(|t| t.0 == *level)
            .map(|t| t.1.clone())
            .collect();
        let mut seen: Vec<&String> = Vec::new();
        for l in &labels {
            if !seen.contains(&l) {
                seen.push(l);
            }
        }
        let id = seen.iter().position(|l| *l == label).unwrap() as u32 + 1;
        if levels[k][*col] != 0 && levels[k][*col] != id {
            return Err(Error::Validation(format!(
                "level {level}: column {} assigned to two groups",
                col + 1
            )));
        }
        levels[k][*col] = id;
    }
    GroupHierarchy::new(p, &levels)
}

/// Write a matrix CSV with a header row.
pub fn write_matrix_csv(path: impl AsRef<Path>, x: &DMatrix<f64>, names: &[String]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&names.join(","));
    out.push('\n');
    for i in 0..x.nrows() {
        let row: Vec<String> = (0..x.ncols()).map(|j| format!("{}", x[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a response CSV with a `y` header.
pub fn write_response_csv(path: impl AsRef<Path>, y: &DVector<f64>) -> Result<()> {
    let mut out = String::from("y\n");
    for v in y.iter() {
        out.push_str(&format!("{v}\n"));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Write a group-spec CSV for a hierarchy.
pub fn write_group_spec(path: impl AsRef<Path>, h: &GroupHierarchy) -> Result<()> {
    let mut out = String::from("level,group,column\n");
    for (k, assignment) in h.assignments().iter().enumerate() {
        for (j, &g) in assignment.iter().enumerate() {
            if g != 0 {
                out.push_str(&format!("{},{},{}\n", k + 1, g, j + 1));
            }
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Center and scale the columns of `x` to zero mean and unit sample variance;
/// returns the standardized matrix with the applied means and scales.
pub fn standardize_matrix(x: &DMatrix<f64>, names: &[String]) -> Result<(DMatrix<f64>, Vec<f64>, Vec<f64>)> {
    let (n, p) = x.shape();
    if n < 2 {
        return Err(Error::Ingestion("standardisation needs at least two rows".into()));
    }
    let mut means = Vec::with_capacity(p);
    let mut scales = Vec::with_capacity(p);
    let mut out = x.clone();
    for j in 0..p {
        let mean = x.column(j).sum() / n as f64;
        let var = x.column(j).iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        if var <= 0.0 {
            let name = names.get(j).cloned().unwrap_or_else(|| format!("x{}", j + 1));
            return Err(Error::Ingestion(format!(
                "column {} ('{name}') has zero variance",
                j + 1
            )));
        }
        let scale = var.sqrt();
        for i in 0..n {
            out[(i, j)] = (x[(i, j)] - mean) / scale;
        }
        means.push(mean);
        scales.push(scale);
    }
    Ok((out, means, scales))
}

/// Standardize X and center y, recording the transform for back-mapping.
pub fn standardize(dataset: &Dataset) -> Result<Dataset> {
    let (x, x_mean, x_scale) = standardize_matrix(&dataset.x, &dataset.names)?;
    let y_mean = dataset.y.sum() / dataset.y.len() as f64;
    let y = dataset.y.map(|v| v - y_mean);
    Ok(Dataset {
        x,
        y,
        names: dataset.names.clone(),
        standardization: Some(Standardization { x_mean, x_scale, y_mean }),
        groups: dataset.groups.clone(),
    })
}

/// Feature-expansion transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    /// Append squared and cubed copies; the three columns form one group.
    Poly3,
    /// Replace a categorical column by one-hot indicators minus a reference
    /// level; the indicators form one group.
    Dummy,
}

/// One named expansion step.
#[derive(Debug, Clone)]
pub struct ExpansionStep {
    pub column: String,
    pub transform: Transform,
}

/// A comma-separated recipe, e.g. `poly3:age,dummy:race`.
#[derive(Debug, Clone, Default)]
pub struct ExpansionRecipe {
    pub steps: Vec<ExpansionStep>,
}

impl ExpansionRecipe {
    pub fn parse(spec: &str) -> Result<Self> {
        let mut steps = Vec::new();
        for part in spec.split(',').filter(|s| !s.trim().is_empty()) {
            let (kind, col) = part.split_once(':').ok_or_else(|| {
                Error::Recipe(format!("expansion step '{part}' is not of the form kind:column"))
            })?;
            let transform = match kind.trim().to_ascii_lowercase().as_str() {
                "poly3" => Transform::Poly3,
                "dummy" => Transform::Dummy,
                other => return Err(Error::Recipe(format!("unknown transform '{other}'"))),
            };
            steps.push(ExpansionStep { column: col.trim().to_string(), transform });
        }
        Ok(ExpansionRecipe { steps })
    }
}

/// Maximum number of distinct values a column may take to count as
/// categorical for dummy coding.
const MAX_DUMMY_LEVELS: usize = 12;

/// Apply an expansion recipe. Expanded columns are appended (dummy-coded
/// source columns are dropped) and each expansion is declared as one group.
pub fn expand_features(dataset: &Dataset, recipe: &ExpansionRecipe) -> Result<Dataset> {
    if dataset.standardization.is_some() {
        return Err(Error::Recipe("expand features before standardising".into()));
    }
    let n = dataset.x.nrows();
    let find = |name: &str| -> Result<usize> {
        dataset
            .names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Recipe(format!("no column named '{name}'")))
    };

    let mut dropped: Vec<usize> = Vec::new();
    for step in &recipe.steps {
        if step.transform == Transform::Dummy {
            dropped.push(find(&step.column)?);
        }
    }

    // Kept original columns in order, then appended expansion columns.
    let mut columns: Vec<DVector<f64>> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut new_index = vec![usize::MAX; dataset.x.ncols()];
    for j in 0..dataset.x.ncols() {
        if !dropped.contains(&j) {
            new_index[j] = columns.len();
            columns.push(dataset.x.column(j).into_owned());
            names.push(dataset.names[j].clone());
        }
    }

    let mut groups = dataset.groups.clone();
    for step in &recipe.steps {
        let j = find(&step.column)?;
        let source = dataset.x.column(j).into_owned();
        match step.transform {
            Transform::Poly3 => {
                let base = new_index[j];
                let mut members = vec![base];
                for power in [2u32, 3u32] {
                    members.push(columns.len());
                    columns.push(source.map(|v| v.powi(power as i32)));
                    names.push(format!("{}^{power}", step.column));
                }
                groups.push(FeatureGroup { name: step.column.clone(), columns: members });
            }
            Transform::Dummy => {
                let mut levels: Vec<f64> = source.iter().copied().collect();
                levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
                levels.dedup();
                if levels.len() < 2 {
                    return Err(Error::Recipe(format!(
                        "column '{}' is constant; cannot dummy-code",
                        step.column
                    )));
                }
                if levels.len() > MAX_DUMMY_LEVELS {
                    return Err(Error::Recipe(format!(
                        "column '{}' has {} distinct values; not categorical",
                        step.column,
                        levels.len()
                    )));
                }
                // First (smallest) level is the reference.
                let mut members = Vec::new();
                for &level in &levels[1..] {
                    members.push(columns.len());
                    columns.push(DVector::from_fn(n, |i, _| {
                        if source[i] == level {
                            1.0
                        } else {
                            0.0
                        }
                    }));
                    names.push(format!("{}={}", step.column, level));
                }
                groups.push(FeatureGroup { name: step.column.clone(), columns: members });
            }
        }
    }

    let p = columns.len();
    let x = DMatrix::from_fn(n, p, |i, j| columns[j][i]);
    Ok(Dataset { x, y: dataset.y.clone(), names, standardization: None, groups })
}

/// Single-level hierarchy from declared feature groups, with every remaining
/// column as a singleton group.
pub fn hierarchy_from_feature_groups(p: usize, groups: &[FeatureGroup]) -> Result<GroupHierarchy> {
    let mut member_lists: Vec<Vec<usize>> = groups.iter().map(|g| g.columns.clone()).collect();
    let mut covered = vec![false; p];
    for list in &member_lists {
        for &j in list {
            if j >= p {
                return Err(Error::Validation(format!(
                    "feature group references column {} but p = {p}",
                    j + 1
                )));
            }
            covered[j] = true;
        }
    }
    for j in 0..p {
        if !covered[j] {
            member_lists.push(vec![j]);
        }
    }
    GroupHierarchy::single_level(p, &member_lists)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn matrix_csv_basic() {
        let f = write_tmp("1,2\n3,4\n");
        let (x, names) = load_matrix_csv(f.path()).unwrap();
        assert_eq!(x, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(names, vec!["x1", "x2"]);
    }

    #[test]
    fn matrix_csv_header_captured() {
        let f = write_tmp("a,b\n1,2\n3,4\n");
        let (x, names) = load_matrix_csv(f.path()).unwrap();
        assert_eq!(names, vec!["a", "b"]);
        assert_eq!(x.nrows(), 2);
    }

    #[test]
    fn matrix_csv_bad_cell_names_line() {
        let f = write_tmp("1,2\n3,4\nx,6\n");
        let err = load_matrix_csv(f.path()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn matrix_csv_ragged_row_rejected() {
        let f = write_tmp("1,2\n3\n");
        let err = load_matrix_csv(f.path()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn response_csv_roundtrip() {
        let f = write_tmp("y\n1.5\n-2\n0\n");
        let y = load_response_csv(f.path()).unwrap();
        assert_eq!(y, DVector::from_vec(vec![1.5, -2.0, 0.0]));
    }

    #[test]
    fn group_spec_two_groups() {
        let f = write_tmp("level,group,column\n1,1,1\n1,1,2\n1,2,3\n");
        let h = load_group_spec(f.path(), 3).unwrap();
        assert_eq!(h.group_count(0), 2);
        assert_eq!(h.members(0, 0), &[0, 1]);
        assert_eq!(h.members(0, 1), &[2]);
    }

    #[test]
    fn group_spec_overlap_rejected() {
        let f = write_tmp("level,group,column\n1,1,2\n1,2,2\n");
        let err = load_group_spec(f.path(), 3).unwrap_err();
        match err {
            Error::Validation(msg) => {
                assert!(msg.contains("level 1"), "{msg}");
                assert!(msg.contains("column 2"), "{msg}");
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn group_spec_example1_layout() {
        let sizes = [5usize, 5, 10, 10, 15, 15];
        let mut spec = String::from("level,group,column\n");
        let mut col = 1;
        for (g, &s) in sizes.iter().enumerate() {
            for _ in 0..s {
                spec.push_str(&format!("1,g{},{col}\n", g + 1));
                col += 1;
            }
        }
        let f = write_tmp(&spec);
        let h = load_group_spec(f.path(), 60).unwrap();
        let got: Vec<usize> = (0..6).map(|g| h.group_size(0, g)).collect();
        assert_eq!(got, vec![5, 5, 10, 10, 15, 15]);
    }

    #[test]
    fn group_spec_roundtrip_via_writer() {
        let h = GroupHierarchy::new(4, &[vec![1, 1, 0, 2], vec![0, 1, 1, 1]]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        write_group_spec(f.path(), &h).unwrap();
        let back = load_group_spec(f.path(), 4).unwrap();
        assert_eq!(back, h);
    }

    fn toy_dataset() -> Dataset {
        let x = DMatrix::from_row_slice(
            4,
            2,
            &[10.0, 1.0, 12.0, 3.0, 14.0, 1.0, 16.0, 3.0],
        );
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0, 6.0]);
        Dataset::new(x, y, vec!["a".into(), "b".into()]).unwrap()
    }

    #[test]
    fn standardize_centers_and_scales() {
        let std = standardize(&toy_dataset()).unwrap();
        for j in 0..2 {
            let mean = std.x.column(j).sum() / 4.0;
            assert!(mean.abs() < 1e-12);
            let var = std.x.column(j).iter().map(|v| v * v).sum::<f64>() / 3.0;
            assert!((var - 1.0).abs() < 1e-12);
        }
        assert!(std.y.sum().abs() < 1e-12);
        // Column b has values 1,3,1,3: variance 4/3... check recorded scale.
        let rec = std.standardization.unwrap();
        assert!((rec.x_scale[1] - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn standardize_scale_divisor_is_sd() {
        // A column with sample variance 4 gets divisor 2.
        let x = DMatrix::from_column_slice(3, 1, &[0.0, 2.0, 4.0]);
        let y = DVector::zeros(3);
        let ds = Dataset::new(x, y, vec!["v".into()]).unwrap();
        let std = standardize(&ds).unwrap();
        assert!((std.standardization.unwrap().x_scale[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn standardize_rejects_constant_column() {
        let x = DMatrix::from_column_slice(3, 1, &[5.0, 5.0, 5.0]);
        let ds = Dataset::new(x, DVector::zeros(3), vec!["c".into()]).unwrap();
        let err = standardize(&ds).unwrap_err();
        match err {
            Error::Ingestion(msg) => assert!(msg.contains("'c'"), "{msg}"),
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn back_mapped_coefficients_reproduce_fit() {
        let ds = toy_dataset();
        let std = standardize(&ds).unwrap();
        let beta_std = DVector::from_vec(vec![0.7, -1.3]);
        let rec = std.standardization.as_ref().unwrap();
        let (beta_orig, intercept) = rec.original_scale(&beta_std);
        let fit_std = &std.x * &beta_std;
        let fit_orig = &ds.x * &beta_orig;
        for i in 0..4 {
            let lhs = fit_orig[i] + intercept;
            let rhs = fit_std[i] + rec.y_mean;
            assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn poly3_expansion_groups_three_columns() {
        let ds = toy_dataset();
        let recipe = ExpansionRecipe::parse("poly3:a").unwrap();
        let out = expand_features(&ds, &recipe).unwrap();
        assert_eq!(out.names, vec!["a", "b", "a^2", "a^3"]);
        assert_eq!(out.groups, vec![FeatureGroup { name: "a".into(), columns: vec![0, 2, 3] }]);
        for i in 0..4 {
            assert_eq!(out.x[(i, 2)], ds.x[(i, 0)] * ds.x[(i, 0)]);
            assert_eq!(out.x[(i, 3)], ds.x[(i, 0)].powi(3));
        }
    }

    #[test]
    fn dummy_expansion_drops_reference_level() {
        let x = DMatrix::from_column_slice(5, 1, &[1.0, 2.0, 3.0, 2.0, 1.0]);
        let ds = Dataset::new(x, DVector::zeros(5), vec!["race".into()]).unwrap();
        let out = expand_features(&ds, &ExpansionRecipe::parse("dummy:race").unwrap()).unwrap();
        // Three levels produce two indicator columns; the source is dropped.
        assert_eq!(out.names, vec!["race=2", "race=3"]);
        assert_eq!(out.x.ncols(), 2);
        assert_eq!(out.x.column(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(out.x.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(out.groups[0].columns, vec![0, 1]);
    }

    #[test]
    fn dummy_on_continuous_column_rejected() {
        let x = DMatrix::from_fn(20, 1, |i, _| i as f64 * 1.1);
        let ds = Dataset::new(x, DVector::zeros(20), vec!["v".into()]).unwrap();
        let err = expand_features(&ds, &ExpansionRecipe::parse("dummy:v").unwrap()).unwrap_err();
        assert!(matches!(err, Error::Recipe(_)));
    }

    #[test]
    fn poly3_on_constant_column_fails_downstream() {
        let x = DMatrix::from_column_slice(3, 1, &[2.0, 2.0, 2.0]);
        let ds = Dataset::new(x, DVector::zeros(3), vec!["c".into()]).unwrap();
        let out = expand_features(&ds, &ExpansionRecipe::parse("poly3:c").unwrap()).unwrap();
        assert!(standardize(&out).is_err());
    }

    #[test]
    fn hierarchy_from_feature_groups_adds_singletons() {
        let groups = vec![FeatureGroup { name: "g".into(), columns: vec![1, 2] }];
        let h = hierarchy_from_feature_groups(4, &groups).unwrap();
        assert_eq!(h.group_count(0), 3);
        assert_eq!(h.members(0, 0), &[1, 2]);
        assert_eq!(h.members(0, 1), &[0]);
        assert_eq!(h.members(0, 2), &[3]);
    }
}
