//! Data sets: comma-separated ingestion, intercept columns, the synthetic
//! two-class "circle" data and seeded row shuffling.
//!
//! Files have a header row. The response column is either numeric or, when a
//! positive label is given, encoded as 1 for that label and 0 otherwise.
//! Numbers are written with Rust's shortest round-trip formatting, so a
//! written data set reloads to the identical `f64` values.

use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::optim::shuffle_indices;
use crate::rng::SeededRng;

/// Fisher's iris measurements, 150 rows, with R's column names
/// (`Sepal.Length`, `Sepal.Width`, `Petal.Length`, `Petal.Width`, `Species`).
pub const IRIS_CSV: &str = include_str!("../data/iris.csv");

pub const INTERCEPT_NAME: &str = "(Intercept)";

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vector,
    pub feature_names: Vec<String>,
    pub response_name: String,
    pub has_intercept: bool,
}

/// Which columns to read and how to encode the response.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schema {
    pub response: String,
    /// Empty means every column other than the response, in file order.
    pub features: Vec<String>,
    pub positive: Option<String>,
}

impl Schema {
    pub fn new(response: impl Into<String>, features: &[&str]) -> Self {
        Schema {
            response: response.into(),
            features: features.iter().map(|s| s.to_string()).collect(),
            positive: None,
        }
    }

    pub fn positive(mut self, label: impl Into<String>) -> Self {
        self.positive = Some(label.into());
        self
    }
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rows reordered by `order`.
    pub fn select(&self, order: &[usize]) -> Result<Dataset> {
        Ok(Dataset {
            x: self.x.select_rows(order),
            y: Vector::try_from_iter(order.iter().map(|&i| self.y[i]))?,
            ..self.clone()
        })
    }

    /// Header plus one line per row, response first, intercept omitted.
    pub fn to_csv_string(&self) -> String {
        let skip = usize::from(self.has_intercept);
        let mut out = String::new();
        out.push_str(&self.response_name);
        for name in &self.feature_names[skip..] {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.y[i].to_string());
            for v in &self.x.row(i)[skip..] {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn column_index(headers: &[String], name: &str) -> Result<usize> {
    headers.iter().position(|h| h == name).ok_or_else(|| Error::UnknownColumn {
        name: name.to_string(),
        available: headers.join(", "),
    })
}

/// Parses comma-separated text with a header row.
pub fn parse_delimited(text: &str, schema: &Schema) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let response = column_index(&headers, &schema.response)?;
    let features: Vec<usize> = if schema.features.is_empty() {
        (0..headers.len()).filter(|&j| j != response).collect()
    } else {
        schema
            .features
            .iter()
            .map(|f| column_index(&headers, f))
            .collect::<Result<_>>()?
    };
    if features.is_empty() {
        return Err(Error::InvalidShape("no feature columns".into()));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        // 1-based data row, counting the header as row 1
        let line = row + 2;
        for &j in &features {
            let cell = record.get(j).unwrap_or("");
            let v = cell.parse::<f64>().map_err(|_| Error::Parse {
                row: line,
                column: headers[j].clone(),
                cell: cell.to_string(),
            })?;
            data.push(v);
        }
        labels.push((line, record.get(response).unwrap_or("").to_string()));
    }
    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let y = match &schema.positive {
        Some(positive) => {
            if !labels.iter().any(|(_, l)| l == positive) {
                let mut observed: Vec<&str> = Vec::new();
                for (_, l) in &labels {
                    if !observed.contains(&l.as_str()) {
                        observed.push(l);
                    }
                }
                return Err(Error::UnknownLabel {
                    label: positive.clone(),
                    observed: observed.join(", "),
                });
            }
            labels.iter().map(|(_, l)| f64::from(u8::from(l == positive))).collect()
        }
        None => labels
            .iter()
            .map(|(line, l)| {
                l.parse::<f64>().map_err(|_| Error::Parse {
                    row: *line,
                    column: headers[response].clone(),
                    cell: l.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };

    Ok(Dataset {
        x: Matrix::new(labels.len(), features.len(), data)?,
        y: Vector::new(y)?,
        feature_names: features.iter().map(|&j| headers[j].clone()).collect(),
        response_name: headers[response].clone(),
        has_intercept: false,
    })
}

pub fn load_delimited(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_delimited(&text, schema)
}

pub fn write_delimited(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, ds.to_csv_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The bundled iris data under `schema`.
pub fn iris(schema: &Schema) -> Result<Dataset> {
    parse_delimited(IRIS_CSV, schema)
}

/// Prepends a column of ones.
pub fn add_intercept(ds: &Dataset) -> Result<Dataset> {
    if ds.has_intercept {
        return Err(Error::DoubleIntercept);
    }
    let cols = ds.x.cols() + 1;
    let mut data = Vec::with_capacity(ds.len() * cols);
    for i in 0..ds.len() {
        data.push(1.0);
        data.extend_from_slice(ds.x.row(i));
    }
    let mut names = vec![INTERCEPT_NAME.to_string()];
    names.extend(ds.feature_names.iter().cloned());
    Ok(Dataset {
        x: Matrix::new(ds.len(), cols, data)?,
        y: ds.y.clone(),
        feature_names: names,
        response_name: ds.response_name.clone(),
        has_intercept: true,
    })
}

/// Rows permuted by [`shuffle_indices`]`(n, seed)`.
pub fn shuffle_dataset(ds: &Dataset, seed: u64) -> Result<Dataset> {
    ds.select(&shuffle_indices(ds.len(), seed))
}

/// Radius of the positive-class acceptance region, `|x₁| + |x₂| < 5`.
pub const CIRCLE_INNER_L1: f64 = 5.0;
/// Bounds on the negative-class radius.
pub const CIRCLE_OUTER_RADIUS: (f64, f64) = (6.5, 10.5);

/// Two-class data separated by the square `|x₁| + |x₂| = 6`.
///
/// The positive class (label 1) is `N(0, 2²I)` rejected until
/// `|x₁| + |x₂| < 5`. The negative class (label 0) has a uniform angle and a
/// radius drawn from `N(8, 1)` rejected until it lies in `[6.5, 10.5]`; since
/// the Euclidean radius bounds the L1 norm from below, every negative point
/// has `|x₁| + |x₂| ≥ 6.5`. Rows are shuffled with the same generator.
pub fn gen_circle(n_per_class: usize, seed: u64) -> Result<Dataset> {
    if n_per_class == 0 {
        return Err(Error::InvalidConfig("n_per_class must be >= 1".into()));
    }
    let mut rng = SeededRng::new(seed);
    let mut rows: Vec<[f64; 3]> = Vec::with_capacity(2 * n_per_class);
    for _ in 0..n_per_class {
        loop {
            let (a, b) = (2.0 * rng.normal(), 2.0 * rng.normal());
            if a.abs() + b.abs() < CIRCLE_INNER_L1 {
                rows.push([1.0, a, b]);
                break;
            }
        }
    }
    for _ in 0..n_per_class {
        let r = loop {
            let r = 8.0 + rng.normal();
            if (CIRCLE_OUTER_RADIUS.0..=CIRCLE_OUTER_RADIUS.1).contains(&r) {
                break r;
            }
        };
        let angle = TAU * rng.uniform();
        rows.push([0.0, r * angle.cos(), r * angle.sin()]);
    }
    rng.shuffle(&mut rows);

    let n = rows.len();
    Ok(Dataset {
        x: Matrix::new(n, 2, rows.iter().flat_map(|r| [r[1], r[2]]).collect())?,
        y: Vector::try_from_iter(rows.iter().map(|r| r[0]))?,
        feature_names: vec!["x1".into(), "x2".into()],
        response_name: "label".into(),
        has_intercept: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{demo_network, mlp_accuracy};

    const SPECIES: &str = "Sepal.Length,Species\n5.1,setosa\n7.0,versicolor\n4.9,setosa\n";

    #[test]
    fn positive_label_encoding() {
        let ds = parse_delimited(SPECIES, &Schema::new("Species", &["Sepal.Length"]).positive("setosa")).unwrap();
        assert_eq!(ds.y.as_slice(), &[1.0, 0.0, 1.0]);
        assert_eq!(ds.x.as_slice(), &[5.1, 7.0, 4.9]);
    }

    #[test]
    fn unknown_positive_label_lists_observed() {
        let err = parse_delimited(SPECIES, &Schema::new("Species", &[]).positive("virginica")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("setosa, versicolor"), "{msg}");
    }

    #[test]
    fn circle_layout_uses_label_first() {
        let text = "label,x1,x2\n1,0.5,-0.5\n0,7,1\n";
        let ds = parse_delimited(text, &Schema::new("label", &[])).unwrap();
        assert_eq!(ds.feature_names, vec!["x1", "x2"]);
        assert_eq!(ds.y.as_slice(), &[1.0, 0.0]);
        assert_eq!(ds.x.row(1), &[7.0, 1.0]);
    }

    #[test]
    fn degenerate_inputs_are_errors() {
        assert!(matches!(parse_delimited("", &Schema::new("y", &[])), Err(Error::EmptyDataset)));
        assert!(matches!(parse_delimited("y,x\n", &Schema::new("y", &[])), Err(Error::EmptyDataset)));
        assert!(matches!(
            parse_delimited("y,x\n1,2\n", &Schema::new("z", &[])),
            Err(Error::UnknownColumn { .. })
        ));
        let err = parse_delimited("y,x\n1,2\n0,abc\n", &Schema::new("y", &["x"])).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 3, .. }), "{err}");
        assert!(load_delimited("/definitely/not/here.csv", &Schema::new("y", &[])).is_err());
    }

    #[test]
    fn intercept_column() {
        let ds = parse_delimited("y,x\n1,2\n3,4\n", &Schema::new("y", &["x"])).unwrap();
        let with = add_intercept(&ds).unwrap();
        assert_eq!(with.x.shape(), (2, 2));
        assert_eq!(with.x.column(0).as_slice(), &[1.0, 1.0]);
        assert_eq!(with.len(), ds.len());
        assert!(matches!(add_intercept(&with), Err(Error::DoubleIntercept)));
        assert_eq!(with.to_csv_string(), "y,x\n1,2\n3,4\n");
    }

    #[test]
    fn iris_is_bundled() {
        let ds = iris(&Schema::new("Petal.Length", &["Petal.Width"])).unwrap();
        assert_eq!(ds.len(), 150);
        let setosa = iris(&Schema::new("Species", &["Sepal.Length"]).positive("setosa")).unwrap();
        assert_eq!(setosa.y.iter().sum::<f64>(), 50.0);
    }

    #[test]
    fn circle_geometry_holds_row_by_row() {
        let ds = gen_circle(200, 5).unwrap();
        assert_eq!(ds.len(), 400);
        for i in 0..ds.len() {
            let (a, b) = (ds.x[(i, 0)], ds.x[(i, 1)]);
            let l1 = a.abs() + b.abs();
            assert!(a.abs() <= 11.0 && b.abs() <= 11.0);
            if ds.y[i] == 1.0 {
                assert!(l1 < 5.0);
            } else {
                let r = a.hypot(b);
                assert!((6.5..=10.5).contains(&r) && l1 >= 6.5);
            }
            // margin from the separating square |x1|+|x2| = 6
            assert!((l1 - 6.0).abs() >= 0.5);
        }
        assert_eq!(ds.y.iter().sum::<f64>(), 200.0);
    }

    #[test]
    fn circle_is_reproducible_and_demo_separates_it() {
        let a = gen_circle(75, 9).unwrap();
        assert_eq!(a.to_csv_string(), gen_circle(75, 9).unwrap().to_csv_string());
        assert_ne!(a.to_csv_string(), gen_circle(75, 10).unwrap().to_csv_string());
        assert!(a.to_csv_string().starts_with("label,x1,x2\n"));
        assert!(mlp_accuracy(&demo_network(), &a.x, &a.y).unwrap() >= 0.99);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let ds = gen_circle(20, 1).unwrap();
        let back = parse_delimited(&ds.to_csv_string(), &Schema::new("label", &[])).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn shuffle_keeps_pairs() {
        let ds = gen_circle(30, 2).unwrap();
        let sh = shuffle_dataset(&ds, 77).unwrap();
        let order = shuffle_indices(ds.len(), 77);
        for (j, &i) in order.iter().enumerate() {
            assert_eq!(sh.x.row(j), ds.x.row(i));
            assert_eq!(sh.y[j], ds.y[i]);
        }
        assert_eq!(sh, shuffle_dataset(&ds, 77).unwrap());

        let one = parse_delimited("y,x\n1,2\n", &Schema::new("y", &[])).unwrap();
        assert_eq!(shuffle_dataset(&one, 3).unwrap(), one);
    }
}
