use crate::error::{invalid, Result};

/// Row-stochastic relaxation variable `F` (n x k, row-major).
///
/// Rows are vertices, columns are clusters. Each row lies on the simplex
/// up to a small tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    n: usize,
    k: usize,
    data: Vec<f64>,
}

/// Tolerance on `|sum_l F_il - 1|` and on negative entries.
pub const SIMPLEX_TOL: f64 = 1e-6;

impl Embedding {
    pub fn new(n: usize, k: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * k {
            return invalid(format!("embedding data has {} entries, expected {}", data.len(), n * k));
        }
        let e = Self { n, k, data };
        if let Some(i) = (0..n).find(|&i| {
            let row = e.row(i);
            row.iter().any(|&x| !x.is_finite() || x < -SIMPLEX_TOL) || (row.iter().sum::<f64>() - 1.0).abs() > SIMPLEX_TOL
        }) {
            return invalid(format!("row {i} of the embedding is not on the simplex"));
        }
        Ok(e)
    }

    pub(crate) fn from_raw(n: usize, k: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * k);
        Self { n, k, data }
    }

    /// Indicator matrix of an assignment.
    pub fn from_assignment(assignment: &[usize], k: usize) -> Result<Self> {
        let n = assignment.len();
        let mut data = vec![0.0; n * k];
        for (i, &c) in assignment.iter().enumerate() {
            if c >= k {
                return invalid(format!("vertex {i} assigned to cluster {c} >= k = {k}"));
            }
            data[i * k + c] = 1.0;
        }
        Ok(Self { n, k, data })
    }

    /// Builds an embedding from its columns.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let k = columns.len();
        if k == 0 {
            return invalid("embedding needs at least one column");
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return invalid("columns have different lengths");
        }
        let mut data = vec![0.0; n * k];
        for (l, col) in columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                data[i * k + l] = x;
            }
        }
        Self::new(n, k, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: usize, l: usize) -> f64 {
        self.data[i * self.k + l]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn column(&self, l: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.k + l]).collect()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Pins row `i` to the unit vector `e_l`.
    pub fn set_label(&mut self, i: usize, l: usize) {
        let k = self.k;
        let row = self.row_mut(i);
        row.fill(0.0);
        row[l] = 1.0;
        debug_assert!(l < k);
    }

    /// Largest `|sum_l F_il - 1|` over rows.
    pub fn simplex_error(&self) -> f64 {
        (0..self.n)
            .map(|i| (self.row(i).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Projects negatives to zero and rescales each row to sum to one.
    /// Rows that vanish entirely become uniform.
    pub(crate) fn normalize_rows(&mut self) {
        let k = self.k;
        for i in 0..self.n {
            let row = self.row_mut(i);
            for x in row.iter_mut() {
                if *x < 0.0 {
                    *x = 0.0;
                }
            }
            let s: f64 = row.iter().sum();
            if s > 0.0 {
                row.iter_mut().for_each(|x| *x /= s);
            } else {
                row.fill(1.0 / k as f64);
            }
        }
    }

    /// Largest entrywise distance to the indicator matrix of the row argmax.
    pub fn distance_to_indicator(&self) -> f64 {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let arg = row.iter().position(|&x| x == best).unwrap_or(0);
                row.iter()
                    .enumerate()
                    .map(|(l, &x)| if l == arg { (1.0 - x).abs() } else { x.abs() })
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Convex combination `(1 - t) self + t other`.
    pub(crate) fn blend(&self, other: &Embedding, t: f64) -> Embedding {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        Embedding::from_raw(self.n, self.k, data)
    }
}
