//! Partition comparison: mutual information and its chance-adjusted form.
//!
//! All logarithms are natural; the adjusted score is unit-free.

use thiserror::Error;

use crate::netcore::Partition;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("partitions cover {0} and {1} elements")]
    SizeMismatch(usize, usize),
}

/// Overlap counts between two partitions of the same elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    rows: usize,
    cols: usize,
    counts: Vec<usize>,
    row_sums: Vec<usize>,
    col_sums: Vec<usize>,
    total: usize,
}

impl ContingencyTable {
    pub fn new(x: &Partition, y: &Partition) -> Result<Self, MetricsError> {
        if x.node_count() != y.node_count() {
            return Err(MetricsError::SizeMismatch(x.node_count(), y.node_count()));
        }
        let (rows, cols) = (x.module_count(), y.module_count());
        let mut counts = vec![0; rows * cols];
        for (&a, &b) in x.assignment().iter().zip(y.assignment()) {
            counts[a * cols + b] += 1;
        }
        Ok(Self::from_counts(rows, cols, counts))
    }

    /// Table from row-major `counts`.
    pub fn from_counts(rows: usize, cols: usize, counts: Vec<usize>) -> Self {
        assert_eq!(counts.len(), rows * cols, "counts must be rows x cols");
        let mut row_sums = vec![0; rows];
        let mut col_sums = vec![0; cols];
        for r in 0..rows {
            for c in 0..cols {
                row_sums[r] += counts[r * cols + c];
                col_sums[c] += counts[r * cols + c];
            }
        }
        let total = row_sums.iter().sum();
        ContingencyTable {
            rows,
            cols,
            counts,
            row_sums,
            col_sums,
            total,
        }
    }

    pub fn count(&self, row: usize, col: usize) -> usize {
        self.counts[row * self.cols + col]
    }

    pub fn row_sums(&self) -> &[usize] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[usize] {
        &self.col_sums
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0; self.counts.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                counts[c * self.rows + r] = self.count(r, c);
            }
        }
        Self::from_counts(self.cols, self.rows, counts)
    }
}

/// Order-independent sum, so swapping the two partitions gives bit-identical results.
fn sorted_sum<F: Scalar>(mut terms: Vec<F>) -> F {
    terms.sort_by(|a, b| a.partial_cmp(b).expect("finite terms"));
    terms.into_iter().fold(F::zero(), |acc, x| acc + x)
}

/// Entropy (nats) of a set of group sizes.
pub fn entropy_of_counts<F: Scalar>(sizes: &[usize]) -> F {
    let n = F::from_count(sizes.iter().sum());
    sorted_sum(
        sizes
            .iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = F::from_count(s) / n;
                -p * p.ln()
            })
            .collect(),
    )
}

/// Plug-in mutual information (nats) of the empirical joint distribution.
pub fn mutual_information<F: Scalar>(table: &ContingencyTable) -> F {
    let n = F::from_count(table.total);
    let mut terms = Vec::new();
    for r in 0..table.rows {
        for c in 0..table.cols {
            let count = table.count(r, c);
            if count == 0 {
                continue;
            }
            let count = F::from_count(count);
            let outer = F::from_count(table.row_sums[r]) * F::from_count(table.col_sums[c]);
            terms.push(count / n * (count * n / outer).ln());
        }
    }
    sorted_sum(terms)
}

/// `ln k!` for `k = 0..=n`.
fn log_factorials<F: Scalar>(n: usize) -> Vec<F> {
    let mut table = Vec::with_capacity(n + 1);
    let mut acc = F::zero();
    table.push(acc);
    for k in 1..=n {
        acc = acc + F::from_count(k).ln();
        table.push(acc);
    }
    table
}

/// Expected mutual information (nats) under the hypergeometric model of
/// random partitions with the table's marginals.
pub fn expected_mutual_information<F: Scalar>(table: &ContingencyTable) -> F {
    let n = table.total;
    let lf = log_factorials::<F>(n);
    let n_f = F::from_count(n);
    let mut terms = Vec::new();
    for &row in &table.row_sums {
        for &col in &table.col_sums {
            // ordered marginals make the float result independent of argument order
            let (a, b) = (row.min(col), row.max(col));
            let low = 1.max((a + b).saturating_sub(n));
            let high = a.min(b);
            let fixed = lf[a] + lf[b] + lf[n - a] + lf[n - b] - lf[n];
            let ab = F::from_count(a) * F::from_count(b);
            let mut cell = F::zero();
            for nij in low..=high {
                let nij_f = F::from_count(nij);
                let log_prob = fixed - lf[nij] - lf[a - nij] - lf[b - nij] - lf[n + nij - a - b];
                cell = cell + nij_f / n_f * (n_f * nij_f / ab).ln() * log_prob.exp();
            }
            terms.push(cell);
        }
    }
    sorted_sum(terms)
}

/// Adjusted mutual information normalized by the larger entropy.
///
/// When the normalizer vanishes (both partitions trivial) the score is 1 for
/// equal partitions and 0 otherwise.
pub fn ami<F: Scalar>(x: &Partition, y: &Partition) -> Result<F, MetricsError> {
    let table = ContingencyTable::new(x, y)?;
    let hx: F = entropy_of_counts(table.row_sums());
    let hy: F = entropy_of_counts(table.col_sums());
    let mi: F = mutual_information(&table);
    let emi: F = expected_mutual_information(&table);
    let denominator = hx.max(hy) - emi;
    if denominator.abs() <= F::epsilon() * F::lit(64.0) * (F::one() + hx.max(hy)) {
        return Ok(if x.same_as(y) { F::one() } else { F::zero() });
    }
    Ok((mi - emi) / denominator)
}

/// Mutual information normalized by the larger entropy, without chance correction.
pub fn nmi<F: Scalar>(x: &Partition, y: &Partition) -> Result<F, MetricsError> {
    let table = ContingencyTable::new(x, y)?;
    let h = entropy_of_counts::<F>(table.row_sums()).max(entropy_of_counts(table.col_sums()));
    if h == F::zero() {
        return Ok(if x.same_as(y) { F::one() } else { F::zero() });
    }
    Ok(mutual_information::<F>(&table) / h)
}
