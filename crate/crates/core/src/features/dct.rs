use std::f64::consts::PI;

/// Rows of the orthonormal DCT-II matrix for the first `n_out` coefficients.
#[derive(Debug, Clone)]
pub struct DctMatrix {
    n_in: usize,
    rows: Vec<f64>,
}

impl DctMatrix {
    /// Coefficients `first..first + count` of an `n_in`-point transform.
    pub fn new(n_in: usize, first: usize, count: usize) -> Self {
        let mut rows = Vec::with_capacity(n_in * count);
        for k in first..first + count {
            let alpha = if k == 0 {
                (1.0 / n_in as f64).sqrt()
            } else {
                (2.0 / n_in as f64).sqrt()
            };
            for n in 0..n_in {
                rows.push(alpha * (PI * k as f64 * (2 * n + 1) as f64 / (2 * n_in) as f64).cos());
            }
        }
        DctMatrix { n_in, rows }
    }

    pub fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        debug_assert_eq!(input.len(), self.n_in);
        for row in self.rows.chunks_exact(self.n_in) {
            out.push(row.iter().zip(input).map(|(a, b)| a * b).sum());
        }
    }
}

/// Full orthonormal DCT-II.
pub fn dct_ii_orthonormal(input: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(input.len());
    DctMatrix::new(input.len(), 0, input.len()).apply(input, &mut out);
    out
}
