//! Symmetric banded storage with an in-place Cholesky factorization.

/// Lower band of a symmetric matrix, stored row by row. Row `i` holds
/// columns `i - bandwidth ..= i`.
#[derive(Debug, Clone)]
pub struct SymBand {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl SymBand {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        SymBand {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        i * (self.bandwidth + 1) + (j + self.bandwidth - i)
    }

    /// Adds `v` to entry (i, j); the mirrored entry is implied.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        if i - j > self.bandwidth {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        let w = self.bandwidth;
        for i in 0..self.n {
            let j0 = i.saturating_sub(w);
            let row = &self.data[i * (w + 1)..(i + 1) * (w + 1)];
            let offset = j0 + w - i;
            let mut acc = 0.0;
            for (j, a) in (j0..=i).zip(&row[offset..]) {
                acc += a * x[j];
                if j != i {
                    y[j] += a * x[i];
                }
            }
            y[i] += acc;
        }
        y
    }

    /// Factors in place into the lower Cholesky factor L (A = L L^T).
    pub fn cholesky(mut self) -> Result<CholeskyBand, NotPositiveDefinite> {
        let w = self.bandwidth;
        let stride = w + 1;
        for i in 0..self.n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                // Overlap of rows i and j in columns k < j.
                let k0 = j0.max(j.saturating_sub(w));
                let len = j - k0;
                let ri = i * stride + (k0 + w - i);
                let rj = j * stride + (k0 + w - j);
                let dot: f64 = self.data[ri..ri + len]
                    .iter()
                    .zip(&self.data[rj..rj + len])
                    .map(|(a, b)| a * b)
                    .sum();
                let pos = i * stride + (j + w - i);
                let s = self.data[pos] - dot;
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(NotPositiveDefinite { row: i, pivot: s });
                    }
                    self.data[pos] = s.sqrt();
                } else {
                    let diag = self.data[j * stride + w];
                    self.data[pos] = s / diag;
                }
            }
        }
        Ok(CholeskyBand { factor: self })
    }
}

#[derive(Debug, Clone)]
pub struct CholeskyBand {
    factor: SymBand,
}

impl CholeskyBand {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let l = &self.factor;
        let w = l.bandwidth;
        let stride = w + 1;
        let n = l.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            let row = &l.data[i * stride + (j0 + w - i)..i * stride + w];
            let dot: f64 = row.iter().zip(&y[j0..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / l.data[i * stride + w];
        }
        for i in (0..n).rev() {
            y[i] /= l.data[i * stride + w];
            let yi = y[i];
            let j0 = i.saturating_sub(w);
            let row = &l.data[i * stride + (j0 + w - i)..i * stride + w];
            for (a, yj) in row.iter().zip(&mut y[j0..i]) {
                *yj -= a * yi;
            }
        }
        y
    }
}
