//! Symmetric banded matrices and their Cholesky factorization.

/// Symmetric `n x n` matrix with half-bandwidth `w`; only the lower band is
/// stored, row by row.
#[derive(Debug, Clone)]
pub struct SymBanded {
    n: usize,
    w: usize,
    data: Vec<f64>,
}

impl SymBanded {
    pub fn zeros(n: usize, w: usize) -> Self {
        Self {
            n,
            w,
            data: vec![0.0; n * (w + 1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.w
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // requires j <= i, i - j <= w
        i * (self.w + 1) + (self.w + j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        if i - j > self.w {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// Adds `v` to entry `(i, j)` (and by symmetry `(j, i)`).
    ///
    /// # Panics
    /// If the entry lies outside the band.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        assert!(i - j <= self.w, "entry ({i}, {j}) outside band {}", self.w);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn add_diagonal(&mut self, i: usize, v: f64) {
        let k = self.idx(i, i);
        self.data[k] += v;
    }

    /// Replaces row and column `i` by the identity.
    pub fn isolate(&mut self, i: usize) {
        for j in i.saturating_sub(self.w)..i {
            let k = self.idx(i, j);
            self.data[k] = 0.0;
        }
        for r in i + 1..(i + self.w + 1).min(self.n) {
            let k = self.idx(r, i);
            self.data[k] = 0.0;
        }
        let k = self.idx(i, i);
        self.data[k] = 1.0;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for j in i.saturating_sub(self.w)..=i {
                let a = self.data[self.idx(i, j)];
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    /// In-place Cholesky factorization `A = L L^T`. Returns `None` when a
    /// pivot is not positive.
    pub fn cholesky(mut self) -> Option<BandedCholesky> {
        let (n, w) = (self.n, self.w);
        for i in 0..n {
            let j0 = i.saturating_sub(w);
            for j in j0..=i {
                let mut s = self.data[self.idx(i, j)];
                let k0 = j0.max(j.saturating_sub(w));
                for k in k0..j {
                    s -= self.data[self.idx(i, k)] * self.data[self.idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    let k = self.idx(i, i);
                    self.data[k] = s.sqrt();
                } else {
                    let k = self.idx(i, j);
                    self.data[k] = s / self.data[self.idx(j, j)];
                }
            }
        }
        Some(BandedCholesky { l: self })
    }
}

#[derive(Debug, Clone)]
pub struct BandedCholesky {
    l: SymBanded,
}

impl BandedCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, w) = (self.l.n, self.l.w);
        let l = &self.l;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(w)..i {
                s -= l.data[l.idx(i, k)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + w + 1).min(n) {
                s -= l.data[l.idx(k, i)] * y[k];
            }
            y[i] = s / l.data[l.idx(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn matches_dense_solve(n in 1usize..30, w in 0usize..6, seed in prop::collection::vec(-1.0f64..1.0, 200), rhs in prop::collection::vec(-5.0f64..5.0, 30)) {
            let mut a = SymBanded::zeros(n, w);
            let mut dense = DMatrix::<f64>::zeros(n, n);
            let mut it = seed.iter().cycle();
            for i in 0..n {
                for j in i.saturating_sub(w)..i {
                    let v = *it.next().unwrap();
                    a.add(i, j, v);
                    dense[(i, j)] += v;
                    dense[(j, i)] += v;
                }
                // diagonally dominant
                let d = 2.0 * w as f64 + 1.0 + it.next().unwrap().abs();
                a.add_diagonal(i, d);
                dense[(i, i)] += d;
            }
            let b = &rhs[..n];
            let y = a.mul_vec(b);
            let yd = &dense * DVector::from_column_slice(b);
            for i in 0..n {
                prop_assert!((y[i] - yd[i]).abs() < 1e-12);
            }
            let x = a.clone().cholesky().unwrap().solve(b);
            let xd = dense.cholesky().unwrap().solve(&DVector::from_column_slice(b));
            for i in 0..n {
                prop_assert!((x[i] - xd[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn isolate_and_indefinite() {
        let mut a = SymBanded::zeros(3, 1);
        a.add_diagonal(0, 2.0);
        a.add_diagonal(1, 2.0);
        a.add_diagonal(2, 2.0);
        a.add(1, 0, 1.0);
        a.add(2, 1, 1.0);
        a.isolate(1);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.get(1, 2), 0.0);
        assert_eq!(a.get(1, 1), 1.0);
        let mut bad = SymBanded::zeros(2, 1);
        bad.add_diagonal(0, 1.0);
        bad.add(1, 0, 2.0);
        bad.add_diagonal(1, 1.0);
        assert!(bad.cholesky().is_none());
    }
}
