//! Banded matrices with an in-place LU factorisation (no pivoting).

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals, stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        i * self.width + j + self.kl - i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Overwrites the matrix with its LU factors (unit lower triangle implied).
    pub fn factor(&mut self) -> Result<()> {
        let n = self.n;
        for k in 0..n {
            let p = self.data[self.idx(k, k)];
            if p == 0.0 || !p.is_finite() {
                return Err(Error::SingularPivot(k));
            }
            let jmax = (k + self.ku).min(n - 1);
            for i in k + 1..=(k + self.kl).min(n - 1) {
                let ik = self.idx(i, k);
                let l = self.data[ik] / p;
                if l == 0.0 {
                    continue;
                }
                self.data[ik] = l;
                for j in k + 1..=jmax {
                    let kj = self.data[self.idx(k, j)];
                    let ij = self.idx(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    /// Solves with factors produced by [`BandMatrix::factor`].
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 1..n {
            let lo = i.saturating_sub(self.kl);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(i).skip(lo) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let hi = (i + self.ku).min(n - 1);
            let mut s = x[i];
            for (j, xj) in x.iter().enumerate().take(hi + 1).skip(i + 1) {
                s -= self.data[self.idx(i, j)] * xj;
            }
            x[i] = s / self.data[self.idx(i, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_small_banded_system() {
        let n = 7;
        let mut a = BandMatrix::zeros(n, 1, 2);
        for i in 0..n {
            a.add(i, i, 4.0 + i as f64);
            if i > 0 {
                a.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                a.add(i, i + 1, 0.5);
            }
            if i + 2 < n {
                a.add(i, i + 2, -0.25);
            }
        }
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = a.apply(&x);
        let mut lu = a.clone();
        lu.factor().unwrap();
        let mut y = b;
        lu.solve_in_place(&mut y);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn zero_pivot() {
        let mut a = BandMatrix::zeros(2, 1, 1);
        a.add(1, 1, 1.0);
        assert_eq!(a.factor(), Err(Error::SingularPivot(0)));
    }
}
