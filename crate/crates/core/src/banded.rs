//! Banded LU factorisation with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Rows are stored with room for the `lower` extra super-diagonals that row
/// interchanges can create during elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let width = 2 * lower + upper + 1;
        Self {
            n,
            lower,
            upper,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n || j + self.lower < i || j > i + self.upper + self.lower {
            None
        } else {
            Some(i * self.width + (j + self.lower - i))
        }
    }

    /// Entry (i, j); zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds to entry (i, j).
    ///
    /// # Panics
    /// If (i, j) lies outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        let within = i < self.n && j < self.n && j + self.lower >= i && j <= i + self.upper;
        assert!(within, "entry ({i}, {j}) outside band ({}, {})", self.lower, self.upper);
        let s = i * self.width + (j + self.lower - i);
        self.data[s] += value;
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Solves `A x = b` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        if rhs.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "banded matrix of order {n} with right-hand side of length {}",
                rhs.len()
            )));
        }
        let mut lu = self.clone();
        let mut x = rhs.to_vec();
        let reach = self.upper + self.lower;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        for k in 0..n {
            let last_row = (k + self.lower).min(n - 1);
            let last_col = (k + reach).min(n - 1);
            let (pivot_row, pivot) = (k..=last_row)
                .map(|i| (i, lu.get(i, k)))
                .fold((k, 0.0f64), |best, cand| if cand.1.abs() > best.1.abs() { cand } else { best });
            if pivot == 0.0 || pivot.abs() <= f64::EPSILON * f64::EPSILON * scale {
                return Err(Error::SingularMatrix { order: n, row: k });
            }
            if pivot_row != k {
                for j in k..=last_col {
                    let a = lu.slot(k, j).expect("pivot row slot");
                    let b = lu.slot(pivot_row, j).expect("candidate row slot");
                    lu.data.swap(a, b);
                }
                x.swap(k, pivot_row);
            }
            for i in k + 1..=last_row {
                let si = lu.slot(i, k).expect("sub-diagonal slot");
                let factor = lu.data[si] / pivot;
                if factor == 0.0 {
                    continue;
                }
                lu.data[si] = 0.0;
                for j in k + 1..=last_col {
                    let pk = lu.data[lu.slot(k, j).expect("pivot row slot")];
                    if pk != 0.0 {
                        let s = lu.slot(i, j).expect("fill-in slot");
                        lu.data[s] -= factor * pk;
                    }
                }
                x[i] -= factor * x[k];
            }
        }

        for i in (0..n).rev() {
            let last_col = (i + reach).min(n - 1);
            let mut acc = x[i];
            for j in i + 1..=last_col {
                acc -= lu.get(i, j) * x[j];
            }
            x[i] = acc / lu.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
    }

    #[test]
    fn solves_pentadiagonal_needing_pivots() {
        let n = 12;
        let mut a = BandedMatrix::zeros(n, 2, 2);
        for i in 0..n {
            for j in i.saturating_sub(2)..=(i + 2).min(n - 1) {
                // Small diagonal forces row interchanges.
                let v = if i == j { 1e-3 * (i + 1) as f64 } else { 1.0 + ((i * 7 + j * 3) % 5) as f64 };
                a.add(i, j, v);
            }
        }
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let b = dense_matvec(&a.to_dense(), &x_true);
        let x = a.solve(&b).unwrap();
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() < 1e-10, "{p} vs {q}");
        }
    }

    #[test]
    fn detects_singular_matrix() {
        let mut a = BandedMatrix::zeros(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(1, 1, 1.0);
        a.add(2, 2, 1.0);
        assert!(matches!(a.solve(&[1.0, 1.0, 1.0]), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    #[should_panic]
    fn rejects_entries_outside_band() {
        BandedMatrix::zeros(5, 1, 1).add(0, 3, 1.0);
    }
}
