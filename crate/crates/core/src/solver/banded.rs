//! Banded Gaussian elimination with partial pivoting.
//!
//! The Newton systems of the plane solvers couple each interior node to its
//! four neighbours, so with row-major unknown ordering the Jacobian has lower
//! and upper bandwidth `nx − 2`. Row storage reserves `kl` extra
//! superdiagonals for the fill-in produced by row pivoting, the standard
//! banded-factorization layout.

use super::SolverError;

/// Pivots whose magnitude falls at or below this floor abort the elimination;
/// the matrix is numerically singular.
const PIVOT_FLOOR: f64 = 1e-300;

/// Square banded matrix with `kl` subdiagonals and `ku` superdiagonals.
///
/// Row `i` stores columns `i − kl ..= i + ku + kl` contiguously (the upper
/// window is widened by `kl` for pivoting fill-in). Entries outside the
/// logical band are zero and must stay untouched by callers.
pub(super) struct Banded {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl Banded {
    pub(super) fn new(n: usize, kl: usize, ku: usize) -> Banded {
        assert!(n > 0 && kl < n && ku < n, "degenerate band layout");
        let width = 2 * kl + ku + 1;
        Banded {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "out of band");
        i * self.width + (j + self.kl - i)
    }

    #[inline]
    pub(super) fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.slot(i, j)]
    }

    /// Factor in place and solve `A x = b` for a single right-hand side.
    pub(super) fn solve(mut self, mut rhs: Vec<f64>) -> Result<Vec<f64>, SolverError> {
        assert_eq!(rhs.len(), self.n, "rhs length mismatch");
        let n = self.n;
        let (kl, ku, width) = (self.kl, self.ku, self.width);

        for k in 0..n {
            let rmax = (k + kl).min(n - 1);
            let mut piv_row = k;
            let mut piv_abs = self.get(k, k).abs();
            for r in k + 1..=rmax {
                let a = self.get(r, k).abs();
                if a > piv_abs {
                    piv_abs = a;
                    piv_row = r;
                }
            }
            if !piv_abs.is_finite() || piv_abs <= PIVOT_FLOOR {
                return Err(SolverError::LinearSolveFailure {
                    step: k,
                    pivot: self.get(piv_row, k),
                });
            }
            let cmax = (k + kl + ku).min(n - 1);
            if piv_row != k {
                for j in k..=cmax {
                    let (a, b) = (self.slot(k, j), self.slot(piv_row, j));
                    self.data.swap(a, b);
                }
                rhs.swap(k, piv_row);
            }
            let piv = self.get(k, k);
            for r in k + 1..=rmax {
                let m = self.get(r, k) / piv;
                if m == 0.0 {
                    continue;
                }
                // Rows k and r are disjoint slices of the storage; update the
                // overlap of their column windows in one vectorizable pass.
                let (top, bottom) = self.data.split_at_mut(r * width);
                let row_k = &top[k * width..(k + 1) * width];
                let row_r = &mut bottom[..width];
                let len = cmax - k;
                let off_k = kl + 1;
                let off_r = k + 1 + kl - r;
                for t in 0..len {
                    row_r[off_r + t] -= m * row_k[off_k + t];
                }
                rhs[r] -= m * rhs[k];
            }
        }

        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let cmax = (i + kl + ku).min(n - 1);
            let mut s = rhs[i];
            for j in i + 1..=cmax {
                s -= self.get(i, j) * x[j];
            }
            x[i] = s / self.get(i, i);
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Dense Gaussian elimination with partial pivoting, as an oracle.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&r, &s| a[r][k].abs().total_cmp(&a[s][k].abs()))?;
            if a[p][k].abs() < 1e-30 {
                return None;
            }
            a.swap(k, p);
            b.swap(k, p);
            for r in k + 1..n {
                let m = a[r][k] / a[k][k];
                for j in k..n {
                    a[r][j] -= m * a[k][j];
                }
                b[r] -= m * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= a[i][j] * x[j];
            }
            x[i] = s / a[i][i];
        }
        Some(x)
    }

    fn banded_from_dense(a: &[Vec<f64>], kl: usize, ku: usize) -> Banded {
        let n = a.len();
        let mut m = Banded::new(n, kl, ku);
        for (i, row) in a.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    m.add(i, j, v);
                }
            }
        }
        m
    }

    #[test]
    fn tridiagonal_poisson_solve_is_exact_on_quadratic_data() {
        // -u'' = 2 with u(0) = u(1) = 0 discretized on n interior nodes has
        // the exact discrete solution u(x) = x(1 - x).
        let n = 31;
        let h = 1.0 / (n as f64 + 1.0);
        let mut a = Banded::new(n, 1, 1);
        let mut rhs = vec![2.0; n];
        for i in 0..n {
            a.add(i, i, 2.0 / (h * h));
            if i > 0 {
                a.add(i, i - 1, -1.0 / (h * h));
            }
            if i + 1 < n {
                a.add(i, i + 1, -1.0 / (h * h));
            }
        }
        let x = a.solve(std::mem::take(&mut rhs)).unwrap();
        for (i, &xi) in x.iter().enumerate() {
            let s = (i as f64 + 1.0) * h;
            assert!((xi - s * (1.0 - s)).abs() < 1e-12, "node {i}: {xi}");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] x = [2, 3] requires a row swap.
        let mut a = Banded::new(2, 1, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        let x = a.solve(vec![2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut a = Banded::new(3, 1, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, 1.0);
        // third row all zero
        let err = a.solve(vec![1.0, 1.0, 1.0]).unwrap_err();
        assert!(matches!(
            err,
            SolverError::LinearSolveFailure { step: 2, .. }
        ));
    }

    proptest! {
        #[test]
        fn matches_dense_elimination_on_random_banded_systems(
            n in 3usize..24,
            kl in 0usize..3,
            ku in 0usize..3,
            seed in 0u64..1000,
        ) {
            use rand::{Rng, SeedableRng};
            let kl = kl.min(n - 1);
            let ku = ku.min(n - 1);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut dense = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in 0..n {
                    if j + kl >= i && j <= i + ku {
                        dense[i][j] = rng.gen_range(-1.0..1.0);
                    }
                }
                // Diagonal dominance keeps both eliminations well away from
                // the singular regime, so the comparison is meaningful.
                dense[i][i] += 4.0;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let banded = banded_from_dense(&dense, kl, ku);
            let x = banded.solve(b.clone()).unwrap();
            let y = dense_solve(dense, b).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - y[i]).abs() < 1e-9, "component {i}: {} vs {}", x[i], y[i]);
            }
        }
    }
}
