//! Lawson–Hanson active-set nonnegative least squares,
//! `min ‖Aω - b‖₂` subject to `ω ≥ 0`.
//!
//! The QR factorization of the passive columns is updated in place: a
//! Householder step when a column enters, Givens sweeps when one leaves.
//! `Q` is kept explicitly (rows × rows), which is cheap at the moment-system
//! sizes used here and keeps both updates simple.

use rayon::prelude::*;

use super::MomentMatrix;
use crate::scalar::Real;

pub(crate) struct NnlsOutcome<T> {
    pub x: Vec<T>,
    /// `max_i |(Ax - b)_i|`.
    pub residual: T,
    pub iterations: usize,
}

struct Factor<T> {
    m: usize,
    /// Column-major `m × m`.
    q: Vec<T>,
    /// Passive columns of `R`, each of length `m` (zero below the diagonal).
    r: Vec<Vec<T>>,
    qb: Vec<T>,
}

impl<T: Real> Factor<T> {
    fn new(b: &[T]) -> Self {
        let m = b.len();
        let mut q = vec![T::zero(); m * m];
        for i in 0..m {
            q[i * m + i] = T::one();
        }
        Self { m, q, r: Vec::new(), qb: b.to_vec() }
    }

    fn qcol(&self, c: usize) -> &[T] {
        &self.q[c * self.m..(c + 1) * self.m]
    }

    /// Appends column `a`; `false` if it is numerically dependent on the
    /// current passive set.
    fn push(&mut self, a: &[T]) -> bool {
        let (m, p) = (self.m, self.r.len());
        if p >= m {
            return false;
        }
        let mut v: Vec<T> = (0..m).map(|c| dot(self.qcol(c), a)).collect();
        let sigma = v[p..].iter().map(|&x| x * x).sum::<T>().sqrt();
        let anorm = a.iter().map(|&x| x * x).sum::<T>().sqrt();
        if !(sigma > T::lit(1e-12) * anorm) {
            return false;
        }
        let alpha = if v[p] > T::zero() { -sigma } else { sigma };
        let mut u: Vec<T> = v[p..].to_vec();
        u[0] = u[0] - alpha;
        let un = u.iter().map(|&x| x * x).sum::<T>().sqrt();
        if un > T::zero() {
            for x in u.iter_mut() {
                *x = *x / un;
            }
            // Q ← Q H on columns p..m
            let mut y = vec![T::zero(); m];
            for (k, &uk) in u.iter().enumerate() {
                let col = &self.q[(p + k) * m..(p + k + 1) * m];
                for (yi, &qi) in y.iter_mut().zip(col) {
                    *yi = *yi + uk * qi;
                }
            }
            for (k, &uk) in u.iter().enumerate() {
                let two_u = uk + uk;
                let col = &mut self.q[(p + k) * m..(p + k + 1) * m];
                for (qi, &yi) in col.iter_mut().zip(&y) {
                    *qi = *qi - two_u * yi;
                }
            }
            let s = dot(&u, &self.qb[p..]);
            for (k, &uk) in u.iter().enumerate() {
                self.qb[p + k] = self.qb[p + k] - (s + s) * uk;
            }
        }
        v[p] = alpha;
        for x in v[p + 1..].iter_mut() {
            *x = T::zero();
        }
        self.r.push(v);
        true
    }

    /// Deletes passive column `pos` and restores triangular form.
    fn remove(&mut self, pos: usize) {
        self.r.remove(pos);
        let m = self.m;
        for i in pos..self.r.len() {
            let (a, b) = (self.r[i][i], self.r[i][i + 1]);
            let h = a.hypot(b);
            if h == T::zero() {
                continue;
            }
            let (c, s) = (a / h, b / h);
            for col in self.r[i..].iter_mut() {
                let (x, y) = (col[i], col[i + 1]);
                col[i] = c * x + s * y;
                col[i + 1] = c * y - s * x;
            }
            self.r[i][i + 1] = T::zero();
            let (x, y) = (self.qb[i], self.qb[i + 1]);
            self.qb[i] = c * x + s * y;
            self.qb[i + 1] = c * y - s * x;
            let (left, right) = self.q.split_at_mut((i + 1) * m);
            let qi = &mut left[i * m..];
            let qj = &mut right[..m];
            for (x, y) in qi.iter_mut().zip(qj.iter_mut()) {
                let (u, v) = (*x, *y);
                *x = c * u + s * v;
                *y = c * v - s * u;
            }
        }
    }

    /// Least squares solution on the passive set.
    fn solve(&self) -> Vec<T> {
        let p = self.r.len();
        let mut z = vec![T::zero(); p];
        for i in (0..p).rev() {
            let mut acc = self.qb[i];
            for j in i + 1..p {
                acc = acc - self.r[j][i] * z[j];
            }
            z[i] = acc / self.r[i][i];
        }
        z
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Runs until `max |Ax - b| ≤ stop`, the optimality conditions hold, or
/// `max_iter` columns have entered.
pub(crate) fn nnls<T: Real>(a: &MomentMatrix<T>, b: &[T], stop: T, max_iter: usize) -> NnlsOutcome<T> {
    let (m, n) = (a.rows(), a.cols());
    let norms: Vec<T> = (0..n).map(|j| dot(a.column(j), a.column(j)).sqrt()).collect();
    let mut f = Factor::new(b);
    let mut passive: Vec<usize> = Vec::new();
    let mut in_p = vec![false; n];
    let mut blocked = vec![false; n];
    let mut x = vec![T::zero(); n];
    let mut iterations = 0;
    let mut resid = b.to_vec();

    loop {
        // r = b - A x over the passive support
        resid.copy_from_slice(b);
        for &j in &passive {
            for (ri, &aij) in resid.iter_mut().zip(a.column(j)) {
                *ri = *ri - aij * x[j];
            }
        }
        let rmax = resid.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        if rmax <= stop || iterations >= max_iter || passive.len() >= m {
            return NnlsOutcome { x, residual: rmax, iterations };
        }
        let rnorm = dot(&resid, &resid).sqrt();
        let best = (0..n)
            .into_par_iter()
            .filter(|&j| !in_p[j] && !blocked[j] && norms[j] > T::zero())
            .map(|j| (j, dot(a.column(j), &resid) / norms[j]))
            .filter(|&(_, w)| w > T::lit(1e-13) * rnorm)
            .reduce_with(|l, r| if r.1 > l.1 || (r.1 == l.1 && r.0 < l.0) { r } else { l });
        let Some((j, _)) = best else {
            return NnlsOutcome { x, residual: rmax, iterations };
        };
        iterations += 1;
        if !f.push(a.column(j)) {
            blocked[j] = true;
            continue;
        }
        passive.push(j);
        in_p[j] = true;

        let mut first = true;
        loop {
            let z = f.solve();
            if first && !(z[z.len() - 1] > T::zero()) {
                // rounding defeated the entering column; leave x as it was
                f.remove(passive.len() - 1);
                in_p[j] = false;
                passive.pop();
                blocked[j] = true;
                break;
            }
            first = false;
            if z.iter().all(|&v| v > T::zero()) {
                for (&k, &v) in passive.iter().zip(&z) {
                    x[k] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            let mut alpha = T::infinity();
            for (&k, &v) in passive.iter().zip(&z) {
                if v <= T::zero() {
                    alpha = alpha.min(x[k] / (x[k] - v));
                }
            }
            for (&k, &v) in passive.iter().zip(&z) {
                x[k] = x[k] + alpha * (v - x[k]);
            }
            // drop every passive index that reached zero, last first
            for pos in (0..passive.len()).rev() {
                let k = passive[pos];
                let hit = z[pos] <= T::zero() && x[k] <= T::lit(1e-15) * x.iter().fold(T::zero(), |a, &v| a.max(v));
                if x[k] <= T::zero() || hit {
                    x[k] = T::zero();
                    in_p[k] = false;
                    passive.remove(pos);
                    f.remove(pos);
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
            if passive.is_empty() {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: usize, cols: &[Vec<f64>]) -> MomentMatrix<f64> {
        MomentMatrix::from_columns(rows, cols.iter().flatten().copied().collect())
    }

    #[test]
    fn solves_a_feasible_system_exactly() {
        // b is a positive combination of columns 1 and 3
        let cols = vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![-1.0, 2.0, 0.5],
        ];
        let a = mat(3, &cols);
        let b = [1.0 * 0.3 + 0.7, 0.3 + 0.7, 0.7];
        let out = nnls(&a, &b, 0.0, 100);
        assert!(out.residual < 1e-14, "{}", out.residual);
        assert!(out.x.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn infeasible_targets_give_the_projection() {
        // the cone of e1, e2 cannot reach (-1, 1); the best point is (0, 1)
        let a = mat(2, &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let out = nnls(&a, &[-1.0, 1.0], 0.0, 100);
        assert_eq!(out.x[0], 0.0);
        assert!((out.x[1] - 1.0).abs() < 1e-15);
        assert!((out.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn givens_removal_keeps_the_factorization() {
        let cols: Vec<Vec<f64>> = (0..4)
            .map(|j| (0..6).map(|i| ((i * 7 + j * 3) % 5) as f64 + 0.1 * (i + j) as f64).collect())
            .collect();
        let b: Vec<f64> = (0..6).map(|i| i as f64 - 2.0).collect();
        let mut f = Factor::new(&b);
        for c in &cols {
            assert!(f.push(c));
        }
        f.remove(1);
        // Q R reproduces the surviving columns 0, 2, 3
        for (pos, orig) in [0usize, 2, 3].iter().enumerate() {
            for i in 0..6 {
                let v: f64 = (0..6).map(|k| f.q[k * 6 + i] * f.r[pos][k]).sum();
                assert!((v - cols[*orig][i]).abs() < 1e-12);
            }
        }
        // Qᵀ b stays consistent
        for k in 0..6 {
            let v: f64 = (0..6).map(|i| f.q[k * 6 + i] * b[i]).sum();
            assert!((v - f.qb[k]).abs() < 1e-12);
        }
    }
}
