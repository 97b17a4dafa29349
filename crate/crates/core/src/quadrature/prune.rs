//! Support reduction by null-space walks: while more atoms than moment
//! rows + 1 carry weight, move along a direction `v` with `Φv = 0` and
//! `Σ v = 0` until a weight reaches zero.

use super::MomentMatrix;
use crate::error::{invalid, Result};
use crate::manifold::Point;
use crate::scalar::Real;

/// Output of [`caratheodory_prune`].
#[derive(Debug, Clone, PartialEq)]
pub struct Pruned<T> {
    pub nodes: Vec<Point<T>>,
    pub weights: Vec<T>,
    /// Input indices of the surviving atoms, increasing.
    pub kept: Vec<usize>,
    /// Set when a walk step had no numerically safe direction and the
    /// current support was returned early.
    pub degenerate: bool,
    pub steps: usize,
}

/// Reduces the support of a nonnegative moment-matching measure to at most
/// `rows + 1` atoms, keeping `Φω` within `tol` (plus rounding) of its input
/// value. Among the two walk directions the one zeroing the smaller index
/// is taken.
pub fn caratheodory_prune<T: Real>(
    nodes: &[Point<T>],
    weights: &[T],
    phi: &MomentMatrix<T>,
    tol: T,
) -> Result<Pruned<T>> {
    if nodes.len() != weights.len() || phi.cols() != nodes.len() {
        return invalid(format!(
            "{} nodes, {} weights and {} moment columns",
            nodes.len(),
            weights.len(),
            phi.cols()
        ));
    }
    if weights.iter().any(|w| !(*w >= T::zero())) {
        return invalid("weights must be nonnegative");
    }
    if !(tol > T::zero()) {
        return invalid("tolerance must be positive");
    }
    let rows = phi.rows();
    let limit = rows + 1;
    let start = phi.apply_subset(&(0..nodes.len()).collect::<Vec<_>>(), weights);
    let mut kept: Vec<usize> = (0..nodes.len()).filter(|&j| weights[j] > T::zero()).collect();
    let mut w: Vec<T> = weights.to_vec();
    let mut degenerate = false;
    let mut steps = 0;
    let slack = T::lit(10.0) * T::epsilon();

    while kept.len() > limit {
        // a null vector of the augmented matrix on the first limit+1 atoms
        let sub = &kept[..limit + 1];
        let cols: Vec<Vec<T>> = sub
            .iter()
            .map(|&j| {
                let mut c = phi.column(j).to_vec();
                c.push(T::one());
                c
            })
            .collect();
        let Some(v) = null_vector(&cols) else {
            degenerate = true;
            break;
        };
        let step_to = |sign: T| -> Option<(usize, T)> {
            let mut best: Option<(usize, T)> = None;
            for (pos, &vi) in v.iter().enumerate() {
                let vi = sign * vi;
                if vi > T::zero() {
                    let t = w[sub[pos]] / vi;
                    if best.is_none_or(|(_, bt)| t < bt) {
                        best = Some((pos, t));
                    }
                }
            }
            best
        };
        let (plus, minus) = (step_to(T::one()), step_to(-T::one()));
        let (sign, pos, t) = match (plus, minus) {
            (Some((p, tp)), Some((q, tq))) => {
                if sub[p] <= sub[q] {
                    (T::one(), p, tp)
                } else {
                    (-T::one(), q, tq)
                }
            }
            (Some((p, tp)), None) => (T::one(), p, tp),
            (None, Some((q, tq))) => (-T::one(), q, tq),
            (None, None) => {
                degenerate = true;
                break;
            }
        };
        let saved = w.clone();
        for (k, &vi) in v.iter().enumerate() {
            let j = sub[k];
            w[j] = (w[j] - t * sign * vi).max(T::zero());
        }
        w[sub[pos]] = T::zero();
        let now: Vec<usize> = kept.iter().copied().filter(|&j| w[j] > T::zero()).collect();
        let moved = phi.apply_subset(&now, &w);
        let drift = moved.iter().zip(&start).fold(T::zero(), |a, (&x, &y)| a.max((x - y).abs()));
        if drift > tol + slack * T::from_usize_(steps + 1) {
            w = saved;
            degenerate = true;
            break;
        }
        kept = now;
        steps += 1;
    }
    Ok(Pruned {
        nodes: kept.iter().map(|&j| nodes[j]).collect(),
        weights: kept.iter().map(|&j| w[j]).collect(),
        kept,
        degenerate,
        steps,
    })
}

/// Unit vector `v` with `Σ_j v_j cols[j] ≈ 0`, from a Householder QR with
/// column pivoting. `None` when the columns are numerically independent.
pub(crate) fn null_vector<T: Real>(cols: &[Vec<T>]) -> Option<Vec<T>> {
    let p = cols.len();
    let m = cols.first().map_or(0, |c| c.len());
    let mut a: Vec<Vec<T>> = cols.to_vec();
    let mut perm: Vec<usize> = (0..p).collect();
    let norm = |c: &[T], from: usize| c[from..].iter().map(|&x| x * x).sum::<T>();
    let scale = a.iter().map(|c| norm(c, 0)).fold(T::zero(), T::max).sqrt();
    if scale == T::zero() {
        let mut v = vec![T::zero(); p];
        v[0] = T::one();
        return Some(v);
    }
    let cut = T::lit(1e-12) * scale;
    let mut rank = 0;
    for k in 0..p.min(m) {
        let (best, bn) = (k..p)
            .map(|j| (j, norm(&a[j], k)))
            .fold((k, -T::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
        if bn.sqrt() <= cut {
            break;
        }
        a.swap(k, best);
        perm.swap(k, best);
        let sigma = bn.sqrt();
        let alpha = if a[k][k] > T::zero() { -sigma } else { sigma };
        let mut u: Vec<T> = a[k][k..].to_vec();
        u[0] = u[0] - alpha;
        let un2 = u.iter().map(|&x| x * x).sum::<T>();
        for col in a[k + 1..].iter_mut() {
            let s = col[k..].iter().zip(&u).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
            let f = (s + s) / un2;
            for (x, &y) in col[k..].iter_mut().zip(&u) {
                *x = *x - f * y;
            }
        }
        a[k][k] = alpha;
        for x in a[k][k + 1..].iter_mut() {
            *x = T::zero();
        }
        rank = k + 1;
    }
    if rank == p {
        return None;
    }
    // free variable: pivoted column `rank` set to 1, later free ones to 0
    let mut y = vec![T::zero(); p];
    y[rank] = T::one();
    for i in (0..rank).rev() {
        let mut acc = -a[rank][i];
        for j in i + 1..rank {
            acc = acc - a[j][i] * y[j];
        }
        y[i] = acc / a[i][i];
    }
    let n = y.iter().map(|&x| x * x).sum::<T>().sqrt();
    let mut v = vec![T::zero(); p];
    for (k, &orig) in perm.iter().enumerate() {
        v[orig] = y[k] / n;
    }
    Some(v)
}
