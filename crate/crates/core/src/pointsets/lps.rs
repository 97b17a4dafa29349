//! Orbits of the free group generated by the rational rotations with
//! `cos = -3/5`, `sin = 4/5` about the three coordinate axes.
//!
//! Word matrices are multiplied exactly over `Q` and applied to the base
//! point once, so orbit points do not depend on floating point
//! accumulation order.

use std::collections::HashMap;

use num_rational::Ratio;

use crate::error::{invalid, Error, Result};
use crate::manifold::Point;
use crate::scalar::Real;

type Q = Ratio<i64>;
type Mat = [[Q; 3]; 3];

/// Words longer than this overflow 64-bit denominators (`5^n`).
const MAX_WORD_LENGTH: usize = 12;
/// Largest orbit materialized.
const MAX_ORBIT: usize = 20_000_000;

/// The six generators in index order: `R_x, R_x^{-1}, R_y, R_y^{-1}, R_z,
/// R_z^{-1}`. Generator `2a+1` is the inverse of `2a`.
pub fn lps_generators() -> [[[Q; 3]; 3]; 6] {
    let z = Q::from_integer(0);
    let one = Q::from_integer(1);
    let c = Q::new(-3, 5);
    let s = Q::new(4, 5);
    let rot = |axis: usize, s: Q| -> Mat {
        let mut m = [[z; 3]; 3];
        let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
        m[axis][axis] = one;
        m[i][i] = c;
        m[j][j] = c;
        m[i][j] = -s;
        m[j][i] = s;
        m
    };
    [rot(0, s), rot(0, -s), rot(1, s), rot(1, -s), rot(2, s), rot(2, -s)]
}

/// `1 + (3/2)(5^n - 1)`: the number of reduced words of length `≤ n`.
pub fn lps_orbit_size(n: usize) -> usize {
    1 + 3 * (5usize.pow(n as u32) - 1) / 2
}

/// All reduced words of length `≤ n`, breadth first by length and
/// lexicographic by generator index within a length.
pub fn lps_words(n: usize) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = vec![Vec::new()];
    let mut level_start = 0;
    for _ in 0..n {
        let level_end = out.len();
        for w in level_start..level_end {
            for g in 0..6u8 {
                if let Some(&last) = out[w].last() {
                    if last ^ 1 == g {
                        continue;
                    }
                }
                let mut next = out[w].clone();
                next.push(g);
                out.push(next);
            }
        }
        level_start = level_end;
    }
    out
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let z = Q::from_integer(0);
    let mut m = [[z; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = z;
            for k in 0..3 {
                acc += a[i][k] * b[k][j];
            }
            m[i][j] = acc;
        }
    }
    m
}

fn to_real<T: Real>(q: &Q) -> T {
    T::lit(*q.numer() as f64) / T::lit(*q.denom() as f64)
}

/// Orbit points `M_w x` for every reduced word `w` of length `≤ n`, in
/// [`lps_words`] order. The matrix of `w = g_1 ... g_k` is `G_{g_1} ... G_{g_k}`.
pub(crate) fn orbit<T: Real>(base: &Point<T>, n: usize) -> Result<Vec<Point<T>>> {
    if n > MAX_WORD_LENGTH || lps_orbit_size(n) > MAX_ORBIT {
        return Err(Error::Resource {
            what: format!("orbit of word length {n} (at most {MAX_WORD_LENGTH} supported)"),
            achieved: f64::INFINITY,
        });
    }
    // the generators fix exactly ±e_x, ±e_y, ±e_z
    for axis in 0..3 {
        let off: T = (0..3).filter(|&i| i != axis).map(|i| base.c[i] * base.c[i]).sum();
        if off.sqrt() < T::lit(1e-9) {
            return invalid("base point is fixed by a generator, so the orbit is not free");
        }
    }
    let gens = lps_generators();
    // matrices level by level, extending on the right to keep word order
    let one = Q::from_integer(1);
    let z = Q::from_integer(0);
    let id: Mat = [[one, z, z], [z, one, z], [z, z, one]];
    let mut mats: Vec<(Mat, Option<u8>)> = vec![(id, None)];
    let mut level_start = 0;
    for _ in 0..n {
        let level_end = mats.len();
        for w in level_start..level_end {
            let (m, last) = mats[w];
            for g in 0..6u8 {
                if last.is_some_and(|l| l ^ 1 == g) {
                    continue;
                }
                mats.push((mul(&m, &gens[g as usize]), Some(g)));
            }
        }
        level_start = level_end;
    }
    let pts: Vec<Point<T>> = mats
        .iter()
        .map(|(m, _)| {
            let mut c = [T::zero(); 3];
            for i in 0..3 {
                for j in 0..3 {
                    c[i] = c[i] + to_real::<T>(&m[i][j]) * base.c[j];
                }
            }
            let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
            Point { c: [c[0] / norm, c[1] / norm, c[2] / norm] }
        })
        .collect();
    if let Some((i, j)) = first_collision(&pts) {
        return invalid(format!(
            "orbit is not free at this base point: words {i} and {j} give the same point"
        ));
    }
    Ok(pts)
}

/// Some base points are sent onto a rotation axis by a shorter word, and
/// the orbit then repeats. Finds such a repeat with a grid hash.
fn first_collision<T: Real>(pts: &[Point<T>]) -> Option<(usize, usize)> {
    const CELL: f64 = 1e-6;
    const EPS: f64 = 1e-9;
    let key = |p: &Point<T>| p.c.map(|v| (v.f64() / CELL).floor() as i64);
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::with_capacity(pts.len());
    for (j, p) in pts.iter().enumerate() {
        let k = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) else { continue };
                    for &i in bucket {
                        let d2: f64 = (0..3).map(|a| (pts[i].c[a] - p.c[a]).f64().powi(2)).sum();
                        if d2 < EPS * EPS {
                            return Some((i, j));
                        }
                    }
                }
            }
        }
        grid.entry(k).or_default().push(j);
    }
    None
}
