use crate::error::{Error, Result};
use crate::manifold::{ManifoldKind, ManifoldSpec, Point};
use crate::scalar::Real;

/// Default cap on the number of basis functions in a slice.
pub const DEFAULT_BASIS_BUDGET: usize = 4_000_000;

/// How the eigenfunctions of one eigenvalue are indexed.
#[derive(Debug, Clone, PartialEq)]
pub enum ShellIndex {
    /// Torus: half-lattice representatives `k` (first nonzero coordinate
    /// positive), each contributing a `cos` and a `sin` basis function.
    /// The zero shell holds the single vector `0`.
    Lattice(Vec<[i64; 3]>),
    /// Sphere: spherical harmonic degree.
    Degree(usize),
}

/// One eigenvalue with its eigenspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell<T> {
    /// Square root `λ` of the Laplace eigenvalue.
    pub lambda: T,
    pub multiplicity: usize,
    pub index: ShellIndex,
}

/// All eigenvalues `λ² < r²` with multiplicities, in nondecreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSlice<T> {
    pub manifold: ManifoldSpec,
    pub cutoff: T,
    pub shells: Vec<Shell<T>>,
    pub basis_size: usize,
}

impl<T: Real> SpectrumSlice<T> {
    /// `λ` for every basis function, in basis order.
    pub fn basis_lambdas(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.basis_size);
        for s in &self.shells {
            out.extend(std::iter::repeat_n(s.lambda, s.multiplicity));
        }
        out
    }

    /// Largest sphere degree in the slice (sphere only).
    pub fn max_degree(&self) -> Option<usize> {
        self.shells.iter().rev().find_map(|s| match s.index {
            ShellIndex::Degree(n) => Some(n),
            _ => None,
        })
    }
}

/// Enumerates the spectrum below `r` with the default basis budget.
pub fn spectrum_below<T: Real>(m: &ManifoldSpec, r: T) -> Result<SpectrumSlice<T>> {
    spectrum_below_with_budget(m, r, DEFAULT_BASIS_BUDGET)
}

pub fn spectrum_below_with_budget<T: Real>(
    m: &ManifoldSpec,
    r: T,
    budget: usize,
) -> Result<SpectrumSlice<T>> {
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("cutoff must be positive, got {r}")));
    }
    let r2 = r.f64() * r.f64();
    // estimated size check before enumerating
    let est = match m.kind {
        ManifoldKind::Torus => {
            let rad = r.f64() / std::f64::consts::TAU;
            let vol = match m.dim {
                1 => 2.0 * rad,
                2 => std::f64::consts::PI * rad * rad,
                _ => 4.0 / 3.0 * std::f64::consts::PI * rad.powi(3),
            };
            vol + 1.0
        }
        ManifoldKind::Sphere => r2 + 1.0,
    };
    if est > 1.5 * budget as f64 + 16.0 {
        return Err(Error::Resource {
            what: format!("spectral slice below r = {r} exceeds basis budget {budget}"),
            achieved: est,
        });
    }
    let slice = match m.kind {
        ManifoldKind::Torus => torus_slice(m, r, r2),
        ManifoldKind::Sphere => sphere_slice(m, r, r2),
    };
    if slice.basis_size > budget {
        return Err(Error::Resource {
            what: format!("spectral slice below r = {r} exceeds basis budget {budget}"),
            achieved: slice.basis_size as f64,
        });
    }
    Ok(slice)
}

fn torus_slice<T: Real>(m: &ManifoldSpec, r: T, r2: f64) -> SpectrumSlice<T> {
    let tau2 = std::f64::consts::TAU * std::f64::consts::TAU;
    let kmax = (r.f64() / std::f64::consts::TAU).floor() as i64;
    let d = m.dim;
    let mut reps: Vec<(i64, [i64; 3])> = Vec::new();
    let range = |on: bool| if on { -kmax..=kmax } else { 0..=0 };
    for a in range(true) {
        for b in range(d >= 2) {
            for c in range(d >= 3) {
                let k = [a, b, c];
                let n2 = a * a + b * b + c * c;
                if n2 == 0 || tau2 * (n2 as f64) >= r2 {
                    continue;
                }
                let first = k.iter().copied().find(|&v| v != 0).unwrap_or(0);
                if first > 0 {
                    reps.push((n2, k));
                }
            }
        }
    }
    reps.sort();
    let mut shells = vec![Shell {
        lambda: T::zero(),
        multiplicity: 1,
        index: ShellIndex::Lattice(vec![[0, 0, 0]]),
    }];
    let mut i = 0;
    while i < reps.len() {
        let n2 = reps[i].0;
        let mut ks = Vec::new();
        while i < reps.len() && reps[i].0 == n2 {
            ks.push(reps[i].1);
            i += 1;
        }
        shells.push(Shell {
            lambda: T::lit(std::f64::consts::TAU * (n2 as f64).sqrt()),
            multiplicity: 2 * ks.len(),
            index: ShellIndex::Lattice(ks),
        });
    }
    let basis_size = shells.iter().map(|s| s.multiplicity).sum();
    SpectrumSlice { manifold: *m, cutoff: r, shells, basis_size }
}

fn sphere_slice<T: Real>(m: &ManifoldSpec, r: T, r2: f64) -> SpectrumSlice<T> {
    let mut shells = Vec::new();
    let mut n = 0usize;
    while ((n * (n + 1)) as f64) < r2 {
        shells.push(Shell {
            lambda: T::lit(((n * (n + 1)) as f64).sqrt()),
            multiplicity: 2 * n + 1,
            index: ShellIndex::Degree(n),
        });
        n += 1;
    }
    let basis_size = shells.iter().map(|s| s.multiplicity).sum();
    SpectrumSlice { manifold: *m, cutoff: r, shells, basis_size }
}

/// Values of the real orthonormal eigenbasis of `s` at `x`; entry 0 is the
/// constant function 1.
pub fn eval_basis<T: Real>(m: &ManifoldSpec, s: &SpectrumSlice<T>, x: &Point<T>) -> Vec<T> {
    let mut out = Vec::with_capacity(s.basis_size);
    eval_basis_into(m, s, x, &mut out);
    out
}

pub(crate) fn eval_basis_into<T: Real>(
    m: &ManifoldSpec,
    s: &SpectrumSlice<T>,
    x: &Point<T>,
    out: &mut Vec<T>,
) {
    out.clear();
    match m.kind {
        ManifoldKind::Torus => {
            let sqrt2 = T::SQRT_2();
            let tau = T::TAU();
            out.push(T::one());
            for shell in s.shells.iter().skip(1) {
                if let ShellIndex::Lattice(ks) = &shell.index {
                    for k in ks {
                        let mut ph = T::zero();
                        for i in 0..m.dim {
                            ph = ph + T::lit(k[i] as f64) * x.c[i];
                        }
                        // reduce the phase for accuracy at large |k|
                        ph = ph - ph.floor();
                        let (sn, cs) = (tau * ph).sin_cos();
                        out.push(sqrt2 * cs);
                        out.push(sqrt2 * sn);
                    }
                }
            }
        }
        ManifoldKind::Sphere => {
            let lmax = s.max_degree().unwrap_or(0);
            sphere_harmonics_into(lmax, x, out);
        }
    }
}

/// Real spherical harmonics of degrees `0..=lmax`, orthonormal for the
/// normalized surface measure. Order within degree `n`: `m = 0`, then
/// `(cos mφ, sin mφ)` pairs for `m = 1..=n`.
pub(crate) fn sphere_harmonics_into<T: Real>(lmax: usize, x: &Point<T>, out: &mut Vec<T>) {
    let z = x.c[2].max(-T::one()).min(T::one());
    let rho = (x.c[0] * x.c[0] + x.c[1] * x.c[1]).sqrt();
    let (cphi, sphi) = if rho > T::zero() {
        (x.c[0] / rho, x.c[1] / rho)
    } else {
        (T::one(), T::zero())
    };
    let sin_t = rho;
    // q[n][m] = sqrt((2n+1)(n-m)!/(n+m)!) P_n^m(z), stored per m column.
    let l = lmax;
    let mut q = vec![T::zero(); (l + 1) * (l + 1)];
    let idx = |n: usize, mm: usize| n * (l + 1) + mm;
    let mut diag = T::one();
    for mm in 0..=l {
        if mm > 0 {
            let mf = T::from_usize_(mm);
            diag = diag * ((mf + mf + T::one()) / (mf + mf)).sqrt() * sin_t;
        }
        q[idx(mm, mm)] = diag;
        if mm < l {
            q[idx(mm + 1, mm)] = T::from_usize_(2 * mm + 3).sqrt() * z * diag;
        }
        for n in (mm + 2)..=l {
            let nf = T::from_usize_(n);
            let mf = T::from_usize_(mm);
            let a = ((T::lit(4.0) * nf * nf - T::one()) / (nf * nf - mf * mf)).sqrt();
            let n1 = nf - T::one();
            let b = ((n1 * n1 - mf * mf) / (T::lit(4.0) * n1 * n1 - T::one())).sqrt();
            q[idx(n, mm)] = a * (z * q[idx(n - 1, mm)] - b * q[idx(n - 2, mm)]);
        }
    }
    // cos(mφ), sin(mφ) by angle addition
    let mut cs = vec![T::one(); l + 1];
    let mut sn = vec![T::zero(); l + 1];
    for mm in 1..=l {
        cs[mm] = cs[mm - 1] * cphi - sn[mm - 1] * sphi;
        sn[mm] = sn[mm - 1] * cphi + cs[mm - 1] * sphi;
    }
    let sqrt2 = T::SQRT_2();
    for n in 0..=l {
        out.push(q[idx(n, 0)]);
        for mm in 1..=n {
            let v = sqrt2 * q[idx(n, mm)];
            out.push(v * cs[mm]);
            out.push(v * sn[mm]);
        }
    }
}
