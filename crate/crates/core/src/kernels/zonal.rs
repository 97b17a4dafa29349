//! Bessel kernel on S² as a zonal series `Σ (1+n(n+1))^{-s/2} (2n+1) P_n(t)`.
//!
//! With `ν = n + 1/2` the coefficient is `2ν (ν² + 3/4)^{-s/2}`; expanding in
//! powers of `3/(4ν²)` leaves series `G_σ(t) = Σ_{n≥1} ν^{-σ} P_n(t)`, which
//! have the integral form `Γ(σ)^{-1} ∫ u^{σ-1} (f(u) - e^{-u/2}) du` with the
//! Legendre generating function `f(u) = (2cosh u - 2t)^{-1/2}`. The part
//! `u < 1` is integrated numerically in `ln u`; for `u > 1` the generating
//! series converges geometrically and is summed against precomputed
//! incomplete gamma values. The expansion remainder decays fast and is summed
//! explicitly up to a certified degree. The constant term `n = 0` is exact.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{binom, gauss_legendre, hurwitz_zeta, legendre_all, legendre_derivs, rgamma, upper_gamma};

const J: usize = 4;
/// Degrees summed in the `u > 1` part; the neglected terms are below `e^{-60}`.
const SERIES_DEGREE: usize = 60;
const PANEL: f64 = 1.5;
const GL_ORDER: usize = 12;
const FLOOR: f64 = 1e-17;
/// Relative accuracy credited to the panel quadrature.
const QUAD_REL: f64 = 1e-13;
/// Below this exponent the integral is taken in subtracted form.
const REGULARIZE_BELOW: f64 = 0.5;

fn gl_nodes() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(GL_ORDER))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Value,
    Gap,
    Slope,
}

#[derive(Debug, Clone)]
pub(crate) struct Zonal<T> {
    two_b: Vec<T>,
    sigma: Vec<T>,
    rg: Vec<T>,
    rg1: Vec<T>,
    regular: Vec<bool>,
    upper: Vec<Vec<T>>,
    rem: Vec<T>,
    rem_tail: T,
    rem_slope_tail: T,
    series_tail: T,
    degree: usize,
    diag: T,
}

impl<T: Real> Zonal<T> {
    pub fn new(order: T, tol: T, max_terms: usize) -> Result<Self> {
        if !(order > T::zero()) {
            return Err(Error::InvalidInput(format!("Bessel order {order} must be positive")));
        }
        let q = T::lit(0.75);
        let b: Vec<T> = (0..=J + 1).map(|j| binom(-order * T::lit(0.5), j) * q.powi(j as i32)).collect();
        let sigma: Vec<T> = (0..=J).map(|j| order + T::from_usize_(2 * j) - T::one()).collect();
        let regular: Vec<bool> = sigma.iter().map(|s| *s < T::lit(REGULARIZE_BELOW)).collect();

        let p = order + T::from_usize_(2 * J + 1);
        let bj = b[J + 1].abs();
        let tail_at = |n0: usize| {
            let nu = T::from_usize_(n0) + T::lit(0.5);
            T::lit(2.0) * bj * nu.powf(T::one() - p) / (p - T::one())
        };
        let mut n0 = 8usize;
        while tail_at(n0) > tol * T::lit(0.25) {
            if n0 >= max_terms {
                return Err(Error::Resource {
                    what: format!("zonal remainder for Bessel order {order}"),
                    achieved: tail_at(n0).f64(),
                });
            }
            n0 = (n0 * 2).min(max_terms);
        }
        let rem: Vec<T> = (0..=n0)
            .map(|n| {
                if n == 0 {
                    return T::zero();
                }
                let nu = T::from_usize_(n) + T::lit(0.5);
                let exact = (nu * nu + q).powf(-order * T::lit(0.5));
                let mut approx = T::zero();
                for (j, bj) in b.iter().take(J + 1).enumerate() {
                    approx = approx + *bj * nu.powf(-order - T::from_usize_(2 * j));
                }
                (nu + nu) * (exact - approx)
            })
            .collect();
        let nu0 = T::from_usize_(n0) + T::lit(0.5);
        let rem_slope_tail = bj * nu0.powf(T::lit(3.0) - p) / (p - T::lit(3.0)).max(T::lit(1e-3));

        let upper: Vec<Vec<T>> = sigma
            .iter()
            .map(|&s| {
                (0..=SERIES_DEGREE)
                    .map(|n| {
                        let nu = T::from_usize_(n) + T::lit(0.5);
                        if n == 0 {
                            T::zero()
                        } else {
                            nu.powf(-s) * upper_gamma(s, nu)
                        }
                    })
                    .collect()
            })
            .collect();
        let nn = T::from_usize_(SERIES_DEGREE + 10);
        let series_tail = upper.iter().map(|row| row[SERIES_DEGREE]).fold(T::zero(), T::max) * T::lit(2.0) * nn * nn;

        let mut z = Zonal {
            two_b: b.iter().take(J + 1).map(|v| *v + *v).collect(),
            rg: sigma.iter().map(|s| rgamma(*s)).collect(),
            rg1: sigma.iter().map(|s| rgamma(*s + T::one())).collect(),
            sigma,
            regular,
            upper,
            rem,
            rem_tail: tail_at(n0),
            rem_slope_tail,
            series_tail,
            degree: n0.max(SERIES_DEGREE),
            diag: T::infinity(),
        };
        if z.sigma[0] > T::one() {
            let mut d = T::one();
            for j in 0..=J {
                d = d + z.two_b[j] * hurwitz_zeta(z.sigma[j], T::lit(1.5));
            }
            d = d + z.rem.iter().copied().sum::<T>();
            z.diag = d;
        }
        Ok(z)
    }

    /// `B(1)`, infinite when the order is at most 2.
    pub fn diagonal(&self) -> T {
        self.diag
    }

    pub fn terms(&self) -> usize {
        self.rem.len()
    }

    /// Kernel value at `t = cos θ` given `omt = 1 - t`; returns value and bound.
    pub fn value(&self, t: T, omt: T) -> (T, T) {
        if omt <= T::zero() {
            return (self.diag, self.rem_tail);
        }
        let p = legendre_all(self.degree, t);
        let (g, err) = self.integrals(omt, Mode::Value, &p);
        let r: T = self.rem.iter().zip(&p).map(|(a, b)| *a * *b).sum();
        let v = T::one() + g + r;
        (v, self.rem_tail + err)
    }

    /// `B(1) - B(t)` without subtracting two large numbers.
    pub fn gap(&self, t: T, omt: T) -> (T, T) {
        if omt <= T::zero() {
            return (T::zero(), T::zero());
        }
        // Q_n = 1 - P_n by the Legendre recurrence, stable near t = 1
        let mut qs = Vec::with_capacity(self.degree + 1);
        qs.push(T::zero());
        qs.push(omt);
        for n in 1..self.degree {
            let k = T::from_usize_(n);
            let next = ((k + k + T::one()) * (omt + t * qs[n]) - k * qs[n - 1]) / (k + T::one());
            qs.push(next);
        }
        let (g, err) = self.integrals(omt, Mode::Gap, &qs);
        let r: T = self.rem.iter().zip(&qs).map(|(a, b)| *a * *b).sum();
        (g + r, T::lit(2.0) * self.rem_tail + err)
    }

    /// `dB/dt` at `t < 1`.
    pub fn slope(&self, t: T, omt: T) -> (T, T) {
        let p = legendre_all(self.degree, t);
        let dp = legendre_derivs(&p);
        let (g, err) = self.integrals(omt, Mode::Slope, &dp);
        let r: T = self.rem.iter().zip(&dp).map(|(a, b)| *a * *b).sum();
        (g + r, err + self.rem_slope_tail)
    }

    /// `Σ_j 2 b_j G_σj` (or its gap / t-derivative) with an error estimate.
    /// `poly` holds `P_n`, `1 - P_n` or `P_n'` matching the mode.
    fn integrals(&self, omt: T, mode: Mode, poly: &[T]) -> (T, T) {
        let c = omt + omt;
        let f0 = c.sqrt().recip();
        let phi0 = f0 - T::one();
        let f03 = f0 * f0 * f0;
        let floor = T::lit(FLOOR);
        let mut w_lo = T::lit(-1.0);
        let mut push = |rate: T, scale: T| {
            let w = ((floor * rate).ln() - scale.ln()) / rate;
            w_lo = w_lo.min(w);
        };
        for (s, reg) in self.sigma.iter().zip(&self.regular) {
            match (mode, reg) {
                (Mode::Value, false) => push(*s, phi0.abs().max(T::one())),
                (Mode::Value, true) => {
                    push(*s + T::one(), T::one());
                    push(*s + T::lit(2.0), f0 / c);
                }
                (Mode::Gap, _) => push(*s - T::one(), T::one()),
                (Mode::Slope, false) => push(*s, f03),
                (Mode::Slope, true) => push(*s + T::lit(2.0), f03 * (T::one() + T::lit(1.5) / c)),
            }
        }
        let w_lo = w_lo.max(T::lit(-400.0));

        let (xs, ws) = gl_nodes();
        let panels = (-w_lo / T::lit(PANEL)).ceil().to_usize().unwrap_or(1).max(1);
        let width = -w_lo / T::from_usize_(panels);
        let half = width * T::lit(0.5);
        let mut acc = [T::zero(); J + 1];
        for k in 0..panels {
            let mid = w_lo + width * T::from_usize_(k) + half;
            for (x, wt) in xs.iter().zip(ws) {
                let w = mid + half * T::lit(*x);
                let u = w.exp();
                let sh = (u * T::lit(0.5)).sinh();
                let a = T::lit(4.0) * sh * sh;
                let bsum = a + c;
                let f = bsum.sqrt().recip();
                let (plain, sub) = match mode {
                    Mode::Value => (f - (-u * T::lit(0.5)).exp(), phi0),
                    Mode::Gap => {
                        let (ra, rb) = (a.sqrt(), bsum.sqrt());
                        (c / (ra * rb * (ra + rb)), T::zero())
                    }
                    Mode::Slope => (f * f * f, f03),
                };
                let scale = T::lit(*wt) * half;
                let u2 = u * u;
                let mut pw = (self.sigma[0] * w).exp() * scale;
                for (j, slot) in acc.iter_mut().enumerate() {
                    let body = if self.regular[j] { plain - sub } else { plain };
                    *slot = *slot + pw * body;
                    pw = pw * u2;
                }
            }
        }
        let mut val = T::zero();
        let mut mag = T::zero();
        for j in 0..=J {
            let mut series = T::zero();
            for (pn, e) in poly.iter().zip(&self.upper[j]).skip(1) {
                series = series + *pn * *e;
            }
            let mut g = self.rg[j] * (acc[j] + series);
            if self.regular[j] {
                let k = match mode {
                    Mode::Value => phi0,
                    Mode::Slope => f03,
                    Mode::Gap => T::zero(),
                };
                g = g + k * self.rg1[j];
            }
            val = val + self.two_b[j] * g;
            mag = mag + (self.two_b[j] * self.rg[j]).abs() * (acc[j].abs() + series.abs());
        }
        (val, T::lit(QUAD_REL) * mag + self.series_tail)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::legendre;

    fn direct(s: f64, t: f64, nmax: usize) -> f64 {
        let mut acc = 0.0;
        let (mut p0, mut p1) = (1.0, t);
        for n in 0..=nmax {
            let pn = if n == 0 { p0 } else { p1 };
            acc += (1.0 + (n * (n + 1)) as f64).powf(-s / 2.0) * (2 * n + 1) as f64 * pn;
            if n >= 1 {
                let k = n as f64;
                let p2 = ((2.0 * k + 1.0) * t * p1 - k * p0) / (k + 1.0);
                p0 = p1;
                p1 = p2;
            }
        }
        acc
    }

    #[test]
    fn matches_direct_series_for_smooth_orders() {
        for &s in &[6.0, 7.5] {
            let z = Zonal::<f64>::new(s, 1e-13, 1 << 16).unwrap();
            for &t in &[-0.9, -0.2, 0.3, 0.8, 0.999] {
                let (v, b) = z.value(t, 1.0 - t);
                let want = direct(s, t, 20_000);
                assert!((v - want).abs() < 1e-11 + b, "s={s} t={t}: {v} {want}");
            }
            let want = direct(s, 1.0, 200_000);
            assert!((z.diagonal() - want).abs() < 1e-10, "{} {want}", z.diagonal());
        }
    }

    #[test]
    fn matches_direct_series_for_rough_order() {
        // s = 3: terms ~ n^{-2} P_n(t), so a long direct sum is accurate to ~1e-8 off the diagonal
        let z = Zonal::<f64>::new(3.0, 1e-13, 1 << 16).unwrap();
        for &t in &[-0.5, 0.1, 0.7] {
            let (v, _) = z.value(t, 1.0 - t);
            let want = direct(3.0, t, 400_000);
            assert!((v - want).abs() < 1e-7, "t={t}: {v} {want}");
        }
        let want = direct(3.0, 1.0, 4_000_000) + 2.0 / 4_000_001.0; // integral tail of 2ν^{-2}
        assert!((z.diagonal() - want).abs() < 1e-9, "{} {want}", z.diagonal());
    }

    #[test]
    fn continuity_at_diagonal_and_gap_consistency() {
        let z = Zonal::<f64>::new(3.2, 1e-13, 1 << 16).unwrap();
        let omt = 1e-12;
        let (v, _) = z.value(1.0 - omt, omt);
        assert!((v - z.diagonal()).abs() < 1e-4);
        for &t in &[-0.7, 0.0, 0.6, 0.99] {
            let (v, _) = z.value(t, 1.0 - t);
            let (g, _) = z.gap(t, 1.0 - t);
            assert!((z.diagonal() - v - g).abs() < 1e-11, "t={t}");
        }
    }

    #[test]
    fn regularized_low_order_matches_abel_sum() {
        // s = 0.8 converges only in the Abel sense; compare with damped sums e^{-εn}
        let z = Zonal::<f64>::new(0.8, 1e-12, 1 << 16).unwrap();
        let t = 0.3;
        let (v, _) = z.value(t, 1.0 - t);
        let abel = |eps: f64| {
            let mut acc = 0.0;
            for n in 0..200_000usize {
                let nf = n as f64;
                acc += (1.0 + nf * (nf + 1.0)).powf(-0.4) * (2.0 * nf + 1.0) * legendre(n, t) * (-eps * nf).exp();
                if (-eps * nf).exp() < 1e-18 {
                    break;
                }
            }
            acc
        };
        // Richardson in ε: error of the damped sum is O(ε)
        let (a1, a2) = (abel(2e-3), abel(1e-3));
        let extrap = 2.0 * a2 - a1;
        assert!((v - extrap).abs() < 1e-4, "{v} vs {extrap}");
    }

    #[test]
    fn slope_matches_difference_quotient() {
        let z = Zonal::<f64>::new(4.0, 1e-13, 1 << 16).unwrap();
        for &t in &[-0.4, 0.2, 0.9] {
            let h = 1e-6;
            let fd = (z.value(t + h, 1.0 - t - h).0 - z.value(t - h, 1.0 - t + h).0) / (2.0 * h);
            let (d, _) = z.slope(t, 1.0 - t);
            assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "t={t}: {fd} {d}");
        }
    }
}
