//! Special functions: gamma family, Legendre polynomials, bump profiles
//! and a few quadrature primitives used by the kernel evaluators.

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        let pi = T::PI();
        return (pi / (pi * x).sin().abs()).ln() - ln_gamma(T::one() - x);
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_(i));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (z + half) * t.ln() - t + acc.ln()
}

/// `Γ(x)` for real `x` not a non-positive integer.
pub fn gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma(T::one() - x));
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_(i));
    }
    let half = T::lit(0.5);
    let t = z + T::lit(LANCZOS_G) + half;
    T::lit((2.0 * std::f64::consts::PI).sqrt()) * t.powf(z + half) * (-t).exp() * acc
}

/// Reciprocal gamma `1/Γ(x)`; entire, so zero at non-positive integers.
pub fn rgamma<T: Real>(x: T) -> T {
    if x > T::zero() {
        return T::one() / gamma(x);
    }
    if x == x.floor() {
        return T::zero();
    }
    // 1/Γ(x) = x(x+1)...(x+m-1) / Γ(x+m)
    let mut prod = T::one();
    let mut y = x;
    while y <= T::zero() {
        prod = prod * y;
        y = y + T::one();
    }
    prod / gamma(y)
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn gamma_q<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

/// Unregularized lower incomplete gamma `γ(a, x) = ∫_0^x t^{a-1} e^{-t} dt`.
pub fn lower_gamma<T: Real>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        // x^a e^{-x} Σ x^n / (a (a+1) ... (a+n))
        let mut term = T::one() / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..500 {
            ap = ap + T::one();
            term = term * x / ap;
            sum = sum + term;
            if term.abs() < sum.abs() * T::epsilon() {
                break;
            }
        }
        sum * (a * x.ln() - x).exp()
    } else {
        gamma_p(a, x) * gamma(a)
    }
}

/// Unregularized upper incomplete gamma `Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt`
/// for `x > 0`; `a` may be nonpositive when `x >= a + 1`.
pub fn upper_gamma<T: Real>(a: T, x: T) -> T {
    if x >= a + T::one() {
        (a * x.ln() - x).exp() * lentz_cf(a, x)
    } else {
        gamma(a) - lower_gamma(a, x)
    }
}

fn gamma_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut del = T::one() / a;
    let mut sum = del;
    for _ in 0..1000 {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_cf<T: Real>(a: T, x: T) -> T {
    (-x + a * x.ln() - ln_gamma(a)).exp() * lentz_cf(a, x)
}

/// Continued fraction for `Γ(a, x) e^x x^{-a}` (modified Lentz).
fn lentz_cf<T: Real>(a: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..1000 {
        let fi = T::from_usize_(i);
        let an = -fi * (fi - a);
        b = b + T::lit(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let del = d * c;
        h = h * del;
        if (del - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    h
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k+a)^{-s}` for real `s > 1`, `a > 0`
/// (Euler–Maclaurin after ten explicit terms).
pub fn hurwitz_zeta<T: Real>(s: T, a: T) -> T {
    // B_2k / (2k)!
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3_617.0 / 10_670_622_842_880_000.0,
    ];
    let n = 10usize;
    let x = T::from_usize_(n) + a;
    let mut sum = T::zero();
    for k in 0..n {
        sum = sum + (T::from_usize_(k) + a).powf(-s);
    }
    sum = sum + x.powf(T::one() - s) / (s - T::one()) + T::lit(0.5) * x.powf(-s);
    // rising factor s (s+1) ... (s+2k-2) times x^{-s-2k+1}
    let mut fac = s * x.powf(-s - T::one());
    for (k, b) in B.iter().enumerate() {
        sum = sum + T::lit(*b) * fac;
        let m = T::from_usize_(2 * k + 1);
        fac = fac * (s + m) * (s + m + T::one()) / (x * x);
    }
    sum
}

/// Riemann zeta `ζ(s)` for real `s > 1`.
pub fn zeta<T: Real>(s: T) -> T {
    hurwitz_zeta(s, T::one())
}

/// Generalized binomial coefficient `binom(a, j)`.
pub fn binom<T: Real>(a: T, j: usize) -> T {
    let mut out = T::one();
    for i in 0..j {
        out = out * (a - T::from_usize_(i)) / T::from_usize_(i + 1);
    }
    out
}

/// Legendre values `P_0(t) ..= P_n(t)`.
pub fn legendre_all<T: Real>(n: usize, t: T) -> Vec<T> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(T::one());
    if n == 0 {
        return p;
    }
    p.push(t);
    for k in 1..n {
        let kf = T::from_usize_(k);
        let next = ((kf + kf + T::one()) * t * p[k] - kf * p[k - 1]) / (kf + T::one());
        p.push(next);
    }
    p
}

/// Legendre polynomial `P_n(t)`.
pub fn legendre<T: Real>(n: usize, t: T) -> T {
    let (mut p0, mut p1) = (T::one(), t);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let kf = T::from_usize_(k);
        let p2 = ((kf + kf + T::one()) * t * p1 - kf * p0) / (kf + T::one());
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Derivatives `P'_0(t) ..= P'_n(t)` given the values from [`legendre_all`].
pub fn legendre_derivs<T: Real>(p: &[T]) -> Vec<T> {
    let n = p.len();
    let mut dp = vec![T::zero(); n];
    if n > 1 {
        dp[1] = T::one();
    }
    // P'_{k+1} = P'_{k-1} + (2k+1) P_k
    for k in 1..n.saturating_sub(1) {
        dp[k + 1] = dp[k - 1] + T::from_usize_(2 * k + 1) * p[k];
    }
    dp
}

/// The standard smooth bump `exp(1 - 1/(1-u²))` on `|u| < 1`, zero outside.
/// Equals 1 at `u = 0`.
pub fn bump<T: Real>(u: T) -> T {
    let u2 = u * u;
    if u2 >= T::one() {
        return T::zero();
    }
    (T::one() - T::one() / (T::one() - u2)).exp()
}

/// Littlewood–Paley cutoff: a smooth bump in `|u|` supported on `[1/2, 2]`,
/// equal to 1 at `|u| = 5/4`.
pub fn lp_cutoff<T: Real>(u: T) -> T {
    let w = (u.abs() - T::lit(1.25)) / T::lit(0.75);
    bump(w)
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed in `f64`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// `∫_{-∞}^{∞} g(v) dv` by the trapezoid rule on `[lo, hi]` with step `h`,
/// returning the value and the difference from the rule with step `2h`
/// (an error estimate for integrands decaying at both ends).
pub fn trapezoid_with_estimate<T: Real>(
    lo: T,
    hi: T,
    h: T,
    mut g: impl FnMut(T) -> T,
) -> (T, T) {
    let n = ((hi - lo) / h).ceil().to_usize().unwrap_or(0).max(2);
    let mut fine = T::zero();
    let mut coarse = T::zero();
    for i in 0..=n {
        let v = lo + h * T::from_usize_(i);
        let gv = g(v);
        fine = fine + gv;
        if i % 2 == 0 {
            coarse = coarse + gv;
        }
    }
    let fine = fine * h;
    let coarse = coarse * (h + h);
    (fine, (fine - coarse).abs())
}

/// `∫_a^∞ f(ρ) dρ` for `f` decaying faster than `1/ρ`, via `ρ = a + e^v`.
pub fn integrate_half_line<T: Real>(a: T, mut f: impl FnMut(T) -> T) -> T {
    let (val, err) = trapezoid_with_estimate(T::lit(-40.0), T::lit(12.0), T::lit(0.05), |v| {
        let e = v.exp();
        let y = f(a + e) * e;
        if y.is_finite() {
            y
        } else {
            T::zero()
        }
    });
    val + err
}
