//! Independent reference values: Bessel series, bracketed roots and the
//! one-dimensional Robin equation.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `J_n(x)` by its power series; accurate to ~1e-15 for `x < 20`.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let s = if n % 2 == 0 { 1.0 } else { -1.0 };
        return s * bessel_j(-n, x);
    }
    let half = 0.5 * x;
    let mut term = half.powi(n) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for m in 1..200 {
        term *= -half * half / (m as f64 * (m + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

pub fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

/// Root of `f` in `[a, b]` by bisection; `f(a)` and `f(b)` must differ in sign.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change in [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
        if b - a < 1e-15 * m.abs().max(1.0) {
            break;
        }
    }
    0.5 * (a + b)
}

/// First `count` sign-change roots of `f` on `(from, to)` scanned with `step`.
pub fn roots(f: impl Fn(f64) -> f64, from: f64, to: f64, step: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let mut x = from;
    let mut fx = f(x);
    while x < to && out.len() < count {
        let y = x + step;
        let fy = f(y);
        if fx == 0.0 {
            out.push(x);
        } else if fx * fy < 0.0 {
            out.push(bisect(&f, x, y));
        }
        x = y;
        fx = fy;
    }
    out
}

/// `j_{0,1}`.
pub fn j01() -> f64 {
    bisect(|x| bessel_j(0, x), 2.0, 3.0)
}

/// `j'_{1,1}`, the first positive zero of `J_1'`.
pub fn jp11() -> f64 {
    bisect(|x| bessel_j_prime(1, x), 1.5, 2.2)
}

/// Positive wavenumbers `k` of the interval `[0, len]` with
/// `psi' = alpha psi` on outward normals at both ends:
/// `(alpha^2 - k^2) sin(k len) - 2 alpha k cos(k len) = 0`.
pub fn robin_interval_k(alpha: f64, len: f64, count: usize) -> Vec<f64> {
    let f = |k: f64| (alpha * alpha - k * k) * (k * len).sin() - 2.0 * alpha * k * (k * len).cos();
    roots(f, 1e-9, 200.0, 1e-3, count)
}

/// Lowest eigenvalue of `-(1/2) d^2/dx^2` on `[0, len]` with Robin `alpha`
/// at both ends. The ground state is even about the midpoint:
/// `q tanh(q len / 2) = alpha` (bound, `alpha > 0`) or
/// `k tan(k len / 2) = -alpha` (`alpha < 0`).
pub fn robin_interval_lowest(alpha: f64, len: f64) -> f64 {
    if alpha > 0.0 {
        let q = bisect(|q| q * (0.5 * q * len).tanh() - alpha, 1e-12, 2.0 * alpha + 2.0 / len + 1.0);
        -0.5 * q * q
    } else if alpha < 0.0 {
        let k = bisect(|k| k * (0.5 * k * len).tan() + alpha, 1e-12, PI / len * (1.0 - 1e-15));
        0.5 * k * k
    } else {
        0.0
    }
}

/// `n^2 / 2` on `[0, pi]`.
pub fn dirichlet_interval(n: usize) -> f64 {
    0.5 * (n * n) as f64
}

/// Lowest Dirichlet eigenvalue of `-(1/2) Laplacian` on `[0,a] x [0,b]`.
pub fn dirichlet_rectangle(a: f64, b: f64) -> f64 {
    0.5 * PI * PI * (1.0 / (a * a) + 1.0 / (b * b))
}

/// Disk `R = 1`, `A = 0`: wavenumbers with `k J_m'(k) = c J_m(k)`.
pub fn disk_mixed_k(m: i32, c: f64, count: usize) -> Vec<f64> {
    roots(|k| k * bessel_j_prime(m, k) - c * bessel_j(m, k), 1e-6, 30.0, 1e-3, count)
}

/// Ordinary least-squares slope of `log e` against `log h`.
pub fn slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let num: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

#[test]
fn oracle_values() {
    assert!((j01() - 2.404826).abs() < 1e-6);
    assert!((jp11() - 1.841184).abs() < 1e-6);
    // alpha = 0 is Neumann: k = 1 on [0, pi]
    let k = robin_interval_k(0.0, PI, 2);
    assert!((k[0] - 1.0).abs() < 1e-9);
}
