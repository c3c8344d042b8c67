//! Gauss–Legendre panels and linear Filon sums used by the frequency integrals.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of `order` points
/// on `[a, b]`. Returns `(nodes, weights)` in increasing node order.
pub fn composite_gauss(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + p as f64 * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(lo + 0.5 * h * (xi + 1.0));
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// `int_0^1 e^{-i theta s} ds` and `int_0^1 s e^{-i theta s} ds`.
fn filon_moments(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 1e-3 {
        let t2 = theta * theta;
        let m0 = Complex64::new(1.0 - t2 / 6.0 + t2 * t2 / 120.0, -theta / 2.0 + theta * t2 / 24.0);
        let m1 = Complex64::new(0.5 - t2 / 8.0 + t2 * t2 / 144.0, -theta / 3.0 + theta * t2 / 30.0);
        return (m0, m1);
    }
    let c = Complex64::new(0.0, -theta);
    let e = c.exp();
    let m0 = (e - 1.0) / c;
    let m1 = e / c - (e - 1.0) / (c * c);
    (m0, m1)
}

/// `int f(w) e^{-i w t} dw` over the grid `w` with `f` interpolated
/// linearly between samples and the oscillatory factor integrated exactly.
pub fn filon_linear(grid: &[f64], values: &[Complex64], t: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..grid.len().saturating_sub(1) {
        let a = grid[k];
        let h = grid[k + 1] - a;
        let (m0, m1) = filon_moments(t * h);
        let fa = values[k];
        let df = values[k + 1] - fa;
        let phase = Complex64::new(0.0, -a * t).exp();
        acc += phase * h * (fa * m0 + df * m1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let p: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((p - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn composite_integrates_exp() {
        let (x, w) = composite_gauss(0.0, 3.0, 10, 6);
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.exp()).sum();
        assert!((v - (3.0f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn filon_exact_for_linear() {
        let grid: Vec<f64> = (0..=7).map(|k| -1.0 + 0.4 * k as f64 + 0.01 * (k * k) as f64).collect();
        let vals: Vec<Complex64> = grid.iter().map(|&w| Complex64::new(2.0 * w + 1.0, -w)).collect();
        for t in [0.0, 1e-5, 0.7, 13.0] {
            let got = filon_linear(&grid, &vals, t);
            // brute force with many trapezoid samples
            let (a, b) = (grid[0], *grid.last().unwrap());
            let n = 200_000;
            let h = (b - a) / n as f64;
            let mut s = Complex64::new(0.0, 0.0);
            for k in 0..=n {
                let w = a + k as f64 * h;
                let f = Complex64::new(2.0 * w + 1.0, -w) * Complex64::new(0.0, -w * t).exp();
                s += if k == 0 || k == n { f * 0.5 } else { f };
            }
            s *= h;
            assert!((got - s).norm() < 1e-8, "t = {t}: {got} vs {s}");
        }
    }
}
