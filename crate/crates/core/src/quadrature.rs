//! Gauss–Legendre rules and a few composite/adaptive drivers.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

/// Cached rule for the common orders.
pub fn rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=64).map(|k| gauss_legendre(k.max(1))).collect());
    assert!(n >= 1 && n <= 64, "cached Gauss rules cover 1..=64 points");
    &rules[n]
}

/// `n`-point Gauss–Legendre approximation of `∫_a^b f`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, n: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (xs, ws) = rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    xs.iter().zip(ws).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Composite rule over consecutive breakpoints (assumed sorted), each panel
/// further split into `sub` equal pieces.
pub fn integrate_panels<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], sub: usize, n: usize) -> f64 {
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let h = (b - a) / sub as f64;
        for s in 0..sub {
            let lo = a + h * s as f64;
            let hi = if s + 1 == sub { b } else { lo + h };
            total += integrate(&mut f, lo, hi, n);
        }
    }
    total
}

/// Map a rule onto `[a, b]`, returning `(node, weight)` pairs.
pub fn mapped(a: f64, b: f64, n: usize) -> impl Iterator<Item = (f64, f64)> {
    let (xs, ws) = rule(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    xs.iter().zip(ws).map(move |(x, w)| (mid + half * x, w * half))
}

/// 20-point rule with one Richardson-style halving check; recurses into the
/// halves until the two estimates agree to `tol` (absolute).
pub fn integrate_checked<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> f64 {
    integrate_checked_depth(f, a, b, tol, 0)
}

fn integrate_checked_depth<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let whole = integrate(&mut *f, a, b, 20);
    let mid = 0.5 * (a + b);
    let halves = integrate(&mut *f, a, mid, 20) + integrate(&mut *f, mid, b, 20);
    if (whole - halves).abs() <= tol || depth >= 24 {
        return halves;
    }
    integrate_checked_depth(f, a, mid, 0.5 * tol, depth + 1)
        + integrate_checked_depth(f, mid, b, 0.5 * tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_polynomials_exact() {
        for n in 1..=40 {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            // degree 2n-1 exactness
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-12, "n={n}: {q} vs {exact}");
        }
    }

    #[test]
    fn smooth_integrals() {
        let v = integrate(f64::exp, 0.0, 1.0, 20);
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-15);
        let mut g = |x: f64| (x.abs()).sqrt();
        let v = integrate_checked(&mut g, -1.0, 1.0, 1e-10);
        assert!((v - 4.0 / 3.0).abs() < 1e-8);
    }
}
