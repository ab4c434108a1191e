//! Gauss–Legendre rules and panel quadrature.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::special::legendre_with_derivative;

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1],
/// by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, z);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

static GL64: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL128: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL256: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL512: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
static GL1024: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();

/// Cached rule for the channel-projection orders.
pub fn cached_rule(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
    match order {
        64 => GL64.get_or_init(|| gauss_legendre(64)),
        128 => GL128.get_or_init(|| gauss_legendre(128)),
        256 => GL256.get_or_init(|| gauss_legendre(256)),
        512 => GL512.get_or_init(|| gauss_legendre(512)),
        1024 => GL1024.get_or_init(|| gauss_legendre(1024)),
        _ => panic!("no cached Gauss-Legendre rule of order {order}"),
    }
}

/// ∫_a^b f(x) dx with an n-point Gauss–Legendre rule.
pub fn panel_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// ∫_a^b f over a list of panel edges, fixed order per panel.
pub fn panels_integral<F: Fn(f64) -> f64>(f: &F, edges: &[f64], order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mut acc = 0.0;
    for pair in edges.windows(2) {
        let half = 0.5 * (pair[1] - pair[0]);
        let mid = 0.5 * (pair[0] + pair[1]);
        for (x, w) in nodes.iter().zip(&weights) {
            acc += w * f(mid + half * x) * half;
        }
    }
    acc
}
