//! Oracle machinery for the integration tests, kept independent of the
//! library's own quadrature and eigensolver paths: a locally generated
//! Gauss–Legendre rule, an adaptive panel integrator, direct evaluations of
//! the defining integrals, and a cyclic Jacobi eigensolver.

#![allow(dead_code)]

use std::f64::consts::PI;

/// n-point Gauss–Legendre rule on [-1, 1] (local copy, not the library's).
pub fn gl_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z: f64 = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = z;
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * z * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (p0 - z * p1) / (1.0 - z * z);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[n - 1 - i] = weights[i];
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn gl_apply<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive quadrature: GL20 against GL10 per panel, bisecting until the
/// local estimates agree. `tol` is relative to the accumulated integral
/// scale.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let coarse_rule = gl_rule(10);
    let fine_rule = gl_rule(20);
    let mut stack = vec![(a, b, 0usize)];
    let mut total = 0.0;
    let mut scale = f64::MIN_POSITIVE;
    while let Some((lo, hi, depth)) = stack.pop() {
        let coarse = gl_apply(f, lo, hi, &coarse_rule);
        let fine = gl_apply(f, lo, hi, &fine_rule);
        scale = scale.max(fine.abs());
        if (fine - coarse).abs() <= tol * scale.max(1e-300) || depth >= 48 {
            total += fine;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

/// j_d by direct quadrature of its defining angular integral.
pub fn oracle_angular_average(d: usize, y: f64) -> f64 {
    match d {
        1 => (y.cos() + (-y as f64).cos()) / 2.0,
        2 => {
            // (1/2π) ∫_0^{2π} cos(y cos θ) dθ via the trapezoid rule on the
            // periodic analytic integrand
            let m = 4096;
            let h = 2.0 * PI / m as f64;
            (0..m).map(|j| (y * ((j as f64) * h).cos()).cos()).sum::<f64>() * h / (2.0 * PI)
        }
        3 => adaptive_quad(&|t: f64| (y * t).cos(), -1.0, 1.0, 1e-14) / 2.0,
        _ => unreachable!(),
    }
}

/// Sphere area |S^{d-1}|.
pub fn sphere_area(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => unreachable!(),
    }
}

/// Radial Fourier transform by direct quadrature against the oracle j_d:
/// V̂(r) = (2π)^{-d/2} |S^{d-1}| ∫ V(ρ) j_d(rρ) ρ^{d-1} dρ.
pub fn oracle_fourier<F: Fn(f64) -> f64>(v: &F, d: usize, r: f64, r_max: f64) -> f64 {
    let integral = adaptive_quad(
        &|rho: f64| v(rho) * oracle_angular_average(d, r * rho) * rho.powi(d as i32 - 1),
        0.0,
        r_max,
        1e-13,
    );
    (2.0 * PI).powf(-(d as f64) / 2.0) * sphere_area(d) * integral
}

/// Cyclic Jacobi eigensolver for small symmetric matrices; returns the
/// eigenvalues in ascending order.
pub fn jacobi_eigenvalues(matrix: &[Vec<f64>]) -> Vec<f64> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() < 1e-15 * (1.0 + frobenius(&a)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

fn frobenius(a: &[Vec<f64>]) -> f64 {
    a.iter().flat_map(|r| r.iter().map(|v| v * v)).sum::<f64>().sqrt()
}
