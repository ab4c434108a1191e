//! Small special-function helpers: Legendre polynomials and the radial
//! plane-wave averages used throughout the kernel code.

/// Legendre polynomial P_ell(x) by upward recurrence.
pub fn legendre(ell: usize, x: f64) -> f64 {
    match ell {
        0 => 1.0,
        1 => x,
        _ => {
            let mut p_prev = 1.0;
            let mut p = x;
            for k in 1..ell {
                let kf = k as f64;
                let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
                p_prev = p;
                p = p_next;
            }
            p
        }
    }
}

/// (P_n(x), P_n'(x)) for the Gauss–Legendre node solve.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    // derivative from (1-x^2) P_n' = n (P_{n-1} - x P_n)
    let dp = n as f64 * (p_prev - x * p) / (1.0 - x * x);
    (p, dp)
}

/// sin(y)/y with the removable singularity filled in.
pub fn sinc(y: f64) -> f64 {
    let a = y.abs();
    if a < 1e-4 {
        let y2 = y * y;
        1.0 - y2 / 6.0 + y2 * y2 / 120.0
    } else {
        y.sin() / y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_low_orders() {
        for &x in &[-0.9, -0.3, 0.0, 0.5, 1.0] {
            assert_relative_eq!(legendre(0, x), 1.0);
            assert_relative_eq!(legendre(1, x), x);
            assert_relative_eq!(legendre(2, x), 0.5 * (3.0 * x * x - 1.0), epsilon = 1e-14);
            assert_relative_eq!(
                legendre(3, x),
                0.5 * (5.0 * x * x * x - 3.0 * x),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn legendre_endpoint_parity() {
        for ell in 0..20 {
            assert_relative_eq!(legendre(ell, 1.0), 1.0, epsilon = 1e-12);
            let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
            assert_relative_eq!(legendre(ell, -1.0), sign, epsilon = 1e-12);
        }
    }

    #[test]
    fn sinc_matches_direct_evaluation() {
        assert_relative_eq!(sinc(0.0), 1.0);
        assert_relative_eq!(sinc(1.0), 1.0f64.sin(), epsilon = 1e-15);
        // series branch against the direct formula just above the switch
        assert_relative_eq!(sinc(9e-5), (9e-5f64).sin() / 9e-5, epsilon = 1e-15);
    }
}
