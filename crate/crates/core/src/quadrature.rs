//! Gauss–Legendre rules on `[0, 1]`.

use std::f64::consts::PI;

#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// `points`-point rule mapped to `[0, 1]`; exact for polynomials of
    /// degree `2 * points - 1`.
    pub fn unit_interval(points: usize) -> Self {
        assert!(points >= 1, "Gauss-Legendre rule needs at least one point");
        let mut nodes = vec![0.0; points];
        let mut weights = vec![0.0; points];
        let n = points as f64;
        for i in 0..points.div_ceil(2) {
            // Newton on P_n from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(points, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(points, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map [-1, 1] -> [0, 1]; nodes come out in increasing order.
            nodes[i] = 0.5 * (1.0 - x);
            nodes[points - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[points - 1 - i] = 0.5 * w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one_and_nodes_are_symmetric() {
        for q in 1..=20 {
            let rule = GaussLegendre::unit_interval(q);
            let total: f64 = rule.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "q = {q}: {total}");
            for i in 0..q {
                assert!((rule.nodes[i] + rule.nodes[q - 1 - i] - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_on_polynomials_up_to_degree_2q_minus_1() {
        for q in 2..=12 {
            let rule = GaussLegendre::unit_interval(q);
            for deg in 0..(2 * q) {
                let approx = rule.integrate(|x| x.powi(deg as i32));
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!((approx - exact).abs() < 1e-14, "q = {q}, deg = {deg}");
            }
        }
    }

    #[test]
    fn single_point_is_midpoint() {
        let rule = GaussLegendre::unit_interval(1);
        assert!((rule.nodes[0] - 0.5).abs() < 1e-15);
        assert!((rule.weights[0] - 1.0).abs() < 1e-15);
    }
}
