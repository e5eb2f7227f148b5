//! Composite Gauss-Legendre quadrature on breakpoint-split intervals.
//!
//! Spectral integrands in this crate are piecewise smooth: the raised-cosine
//! alias sums are analytic between band-edge breakpoints and merely continuous
//! across them. Splitting at the breakpoints and applying a fixed-order
//! Gauss-Legendre rule per panel recovers spectral accuracy.

/// Gauss-Legendre nodes and weights on [-1, 1] for a given order.
///
/// Computed by Newton iteration on the Legendre polynomial with the usual
/// Chebyshev initial guesses. Deterministic; accurate to machine precision
/// for the orders used here.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be at least 1");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Initial guess: Chebyshev-like root estimate.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Evaluate P_n(x) and its derivative by the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// A fixed quadrature rule: nodes and positive weights on some interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// Composite rule over `[breakpoints[0], breakpoints.last()]`, splitting
    /// at every interior breakpoint. Panels of `order`-point Gauss-Legendre
    /// are distributed so the total node count is at least `target_nodes`,
    /// with at least one panel per subinterval and panel counts proportional
    /// to subinterval length.
    pub fn composite(breakpoints: &[f64], target_nodes: usize, order: usize) -> QuadRule {
        assert!(breakpoints.len() >= 2, "need at least one interval");
        let total_len: f64 = breakpoints.last().unwrap() - breakpoints.first().unwrap();
        assert!(total_len > 0.0);
        let (gl_nodes, gl_weights) = gauss_legendre(order);
        let total_panels = target_nodes.div_ceil(order).max(breakpoints.len() - 1);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in breakpoints.windows(2) {
            let (a, b) = (w[0], w[1]);
            let len = b - a;
            if len <= 0.0 {
                continue;
            }
            let panels = ((len / total_len) * total_panels as f64).ceil().max(1.0) as usize;
            let h = len / panels as f64;
            for p in 0..panels {
                let lo = a + p as f64 * h;
                let mid = lo + 0.5 * h;
                let half = 0.5 * h;
                for (x, wt) in gl_nodes.iter().zip(&gl_weights) {
                    nodes.push(mid + half * x);
                    weights.push(half * wt);
                }
            }
        }
        QuadRule { nodes, weights }
    }

    /// Integrates `f` over the rule's interval with compensated summation so
    /// the result is independent of everything but the node ordering.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut sum = 0.0;
        let mut comp = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            let term = w * f(*x);
            let y = term - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Compensated (Kahan) sum of an iterator of f64 terms, in iteration order.
pub fn kahan_sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for term in iter {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_rule_matches_reference_values() {
        // Classical 5-point Gauss-Legendre abscissae/weights.
        let (nodes, weights) = gauss_legendre(5);
        let expected_nodes = [
            -0.906179845938664,
            -0.538469310105683,
            0.0,
            0.538469310105683,
            0.906179845938664,
        ];
        let expected_weights = [
            0.236926885056189,
            0.478628670499366,
            0.568888888888889,
            0.478628670499366,
            0.236926885056189,
        ];
        for i in 0..5 {
            assert!((nodes[i] - expected_nodes[i]).abs() < 1e-14, "node {i}");
            assert!((weights[i] - expected_weights[i]).abs() < 1e-14, "weight {i}");
        }
    }

    #[test]
    fn rule_is_exact_on_polynomials() {
        // Order n integrates degree 2n-1 exactly.
        for order in [2, 4, 8, 16] {
            let rule = QuadRule::composite(&[-1.0, 1.0], order, order);
            for deg in 0..(2 * order) {
                let got = rule.integrate(|x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 {
                    0.0
                } else {
                    2.0 / (deg as f64 + 1.0)
                };
                assert!(
                    (got - exact).abs() < 1e-13,
                    "order {order} degree {deg}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn composite_rule_handles_kinked_integrands() {
        // |x| is smooth on each side of 0; splitting there restores accuracy.
        let rule = QuadRule::composite(&[-1.0, 0.0, 1.0], 64, 16);
        let got = rule.integrate(|x| x.abs());
        assert!((got - 1.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_reaches_target_node_count() {
        let rule = QuadRule::composite(&[-0.5, -0.3, 0.3, 0.5], 1024, 16);
        assert!(rule.len() >= 1024, "got {} nodes", rule.len());
        let width: f64 = rule.weights.iter().sum();
        assert!((width - 1.0).abs() < 1e-12, "weights must sum to the interval length");
    }

    #[test]
    fn integrate_cosine_to_machine_precision() {
        let rule = QuadRule::composite(&[0.0, 1.0], 64, 16);
        let got = rule.integrate(|x| (2.0 * x).cos());
        let exact = 0.5 * (2.0f64).sin();
        assert!((got - exact).abs() < 1e-14);
    }
}
