//! One-dimensional nodal bases on the reference interval `[0, 1]` and
//! Gauss–Legendre quadrature.
//!
//! Three nodal families are used as the building blocks of every
//! tensor-product space:
//!
//! | kind         | nodes          | degree |
//! |--------------|----------------|--------|
//! | `ConstantG`  | `1/2`          | 0      |
//! | `LinearF`    | `0, 1`         | 1      |
//! | `QuadraticE` | `0, 1/2, 1`    | 2      |
//!
//! Physical derivatives follow from the chain rule: `d/dx = (1/Δ) d/ds`.

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    ConstantG,
    LinearF,
    QuadraticE,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Continuity {
    Discontinuous,
    Continuous,
}

const G_NODES: [f64; 1] = [0.5];
const F_NODES: [f64; 2] = [0.0, 1.0];
const E_NODES: [f64; 3] = [0.0, 0.5, 1.0];

/// A 1D nodal basis together with its inter-cell continuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Basis1D {
    pub kind: BasisKind,
    pub continuity: Continuity,
}

impl Basis1D {
    pub fn new(kind: BasisKind, continuity: Continuity) -> Self {
        Self { kind, continuity }
    }

    /// `CG_r` for `r` in `{1, 2}`.
    pub fn continuous(order: usize) -> Result<Self> {
        match order {
            1 => Ok(Self::new(BasisKind::LinearF, Continuity::Continuous)),
            2 => Ok(Self::new(BasisKind::QuadraticE, Continuity::Continuous)),
            _ => domain(format!("no continuous basis of order {order}")),
        }
    }

    /// `DG_r` for `r` in `{0, 1}`.
    pub fn discontinuous(order: usize) -> Result<Self> {
        match order {
            0 => Ok(Self::new(BasisKind::ConstantG, Continuity::Discontinuous)),
            1 => Ok(Self::new(BasisKind::LinearF, Continuity::Discontinuous)),
            _ => domain(format!("no discontinuous basis of order {order}")),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    pub fn degree(&self) -> usize {
        self.node_count() - 1
    }

    /// Reference coordinates of the nodes, in basis order.
    pub fn nodes(&self) -> &'static [f64] {
        match self.kind {
            BasisKind::ConstantG => &G_NODES,
            BasisKind::LinearF => &F_NODES,
            BasisKind::QuadraticE => &E_NODES,
        }
    }

    pub fn is_continuous(&self) -> bool {
        self.continuity == Continuity::Continuous
    }

    pub fn eval(&self, node: usize, s: f64) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.eval_unchecked(node, s))
    }

    pub fn deriv(&self, node: usize, s: f64) -> Result<f64> {
        self.check_node(node)?;
        Ok(self.deriv_unchecked(node, s))
    }

    fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.node_count() {
            return domain(format!(
                "node index {node} out of range for {:?} with {} nodes",
                self.kind,
                self.node_count()
            ));
        }
        Ok(())
    }

    pub(crate) fn eval_unchecked(&self, node: usize, s: f64) -> f64 {
        match (self.kind, node) {
            (BasisKind::ConstantG, _) => 1.0,
            (BasisKind::LinearF, 0) => 1.0 - s,
            (BasisKind::LinearF, _) => s,
            (BasisKind::QuadraticE, 0) => 2.0 * (s - 0.5) * (s - 1.0),
            (BasisKind::QuadraticE, 1) => 4.0 * s * (1.0 - s),
            (BasisKind::QuadraticE, _) => 2.0 * s * (s - 0.5),
        }
    }

    pub(crate) fn deriv_unchecked(&self, node: usize, s: f64) -> f64 {
        match (self.kind, node) {
            (BasisKind::ConstantG, _) => 0.0,
            (BasisKind::LinearF, 0) => -1.0,
            (BasisKind::LinearF, _) => 1.0,
            (BasisKind::QuadraticE, 0) => 4.0 * s - 3.0,
            (BasisKind::QuadraticE, 1) => 4.0 - 8.0 * s,
            (BasisKind::QuadraticE, _) => 4.0 * s - 1.0,
        }
    }
}

/// Value of basis function `node` of `b` at reference coordinate `s`.
pub fn eval_basis(b: &Basis1D, node: usize, s: f64) -> Result<f64> {
    b.eval(node, s)
}

/// Reference-coordinate derivative of basis function `node` of `b`.
pub fn eval_basis_deriv(b: &Basis1D, node: usize, s: f64) -> Result<f64> {
    b.deriv(node, s)
}

/// Quadrature rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

/// Number of points per direction used for element integrals; exact for every
/// product of two bases (plus one derivative) up to order (1, 1).
pub const DEFAULT_QUAD_POINTS: usize = 3;

/// Gauss–Legendre rule with `n` points mapped to `[0, 1]`, `1 <= n <= 10`.
pub fn gauss_rule(n: usize) -> Result<QuadRule> {
    if !(1..=10).contains(&n) {
        return domain(format!("Gauss rule size {n} outside 1..=10"));
    }
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Newton on P_n starting from the Chebyshev-like estimate
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        points[i] = 0.5 * (1.0 - x);
        points[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    Ok(QuadRule { points, weights })
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
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
    let pm1 = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all() -> [Basis1D; 3] {
        [
            Basis1D::new(BasisKind::ConstantG, Continuity::Discontinuous),
            Basis1D::new(BasisKind::LinearF, Continuity::Continuous),
            Basis1D::new(BasisKind::QuadraticE, Continuity::Continuous),
        ]
    }

    #[test]
    fn worked_values() {
        let [g, f, e] = all();
        assert_eq!(eval_basis(&f, 0, 0.0).unwrap(), 1.0);
        assert_eq!(eval_basis(&g, 0, 0.37).unwrap(), 1.0);
        assert_eq!(eval_basis(&e, 1, 0.5).unwrap(), 1.0);
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(eval_basis_deriv(&f, 0, s).unwrap(), -1.0);
            assert_eq!(eval_basis_deriv(&g, 0, s).unwrap(), 0.0);
        }
        assert_eq!(eval_basis_deriv(&e, 1, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn node_counts() {
        let [g, f, e] = all();
        assert_eq!((g.node_count(), f.node_count(), e.node_count()), (1, 2, 3));
        assert_eq!(e.degree(), 2);
    }

    #[test]
    fn out_of_range_node_is_domain_error() {
        let [g, f, e] = all();
        assert!(g.eval(1, 0.2).is_err());
        assert!(f.deriv(2, 0.2).is_err());
        assert!(e.eval(3, 0.2).is_err());
    }

    #[test]
    fn kronecker_property() {
        for b in all() {
            for (j, &sj) in b.nodes().iter().enumerate() {
                for i in 0..b.node_count() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(b.eval(i, sj).unwrap(), expect, epsilon = 1e-15);
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_and_derivatives() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let [_, f, e] = all();
        for _ in 0..100 {
            let s: f64 = rng.gen();
            for b in [f, e] {
                let sum: f64 = (0..b.node_count()).map(|i| b.eval(i, s).unwrap()).sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-14);
            }
        }
        let h = 1e-6;
        for _ in 0..50 {
            let s: f64 = rng.gen_range(h..1.0 - h);
            for b in all() {
                for i in 0..b.node_count() {
                    let fd = (b.eval(i, s + h).unwrap() - b.eval(i, s - h).unwrap()) / (2.0 * h);
                    assert_abs_diff_eq!(fd, b.deriv(i, s).unwrap(), epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn gauss_rules() {
        let r1 = gauss_rule(1).unwrap();
        assert_eq!(r1.points, vec![0.5]);
        assert_eq!(r1.weights, vec![1.0]);
        let r2 = gauss_rule(2).unwrap();
        let off = 0.5 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.points[0], 0.5 - off, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.points[1], 0.5 + off, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.integrate(|s| s.powi(3)), 0.25, epsilon = 1e-15);
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(11).is_err());
    }

    #[test]
    fn gauss_exactness_all_sizes() {
        for n in 1..=10 {
            let r = gauss_rule(n).unwrap();
            let wsum: f64 = r.weights.iter().sum();
            assert_abs_diff_eq!(wsum, 1.0, epsilon = 1e-14);
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!(r.points.windows(2).all(|p| p[0] < p[1]));
            for deg in 0..2 * n {
                let exact = 1.0 / (deg as f64 + 1.0);
                assert_abs_diff_eq!(r.integrate(|s| s.powi(deg as i32)), exact, epsilon = 1e-14);
            }
        }
    }
}
