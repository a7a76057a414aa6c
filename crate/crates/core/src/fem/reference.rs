//! Lagrange shape functions of degree `k` on the reference triangle.
//!
//! Nodes sit on the lattice `(i/k, j/k)`, `i + j <= k`. A node is stored by
//! its barycentric multi-index `(k - i - j, i, j)` and its shape function is
//!
//! ```text
//! φ_a(λ) = Π_t Π_{s < a_t} (k λ_t - s) / (s + 1)
//! ```
//!
//! which equals 1 at its own node and vanishes at every other lattice point.

use alloc::vec;
use alloc::vec::Vec;

use super::quadrature::QuadratureRule;
use super::{FemError, MAX_DEGREE};

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceElement {
    degree: usize,
    nodes: Vec<[usize; 3]>,
}

impl ReferenceElement {
    pub fn new(degree: usize) -> Result<Self, FemError> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(FemError::InvalidDegree(degree));
        }
        let mut nodes = Vec::with_capacity((degree + 1) * (degree + 2) / 2);
        for j in 0..=degree {
            for i in 0..=(degree - j) {
                nodes.push([degree - i - j, i, j]);
            }
        }
        Ok(Self { degree, nodes })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Barycentric multi-indices, summing to `k`.
    pub fn multi_indices(&self) -> &[[usize; 3]] {
        &self.nodes
    }

    /// Reference coordinates of the nodes.
    pub fn node_points(&self) -> Vec<[f64; 2]> {
        let k = self.degree as f64;
        self.nodes
            .iter()
            .map(|a| [a[1] as f64 / k, a[2] as f64 / k])
            .collect()
    }

    /// Shape-function values at a reference point.
    pub fn eval(&self, p: [f64; 2], out: &mut [f64]) {
        let table = self.factor_table(p);
        for (a, o) in self.nodes.iter().zip(out.iter_mut()) {
            *o = table.value[0][a[0]] * table.value[1][a[1]] * table.value[2][a[2]];
        }
    }

    /// Reference gradients `(∂/∂x, ∂/∂y)` at a reference point.
    pub fn eval_grad(&self, p: [f64; 2], out: &mut [[f64; 2]]) {
        let table = self.factor_table(p);
        for (a, o) in self.nodes.iter().zip(out.iter_mut()) {
            let v = [table.value[0][a[0]], table.value[1][a[1]], table.value[2][a[2]]];
            let d = [table.deriv[0][a[0]], table.deriv[1][a[1]], table.deriv[2][a[2]]];
            let dl0 = d[0] * v[1] * v[2];
            let dl1 = v[0] * d[1] * v[2];
            let dl2 = v[0] * v[1] * d[2];
            *o = [dl1 - dl0, dl2 - dl0];
        }
    }

    /// Values and reference gradients at every point of a rule, point-major.
    pub fn tabulate(&self, rule: &QuadratureRule) -> Tabulation {
        let n = self.num_nodes();
        let mut values = vec![0.0; rule.len() * n];
        let mut grads = vec![[0.0; 2]; rule.len() * n];
        for (q, &p) in rule.points().iter().enumerate() {
            self.eval(p, &mut values[q * n..(q + 1) * n]);
            self.eval_grad(p, &mut grads[q * n..(q + 1) * n]);
        }
        Tabulation {
            num_nodes: n,
            values,
            grads,
        }
    }

    /// `P_a(λ_t)` and its derivative for every `t` and `a <= k`.
    fn factor_table(&self, p: [f64; 2]) -> FactorTable {
        let k = self.degree;
        let kf = k as f64;
        let lambda = [1.0 - p[0] - p[1], p[0], p[1]];
        let mut table = FactorTable {
            value: [[0.0; MAX_DEGREE + 1]; 3],
            deriv: [[0.0; MAX_DEGREE + 1]; 3],
        };
        for t in 0..3 {
            table.value[t][0] = 1.0;
            table.deriv[t][0] = 0.0;
            for a in 1..=k {
                let s = (a - 1) as f64;
                let factor = (kf * lambda[t] - s) / (s + 1.0);
                let dfactor = kf / (s + 1.0);
                table.deriv[t][a] = table.deriv[t][a - 1] * factor + table.value[t][a - 1] * dfactor;
                table.value[t][a] = table.value[t][a - 1] * factor;
            }
        }
        table
    }
}

struct FactorTable {
    value: [[f64; MAX_DEGREE + 1]; 3],
    deriv: [[f64; MAX_DEGREE + 1]; 3],
}

/// Shape functions sampled at the points of one quadrature rule.
#[derive(Debug, Clone)]
pub struct Tabulation {
    num_nodes: usize,
    values: Vec<f64>,
    grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.num_nodes..(q + 1) * self.num_nodes]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.num_nodes..(q + 1) * self.num_nodes]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts() {
        for k in 1..=4 {
            let e = ReferenceElement::new(k).unwrap();
            assert_eq!(e.num_nodes(), (k + 1) * (k + 2) / 2);
            assert!(e.multi_indices().iter().all(|a| a.iter().sum::<usize>() == k));
        }
        assert_eq!(ReferenceElement::new(0), Err(FemError::InvalidDegree(0)));
        assert_eq!(ReferenceElement::new(5), Err(FemError::InvalidDegree(5)));
    }

    #[test]
    fn nodal_property() {
        for k in 1..=4 {
            let e = ReferenceElement::new(k).unwrap();
            let n = e.num_nodes();
            let mut vals = vec![0.0; n];
            for (j, p) in e.node_points().into_iter().enumerate() {
                e.eval(p, &mut vals);
                for (i, v) in vals.iter().enumerate() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((v - expected).abs() < 1e-13, "k={k} i={i} j={j} v={v}");
                }
            }
        }
    }

    #[test]
    fn partition_of_unity_at_quadrature_points() {
        let rule = QuadratureRule::triangle(10);
        for k in 1..=4 {
            let e = ReferenceElement::new(k).unwrap();
            let tab = e.tabulate(&rule);
            for q in 0..rule.len() {
                let s: f64 = tab.values_at(q).iter().sum();
                let g = tab
                    .grads_at(q)
                    .iter()
                    .fold([0.0, 0.0], |acc, d| [acc[0] + d[0], acc[1] + d[1]]);
                assert!((s - 1.0).abs() < 1e-12);
                assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let e = ReferenceElement::new(4).unwrap();
        let n = e.num_nodes();
        let p = [0.23, 0.41];
        let step = 1e-6;
        let mut grads = vec![[0.0; 2]; n];
        e.eval_grad(p, &mut grads);
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for axis in 0..2 {
            let mut pp = p;
            let mut pm = p;
            pp[axis] += step;
            pm[axis] -= step;
            e.eval(pp, &mut plus);
            e.eval(pm, &mut minus);
            for i in 0..n {
                let fd = (plus[i] - minus[i]) / (2.0 * step);
                assert!((fd - grads[i][axis]).abs() < 1e-6, "node {i} axis {axis}");
            }
        }
    }

    #[test]
    fn reproduces_polynomials_of_its_degree() {
        // interpolating x^a y^b with a + b <= k must be exact
        let p = [0.31, 0.17];
        for k in 1..=4 {
            let e = ReferenceElement::new(k).unwrap();
            let mut vals = vec![0.0; e.num_nodes()];
            e.eval(p, &mut vals);
            for a in 0..=k {
                for b in 0..=(k - a) {
                    let f = |x: f64, y: f64| libm::pow(x, a as f64) * libm::pow(y, b as f64);
                    let interp: f64 = e
                        .node_points()
                        .iter()
                        .zip(&vals)
                        .map(|(n, v)| f(n[0], n[1]) * v)
                        .sum();
                    assert!((interp - f(p[0], p[1])).abs() < 1e-13);
                }
            }
        }
    }
}
