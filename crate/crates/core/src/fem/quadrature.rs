//! Quadrature on the reference triangle `{x >= 0, y >= 0, x + y <= 1}`.
//!
//! Rules are collapsed (Duffy) tensor products of Gauss-Legendre rules: the
//! unit square is mapped onto the triangle by `(a, b) -> (a, b (1 - a))`,
//! whose Jacobian `1 - a` adds one to the polynomial degree in `a`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    degree: usize,
    points: Vec<[f64; 2]>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    /// Rule exact for every polynomial of total degree `<= degree`.
    pub fn triangle(degree: usize) -> Self {
        let n = (degree + 3) / 2;
        let (nodes, node_weights) = gauss_legendre_unit(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&a, &wa) in nodes.iter().zip(&node_weights) {
            for (&b, &wb) in nodes.iter().zip(&node_weights) {
                points.push([a, b * (1.0 - a)]);
                weights.push(wa * wb * (1.0 - a));
            }
        }
        Self {
            degree,
            points,
            weights,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Points in reference coordinates `(x, y)`.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Weights; they sum to the reference area 1/2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Barycentric coordinates `(1 - x - y, x, y)` of each point.
    pub fn barycentric(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.points.iter().map(|&[x, y]| [1.0 - x - y, x, y])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n`-point Gauss-Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n from the Tricomi initial guess
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let step = p / d;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
