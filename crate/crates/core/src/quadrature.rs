//! Fixed Gauss rules mapped to the unit interval.

use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};

/// Nodes and weights of a rule on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[a, b]` (plain Legendre rules only).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let h = b - a;
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(a + h * x);
        }
        acc * h
    }
}

/// Gauss-Legendre rule with `n` points on `[0, 1]`.
pub fn legendre(n: usize) -> Rule {
    let rule = GaussLegendre::new(NonZeroUsize::new(n.max(1)).unwrap());
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Rule { nodes, weights }
}

/// Gauss rule on `[0, 1]` for the weight `t^beta`, `beta > -1`.
pub fn jacobi_left(n: usize, beta: f64) -> Rule {
    if beta == 0.0 {
        return legendre(n);
    }
    let b = FiniteAboveNegOneF64::new(beta).expect("jacobi exponent must exceed -1");
    let a = FiniteAboveNegOneF64::new(0.0).unwrap();
    let rule = GaussJacobi::new(NonZeroUsize::new(n.max(1)).unwrap(), a, b);
    let scale = 0.5f64.powf(beta + 1.0);
    let mut pairs: Vec<(f64, f64)> = rule
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (x + 1.0), w * scale))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Rule { nodes, weights }
}
