//! Gauss–Legendre rules, composite panels and deterministic pairwise reduction.

use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::spacetime::{FourVector, LinMap4};

/// Values that can be accumulated by the quadratures in this crate.
pub trait Integrand: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn is_finite(&self) -> bool;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Integrand for FourVector {
    fn zero() -> Self {
        FourVector::ZERO
    }
    fn is_finite(&self) -> bool {
        FourVector::is_finite(self)
    }
}

impl Integrand for LinMap4 {
    fn zero() -> Self {
        LinMap4::ZERO
    }
    fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|c| c.is_finite())
    }
}

/// Pairwise (cascade) summation in a fixed order.
pub fn pairwise_sum<T: Integrand>(items: &[T]) -> T {
    const LEAF: usize = 16;
    if items.len() <= LEAF {
        return items.iter().fold(T::zero(), |acc, &x| acc + x);
    }
    let mid = items.len() / 2;
    pairwise_sum(&items[..mid]) + pairwise_sum(&items[mid..])
}

/// An n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidQuadratureOrder("Gauss-Legendre needs at least one node".into()));
        }
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
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Ok(GaussLegendre { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (mid + half * x, half * w))
    }

    /// Composite rule: `panels` equal panels over `[lo, hi]`.
    pub fn composite(&self, lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
        let width = (hi - lo) / panels as f64;
        (0..panels)
            .flat_map(|p| {
                let a = lo + width * p as f64;
                self.mapped(a, a + width).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
