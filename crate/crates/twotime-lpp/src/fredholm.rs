//! Nyström discretization of integral operators on L²(ℝ−)⊕L²(ℝ+) and
//! determinants det(I + K); the Tracy–Widom F2 distribution is the
//! calibration case.

use nalgebra::DMatrix;
use num::complex::Complex64;
use num::Zero;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_kernel_from_pairs, airy_pair};
use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// ℝ− component.
    Left,
    /// ℝ+ component.
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub cutoff: f64,
    pub nodes_per_side: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { cutoff: 10.0, nodes_per_side: 60 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub left_nodes: Vec<f64>,
    pub left_weights: Vec<f64>,
    pub right_nodes: Vec<f64>,
    pub right_weights: Vec<f64>,
    pub cutoff: f64,
    pub nodes_per_side: usize,
}

pub fn build_grid(cutoff: f64, nodes_per_side: usize) -> Result<QuadratureGrid> {
    if !(cutoff > 0.0 && cutoff.is_finite()) || nodes_per_side < 4 {
        return Err(Error::domain(format!(
            "grid needs L > 0 and at least 4 nodes per side, got L={cutoff}, n={nodes_per_side}"
        )));
    }
    let (left_nodes, left_weights) = gauss_legendre_on(-cutoff, 0.0, nodes_per_side);
    let (right_nodes, right_weights) = gauss_legendre_on(0.0, cutoff, nodes_per_side);
    Ok(QuadratureGrid { left_nodes, left_weights, right_nodes, right_weights, cutoff, nodes_per_side })
}

impl QuadratureGrid {
    pub fn from_spec(spec: GridSpec) -> Result<Self> {
        build_grid(spec.cutoff, spec.nodes_per_side)
    }

    pub fn dim(&self) -> usize {
        2 * self.nodes_per_side
    }

    /// All nodes in block order: left then right.
    pub fn nodes(&self) -> Vec<f64> {
        self.left_nodes.iter().chain(&self.right_nodes).copied().collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.left_weights.iter().chain(&self.right_weights).copied().collect()
    }

    pub fn block_of(&self, index: usize) -> Block {
        if index < self.nodes_per_side {
            Block::Left
        } else {
            Block::Right
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Weighting {
    /// √w_p K(x_p, x_q) √w_q.
    Symmetric,
    /// K(x_p, x_q) w_q; similar to the symmetric form, same determinant.
    Row,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedOperator {
    pub matrix: DMatrix<Complex64>,
    pub weighting: Weighting,
}

/// Nyström matrix of a block kernel `kernel(row_block, x, col_block, y)`.
pub fn discretize<F>(kernel: F, grid: &QuadratureGrid, weighting: Weighting) -> Result<DiscretizedOperator>
where
    F: Fn(Block, f64, Block, f64) -> Result<Complex64>,
{
    let xs = grid.nodes();
    let ws = grid.weights();
    let dim = grid.dim();
    let mut matrix = DMatrix::<Complex64>::zeros(dim, dim);
    for p in 0..dim {
        for q in 0..dim {
            let k = kernel(grid.block_of(p), xs[p], grid.block_of(q), xs[q])?;
            let scale = match weighting {
                Weighting::Symmetric => (ws[p] * ws[q]).sqrt(),
                Weighting::Row => ws[q],
            };
            let v = k * scale;
            if !v.is_finite() {
                return Err(Error::accuracy(format!("kernel entry ({p},{q}) is not finite"), f64::NAN));
            }
            matrix[(p, q)] = v;
        }
    }
    Ok(DiscretizedOperator { matrix, weighting })
}

/// det(I + M) via partial-pivot LU; errors with the log-magnitude if it overflows.
pub fn det_eval(op: &DiscretizedOperator) -> Result<Complex64> {
    det_identity_plus(op.matrix.clone())
}

/// det(I + M) for a raw matrix, consuming it.
pub fn det_identity_plus(mut m: DMatrix<Complex64>) -> Result<Complex64> {
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    det_of(m)
}

/// ln det(I + M) as (ln|det|, arg det); usable when the plain determinant overflows.
pub fn log_det_eval(op: &DiscretizedOperator) -> Result<(f64, f64)> {
    let mut m = op.matrix.clone();
    for i in 0..m.nrows() {
        m[(i, i)] += Complex64::new(1.0, 0.0);
    }
    log_det_of(m)
}

fn log_det_of(m: DMatrix<Complex64>) -> Result<(f64, f64)> {
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::accuracy("determinant of a non-finite matrix", f64::NAN));
    }
    let lu = m.lu();
    let sign: Complex64 = lu.p().determinant();
    let (mut log_abs, mut arg) = (0.0, sign.arg());
    for d in lu.u().diagonal().iter() {
        if d.is_zero() {
            return Ok((f64::NEG_INFINITY, 0.0));
        }
        log_abs += d.norm().ln();
        arg += d.arg();
    }
    Ok((log_abs, arg))
}

fn det_of(m: DMatrix<Complex64>) -> Result<Complex64> {
    if m.iter().any(|z| !z.is_finite()) {
        return Err(Error::accuracy("determinant of a non-finite matrix", f64::NAN));
    }
    let det = m.clone().lu().determinant();
    if det.is_finite() {
        return Ok(det);
    }
    let (log_abs, _) = log_det_of(m)?;
    Err(Error::Overflow { what: "Fredholm determinant".into(), log_magnitude: log_abs })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct F2Grid {
    pub cutoff: f64,
    pub nodes: usize,
}

impl Default for F2Grid {
    fn default() -> Self {
        F2Grid { cutoff: 14.0, nodes: 80 }
    }
}

/// F2(ξ) = det(I − K_Ai) on L²(ξ, ∞), Nyström on [ξ, ξ + L].
pub fn tracy_widom_f2(xi: f64, grid: F2Grid) -> Result<f64> {
    if !xi.is_finite() || !(grid.cutoff > 0.0) || grid.nodes < 4 {
        return Err(Error::domain(format!("F2 at ξ={xi} with grid {grid:?}")));
    }
    let (x, w) = gauss_legendre_on(xi, xi + grid.cutoff, grid.nodes);
    let pairs = x.iter().map(|&t| airy_pair(t)).collect::<Result<Vec<_>>>()?;
    let n = grid.nodes;
    let mut m = DMatrix::<f64>::identity(n, n);
    for p in 0..n {
        for q in 0..n {
            m[(p, q)] -= (w[p] * w[q]).sqrt() * airy_kernel_from_pairs(x[p], pairs[p], x[q], pairs[q]);
        }
    }
    let det = m.lu().determinant();
    if !det.is_finite() {
        return Err(Error::accuracy("F2 determinant", det));
    }
    Ok(det.clamp(0.0, 1.0))
}
