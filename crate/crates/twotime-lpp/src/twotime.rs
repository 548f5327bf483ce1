//! F_two-time(ξ1,η1;ξ2,η2;α) = (1/2πi)∮_{|u|=r} det(I + K(u)) du/(u−1), in the
//! K-form on L²(ℝ−)⊕L²(ℝ+), the Q-form on L²(ℝ+)⊕L²(ℝ+), and through the
//! α ↔ 1/α duality.

use nalgebra::DMatrix;
use num::complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{Circle, Contour};
use crate::fredholm::{det_identity_plus, tracy_widom_f2, Block, F2Grid, GridSpec, QuadratureGrid};
use crate::kernels::{ContourOffsets, KernelContext, KernelSettings, QCoefficients, QComponent, QContext};
use crate::quadrature::gauss_legendre_on;
use crate::scaling::TwoTimeParams;
use crate::{Error, Result};

/// Imaginary parts above this mark a run as unconverged.
pub const IMAG_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourSpec {
    pub radius: f64,
    pub u_nodes: usize,
    /// Evaluate only Im u > 0 and mirror. Halves the cost but makes the
    /// imaginary residue zero by construction.
    pub conjugate_symmetry: bool,
}

impl Default for ContourSpec {
    fn default() -> Self {
        ContourSpec { radius: 2.0, u_nodes: 64, conjugate_symmetry: false }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 1.0 && self.radius.is_finite()) {
            return Err(Error::Contour(format!("radius r = {} must exceed 1", self.radius)));
        }
        if self.u_nodes < 16 || self.u_nodes % 2 == 1 {
            return Err(Error::Contour(format!("u_nodes = {} must be even and ≥ 16", self.u_nodes)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminantSample {
    pub u: [f64; 2],
    pub det: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Form {
    K,
    KDual,
    Q,
    External,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub form: Form,
    /// Parameters the determinant was actually built from (the dual set for [`Form::KDual`]).
    pub params: Option<TwoTimeParams>,
    pub grid: Option<GridSpec>,
    pub contour: ContourSpec,
    pub kernel: Option<KernelSettings>,
    pub trace: Vec<DeterminantSample>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeResult {
    pub value: f64,
    pub imag_residue: f64,
    pub diagnostics: Diagnostics,
}

/// (1/2πi)∮ det(u)/(u−1) du over the circle, with `det` supplied by the caller.
/// A zero kernel (det ≡ 1) gives exactly the residue 1.
pub fn eval_contour_integral<F>(contour: ContourSpec, det: F) -> Result<TwoTimeResult>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let (value, trace) = contour_sum(contour, det)?;
    finish(value, Diagnostics { form: Form::External, params: None, grid: None, contour, kernel: None, trace })
}

fn contour_sum<F>(contour: ContourSpec, det: F) -> Result<(Complex64, Vec<DeterminantSample>)>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    contour.validate()?;
    let circle = Circle { center: Complex64::new(0.0, 0.0), radius: contour.radius, node_count: contour.u_nodes };
    let mut nodes = circle.nodes()?;
    if contour.conjugate_symmetry {
        nodes.retain(|(u, _)| u.im > 0.0);
    }
    let dets: Vec<Complex64> = nodes.par_iter().map(|&(u, _)| det(u)).collect::<Result<_>>()?;
    let one = Complex64::new(1.0, 0.0);
    let mut total = Complex64::new(0.0, 0.0);
    let mut trace = Vec::with_capacity(nodes.len());
    for (&(u, w), &d) in nodes.iter().zip(&dets) {
        if !d.is_finite() {
            return Err(Error::accuracy(format!("determinant not finite at u = {u}"), f64::NAN));
        }
        let term = w * d / (u - one);
        total += if contour.conjugate_symmetry { Complex64::new(2.0 * term.re, 0.0) } else { term };
        trace.push(DeterminantSample { u: [u.re, u.im], det: [d.re, d.im] });
    }
    Ok((total, trace))
}

fn finish(value: Complex64, diagnostics: Diagnostics) -> Result<TwoTimeResult> {
    let imag = value.im.abs();
    if !value.re.is_finite() || imag > IMAG_TOLERANCE {
        return Err(Error::accuracy("u-contour integral (imaginary residue)", imag));
    }
    if !(-IMAG_TOLERANCE..=1.0 + IMAG_TOLERANCE).contains(&value.re) {
        return Err(Error::accuracy(
            format!("u-contour integral left [0,1]: {}", value.re),
            (value.re - value.re.clamp(0.0, 1.0)).abs(),
        ));
    }
    Ok(TwoTimeResult { value: value.re, imag_residue: imag, diagnostics })
}

/// K-form evaluation with default kernel settings.
pub fn eval_k_form(params: TwoTimeParams, contour: ContourSpec, grid: GridSpec) -> Result<TwoTimeResult> {
    eval_k_form_with(params, contour, grid, KernelSettings::default())
}

pub fn eval_k_form_with(
    params: TwoTimeParams,
    contour: ContourSpec,
    grid: GridSpec,
    settings: KernelSettings,
) -> Result<TwoTimeResult> {
    k_form(params, contour, grid, settings, Form::K)
}

/// (1/2πi)∮ det(I + K(1/u; dual))/(u−1) du at the dual parameters; equals the
/// K-form at `params`.
pub fn eval_k_form_dual(params: TwoTimeParams, contour: ContourSpec, grid: GridSpec) -> Result<TwoTimeResult> {
    k_form(alpha_inverse_transform(params)?, contour, grid, KernelSettings::default(), Form::KDual)
}

fn k_form(
    params: TwoTimeParams,
    contour: ContourSpec,
    grid_spec: GridSpec,
    settings: KernelSettings,
    form: Form,
) -> Result<TwoTimeResult> {
    contour.validate()?;
    let ctx = KernelContext::with_settings(params, ContourOffsets::default_for(params.alpha), settings)?;
    let grid = QuadratureGrid::from_spec(grid_spec)?;
    let (s, t) = ctx.assemble_st(&grid)?;
    let right: Vec<bool> = (0..grid.dim()).map(|i| grid.block_of(i) == Block::Right).collect();
    let invert = form == Form::KDual;
    let det = |u: Complex64| {
        let u = if invert { u.inv() } else { u };
        let ui = u.inv();
        let n = s.nrows();
        det_identity_plus(DMatrix::from_fn(n, n, |i, j| {
            let r = s[(i, j)] + t[(i, j)] * ui;
            if right[i] {
                u * r
            } else {
                r
            }
        }))
    };
    let (value, trace) = contour_sum(contour, det)?;
    finish(
        value,
        Diagnostics { form, params: Some(params), grid: Some(grid_spec), contour, kernel: Some(settings), trace },
    )
}

/// Q-form evaluation on L²(ℝ+)⊕L²(ℝ+), Gauss–Legendre on [0, L] in each block.
pub fn eval_q_form(params: TwoTimeParams, contour: ContourSpec, grid: GridSpec) -> Result<TwoTimeResult> {
    contour.validate()?;
    let settings = KernelSettings::default();
    let ctx = QContext::with_settings(params, settings)?;
    if !(grid.cutoff > 0.0) || grid.nodes_per_side < 4 {
        return Err(Error::domain(format!("bad Q-form grid {grid:?}")));
    }
    let (v, w) = gauss_legendre_on(0.0, grid.cutoff, grid.nodes_per_side);
    let mut m = ctx.matrices(&v, &v)?;
    let sw: Vec<f64> = w.iter().map(|w| w.sqrt()).collect();
    let n = v.len();
    for k in [&mut m.m1, &mut m.m2, &mut m.m3].into_iter().chain(m.k.iter_mut()) {
        for i in 0..n {
            for j in 0..n {
                k[(i, j)] *= sw[i] * sw[j];
            }
        }
    }
    let g = |c: QComponent, i: usize, j: usize| m.get(c)[(i, j)];
    let det = |u: Complex64| {
        let c = QCoefficients::at(u);
        det_identity_plus(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let (bi, bj, i, j) = (i / n, j / n, i % n, j % n);
            match (bi, bj) {
                (0, 0) => {
                    c.k1 * g(QComponent::K1, i, j)
                        + c.k2_k5_m3 * (g(QComponent::K2, i, j) + g(QComponent::K5, i, j) + g(QComponent::M3, i, j))
                        + c.m2 * g(QComponent::M2, i, j)
                }
                (0, _) => c.k3 * g(QComponent::K3, i, j) + c.k4 * g(QComponent::K4, i, j),
                (_, 0) => c.k6 * g(QComponent::K6, i, j) - g(QComponent::K7, i, j),
                _ => c.m1 * g(QComponent::M1, i, j),
            }
        }))
    };
    let (value, trace) = contour_sum(contour, det)?;
    finish(
        value,
        Diagnostics { form: Form::Q, params: Some(params), grid: Some(grid), contour, kernel: Some(settings), trace },
    )
}

/// The dual parameters: β = 1/α, (ξ1, η1) ↔ (Δξ, Δη), with δ re-chosen so
/// that δ > max(Δη, βη1).
pub fn alpha_inverse_transform(params: TwoTimeParams) -> Result<TwoTimeParams> {
    TwoTimeParams::from_increments(1.0 / params.alpha, params.delta_xi, params.delta_eta, params.xi1, params.eta1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// ξ2 → large: the first-time marginal F2(ξ1 + η1²).
    First,
    /// ξ1 → large: the second-time marginal F2(ξ2 + η2²).
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalReport {
    pub direction: Direction,
    pub large_xi: f64,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
}

/// Pushes one ξ to `large_xi` and compares with the Tracy–Widom marginal of the
/// other time. For ξ1 large the ℝ+ kernel support shifts right by ≈ ξ1, so the
/// grid is widened by `large_xi` at the same node density.
pub fn marginal_check(
    params: TwoTimeParams,
    direction: Direction,
    large_xi: f64,
    contour: ContourSpec,
    grid: GridSpec,
) -> Result<MarginalReport> {
    if !(large_xi >= 6.0) {
        return Err(Error::domain(format!("large_xi = {large_xi} must be ≥ 6")));
    }
    let p = &params;
    let (moved, reference, grid) = match direction {
        Direction::First => (
            TwoTimeParams::from_scaled(p.xi1, p.eta1, large_xi, p.eta2, p.alpha)?,
            tracy_widom_f2(p.xi1 + p.eta1 * p.eta1, F2Grid::default())?,
            grid,
        ),
        Direction::Second => {
            let cutoff = grid.cutoff + large_xi;
            let nodes = (grid.nodes_per_side as f64 * cutoff / grid.cutoff).ceil() as usize;
            (
                TwoTimeParams::from_scaled(large_xi, p.eta1, p.xi2, p.eta2, p.alpha)?,
                tracy_widom_f2(p.xi2 + p.eta2 * p.eta2, F2Grid::default())?,
                GridSpec { cutoff, nodes_per_side: nodes },
            )
        }
    };
    let value = eval_k_form(moved, contour, grid)?.value;
    Ok(MarginalReport { direction, large_xi, value, reference, gap: (value - reference).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn origin() -> TwoTimeParams {
        TwoTimeParams::from_scaled(0.0, 0.0, 0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn zero_kernel_gives_residue_one() {
        for sym in [false, true] {
            let c = ContourSpec { conjugate_symmetry: sym, ..ContourSpec::default() };
            let r = eval_contour_integral(c, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
            assert!((r.value - 1.0).abs() < 1e-14 && r.imag_residue < 1e-14);
        }
        // Terms u^k, k ≥ 1, contribute 1 each through the pole at u = 1; u^{−k} nothing.
        let r = eval_contour_integral(ContourSpec::default(), |u| Ok(0.25 * (u + u.inv()))).unwrap();
        assert!((r.value - 0.25).abs() < 1e-14);
    }

    #[test]
    fn contour_spec_is_validated() {
        let bad = ContourSpec { radius: 1.0, ..ContourSpec::default() };
        assert!(matches!(eval_k_form(origin(), bad, GridSpec::default()), Err(Error::Contour(_))));
        let odd = ContourSpec { u_nodes: 15, ..ContourSpec::default() };
        assert!(matches!(odd.validate(), Err(Error::Contour(_))));
    }

    #[test]
    fn non_finite_determinant_is_an_accuracy_error() {
        let r = eval_contour_integral(ContourSpec::default(), |_| Ok(Complex64::new(f64::NAN, 0.0)));
        assert!(matches!(r, Err(Error::Accuracy { .. })));
    }

    #[test]
    fn alpha_inverse_is_an_involution() {
        let p = TwoTimeParams::from_scaled(0.4, -0.3, 0.2, 0.5, 1.7).unwrap();
        let d = alpha_inverse_transform(p).unwrap();
        assert!((d.alpha - 1.0 / 1.7).abs() < 1e-15);
        assert_eq!((d.xi1, d.eta1, d.delta_xi, d.delta_eta), (p.delta_xi, p.delta_eta, p.xi1, p.eta1));
        assert!(d.delta > d.eta1.max(d.alpha * d.delta_eta));
        let back = alpha_inverse_transform(d).unwrap();
        for (a, b) in [(back.alpha, p.alpha), (back.xi1, p.xi1), (back.eta1, p.eta1)] {
            assert!((a - b).abs() < 1e-14);
        }
        let one = alpha_inverse_transform(origin()).unwrap();
        assert_eq!(one.alpha, 1.0);
    }

    #[test]
    fn origin_value_and_symmetric_mode() {
        let full = eval_k_form(origin(), ContourSpec::default(), GridSpec::default()).unwrap();
        // Independent dense-matrix prototype (same grid and contour).
        assert!((full.value - 0.9477801493058576).abs() < 1e-12, "{}", full.value);
        assert!(full.imag_residue < 1e-10);
        assert_eq!(full.diagnostics.trace.len(), 64);
        let half = eval_k_form(
            origin(),
            ContourSpec { conjugate_symmetry: true, ..ContourSpec::default() },
            GridSpec::default(),
        )
        .unwrap();
        assert!((half.value - full.value).abs() < 1e-12);
        assert_eq!(half.diagnostics.trace.len(), 32);
        // Upper bound: F_tt ≤ F2(0) marginal.
        let f2 = tracy_widom_f2(0.0, F2Grid::default()).unwrap();
        assert!(full.value <= f2 + 1e-9);
    }

    #[test]
    fn upper_tail_is_near_one() {
        let p = TwoTimeParams::from_scaled(4.0, 0.0, 4.0, 0.0, 1.0).unwrap();
        let v = eval_k_form(p, ContourSpec::default(), GridSpec::default()).unwrap().value;
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }
}
