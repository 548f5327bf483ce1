//! Limiting kernels of the two-time formula.
//!
//! K-form: S1, T1, S2, S3, their assemblies S, T and R(u) = S + T/u, and the
//! 2×2 block kernel K(u) on L²(ℝ−)⊕L²(ℝ+). S1 and T1 are evaluated through the
//! factorization
//!
//!   S1(x,y) = −∫₀^∞ a1(x,s) a2(s,y) ds,   T1(x,y) = ∫_{−∞}^0 a1(x,s) a2(s,y) ds,
//!   a1(x,s) = e^{(δ−η1)(s−x)−δs} K_Ai(c−x, c−s),
//!   a2(s,y) = α e^{δs+(δ−αΔη)(y−s)} K_Ai(d+αs, d+αy),
//!
//! with c = ξ1+η1², d = Δξ+Δη².
//!
//! Q-form: M1–M3 and k1–k7 on L²(ℝ+) as products of deformed Airy kernels
//! Ai_{ξ,η}, and the block kernel Q(u).

use nalgebra::DMatrix;
use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::airy::{airy_kernel_from_pairs, airy_pair_unchecked, deformed_airy_unchecked};
use crate::fredholm::{Block, QuadratureGrid};
use crate::quadrature::gauss_legendre_on;
use crate::scaling::TwoTimeParams;
use crate::{Error, Result};

/// Offsets of the vertical contours Γ_{D_i} and Γ_{−d_i} used by the contour
/// representations of the kernels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourOffsets {
    pub upper: [f64; 3],
    pub lower: [f64; 3],
}

impl ContourOffsets {
    pub fn default_for(alpha: f64) -> Self {
        let o = [0.5, 0.75 / alpha, 2.0 * alpha.max(1.0)];
        ContourOffsets { upper: o, lower: o }
    }

    /// 0 < D1 < αD2 < D3 and 0 < d1 < αd2 < d3.
    pub fn validate(&self, alpha: f64) -> Result<()> {
        for (name, o) in [("D", self.upper), ("d", self.lower)] {
            if !(0.0 < o[0] && o[0] < alpha * o[1] && alpha * o[1] < o[2]) {
                return Err(Error::domain(format!(
                    "contour offsets {name} = {o:?} violate 0 < {name}1 < α·{name}2 < {name}3 at α = {alpha}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSettings {
    /// s-integrals of S1 and T1 run over [0, s_cutoff] and [−s_cutoff, 0].
    pub s_cutoff: f64,
    pub s_nodes: usize,
    /// λ-integrals of the Q-form kernels run over [0, lambda_cutoff].
    pub lambda_cutoff: f64,
    pub lambda_nodes: usize,
}

impl Default for KernelSettings {
    fn default() -> Self {
        KernelSettings { s_cutoff: 40.0, s_nodes: 200, lambda_cutoff: 40.0, lambda_nodes: 200 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    S1,
    T1,
    S2,
    S3,
}

/// K(u) at one point, indexed by (row block, column block). The bottom row is
/// u times the top row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockKernelValue {
    pub entries: [[Complex64; 2]; 2],
}

impl BlockKernelValue {
    pub fn get(&self, row: Block, col: Block) -> Complex64 {
        self.entries[block_index(row)][block_index(col)]
    }
}

fn block_index(b: Block) -> usize {
    match b {
        Block::Left => 0,
        Block::Right => 1,
    }
}

#[inline]
fn damped(k: f64, exponent: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * exponent.exp()
    }
}

/// Immutable context for the K-form kernels, with Airy values memoized on the
/// s-lattice.
#[derive(Clone, Debug)]
pub struct KernelContext {
    pub params: TwoTimeParams,
    pub offsets: ContourOffsets,
    pub settings: KernelSettings,
    c: f64,
    d: f64,
    s_pos: Vec<f64>,
    w_pos: Vec<f64>,
    s_neg: Vec<f64>,
    w_neg: Vec<f64>,
    // (Ai, Ai′) at c − s and d + αs on both s-grids.
    ai_c_pos: Vec<(f64, f64)>,
    ai_d_pos: Vec<(f64, f64)>,
    ai_c_neg: Vec<(f64, f64)>,
    ai_d_neg: Vec<(f64, f64)>,
}

impl KernelContext {
    pub fn new(params: TwoTimeParams) -> Result<Self> {
        Self::with_settings(params, ContourOffsets::default_for(params.alpha), KernelSettings::default())
    }

    pub fn with_settings(params: TwoTimeParams, offsets: ContourOffsets, settings: KernelSettings) -> Result<Self> {
        params.validate()?;
        offsets.validate(params.alpha)?;
        if !(settings.s_cutoff > 0.0) || settings.s_nodes < 4 {
            return Err(Error::domain(format!("bad s-quadrature settings {settings:?}")));
        }
        let p = &params;
        let c = p.xi1 + p.eta1 * p.eta1;
        let d = p.delta_xi + p.delta_eta * p.delta_eta;
        let (s_pos, w_pos) = gauss_legendre_on(0.0, settings.s_cutoff, settings.s_nodes);
        let (s_neg, w_neg) = gauss_legendre_on(-settings.s_cutoff, 0.0, settings.s_nodes);
        let at = |f: &dyn Fn(f64) -> f64, s: &[f64]| s.iter().map(|&s| airy_pair_unchecked(f(s))).collect();
        let ai_c_pos = at(&|s| c - s, &s_pos);
        let ai_d_pos = at(&|s| d + p.alpha * s, &s_pos);
        let ai_c_neg = at(&|s| c - s, &s_neg);
        let ai_d_neg = at(&|s| d + p.alpha * s, &s_neg);
        Ok(KernelContext {
            params,
            offsets,
            settings,
            c,
            d,
            s_pos,
            w_pos,
            s_neg,
            w_neg,
            ai_c_pos,
            ai_d_pos,
            ai_c_neg,
            ai_d_neg,
        })
    }

    #[inline]
    fn a1(&self, x: f64, ax: (f64, f64), s: f64, as_: (f64, f64)) -> f64 {
        let p = &self.params;
        let k = airy_kernel_from_pairs(self.c - x, ax, self.c - s, as_);
        damped(k, (p.delta - p.eta1) * (s - x) - p.delta * s)
    }

    #[inline]
    fn a2(&self, s: f64, as_: (f64, f64), y: f64, ay: (f64, f64)) -> f64 {
        let p = &self.params;
        let k = airy_kernel_from_pairs(self.d + p.alpha * s, as_, self.d + p.alpha * y, ay);
        p.alpha * damped(k, p.delta * s + (p.delta - p.alpha * p.delta_eta) * (y - s))
    }

    /// Σ_k w_k a1(x,s_k) a2(s_k,y) over one half-line, with a tail check.
    fn s_integral(&self, x: f64, y: f64, positive: bool) -> Result<f64> {
        let (s, w, ac, ad) = if positive {
            (&self.s_pos, &self.w_pos, &self.ai_c_pos, &self.ai_d_pos)
        } else {
            (&self.s_neg, &self.w_neg, &self.ai_c_neg, &self.ai_d_neg)
        };
        let ax = airy_pair_unchecked(self.c - x);
        let ay = airy_pair_unchecked(self.d + self.params.alpha * y);
        let mut total = 0.0;
        let (mut peak, mut tail) = (0.0f64, 0.0f64);
        for k in 0..s.len() {
            let f = self.a1(x, ax, s[k], ac[k]) * self.a2(s[k], ad[k], y, ay);
            total += w[k] * f;
            peak = peak.max(f.abs());
            if s[k].abs() > 0.95 * self.settings.s_cutoff {
                tail = tail.max(f.abs());
            }
        }
        if !total.is_finite() || tail > 1e-10 * peak.max(1e-300) {
            return Err(Error::accuracy(
                format!("s-integral at (x,y)=({x},{y}) not converged at cutoff {}", self.settings.s_cutoff),
                tail / peak.max(1e-300),
            ));
        }
        Ok(total)
    }

    pub fn component(&self, which: Component, x: f64, y: f64) -> Result<f64> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::domain("kernel at a non-finite point"));
        }
        let p = &self.params;
        Ok(match which {
            Component::S1 => -self.s_integral(x, y, true)?,
            Component::T1 => self.s_integral(x, y, false)?,
            Component::S2 => {
                let (u, v) = (self.d + p.alpha * x, self.d + p.alpha * y);
                let k = airy_kernel_from_pairs(u, airy_pair_unchecked(u), v, airy_pair_unchecked(v));
                p.alpha * damped(k, (p.delta - p.alpha * p.delta_eta) * (y - x))
            }
            Component::S3 => {
                let (u, v) = (self.c - x, self.c - y);
                let k = airy_kernel_from_pairs(u, airy_pair_unchecked(u), v, airy_pair_unchecked(v));
                damped(k, (p.delta - p.eta1) * (y - x))
            }
        })
    }

    /// (S, T) with S = S1 + 1(x>0)S2 − S3·1(y<0), T = −T1 − 1(x>0)S2 + S3·1(y<0).
    pub fn s_t_assemble(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let s1 = self.component(Component::S1, x, y)?;
        let t1 = self.component(Component::T1, x, y)?;
        let s2 = if x > 0.0 { self.component(Component::S2, x, y)? } else { 0.0 };
        let s3 = if y < 0.0 { self.component(Component::S3, x, y)? } else { 0.0 };
        Ok((s1 + s2 - s3, -t1 - s2 + s3))
    }

    /// R(u)(x,y) = S(x,y) + T(x,y)/u.
    pub fn r_u(&self, u: Complex64, x: f64, y: f64) -> Result<Complex64> {
        if u == Complex64::new(0.0, 0.0) {
            return Err(Error::Pole("R(u) has a pole at u = 0".into()));
        }
        let (s, t) = self.s_t_assemble(x, y)?;
        Ok(s + t / u)
    }

    /// All four formal entries of K(u) at (x, y): R_u(x,y) on the top row, u·R_u(x,y) on the bottom.
    pub fn k_block(&self, u: Complex64, x: f64, y: f64) -> Result<BlockKernelValue> {
        let r = self.r_u(u, x, y)?;
        Ok(BlockKernelValue { entries: [[r, r], [u * r, u * r]] })
    }

    /// One entry of K(u); x and y must lie in the half-lines of their blocks.
    pub fn k_entry(&self, u: Complex64, row: Block, x: f64, col: Block, y: f64) -> Result<Complex64> {
        let fits = |b: Block, v: f64| match b {
            Block::Left => v <= 0.0,
            Block::Right => v >= 0.0,
        };
        if !fits(row, x) || !fits(col, y) {
            return Err(Error::Indexing(format!("({row:?}, {x}) / ({col:?}, {y}) outside their half-lines")));
        }
        Ok(self.k_block(u, x, y)?.get(row, col))
    }

    /// S and T on a Nyström grid, symmetrically weighted: √w_p S(x_p,x_q) √w_q.
    pub fn assemble_st(&self, grid: &QuadratureGrid) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let p = &self.params;
        let xs = grid.nodes();
        let sw: Vec<f64> = grid.weights().iter().map(|w| w.sqrt()).collect();
        let n = xs.len();
        let ac: Vec<_> = xs.iter().map(|&x| airy_pair_unchecked(self.c - x)).collect();
        let ad: Vec<_> = xs.iter().map(|&x| airy_pair_unchecked(self.d + p.alpha * x)).collect();

        let half = |s: &[f64], w: &[f64], acs: &[(f64, f64)], ads: &[(f64, f64)]| {
            let left = DMatrix::from_fn(n, s.len(), |i, k| w[k] * self.a1(xs[i], ac[i], s[k], acs[k]));
            let right = DMatrix::from_fn(s.len(), n, |k, j| self.a2(s[k], ads[k], xs[j], ad[j]));
            left * right
        };
        let s1 = -half(&self.s_pos, &self.w_pos, &self.ai_c_pos, &self.ai_d_pos);
        let t1 = half(&self.s_neg, &self.w_neg, &self.ai_c_neg, &self.ai_d_neg);

        let mut s = DMatrix::zeros(n, n);
        let mut t = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (x, y) = (xs[i], xs[j]);
                let s2 = if x > 0.0 {
                    let k = airy_kernel_from_pairs(self.d + p.alpha * x, ad[i], self.d + p.alpha * y, ad[j]);
                    p.alpha * damped(k, (p.delta - p.alpha * p.delta_eta) * (y - x))
                } else {
                    0.0
                };
                let s3 = if y < 0.0 {
                    let k = airy_kernel_from_pairs(self.c - x, ac[i], self.c - y, ac[j]);
                    damped(k, (p.delta - p.eta1) * (y - x))
                } else {
                    0.0
                };
                let scale = sw[i] * sw[j];
                s[(i, j)] = scale * (s1[(i, j)] + s2 - s3);
                t[(i, j)] = scale * (-t1[(i, j)] - s2 + s3);
            }
        }
        if s.iter().chain(t.iter()).any(|v| !v.is_finite()) {
            return Err(Error::accuracy("K(u) assembly produced non-finite entries", f64::NAN));
        }
        Ok((s, t))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QComponent {
    M1,
    M2,
    M3,
    K1,
    K2,
    K3,
    K4,
    K5,
    K6,
    K7,
}

impl QComponent {
    pub const ALL: [QComponent; 10] = [
        QComponent::M1,
        QComponent::M2,
        QComponent::M3,
        QComponent::K1,
        QComponent::K2,
        QComponent::K3,
        QComponent::K4,
        QComponent::K5,
        QComponent::K6,
        QComponent::K7,
    ];
}

/// The ten Q-form kernels on a common (row, column) node set.
#[derive(Clone, Debug)]
pub struct QMatrices {
    pub m1: DMatrix<f64>,
    pub m2: DMatrix<f64>,
    pub m3: DMatrix<f64>,
    pub k: [DMatrix<f64>; 7],
}

impl QMatrices {
    pub fn get(&self, which: QComponent) -> &DMatrix<f64> {
        match which {
            QComponent::M1 => &self.m1,
            QComponent::M2 => &self.m2,
            QComponent::M3 => &self.m3,
            QComponent::K1 => &self.k[0],
            QComponent::K2 => &self.k[1],
            QComponent::K3 => &self.k[2],
            QComponent::K4 => &self.k[3],
            QComponent::K5 => &self.k[4],
            QComponent::K6 => &self.k[5],
            QComponent::K7 => &self.k[6],
        }
    }
}

/// Immutable context for the Q-form kernels, with the λ×λ Airy blocks precomputed.
#[derive(Clone, Debug)]
pub struct QContext {
    pub params: TwoTimeParams,
    pub settings: KernelSettings,
    lam: Vec<f64>,
    wl: Vec<f64>,
    // (Ai_{ξ1,−η1} W Ai_{ξ1,η1} W) on the λ lattice.
    chain_bc: DMatrix<f64>,
    // Ai_{ξ1,−η1}(λ1, α′λ2) and Ai_{ξ1,η1}(α′λ1, λ2), column-weighted.
    x17: DMatrix<f64>,
    x2: DMatrix<f64>,
}

impl QContext {
    pub fn new(params: TwoTimeParams) -> Result<Self> {
        Self::with_settings(params, KernelSettings::default())
    }

    pub fn with_settings(params: TwoTimeParams, settings: KernelSettings) -> Result<Self> {
        params.validate()?;
        if !(settings.lambda_cutoff > 0.0) || settings.lambda_nodes < 4 {
            return Err(Error::domain(format!("bad λ-quadrature settings {settings:?}")));
        }
        let p = &params;
        let (lam, wl) = gauss_legendre_on(0.0, settings.lambda_cutoff, settings.lambda_nodes);
        let nl = lam.len();
        let b = DMatrix::from_fn(nl, nl, |i, j| wl[j] * deformed_airy_unchecked(p.xi1, -p.eta1, lam[i], lam[j]));
        let c = DMatrix::from_fn(nl, nl, |i, j| wl[j] * deformed_airy_unchecked(p.xi1, p.eta1, lam[i], lam[j]));
        let ap = p.alpha_prime;
        let x17 = DMatrix::from_fn(nl, nl, |i, j| wl[j] * deformed_airy_unchecked(p.xi1, -p.eta1, lam[i], ap * lam[j]));
        let x2 = DMatrix::from_fn(nl, nl, |i, j| wl[j] * deformed_airy_unchecked(p.xi1, p.eta1, ap * lam[i], lam[j]));
        let ctx = QContext { params, settings, chain_bc: b * c, lam, wl, x17, x2 };
        for (name, m) in [("λλ chain", &ctx.chain_bc), ("k5/k7 block", &ctx.x17), ("k2 block", &ctx.x2)] {
            check_finite(name, m)?;
        }
        Ok(ctx)
    }

    /// Every Q-form kernel on rows × cols (all points ≥ 0).
    pub fn matrices(&self, rows: &[f64], cols: &[f64]) -> Result<QMatrices> {
        if rows.iter().chain(cols).any(|v| !(*v >= 0.0)) {
            return Err(Error::domain("Q-form kernels live on ℝ+"));
        }
        let p = &self.params;
        let (al, ap, dl) = (p.alpha, p.alpha_prime, p.delta);
        let (lam, wl) = (&self.lam, &self.wl);
        let (nr, nc, nl) = (rows.len(), cols.len(), lam.len());
        let ai = deformed_airy_unchecked;
        // Row factors carry the λ-weights; column factors do not.
        let row = |f: &dyn Fn(f64, f64) -> f64| DMatrix::from_fn(nr, nl, |i, k| wl[k] * f(rows[i], lam[k]));
        let col = |f: &dyn Fn(f64, f64) -> f64| DMatrix::from_fn(nl, nc, |k, j| f(lam[k], cols[j]));

        let a = row(&|v, l| ai(p.delta_xi, -p.delta_eta, v, -al * l));
        let e = row(&|v, l| ai(p.xi1, p.eta1, v, l));
        let f = row(&|v, l| ai(p.xi2, -p.eta2, v / ap, al * l));
        let pm = row(&|v, l| ai(p.xi2, -p.eta2, v / ap, l));
        let r = row(&|v, l| ai(p.delta_xi, -p.delta_eta, v, l));
        let dcol = col(&|l, v| ai(p.delta_xi, p.delta_eta, -al * l, v));
        let h = col(&|l, v| ai(p.xi2, p.eta2, al * l, v / ap));
        let j = col(&|l, v| ai(p.xi1, -p.eta1, l, v));
        let pt = col(&|l, v| ai(p.xi2, p.eta2, l, v / ap));
        let rt = col(&|l, v| ai(p.delta_xi, p.delta_eta, l, v));
        for (name, m) in [("E", &e), ("P", &pm), ("R", &r)] {
            check_tail(name, m)?;
        }

        let bcd = &self.chain_bc * &dcol;
        let scale_rows =
            |m: DMatrix<f64>, g: &dyn Fn(f64) -> f64| DMatrix::from_fn(nr, nc, |i, jj| g(rows[i]) * m[(i, jj)]);
        let scale_cols =
            |m: DMatrix<f64>, g: &dyn Fn(f64) -> f64| DMatrix::from_fn(nr, nc, |i, jj| g(cols[jj]) * m[(i, jj)]);
        let m1 = DMatrix::from_fn(nr, nc, |i, jj| (dl * (rows[i] - cols[jj])).exp()).component_mul(&(&e * &j));
        let m2 = (&pm * &pt) / ap;
        let m3 = &r * &rt;
        let k1 = (&a * &bcd) * al;
        let k2 = (&f * (&self.x2 * &dcol)) * al;
        let k3 = scale_cols(&a * &j, &|v| al * (-dl * v).exp());
        let k4 = DMatrix::from_fn(nr, nc, |i, jj| {
            (-dl * cols[jj]).exp() * al / ap * ai(p.xi2, -p.eta2, rows[i] / ap, al * cols[jj] / ap)
        });
        let k5 = (&a * (&self.x17 * &h)) * al;
        let k6 = scale_rows(&e * &bcd, &|v| (dl * v).exp());
        let k7 = scale_rows(&e * (&self.x17 * &h), &|v| (dl * v).exp());
        let out = QMatrices { m1, m2, m3, k: [k1, k2, k3, k4, k5, k6, k7] };
        for which in QComponent::ALL {
            check_finite("Q-form kernel", out.get(which))?;
        }
        Ok(out)
    }

    pub fn q_component(&self, which: QComponent, v1: f64, v2: f64) -> Result<f64> {
        Ok(self.matrices(&[v1], &[v2])?.get(which)[(0, 0)])
    }

    /// Q(u) entries at (v1, v2): [[Q11, Q12], [Q21, Q22]].
    pub fn q_block(&self, u: Complex64, v1: f64, v2: f64) -> Result<[[Complex64; 2]; 2]> {
        if u == Complex64::new(0.0, 0.0) {
            return Err(Error::Pole("Q(u) has a pole at u = 0".into()));
        }
        let m = self.matrices(&[v1], &[v2])?;
        let g = |w: QComponent| m.get(w)[(0, 0)];
        let c = QCoefficients::at(u);
        Ok([
            [
                c.k1 * g(QComponent::K1)
                    + c.k2_k5_m3 * (g(QComponent::K2) + g(QComponent::K5) + g(QComponent::M3))
                    + c.m2 * g(QComponent::M2),
                c.k3 * g(QComponent::K3) + c.k4 * g(QComponent::K4),
            ],
            [c.k6 * g(QComponent::K6) - g(QComponent::K7), c.m1 * g(QComponent::M1)],
        ])
    }
}

/// Laurent coefficients of Q(u) in terms of the kernels.
#[derive(Clone, Copy, Debug)]
pub struct QCoefficients {
    pub k1: Complex64,
    pub k2_k5_m3: Complex64,
    pub m2: Complex64,
    pub k3: Complex64,
    pub k4: Complex64,
    pub k6: Complex64,
    pub m1: Complex64,
}

impl QCoefficients {
    pub fn at(u: Complex64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let inv = one / u;
        QCoefficients {
            k1: 2.0 * one - u - inv,
            k2_k5_m3: u - one,
            m2: -u,
            k3: u + inv - 2.0 * one,
            k4: one - u,
            k6: one - inv,
            m1: inv - one,
        }
    }
}

fn check_finite(name: &str, m: &DMatrix<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::accuracy(format!("{name} has non-finite entries"), f64::NAN));
    }
    Ok(())
}

/// λ-decaying factors must be negligible at the λ cutoff.
fn check_tail(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let peak = m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let last = m.column(m.ncols() - 1).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if last > 1e-12 * peak.max(1e-300) {
        return Err(Error::accuracy(format!("λ-integral factor {name} not decayed at cutoff"), last / peak));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::airy_kernel;
    use crate::fredholm::build_grid;

    fn ctx(xi1: f64, eta1: f64, xi2: f64, eta2: f64, alpha: f64) -> KernelContext {
        KernelContext::new(TwoTimeParams::from_scaled(xi1, eta1, xi2, eta2, alpha).unwrap()).unwrap()
    }

    #[test]
    fn diagonal_reductions() {
        let k = ctx(0.3, 0.2, -0.4, 0.1, 1.3);
        let p = k.params;
        let d = p.delta_xi + p.delta_eta.powi(2);
        let c = p.xi1 + p.eta1.powi(2);
        for x in [-2.0, 0.0, 1.5] {
            let s2 = k.component(Component::S2, x, x).unwrap();
            let want = p.alpha * airy_kernel(d + p.alpha * x, d + p.alpha * x).unwrap();
            assert!((s2 - want).abs() < 1e-12, "{s2} {want}");
            let s3 = k.component(Component::S3, x, x).unwrap();
            assert!((s3 - airy_kernel(c - x, c - x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn assembly_indicators() {
        let k = ctx(0.0, 0.0, 0.0, 0.0, 1.0);
        let (s, t) = k.s_t_assemble(-0.5, 0.7).unwrap();
        assert_eq!(s, k.component(Component::S1, -0.5, 0.7).unwrap());
        assert_eq!(t, -k.component(Component::T1, -0.5, 0.7).unwrap());
        let u1 = k.r_u(Complex64::new(1.0, 0.0), 0.4, -0.3).unwrap();
        let s1 = k.component(Component::S1, 0.4, -0.3).unwrap();
        let t1 = k.component(Component::T1, 0.4, -0.3).unwrap();
        assert!((u1.re - (s1 - t1)).abs() < 1e-14 && u1.im == 0.0);
        let (s, t) = k.s_t_assemble(0.4, -0.3).unwrap();
        let m1 = k.r_u(Complex64::new(-1.0, 0.0), 0.4, -0.3).unwrap();
        assert!((m1.re - (s - t)).abs() < 1e-14);
        let big = k.r_u(Complex64::new(1e12, 0.0), 0.4, -0.3).unwrap();
        assert!((big.re - s).abs() < 1e-11);
        assert!(matches!(k.r_u(Complex64::new(0.0, 0.0), 0.0, 0.0), Err(Error::Pole(_))));
    }

    #[test]
    fn block_structure_and_decay() {
        let k = ctx(0.0, 0.0, 0.0, 0.0, 1.0);
        let u = Complex64::new(0.3, 1.7);
        let b = k.k_block(u, 0.2, 0.6).unwrap();
        for col in [Block::Left, Block::Right] {
            let top = b.get(Block::Left, col);
            assert!((b.get(Block::Right, col) / top - u).norm() < 1e-14);
        }
        let one = k.k_block(Complex64::new(1.0, 0.0), 0.2, 0.6).unwrap();
        assert_eq!(one.entries[0], one.entries[1]);
        assert!(matches!(k.k_entry(u, Block::Left, 0.5, Block::Right, 1.0), Err(Error::Indexing(_))));
        let near = k.k_entry(u, Block::Right, 0.0, Block::Right, 0.0).unwrap().norm();
        let far = k.k_entry(u, Block::Right, 8.0, Block::Right, 0.0).unwrap().norm();
        assert!(far * 1e3 < near, "{far} vs {near}");
    }

    #[test]
    fn batch_assembly_matches_pointwise() {
        let k = ctx(0.5, 0.2, -0.3, 0.1, 1.5);
        let grid = build_grid(6.0, 6).unwrap();
        let (s, t) = k.assemble_st(&grid).unwrap();
        let (xs, ws) = (grid.nodes(), grid.weights());
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                let (ps, pt) = k.s_t_assemble(xs[i], xs[j]).unwrap();
                let sc = (ws[i] * ws[j]).sqrt();
                assert!((s[(i, j)] - sc * ps).abs() < 1e-13 * (1.0 + ps.abs()));
                assert!((t[(i, j)] - sc * pt).abs() < 1e-13 * (1.0 + pt.abs()));
            }
        }
    }

    #[test]
    fn s_integral_cutoff_is_converged() {
        let p = TwoTimeParams::from_scaled(-0.5, 0.3, 0.2, -0.1, 0.8).unwrap();
        let base = KernelContext::new(p).unwrap();
        let doubled = KernelContext::with_settings(
            p,
            ContourOffsets::default_for(p.alpha),
            KernelSettings { s_cutoff: 80.0, s_nodes: 400, ..KernelSettings::default() },
        )
        .unwrap();
        for &(x, y) in &[(0.3, -0.2), (-3.0, 2.0), (5.0, 5.0), (-8.0, -1.0)] {
            for w in [Component::S1, Component::T1] {
                let a = base.component(w, x, y).unwrap();
                let b = doubled.component(w, x, y).unwrap();
                assert!((a - b).abs() < 1e-9, "{w:?}({x},{y}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn q_coefficients_at_one_and_two() {
        let q = QContext::new(TwoTimeParams::from_scaled(0.1, 0.2, -0.1, 0.3, 1.0).unwrap()).unwrap();
        let (v1, v2) = (0.4, 1.1);
        let at1 = q.q_block(Complex64::new(1.0, 0.0), v1, v2).unwrap();
        let m2 = q.q_component(QComponent::M2, v1, v2).unwrap();
        let k7 = q.q_component(QComponent::K7, v1, v2).unwrap();
        assert!((at1[0][0].re + m2).abs() < 1e-14 && at1[0][1].norm() == 0.0);
        assert!((at1[1][0].re + k7).abs() < 1e-14 && at1[1][1].norm() == 0.0);
        let at2 = q.q_block(Complex64::new(2.0, 0.0), v1, v2).unwrap();
        let m1 = q.q_component(QComponent::M1, v1, v2).unwrap();
        assert!((at2[1][1].re + m1 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn q_kernel_reductions() {
        let p = TwoTimeParams::from_scaled(0.3, -0.2, 0.5, 0.4, 0.9).unwrap();
        let q = QContext::new(p).unwrap();
        for &(v1, v2) in &[(0.0, 0.0), (0.7, 2.5), (3.0, 0.4)] {
            let k4 = q.q_component(QComponent::K4, v1, v2).unwrap();
            let want = (-p.delta * v2).exp() * p.alpha / p.alpha_prime
                * crate::airy::deformed_airy(p.xi2, -p.eta2, v1 / p.alpha_prime, p.alpha * v2 / p.alpha_prime).unwrap();
            assert_eq!(k4, want);
            assert!(q.q_component(QComponent::M1, v1, v1).unwrap() >= 0.0);
        }
        // Δη = 0: M3(0,0) = K_Ai(Δξ, Δξ).
        let p = TwoTimeParams::from_increments(1.2, 0.3, 0.1, -0.4, 0.0).unwrap();
        let q = QContext::new(p).unwrap();
        let m3 = q.q_component(QComponent::M3, 0.0, 0.0).unwrap();
        assert!((m3 - airy_kernel(-0.4, -0.4).unwrap()).abs() < 1e-12);
    }
}
