//! Airy function, Airy kernel, the deformed kernel Ai_{ξ,η} and the cubic
//! exponential G_{ξ,η} whose contour integrals reproduce it.
//!
//! Ai is evaluated from its Maclaurin series in double-double arithmetic for
//! |x| ≤ 8.5 and from the classical asymptotic expansions beyond; at the
//! switchover both branches are good to ~1e-14.

use std::f64::consts::PI;

use num::complex::Complex64;

use crate::dd::Dd;
use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result};

/// Ai(0) = 3^{-2/3}/Γ(2/3), as a double-double.
const AI_0: Dd = Dd::new(0.3550280538878172, 2.05233632436212e-17);
/// −Ai′(0) = 3^{-1/3}/Γ(1/3), as a double-double.
const NEG_AIP_0: Dd = Dd::new(0.2588194037928068, -2.522243111610832e-17);

#[derive(Clone, Debug)]
pub struct AiryEvaluator {
    pub series_cutoff: f64,
    pub asymptotic_terms: usize,
    // Coefficients u_k, v_k of the asymptotic expansions.
    u: Vec<f64>,
    v: Vec<f64>,
}

impl Default for AiryEvaluator {
    fn default() -> Self {
        Self::new(8.5, 40)
    }
}

impl AiryEvaluator {
    pub fn new(series_cutoff: f64, asymptotic_terms: usize) -> Self {
        let mut u = vec![1.0];
        let mut v = vec![1.0];
        for k in 1..=asymptotic_terms {
            let kf = k as f64;
            let uk =
                u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
            u.push(uk);
            v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
        }
        AiryEvaluator { series_cutoff, asymptotic_terms, u, v }
    }

    /// (Ai(x), Ai′(x)); NaN in, NaN out.
    pub fn pair(&self, x: f64) -> (f64, f64) {
        if x.is_nan() {
            return (f64::NAN, f64::NAN);
        }
        if x.abs() <= self.series_cutoff {
            series_pair(x)
        } else if x > 0.0 {
            self.asymptotic_positive(x)
        } else {
            self.asymptotic_negative(-x)
        }
    }

    /// Ai(x)·e^{ζ}, ζ = (2/3)x^{3/2}, for x > 0; free of underflow.
    pub fn ai_scaled_positive(&self, x: f64) -> f64 {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        if x <= self.series_cutoff {
            return series_pair(x).0 * zeta.exp();
        }
        let su = alternating_sum(&self.u, zeta, 0, 1);
        su / (2.0 * PI.sqrt() * x.sqrt().sqrt())
    }

    fn asymptotic_positive(&self, x: f64) -> (f64, f64) {
        let zeta = 2.0 / 3.0 * x * x.sqrt();
        let e = (-zeta).exp();
        if e == 0.0 {
            return (0.0, 0.0);
        }
        let su = alternating_sum(&self.u, zeta, 0, 1);
        let sv = alternating_sum(&self.v, zeta, 0, 1);
        let x4 = x.sqrt().sqrt();
        let pre = e / (2.0 * PI.sqrt());
        (pre * su / x4, -pre * x4 * sv)
    }

    fn asymptotic_negative(&self, z: f64) -> (f64, f64) {
        let zeta = 2.0 / 3.0 * z * z.sqrt();
        let (s, c) = (zeta - PI / 4.0).sin_cos();
        let u_even = alternating_sum(&self.u, zeta, 0, 2);
        let u_odd = alternating_sum(&self.u, zeta, 1, 2);
        let v_even = alternating_sum(&self.v, zeta, 0, 2);
        let v_odd = alternating_sum(&self.v, zeta, 1, 2);
        let z4 = z.sqrt().sqrt();
        let ai = (c * u_even + s * u_odd) / (PI.sqrt() * z4);
        let aip = z4 / PI.sqrt() * (s * v_even - c * v_odd);
        (ai, aip)
    }
}

/// Σ_j (−1)^j c_{start+step·j} / ζ^{start+step·j}, truncated at the smallest term.
fn alternating_sum(c: &[f64], zeta: f64, start: usize, step: usize) -> f64 {
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    let mut sign = 1.0;
    let mut k = start;
    while k < c.len() {
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > last {
            break;
        }
        sum += sign * term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        last = term.abs();
        sign = -sign;
        k += step;
    }
    sum
}

fn series_pair(x: f64) -> (f64, f64) {
    let xd = Dd::from_f64(x);
    let x3 = xd * xd * xd;
    let small = |t: Dd, s: Dd| t.abs_hi() <= 1e-34 * s.abs_hi().max(1e-300);

    // f = Σ x^{3k}/(...), g = x Σ ..., and their derivatives, each by term ratios.
    let (mut f, mut t) = (Dd::from_f64(1.0), Dd::from_f64(1.0));
    let (mut g, mut tg) = (xd, xd);
    let (mut fp, mut tfp) = (Dd::from_f64(0.0), xd * xd.div_f64(2.0));
    let (mut gp, mut tgp) = (Dd::from_f64(1.0), Dd::from_f64(1.0));
    fp = fp + tfp;
    for k in 1..400 {
        let kf = k as f64;
        t = (t * x3).div_f64((3.0 * kf - 1.0) * (3.0 * kf));
        tg = (tg * x3).div_f64((3.0 * kf) * (3.0 * kf + 1.0));
        tgp = (tgp * x3).div_f64((3.0 * kf) * (3.0 * kf - 2.0));
        if k >= 2 {
            tfp = (tfp * x3).div_f64((3.0 * kf - 3.0) * (3.0 * kf - 1.0));
            fp = fp + tfp;
        }
        f = f + t;
        g = g + tg;
        gp = gp + tgp;
        if k >= 2 && small(t, f) && small(tg, g) && small(tfp, fp) && small(tgp, gp) {
            break;
        }
    }
    let ai = AI_0 * f - NEG_AIP_0 * g;
    let aip = AI_0 * fp - NEG_AIP_0 * gp;
    (ai.to_f64(), aip.to_f64())
}

thread_local! {
    static DEFAULT_EVALUATOR: AiryEvaluator = AiryEvaluator::default();
}

/// (Ai(x), Ai′(x)) with the default evaluator; NaN propagates.
pub fn airy_pair_unchecked(x: f64) -> (f64, f64) {
    DEFAULT_EVALUATOR.with(|e| e.pair(x))
}

pub fn airy_pair(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() {
        return Err(Error::domain("Airy function of NaN"));
    }
    Ok(airy_pair_unchecked(x))
}

pub fn airy_ai(x: f64) -> Result<f64> {
    airy_pair(x).map(|p| p.0)
}

pub fn airy_ai_prime(x: f64) -> Result<f64> {
    airy_pair(x).map(|p| p.1)
}

/// K_Ai(x, y) from precomputed (Ai, Ai′) at x and y, Christoffel–Darboux form.
#[inline]
pub fn airy_kernel_from_pairs(x: f64, px: (f64, f64), y: f64, py: (f64, f64)) -> f64 {
    let h = y - x;
    if h.abs() < 1e-4 {
        // Taylor expansion about the diagonal avoids the 0/0 cancellation.
        let (a, ap) = px;
        let diag = ap * ap - x * a * a;
        return diag - 0.5 * a * a * h - (a * ap + x * x * a * a - x * ap * ap) * h * h / 6.0;
    }
    (px.0 * py.1 - px.1 * py.0) / (x - y)
}

/// K_Ai(x, y) in closed form, (Ai(x)Ai′(y) − Ai′(x)Ai(y))/(x − y).
pub fn airy_kernel_closed(x: f64, y: f64) -> Result<f64> {
    Ok(airy_kernel_from_pairs(x, airy_pair(x)?, y, airy_pair(y)?))
}

/// K_Ai(x, y) = ∫₀^∞ Ai(x+s)Ai(y+s) ds by panel Gauss–Legendre quadrature.
pub fn airy_kernel(x: f64, y: f64) -> Result<f64> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(Error::domain("Airy kernel at a non-finite point"));
    }
    let low = x.min(y);
    if low < -100.0 {
        return Err(Error::accuracy(
            format!("Airy kernel quadrature at ({x}, {y}) is outside the supported range"),
            f64::NAN,
        ));
    }
    let (nodes, weights) = gauss_legendre_on(0.0, 1.0, 20);
    let mut total = 0.0;
    let mut start = 0.0;
    for _ in 0..1000 {
        let panel: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(s, w)| {
                let s = start + s;
                w * airy_pair_unchecked(x + s).0 * airy_pair_unchecked(y + s).0
            })
            .sum();
        total += panel;
        start += 1.0;
        if low + start > 4.0 && panel.abs() <= 1e-18 * total.abs().max(1e-300) {
            return Ok(total);
        }
    }
    Err(Error::accuracy("Airy kernel quadrature did not converge", total))
}

/// Ai_{ξ,η}(x, y) = Ai(ξ+η²+x+y)·exp((ξ+x+y)η + (2/3)η³); may overflow to ±inf.
///
/// For a positive Airy argument the decay e^{−ζ} is folded into the exponent,
/// so large η does not underflow Ai before the exponential can compensate.
#[inline]
pub fn deformed_airy_unchecked(xi: f64, eta: f64, x: f64, y: f64) -> f64 {
    let s = x + y;
    let arg = xi + eta * eta + s;
    let exponent = (xi + s) * eta + 2.0 / 3.0 * eta.powi(3);
    if arg > 0.0 {
        let zeta = 2.0 / 3.0 * arg * arg.sqrt();
        let e = exponent - zeta;
        if e < -745.0 {
            return 0.0;
        }
        DEFAULT_EVALUATOR.with(|ev| ev.ai_scaled_positive(arg)) * e.exp()
    } else {
        airy_pair_unchecked(arg).0 * exponent.exp()
    }
}

pub fn deformed_airy(xi: f64, eta: f64, x: f64, y: f64) -> Result<f64> {
    let v = deformed_airy_unchecked(xi, eta, x, y);
    if v.is_nan() {
        return Err(Error::domain("Ai_{ξ,η} at a non-finite point"));
    }
    if v.is_infinite() {
        return Err(Error::Overflow {
            what: format!("Ai_{{{xi},{eta}}}({x},{y})"),
            log_magnitude: (xi + x + y) * eta + 2.0 / 3.0 * eta.powi(3),
        });
    }
    Ok(v)
}

/// G_{ξ,η}(z) = exp(z³/3 + ηz² − ξz).
pub fn g_exponential(xi: f64, eta: f64, z: Complex64) -> Complex64 {
    (z * z * z / 3.0 + eta * z * z - xi * z).exp()
}

/// Residuals of the two contour identities for Ai_{ξ,η}:
/// (1/2πi)∫_{Γ_D} G_{ξ,η}(z)dz = Ai_{ξ,η}(0,0) and
/// (1/2πi)∫_{Γ_{−d}} dw/G_{ξ,η}(w) = Ai_{ξ,−η}(0,0).
pub fn verify_airy_contour(xi: f64, eta: f64, big_d: f64, d: f64, nodes: usize) -> Result<(f64, f64)> {
    use crate::contour::{Contour, VerticalLine};
    if big_d <= 0.0 || d <= 0.0 {
        return Err(Error::domain("contour offsets must be positive"));
    }
    // G decays like e^{−(D+η)t²} on Γ_D, and 1/G like e^{−(d−η)t²} on Γ_{−d}.
    let up = VerticalLine::for_gaussian_decay(big_d, big_d + eta, nodes)?;
    let down = VerticalLine::for_gaussian_decay(-d, d - eta, nodes)?;
    let forward: Complex64 = up.nodes()?.into_iter().map(|(z, w)| w * g_exponential(xi, eta, z)).sum();
    let backward: Complex64 = down.nodes()?.into_iter().map(|(z, w)| w / g_exponential(xi, eta, z)).sum();
    let r1 = (forward - deformed_airy(xi, eta, 0.0, 0.0)?).norm();
    let r2 = (backward - deformed_airy(xi, -eta, 0.0, 0.0)?).norm();
    Ok((r1, r2))
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    // 17-digit reference values (Ai, Ai′).
    const TABLE: &[(f64, f64, f64)] = &[
        (-15.0, 0.27821749087082893, 0.27237420430864202),
        (-10.0, 0.040241238486443191, 0.99626504413279006),
        (-5.5, 0.017781541276574976, 0.86419721777139839),
        (-2.0, 0.22740742820168558, 0.61825902074169104),
        (-1.0, 0.53556088329235212, -0.010160567116645209),
        (-0.5, 0.47572809161053959, -0.20408167033954739),
        (0.0, 0.35502805388781724, -0.2588194037928068),
        (0.5, 0.23169360648083349, -0.22491053266468389),
        (1.0, 0.13529241631288142, -0.15914744129679321),
        (2.0, 0.034924130423274379, -0.053090384433653632),
        (3.7, 0.0017455720006099785, -0.0034669407490276271),
        (5.0, 0.00010834442813607442, -0.00024741389086846248),
        (5.5, 3.3685311908599814e-5, -8.0463391305565143e-5),
        (8.4, 1.4749354994719203e-8, -4.3176027504858687e-8),
        (8.6, 8.1855061513456326e-9, -2.4236992122415341e-8),
        (10.0, 1.1047532552898686e-10, -3.5206336767389236e-10),
        (15.0, 2.1649625207379923e-18, -8.4205679540177728e-18),
        (20.0, 1.6916728686705403e-27, -7.586391625748355e-27),
        (30.0, 3.2082175915504956e-49, -1.759876581432726e-48),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, ai, aip) in TABLE {
            let (a, ap) = airy_pair(x).unwrap();
            assert!(((a - ai) / ai).abs() < 1e-12, "Ai({x}) = {a}, want {ai}");
            assert!(((ap - aip) / aip).abs() < 1e-12, "Ai'({x}) = {ap}, want {aip}");
        }
    }

    #[test]
    fn value_at_zero_and_first_zero() {
        let c = 1.0 / (3f64.powf(2.0 / 3.0) * 1.3541179394264004169);
        assert!((airy_ai(0.0).unwrap() - c).abs() < 1e-15);
        assert!(airy_ai(-2.338107410459767).unwrap().abs() < 1e-10);
    }

    #[test]
    fn decay_envelope_and_underflow() {
        let a = airy_ai(10.0).unwrap();
        assert!(a > 0.0 && a < (-(2.0 / 3.0) * 10f64.powf(1.5)).exp());
        assert_eq!(airy_ai(200.0).unwrap(), 0.0);
        assert!(airy_ai(f64::NAN).is_err());
    }

    #[test]
    fn continuous_across_switchover() {
        let e = AiryEvaluator::default();
        for sign in [-1.0, 1.0] {
            for k in 0..20 {
                let x = sign * (e.series_cutoff - 0.05 + 0.005 * k as f64);
                let s = series_pair(x);
                let a = if x > 0.0 { e.asymptotic_positive(x) } else { e.asymptotic_negative(-x) };
                assert!((s.0 - a.0).abs() < 1e-12 * s.0.abs().max(1e-3), "Ai at {x}: {s:?} {a:?}");
                assert!((s.1 - a.1).abs() < 1e-12 * s.1.abs().max(1e-3), "Ai' at {x}");
            }
        }
    }

    #[test]
    fn airy_ode_residual() {
        let h = 0.005;
        let mut x = -8.0;
        while x <= 8.0 {
            let f = |t: f64| airy_ai(t).unwrap();
            let d2 =
                (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h)) / (12.0 * h * h);
            assert!((d2 - x * f(x)).abs() < 1e-8, "x={x}");
            x += 0.1;
        }
    }

    #[test]
    fn kernel_quadrature_and_closed_form_agree() {
        let ap0 = airy_ai_prime(0.0).unwrap();
        assert!((airy_kernel(0.0, 0.0).unwrap() - ap0 * ap0).abs() < 1e-13);
        assert!(airy_kernel(8.0, 8.0).unwrap() < 1e-10);
        for &(x, y) in &[(0.3, -1.2), (-5.0, -4.5), (2.0, 2.00001), (-12.0, 1.0), (-3.0, -3.0), (6.0, -2.0)] {
            let q = airy_kernel(x, y).unwrap();
            let c = airy_kernel_closed(x, y).unwrap();
            assert!((q - c).abs() < 1e-12, "K({x},{y}): {q} vs {c}");
            assert!((airy_kernel(y, x).unwrap() - q).abs() < 1e-15);
        }
    }

    #[test]
    fn deformed_airy_reductions() {
        assert!((deformed_airy(0.4, 0.0, 0.1, 0.2).unwrap() - airy_ai(0.7).unwrap()).abs() < 1e-16);
        assert_eq!(deformed_airy(0.4, 0.3, 0.1, 0.2).unwrap(), deformed_airy(0.4, 0.3, 0.2, 0.1).unwrap());
        assert!(matches!(deformed_airy(0.0, -30.0, -950.0, 0.0), Err(Error::Overflow { .. })));
        // Ai(144) underflows on its own; the scaled form keeps the O(1) product.
        let direct = airy_ai(1.0).unwrap() * (2.0 / 3.0f64).exp();
        assert!((deformed_airy(0.0, 1.0, 0.0, 0.0).unwrap() - direct).abs() < 1e-15);
        let big = deformed_airy(0.0, 12.0, 0.0, 0.0).unwrap();
        assert!(big.is_finite() && big > 0.0);
    }

    #[test]
    fn g_exponential_basics() {
        assert_eq!(g_exponential(0.3, -0.2, Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let z = Complex64::new(0.7, -1.3);
        let (a, b) = (g_exponential(0.5, 0.4, z.conj()), g_exponential(0.5, 0.4, z).conj());
        assert!((a - b).norm() < 1e-14 * a.norm());
        assert!((g_exponential(0.0, 0.0, Complex64::new(0.0, 2.5)).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn contour_identity_matches_closed_form() {
        use crate::contour::{Contour, VerticalLine};
        let line = VerticalLine::for_gaussian_decay(1.0, 1.3, 200).unwrap();
        let v: Complex64 =
            line.nodes().unwrap().into_iter().map(|(z, w)| w * g_exponential(0.0 + 0.2 - 0.1, 0.3, z)).sum();
        assert!((v.re - deformed_airy(0.0, 0.3, 0.2, -0.1).unwrap()).abs() < 1e-8);
        assert!(v.im.abs() < 1e-10);
        for big_d in [0.5, 1.0, 2.0] {
            let (r1, r2) = verify_airy_contour(0.0, 0.0, big_d, big_d, 200).unwrap();
            assert!(r1 < 1e-8 && r2 < 1e-8, "D={big_d}: {r1} {r2}");
        }
        let (r1, r2) = verify_airy_contour(1.0, 0.5, 1.0, 1.0, 200).unwrap();
        assert!(r1 < 1e-8 && r2 < 1e-8);
    }
}
