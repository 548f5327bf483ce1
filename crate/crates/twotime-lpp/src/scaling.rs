//! Constants and coordinate maps between lattice quantities (m, n, a, …) and
//! KPZ-scaled quantities (ξ, η, t, T).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default δ margin above max(η1, αΔη, 0).
pub const DEFAULT_DELTA_MARGIN: f64 = 1.0;
/// δ is kept below this when possible, to limit e^{δ·cutoff} dynamic range.
pub const DELTA_CAP: f64 = 6.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingConstants {
    pub q: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
}

pub fn compute_constants(q: f64) -> Result<ScalingConstants> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("q = {q} must lie in (0, 1)")));
    }
    let r = q.sqrt();
    Ok(ScalingConstants {
        q,
        c0: q.powf(-1.0 / 3.0) * (1.0 + r).cbrt(),
        c1: q.powf(-1.0 / 6.0) * (1.0 + r).powf(2.0 / 3.0),
        c2: 2.0 * r / (1.0 - r),
        c3: q.powf(1.0 / 6.0) * (1.0 + r).cbrt() / (1.0 - r),
        c4: q.cbrt() * (1.0 - r) / (1.0 + r).cbrt(),
    })
}

/// Scaled two-time coordinates. Only Δt = t2 − t1 ratios matter, so the
/// reduced constructors normalize Δt = 1, i.e. t1 = α³, t2 = α′³.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeParams {
    pub t1: f64,
    pub t2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub delta_eta: f64,
    pub delta_xi: f64,
    pub delta: f64,
}

pub fn derived_params(t1: f64, t2: f64, eta1: f64, eta2: f64, xi1: f64, xi2: f64) -> Result<TwoTimeParams> {
    if !(t1 > 0.0 && t2 > t1) {
        return Err(Error::domain(format!("need 0 < t1 < t2, got t1={t1}, t2={t2}")));
    }
    let dt = t2 - t1;
    let alpha = (t1 / dt).cbrt();
    let alpha_prime = (t2 / dt).cbrt();
    let mut p = TwoTimeParams {
        t1,
        t2,
        eta1,
        eta2,
        xi1,
        xi2,
        alpha,
        alpha_prime,
        delta_eta: eta2 * alpha_prime * alpha_prime - eta1 * alpha * alpha,
        delta_xi: xi2 * alpha_prime - xi1 * alpha,
        delta: f64::NAN,
    };
    p.delta = choose_delta(&p, DEFAULT_DELTA_MARGIN);
    Ok(p)
}

impl TwoTimeParams {
    /// From (ξ1, η1, ξ2, η2) and α = (t1/Δt)^{1/3}.
    pub fn from_scaled(xi1: f64, eta1: f64, xi2: f64, eta2: f64, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("α = {alpha} must be positive")));
        }
        let t1 = alpha.powi(3);
        derived_params(t1, t1 + 1.0, eta1, eta2, xi1, xi2)
    }

    /// From α and the increments (Δξ, Δη) instead of (ξ2, η2).
    pub fn from_increments(alpha: f64, xi1: f64, eta1: f64, delta_xi: f64, delta_eta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!("α = {alpha} must be positive")));
        }
        let ap = (1.0 + alpha.powi(3)).cbrt();
        let xi2 = (alpha * xi1 + delta_xi) / ap;
        let eta2 = (alpha * alpha * eta1 + delta_eta) / (ap * ap);
        let mut p = Self::from_scaled(xi1, eta1, xi2, eta2, alpha)?;
        // Keep the increments bit-exact rather than recomputed.
        p.delta_xi = delta_xi;
        p.delta_eta = delta_eta;
        p.delta = choose_delta(&p, DEFAULT_DELTA_MARGIN);
        Ok(p)
    }

    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        let floor = self.eta1.max(self.alpha * self.delta_eta);
        if !(delta > floor && delta > 0.0) {
            return Err(Error::domain(format!("δ = {delta} must be positive and exceed max(η1, αΔη) = {floor}")));
        }
        self.delta = delta;
        Ok(self)
    }

    pub fn with_delta_margin(self, margin: f64) -> Result<Self> {
        if !(margin > 0.0) {
            return Err(Error::domain(format!("δ margin {margin} must be positive")));
        }
        let d = choose_delta(&self, margin);
        self.with_delta(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.with_delta(self.delta).map(|_| ())
    }
}

/// δ = max(η1, αΔη, 0) + margin, pulled below [`DELTA_CAP`] when that keeps it admissible.
pub fn choose_delta(params: &TwoTimeParams, margin: f64) -> f64 {
    let base = params.eta1.max(params.alpha * params.delta_eta).max(0.0);
    let delta = base + margin;
    if delta > DELTA_CAP && base < DELTA_CAP {
        0.5 * (base + DELTA_CAP)
    } else {
        delta
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteTarget {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub a: i64,
    #[serde(rename = "A")]
    pub big_a: i64,
}

impl DiscreteTarget {
    pub fn new(m: usize, n: usize, big_m: usize, big_n: usize, a: i64, big_a: i64) -> Result<Self> {
        if m < 1 || n < 1 || m >= big_m || n >= big_n {
            return Err(Error::domain(format!(
                "need 1 ≤ m < M and 1 ≤ n < N, got (m,n,M,N) = ({m},{n},{big_m},{big_n})"
            )));
        }
        Ok(DiscreteTarget { m, n, big_m, big_n, a, big_a })
    }
}

/// Lattice target for the event {H_T(η1,t1) ≤ ξ1, H_T(η2,t2) ≤ ξ2}.
#[allow(clippy::too_many_arguments)]
pub fn map_parameters(
    q: f64,
    big_t: f64,
    t1: f64,
    t2: f64,
    eta1: f64,
    eta2: f64,
    xi1: f64,
    xi2: f64,
) -> Result<DiscreteTarget> {
    let c = compute_constants(q)?;
    if !(t1 > 0.0 && t2 > t1 && big_t > 0.0) {
        return Err(Error::domain(format!("need 0 < t1 < t2 and T > 0, got t1={t1}, t2={t2}, T={big_t}")));
    }
    let side = |t: f64, eta: f64, xi: f64| {
        let k = t * big_t;
        let n = (k - c.c1 * eta * k.powf(2.0 / 3.0)).round_ties_even();
        let m = (k + c.c1 * eta * k.powf(2.0 / 3.0)).round_ties_even();
        let a = (c.c2 * k + c.c3 * xi * k.cbrt()).round_ties_even();
        (m, n, a)
    };
    let (m, n, a) = side(t1, eta1, xi1);
    let (big_m, big_n, big_a) = side(t2, eta2, xi2);
    if m < 1.0 || n < 1.0 || m >= big_m || n >= big_n {
        return Err(Error::ScaleTooSmall(format!("T = {big_t} rounds to (m,n,M,N) = ({m},{n},{big_m},{big_n})")));
    }
    Ok(DiscreteTarget {
        m: m as usize,
        n: n as usize,
        big_m: big_m as usize,
        big_n: big_n as usize,
        a: a as i64,
        big_a: big_a as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constants_at_quarter() {
        let c = compute_constants(0.25).unwrap();
        assert!((c.c2 - 2.0).abs() < 1e-15);
        assert!((c.c0 - 6f64.cbrt()).abs() < 1e-14);
        assert!((c.c0 - 1.817121).abs() < 1e-6);
        assert!(compute_constants(1.0).is_err() && compute_constants(0.0).is_err());
    }

    #[test]
    fn lattice_targets() {
        let t = map_parameters(0.25, 100.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!((t.m, t.n, t.a), (100, 100, 200));
        assert_eq!((t.big_m, t.big_n, t.big_a), (200, 200, 400));
        // T so small that both times round to the same point.
        assert!(matches!(map_parameters(0.25, 0.2, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0), Err(Error::ScaleTooSmall(_))));
    }

    #[test]
    fn alpha_at_unit_ratio() {
        let p = derived_params(1.0, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(p.alpha, 1.0);
        assert!((p.alpha_prime - 1.259921).abs() < 1e-6);
        assert_eq!((p.delta_eta, p.delta_xi), (0.0, 0.0));
        assert!(derived_params(2.0, 2.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn delta_examples() {
        let mut p = derived_params(1.0, 2.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(choose_delta(&p, 1.0), 1.0);
        p.eta1 = 1.0;
        p.delta_eta = -2.0;
        assert_eq!(choose_delta(&p, 0.5), 1.5);
        p.eta1 = -3.0;
        p.alpha = 2.0;
        p.delta_eta = 1.0;
        assert_eq!(choose_delta(&p, 1.0), 3.0);
    }

    proptest! {
        #[test]
        fn constants_identities(q in 0.001f64..0.999) {
            let c = compute_constants(q).unwrap();
            let r = q.sqrt();
            prop_assert!((c.c3 / c.c0 - r / (1.0 - r)).abs() <= 1e-12 * (r / (1.0 - r)));
            prop_assert!(c.c0 > 0.0 && c.c1 > 0.0 && c.c2 > 0.0 && c.c3 > 0.0 && c.c4 > 0.0);
            prop_assert_eq!(c, compute_constants(q).unwrap());
        }

        #[test]
        fn increments_recompose(t1 in 0.05f64..5.0, dt in 0.05f64..5.0,
                                e1 in -2.0f64..2.0, e2 in -2.0f64..2.0,
                                x1 in -3.0f64..3.0, x2 in -3.0f64..3.0) {
            let p = derived_params(t1, t1 + dt, e1, e2, x1, x2).unwrap();
            prop_assert!((p.alpha_prime.powi(3) - p.alpha.powi(3) - 1.0).abs() < 1e-12 * p.alpha_prime.powi(3));
            prop_assert!((p.alpha_prime * p.xi2 - p.alpha * p.xi1 - p.delta_xi).abs() < 1e-12);
            prop_assert!((p.alpha_prime.powi(2) * p.eta2 - p.alpha.powi(2) * p.eta1 - p.delta_eta).abs() < 1e-12);
            prop_assert!(p.delta > p.eta1.max(p.alpha * p.delta_eta));
        }
    }
}
