//! Quadrature rules for (1/2πi)∫ f(z) dz along the contours used in the
//! Airy-type integral representations.
//!
//! Every rule returns pairs (z_k, ω_k) with Σ ω_k f(z_k) ≈ (1/2πi)∫ f(z) dz,
//! so the 1/2πi normalization and the orientation live in the weights.

use std::f64::consts::PI;

use num::complex::Complex64;

use crate::quadrature::gauss_legendre_on;
use crate::{Error, Result};

pub trait Contour {
    fn nodes(&self) -> Result<Vec<(Complex64, Complex64)>>;
}

/// Γ_c: the upward vertical line through `anchor`, truncated to |Im z| ≤ half_length,
/// trapezoid rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerticalLine {
    pub anchor: f64,
    pub node_count: usize,
    pub half_length: f64,
}

impl VerticalLine {
    /// Truncation chosen for an integrand decaying like e^{−rate·t²}.
    pub fn for_gaussian_decay(anchor: f64, rate: f64, node_count: usize) -> Result<Self> {
        if rate <= 0.0 {
            return Err(Error::Contour(format!(
                "integrand does not decay along the line Re z = {anchor} (rate {rate})"
            )));
        }
        Ok(VerticalLine { anchor, node_count, half_length: (42.0 / rate).sqrt() })
    }
}

impl Contour for VerticalLine {
    fn nodes(&self) -> Result<Vec<(Complex64, Complex64)>> {
        check_count(self.node_count)?;
        let n = self.node_count;
        let h = 2.0 * self.half_length / (n - 1) as f64;
        Ok((0..n)
            .map(|k| {
                let t = -self.half_length + h * k as f64;
                let end = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
                // dz = i dt, so dz/(2πi) = dt/(2π).
                (Complex64::new(self.anchor, t), Complex64::new(end * h / (2.0 * PI), 0.0))
            })
            .collect())
    }
}

/// Positively oriented circle, trapezoid rule at angles 2π(k + ½)/n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
    pub node_count: usize,
}

impl Contour for Circle {
    fn nodes(&self) -> Result<Vec<(Complex64, Complex64)>> {
        check_count(self.node_count)?;
        if !(self.radius > 0.0) {
            return Err(Error::Contour(format!("radius {} must be positive", self.radius)));
        }
        let n = self.node_count as f64;
        Ok((0..self.node_count)
            .map(|k| {
                let e = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / n);
                // dz = i r e^{iθ} dθ, so dz/(2πi) = r e^{iθ} dθ/(2π).
                (self.center + self.radius * e, self.radius * e / n)
            })
            .collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Opening {
    /// Rays at ±π/3, where e^{z³/3} decays.
    Right,
    /// Rays at ±2π/3, where e^{−z³/3} decays.
    Left,
}

/// Two rays from a real vertex, traversed upward, with Gauss–Legendre on each.
/// Homotopic to the vertical line through the vertex for integrands that decay
/// in the opening's sector, but convergent regardless of the quadratic term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wedge {
    pub vertex: f64,
    pub opening: Opening,
    pub length: f64,
    pub nodes_per_ray: usize,
}

impl Wedge {
    pub fn right(vertex: f64) -> Self {
        Wedge { vertex, opening: Opening::Right, length: 8.0, nodes_per_ray: 64 }
    }

    pub fn left(vertex: f64) -> Self {
        Wedge { vertex, opening: Opening::Left, length: 8.0, nodes_per_ray: 64 }
    }
}

impl Contour for Wedge {
    fn nodes(&self) -> Result<Vec<(Complex64, Complex64)>> {
        check_count(2 * self.nodes_per_ray)?;
        let theta = match self.opening {
            Opening::Right => PI / 3.0,
            Opening::Left => 2.0 * PI / 3.0,
        };
        let up = Complex64::from_polar(1.0, theta);
        let down = up.conj();
        let two_pi_i = Complex64::new(0.0, 2.0 * PI);
        let (s, w) = gauss_legendre_on(0.0, self.length, self.nodes_per_ray);
        let mut out = Vec::with_capacity(2 * s.len());
        // Incoming along the lower ray, then outgoing along the upper ray.
        for (s, w) in s.iter().zip(&w).rev() {
            out.push((self.vertex + s * down, -down * *w / two_pi_i));
        }
        for (s, w) in s.iter().zip(&w) {
            out.push((self.vertex + s * up, up * *w / two_pi_i));
        }
        Ok(out)
    }
}

fn check_count(n: usize) -> Result<()> {
    if n < 8 || n % 2 == 1 {
        return Err(Error::Contour(format!("node count {n} must be even and at least 8")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airy::{deformed_airy, g_exponential};

    fn integrate(c: &dyn Contour, f: impl Fn(Complex64) -> Complex64) -> Complex64 {
        c.nodes().unwrap().into_iter().map(|(z, w)| w * f(z)).sum()
    }

    #[test]
    fn circle_picks_up_residues() {
        let c = Circle { center: Complex64::new(0.0, 0.0), radius: 2.0, node_count: 32 };
        let v = integrate(&c, |u| 1.0 / (u - 1.0));
        assert!((v - 1.0).norm() < 1e-9);
        let v = integrate(&c, |u| u * u);
        assert!(v.norm() < 1e-14);
    }

    #[test]
    fn wedges_reproduce_airy_where_lines_diverge() {
        // η = −2 makes e^{ηz²} grow along any line Re z < 2.
        for &(xi, eta) in &[(0.0, 0.0), (0.5, -2.0), (-1.0, 1.5)] {
            let v = integrate(&Wedge::right(0.7), |z| g_exponential(xi, eta, z));
            assert!((v.re - deformed_airy(xi, eta, 0.0, 0.0).unwrap()).abs() < 1e-12, "{xi} {eta}");
            assert!(v.im.abs() < 1e-12);
            let v = integrate(&Wedge::left(-0.7), |z| 1.0 / g_exponential(xi, eta, z));
            assert!((v.re - deformed_airy(xi, -eta, 0.0, 0.0).unwrap()).abs() < 1e-12, "{xi} {eta}");
        }
    }

    #[test]
    fn rejects_bad_node_counts() {
        let c = Circle { center: Complex64::new(0.0, 0.0), radius: 1.0, node_count: 7 };
        assert!(c.nodes().is_err());
        assert!(VerticalLine::for_gaussian_decay(1.0, -0.5, 100).is_err());
    }
}
