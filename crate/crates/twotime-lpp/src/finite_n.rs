//! Exact finite-size two-point probabilities
//!
//!   P(a, A) = P[G(m,n) < a, G(M,N) < A]
//!
//! from the N×N determinantal formula: negative-binomial weights and their
//! finite differences, the β coefficients, f01/f12 and the matrices L1, L2,
//! with the u-integral taken as a sum of Laurent coefficients. Everything is
//! exact rational arithmetic; an f64 path extracts the same coefficients
//! numerically as a cross-check.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::complex::Complex64;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contour::{Circle, Contour};
use crate::lpp_sim::{mc_rows_from, McEstimate};
use crate::scaling::compute_constants;
use crate::{Error, Result};

pub type Rational = BigRational;

fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses "1/2", "0.25" or "3" exactly.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::domain(format!("cannot parse {s:?} as a rational number"));
    if let Some((num, den)) = s.split_once('/') {
        let num: BigInt = num.trim().parse().map_err(|_| bad())?;
        let den: BigInt = den.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.chars().any(|c| !c.is_ascii_digit()) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let negative = int.starts_with('-');
    let digits = format!("{}{frac}", int.trim_start_matches(['-', '+']));
    let mag: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    let value = Rational::new(mag, num::pow(BigInt::from(10), frac.len()));
    Ok(if negative { -value } else { value })
}

/// q ∈ (0,1) from an f64, converted exactly.
pub fn rational_from_f64(q: f64) -> Result<Rational> {
    Rational::from_float(q).ok_or_else(|| Error::domain(format!("q = {q} is not finite")))
}

fn check_q(q: &Rational) -> Result<()> {
    if !(q.is_positive() && *q < Rational::one()) {
        return Err(Error::domain(format!("q = {q} must lie in (0, 1)")));
    }
    Ok(())
}

fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for t in 0..k {
        c = c * BigInt::from(n - t) / BigInt::from(t + 1);
    }
    c
}

/// Coefficient of ζ^r in (1−ζ)^{−p} for any integer p: p(p+1)…(p+r−1)/r!.
fn rising_coefficient(p: i64, r: i64) -> Rational {
    let mut c = Rational::one();
    for t in 0..r {
        c = c * rat(p + t) / rat(t + 1);
    }
    c
}

/// w_m(x) on 0..=x_max with Δ^j w_m read off the table.
#[derive(Clone, Debug)]
struct WeightTable {
    w: Vec<Rational>,
}

impl WeightTable {
    fn new(m: usize, q: &Rational, x_max: i64) -> Self {
        let one = Rational::one();
        let mut w = Vec::with_capacity(x_max.max(0) as usize + 1);
        let mut cur = num::pow(&one - q, m);
        for x in 0..=x_max.max(0) {
            w.push(cur.clone());
            // w(x+1) = w(x)·q·(x+m)/(x+1)
            cur = cur * q * rat(x + m as i64) / rat(x + 1);
        }
        WeightTable { w }
    }

    fn w(&self, x: i64) -> Rational {
        if x < 0 {
            return Rational::zero();
        }
        self.w.get(x as usize).cloned().expect("weight table too short")
    }

    /// Δ^j w(x): forward differences for j ≥ 0, Δ^{−k}w(x) = Σ_{y<x} C(x−y−1, k−1) w(y).
    fn diff(&self, j: i64, x: i64) -> Rational {
        if j >= 0 {
            (0..=j)
                .map(|i| {
                    let c = Rational::from_integer(binomial(j, i));
                    let term = c * self.w(x + i);
                    if (j - i) % 2 == 0 {
                        term
                    } else {
                        -term
                    }
                })
                .fold(Rational::zero(), |a, b| a + b)
        } else {
            (0..x)
                .map(|y| Rational::from_integer(binomial(x - y - 1, -j - 1)) * self.w(y))
                .fold(Rational::zero(), |a, b| a + b)
        }
    }
}

/// (1−q)^m C(x+m−1, x) q^x for x ≥ 0, else 0.
pub fn negbinom_weight(m: usize, q: &Rational, x: i64) -> Result<Rational> {
    check_q(q)?;
    if m == 0 {
        return Err(Error::domain("negative-binomial order m must be ≥ 1"));
    }
    Ok(WeightTable::new(m, q, x).w(x))
}

/// Δ^j w_m(x) for any integer j.
pub fn finite_difference_weight(j: i64, m: usize, q: &Rational, x: i64) -> Result<Rational> {
    check_q(q)?;
    if m == 0 {
        return Err(Error::domain("negative-binomial order m must be ≥ 1"));
    }
    Ok(WeightTable::new(m, q, x + j.max(0)).diff(j, x))
}

/// Δ^j w_m(x) = (−1)^{j−1}(1/2πi)∮_{|z|=r} z^j(1−z)^{x+m}(1−z/(1−q))^{−m} dz/(1−z), r > 1.
pub fn finite_difference_contour(j: i64, m: usize, q: f64, x: i64, r: f64, nodes: usize) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::Contour(format!("radius {r} must exceed 1")));
    }
    if !(q > 0.0 && q < 1.0) || m == 0 {
        return Err(Error::domain(format!("q = {q}, m = {m}")));
    }
    let circle = Circle { center: Complex64::new(0.0, 0.0), radius: r, node_count: nodes };
    let one = Complex64::new(1.0, 0.0);
    let s: Complex64 = circle
        .nodes()?
        .into_iter()
        .map(|(z, w)| {
            let h = z.powi(j as i32) * (one - z).powi((x + m as i64) as i32) / (one - z / (1.0 - q)).powi(m as i32);
            w * h / (one - z)
        })
        .sum();
    let sign = if (j - 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(sign * s.re)
}

/// β_k^ε(m,a): the ζ^{−k} Taylor coefficient of (1−ζ/(1−q))^m (1−ζ)^{−(a+m−ε)}.
pub fn beta_coeff(k: i64, eps: u8, m: usize, a: i64, q: &Rational) -> Result<Rational> {
    check_q(q)?;
    if eps > 1 || m == 0 {
        return Err(Error::domain(format!("β needs ε ∈ {{0,1}} and m ≥ 1, got ε={eps}, m={m}")));
    }
    if k > 0 {
        return Ok(Rational::zero());
    }
    let big_k = -k;
    let p = a + m as i64 - eps as i64;
    let ratio = -(Rational::one() / (Rational::one() - q));
    let mut total = Rational::zero();
    for i in 0..=big_k.min(m as i64) {
        total += Rational::from_integer(binomial(m as i64, i))
            * num::pow(ratio.clone(), i as usize)
            * rising_coefficient(p, big_k - i);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteCase {
    #[serde(with = "rational_string")]
    pub q: Rational,
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

mod rational_string {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&q.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

impl FiniteCase {
    pub fn new(q: Rational, m: usize, n: usize, big_m: usize, big_n: usize, a: i64, big_a: i64) -> Result<Self> {
        check_q(&q)?;
        if m < 1 || n < 1 || m >= big_m || n >= big_n {
            return Err(Error::domain(format!(
                "need 1 ≤ m < M and 1 ≤ n < N, got (m,n,M,N) = ({m},{n},{big_m},{big_n})"
            )));
        }
        if a < 0 || big_a < 0 {
            return Err(Error::domain(format!("a = {a}, A = {big_a} must be ≥ 0")));
        }
        Ok(FiniteCase { q, m, n, big_m, big_n, a, big_a })
    }

    pub fn delta_m(&self) -> usize {
        self.big_m - self.m
    }

    pub fn delta_a(&self) -> i64 {
        self.big_a - self.a
    }
}

/// f01, f12 and the triangular factors A = (β¹_{k−i}(m,a)), B = (β⁰_{j−k}(Δm,Δa)).
#[derive(Clone, Debug)]
pub struct FFunctions {
    case: FiniteCase,
    conj: Rational,
    w_first: WeightTable,
    w_second: WeightTable,
    pub a_matrix: Vec<Vec<Rational>>,
    pub b_matrix: Vec<Vec<Rational>>,
}

impl FFunctions {
    /// With conjugation c(i) = conj^i; the determinants do not depend on it.
    pub fn new(case: &FiniteCase, conj: Rational) -> Result<Self> {
        if !conj.is_positive() {
            return Err(Error::domain("conjugation ratio must be positive"));
        }
        let c = case;
        let nn = c.big_n as i64;
        let x_max = c.big_a + 4 * nn + 2;
        let mut a_matrix = vec![vec![Rational::zero(); c.big_n]; c.big_n];
        let mut b_matrix = a_matrix.clone();
        for i in 1..=nn {
            for k in 1..=nn {
                // a_{ik} = β¹_{k−i}(m,a); b_{ik} = β⁰_{k−i}(Δm,Δa), i.e. b_{kj} = β⁰_{j−k}.
                a_matrix[(i - 1) as usize][(k - 1) as usize] = beta_coeff(k - i, 1, c.m, c.a, &c.q)?;
                b_matrix[(i - 1) as usize][(k - 1) as usize] = beta_coeff(k - i, 0, c.delta_m(), c.delta_a(), &c.q)?;
            }
        }
        Ok(FFunctions {
            case: case.clone(),
            conj,
            w_first: WeightTable::new(c.m, &c.q, x_max),
            w_second: WeightTable::new(c.delta_m(), &c.q, x_max),
            a_matrix,
            b_matrix,
        })
    }

    fn c(&self, i: usize) -> Rational {
        num::pow(self.conj.clone(), i)
    }

    /// f01(i,x) = c(i) Σ_k (−1)^{n−k} β¹_{k−i}(m,a) Δ^{n−k} w_m(x+a).
    pub fn f01(&self, i: usize, x: i64) -> Rational {
        let c = &self.case;
        let n = c.n as i64;
        let mut s = Rational::zero();
        for k in 1..=i {
            let a = &self.a_matrix[i - 1][k - 1];
            if a.is_zero() {
                continue;
            }
            let term = a * self.w_first.diff(n - k as i64, x + c.a);
            s += if (n - k as i64).rem_euclid(2) == 0 { term } else { -term };
        }
        s * self.c(i)
    }

    /// f12(x,j) = c(j)^{−1} Σ_k (−1)^{n+k} Δ^{k−1−n} w_{Δm}(Δa−x) β⁰_{j−k}(Δm,Δa).
    pub fn f12(&self, x: i64, j: usize) -> Rational {
        let c = &self.case;
        let n = c.n as i64;
        let mut s = Rational::zero();
        for k in j..=c.big_n {
            let b = &self.b_matrix[k - 1][j - 1];
            if b.is_zero() {
                continue;
            }
            let term = self.w_second.diff(k as i64 - 1 - n, c.delta_a() - x) * b;
            s += if (n + k as i64).rem_euclid(2) == 0 { term } else { -term };
        }
        s / self.c(j)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LMatrix {
    /// Σ_{x<0} f01(i,x) f12(x,j).
    pub l1: Vec<Vec<Rational>>,
    /// Σ_{x≥0} f01(i,x) f12(x,j).
    pub l2: Vec<Vec<Rational>>,
    /// Rows i > n carry u with L1; rows i ≤ n carry u^{−1} with L2.
    pub n: usize,
}

pub fn l_matrix(case: &FiniteCase) -> Result<LMatrix> {
    l_matrix_conjugated(case, Rational::one())
}

/// L1, L2 from a support scan over x ∈ [−a−2N, Δa+2N]; any nonzero term outside
/// [−a−N, Δa+N] is reported as a support error.
pub fn l_matrix_conjugated(case: &FiniteCase, conj: Rational) -> Result<LMatrix> {
    let f = FFunctions::new(case, conj)?;
    let nn = case.big_n;
    let big = nn as i64;
    let (lo, hi) = (-case.a - 2 * big, case.delta_a() + 2 * big);
    let (inner_lo, inner_hi) = (-case.a - big, case.delta_a() + big);
    let mut l1 = vec![vec![Rational::zero(); nn]; nn];
    let mut l2 = l1.clone();
    for x in lo..=hi {
        let f01: Vec<Rational> = (1..=nn).map(|i| f.f01(i, x)).collect();
        let f12: Vec<Rational> = (1..=nn).map(|j| f.f12(x, j)).collect();
        for i in 0..nn {
            if f01[i].is_zero() {
                continue;
            }
            for j in 0..nn {
                let term = &f01[i] * &f12[j];
                if term.is_zero() {
                    continue;
                }
                if x < inner_lo || x > inner_hi {
                    return Err(Error::Support(format!(
                        "f01({},{x})·f12({x},{}) ≠ 0 outside [{inner_lo}, {inner_hi}]",
                        i + 1,
                        j + 1
                    )));
                }
                if x < 0 {
                    l1[i][j] += term;
                } else {
                    l2[i][j] += term;
                }
            }
        }
    }
    Ok(LMatrix { l1, l2, n: case.n })
}

/// Exact determinant by Gaussian elimination.
pub fn det_rational(mut m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            m.swap(p, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot;
            let (top, bottom) = m.split_at_mut(r);
            for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                *dst -= &factor * src;
            }
        }
    }
    det
}

impl LMatrix {
    /// det L(u) as a Laurent polynomial {power: coefficient}.
    pub fn laurent_coefficients(&self) -> BTreeMap<i64, Rational> {
        let nn = self.l1.len();
        let mut out = BTreeMap::new();
        for mask in 0u64..(1 << nn) {
            let mut power = 0i64;
            let rows: Vec<Vec<Rational>> = (0..nn)
                .map(|r| {
                    let i = r + 1;
                    if mask >> r & 1 == 0 {
                        power += (i > self.n) as i64;
                        self.l1[r].clone()
                    } else {
                        power -= (i <= self.n) as i64;
                        self.l2[r].clone()
                    }
                })
                .collect();
            let d = det_rational(rows);
            if !d.is_zero() {
                *out.entry(power).or_insert_with(Rational::zero) += d;
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// det L(1) = det(L1 + L2).
    pub fn det_at_one(&self) -> Rational {
        let nn = self.l1.len();
        det_rational((0..nn).map(|i| (0..nn).map(|j| &self.l1[i][j] + &self.l2[i][j]).collect()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteResult {
    pub case: FiniteCase,
    #[serde(rename = "P_exact")]
    pub p_exact: String,
    #[serde(rename = "P_float")]
    pub p_float: f64,
}

/// P(a, A) exactly: the sum of the non-negative Laurent coefficients of det L(u).
pub fn finite_two_point(case: &FiniteCase) -> Result<Rational> {
    if case.a == 0 || case.big_a == 0 {
        return Ok(Rational::zero());
    }
    let l = l_matrix(case)?;
    Ok(l.laurent_coefficients().range(0..).map(|(_, v)| v.clone()).fold(Rational::zero(), |a, b| a + b))
}

pub fn finite_result(case: &FiniteCase) -> Result<FiniteResult> {
    let p = finite_two_point(case)?;
    Ok(FiniteResult { case: case.clone(), p_float: p.to_f64().unwrap_or(f64::NAN), p_exact: p.to_string() })
}

/// The same probability in f64: det L(u) sampled on |u| = r, its Laurent
/// coefficients recovered by a discrete Fourier transform and the non-negative
/// ones summed. Needs nodes ≥ 2(N+1) so no coefficients alias.
pub fn finite_two_point_f64(case: &FiniteCase, r: f64, nodes: usize) -> Result<f64> {
    if case.a == 0 || case.big_a == 0 {
        return Ok(0.0);
    }
    let nn = case.big_n;
    if nodes < 2 * (nn + 1) {
        return Err(Error::Contour(format!("{nodes} u-nodes alias a degree-{nn} Laurent polynomial")));
    }
    let l = l_matrix(case)?;
    let f =
        |m: &Vec<Vec<Rational>>| -> Vec<f64> { m.iter().flatten().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect() };
    let (l1, l2) = (f(&l.l1), f(&l.l2));
    let circle = Circle { center: Complex64::new(0.0, 0.0), radius: r, node_count: nodes };
    let us: Vec<Complex64> = circle.nodes()?.into_iter().map(|(u, _)| u).collect();
    let dets: Vec<Complex64> = us
        .iter()
        .map(|&u| {
            DMatrix::from_fn(nn, nn, |i, j| {
                let (up, down) =
                    if i + 1 > case.n { (u, Complex64::new(1.0, 0.0)) } else { (Complex64::new(1.0, 0.0), u.inv()) };
                up * l1[i * nn + j] + down * l2[i * nn + j]
            })
            .determinant()
        })
        .collect();
    let lo = -(case.n as i64);
    let hi = (nn - case.n) as i64;
    let mut total = 0.0;
    for k in 0..=hi.max(lo) {
        let c: Complex64 = us.iter().zip(&dets).map(|(u, d)| d * u.powi(-k as i32)).sum::<Complex64>() / nodes as f64;
        total += c.re;
    }
    Ok(total)
}

/// Independent oracle: enumerate every weight configuration on the M×N box that
/// can satisfy G(M,N) < A. Each weight is then at most A−1, so the sum is
/// finite and exact — there is no tail to bound.
pub fn exhaustive_enumeration(case: &FiniteCase) -> Result<Rational> {
    let c = case;
    if c.big_m * c.big_n > 16 || c.big_a > 12 {
        return Err(Error::domain("exhaustive enumeration is limited to ≤ 16 cells and A ≤ 12"));
    }
    // counts[s] = number of admissible configurations with total weight s.
    let mut counts: Vec<u64> = vec![0; (c.big_m * c.big_n) * c.big_a.max(1) as usize + 1];
    let mut g = vec![0i64; c.big_m * c.big_n];
    fn dfs(c: &FiniteCase, cell: usize, total: usize, g: &mut [i64], counts: &mut [u64]) {
        let (mm, nn) = (c.big_m, c.big_n);
        if cell == mm * nn {
            counts[total] += 1;
            return;
        }
        let (i, j) = (cell / nn, cell % nn);
        let up = if i > 0 { g[cell - nn] } else { 0 };
        let left = if j > 0 { g[cell - 1] } else { 0 };
        let base = up.max(left);
        let inner = i < c.m && j < c.n;
        for w in 0.. {
            let v = base + w;
            if v >= c.big_a || (inner && v >= c.a) {
                break;
            }
            g[cell] = v;
            dfs(c, cell + 1, total + w as usize, g, counts);
        }
    }
    if c.a > 0 && c.big_a > 0 {
        dfs(c, 0, 0, &mut g, &mut counts);
    }
    let one = Rational::one();
    let mut p = Rational::zero();
    let mut qs = Rational::one();
    for &k in &counts {
        if k > 0 {
            p += &qs * rat(k as i64);
        }
        qs *= &c.q;
    }
    Ok(p * num::pow(&one - &c.q, c.big_m * c.big_n))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionReport {
    /// Largest |empirical − formula| over the y-box, in standard errors.
    pub max_sigma: f64,
    pub max_abs: f64,
    /// Σ of the determinant formula over the box, and the empirical mass there.
    pub formula_mass: f64,
    pub empirical_mass: f64,
    pub samples: u64,
}

/// Markov transition of the row vector G(ℓ,·) ↦ G(m,·): the law of y = G(m,·)
/// given G(ℓ,·) = x is det(Δ^{j−i} w_{m−ℓ}(y_j − x_i)). Simulated by starting
/// the rolling row at x, compared over the box y_j ∈ [x_j, x_j + width).
#[allow(clippy::too_many_arguments)]
pub fn transition_check(
    q: &Rational,
    ell: usize,
    m: usize,
    x: &[i64],
    width: i64,
    samples: u64,
    seed: u64,
) -> Result<TransitionReport> {
    check_q(q)?;
    let nn = x.len();
    if nn == 0 || x.windows(2).any(|p| p[0] > p[1]) || x.iter().any(|&v| v < 0) {
        return Err(Error::domain(format!("x = {x:?} must be a non-empty weakly increasing vector ≥ 0")));
    }
    if m <= ell || width < 1 {
        return Err(Error::domain(format!("need m > ℓ and width ≥ 1, got ℓ={ell}, m={m}, width={width}")));
    }
    let qf = q.to_f64().unwrap_or(f64::NAN);
    let start: Vec<u64> = x.iter().map(|&v| v as u64).collect();
    let rows = mc_rows_from(qf, &start, m - ell, samples, seed)?;
    let table = WeightTable::new(m - ell, q, x[nn - 1] - x[0] + width + nn as i64 + 2);
    let mut counts = std::collections::HashMap::<Vec<i64>, u64>::new();
    for row in rows {
        let y: Vec<i64> = row.iter().map(|&v| v as i64).collect();
        if y.iter().zip(x).all(|(&yj, &xj)| yj - xj < width) {
            *counts.entry(y).or_insert(0) += 1;
        }
    }
    let mut report = TransitionReport { max_sigma: 0.0, max_abs: 0.0, formula_mass: 0.0, empirical_mass: 0.0, samples };
    let mut y = x.to_vec();
    loop {
        if y.windows(2).all(|p| p[0] <= p[1]) {
            let mat =
                (0..nn).map(|i| (0..nn).map(|j| table.diff(j as i64 - i as i64, y[j] - x[i])).collect()).collect();
            let p = det_rational(mat).to_f64().unwrap_or(f64::NAN);
            let e = McEstimate::from_counts(*counts.get(&y).unwrap_or(&0), samples, seed);
            report.formula_mass += p;
            report.empirical_mass += e.value;
            let dev = (e.value - p).abs();
            report.max_abs = report.max_abs.max(dev);
            report.max_sigma = report.max_sigma.max(dev / e.std_error);
        }
        // Odometer over the box.
        let mut k = 0;
        loop {
            if k == nn {
                return Ok(report);
            }
            y[k] += 1;
            if y[k] - x[k] < width {
                break;
            }
            y[k] = x[k];
            k += 1;
        }
    }
}

/// |H*(w_c + c4 w′/K^{1/3}) − exp(w′³/3 + ηw′² − (ξ−v)w′)| with
/// H*(w) = exp(f(w) − f(w_c)), f(w) = k ln w + (b+ℓ) ln(1−w) − ℓ ln(1−w/(1−q)),
/// w_c = 1−√q, k = K − c1ηK^{2/3} + c0vK^{1/3}, ℓ = K + c1ηK^{2/3}, b = c2K + c3ξK^{1/3}.
pub fn hstar_limit_check(q: f64, big_k: f64, xi: f64, eta: f64, v: f64, w_prime: Complex64) -> Result<f64> {
    let c = compute_constants(q)?;
    let k23 = big_k.powf(2.0 / 3.0);
    let k13 = big_k.cbrt();
    let k = big_k - c.c1 * eta * k23 + c.c0 * v * k13;
    let l = big_k + c.c1 * eta * k23;
    let b = c.c2 * big_k + c.c3 * xi * k13;
    if !(k >= 1.0 && l >= 1.0 && b >= 1.0) {
        return Err(Error::domain(format!("K = {big_k} too small: k={k}, ℓ={l}, b={b}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let f = |w: Complex64| -> Result<Complex64> {
        let pole = one - w / (1.0 - q);
        if pole.norm() < 1e-300 || w.norm() < 1e-300 || (one - w).norm() < 1e-300 {
            return Err(Error::domain(format!("w = {w} hits a singularity")));
        }
        Ok(k * w.ln() + (b + l) * (one - w).ln() - l * pole.ln())
    };
    let wc = Complex64::new(1.0 - q.sqrt(), 0.0);
    let h = (f(wc + c.c4 * w_prime / k13)? - f(wc)?).exp();
    let limit = (w_prime.powi(3) / 3.0 + eta * w_prime * w_prime - (xi - v) * w_prime).exp();
    Ok((h - limit).norm())
}
