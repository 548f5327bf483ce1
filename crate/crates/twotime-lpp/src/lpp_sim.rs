//! Geometric last-passage percolation: sampling, the passage-time recursion,
//! the PNG height function and its KPZ rescaling, and Monte-Carlo estimates
//! of one- and two-point probabilities.
//!
//! Replica r of a run with seed s draws from ChaCha8 seeded by s on stream r,
//! so every estimate is a deterministic function of (seed, samples, parameters)
//! regardless of the thread count.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::scaling::{map_parameters, DiscreteTarget, ScalingConstants};
use crate::{Error, Result};

/// Inverse-CDF sampler for P[w = k] = (1−q)q^k: w counts the thresholds
/// ⌊q^k·2^64⌋, k ≥ 1, lying above a uniform 64-bit word.
#[derive(Clone, Debug)]
pub struct GeometricSampler {
    thresholds: Vec<u64>,
}

impl GeometricSampler {
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::domain(format!("q = {q} must lie in (0, 1)")));
        }
        let mut thresholds = Vec::new();
        let mut p = q;
        loop {
            let t = (p * 18_446_744_073_709_551_616.0) as u64;
            if t == 0 {
                break;
            }
            thresholds.push(t);
            p *= q;
        }
        Ok(GeometricSampler { thresholds })
    }

    #[inline]
    pub fn sample(&self, rng: &mut impl RngCore) -> u64 {
        let u = rng.next_u64();
        // Linear scan: the expected count is q/(1−q), usually below one step.
        let mut k = 0;
        while k < self.thresholds.len() && u < self.thresholds[k] {
            k += 1;
        }
        k as u64
    }
}

fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Weights w(i,j) and, once filled, passage times G(i,j) for 1 ≤ i ≤ m_max,
/// 1 ≤ j ≤ n_max, stored row-major in i.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PassageField {
    pub q: f64,
    pub m_max: usize,
    pub n_max: usize,
    pub weights: Vec<u64>,
    pub passage: Option<Vec<u64>>,
}

impl PassageField {
    pub fn from_weights(q: f64, m_max: usize, n_max: usize, weights: Vec<u64>) -> Result<Self> {
        if m_max == 0 || n_max == 0 || weights.len() != m_max * n_max {
            return Err(Error::domain(format!("{} weights for a {m_max}×{n_max} field", weights.len())));
        }
        Ok(PassageField { q, m_max, n_max, weights, passage: None })
    }

    fn index(&self, i: usize, j: usize) -> Result<usize> {
        if i == 0 || j == 0 || i > self.m_max || j > self.n_max {
            return Err(Error::OutOfGrid(format!("({i},{j}) outside 1..={} × 1..={}", self.m_max, self.n_max)));
        }
        Ok((i - 1) * self.n_max + (j - 1))
    }

    pub fn weight(&self, i: usize, j: usize) -> Result<u64> {
        Ok(self.weights[self.index(i, j)?])
    }

    /// G(i,j), with G = 0 when i = 0 or j = 0.
    pub fn passage(&self, i: usize, j: usize) -> Result<u64> {
        let g = self.passage.as_ref().ok_or_else(|| Error::domain("passage table not computed"))?;
        if i == 0 || j == 0 {
            return Ok(0);
        }
        Ok(g[self.index(i, j)?])
    }
}

pub fn sample_weights(q: f64, m_max: usize, n_max: usize, seed: u64) -> Result<PassageField> {
    if m_max == 0 || n_max == 0 {
        return Err(Error::domain(format!("field dimensions must be ≥ 1, got {m_max}×{n_max}")));
    }
    let sampler = GeometricSampler::new(q)?;
    let mut rng = replica_rng(seed, 0);
    let weights = (0..m_max * n_max).map(|_| sampler.sample(&mut rng)).collect();
    PassageField::from_weights(q, m_max, n_max, weights)
}

/// Fills G(i,j) = max(G(i−1,j), G(i,j−1)) + w(i,j).
pub fn last_passage_table(mut field: PassageField) -> PassageField {
    let (m, n) = (field.m_max, field.n_max);
    let mut g = vec![0u64; m * n];
    for i in 0..m {
        for j in 0..n {
            let up = if i > 0 { g[(i - 1) * n + j] } else { 0 };
            let left = if j > 0 { g[i * n + j - 1] } else { 0 };
            g[i * n + j] = up.max(left) + field.weights[i * n + j];
        }
    }
    field.passage = Some(g);
    field
}

/// h(x,t) = G((t+x+1)/2, (t−x+1)/2); x + t must be odd.
pub fn height_function(field: &PassageField, x: i64, t: i64) -> Result<i64> {
    if (x + t).rem_euclid(2) == 0 {
        return Err(Error::Parity(x + t));
    }
    let (i, j) = ((t + x + 1) / 2, (t - x + 1) / 2);
    if i < 1 || j < 1 {
        return Ok(0);
    }
    Ok(field.passage(i as usize, j as usize)? as i64)
}

/// h(x,t) for any parity; even x + t averages the neighbours at x ± 1.
pub fn height_interpolated(field: &PassageField, x: i64, t: i64) -> Result<f64> {
    if (x + t).rem_euclid(2) == 1 {
        return Ok(height_function(field, x, t)? as f64);
    }
    Ok(0.5 * (height_function(field, x - 1, t)? + height_function(field, x + 1, t)?) as f64)
}

/// H_T(η,t) = (h(2c1η(tT)^{2/3}, 2tT) − c2·tT) / (c3·(tT)^{1/3}), linear in x between lattice sites.
pub fn rescaled_height(field: &PassageField, consts: &ScalingConstants, eta: f64, t: f64, big_t: f64) -> Result<f64> {
    let k = t * big_t;
    if !(k > 0.0) {
        return Err(Error::domain(format!("tT = {k} must be positive")));
    }
    let x = 2.0 * consts.c1 * eta * k.powf(2.0 / 3.0);
    let time = (2.0 * k).round() as i64;
    let x0 = x.floor();
    let frac = x - x0;
    let h0 = height_interpolated(field, x0 as i64, time)?;
    let h = if frac > 0.0 { h0 + frac * (height_interpolated(field, x0 as i64 + 1, time)? - h0) } else { h0 };
    Ok((h - consts.c2 * k) / (consts.c3 * k.cbrt()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Frequency with a z = 1 Wilson half-width as the standard error; stays
    /// positive when no or all samples hit.
    pub fn from_counts(hits: u64, samples: u64, seed: u64) -> Self {
        let n = samples as f64;
        let p = hits as f64 / n;
        let se = (p * (1.0 - p) / n + 0.25 / (n * n)).sqrt() / (1.0 + 1.0 / n);
        McEstimate { value: p, std_error: se, samples, seed }
    }
}

/// G(m,n) and G(M,N) of one replica, by a rolling row over the M×N box.
fn corner_pair(sampler: &GeometricSampler, rng: &mut ChaCha8Rng, t: &DiscreteTarget, row: &mut [u64]) -> (u64, u64) {
    row.fill(0);
    let mut inner = 0;
    for i in 1..=t.big_m {
        let mut left = 0u64;
        for (j, g) in row.iter_mut().enumerate().take(t.big_n) {
            left = left.max(*g) + sampler.sample(rng);
            *g = left;
            if i == t.m && j + 1 == t.n {
                inner = left;
            }
        }
    }
    (inner, row[t.big_n - 1])
}

fn corner_samples(q: f64, target: &DiscreteTarget, samples: u64, seed: u64) -> Result<Vec<(u64, u64)>> {
    if samples == 0 {
        return Err(Error::domain("need at least one sample"));
    }
    let sampler = GeometricSampler::new(q)?;
    Ok((0..samples)
        .into_par_iter()
        .map_init(|| vec![0u64; target.big_n], |row, r| corner_pair(&sampler, &mut replica_rng(seed, r), target, row))
        .collect())
}

/// P[G(m,n) < a, G(M,N) < A].
pub fn mc_point_probability(q: f64, target: DiscreteTarget, samples: u64, seed: u64) -> Result<McEstimate> {
    let pairs = corner_samples(q, &target, samples, seed)?;
    let hits = pairs.iter().filter(|&&(g1, g2)| (g1 as i64) < target.a && (g2 as i64) < target.big_a).count();
    Ok(McEstimate::from_counts(hits as u64, samples, seed))
}

/// Runs the row recursion G(i,·) ↦ G(i+1,·) `steps` times from the row `start`
/// (with G(i,0) = 0), once per replica; returns the final rows.
pub fn mc_rows_from(q: f64, start: &[u64], steps: usize, samples: u64, seed: u64) -> Result<Vec<Vec<u64>>> {
    if start.is_empty() || start.windows(2).any(|p| p[0] > p[1]) {
        return Err(Error::domain(format!("start row {start:?} must be non-empty and nondecreasing")));
    }
    let sampler = GeometricSampler::new(q)?;
    Ok((0..samples)
        .into_par_iter()
        .map(|r| {
            let mut rng = replica_rng(seed, r);
            let mut row = start.to_vec();
            for _ in 0..steps {
                let mut left = 0u64;
                for g in row.iter_mut() {
                    left = left.max(*g) + sampler.sample(&mut rng);
                    *g = left;
                }
            }
            row
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCell {
    pub xi1: f64,
    pub xi2: f64,
    pub target: DiscreteTarget,
    pub estimate: McEstimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub q: f64,
    #[serde(rename = "T")]
    pub big_t: f64,
    pub t1: f64,
    pub t2: f64,
    pub eta1: f64,
    pub eta2: f64,
}

/// Empirical P[H_T(η1,t1) ≤ ξ1, H_T(η2,t2) ≤ ξ2] on xi1s × xi2s. One field per
/// replica serves every grid point, so the grid is monotone sample by sample.
pub fn mc_joint_cdf(spec: JointSpec, xi1s: &[f64], xi2s: &[f64], samples: u64, seed: u64) -> Result<Vec<JointCell>> {
    let s = &spec;
    let mut targets = Vec::with_capacity(xi1s.len() * xi2s.len());
    for &x1 in xi1s {
        for &x2 in xi2s {
            targets.push((x1, x2, map_parameters(s.q, s.big_t, s.t1, s.t2, s.eta1, s.eta2, x1, x2)?));
        }
    }
    let Some(&(_, _, first)) = targets.first() else {
        return Ok(Vec::new());
    };
    let pairs = corner_samples(s.q, &first, samples, seed)?;
    Ok(targets
        .into_iter()
        .map(|(xi1, xi2, t)| {
            let hits = pairs.iter().filter(|&&(g1, g2)| (g1 as i64) < t.a && (g2 as i64) < t.big_a).count();
            JointCell { xi1, xi2, target: t, estimate: McEstimate::from_counts(hits as u64, samples, seed) }
        })
        .collect())
}

/// Columns xi1, xi2, estimate, std_error, samples, seed.
pub fn write_joint_csv<W: Write>(out: W, cells: &[JointCell]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["xi1", "xi2", "estimate", "std_error", "samples", "seed"])?;
    for c in cells {
        w.write_record(&[
            c.xi1.to_string(),
            c.xi2.to_string(),
            c.estimate.value.to_string(),
            c.estimate.std_error.to_string(),
            c.estimate.samples.to_string(),
            c.estimate.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaling::compute_constants;
    use proptest::prelude::*;

    #[test]
    fn geometric_moments() {
        let s = GeometricSampler::new(0.5).unwrap();
        let mut rng = replica_rng(7, 0);
        let n = 1_000_000;
        let (mut sum, mut zeros) = (0u64, 0u64);
        for _ in 0..n {
            let w = s.sample(&mut rng);
            sum += w;
            zeros += (w == 0) as u64;
        }
        // Var w = q/(1−q)² = 2.
        let mean = sum as f64 / n as f64;
        assert!((mean - 1.0).abs() < 4.0 * (2.0 / n as f64).sqrt(), "{mean}");
        let p0 = zeros as f64 / n as f64;
        assert!((p0 - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{p0}");
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_weights(0.3, 5, 7, 11).unwrap(), sample_weights(0.3, 5, 7, 11).unwrap());
        assert_ne!(sample_weights(0.3, 5, 7, 11).unwrap(), sample_weights(0.3, 5, 7, 12).unwrap());
        assert!(sample_weights(1.0, 2, 2, 0).is_err());
        assert!(sample_weights(0.5, 0, 2, 0).is_err());
    }

    #[test]
    fn hand_computed_table() {
        // w(1,1)=1, w(1,2)=2, w(2,1)=0, w(2,2)=3, row-major in i.
        let f = last_passage_table(PassageField::from_weights(0.5, 2, 2, vec![1, 2, 0, 3]).unwrap());
        assert_eq!(f.passage(2, 2).unwrap(), 6);
        assert_eq!(f.passage(0, 2).unwrap(), 0);
        let zero = last_passage_table(PassageField::from_weights(0.5, 3, 3, vec![0; 9]).unwrap());
        assert!(zero.passage.unwrap().iter().all(|&g| g == 0));
        let col = last_passage_table(PassageField::from_weights(0.5, 4, 1, vec![3, 1, 4, 1]).unwrap());
        assert_eq!(col.passage(4, 1).unwrap(), 9);
    }

    #[test]
    fn height_function_indexing() {
        let f = last_passage_table(sample_weights(0.5, 6, 6, 3).unwrap());
        assert_eq!(height_function(&f, 0, 1).unwrap() as u64, f.weight(1, 1).unwrap());
        assert_eq!(height_function(&f, 4, 5).unwrap() as u64, f.passage(5, 1).unwrap());
        assert!(matches!(height_function(&f, 0, 2), Err(Error::Parity(2))));
        let avg = 0.5 * (height_function(&f, -1, 4).unwrap() + height_function(&f, 1, 4).unwrap()) as f64;
        assert_eq!(height_interpolated(&f, 0, 4).unwrap(), avg);
        assert!(matches!(height_function(&f, 0, 13), Err(Error::OutOfGrid(_))));
    }

    #[test]
    fn rescaling_is_affine() {
        let c = compute_constants(0.25).unwrap();
        let k: f64 = 8.0;
        // All weights 1: h(0, 16) = G(8,9) = 16 and c2 = 2 at q = 1/4.
        let f = last_passage_table(PassageField::from_weights(0.25, 9, 9, vec![1; 81]).unwrap());
        let h = rescaled_height(&f, &c, 0.0, 1.0, k).unwrap();
        assert!(h.abs() < 1e-14, "{h}");
        let f2 = last_passage_table(PassageField::from_weights(0.25, 9, 9, vec![2; 81]).unwrap());
        let h2 = rescaled_height(&f2, &c, 0.0, 1.0, k).unwrap();
        assert!((h2 - 16.0 / (c.c3 * 2.0)).abs() < 1e-12);
    }

    #[test]
    fn point_probability_edge_cases() {
        let t = DiscreteTarget::new(1, 1, 2, 2, 0, 0).unwrap();
        let e = mc_point_probability(0.5, t, 1000, 1).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.std_error > 0.0);
        let t = DiscreteTarget::new(1, 1, 2, 2, 1000, 1000).unwrap();
        assert_eq!(mc_point_probability(0.5, t, 1000, 1).unwrap().value, 1.0);
    }

    #[test]
    fn point_probability_matches_exact_value() {
        let t = DiscreteTarget::new(1, 1, 2, 2, 1, 2).unwrap();
        let e = mc_point_probability(0.5, t, 200_000, 42).unwrap();
        assert!((e.value - 11.0 / 64.0).abs() < 4.0 * e.std_error, "{e:?}");
        assert!(e.std_error <= 0.5 / (200_000f64).sqrt() + 1e-9);
    }

    #[test]
    fn rolling_row_matches_full_table() {
        let t = DiscreteTarget::new(3, 2, 5, 4, 0, 0).unwrap();
        let sampler = GeometricSampler::new(0.4).unwrap();
        let mut row = vec![0; 4];
        let (g1, g2) = corner_pair(&sampler, &mut replica_rng(9, 3), &t, &mut row);
        let mut rng = replica_rng(9, 3);
        let w = (0..20).map(|_| sampler.sample(&mut rng)).collect();
        let f = last_passage_table(PassageField::from_weights(0.4, 5, 4, w).unwrap());
        assert_eq!((g1, g2), (f.passage(3, 2).unwrap(), f.passage(5, 4).unwrap()));
    }

    #[test]
    fn joint_cdf_is_monotone_and_below_marginals() {
        let spec = JointSpec { q: 0.25, big_t: 10.0, t1: 1.0, t2: 2.0, eta1: 0.0, eta2: 0.0 };
        let xs = [-1.0, 0.0, 1.0, 6.0];
        let cells = mc_joint_cdf(spec, &xs, &xs, 4000, 5).unwrap();
        let v = |i: usize, j: usize| cells[i * xs.len() + j].estimate.value;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                assert!((0.0..=1.0).contains(&v(i, j)));
                if i + 1 < xs.len() {
                    assert!(v(i, j) <= v(i + 1, j));
                }
                if j + 1 < xs.len() {
                    assert!(v(i, j) <= v(i, j + 1));
                }
            }
        }
        let mut buf = Vec::new();
        write_joint_csv(&mut buf, &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("xi1,xi2,estimate,std_error,samples,seed\n"));
        assert_eq!(text.lines().count(), 17);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn recursion_holds_cellwise(q in 0.05f64..0.95, m in 1usize..12, n in 1usize..12, seed in any::<u64>()) {
            let f = last_passage_table(sample_weights(q, m, n, seed).unwrap());
            for i in 1..=m {
                for j in 1..=n {
                    let g = f.passage(i, j).unwrap();
                    let prev = f.passage(i - 1, j).unwrap().max(f.passage(i, j - 1).unwrap());
                    prop_assert_eq!(g, prev + f.weight(i, j).unwrap());
                    prop_assert!(g >= f.passage(i - 1, j).unwrap() && g >= f.passage(i, j - 1).unwrap());
                }
            }
        }
    }
}
