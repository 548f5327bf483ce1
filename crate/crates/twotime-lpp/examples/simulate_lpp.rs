// Geometric last-passage percolation: one sampled field, its height profile,
// and a Monte-Carlo point probability.

use twotime_lpp::lpp_sim::{height_function, last_passage_table, mc_point_probability, sample_weights};
use twotime_lpp::scaling::{compute_constants, DiscreteTarget};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    let q = 0.5;
    let field = last_passage_table(sample_weights(q, 200, 200, 7)?);
    let c = compute_constants(q)?;
    // Law of large numbers: G(k,k)/k → c2 = 2√q/(1−√q).
    let g = field.passage(200, 200)? as f64;
    println!("G(200,200)/200 = {:.3} (limit {:.3})", g / 200.0, c.c2);
    assert!((g / 200.0 - c.c2).abs() < 0.5);

    let t = 200;
    let profile: Vec<i64> = (-9..=9).step_by(2).map(|x| height_function(&field, x, t)).collect::<Result<_>>()?;
    println!("h(x, {t}) for x = -9, -7, …, 9: {profile:?}");

    let target = DiscreteTarget::new(1, 1, 2, 2, 1, 2)?;
    let est = mc_point_probability(q, target, 200_000, 11)?;
    println!("P[G(1,1) < 1, G(2,2) < 2] ≈ {:.5} ± {:.5} (exact 11/64 = 0.171875)", est.value, est.std_error);
    assert!((est.value - 0.171875).abs() < 4.0 * est.std_error);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
