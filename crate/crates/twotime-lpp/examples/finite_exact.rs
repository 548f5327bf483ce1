// Exact finite-N two-point probabilities from the L(u) determinant, checked
// against brute-force enumeration.

use twotime_lpp::finite_n::{
    exhaustive_enumeration, finite_result, finite_two_point_f64, l_matrix, parse_rational, FiniteCase,
};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    let case = FiniteCase::new(parse_rational("1/2")?, 1, 1, 2, 2, 1, 2)?;
    let r = finite_result(&case)?;
    println!("P[G(1,1) < 1, G(2,2) < 2] at q = 1/2: {} = {}", r.p_exact, r.p_float);
    assert_eq!(r.p_exact, "11/64");
    assert_eq!(exhaustive_enumeration(&case)?.to_string(), "11/64");

    let case = FiniteCase::new(parse_rational("1/3")?, 1, 2, 3, 3, 3, 5)?;
    let l = l_matrix(&case)?;
    for (power, c) in l.laurent_coefficients() {
        println!("  [u^{power:>2}] det L(u) = {c}");
    }
    let exact = finite_result(&case)?;
    let float = finite_two_point_f64(&case, 2.0, 16)?;
    println!("P = {} ≈ {:.15}; trapezoid on |u| = 2: {float:.15}", exact.p_exact, exact.p_float);
    assert!((float - exact.p_float).abs() < 1e-12);
    println!("det L(1) = P[G(3,3) < 5] = {}", l.det_at_one());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
