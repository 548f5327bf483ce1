// Airy function, Airy kernel, and the deformed kernel Ai_{ξ,η} with its
// contour-integral representation.

use twotime_lpp::airy::{airy_ai, airy_ai_prime, airy_kernel, airy_kernel_closed, deformed_airy, verify_airy_contour};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    for x in [-10.0, -2.338107410459767, 0.0, 1.0, 5.0, 10.0] {
        println!("Ai({x:>8.4}) = {:+.15e}   Ai'({x:>8.4}) = {:+.15e}", airy_ai(x)?, airy_ai_prime(x)?);
    }
    // K_Ai(0,0) = ∫₀^∞ Ai(s)² ds = Ai'(0)².
    let k00 = airy_kernel(0.0, 0.0)?;
    assert!((k00 - airy_ai_prime(0.0)?.powi(2)).abs() < 1e-13);
    println!("K_Ai(0,0) = {k00:.12}");
    for (x, y) in [(0.5, -1.0), (-3.0, 2.0)] {
        let (q, c) = (airy_kernel(x, y)?, airy_kernel_closed(x, y)?);
        println!("K_Ai({x},{y}): quadrature {q:.14}, closed form {c:.14}");
        assert!((q - c).abs() < 1e-12);
    }
    let v = deformed_airy(0.0, 0.3, 0.2, -0.1)?;
    let (forward, backward) = verify_airy_contour(0.1, 0.3, 1.0, 1.0, 200)?;
    println!("Ai_(0,0.3)(0.2,-0.1) = {v:.12}; contour residuals {forward:.1e}, {backward:.1e}");
    assert!(forward < 1e-8 && backward < 1e-8);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
