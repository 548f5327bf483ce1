// The scaling-limit two-time distribution as a contour integral of Fredholm
// determinants, with its marginal bounds.

use twotime_lpp::fredholm::{tracy_widom_f2, F2Grid, GridSpec};
use twotime_lpp::scaling::{derived_params, TwoTimeParams};
use twotime_lpp::twotime::{eval_k_form, ContourSpec};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    let (c, g) = (ContourSpec::default(), GridSpec::default());
    for (xi1, xi2) in [(-1.0, -1.0), (0.0, 0.0), (1.0, -0.5), (2.0, 2.0)] {
        let p = TwoTimeParams::from_scaled(xi1, 0.0, xi2, 0.0, 1.0)?;
        let r = eval_k_form(p, c, g)?;
        let (f1, f2) = (tracy_widom_f2(xi1, F2Grid::default())?, tracy_widom_f2(xi2, F2Grid::default())?);
        println!(
            "F(ξ1={xi1:>4}, ξ2={xi2:>4}) = {:.10}  (|Im| {:.1e}; marginals {f1:.6}, {f2:.6})",
            r.value, r.imag_residue
        );
        // Fréchet bounds.
        assert!(r.value <= f1.min(f2) + 1e-9 && r.value >= f1 + f2 - 1.0 - 1e-9);
    }
    // Times t1 = 1, t2 = 3 give α = (1/2)^{1/3}.
    let p = derived_params(1.0, 3.0, 0.2, -0.1, 0.0, 0.5)?;
    let r = eval_k_form(p, c, g)?;
    println!("t1=1, t2=3 (α = {:.4}): F = {:.10}", p.alpha, r.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
