// Tracy–Widom GUE distribution F2(ξ) = det(I − K_Ai) on L²(ξ, ∞).

use twotime_lpp::fredholm::{tracy_widom_f2, F2Grid};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    let grid = F2Grid::default();
    let mut prev = 0.0;
    for k in -12..=8 {
        let xi = 0.5 * k as f64;
        let f = tracy_widom_f2(xi, grid)?;
        println!("F2({xi:>5.1}) = {f:.10}");
        assert!(f >= prev);
        prev = f;
    }
    // Doubling the resolution moves the value by far less than 1e-8.
    let fine = tracy_widom_f2(-1.0, F2Grid { cutoff: 16.0, nodes: 2 * grid.nodes })?;
    assert!((fine - tracy_widom_f2(-1.0, grid)?).abs() < 1e-10);
    assert!(tracy_widom_f2(8.0, grid)? >= 1.0 - 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
