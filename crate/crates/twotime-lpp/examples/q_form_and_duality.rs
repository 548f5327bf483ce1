// Three evaluations of one number: the K(u)-form, the Q(u)-form, and the
// K-form at the α ↦ 1/α dual parameters.

use twotime_lpp::fredholm::GridSpec;
use twotime_lpp::scaling::TwoTimeParams;
use twotime_lpp::twotime::{alpha_inverse_transform, eval_k_form, eval_k_form_dual, eval_q_form, ContourSpec};
use twotime_lpp::Result;

pub fn run_example() -> Result<()> {
    let (c, g) = (ContourSpec::default(), GridSpec::default());
    let p = TwoTimeParams::from_scaled(0.5, 0.2, -0.3, 0.1, 1.5)?;
    let k = eval_k_form(p, c, g)?.value;
    let q = eval_q_form(p, c, g)?.value;
    let d = eval_k_form_dual(p, c, g)?.value;
    let dual = alpha_inverse_transform(p)?;
    println!("params: ξ1={} η1={} ξ2={} η2={} α={}", p.xi1, p.eta1, p.xi2, p.eta2, p.alpha);
    println!(
        "dual:   ξ1={:.3} η1={:.3} Δξ={:.3} Δη={:.3} α={:.4}",
        dual.xi1, dual.eta1, dual.delta_xi, dual.delta_eta, dual.alpha
    );
    println!("K-form {k:.12}\nQ-form {q:.12}\ndual   {d:.12}");
    assert!((k - q).abs() < 1e-6 && (k - d).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
