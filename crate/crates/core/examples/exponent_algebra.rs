// Exact exponent bookkeeping: α_g, the old and new Siegel exponents, the
// split-point balance, the dominance comparison and the full reassembly.

use siegel_bounds::bounds::{
    alpha, assembly_pipeline, c_g, dominance_check, improvement_delta, in_jacobi_range, optimal_b_check,
    siegel_weights, theorem1_exponent, tk_exponent_formula,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>3} {:>10} {:>10}", "g", "alpha_g", "c_g");
    for g in 2..=8 {
        println!("{g:>3} {:>10} {:>10}", alpha(g)?.to_string(), c_g(g)?.to_string());
    }

    println!("\n{:>3} {:>3} {:>14} {:>14} {:>10}  old bound applies", "g", "k", "new", "old", "delta");
    for g in 5..=10 {
        for k in siegel_weights(g) {
            println!(
                "{g:>3} {k:>3} {:>14} {:>14} {:>10}  {}",
                theorem1_exponent(g, k)?.to_string(),
                tk_exponent_formula(g, k)?.to_string(),
                improvement_delta(g, k)?.to_string(),
                in_jacobi_range(g, k)
            );
        }
    }

    let b = optimal_b_check(9, 7)?;
    println!("\nB = {}: middle range {}, upper range {}, equal = {}", b.b, b.second, b.third, b.equal);

    let d = dominance_check(8, 6)?;
    let exps: Vec<String> = d.d_exponents.iter().map(|e| e.to_string()).collect();
    println!("D-exponents of f(m, D) at (8, 6): {exps:?}, last dominates = {}", d.last_term_dominates);

    let p = assembly_pipeline(8, 6)?;
    println!("reassembled exponent {} vs {} -> matches = {}", p.substituted, p.theorem1, p.matches);
    let edge = assembly_pipeline(8, 7)?;
    println!("(8, 7) warnings: {:?}", edge.warnings);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
