// Higher-dimensional Kloosterman sums, evaluated three ways: direct
// enumeration, CRT splitting, and the Gauss-factorized path for diagonal
// index matrices. Also prints the ratio to the `(D,c) c^{(g+1)/2} det(2m)^{1/2}` bound.

use std::time::Instant;

use siegel_bounds::forms::HalfIntegralMatrix;
use siegel_bounds::kloosterman::{
    bound_ratio_lemma32, kloosterman, EvalConfig, KloostermanParams, Strategy,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = HalfIntegralMatrix::diagonal(&[1, 2, 3])?;
    let p = KloostermanParams::new(m.clone(), 25, 2, vec![1, 1, 0], 2, vec![1, 1, 0])?;
    for strategy in [Strategy::Brute, Strategy::Crt, Strategy::Fast] {
        let start = Instant::now();
        let h = kloosterman(&p, &EvalConfig::with_strategy(strategy))?;
        println!(
            "{strategy:?}: H = {:+.9} {:+.9}i  (± {:.1e})  in {:?}",
            h.value.re,
            h.value.im,
            h.abs_error,
            start.elapsed()
        );
    }

    let a2 = HalfIntegralMatrix::new(vec![vec![2, 1], vec![1, 2]])?;
    println!("\nH^+ for m = A2/2, (n, r) = (1, (1, 0)):");
    let cfg = EvalConfig::default();
    for c in [5u64, 12, 30, 49, 60] {
        let ratio = bound_ratio_lemma32(&a2, c, 1, &[1, 0], 1, &cfg)?;
        println!("  c = {c:>2}: |H| / bound = {ratio:.4}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
