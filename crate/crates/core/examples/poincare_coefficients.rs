// Fourier coefficients of Jacobi Poincaré series: the δ-term, the truncated
// Kloosterman–Bessel series with its error budget, and a doubling check.

use siegel_bounds::forms::{HalfIntegralMatrix, JacobiDatum};
use siegel_bounds::kloosterman::EvalConfig;
use siegel_bounds::poincare::{diagonal_coefficient, petersson_lambda, poincare_coefficient, PoincareParams};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = EvalConfig::default();
    let m = HalfIntegralMatrix::diagonal(&[1])?;
    for (k, n, r) in [(12u32, 1i64, 0i64), (12, 2, 1), (10, 3, 2)] {
        let datum = JacobiDatum::new(n, vec![r], m.clone())?;
        let a = diagonal_coefficient(k, &datum, 100, &cfg)?;
        let b = diagonal_coefficient(k, &datum, 200, &cfg)?;
        let change = (a.value.value - b.value.value).norm();
        println!(
            "k={k:>2} (n,r)=({n},{r}) D={:>2}: b = {:.12} ± {:.1e} (tail {:.1e}), doubling change {change:.1e}",
            datum.discriminant(),
            b.value.re(),
            b.value.abs_error,
            b.tail_estimate
        );
    }

    // An off-diagonal coefficient g(n', r') with D' ≠ D has no δ-term.
    let datum = JacobiDatum::new(1, vec![0], m.clone())?;
    let p = PoincareParams::new(12, datum, 2, vec![1])?;
    let g = poincare_coefficient(&p, 150, &cfg)?;
    println!("\ng(2, 1) for P_(1,0): {:+.6e} {:+.6e}i ± {:.1e}", g.value.re(), g.value.im(), g.value.abs_error);

    println!("λ_(k=10, g=1, det=2, D=4) = {:.6e}", petersson_lambda(10, 1, 2, 4)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
