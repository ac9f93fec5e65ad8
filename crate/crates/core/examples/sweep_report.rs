// Empirical sweeps: Kloosterman sums divided by their bound over a range of
// moduli, and diagonal Poincaré coefficients over a range of discriminants.
// The regression slope of log(ratio) should stay near zero when the bound
// has the right shape.

use siegel_bounds::bounds::{empirical_exponent_sweep, SweepFamily, SweepKind};
use siegel_bounds::kloosterman::EvalConfig;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = EvalConfig::default();
    let family = SweepFamily::from_json(
        r#"{"g": 2, "k": 12, "m": {"g": 2, "twice_m": [[2, 1], [1, 2]]},
            "n_range": [1, 2], "r_values": [[0, 0], [1, 0], [1, 1]], "c_range": [1, 30]}"#,
    )?;
    let report = empirical_exponent_sweep(&family, SweepKind::Kloosterman, &cfg)?;
    println!("Kloosterman sweep: {}", report.summary_json());

    let mut csv = Vec::new();
    report.write_csv(&mut csv)?;
    let csv = String::from_utf8(csv)?;
    for line in csv.lines().take(4) {
        println!("  {line}");
    }

    let family = SweepFamily::from_json(
        r#"{"g": 1, "k": 12, "m": {"g": 1, "twice_m": [[2]]},
            "n_range": [1, 8], "r_values": [[0], [1], [2]], "c_range": [1, 60]}"#,
    )?;
    let report = empirical_exponent_sweep(&family, SweepKind::Coefficient, &cfg)?;
    println!("\ncoefficient sweep (diagnostic): {}", report.summary_json());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
