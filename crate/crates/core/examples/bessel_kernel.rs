// The Bessel kernel `J_ν(t)` across its three evaluation regimes, against
// the elementary closed form for half-integer order.

use std::f64::consts::PI;

use siegel_bounds::poincare::bessel::{bessel_j, envelope};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>8} {:>22} {:>22} {:>10}", "t", "J_{3/2}(t)", "closed form", "rel err");
    for t in [0.1, 0.7, 2.0, 9.5, 31.0, 120.0, 1000.0] {
        let j = bessel_j(1.5, t)?;
        let (s, c) = f64::sin_cos(t);
        let exact = (2.0 / (PI * t)).sqrt() * (s / t - c);
        let rel = (j - exact).abs() / exact.abs().max(envelope(1.5, t));
        println!("{t:>8} {j:>22.15e} {exact:>22.15e} {rel:>10.1e}");
    }
    println!("\nJ_0(1)   = {:.12}", bessel_j(0.0, 1.0)?);
    println!("J_10(30) = {:.12}", bessel_j(10.0, 30.0)?);
    println!("J_8.5(0.02) = {:.6e}", bessel_j(8.5, 0.02)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
