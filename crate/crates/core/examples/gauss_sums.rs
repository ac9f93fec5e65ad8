// Quadratic Gauss sums: closed forms at prime powers, composite assembly and
// the direct enumeration they are checked against.

use siegel_bounds::gauss::{gauss_sum, gauss_sum_brute, gauss_sum_prime_power};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>4} {:>4} {:>6}   {:>28}   {:>10}", "a", "b", "c", "G(a,b;c)", "|diff|");
    for (a, b, c) in [(1, 0, 3), (1, 0, 4), (1, 0, 8), (3, 5, 9), (2, 2, 4), (5, 3, 360), (7, -4, 1001)] {
        let closed = gauss_sum(a, b, c)?;
        let brute = gauss_sum_brute(a, b, c)?;
        let diff = (closed.value - brute.value).norm();
        println!(
            "{a:>4} {b:>4} {c:>6}   {:>13.6} {:>+13.6}i   {diff:>10.2e}",
            closed.value.re, closed.value.im
        );
        if !closed.agrees_with(&brute, 1e-9 * c as f64) {
            return Err(format!("closed form and enumeration disagree at ({a}, {b}, {c})").into());
        }
    }

    // |G(a, b; p^ν)| is either 0 or p^{(ν+α)/2} with α = ord_p(a).
    let g = gauss_sum_prime_power(3, 0, 3, 3)?;
    println!("\n|G(3, 0; 27)| = {:.6} (expected 3^2 = 9)", g.norm());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run_example() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
