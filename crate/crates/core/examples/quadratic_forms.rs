// Half-integral matrices: JSON round trip, discriminants computed two ways,
// and the reduction minimum m_{g-1}(T) compared with det(2T)^{1-1/g}.

use siegel_bounds::forms::{min_submatrix_det, reduction_ratio, HalfIntegralMatrix, JacobiDatum};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let m = HalfIntegralMatrix::from_json(r#"{"g":2,"twice_m":[[2,1],[1,4]]}"#)?;
    println!("m = {}  det(2m) = {}", m.to_json(), m.det_twice());

    for (n, r) in [(1, vec![1, 0]), (3, vec![1, -2]), (5, vec![2, 3])] {
        let datum = JacobiDatum::new(n, r.clone(), m.clone())?;
        println!(
            "(n, r) = ({n}, {r:?}): D = {} = {}",
            datum.discriminant(),
            datum.discriminant_split()
        );
    }

    // The reduction minimum is a GL_g(Z) invariant, so T and T[U] agree.
    let t = HalfIntegralMatrix::new(vec![vec![2, 0, 0], vec![0, 4, 2], vec![0, 2, 6]])?;
    let u = vec![vec![1, 2, 0], vec![0, 1, -1], vec![0, 0, 1]];
    let t2 = t.transform(&u)?;
    for (name, x) in [("T", &t), ("T[U]", &t2)] {
        println!(
            "{name:>5}: m_2 = {}  ratio to det(2T)^(2/3) = {:.4}",
            min_submatrix_det(x, 2)?,
            reduction_ratio(x, 2)?
        );
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
