//! Finite-difference check of the hand-written gradients.

use batchscale::problem::{gradient_check, make_logistic_synthetic, make_noisy_quadratic, make_tiny_mlp, Problem};

fn main() -> batchscale::Result<()> {
    let problems: Vec<Box<dyn Problem>> = vec![
        Box::new(make_noisy_quadratic(2.0, 0.5, 100, 4, 1)?),
        Box::new(make_logistic_synthetic(100, 4, 2.0, 1)?),
        Box::new(make_tiny_mlp(100, 3, 16, 1)?),
    ];
    for p in &problems {
        let w: Vec<f64> = p.init_params(3).iter().map(|x| x + 0.1).collect();
        let worst = (0..10)
            .map(|i| gradient_check(p.as_ref(), &w, i, 1e-6))
            .collect::<batchscale::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!("{:<10} {} params, max relative error {worst:.2e}", p.name(), p.dim());
    }
    Ok(())
}
