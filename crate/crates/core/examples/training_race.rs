//! Watch the optimization race that decides the direction.
//!
//! The trained projection score is not the loss at convergence — it is the
//! lowest loss reached within a fixed iteration budget, and the comparison
//! works because descent is reliably faster in the causal direction: there
//! the per-sample embeddings can be aligned by a projection the network
//! actually finds in time. This example scores one pair in both
//! orientations and prints the two loss traces side by side.
//!
//! ```sh
//! cargo run --release --example training_race
//! ```

use kernel_deviance::datagen::{generate_scalar, Mechanism, MechanismSpec, NoiseLaw};
use kernel_deviance::score::{score, Method, ScoreConfig};
use kernel_deviance::Result;

fn main() -> Result<()> {
    let data = generate_scalar(&MechanismSpec {
        mechanism: Mechanism::Anm1,
        noise: NoiseLaw::StdNormal,
        n: 100,
        seed: 0,
    })?;
    println!("dataset: {} (ground truth x->y)\n", data.provenance);

    let cfg = ScoreConfig::default();
    let mut rev = cfg.clone();
    rev.seed = cfg.seed.wrapping_add(1);
    let fwd = score(Method::KiimHt, &data.x, &data.y, &cfg)?;
    let bwd = score(Method::KiimHt, &data.y, &data.x, &rev)?;

    println!("{:>5}  {:>14}  {:>14}", "iter", "loss(x->y)", "loss(y->x)");
    let len = fwd.trace.len().max(bwd.trace.len());
    for it in (0..len).step_by(10) {
        let cell = |t: &[f64]| {
            t.get(it)
                .map(|v| format!("{v:14.5e}"))
                .unwrap_or_else(|| format!("{:>14}", "-"))
        };
        println!("{it:>5}  {}  {}", cell(&fwd.trace), cell(&bwd.trace));
    }

    println!(
        "\nbest(x->y) = {:.5e} at iteration {} of {}",
        fwd.value, fwd.best_iteration, fwd.iterations_run
    );
    println!(
        "best(y->x) = {:.5e} at iteration {} of {}",
        bwd.value, bwd.best_iteration, bwd.iterations_run
    );
    println!(
        "decision: {}",
        if fwd.value < bwd.value { "x->y" } else { "y->x (unexpected here)" }
    );
    Ok(())
}
