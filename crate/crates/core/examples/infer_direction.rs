//! Decide the causal direction of a single cause–effect pair.
//!
//! Generates one additive-noise dataset where x drives y, scores both
//! orientations with the trained projection score, and prints the verdict.
//! The lower score names the inferred cause.
//!
//! ```sh
//! cargo run --release --example infer_direction
//! ```

use kernel_deviance::datagen::{generate_scalar, Mechanism, MechanismSpec, NoiseLaw};
use kernel_deviance::infer::infer_pair;
use kernel_deviance::score::{Method, ScoreConfig};
use kernel_deviance::Result;

fn main() -> Result<()> {
    let data = generate_scalar(&MechanismSpec {
        mechanism: Mechanism::Anm1,
        noise: NoiseLaw::StdNormal,
        n: 100,
        seed: 7,
    })?;
    println!("dataset: {} ({} samples, ground truth x->y)", data.provenance, data.n());

    let cfg = ScoreConfig::default();
    let verdict = infer_pair(&data, Method::KiimHt, &cfg)?;

    println!("score(x->y) = {:.6e}", verdict.score_xy);
    println!("score(y->x) = {:.6e}", verdict.score_yx);
    println!("decision:     {}", verdict.decision);
    Ok(())
}
