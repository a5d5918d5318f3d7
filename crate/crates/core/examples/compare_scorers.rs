//! Run every scoring method on the same pair and compare their verdicts.
//!
//! The four scorers measure different kinds of asymmetry: deviance of
//! heterogeneously projected conditional embeddings (kiim-ht), variance of
//! embedding norms (kcdc), spread of embedding coefficients under a fixed
//! projection (kiim), and slope-based information geometry (igci). Even on
//! an easy multiplicative-noise pair they need not all agree: the
//! norm-variance score at its default ridge is the fragile one, which is
//! exactly the sensitivity the `lambda_sensitivity` example explores.
//!
//! ```sh
//! cargo run --release --example compare_scorers
//! ```

use kernel_deviance::datagen::{generate_scalar, Mechanism, MechanismSpec, NoiseLaw};
use kernel_deviance::infer::infer_pair;
use kernel_deviance::score::{Method, ScoreConfig};
use kernel_deviance::Result;

fn main() -> Result<()> {
    let data = generate_scalar(&MechanismSpec {
        mechanism: Mechanism::Mnm1,
        noise: NoiseLaw::StdUniform,
        n: 100,
        seed: 3,
    })?;
    println!("dataset: {} (ground truth x->y)\n", data.provenance);
    println!("{:<8}  {:>13}  {:>13}  decision", "method", "score(x->y)", "score(y->x)");

    let cfg = ScoreConfig::default();
    for method in [Method::KiimHt, Method::Kcdc, Method::Kiim, Method::Igci] {
        let v = infer_pair(&data, method, &cfg)?;
        println!(
            "{:<8}  {:>13.4e}  {:>13.4e}  {}",
            method.name(),
            v.score_xy,
            v.score_yx,
            v.decision
        );
    }
    Ok(())
}
