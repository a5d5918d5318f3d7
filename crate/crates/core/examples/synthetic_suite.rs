//! Measure accuracy over the scalar synthetic benchmark.
//!
//! The scalar suite has ten settings: five mechanisms (two additive-noise,
//! two multiplicative-noise, one complex nonlinear) under Gaussian and
//! uniform noise. This run keeps it quick — two settings, the closed-form
//! scorers, desk scale (1 trial × 20 datasets) — and prints the resulting
//! table. Drop the `settings` restriction and switch to `kiim-ht` for the
//! full benchmark.
//!
//! ```sh
//! cargo run --release --example synthetic_suite
//! ```

use kernel_deviance::experiments::{cmd_synth, parse_method_list, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::default().desk_scale();
    cfg.methods = parse_method_list(&["kcdc,igci-u".into()])?;
    cfg.settings = Some(vec!["anm-1:normal".into(), "mnm-1:uniform".into()]);
    cfg.n = 100;
    cfg.out = dir.path().join("synth.tsv");

    let (table, _) = cmd_synth(&cfg)?;
    print!("{}", table.to_tsv());
    Ok(())
}
