//! Sensitivity of the trained score to its own hyperparameters.
//!
//! The trained projection score has two knobs of its own: the per-sample
//! projection rank r and the barrier weight λ_reg that keeps projections
//! away from zero. The grid command crosses them on a chosen setting and
//! reports accuracy per cell plus a best/worst/mean summary row, which is
//! the quickest way to see that the defaults sit on a plateau rather than
//! a peak.
//!
//! ```sh
//! cargo run --release --example hyperparameter_grid
//! ```

use kernel_deviance::experiments::{cmd_hypergrid, parse_method_list, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let mut cfg = RunConfig::default().desk_scale();
    cfg.methods = parse_method_list(&["kiim-ht".into()])?;
    cfg.settings = Some(vec!["mnm-1:normal".into()]);
    cfg.grid_ranks = vec![10, 100];
    cfg.grid_lambda_regs = vec![1e-4, 1e-3, 1e-2];
    cfg.datasets_per_trial = 5;
    cfg.n = 50;
    cfg.out = dir.path().join("hypergrid.tsv");

    let (table, _) = cmd_hypergrid(&cfg)?;
    print!("{}", table.to_tsv());
    Ok(())
}
