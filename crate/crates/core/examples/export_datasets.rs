//! Write synthetic datasets as pair files the `infer` command can read.
//!
//! One file per scalar setting lands in `exported-pairs/` (under
//! `KDCD_OUT_DIR` when set): two whitespace-separated columns, cause first,
//! with a `# columns:` annotation naming the layout. Feed one back through
//! the CLI to close the loop:
//!
//! ```sh
//! cargo run --release --example export_datasets
//! kdcd infer exported-pairs/anm-1_normal.txt --method kcdc
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use kernel_deviance::datagen::{enumerate_settings, SuiteKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = std::env::var_os("KDCD_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let dir = root.join("exported-pairs");
    fs::create_dir_all(&dir)?;

    for (i, setting) in enumerate_settings(SuiteKind::Scalar).iter().enumerate() {
        let data = setting.generate(200, 1000 + i as u64)?;
        let mut body = String::new();
        writeln!(body, "# {}", data.provenance)?;
        writeln!(body, "# columns: x[1] y[1]")?;
        for r in 0..data.n() {
            writeln!(body, "{:.10e} {:.10e}", data.x[(r, 0)], data.y[(r, 0)])?;
        }
        let name = format!("{}.txt", setting.label().replace(':', "_"));
        fs::write(dir.join(&name), body)?;
        println!("wrote {}", dir.join(&name).display());
    }
    Ok(())
}
