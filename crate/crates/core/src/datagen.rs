//! Deterministic synthetic cause-effect pair generation.
//!
//! Five scalar mechanisms map a standard-normal cause x and a noise draw ε
//! to the effect:
//!
//! | mechanism | y                                  | noise entry |
//! |-----------|------------------------------------|-------------|
//! | `Anm1`    | x³ + x + ε                         | additive    |
//! | `Anm2`    | x + ε                              | additive    |
//! | `Mnm1`    | (x³ + x)·exp(ε)                    | multiplicative |
//! | `Mnm2`    | (sin 10x + exp 3x)·exp(ε)          | multiplicative |
//! | `Cnm`     | ln(x⁶ + 5) + x⁵ − sin(x²·|ε|)      | nonseparable |
//!
//! ε is drawn standard normal or standard uniform U(0, 1). Two-dimensional
//! pairs stack two *different* mechanisms (same noise law, independent draws
//! per dimension). Everything is a pure function of the seed: streams are
//! derived by hashing (tag, seed, dimension), so datasets are bit-reproducible
//! across runs and platforms.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::infer::Direction;
use crate::rng::{self, tag};

/// Scalar cause→effect mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Anm1,
    Anm2,
    Mnm1,
    Mnm2,
    Cnm,
}

impl Mechanism {
    pub const ALL: [Mechanism; 5] = [
        Mechanism::Anm1,
        Mechanism::Anm2,
        Mechanism::Mnm1,
        Mechanism::Mnm2,
        Mechanism::Cnm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mechanism::Anm1 => "anm-1",
            Mechanism::Anm2 => "anm-2",
            Mechanism::Mnm1 => "mnm-1",
            Mechanism::Mnm2 => "mnm-2",
            Mechanism::Cnm => "cnm",
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Noise law for ε.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoiseLaw {
    StdNormal,
    StdUniform,
}

impl NoiseLaw {
    pub fn name(self) -> &'static str {
        match self {
            NoiseLaw::StdNormal => "normal",
            NoiseLaw::StdUniform => "uniform",
        }
    }
}

impl std::fmt::Display for NoiseLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Full recipe for one scalar dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MechanismSpec {
    pub mechanism: Mechanism,
    pub noise: NoiseLaw,
    pub n: usize,
    pub seed: u64,
}

/// A paired sample with its ground truth (when known) and a human-readable
/// provenance string for table headers and exports.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDataset {
    /// n×d_x cause candidates.
    pub x: DMatrix<f64>,
    /// n×d_y effect candidates.
    pub y: DMatrix<f64>,
    /// Ground-truth direction; generated data is always `XtoY`, file-loaded
    /// data carries whatever its metadata says.
    pub truth: Option<Direction>,
    pub provenance: String,
}

impl PairDataset {
    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// The same data with the roles of x and y exchanged (truth flipped).
    pub fn swapped(&self) -> PairDataset {
        PairDataset {
            x: self.y.clone(),
            y: self.x.clone(),
            truth: self.truth.map(Direction::flipped),
            provenance: format!("{}:swapped", self.provenance),
        }
    }
}

/// The effect value for one (x, ε) draw.
pub fn mechanism_value(mechanism: Mechanism, x: f64, eps: f64) -> f64 {
    match mechanism {
        Mechanism::Anm1 => x.powi(3) + x + eps,
        Mechanism::Anm2 => x + eps,
        Mechanism::Mnm1 => (x.powi(3) + x) * eps.exp(),
        Mechanism::Mnm2 => ((10.0 * x).sin() + (3.0 * x).exp()) * eps.exp(),
        Mechanism::Cnm => (x.powi(6) + 5.0).ln() + x.powi(5) - (x * x * eps.abs()).sin(),
    }
}

/// One scalar dimension from an already-positioned stream: first all n cause
/// draws, then all n noise draws — the fixed order that defines what a seed
/// means.
fn scalar_columns(
    mechanism: Mechanism,
    noise: NoiseLaw,
    n: usize,
    rng: &mut impl Rng,
) -> (DVector<f64>, DVector<f64>) {
    let x = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let eps = DVector::from_fn(n, |_, _| match noise {
        NoiseLaw::StdNormal => rng.sample::<f64, _>(StandardNormal),
        NoiseLaw::StdUniform => rng.gen::<f64>(),
    });
    let y = DVector::from_fn(n, |i, _| mechanism_value(mechanism, x[i], eps[i]));
    (x, y)
}

/// Scalar dataset: x ~ N(0,1), ε per the spec's noise law, y per mechanism.
pub fn generate_scalar(spec: &MechanismSpec) -> Result<PairDataset> {
    if spec.n < 2 {
        return Err(Error::InvalidInput(format!(
            "generate_scalar: need n >= 2, got {}",
            spec.n
        )));
    }
    let mut rng = rng::stream(&[tag::DATASET, spec.seed]);
    let (x, y) = scalar_columns(spec.mechanism, spec.noise, spec.n, &mut rng);
    Ok(PairDataset {
        x: DMatrix::from_column_slice(spec.n, 1, x.as_slice()),
        y: DMatrix::from_column_slice(spec.n, 1, y.as_slice()),
        truth: Some(Direction::XtoY),
        provenance: format!(
            "synth:{}:{}:n={}:seed={}",
            spec.mechanism, spec.noise, spec.n, spec.seed
        ),
    })
}

/// Two-dimensional dataset stacking two different mechanisms that share one
/// noise law. Dimension k draws from its own derived stream, so the two
/// dimensions are independent yet jointly determined by `seed`. The specs'
/// own `n`/`seed` fields are ignored in favor of the explicit arguments.
pub fn generate_2d(
    spec_a: &MechanismSpec,
    spec_b: &MechanismSpec,
    n: usize,
    seed: u64,
) -> Result<PairDataset> {
    if spec_a.mechanism == spec_b.mechanism {
        return Err(Error::InvalidInput(format!(
            "generate_2d: dimensions must use different mechanisms, both are {}",
            spec_a.mechanism
        )));
    }
    if spec_a.noise != spec_b.noise {
        return Err(Error::InvalidInput(format!(
            "generate_2d: dimensions must share one noise law, got {} and {}",
            spec_a.noise, spec_b.noise
        )));
    }
    if n < 2 {
        return Err(Error::InvalidInput(format!("generate_2d: need n >= 2, got {n}")));
    }

    let mut x = DMatrix::zeros(n, 2);
    let mut y = DMatrix::zeros(n, 2);
    for (dim, spec) in [spec_a, spec_b].into_iter().enumerate() {
        let mut rng = rng::stream(&[tag::DATASET, seed, dim as u64]);
        let (xc, yc) = scalar_columns(spec.mechanism, spec.noise, n, &mut rng);
        x.set_column(dim, &xc);
        y.set_column(dim, &yc);
    }
    Ok(PairDataset {
        x,
        y,
        truth: Some(Direction::XtoY),
        provenance: format!(
            "synth2d:{}+{}:{}:n={n}:seed={seed}",
            spec_a.mechanism, spec_b.mechanism, spec_a.noise
        ),
    })
}

/// Which benchmark family a setting list describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteKind {
    Scalar,
    TwoDim,
}

/// One experimental setting: a mechanism (or mechanism pair) and a noise law.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SettingSpec {
    /// One mechanism for scalar settings, two for two-dimensional ones.
    pub mechanisms: Vec<Mechanism>,
    pub noise: NoiseLaw,
}

impl SettingSpec {
    /// Stable identifier, e.g. `anm-1:normal` or `anm-1+mnm-2:uniform`.
    pub fn label(&self) -> String {
        let mechs: Vec<&str> = self.mechanisms.iter().map(|m| m.name()).collect();
        format!("{}:{}", mechs.join("+"), self.noise)
    }

    /// Generate this setting's dataset for one (n, seed).
    pub fn generate(&self, n: usize, seed: u64) -> Result<PairDataset> {
        match self.mechanisms.as_slice() {
            [m] => generate_scalar(&MechanismSpec {
                mechanism: *m,
                noise: self.noise,
                n,
                seed,
            }),
            [a, b] => {
                let mk = |m: Mechanism| MechanismSpec {
                    mechanism: m,
                    noise: self.noise,
                    n,
                    seed,
                };
                generate_2d(&mk(*a), &mk(*b), n, seed)
            }
            other => Err(Error::InvalidInput(format!(
                "setting must have 1 or 2 mechanisms, got {}",
                other.len()
            ))),
        }
    }
}

/// The benchmark's settings in report order: mechanisms in definition order
/// (pairs lexicographically), normal noise before uniform within each.
pub fn enumerate_settings(kind: SuiteKind) -> Vec<SettingSpec> {
    let noises = [NoiseLaw::StdNormal, NoiseLaw::StdUniform];
    let mut settings = Vec::new();
    match kind {
        SuiteKind::Scalar => {
            for m in Mechanism::ALL {
                for noise in noises {
                    settings.push(SettingSpec {
                        mechanisms: vec![m],
                        noise,
                    });
                }
            }
        }
        SuiteKind::TwoDim => {
            for (i, a) in Mechanism::ALL.into_iter().enumerate() {
                for b in Mechanism::ALL.into_iter().skip(i + 1) {
                    for noise in noises {
                        settings.push(SettingSpec {
                            mechanisms: vec![a, b],
                            noise,
                        });
                    }
                }
            }
        }
    }
    settings
}

/// Write a dataset as whitespace-separated text: a `#` header carrying the
/// provenance, then one row per sample with the x columns followed by the y
/// columns. The format round-trips through the pair-file loader.
pub fn export_dataset(dataset: &PairDataset, path: &Path) -> Result<()> {
    let mut body = String::new();
    let _ = writeln!(body, "# {}", dataset.provenance);
    let _ = writeln!(
        body,
        "# columns: x[{}] y[{}]",
        dataset.x.ncols(),
        dataset.y.ncols()
    );
    for i in 0..dataset.n() {
        let mut fields: Vec<String> = Vec::with_capacity(dataset.x.ncols() + dataset.y.ncols());
        for j in 0..dataset.x.ncols() {
            fields.push(format!("{:e}", dataset.x[(i, j)]));
        }
        for j in 0..dataset.y.ncols() {
            fields.push(format!("{:e}", dataset.y[(i, j)]));
        }
        let _ = writeln!(body, "{}", fields.join(" "));
    }
    std::fs::write(path, body).map_err(Error::io(path))
}
