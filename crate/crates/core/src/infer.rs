//! Direction decisions: score both orientations of a pair and compare.
//!
//! The decision rule is a strict comparison of the two directional scores —
//! smaller deviance wins, an exact floating-point tie is `Undecided`. Each
//! orientation gets its own seed (`cfg.seed` for x→y, `cfg.seed + 1` for
//! y→x) so stochastic scorers run two independent but reproducible
//! optimizations.

use crate::datagen::PairDataset;
use crate::error::{Error, Result};
use crate::score::{score, Method, ScoreConfig};

/// Ground-truth causal direction of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    XtoY,
    YtoX,
}

impl Direction {
    pub fn flipped(self) -> Direction {
        match self {
            Direction::XtoY => Direction::YtoX,
            Direction::YtoX => Direction::XtoY,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Direction::XtoY => "x->y",
            Direction::YtoX => "y->x",
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of comparing the two directional scores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Decision {
    XtoY,
    YtoX,
    Undecided,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::XtoY => "x->y",
            Decision::YtoX => "y->x",
            Decision::Undecided => "undecided",
        }
    }

    /// Whether this decision names the given true direction.
    pub fn matches(self, truth: Direction) -> bool {
        matches!(
            (self, truth),
            (Decision::XtoY, Direction::XtoY) | (Decision::YtoX, Direction::YtoX)
        )
    }
}

impl std::fmt::Display for Decision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Decision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Decision> {
        match s {
            "x->y" => Ok(Decision::XtoY),
            "y->x" => Ok(Decision::YtoX),
            "undecided" => Ok(Decision::Undecided),
            other => Err(Error::InvalidInput(format!(
                "unknown decision {other:?}; expected x->y, y->x, or undecided"
            ))),
        }
    }
}

/// A decided pair with both scores and the reproducibility handle.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionDecision {
    pub decision: Decision,
    pub score_xy: f64,
    pub score_yx: f64,
    pub method: Method,
    pub seed: u64,
}

/// Strict-comparison decision rule. NaN on either side is an error rather
/// than a silent Undecided; infinities compare normally.
pub fn decide(score_xy: f64, score_yx: f64) -> Result<Decision> {
    if score_xy.is_nan() || score_yx.is_nan() {
        return Err(Error::InvalidInput(format!(
            "decide: scores must not be NaN (got {score_xy}, {score_yx})"
        )));
    }
    Ok(if score_xy < score_yx {
        Decision::XtoY
    } else if score_xy > score_yx {
        Decision::YtoX
    } else {
        Decision::Undecided
    })
}

/// Score both orientations of a dataset and decide. Kernel bandwidths are
/// re-derived per direction inside the scorer; errors are annotated with the
/// direction they came from.
pub fn infer_pair(
    dataset: &PairDataset,
    method: Method,
    cfg: &ScoreConfig,
) -> Result<DirectionDecision> {
    let cfg_xy = cfg.clone();
    let mut cfg_yx = cfg.clone();
    cfg_yx.seed = cfg.seed.wrapping_add(1);

    let score_xy = score(method, &dataset.x, &dataset.y, &cfg_xy)
        .map_err(Error::in_direction("x->y"))?
        .value;
    let score_yx = score(method, &dataset.y, &dataset.x, &cfg_yx)
        .map_err(Error::in_direction("y->x"))?
        .value;

    Ok(DirectionDecision {
        decision: decide(score_xy, score_yx)?,
        score_xy,
        score_yx,
        method,
        seed: cfg.seed,
    })
}

/// Accuracy summary with per-category counts. `accuracy` is the fraction of
/// decisions naming the true direction; Undecided is graded incorrect.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyRecord {
    pub accuracy: f64,
    pub correct: usize,
    pub incorrect: usize,
    pub undecided: usize,
    pub total: usize,
}

/// Plain (unweighted) accuracy over paired decisions and truths.
pub fn evaluate_accuracy(decisions: &[Decision], truths: &[Direction]) -> Result<AccuracyRecord> {
    if decisions.len() != truths.len() {
        return Err(Error::InvalidInput(format!(
            "evaluate_accuracy: {} decisions vs {} truths",
            decisions.len(),
            truths.len()
        )));
    }
    if decisions.is_empty() {
        return Err(Error::InvalidInput(
            "evaluate_accuracy: empty decision list".into(),
        ));
    }
    let mut correct = 0;
    let mut undecided = 0;
    for (&d, &t) in decisions.iter().zip(truths) {
        if d == Decision::Undecided {
            undecided += 1;
        } else if d.matches(t) {
            correct += 1;
        }
    }
    let total = decisions.len();
    Ok(AccuracyRecord {
        accuracy: correct as f64 / total as f64,
        correct,
        incorrect: total - correct - undecided,
        undecided,
        total,
    })
}

/// Weight-averaged accuracy: each pair contributes its weight, correct pairs
/// contribute to the numerator. Counts are still raw tallies.
pub fn evaluate_weighted_accuracy(
    decisions: &[Decision],
    truths: &[Direction],
    weights: &[f64],
) -> Result<AccuracyRecord> {
    if decisions.len() != truths.len() || decisions.len() != weights.len() {
        return Err(Error::InvalidInput(format!(
            "evaluate_weighted_accuracy: {} decisions, {} truths, {} weights",
            decisions.len(),
            truths.len(),
            weights.len()
        )));
    }
    if decisions.is_empty() {
        return Err(Error::InvalidInput(
            "evaluate_weighted_accuracy: empty decision list".into(),
        ));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput(
            "evaluate_weighted_accuracy: weights must be finite and non-negative".into(),
        ));
    }
    let total_weight: f64 = weights.iter().sum();
    if total_weight <= 0.0 {
        return Err(Error::InvalidInput(
            "evaluate_weighted_accuracy: total weight must be positive".into(),
        ));
    }
    let mut correct_weight = 0.0;
    let mut correct = 0;
    let mut undecided = 0;
    for ((&d, &t), &w) in decisions.iter().zip(truths).zip(weights) {
        if d == Decision::Undecided {
            undecided += 1;
        } else if d.matches(t) {
            correct_weight += w;
            correct += 1;
        }
    }
    let total = decisions.len();
    Ok(AccuracyRecord {
        accuracy: correct_weight / total_weight,
        correct,
        incorrect: total - correct - undecided,
        undecided,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{generate_scalar, Mechanism, MechanismSpec, NoiseLaw};

    #[test]
    fn decide_follows_strict_comparison() {
        assert_eq!(decide(1.0, 2.0).unwrap(), Decision::XtoY);
        assert_eq!(decide(2.0, 1.0).unwrap(), Decision::YtoX);
        assert_eq!(decide(1.0, 1.0).unwrap(), Decision::Undecided);
        assert_eq!(decide(f64::NEG_INFINITY, 0.0).unwrap(), Decision::XtoY);
        assert_eq!(decide(f64::INFINITY, f64::INFINITY).unwrap(), Decision::Undecided);
        assert!(decide(f64::NAN, 1.0).is_err());
        assert!(decide(1.0, f64::NAN).is_err());
    }

    #[test]
    fn identical_variables_are_undecided_under_igci() {
        let base = generate_scalar(&MechanismSpec {
            mechanism: Mechanism::Anm2,
            noise: NoiseLaw::StdNormal,
            n: 40,
            seed: 9,
        })
        .unwrap();
        let dataset = PairDataset {
            y: base.x.clone(),
            ..base
        };
        let d = infer_pair(&dataset, Method::Igci, &ScoreConfig::default()).unwrap();
        assert_eq!(d.decision, Decision::Undecided);
        assert_eq!(d.score_xy, d.score_yx);
    }

    #[test]
    fn swapping_a_pair_mirrors_seed_matched_decisions() {
        // Deterministic scorers ignore the seed, so swapping the dataset
        // exchanges the two scores bitwise and mirrors the decision.
        let dataset = generate_scalar(&MechanismSpec {
            mechanism: Mechanism::Mnm1,
            noise: NoiseLaw::StdUniform,
            n: 30,
            seed: 4,
        })
        .unwrap();
        for method in [Method::Igci, Method::Kcdc, Method::Kiim] {
            let fwd = infer_pair(&dataset, method, &ScoreConfig::default()).unwrap();
            let rev = infer_pair(&dataset.swapped(), method, &ScoreConfig::default()).unwrap();
            assert_eq!(fwd.score_xy, rev.score_yx, "{method}");
            assert_eq!(fwd.score_yx, rev.score_xy, "{method}");
            match fwd.decision {
                Decision::XtoY => assert_eq!(rev.decision, Decision::YtoX),
                Decision::YtoX => assert_eq!(rev.decision, Decision::XtoY),
                Decision::Undecided => assert_eq!(rev.decision, Decision::Undecided),
            }
        }
    }

    #[test]
    fn direction_errors_name_the_failing_orientation() {
        let base = generate_scalar(&MechanismSpec {
            mechanism: Mechanism::Anm1,
            noise: NoiseLaw::StdNormal,
            n: 10,
            seed: 0,
        })
        .unwrap();
        // A constant effect makes the y-side median heuristic degenerate in
        // the x→y orientation.
        let dataset = PairDataset {
            y: nalgebra::DMatrix::from_element(10, 1, 3.0),
            ..base
        };
        let err = infer_pair(&dataset, Method::Kcdc, &ScoreConfig::default()).unwrap_err();
        assert!(err.to_string().contains("x->y"), "{err}");
    }

    #[test]
    fn accuracy_counts_and_convention() {
        use Decision as D;
        use Direction as T;
        let decisions = [D::XtoY, D::YtoX, D::Undecided, D::XtoY, D::XtoY];
        let truths = [T::XtoY, T::YtoX, T::XtoY, T::YtoX, T::XtoY];
        let rec = evaluate_accuracy(&decisions, &truths).unwrap();
        assert_eq!(rec.correct, 3);
        assert_eq!(rec.incorrect, 1);
        assert_eq!(rec.undecided, 1);
        assert_eq!(rec.total, 5);
        assert!((rec.accuracy - 0.6).abs() < 1e-15);

        let all_undecided = [D::Undecided; 3];
        let rec = evaluate_accuracy(&all_undecided, &[T::XtoY; 3]).unwrap();
        assert_eq!(rec.accuracy, 0.0);

        let rec = evaluate_accuracy(&[D::XtoY], &[T::XtoY]).unwrap();
        assert_eq!(rec.accuracy, 1.0);

        assert!(evaluate_accuracy(&[], &[]).is_err());
        assert!(evaluate_accuracy(&[D::XtoY], &[]).is_err());
    }

    #[test]
    fn weighted_accuracy_uses_weights_for_the_ratio_only() {
        use Decision as D;
        use Direction as T;
        let decisions = [D::XtoY, D::YtoX];
        let truths = [T::XtoY, T::XtoY];
        let rec = evaluate_weighted_accuracy(&decisions, &truths, &[3.0, 1.0]).unwrap();
        assert!((rec.accuracy - 0.75).abs() < 1e-15);
        assert_eq!(rec.correct, 1);
        assert_eq!(rec.incorrect, 1);

        // Degenerate weights are rejected.
        assert!(evaluate_weighted_accuracy(&decisions, &truths, &[0.0, 0.0]).is_err());
        assert!(evaluate_weighted_accuracy(&decisions, &truths, &[1.0]).is_err());
        assert!(evaluate_weighted_accuracy(&decisions, &truths, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn decisions_parse_back_from_their_names() {
        for d in [Decision::XtoY, Decision::YtoX, Decision::Undecided] {
            assert_eq!(d.name().parse::<Decision>().unwrap(), d);
        }
        assert!("sideways".parse::<Decision>().is_err());
    }
}
