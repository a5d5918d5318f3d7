//! Randomized property tests over the numerical core: structural facts that
//! must hold for *every* input, not just the worked examples.

use nalgebra::DMatrix;
use proptest::prelude::*;

use kernel_deviance::datagen::{generate_scalar, Mechanism, MechanismSpec, NoiseLaw, PairDataset};
use kernel_deviance::dataio::{downsample, TcepPair};
use kernel_deviance::embedding::{conditional_embeddings, quadratic_featuremap_embedding};
use kernel_deviance::infer::{decide, Decision};
use kernel_deviance::kernel::{gram, median_heuristic, KernelConfig};
use kernel_deviance::rng::mix;
use kernel_deviance::score::{igci_score, kcdc_score, IgciReference, ScoreConfig};

fn finite_points(n: usize, d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-50.0..50.0f64, n * d)
        .prop_map(move |v| DMatrix::from_row_slice(n, d, &v))
}

/// Sample matrices whose rows are guaranteed pairwise distinct, so the
/// median heuristic is well defined.
fn spread_points(n: usize, d: usize) -> impl Strategy<Value = DMatrix<f64>> {
    finite_points(n, d).prop_map(move |mut m| {
        for i in 0..n {
            m[(i, 0)] += 1000.0 * i as f64;
        }
        m
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mix_is_deterministic_and_order_sensitive(a in any::<u64>(), b in any::<u64>()) {
        prop_assert_eq!(mix(&[a, b]), mix(&[a, b]));
        if a != b {
            prop_assert_ne!(mix(&[a, b]), mix(&[b, a]));
        }
    }

    #[test]
    fn gram_is_symmetric_and_psd(pts in spread_points(6, 2)) {
        let cfg = KernelConfig::product(median_heuristic(&pts).unwrap());
        let g = gram(&pts, &cfg).unwrap();
        prop_assert_eq!(&g.entries, &g.entries.transpose());
        let eigs = g.entries.clone().symmetric_eigen().eigenvalues;
        let max = eigs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = eigs.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(min >= -1e-8 * max.max(1.0), "eigenvalues {min} .. {max}");
    }

    #[test]
    fn median_heuristic_ignores_translation(pts in spread_points(5, 1), shift in -100.0..100.0f64) {
        let base = median_heuristic(&pts).unwrap();
        let moved = median_heuristic(&pts.add_scalar(shift)).unwrap();
        prop_assert!((base - moved).abs() <= 1e-9 * base.abs().max(1.0));
    }

    #[test]
    fn embedding_coefficients_satisfy_their_defining_system(pts in spread_points(5, 1), lambda in 1e-4..1.0f64) {
        // coeffs = K_y · alphas, and (K_x + λI)·alphas = K_x: both sides of
        // the construction, checked against the raw gram matrices.
        let ys = pts.map(|v| (v * 0.01).sin());
        let kx = KernelConfig::product(median_heuristic(&pts).unwrap());
        let ky = KernelConfig::product(median_heuristic(&ys).unwrap());
        let gx = gram(&pts, &kx).unwrap();
        let gy = gram(&ys, &ky).unwrap();
        let set = conditional_embeddings(&gx, &gy, lambda).unwrap();
        let residual = (&gx.entries + DMatrix::identity(5, 5) * lambda) * &set.alphas - &gx.entries;
        prop_assert!(residual.norm() <= 1e-8 * gx.entries.norm());
        let cdiff = (&gy.entries * &set.alphas - &set.coeffs).norm();
        prop_assert!(cdiff <= 1e-10 * set.coeffs.norm().max(1.0));
    }

    #[test]
    fn quadratic_featuremap_obeys_the_offset_law(
        samples in prop::collection::vec(-10.0..10.0f64, 1..20),
        b in -10.0..10.0f64,
    ) {
        let base = quadratic_featuremap_embedding(&samples).unwrap();
        let shifted: Vec<f64> = samples.iter().map(|v| v + b).collect();
        let moved = quadratic_featuremap_embedding(&shifted).unwrap();
        // M(b) = [[1,0,0],[b,1,0],[b²,2b,1]] applied to the base embedding.
        let expect = [
            base[0],
            b * base[0] + base[1],
            b * b * base[0] + 2.0 * b * base[1] + base[2],
        ];
        for (m, e) in moved.iter().zip(&expect) {
            prop_assert!((m - e).abs() <= 1e-9 * e.abs().max(1.0), "{m} vs {e}");
        }
    }

    #[test]
    fn decision_rule_mirrors_under_score_exchange(a in -1e6..1e6f64, e in -1e6..1e6f64) {
        let fwd = decide(a, e).unwrap();
        let rev = decide(e, a).unwrap();
        let expected = match fwd {
            Decision::XtoY => Decision::YtoX,
            Decision::YtoX => Decision::XtoY,
            Decision::Undecided => Decision::Undecided,
        };
        prop_assert_eq!(rev, expected);
    }

    #[test]
    fn igci_uniform_is_invariant_under_affine_maps(
        seed in 0u64..500,
        scale in prop::sample::select(vec![-3.0, -0.5, 0.25, 2.0]),
        shift in -5.0..5.0f64,
    ) {
        // The [0, 1] normalization absorbs any affine rescaling of either
        // variable (a negative scale reverses the sort order but the slope
        // sum is unchanged).
        let data = generate_scalar(&MechanismSpec {
            mechanism: Mechanism::Mnm2,
            noise: NoiseLaw::StdNormal,
            n: 30,
            seed,
        })
        .unwrap();
        let cfg = ScoreConfig {
            igci_reference: IgciReference::Uniform,
            ..ScoreConfig::default()
        };
        let base = igci_score(&data.x, &data.y, &cfg).unwrap().value;
        let mapped_x = data.x.map(|v| scale * v + shift);
        let mapped = igci_score(&mapped_x, &data.y, &cfg).unwrap().value;
        prop_assert!((base - mapped).abs() <= 1e-8 * base.abs().max(1.0), "{base} vs {mapped}");
    }

    #[test]
    fn kcdc_ignores_sample_ordering(seed in 0u64..500) {
        let data = generate_scalar(&MechanismSpec {
            mechanism: Mechanism::Anm1,
            noise: NoiseLaw::StdUniform,
            n: 25,
            seed,
        })
        .unwrap();
        let cfg = ScoreConfig::default();
        let base = kcdc_score(&data.x, &data.y, &cfg).unwrap().value;
        // Reverse the row order: the score is a set functional.
        let n = data.x.nrows();
        let perm_x = DMatrix::from_fn(n, 1, |i, _| data.x[(n - 1 - i, 0)]);
        let perm_y = DMatrix::from_fn(n, 1, |i, _| data.y[(n - 1 - i, 0)]);
        let perm = kcdc_score(&perm_x, &perm_y, &cfg).unwrap().value;
        prop_assert!((base - perm).abs() <= 1e-9 * base.abs().max(1e-12));
    }

    #[test]
    fn downsample_returns_a_deterministic_subset(seed in any::<u64>(), cap in 2usize..15) {
        let n = 25;
        // Values encode the sample index, so subset membership is checkable.
        let pair = TcepPair {
            id: "pair0007".into(),
            data: PairDataset {
                x: DMatrix::from_fn(n, 1, |i, _| i as f64),
                y: DMatrix::from_fn(n, 1, |i, _| 1000.0 + i as f64),
                truth: None,
                provenance: "property test".into(),
            },
            weight: 1.0,
        };
        let a = downsample(&pair, cap, seed).unwrap();
        let b = downsample(&pair, cap, seed).unwrap();
        prop_assert_eq!(&a.data.x, &b.data.x);
        prop_assert_eq!(&a.data.y, &b.data.y);
        prop_assert_eq!(a.data.n(), cap);
        for i in 0..cap {
            let idx = a.data.x[(i, 0)] as usize;
            prop_assert!(idx < n);
            // x and y rows stay aligned through the shuffle.
            prop_assert_eq!(a.data.y[(i, 0)], 1000.0 + idx as f64);
        }
    }
}
