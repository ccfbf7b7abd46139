use lincmdp::linalg::epoch_trigger;
use lincmdp::DesignMatrix;
use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Exact det(I + Σ φφᵀ) over the rationals, for deciding ties at ratio 2
/// that floating-point determinants cannot resolve.
fn exact_det(features: &[Vec<f64>], d: usize) -> BigRational {
    let q = |x: f64| BigRational::from_float(x).expect("finite feature");
    let mut m: Vec<Vec<BigRational>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for phi in features {
        let phi: Vec<BigRational> = phi.iter().map(|&x| q(x)).collect();
        for i in 0..d {
            for j in 0..d {
                m[i][j] += &phi[i] * &phi[j];
            }
        }
    }
    // Λ is positive definite, so every leading pivot is non-zero.
    let mut det = BigRational::one();
    for c in 0..d {
        let pivot = m[c][c].clone();
        det *= &pivot;
        for r in (c + 1)..d {
            let factor = &m[r][c] / &pivot;
            for j in c..d {
                let delta = &factor * &m[c][j];
                m[r][j] -= delta;
            }
        }
    }
    det
}

/// det Λ_t ≥ 2 det Λ_anchor, decided in floating point away from the tie
/// and exactly near it.
fn direct_trigger(features: &[Vec<f64>], d: usize, t: usize, anchor: usize, det: f64, anchor_det: f64) -> bool {
    if (det / anchor_det - 2.0).abs() > 1e-9 {
        return det >= 2.0 * anchor_det;
    }
    let two = BigRational::from_integer(2.into());
    exact_det(&features[..t], d) >= two * exact_det(&features[..anchor], d)
}

/// Features inside the unit ball: a uniform direction scaled by a radius in [0, 1).
fn feature_sequences() -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (1usize..=10).prop_flat_map(|d| {
        let phi = (prop::collection::vec(-1.0f64..1.0, d), 0.0f64..1.0).prop_map(|(v, r)| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                v
            } else {
                v.iter().map(|x| x * r / n).collect()
            }
        });
        (Just(d), prop::collection::vec(phi, 0..=200))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn incremental_inverse_matches_dense((d, seq) in feature_sequences()) {
        let mut m = DesignMatrix::<f64>::identity(d).unwrap();
        let mut dense = DMatrix::<f64>::identity(d, d);
        let mut anchor_det = 1.0;
        let mut anchor_logdet = 0.0;
        let mut anchor_len = 0;
        for (t, phi) in seq.iter().enumerate() {
            m.rank_one_update(phi);
            let v = DVector::from_column_slice(phi);
            dense += &v * v.transpose();

            let inv = dense.clone().try_inverse().unwrap();
            let det = dense.determinant();
            for i in 0..d {
                for j in 0..d {
                    prop_assert!((inv[(i, j)] - m.inverse()[i * d + j]).abs() <= 1e-8);
                }
            }
            prop_assert!((det.ln() - m.logdet()).abs() <= 1e-8);

            let direct = direct_trigger(&seq, d, t + 1, anchor_len, det, anchor_det);
            prop_assert_eq!(m.epoch_trigger(anchor_logdet), direct);
            prop_assert_eq!(epoch_trigger(m.logdet(), anchor_logdet), direct);
            if direct {
                anchor_det = det;
                anchor_logdet = m.logdet();
                anchor_len = t + 1;
            }
        }
    }

    #[test]
    fn mahalanobis_and_solve_match_dense((d, seq) in feature_sequences(), probe in prop::collection::vec(-1.0f64..1.0, 10)) {
        let mut m = DesignMatrix::<f64>::identity(d).unwrap();
        let mut dense = DMatrix::<f64>::identity(d, d);
        for phi in &seq {
            m.rank_one_update(phi);
            let v = DVector::from_column_slice(phi);
            dense += &v * v.transpose();
        }
        let x = DVector::from_column_slice(&probe[..d]);
        let inv = dense.try_inverse().unwrap();
        let quad = (x.transpose() * &inv * &x)[(0, 0)];
        prop_assert!((m.mahalanobis(&probe[..d]).unwrap() - quad.sqrt()).abs() <= 1e-8);
        let solved = m.solve(&probe[..d]);
        let reference = &inv * &x;
        for i in 0..d {
            prop_assert!((solved[i] - reference[i]).abs() <= 1e-8);
        }
    }
}

#[test]
fn unit_feature_doubles_exactly() {
    // det(I + φφᵀ) = 2 exactly for a one-hot feature: a tie that must trigger.
    let phi = vec![0.0, 1.0, 0.0];
    let mut m = DesignMatrix::<f64>::identity(3).unwrap();
    m.rank_one_update(&phi);
    assert!(m.epoch_trigger(0.0));
    assert!(exact_det(&[phi], 3) >= BigRational::from_integer(2.into()));
}

#[test]
fn snapshot_is_frozen() {
    let mut m = DesignMatrix::<f64>::identity(3).unwrap();
    m.rank_one_update(&[0.5, 0.5, 0.0]);
    let anchor = m.snapshot();
    let before = anchor.mahalanobis(&[1.0, 0.0, 0.0]).unwrap();
    m.rank_one_update(&[1.0, 0.0, 0.0]);
    assert_eq!(anchor.mahalanobis(&[1.0, 0.0, 0.0]).unwrap(), before);
    assert!(m.mahalanobis(&[1.0, 0.0, 0.0]).unwrap() < before);
}
