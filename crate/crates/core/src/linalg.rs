//! Regularized Gram matrices Λ = I + Σ φφᵀ with an incrementally maintained
//! inverse and log-determinant.

use crate::error::{Error, Result};
use crate::scalar::{dot, Real};

#[cfg(debug_assertions)]
const REBASELINE_EVERY: u64 = 10_000;

#[derive(Clone, Debug)]
pub struct DesignMatrix<T> {
    dim: usize,
    // Row-major d×d.
    lambda: Vec<T>,
    inv: Vec<T>,
    logdet: T,
    updates: u64,
}

/// Read-only copy of Λ⁻¹ and log det Λ taken at an epoch start.
#[derive(Clone, Debug)]
pub struct AnchorSnapshot<T> {
    dim: usize,
    inv: Vec<T>,
    logdet: T,
}

impl<T: Real> DesignMatrix<T> {
    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpec("design matrix dimension must be positive".into()));
        }
        let eye = identity_vec(dim);
        Ok(Self {
            dim,
            lambda: eye.clone(),
            inv: eye,
            logdet: T::zero(),
            updates: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> &[T] {
        &self.lambda
    }

    pub fn inverse(&self) -> &[T] {
        &self.inv
    }

    pub fn logdet(&self) -> T {
        self.logdet
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Sherman–Morrison update Λ ← Λ + φφᵀ.
    pub fn rank_one_update(&mut self, phi: &[T]) {
        let d = self.dim;
        assert_eq!(phi.len(), d, "feature length mismatch");
        let u = mat_vec(&self.inv, phi, d);
        let quad = dot(phi, &u).max(T::zero());
        let denom = T::one() + quad;
        for i in 0..d {
            for j in 0..d {
                self.lambda[i * d + j] = self.lambda[i * d + j] + phi[i] * phi[j];
                self.inv[i * d + j] = self.inv[i * d + j] - u[i] * u[j] / denom;
            }
        }
        symmetrize(&mut self.inv, d);
        self.logdet = self.logdet + denom.ln();
        self.updates += 1;

        #[cfg(debug_assertions)]
        if self.updates % REBASELINE_EVERY == 0 {
            self.check_against_dense();
        }
    }

    #[cfg(debug_assertions)]
    fn check_against_dense(&self) {
        let (inv, logdet) = spd_inverse_logdet(&self.lambda, self.dim).expect("Λ stays positive definite");
        let dev = inv
            .iter()
            .zip(&self.inv)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        let tol = T::lit(1e-6).max(T::epsilon().sqrt());
        debug_assert!(dev <= tol, "incremental inverse drifted by {dev}");
        debug_assert!(
            (logdet - self.logdet).abs() <= tol * (T::one() + logdet.abs()),
            "incremental logdet drifted: {} vs {logdet}",
            self.logdet
        );
    }

    /// ‖φ‖_{Λ⁻¹} = sqrt(φᵀΛ⁻¹φ).
    pub fn mahalanobis(&self, phi: &[T]) -> Result<T> {
        quad_norm(&self.inv, self.dim, phi)
    }

    /// θ̂ = Λ⁻¹ b.
    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        mat_vec(&self.inv, rhs, self.dim)
    }

    pub fn snapshot(&self) -> AnchorSnapshot<T> {
        AnchorSnapshot {
            dim: self.dim,
            inv: self.inv.clone(),
            logdet: self.logdet,
        }
    }

    /// det Λ ≥ 2 det Λ_anchor, evaluated in log space.
    pub fn epoch_trigger(&self, anchor_logdet: T) -> bool {
        epoch_trigger(self.logdet, anchor_logdet)
    }
}

impl<T: Real> AnchorSnapshot<T> {
    pub fn logdet(&self) -> T {
        self.logdet
    }

    pub fn inverse(&self) -> &[T] {
        &self.inv
    }

    pub fn mahalanobis(&self, phi: &[T]) -> Result<T> {
        quad_norm(&self.inv, self.dim, phi)
    }
}

pub fn epoch_trigger<T: Real>(current_logdet: T, anchor_logdet: T) -> bool {
    current_logdet - anchor_logdet >= T::LN_2() - T::lit(1e-12)
}

fn quad_norm<T: Real>(inv: &[T], d: usize, phi: &[T]) -> Result<T> {
    let q = dot(phi, &mat_vec(inv, phi, d));
    if q >= T::zero() {
        Ok(q.sqrt())
    } else if q >= -T::quad_form_slack() {
        Ok(T::zero())
    } else {
        Err(Error::Consistency(format!("negative quadratic form {q}")))
    }
}

fn identity_vec<T: Real>(d: usize) -> Vec<T> {
    let mut m = vec![T::zero(); d * d];
    for i in 0..d {
        m[i * d + i] = T::one();
    }
    m
}

pub(crate) fn mat_vec<T: Real>(m: &[T], x: &[T], d: usize) -> Vec<T> {
    m.chunks_exact(d).map(|row| dot(row, x)).collect()
}

fn symmetrize<T: Real>(m: &mut [T], d: usize) {
    let half = T::lit(0.5);
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = (m[i * d + j] + m[j * d + i]) * half;
            m[i * d + j] = avg;
            m[j * d + i] = avg;
        }
    }
}

/// Dense inverse and log-determinant of a symmetric positive-definite matrix
/// via Cholesky. Returns `None` if the matrix is not positive definite.
pub fn spd_inverse_logdet<T: Real>(m: &[T], d: usize) -> Option<(Vec<T>, T)> {
    // L lower-triangular with m = L Lᵀ.
    let mut l = vec![T::zero(); d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = m[i * d + j];
            for k in 0..j {
                s = s - l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    let logdet = (0..d).map(|i| l[i * d + i].ln()).sum::<T>() * T::lit(2.0);
    // Solve L Lᵀ X = I column by column.
    let mut inv = vec![T::zero(); d * d];
    let mut y = vec![T::zero(); d];
    for col in 0..d {
        for i in 0..d {
            let mut s = if i == col { T::one() } else { T::zero() };
            for k in 0..i {
                s = s - l[i * d + k] * y[k];
            }
            y[i] = s / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut s = y[i];
            for k in (i + 1)..d {
                s = s - l[k * d + i] * inv[k * d + col];
            }
            inv[i * d + col] = s / l[i * d + i];
        }
    }
    Some((inv, logdet))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_basics() {
        let m = DesignMatrix::<f64>::identity(3).unwrap();
        assert_eq!(m.logdet(), 0.0);
        assert_eq!(m.mahalanobis(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
        assert_eq!(m.mahalanobis(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(DesignMatrix::<f64>::identity(0).is_err());
        assert_eq!(DesignMatrix::<f64>::identity(20).unwrap().dim(), 20);
    }

    #[test]
    fn diagonal_update() {
        let mut m = DesignMatrix::<f64>::identity(2).unwrap();
        m.rank_one_update(&[1.0, 0.0]);
        assert_eq!(m.lambda(), &[2.0, 0.0, 0.0, 1.0]);
        assert_abs_diff_eq!(m.logdet(), 2f64.ln(), epsilon = 1e-15);
        let inv = m.inverse();
        assert_abs_diff_eq!(inv[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(inv[3], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(inv[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m.mahalanobis(&[1.0, 0.0]).unwrap(), 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn trigger_boundary() {
        assert!(epoch_trigger(2f64.ln(), 0.0));
        assert!(!epoch_trigger(0.5f64, 0.0));
        let mut m = DesignMatrix::<f64>::identity(4).unwrap();
        assert!(!m.epoch_trigger(0.0));
        m.rank_one_update(&[0.0, 1.0, 0.0, 0.0]);
        assert!(m.epoch_trigger(0.0));
    }

    #[test]
    fn mahalanobis_rejects_indefinite() {
        let anchor = AnchorSnapshot {
            dim: 1,
            inv: vec![-1.0f64],
            logdet: 0.0,
        };
        assert!(anchor.mahalanobis(&[1.0]).is_err());
        let tiny = AnchorSnapshot {
            dim: 1,
            inv: vec![-1e-13f64],
            logdet: 0.0,
        };
        assert_eq!(tiny.mahalanobis(&[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn cholesky_inverse() {
        let m = [4.0f64, 2.0, 2.0, 3.0];
        let (inv, logdet) = spd_inverse_logdet(&m, 2).unwrap();
        assert_abs_diff_eq!(logdet, 8f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(inv[0], 3.0 / 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[1], -2.0 / 8.0, epsilon = 1e-14);
        assert_abs_diff_eq!(inv[3], 4.0 / 8.0, epsilon = 1e-14);
        assert!(spd_inverse_logdet(&[1.0f64, 2.0, 2.0, 1.0], 2).is_none());
    }

    #[test]
    fn f32_design_matrix() {
        let mut m = DesignMatrix::<f32>::identity(3).unwrap();
        for _ in 0..5 {
            m.rank_one_update(&[0.6, 0.8, 0.0]);
        }
        let (inv, logdet) = spd_inverse_logdet(m.lambda(), 3).unwrap();
        assert!((logdet - m.logdet()).abs() < 1e-5);
        for (a, b) in inv.iter().zip(m.inverse()) {
            assert!((a - b).abs() < 1e-5);
        }
    }
}
