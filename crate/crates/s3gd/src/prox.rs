//! Regularizers with closed-form proximal operators.
//!
//! All three penalties are separable, so prox applies coordinate-wise. When a
//! weight vector carries the appended intercept coordinate, callers pass
//! `skip_last = true` and the intercept is neither penalized nor shrunk.

use ndarray::Array1;

use crate::error::{Error, Result};

/// Convex penalty R(w) added to the smooth objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularizer {
    /// lambda ||w||^2
    Tikhonov { lambda: f64 },
    /// lambda ||w||_1
    L1 { lambda: f64 },
    /// lambda (1 - alpha) ||w||_1 + lambda alpha ||w||^2
    ElasticNet { lambda: f64, alpha: f64 },
}

/// Scalar soft-thresholding operator, the prox of t|u|.
pub fn soft_threshold(u: f64, t: f64) -> f64 {
    u.signum() * (u.abs() - t).max(0.0)
}

impl Regularizer {
    pub fn tikhonov(lambda: f64) -> Result<Self> {
        Self::check_lambda(lambda)?;
        Ok(Regularizer::Tikhonov { lambda })
    }

    pub fn l1(lambda: f64) -> Result<Self> {
        Self::check_lambda(lambda)?;
        Ok(Regularizer::L1 { lambda })
    }

    pub fn elastic_net(lambda: f64, alpha: f64) -> Result<Self> {
        Self::check_lambda(lambda)?;
        if !(alpha.is_finite() && (0.0..=1.0).contains(&alpha)) {
            return Err(Error::InvalidArgument(format!(
                "elastic net alpha must lie in [0, 1], got {alpha}"
            )));
        }
        Ok(Regularizer::ElasticNet { lambda, alpha })
    }

    fn check_lambda(lambda: f64) -> Result<()> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda must be finite and non-negative, got {lambda}"
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Regularizer::Tikhonov { .. } => "tikhonov",
            Regularizer::L1 { .. } => "l1",
            Regularizer::ElasticNet { .. } => "elastic-net",
        }
    }

    /// R(w). With `skip_last` the final coordinate is excluded.
    pub fn value(&self, w: &Array1<f64>, skip_last: bool) -> f64 {
        let len = w.len().saturating_sub(skip_last as usize);
        let coords = w.iter().take(len);
        match *self {
            Regularizer::Tikhonov { lambda } => lambda * coords.map(|v| v * v).sum::<f64>(),
            Regularizer::L1 { lambda } => lambda * coords.map(|v| v.abs()).sum::<f64>(),
            Regularizer::ElasticNet { lambda, alpha } => {
                let (mut l1, mut sq) = (0.0, 0.0);
                for v in coords {
                    l1 += v.abs();
                    sq += v * v;
                }
                lambda * (1.0 - alpha) * l1 + lambda * alpha * sq
            }
        }
    }

    /// Strong-convexity modulus of R.
    pub fn mu(&self) -> f64 {
        match *self {
            Regularizer::Tikhonov { lambda } => 2.0 * lambda,
            Regularizer::L1 { .. } => 0.0,
            Regularizer::ElasticNet { lambda, alpha } => 2.0 * lambda * alpha,
        }
    }

    /// prox_{eta R}(u) = argmin_w 0.5 ||w - u||^2 + eta R(w), coordinate-wise
    /// closed form. With `skip_last` the final coordinate passes through
    /// unchanged. Errors on non-positive eta.
    pub fn prox(&self, u: &Array1<f64>, eta: f64, skip_last: bool) -> Result<Array1<f64>> {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox step eta must be positive, got {eta}"
            )));
        }
        let mut out = u.clone();
        let len = u.len().saturating_sub(skip_last as usize);
        match *self {
            Regularizer::Tikhonov { lambda } => {
                let denom = 1.0 + 2.0 * eta * lambda;
                for v in out.iter_mut().take(len) {
                    *v /= denom;
                }
            }
            Regularizer::L1 { lambda } => {
                let t = eta * lambda;
                for v in out.iter_mut().take(len) {
                    *v = soft_threshold(*v, t);
                }
            }
            Regularizer::ElasticNet { lambda, alpha } => {
                let t = eta * lambda * (1.0 - alpha);
                let denom = 1.0 + 2.0 * eta * lambda * alpha;
                for v in out.iter_mut().take(len) {
                    *v = soft_threshold(*v, t) / denom;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr1;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pinned_forms() {
        let tik = Regularizer::tikhonov(1e-3).unwrap();
        assert_eq!(tik.value(&Array1::zeros(4), false), 0.0);
        assert!((tik.mu() - 2e-3).abs() < 1e-18);

        // Soft threshold at eta*lambda = 1.
        let l1 = Regularizer::l1(1.0).unwrap();
        let out = l1.prox(&arr1(&[2.0, -0.5]), 1.0, false).unwrap();
        assert_eq!(out[0], 1.0);
        assert_eq!(out[1], 0.0);

        // l1 value excluding the intercept coordinate.
        let l1 = Regularizer::l1(2.0).unwrap();
        assert_eq!(l1.value(&arr1(&[1.0, -3.0, 7.0]), true), 8.0);

        // Elastic net: shrink by 0.05 then divide by 1.1.
        let en = Regularizer::elastic_net(1.0, 0.5).unwrap();
        let out = en.prox(&arr1(&[1.0]), 0.1, false).unwrap();
        assert!((out[0] - 0.8636363636363636).abs() < 1e-15);
        assert!((en.mu() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn intercept_pass_through() {
        let l1 = Regularizer::l1(10.0).unwrap();
        let out = l1.prox(&arr1(&[0.3, -0.2, 5.0]), 1.0, true).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 0.0);
        assert_eq!(out[2], 5.0);
    }

    #[test]
    fn construction_validated() {
        assert!(Regularizer::tikhonov(-1.0).is_err());
        assert!(Regularizer::l1(f64::NAN).is_err());
        assert!(Regularizer::elastic_net(1.0, -0.1).is_err());
        assert!(Regularizer::elastic_net(1.0, 1.5).is_err());
        assert!(Regularizer::elastic_net(0.0, 1.0).is_ok());
    }

    #[test]
    fn prox_rejects_bad_eta() {
        let tik = Regularizer::tikhonov(1.0).unwrap();
        assert!(tik.prox(&arr1(&[1.0]), 0.0, false).is_err());
        assert!(tik.prox(&arr1(&[1.0]), -1.0, false).is_err());
    }

    fn regs() -> Vec<Regularizer> {
        vec![
            Regularizer::tikhonov(0.7).unwrap(),
            Regularizer::l1(0.4).unwrap(),
            Regularizer::elastic_net(0.9, 0.3).unwrap(),
        ]
    }

    #[test]
    fn prox_minimizes_its_objective() {
        // prox must beat random perturbations on 0.5||w-u||^2 + eta R(w).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for reg in regs() {
            for _ in 0..25 {
                let u = arr1(&std::array::from_fn::<f64, 4, _>(|_| {
                    rng.random_range(-3.0..3.0)
                }));
                let eta: f64 = rng.random_range(0.01..2.0);
                let w = reg.prox(&u, eta, false).unwrap();
                let obj = |v: &Array1<f64>| {
                    0.5 * (v - &u).map(|x| x * x).sum() + eta * reg.value(v, false)
                };
                let base = obj(&w);
                for _ in 0..50 {
                    let delta = arr1(&std::array::from_fn::<f64, 4, _>(|_| {
                        rng.random_range(-0.5..0.5)
                    }));
                    assert!(base <= obj(&(&w + &delta)) + 1e-12, "{reg:?}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn prox_is_nonexpansive(
            a in proptest::collection::vec(-50.0f64..50.0, 5),
            b in proptest::collection::vec(-50.0f64..50.0, 5),
            eta in 0.01f64..10.0,
        ) {
            for reg in regs() {
                let u = arr1(&a);
                let v = arr1(&b);
                let pu = reg.prox(&u, eta, false).unwrap();
                let pv = reg.prox(&v, eta, false).unwrap();
                let num = (&pu - &pv).map(|x| x * x).sum().sqrt();
                let den = (&u - &v).map(|x| x * x).sum().sqrt();
                prop_assert!(num <= den + 1e-12, "{} expanded: {} > {}", reg.name(), num, den);
            }
        }

        #[test]
        fn l1_zero_band_is_exact(u in -10.0f64..10.0, lambda in 0.1f64..5.0, eta in 0.1f64..5.0) {
            let l1 = Regularizer::l1(lambda).unwrap();
            let t = eta * lambda;
            let clamped = arr1(&[u.clamp(-t, t)]);
            let out = l1.prox(&clamped, eta, false).unwrap();
            prop_assert_eq!(out[0], 0.0);
        }
    }
}
