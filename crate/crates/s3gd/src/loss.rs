//! Atomic loss functions under the minimization convention, their scalar
//! derivatives, and smoothness constants.
//!
//! Every supported loss has derivative psi'(u; y) expressible per label case
//! through a nonnegative label-free scalar: psi'(u; +1) = -s1(u) and
//! psi'(u; -1) = a*s2(u) + b with loss-specific (a, b). The anchor
//! approximation interpolates s1/s2 at anchor points, so the same scalar
//! functions back both the exact and the approximate gradient paths.

use ndarray::Array1;

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Smooth atomic loss psi(u; y) of the margin u = w'x and label y in {+1, -1}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Loss {
    /// log(1 + exp(-y u))
    Logistic,
    /// (1/beta) log(1 + exp(-beta (y u - 1))), a beta-smoothed hinge.
    SmoothedHinge { beta: f64 },
    /// 0.5 max(0, 1 - y u)^2
    SquaredHinge,
}

/// Lipschitz summary of the smooth part over a dataset.
#[derive(Debug, Clone, Copy)]
pub struct SmoothnessReport {
    /// max_i L_i, the worst per-sample gradient Lipschitz constant.
    pub l_max: f64,
    /// (1/n) sum_i L_i.
    pub l_avg: f64,
    /// Strong-convexity modulus contributed by the smooth part (0 for all
    /// supported losses).
    pub mu_p: f64,
}

/// Numerically stable logistic sigmoid 1/(1 + exp(-t)).
pub fn sigmoid(t: f64) -> f64 {
    let e = (-t.abs()).exp();
    let num = if t < 0.0 { e } else { 1.0 };
    num / (1.0 + e)
}

/// Numerically stable log(1 + exp(t)).
fn softplus(t: f64) -> f64 {
    t.max(0.0) + (-t.abs()).exp().ln_1p()
}

impl Loss {
    /// Smoothed hinge with validated sharpness parameter.
    pub fn smoothed_hinge(beta: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "smoothed hinge beta must be positive and finite, got {beta}"
            )));
        }
        Ok(Loss::SmoothedHinge { beta })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Loss::Logistic => "logistic",
            Loss::SmoothedHinge { .. } => "smoothed-hinge",
            Loss::SquaredHinge => "squared-hinge",
        }
    }

    /// psi(u; y).
    pub fn atomic_value(&self, u: f64, y: f64) -> f64 {
        let m = y * u;
        match *self {
            Loss::Logistic => softplus(-m),
            Loss::SmoothedHinge { beta } => softplus(-beta * (m - 1.0)) / beta,
            Loss::SquaredHinge => {
                let t = (1.0 - m).max(0.0);
                0.5 * t * t
            }
        }
    }

    /// d psi / d u at (u; y). Computed through the per-case scalar assembly so
    /// that exact and anchor-interpolated gradients share one code path.
    pub fn atomic_derivative(&self, u: f64, y: f64) -> f64 {
        if y > 0.0 {
            -self.case1_scalar(u)
        } else {
            let (a, b) = self.neg_affine();
            a * self.case2_scalar(u) + b
        }
    }

    /// Label-free scalar for the positive-label case; psi'(u; +1) = -s1(u).
    pub fn case1_scalar(&self, u: f64) -> f64 {
        match *self {
            Loss::Logistic => sigmoid(-u),
            Loss::SmoothedHinge { beta } => sigmoid(-beta * (u - 1.0)),
            Loss::SquaredHinge => (1.0 - u).max(0.0),
        }
    }

    /// Label-free scalar for the negative-label case;
    /// psi'(u; -1) = a*s2(u) + b with (a, b) = `neg_affine()`.
    pub fn case2_scalar(&self, u: f64) -> f64 {
        match *self {
            Loss::Logistic => sigmoid(-u),
            Loss::SmoothedHinge { beta } => sigmoid(-beta * (u + 1.0)),
            Loss::SquaredHinge => (1.0 + u).max(0.0),
        }
    }

    /// Coefficients (a, b) assembling the negative-case derivative from
    /// `case2_scalar`. `a` is always +-1 and `b` is 0 or 1, which keeps the
    /// assembly exact in floating point.
    pub fn neg_affine(&self) -> (f64, f64) {
        match self {
            Loss::Logistic | Loss::SmoothedHinge { .. } => (-1.0, 1.0),
            Loss::SquaredHinge => (1.0, 0.0),
        }
    }

    /// Per-sample gradient Lipschitz constant L_i for squared sample norm
    /// `sq_norm` (intercept included).
    pub fn lipschitz(&self, sq_norm: f64) -> f64 {
        match *self {
            Loss::Logistic => 0.25 * sq_norm,
            Loss::SmoothedHinge { beta } => 0.25 * beta * sq_norm,
            Loss::SquaredHinge => sq_norm,
        }
    }

    /// Smoothness constants of the weighted smooth part over `ds`.
    pub fn smoothness(&self, ds: &Dataset) -> SmoothnessReport {
        let mut l_max = 0.0f64;
        let mut sum = 0.0f64;
        for i in 0..ds.len() {
            let sq = ds.sample(i).iter().map(|v| v * v).sum::<f64>();
            let li = self.lipschitz(sq);
            l_max = l_max.max(li);
            sum += li;
        }
        SmoothnessReport {
            l_max,
            l_avg: sum / ds.len() as f64,
            mu_p: 0.0,
        }
    }

    /// Weighted smooth objective P(w) = sum_i weight_i psi(w'x_i; y_i).
    pub fn smooth_objective(&self, w: &Array1<f64>, ds: &Dataset) -> Result<f64> {
        if w.len() != ds.dim() {
            return Err(Error::Dimension {
                expected: ds.dim(),
                got: w.len(),
            });
        }
        let mut acc = 0.0;
        for i in 0..ds.len() {
            let u = w.dot(&ds.sample(i));
            acc += ds.weight(i) * self.atomic_value(u, ds.label(i));
        }
        Ok(acc)
    }
}
