//! Convex nondecreasing penalty functions `g` with one-sided derivatives.
//!
//! The effectiveness and full-satisfaction thresholds hinge on exact left and
//! right derivatives, so every kind carries closed-form derivative rules and
//! custom kinds must supply them explicitly; nothing is differentiated
//! numerically.

use core::fmt;

use crate::math;

/// Number of points in the validation grid over [0, 1].
const VALIDATION_POINTS: usize = 1001;
/// Slack for the convexity and monotonicity checks on the validation grid.
const VALIDATION_TOL: f64 = 1e-12;

/// A penalty function failed validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PenaltyError {
    /// Power exponent below one (the function would be concave).
    PowerExponent { exponent: f64 },
    /// Hinge threshold outside [0, 1].
    HingeThreshold { threshold: f64 },
    /// g(0) differs from zero.
    NotZeroAtZero { value: f64 },
    /// g decreases between two validation grid points.
    Decreasing { at: f64 },
    /// Slopes decrease between consecutive validation segments.
    NotConvex { at: f64 },
    /// One-sided derivatives are out of order or negative.
    DerivativeOrder { at: f64 },
}

impl fmt::Display for PenaltyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PenaltyError::PowerExponent { exponent } => {
                write!(f, "power penalty exponent {exponent} must be >= 1")
            }
            PenaltyError::HingeThreshold { threshold } => {
                write!(f, "hinge threshold {threshold} must lie in [0, 1]")
            }
            PenaltyError::NotZeroAtZero { value } => {
                write!(f, "penalty must satisfy g(0) = 0, got {value}")
            }
            PenaltyError::Decreasing { at } => {
                write!(f, "penalty decreases near x = {at}")
            }
            PenaltyError::NotConvex { at } => {
                write!(f, "penalty is not convex near x = {at}")
            }
            PenaltyError::DerivativeOrder { at } => {
                write!(
                    f,
                    "penalty derivatives at x = {at} violate 0 <= left <= right"
                )
            }
        }
    }
}

impl core::error::Error for PenaltyError {}

/// A convex, nondecreasing penalty on the disparity, with `g(0) = 0`.
///
/// The scale factor `lambda` is carried separately by every operation that
/// takes a penalty.
#[derive(Clone, Copy, Debug)]
pub enum Penalty {
    /// `g(x) = x`.
    Linear,
    /// `g(x) = x^p` for a fixed exponent `p >= 1`.
    Power(f64),
    /// `g(x) = max(0, x - threshold)`: discrimination below the threshold is
    /// tolerated free of charge.
    Hinge(f64),
    /// `g(x) = e^x - 1`. Shifting by one keeps `g(0) = 0` while moving every
    /// objective value by the constant `lambda`, so maximizers are the same
    /// as for the unshifted exponential.
    Exponential,
    /// User-supplied evaluator with explicit one-sided derivatives.
    Custom {
        eval: fn(f64) -> f64,
        left_derivative: fn(f64) -> f64,
        right_derivative: fn(f64) -> f64,
    },
}

impl Penalty {
    /// Quadratic penalty, `g(x) = x^2`.
    pub fn quadratic() -> Penalty {
        Penalty::Power(2.0)
    }

    /// Validated power penalty.
    pub fn power(exponent: f64) -> Result<Penalty, PenaltyError> {
        if !exponent.is_finite() || exponent < 1.0 {
            return Err(PenaltyError::PowerExponent { exponent });
        }
        Ok(Penalty::Power(exponent))
    }

    /// Validated hinge penalty with tolerated disparity `threshold`.
    pub fn hinge(threshold: f64) -> Result<Penalty, PenaltyError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(PenaltyError::HingeThreshold { threshold });
        }
        Ok(Penalty::Hinge(threshold))
    }

    /// Validated custom penalty; runs the full grid validation.
    pub fn custom(
        eval: fn(f64) -> f64,
        left_derivative: fn(f64) -> f64,
        right_derivative: fn(f64) -> f64,
    ) -> Result<Penalty, PenaltyError> {
        let penalty = Penalty::Custom {
            eval,
            left_derivative,
            right_derivative,
        };
        penalty.validate()?;
        Ok(penalty)
    }

    /// `g(x)` for `x` in [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Penalty::Linear => x,
            Penalty::Power(p) => math::powf(x, p),
            Penalty::Hinge(threshold) => {
                if x > threshold {
                    x - threshold
                } else {
                    0.0
                }
            }
            Penalty::Exponential => math::exp(x) - 1.0,
            Penalty::Custom { eval, .. } => eval(x),
        }
    }

    /// Left derivative `g'_-(x)`. At `x = 0` this returns the right
    /// derivative, since the domain ends there.
    pub fn left_derivative(&self, x: f64) -> f64 {
        match *self {
            Penalty::Linear => 1.0,
            Penalty::Power(p) => power_derivative(p, x),
            Penalty::Hinge(threshold) => {
                if x > threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Penalty::Exponential => math::exp(x),
            Penalty::Custom { left_derivative, .. } => left_derivative(x),
        }
    }

    /// Right derivative `g'_+(x)`.
    pub fn right_derivative(&self, x: f64) -> f64 {
        match *self {
            Penalty::Linear => 1.0,
            Penalty::Power(p) => power_derivative(p, x),
            Penalty::Hinge(threshold) => {
                if x >= threshold {
                    1.0
                } else {
                    0.0
                }
            }
            Penalty::Exponential => math::exp(x),
            Penalty::Custom { right_derivative, .. } => right_derivative(x),
        }
    }

    /// Checks `g(0) = 0`, monotonicity, convexity, and derivative ordering on
    /// a 1001-point grid over [0, 1].
    pub fn validate(&self) -> Result<(), PenaltyError> {
        match *self {
            Penalty::Power(p) if !p.is_finite() || p < 1.0 => {
                return Err(PenaltyError::PowerExponent { exponent: p });
            }
            Penalty::Hinge(t) if !(0.0..=1.0).contains(&t) => {
                return Err(PenaltyError::HingeThreshold { threshold: t });
            }
            _ => {}
        }

        let at = |i: usize| i as f64 / (VALIDATION_POINTS - 1) as f64;
        let g0 = self.eval(0.0);
        if math::abs(g0) > VALIDATION_TOL {
            return Err(PenaltyError::NotZeroAtZero { value: g0 });
        }
        let mut prev_value = g0;
        let mut prev_slope = f64::NEG_INFINITY;
        for i in 0..VALIDATION_POINTS {
            let x = at(i);
            let left = self.left_derivative(x);
            let right = self.right_derivative(x);
            if left < -VALIDATION_TOL || right < left - VALIDATION_TOL {
                return Err(PenaltyError::DerivativeOrder { at: x });
            }
            if i > 0 {
                let value = self.eval(x);
                let increment = value - prev_value;
                if increment < -VALIDATION_TOL {
                    return Err(PenaltyError::Decreasing { at: x });
                }
                if increment < prev_slope - VALIDATION_TOL {
                    return Err(PenaltyError::NotConvex { at: x });
                }
                prev_slope = increment;
                prev_value = value;
            }
        }
        Ok(())
    }
}

fn power_derivative(p: f64, x: f64) -> f64 {
    if x == 0.0 {
        // x^(p-1) -> 0 for p > 1; the exponent p = 1 is the linear case.
        if p == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        p * math::powf(x, p - 1.0)
    }
}
