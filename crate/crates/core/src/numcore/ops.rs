//! Scalar nonlinearities applied along cell edges, and their derivatives.

use super::Real;

pub fn tanh<R: Real>(x: R) -> R {
    x.tanh()
}

/// d tanh(x)/dx expressed through the output y = tanh(x).
pub fn tanh_deriv_from_output<R: Real>(y: R) -> R {
    R::one() - y * y
}

pub fn relu<R: Real>(x: R) -> R {
    if x > R::zero() {
        x
    } else {
        R::zero()
    }
}

/// Subgradient 0 at the kink.
pub fn relu_deriv<R: Real>(x: R) -> R {
    if x > R::zero() {
        R::one()
    } else {
        R::zero()
    }
}

pub fn sigmoid<R: Real>(x: R) -> R {
    R::one() / (R::one() + (-x).exp())
}

/// d sigmoid(x)/dx expressed through the output y = sigmoid(x).
pub fn sigmoid_deriv_from_output<R: Real>(y: R) -> R {
    y * (R::one() - y)
}

pub fn identity<R: Real>(x: R) -> R {
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ops_sanity() {
        assert_eq!(relu(-1.5f64), 0.0);
        assert_eq!(relu(2.0f64), 2.0);
        assert_eq!(relu_deriv(0.0f64), 0.0);
        assert!((sigmoid(0.0f64) - 0.5).abs() < 1e-15);
        assert_eq!(identity(3.25f64), 3.25);
        let y = tanh(0.7f64);
        assert!((tanh_deriv_from_output(y) - (1.0 - y * y)).abs() < 1e-15);
    }

    #[test]
    fn generic_over_f32() {
        let y: f32 = sigmoid(1.0f32);
        assert!(y > 0.5 && y < 1.0);
    }
}
