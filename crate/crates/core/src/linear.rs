use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

/// Values that can be integrated and extrapolated: a real vector space with a size measure.
pub trait Linear:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    /// Largest absolute component; used for error control.
    fn size(&self) -> f64;
}

impl Linear for f64 {
    fn zero() -> Self {
        0.0
    }
    fn size(&self) -> f64 {
        self.abs()
    }
}

impl Linear for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn size(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}
