use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{self, Point3, FOUR_PI};
use crate::scalar::Scalar;

/// A translation-invariant kernel depending only on `|x - y|`.
pub trait Kernel: Send + Sync {
    type Scalar: Scalar;

    /// Kernel value at distance `r > 0`.
    fn at_distance(&self, r: f64) -> Self::Scalar;

    fn eval(&self, x: Point3, y: Point3) -> Result<Self::Scalar> {
        let r = math::dist(x, y);
        if r == 0.0 {
            return Err(Error::Singular);
        }
        Ok(self.at_distance(r))
    }

    fn spec(&self) -> KernelSpec;
}

/// `1 / (4π r)`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Laplace;

/// `exp(iκr) / (4π r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Helmholtz {
    pub wavenumber: f64,
}

impl Kernel for Laplace {
    type Scalar = f64;

    #[inline]
    fn at_distance(&self, r: f64) -> f64 {
        1.0 / (FOUR_PI * r)
    }

    fn spec(&self) -> KernelSpec {
        KernelSpec::Laplace
    }
}

impl Kernel for Helmholtz {
    type Scalar = Complex64;

    #[inline]
    fn at_distance(&self, r: f64) -> Complex64 {
        let inv = 1.0 / (FOUR_PI * r);
        let kr = self.wavenumber * r;
        Complex64::new(math::cos(kr) * inv, math::sin(kr) * inv)
    }

    fn spec(&self) -> KernelSpec {
        KernelSpec::Helmholtz {
            wavenumber: self.wavenumber,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Laplace,
    Helmholtz { wavenumber: f64 },
}

impl KernelSpec {
    /// Value as a complex number regardless of the kernel's scalar type.
    pub fn eval(&self, x: Point3, y: Point3) -> Result<Complex64> {
        match *self {
            KernelSpec::Laplace => Laplace.eval(x, y).map(Complex64::from_real),
            KernelSpec::Helmholtz { wavenumber } => Helmholtz { wavenumber }.eval(x, y),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Helmholtz { wavenumber } if !wavenumber.is_finite() => {
                Err(Error::InvalidArgument("wavenumber must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}
