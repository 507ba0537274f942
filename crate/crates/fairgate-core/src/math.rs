//! Float routines that need `std` or `libm`, behind one switch.

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("fairgate-core needs either the `std` or the `libm` feature");

#[cfg(feature = "std")]
mod imp {
    #[inline]
    pub fn abs(x: f64) -> f64 {
        x.abs()
    }

    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }

    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }

    #[inline]
    pub fn powf(x: f64, p: f64) -> f64 {
        x.powf(p)
    }
}

#[cfg(not(feature = "std"))]
mod imp {
    #[inline]
    pub fn abs(x: f64) -> f64 {
        libm::fabs(x)
    }

    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    #[inline]
    pub fn powf(x: f64, p: f64) -> f64 {
        libm::pow(x, p)
    }
}

pub(crate) use imp::*;
