//! Elementary functions. With the `std` feature these forward to the platform
//! implementations, otherwise to `libm`.

#[cfg(feature = "std")]
extern crate std;

macro_rules! unary {
    ($($name:ident => $libm:ident),* $(,)?) => {
        $(
            #[inline(always)]
            pub(crate) fn $name(x: f64) -> f64 {
                #[cfg(feature = "std")]
                {
                    std::primitive::f64::$name(x)
                }
                #[cfg(not(feature = "std"))]
                {
                    libm::$libm(x)
                }
            }
        )*
    };
}

unary! {
    ln => log,
    exp => exp,
    sqrt => sqrt,
    sinh => sinh,
    atanh => atanh,
    ceil => ceil,
    abs => fabs,
    ln_1p => log1p,
}

#[inline]
pub(crate) fn powf(x: f64, y: f64) -> f64 {
    #[cfg(feature = "std")]
    {
        x.powf(y)
    }
    #[cfg(not(feature = "std"))]
    {
        libm::pow(x, y)
    }
}

#[inline]
pub(crate) fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

#[inline]
pub(crate) fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}
