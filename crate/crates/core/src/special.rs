//! Standard normal CDF and density.
//!
//! The CDF is evaluated through the complementary error function,
//! `Φ(x) = erfc(−x/√2)/2`, which keeps full relative accuracy in the lower
//! tail. `erfc` follows the FreeBSD `s_erf.c` rational approximations
//! (Sun Microsystems, freely distributable), evaluated in the generic scalar.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `|x|` beyond which Φ is saturated to exactly 0 or 1.
pub const CDF_SATURATION: f64 = 40.0;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A value in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Probability<T>(T);

impl<T: Scalar> Probability<T> {
    pub fn new(value: T) -> Result<Self> {
        if value >= T::zero() && value <= T::one() {
            Ok(Probability(value))
        } else {
            Err(Error::invalid(format!("{value} is not a probability")))
        }
    }

    #[inline]
    pub fn value(self) -> T {
        self.0
    }
}

/// Standard normal CDF `Φ(x)`.
pub fn std_normal_cdf<T: Scalar>(x: T) -> Result<Probability<T>> {
    if !x.is_finite() {
        return Err(Error::invalid("std_normal_cdf of a non-finite value"));
    }
    Ok(Probability(phi(x)))
}

/// Standard normal density.
pub fn std_normal_pdf<T: Scalar>(x: T) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::invalid("std_normal_pdf of a non-finite value"));
    }
    Ok(density(x))
}

/// Unchecked Φ for finite input.
#[inline]
pub(crate) fn phi<T: Scalar>(x: T) -> T {
    let sat = T::lit(CDF_SATURATION);
    if x > sat {
        return T::one();
    }
    if x < -sat {
        return T::zero();
    }
    let half = T::lit(0.5);
    let v = half * erfc(-x * T::lit(std::f64::consts::FRAC_1_SQRT_2));
    v.max(T::zero()).min(T::one())
}

#[inline]
pub(crate) fn density<T: Scalar>(x: T) -> T {
    T::lit(FRAC_1_SQRT_2PI) * (-(x * x) * T::lit(0.5)).exp()
}

const ERX: f64 = 8.45062911510467529297e-01;

const PP: [f64; 5] = [
    1.28379167095512558561e-01,
    -3.25042107247001499370e-01,
    -2.84817495755985104766e-02,
    -5.77027029648944159157e-03,
    -2.37630166566501626084e-05,
];
const QQ: [f64; 5] = [
    3.97917223959155352819e-01,
    6.50222499887672944485e-02,
    5.08130628187576562776e-03,
    1.32494738004321644526e-04,
    -3.96022827877536812320e-06,
];

const PA: [f64; 7] = [
    -2.36211856075265944077e-03,
    4.14856118683748331666e-01,
    -3.72207876035701323847e-01,
    3.18346619901161753674e-01,
    -1.10894694282396677476e-01,
    3.54783043256182359371e-02,
    -2.16637559486879084300e-03,
];
const QA: [f64; 6] = [
    1.06420880400844228286e-01,
    5.40397917702171048937e-01,
    7.18286544141962662868e-02,
    1.26171219808761642112e-01,
    1.36370839120290507362e-02,
    1.19844998467991074170e-02,
];

const RA: [f64; 8] = [
    -9.86494403484714822705e-03,
    -6.93858572707181764372e-01,
    -1.05586262253232909814e+01,
    -6.23753324503260060396e+01,
    -1.62396669462573470355e+02,
    -1.84605092906711035994e+02,
    -8.12874355063065934246e+01,
    -9.81432934416914548592e+00,
];
const SA: [f64; 8] = [
    1.96512716674392571292e+01,
    1.37657754143519042600e+02,
    4.34565877475229228821e+02,
    6.45387271733267880336e+02,
    4.29008140027567833386e+02,
    1.08635005541779435134e+02,
    6.57024977031928170135e+00,
    -6.04244152148580987438e-02,
];

const RB: [f64; 7] = [
    -9.86494292470009928597e-03,
    -7.99283237680523006574e-01,
    -1.77579549177547519889e+01,
    -1.60636384855821916062e+02,
    -6.37566443368389627722e+02,
    -1.02509513161107724954e+03,
    -4.83519191608651397019e+02,
];
const SB: [f64; 7] = [
    3.03380607434824582924e+01,
    3.25792512996573918826e+02,
    1.53672958608443695994e+03,
    3.19985821950859553908e+03,
    2.55305040643316442583e+03,
    4.74528541206955367215e+02,
    -2.24409524465858183362e+01,
];

/// `c[0] + z·c[1] + z²·c[2] + …`
#[inline]
fn horner<T: Scalar>(z: T, c: &[f64]) -> T {
    c.iter().rev().fold(T::zero(), |acc, &k| acc * z + T::lit(k))
}

/// `1 + z·c[0] + z²·c[1] + …`
#[inline]
fn horner1<T: Scalar>(z: T, c: &[f64]) -> T {
    T::one() + z * horner(z, c)
}

/// Complementary error function for finite input.
pub(crate) fn erfc<T: Scalar>(x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let negative = x < T::zero();
    let ax = x.abs();

    if ax < T::lit(0.84375) {
        let t = if ax < T::lit(1.3877787807814457e-17) {
            ax
        } else {
            let z = ax * ax;
            let y = horner(z, &PP) / horner1(z, &QQ);
            if ax < T::lit(0.25) {
                ax + ax * y
            } else {
                T::lit(0.5) + (ax * y + (ax - T::lit(0.5)))
            }
        };
        return if negative { one + t } else { one - t };
    }

    if ax < T::lit(1.25) {
        let s = ax - one;
        let pq = horner(s, &PA) / horner1(s, &QA);
        return if negative {
            one + T::lit(ERX) + pq
        } else {
            one - T::lit(ERX) - pq
        };
    }

    if ax >= T::lit(28.0) {
        return if negative { two } else { T::zero() };
    }

    let s = one / (ax * ax);
    let (r, q) = if ax < T::lit(1.0 / 0.35) {
        (horner(s, &RA), horner1(s, &SA))
    } else {
        if negative && ax > T::lit(6.0) {
            return two;
        }
        (horner(s, &RB), horner1(s, &SB))
    };
    // z carries the high bits of |x| so that z² is exact.
    let z = T::lit(f64::from_bits(ax.as_f64().to_bits() & 0xffff_ffff_0000_0000));
    let e = (-(z * z) - T::lit(0.5625)).exp() * ((z - ax) * (z + ax) + r / q).exp();
    if negative {
        two - e / ax
    } else {
        e / ax
    }
}
