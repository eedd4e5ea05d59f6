//! Numeric abstraction for the rate and memory quantities.
//!
//! Loads, memory points and subfile sizes are ratios of binomial products, so
//! the natural instantiation is [`BigRational`]. The same code also runs over
//! `f64`/`f32` for plotting columns; only the exact instantiation is used to
//! claim equalities.

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};

pub trait Scalar: Clone + Debug + PartialOrd + Num + Send + Sync + 'static {
    fn from_biguint(n: &BigUint) -> Self;

    /// `num / den`; `den` must be nonzero.
    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        Self::from_biguint(num) / Self::from_biguint(den)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_biguint(&BigUint::from(n))
    }

    /// Largest integer not above `self`, if it is non-negative and fits.
    fn floor_usize(&self) -> Option<usize>;

    fn to_f64_lossy(&self) -> f64;

    fn is_negative(&self) -> bool {
        *self < Self::zero()
    }
}

impl Scalar for BigRational {
    fn from_biguint(n: &BigUint) -> Self {
        BigRational::from_integer(BigInt::from(n.clone()))
    }

    fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
        BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
    }

    fn floor_usize(&self) -> Option<usize> {
        if Scalar::is_negative(self) {
            return None;
        }
        self.floor().to_integer().to_usize()
    }

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn from_biguint(n: &BigUint) -> Self {
                n.to_f64().map(|v| v as $t).unwrap_or(<$t>::INFINITY)
            }

            fn from_ratio(num: &BigUint, den: &BigUint) -> Self {
                // Reduce first so huge factorial ratios stay finite.
                let g = num_integer::Integer::gcd(num, den);
                Self::from_biguint(&(num / &g)) / Self::from_biguint(&(den / &g))
            }

            fn floor_usize(&self) -> Option<usize> {
                if !self.is_finite() || *self < 0.0 {
                    return None;
                }
                Some(self.floor() as usize)
            }

            fn to_f64_lossy(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f64);
float_scalar!(f32);

/// Renders an exact rational as a reduced `p/q` with `q > 0`, including `q = 1`.
pub fn fmt_exact(value: &BigRational) -> String {
    // BigRational is kept normalized (reduced, positive denominator).
    format!("{}/{}", value.numer(), value.denom())
}

/// Serde adapter writing a rational in the `p/q` form of [`fmt_exact`].
pub fn serialize_exact<S: serde::Serializer>(
    value: &BigRational,
    serializer: S,
) -> Result<S::Ok, S::Error> {
    serializer.serialize_str(&fmt_exact(value))
}

/// Parses `p/q`, `p`, or a finite decimal such as `0.75` into an exact rational.
pub fn parse_exact(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    if let Some((int, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        let frac_part: BigInt = frac.parse().ok()?;
        let magnitude = int_part.magnitude().clone();
        let numer = BigInt::from(magnitude) * &scale + frac_part;
        let numer = if negative { -numer } else { numer };
        return Some(BigRational::new(numer, scale));
    }
    text.parse::<BigInt>().ok().map(BigRational::from_integer)
}
