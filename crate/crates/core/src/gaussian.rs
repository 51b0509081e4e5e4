//! Exact arithmetic in the ring of Gaussian integers Z[i].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::{codec, Error, Result};

/// A Gaussian integer `re + i·im` with unbounded components.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussianInt {
    #[serde(with = "codec::dec_int")]
    pub re: BigInt,
    #[serde(with = "codec::dec_int")]
    pub im: BigInt,
}

impl GaussianInt {
    pub fn new(re: impl Into<BigInt>, im: impl Into<BigInt>) -> Self {
        Self {
            re: re.into(),
            im: im.into(),
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// `re² + im²`, always nonnegative.
    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    /// The largest absolute value of the two components.
    pub fn max_abs_component(&self) -> BigInt {
        self.re.abs().max(self.im.abs())
    }

    /// Exact multiplicative inverse in Q(i).
    pub fn inv_exact(&self) -> Result<GaussianRational> {
        if self.is_zero() {
            return Err(Error::Domain("zero has no inverse".into()));
        }
        let n = self.norm();
        Ok(GaussianRational {
            re: BigRational::new(self.re.clone(), n.clone()),
            im: BigRational::new(-&self.im, n),
        })
    }

    /// Gaussian division with remainder: `self = q·divisor + r` with
    /// `N(r) < N(divisor)`.
    ///
    /// Each coordinate of `self·conj(divisor)/N(divisor)` is rounded to the
    /// nearest integer; exact half-way values round toward zero.
    pub fn div_rem(&self, divisor: &GaussianInt) -> Result<(GaussianInt, GaussianInt)> {
        if divisor.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let n = divisor.norm();
        let num = self * &divisor.conj();
        let q = GaussianInt {
            re: round_half_toward_zero(&num.re, &n),
            im: round_half_toward_zero(&num.im, &n),
        };
        let r = self - &(&q * divisor);
        debug_assert!(r.norm() < n);
        Ok((q, r))
    }

    /// Exact quotient, failing with an integrity error if `divisor` does not
    /// divide `self` in Z[i].
    pub fn exact_div(&self, divisor: &GaussianInt) -> Result<GaussianInt> {
        if divisor.is_zero() {
            return Err(Error::Domain("division by zero".into()));
        }
        let n = divisor.norm();
        let num = self * &divisor.conj();
        let (qr, rr) = num.re.div_rem(&n);
        let (qi, ri) = num.im.div_rem(&n);
        if !rr.is_zero() || !ri.is_zero() {
            return Err(Error::Integrity(format!("{self} is not a multiple of {divisor}")));
        }
        Ok(GaussianInt { re: qr, im: qi })
    }
}

/// Round `num/den` (den > 0) to the nearest integer, ties toward zero.
fn round_half_toward_zero(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    let twice: BigInt = &r * 2;
    match twice.cmp(den) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1,
        std::cmp::Ordering::Equal => {
            if num.is_negative() {
                q + 1
            } else {
                q
            }
        }
    }
}

/// An element of Q(i) with both components in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn mul_int(&self, z: &GaussianInt) -> GaussianRational {
        let a = BigRational::from_integer(z.re.clone());
        let b = BigRational::from_integer(z.im.clone());
        GaussianRational {
            re: &self.re * &a - &self.im * &b,
            im: &self.re * &b + &self.im * &a,
        }
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    /// Returns the value as a Gaussian integer when both parts are integral.
    pub fn to_integer(&self) -> Option<GaussianInt> {
        (self.re.is_integer() && self.im.is_integer())
            .then(|| GaussianInt::new(self.re.to_integer(), self.im.to_integer()))
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a> $tr<&'a GaussianInt> for &'a GaussianInt {
            type Output = GaussianInt;
            fn $method(self, rhs: &'a GaussianInt) -> GaussianInt {
                let f: fn(&GaussianInt, &GaussianInt) -> GaussianInt = $body;
                f(self, rhs)
            }
        }
        impl $tr<GaussianInt> for GaussianInt {
            type Output = GaussianInt;
            fn $method(self, rhs: GaussianInt) -> GaussianInt {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a GaussianInt> for GaussianInt {
            type Output = GaussianInt;
            fn $method(self, rhs: &'a GaussianInt) -> GaussianInt {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| GaussianInt {
    re: &x.re + &y.re,
    im: &x.im + &y.im,
});
forward_binop!(Sub, sub, |x, y| GaussianInt {
    re: &x.re - &y.re,
    im: &x.im - &y.im,
});
forward_binop!(Mul, mul, |x, y| GaussianInt {
    re: &x.re * &y.re - &x.im * &y.im,
    im: &x.re * &y.im + &x.im * &y.re,
});

impl Neg for GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Neg for &GaussianInt {
    type Output = GaussianInt;
    fn neg(self) -> GaussianInt {
        GaussianInt {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl std::iter::Sum for GaussianInt {
    fn sum<I: Iterator<Item = GaussianInt>>(iter: I) -> Self {
        iter.fold(GaussianInt::zero(), |acc, z| acc + z)
    }
}

impl fmt::Display for GaussianInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`, `i` and `-i`, ignoring whitespace.
impl FromStr for GaussianInt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(format!("invalid Gaussian integer literal {s:?}"));
        if compact.is_empty() {
            return Err(bad());
        }
        let Some(body) = compact.strip_suffix('i') else {
            return Ok(GaussianInt::new(codec::parse_int(&compact).map_err(|_| bad())?, 0));
        };
        // split at the last sign that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        let (re_str, im_str) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im_str {
            "" | "+" => BigInt::one(),
            "-" => -BigInt::one(),
            other => codec::parse_int(other.trim_start_matches('+')).map_err(|_| bad())?,
        };
        let re = codec::parse_int(re_str.trim_start_matches('+')).map_err(|_| bad())?;
        Ok(GaussianInt { re, im })
    }
}
