//! Coefficient rings and fields.
//!
//! Everything else in the crate is generic over [`Field`]. Two scalar
//! backends ship with it: exact rationals ([`Rat`]) and fixed-precision
//! complex floats ([`Complex`]). Rational functions over a field are again a
//! field, which is how spectator variables are adjoined.

mod bigfloat;
mod rational;

pub use bigfloat::{default_precision, parse_decimal_rat, set_default_precision, BigFloat, Complex};
pub use rational::{parse_rat, rat, rat_to_string, Rat};

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Commutative ring with unit.
pub trait Ring:
    Clone
    + PartialEq
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;

    fn is_one(&self) -> bool {
        *self == Self::one()
    }

    fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

/// A field. Exact fields answer `is_zero` exactly; numeric ones compare with
/// an explicit tolerance through [`Field::magnitude`].
pub trait Field: Ring + Div<Output = Self> + for<'a> Div<&'a Self, Output = Self> {
    /// True when arithmetic is exact and `is_zero` is decidable.
    const EXACT: bool;

    fn from_rat(r: &Rat) -> Self;

    /// The exact rational value, when the element is one.
    fn to_rat(&self) -> Option<Rat>;

    /// Approximate absolute value, used for tolerances and pivoting.
    fn magnitude(&self) -> f64;

    /// Approximate real part.
    fn re_f64(&self) -> f64;

    /// A total order used only to make output deterministic.
    fn total_cmp(&self, other: &Self) -> Ordering;

    /// Text form used in reports and serialized output.
    fn display(&self) -> String;

    fn inv(&self) -> Self {
        Self::one() / self
    }

    /// Zero test at the given relative tolerance (ignored by exact fields).
    fn is_negligible(&self, scale: f64, rel_tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= rel_tol * scale.max(1e-300)
        }
    }
}

/// Implements the std operator traits for a type from `*_ref` methods.
#[macro_export]
macro_rules! impl_ring_ops {
    ([$($gen:tt)*] $ty:ty) => {
        impl<$($gen)*> ::std::ops::Add for $ty {
            type Output = $ty;
            fn add(self, o: $ty) -> $ty { self.add_ref(&o) }
        }
        impl<'a, $($gen)*> ::std::ops::Add<&'a $ty> for $ty {
            type Output = $ty;
            fn add(self, o: &'a $ty) -> $ty { self.add_ref(o) }
        }
        impl<$($gen)*> ::std::ops::Sub for $ty {
            type Output = $ty;
            fn sub(self, o: $ty) -> $ty { self.sub_ref(&o) }
        }
        impl<'a, $($gen)*> ::std::ops::Sub<&'a $ty> for $ty {
            type Output = $ty;
            fn sub(self, o: &'a $ty) -> $ty { self.sub_ref(o) }
        }
        impl<$($gen)*> ::std::ops::Mul for $ty {
            type Output = $ty;
            fn mul(self, o: $ty) -> $ty { self.mul_ref(&o) }
        }
        impl<'a, $($gen)*> ::std::ops::Mul<&'a $ty> for $ty {
            type Output = $ty;
            fn mul(self, o: &'a $ty) -> $ty { self.mul_ref(o) }
        }
        impl<$($gen)*> ::std::ops::Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty { self.neg_ref() }
        }
    };
}

/// Adds `Div` on top of [`impl_ring_ops`].
#[macro_export]
macro_rules! impl_div_ops {
    ([$($gen:tt)*] $ty:ty) => {
        impl<$($gen)*> ::std::ops::Div for $ty {
            type Output = $ty;
            fn div(self, o: $ty) -> $ty { self.div_ref(&o) }
        }
        impl<'a, $($gen)*> ::std::ops::Div<&'a $ty> for $ty {
            type Output = $ty;
            fn div(self, o: &'a $ty) -> $ty { self.div_ref(o) }
        }
    };
}

/// Binomial coefficient as a field element.
pub fn binom<F: Field>(n: u32, k: u32) -> F {
    if k > n {
        return F::zero();
    }
    let mut acc = Rat::from_integer(1.into());
    for i in 0..k {
        acc = acc * Rat::new((n - i).into(), (i + 1).into());
    }
    F::from_rat(&acc)
}

/// `n!` as a field element.
pub fn factorial<F: Field>(n: u32) -> F {
    let mut acc = F::one();
    for i in 2..=n {
        acc = acc * F::from_i64(i as i64);
    }
    acc
}
