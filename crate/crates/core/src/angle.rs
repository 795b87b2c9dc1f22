//! Exact angles as rational multiples of pi.
//!
//! Every phase in the circuit IR is `(num/den)·π` with integer `num`, `den`.
//! Angles are identified mod 2π and kept in a canonical form, so composition
//! and comparison are exact integer arithmetic; floating point only enters
//! when the simulator asks for radians.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// An angle `(num/den)·π`, reduced to lowest terms with `den ≥ 1` and the
/// numerator folded into `(-den, den]`, i.e. the value lies in `(-π, π]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Angle {
    num: i64,
    den: i64,
}

impl Angle {
    pub const ZERO: Angle = Angle { num: 0, den: 1 };
    /// π, the phase of a Pauli-Z term.
    pub const PI: Angle = Angle { num: 1, den: 1 };

    /// `(num/den)·π`, canonicalized. Fails on a zero denominator.
    pub fn new(num: i64, den: i64) -> Result<Angle> {
        if den == 0 {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self::reduced(num as i128, den as i128))
    }

    /// `k·π/8`; the random-test generator draws from this grid.
    pub fn eighths(k: i64) -> Angle {
        Self::reduced(k as i128, 8)
    }

    fn reduced(mut num: i128, mut den: i128) -> Angle {
        if den < 0 {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if g > 1 {
            num /= g;
            den /= g;
        }
        // fold into (-den, den], i.e. (-π, π]
        num = num.rem_euclid(2 * den);
        if num > den {
            num -= 2 * den;
        }
        let num = i64::try_from(num).expect("angle numerator overflow");
        let den = i64::try_from(den).expect("angle denominator overflow");
        Angle { num, den }
    }

    pub fn numerator(self) -> i64 {
        self.num
    }

    pub fn denominator(self) -> i64 {
        self.den
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// Value in radians (the only lossy conversion in the IR).
    pub fn radians(self) -> f64 {
        self.num as f64 / self.den as f64 * std::f64::consts::PI
    }

    /// `e^{iθ}` as a complex double.
    pub fn phasor(self) -> Complex64 {
        Complex64::from_polar(1.0, self.radians())
    }
}

impl Add for Angle {
    type Output = Angle;

    fn add(self, rhs: Angle) -> Angle {
        let num = self.num as i128 * rhs.den as i128 + rhs.num as i128 * self.den as i128;
        Angle::reduced(num, self.den as i128 * rhs.den as i128)
    }
}

impl Sub for Angle {
    type Output = Angle;

    fn sub(self, rhs: Angle) -> Angle {
        self + (-rhs)
    }
}

impl Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        Angle::reduced(-(self.num as i128), self.den as i128)
    }
}

impl fmt::Debug for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Angle({}/{} π)", self.num, self.den)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.num, self.den) {
            (0, _) => write!(f, "0"),
            (1, 1) => write!(f, "π"),
            (n, 1) => write!(f, "{n}π"),
            (1, d) => write!(f, "π/{d}"),
            (-1, d) => write!(f, "-π/{d}"),
            (n, d) => write!(f, "{n}π/{d}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_range() {
        // 3π/2 ≡ -π/2
        let a = Angle::new(3, 2).unwrap();
        assert_eq!((a.numerator(), a.denominator()), (-1, 2));
        // 2π ≡ 0
        assert!(Angle::new(2, 1).unwrap().is_zero());
        // -π ≡ π (upper half-open convention)
        assert_eq!(Angle::new(-1, 1).unwrap(), Angle::PI);
        // sign lives in the numerator
        assert_eq!(Angle::new(1, -2).unwrap(), Angle::new(-1, 2).unwrap());
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(Angle::new(1, 0), Err(Error::ZeroDenominator)));
    }

    #[test]
    fn pi_quarter_addition() {
        let q = Angle::new(1, 4).unwrap();
        assert_eq!(q + q, Angle::new(1, 2).unwrap());
        assert_eq!(q + q + q + q, Angle::PI);
        assert_eq!(q - q, Angle::ZERO);
    }

    #[test]
    fn radians_match_fraction() {
        let a = Angle::new(-1, 2).unwrap();
        assert!((a.radians() + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn add_is_commutative(n1 in -64i64..=64, d1 in 1i64..=16, n2 in -64i64..=64, d2 in 1i64..=16) {
            let a = Angle::new(n1, d1).unwrap();
            let b = Angle::new(n2, d2).unwrap();
            prop_assert_eq!(a + b, b + a);
        }

        #[test]
        fn neg_is_inverse(n in -64i64..=64, d in 1i64..=16) {
            let a = Angle::new(n, d).unwrap();
            prop_assert_eq!(a + (-a), Angle::ZERO);
        }

        #[test]
        fn result_stays_canonical(n in -1000i64..=1000, d in 1i64..=64) {
            let a = Angle::new(n, d).unwrap();
            prop_assert!(a.denominator() >= 1);
            prop_assert!(-a.denominator() < a.numerator() && a.numerator() <= a.denominator());
            prop_assert_eq!(a.numerator().gcd(&a.denominator()), if a.numerator() == 0 { a.denominator() } else { 1 });
        }
    }
}
