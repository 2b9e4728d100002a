//! Wigner 3j symbols via the Racah closed form.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Integer or half-integer stored as twice its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn int(value: i32) -> Self {
        HalfInt(2 * value)
    }

    /// Accepts values that are exact multiples of 1/2.
    pub fn try_from_f64(value: f64) -> Result<Self> {
        let twice = 2.0 * value;
        if !twice.is_finite() || twice.fract() != 0.0 || twice.abs() > i32::MAX as f64 {
            return Err(Error::InvalidArgument(format!(
                "{value} is not an integer or half-integer"
            )));
        }
        Ok(HalfInt(twice as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn factorial<T: Real>(n: i32) -> T {
    debug_assert!(n >= 0);
    let mut acc = T::one();
    for k in 2..=n {
        acc *= lit::<T>(k as f64);
    }
    acc
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
///
/// Returns zero when the triangle rule, `m1 + m2 + m3 = 0`, `|m| <= j` or the
/// integer-sum conditions fail.
pub fn wigner_3j<T: Real>(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> T {
    let (tj1, tj2, tj3) = (j1.0, j2.0, j3.0);
    let (tm1, tm2, tm3) = (m1.0, m2.0, m3.0);
    if tj1 < 0 || tj2 < 0 || tj3 < 0 {
        return T::zero();
    }
    if tm1 + tm2 + tm3 != 0 {
        return T::zero();
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm3.abs() > tj3 {
        return T::zero();
    }
    // j + m must be integral for every column
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj3 + tm3) % 2 != 0 {
        return T::zero();
    }
    if (tj1 + tj2 + tj3) % 2 != 0 {
        return T::zero();
    }
    if tj3 > tj1 + tj2 || tj3 < (tj1 - tj2).abs() {
        return T::zero();
    }

    // Everything below is in plain integers (values, not doubled).
    let a = (tj1 + tj2 - tj3) / 2;
    let b = (tj1 - tj2 + tj3) / 2;
    let c = (-tj1 + tj2 + tj3) / 2;
    let big = (tj1 + tj2 + tj3) / 2 + 1;

    let j1pm1 = (tj1 + tm1) / 2;
    let j1mm1 = (tj1 - tm1) / 2;
    let j2pm2 = (tj2 + tm2) / 2;
    let j2mm2 = (tj2 - tm2) / 2;
    let j3pm3 = (tj3 + tm3) / 2;
    let j3mm3 = (tj3 - tm3) / 2;

    // k bounds from the non-negativity of every factorial argument
    let t1 = (tj3 - tj2 + tm1) / 2;
    let t2 = (tj3 - tj1 - tm2) / 2;
    let kmin = 0.max(-t1).max(-t2);
    let kmax = a.min(j1mm1).min(j2pm2);
    if kmin > kmax {
        return T::zero();
    }

    let mut sum = T::zero();
    for k in kmin..=kmax {
        let denom = factorial::<T>(k)
            * factorial::<T>(t1 + k)
            * factorial::<T>(t2 + k)
            * factorial::<T>(a - k)
            * factorial::<T>(j1mm1 - k)
            * factorial::<T>(j2pm2 - k);
        let term = T::one() / denom;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }

    let triangle = factorial::<T>(a) * factorial::<T>(b) * factorial::<T>(c) / factorial::<T>(big);
    let projections = factorial::<T>(j1pm1)
        * factorial::<T>(j1mm1)
        * factorial::<T>(j2pm2)
        * factorial::<T>(j2mm2)
        * factorial::<T>(j3pm3)
        * factorial::<T>(j3mm3);

    let phase_twice = tj1 - tj2 - tm3;
    debug_assert!(phase_twice % 2 == 0);
    let sign = if (phase_twice / 2).rem_euclid(2) == 0 {
        T::one()
    } else {
        -T::one()
    };
    sign * (triangle * projections).sqrt() * sum
}

/// Checked variant taking plain numbers; rejects anything that is not a
/// multiple of 1/2 and negative angular momenta.
pub fn wigner_3j_checked(j: [f64; 3], m: [f64; 3]) -> Result<f64> {
    let mut js = [HalfInt::ZERO; 3];
    let mut ms = [HalfInt::ZERO; 3];
    for k in 0..3 {
        js[k] = HalfInt::try_from_f64(j[k])?;
        ms[k] = HalfInt::try_from_f64(m[k])?;
        if js[k].twice() < 0 {
            return Err(Error::InvalidArgument(format!("negative j = {}", j[k])));
        }
    }
    Ok(wigner_3j(js[0], js[1], js[2], ms[0], ms[1], ms[2]))
}

/// 3j symbol with all-integer arguments.
pub fn wigner_3j_int<T: Real>(j1: i32, j2: i32, j3: i32, m1: i32, m2: i32, m3: i32) -> T {
    wigner_3j(
        HalfInt::int(j1),
        HalfInt::int(j2),
        HalfInt::int(j3),
        HalfInt::int(m1),
        HalfInt::int(m2),
        HalfInt::int(m3),
    )
}
