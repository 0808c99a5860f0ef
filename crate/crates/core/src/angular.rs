//! Half-integer angular momentum quantum numbers and Clebsch-Gordan
//! coefficients.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A half-integer stored as twice its value, so `HalfInt::from_twice(3)` is 3/2.
/// Serialized as its numeric value (`1.5`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HalfInt(i32);

impl TryFrom<f64> for HalfInt {
    type Error = String;
    fn try_from(v: f64) -> Result<Self, String> {
        let twice = 2.0 * v;
        if twice.fract() == 0.0 && twice.abs() <= f64::from(i32::MAX) {
            Ok(HalfInt(twice as i32))
        } else {
            Err(format!("{v} is not a multiple of 1/2"))
        }
    }
}

impl From<HalfInt> for f64 {
    fn from(h: HalfInt) -> f64 {
        h.value()
    }
}

impl HalfInt {
    pub const HALF: HalfInt = HalfInt(1);
    pub const MINUS_HALF: HalfInt = HalfInt(-1);
    pub const THREE_HALVES: HalfInt = HalfInt(3);
    pub const MINUS_THREE_HALVES: HalfInt = HalfInt(-3);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn from_int(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    pub fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, rhs: HalfInt) -> HalfInt {
        HalfInt(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{:+}", self.0 / 2)
        } else {
            write!(f, "{:+}/2", self.0)
        }
    }
}

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(f64::from).product()
}

/// Clebsch-Gordan coefficient `<j1 m1; j2 m2 | j m>` in the Condon-Shortley
/// phase convention, via the Racah formula.
///
/// Returns 0 for any combination forbidden by the triangle rule, projection
/// conservation, or `|m| > j`.
pub fn clebsch_gordan(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
    let (tj1, tm1, tj2, tm2, tj, tm) = (j1.0, m1.0, j2.0, m2.0, j.0, m.0);
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return 0.0;
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return 0.0;
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return 0.0;
    }
    if tm1 + tm2 != tm {
        return 0.0;
    }
    if tj > tj1 + tj2 || tj < (tj1 - tj2).abs() || (tj1 + tj2 + tj) % 2 != 0 {
        return 0.0;
    }

    // every quantity below is an integer once halved
    let a = (tj1 + tj2 - tj) / 2;
    let b = (tj1 - tj2 + tj) / 2;
    let c = (-tj1 + tj2 + tj) / 2;
    let d = (tj1 + tj2 + tj) / 2 + 1;

    let triangle = factorial(a) * factorial(b) * factorial(c) / factorial(d);
    let projections = factorial((tj1 + tm1) / 2)
        * factorial((tj1 - tm1) / 2)
        * factorial((tj2 + tm2) / 2)
        * factorial((tj2 - tm2) / 2)
        * factorial((tj + tm) / 2)
        * factorial((tj - tm) / 2);
    let prefactor = (f64::from(tj + 1) * triangle * projections).sqrt();

    let k_min = 0.max((tj2 - tj - tm1) / 2).max((tj1 - tj + tm2) / 2);
    let k_max = a.min((tj1 - tm1) / 2).min((tj2 + tm2) / 2);

    let mut sum = 0.0;
    for k in k_min..=k_max {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial((tj1 - tm1) / 2 - k)
            * factorial((tj2 + tm2) / 2 - k)
            * factorial((tj - tj2 + tm1) / 2 + k)
            * factorial((tj - tj1 - tm2) / 2 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    prefactor * sum
}
