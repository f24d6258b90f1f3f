//! Number types for the grid oracle: exact rationals when the inputs allow, floats otherwise.

use std::cmp::Ordering;
use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

/// Coordinates and scaled payoffs. Values are ratios of two scalars and are
/// compared exactly for `i128`, with tolerance `1e-9` for `f64`.
pub trait Scalar:
    Copy + Send + Sync + Debug + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self>
{
    type Value: Copy + Send + Sync + Debug;
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn ratio(num: Self, den: Self) -> Self::Value;
    fn compare(a: &Self::Value, b: &Self::Value) -> Ordering;
    fn value_f64(v: &Self::Value) -> f64;
    fn to_f64(self) -> f64;
    /// Sign, treating magnitudes up to `scale * 1e-12` as zero in float mode.
    fn sign(self, scale: f64) -> Ordering;
}

impl Scalar for f64 {
    type Value = f64;
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn ratio(num: Self, den: Self) -> f64 {
        num / den
    }

    fn compare(a: &f64, b: &f64) -> Ordering {
        if (a - b).abs() <= 1e-9 * 1f64.max(a.abs()).max(b.abs()) {
            Ordering::Equal
        } else if a > b {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }

    fn value_f64(v: &f64) -> f64 {
        *v
    }

    fn to_f64(self) -> f64 {
        self
    }

    fn sign(self, scale: f64) -> Ordering {
        if self.abs() <= 1e-12 * scale {
            Ordering::Equal
        } else if self > 0.0 {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

impl Scalar for i128 {
    type Value = Ratio<i128>;
    const EXACT: bool = true;

    fn zero() -> Self {
        0
    }

    fn one() -> Self {
        1
    }

    fn ratio(num: Self, den: Self) -> Ratio<i128> {
        Ratio::new(num, den)
    }

    fn compare(a: &Ratio<i128>, b: &Ratio<i128>) -> Ordering {
        a.cmp(b)
    }

    fn value_f64(v: &Ratio<i128>) -> f64 {
        v.to_f64().unwrap_or(f64::NAN)
    }

    fn to_f64(self) -> f64 {
        self as f64
    }

    fn sign(self, _scale: f64) -> Ordering {
        self.cmp(&0)
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`,
/// accepted only when it reproduces `x` to `1e-12` relative accuracy.
pub fn rationalize(x: f64, max_den: i128) -> Option<Ratio<i128>> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        let ai = a as i128;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let approx = h1 as f64 / k1 as f64;
        if (approx - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(Ratio::new(h1, k1));
        }
        let frac = rest - a;
        if frac.abs() < 1e-15 {
            break;
        }
        rest = 1.0 / frac;
    }
    (k1 != 0 && ((h1 as f64 / k1 as f64) - x).abs() <= 1e-12 * x.abs().max(1.0)).then(|| Ratio::new(h1, k1))
}

pub(crate) fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn lcm(a: i128, b: i128) -> Option<i128> {
    (a / gcd(a, b)).checked_mul(b).map(|v| v.abs())
}

/// Integers proportional to `values` with a common positive factor, if small enough.
pub(crate) fn integer_scaled(values: &[f64], max_den: i128, max_abs: i128) -> Option<(Vec<i128>, i128)> {
    let rats = values.iter().map(|&v| rationalize(v, max_den)).collect::<Option<Vec<_>>>()?;
    let mut scale = 1i128;
    for r in &rats {
        scale = lcm(scale, *r.denom())?;
        if scale > max_den * max_den {
            return None;
        }
    }
    let ints = rats
        .iter()
        .map(|r| (r * Ratio::from_integer(scale)).to_integer())
        .collect::<Vec<_>>();
    ints.iter().all(|v| v.abs() <= max_abs).then_some((ints, scale))
}
