//! Exact rational helpers and directed-rounding enclosures.
//!
//! Everything in this module is exact: an enclosure is a pair of rationals
//! `[lo, hi]` guaranteed to bracket the (possibly irrational) target value.
//! Logarithms and square roots are produced with outward rounding so that
//! every downstream inequality can be checked against the conservative side.

use std::ops::Add;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{CantorError, Result};

pub type Rat = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

/// Integer as an exact rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn rat_from_biguint(n: &BigUint) -> Rat {
    Rat::from_integer(BigInt::from_biguint(Sign::Plus, n.clone()))
}

/// Largest integer `<= x`.
pub fn floor_int(x: &Rat) -> BigInt {
    x.floor().to_integer()
}

/// Smallest integer `>= x`.
pub fn ceil_int(x: &Rat) -> BigInt {
    x.ceil().to_integer()
}

/// Render a rational as `num/den` (or plain integer when den = 1).
pub fn rat_to_string(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `num/den`, a plain integer, or a decimal literal.
pub fn rat_from_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| CantorError::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| CantorError::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(CantorError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = frac.trim();
        if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
            let scale = BigInt::from(10u32).pow(digits.len() as u32);
            let int_part: BigInt = if int.trim().is_empty() || int.trim() == "-" {
                BigInt::zero()
            } else {
                int.trim()
                    .parse()
                    .map_err(|_| CantorError::Parse(format!("bad decimal {s:?}")))?
            };
            let frac_part: BigInt = digits
                .parse()
                .map_err(|_| CantorError::Parse(format!("bad decimal {s:?}")))?;
            let neg = s.trim_start().starts_with('-');
            let mag = int_part.abs() * &scale + frac_part;
            let v = Rat::new(mag, scale);
            return Ok(if neg { -v } else { v });
        }
        return Err(CantorError::Parse(format!("bad decimal {s:?}")));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| CantorError::Parse(format!("bad rational {s:?}")))?;
    Ok(Rat::from_integer(n))
}

/// Decimal rendering with `digits` places, round-to-nearest, no floats.
pub fn rat_to_decimal(x: &Rat, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = x * Rat::from_integer(scale.clone());
    // round half away from zero
    let rounded = (scaled + rat(1, 2)).floor().to_integer();
    let neg = rounded.is_negative();
    let mag = rounded.abs();
    let (int_part, frac_part) = (mag.clone() / &scale, mag % &scale);
    let frac_str = format!("{:0>width$}", frac_part.to_string(), width = digits as usize);
    format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac_str)
}

/// A closed rational interval guaranteed to contain a real value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl RatInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order");
        RatInterval { lo, hi }
    }

    pub fn exact(v: Rat) -> Self {
        RatInterval { lo: v.clone(), hi: v }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn contains(&self, v: &Rat) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn overlaps(&self, other: &RatInterval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn neg(&self) -> Self {
        RatInterval { lo: -self.hi.clone(), hi: -self.lo.clone() }
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_negative() {
            RatInterval { lo: &self.hi * k, hi: &self.lo * k }
        } else {
            RatInterval { lo: &self.lo * k, hi: &self.hi * k }
        }
    }

    pub fn sub(&self, other: &RatInterval) -> Self {
        RatInterval { lo: &self.lo - &other.hi, hi: &self.hi - &other.lo }
    }

    /// Interval division; `other` must not straddle zero.
    pub fn div(&self, other: &RatInterval) -> Result<Self> {
        if other.lo.is_positive() {
            // both operands of our uses are nonnegative
            Ok(RatInterval { lo: &self.lo / &other.hi, hi: &self.hi / &other.lo })
        } else {
            Err(CantorError::Domain("interval division by a range touching zero".into()))
        }
    }
}

impl Add for RatInterval {
    type Output = RatInterval;
    fn add(self, rhs: RatInterval) -> RatInterval {
        RatInterval { lo: self.lo + rhs.lo, hi: self.hi + rhs.hi }
    }
}

impl<'a> Add<&'a RatInterval> for RatInterval {
    type Output = RatInterval;
    fn add(self, rhs: &'a RatInterval) -> RatInterval {
        RatInterval { lo: self.lo + &rhs.lo, hi: self.hi + &rhs.hi }
    }
}

fn pow2_rat(e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << (e as usize))
    } else {
        Rat::new(BigInt::one(), BigInt::one() << ((-e) as usize))
    }
}

/// Round `x` outward to a dyadic enclosure with `bits` fractional bits.
fn dyadic_enclose(x: &Rat, bits: u32) -> RatInterval {
    let scale = BigInt::one() << (bits as usize);
    let scaled = x * Rat::from_integer(scale.clone());
    let lo_i = scaled.floor().to_integer();
    let hi_i = if scaled.is_integer() { lo_i.clone() } else { &lo_i + 1 };
    RatInterval::new(Rat::new(lo_i, scale.clone()), Rat::new(hi_i, scale))
}

/// ln(1+t/(1-t)) style series: computes ln(m) for m in [1,2) via
/// 2*atanh((m-1)/(m+1)) with an explicit rational remainder bound.
fn ln_mantissa(m: &RatInterval, bits: u32) -> RatInterval {
    fn atanh2_lower_upper(t: &Rat, bits: u32) -> RatInterval {
        // 2 * sum_{k>=0} t^(2k+1)/(2k+1); t in [0, 1/3]
        debug_assert!(!t.is_negative() && t <= &rat(1, 3));
        let t2 = t * t;
        let mut term = t.clone();
        let mut sum = Rat::zero();
        let mut k: i64 = 0;
        let tol = pow2_rat(-(bits as i64) - 2);
        loop {
            sum += &term / rat_int(2 * k + 1);
            term *= &t2;
            k += 1;
            // remainder of sum_{j>=k} t^(2j+1)/(2j+1) <= term/(2k+1) * 1/(1-t^2)
            let rem = (&term / rat_int(2 * k + 1)) * rat(9, 8);
            if rem < tol {
                let lo = &sum * rat_int(2);
                let hi = (&sum + rem) * rat_int(2);
                return RatInterval::new(lo, hi);
            }
        }
    }
    let t_lo = (&m.lo - rat_int(1)) / (&m.lo + rat_int(1));
    let t_hi = (&m.hi - rat_int(1)) / (&m.hi + rat_int(1));
    let lo = atanh2_lower_upper(&t_lo, bits).lo;
    let hi = atanh2_lower_upper(&t_hi, bits).hi;
    RatInterval::new(lo, hi)
}

/// Enclosure of ln(2), cached.
pub fn ln2(bits: u32) -> RatInterval {
    static LN2_96: OnceLock<RatInterval> = OnceLock::new();
    let cached = LN2_96.get_or_init(|| ln_mantissa(&RatInterval::exact(rat_int(2)), 96));
    if bits <= 96 {
        cached.clone()
    } else {
        ln_mantissa(&RatInterval::exact(rat_int(2)), bits)
    }
}

/// Outward-rounded enclosure of the natural logarithm of a positive rational.
pub fn ln_interval(x: &Rat, bits: u32) -> Result<RatInterval> {
    if !x.is_positive() {
        return Err(CantorError::Domain("ln of a non-positive value".into()));
    }
    // x = m * 2^e with m in [1,2)
    let num_bits = x.numer().magnitude().bits() as i64;
    let den_bits = x.denom().magnitude().bits() as i64;
    let mut e = num_bits - den_bits;
    let mut m = x * pow2_rat(-e);
    if m < rat_int(1) {
        e -= 1;
        m = &m * rat_int(2);
    } else if m >= rat_int(2) {
        e += 1;
        m = &m / rat_int(2);
    }
    debug_assert!(m >= rat_int(1) && m < rat_int(2));
    // round the mantissa before the series so the series runs on small numbers
    let m_enc = dyadic_enclose(&m, bits + 4);
    let m_enc = RatInterval::new(m_enc.lo.max(rat_int(1)), m_enc.hi.min(rat_int(2)));
    let ln_m = ln_mantissa(&m_enc, bits);
    let l2 = ln2(bits);
    Ok(l2.scale(&rat_int(e)) + ln_m)
}

pub fn ln_interval_u64(x: u64, bits: u32) -> Result<RatInterval> {
    ln_interval(&Rat::from_integer(BigInt::from(x)), bits)
}

pub fn ln_interval_biguint(x: &BigUint, bits: u32) -> Result<RatInterval> {
    ln_interval(&rat_from_biguint(x), bits)
}

fn isqrt_bigint(n: &BigInt) -> BigInt {
    debug_assert!(!n.is_negative());
    BigInt::from_biguint(Sign::Plus, n.magnitude().sqrt())
}

/// Outward-rounded enclosure of sqrt(x) for x >= 0, with `bits` fractional bits.
pub fn sqrt_interval(x: &RatInterval, bits: u32) -> Result<RatInterval> {
    if x.lo.is_negative() {
        return Err(CantorError::Domain("sqrt of a negative range".into()));
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let lo_scaled = (&x.lo * Rat::from_integer(scale.clone())).floor().to_integer();
    let hi_scaled = (&x.hi * Rat::from_integer(scale)).ceil().to_integer();
    let denom = BigInt::one() << (bits as usize);
    let lo = Rat::new(isqrt_bigint(&lo_scaled), denom.clone());
    let hi_root = isqrt_bigint(&hi_scaled);
    let hi = Rat::new(hi_root + 1, denom);
    Ok(RatInterval::new(lo, hi))
}

/// ceil of the D-th root of an exact positive integer.
pub fn ceil_nth_root(n: &BigUint, d: u32) -> BigUint {
    let r = n.nth_root(d);
    if r.pow(d) == *n {
        r
    } else {
        r + BigUint::one()
    }
}
