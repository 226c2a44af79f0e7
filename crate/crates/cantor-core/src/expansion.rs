//! Digit arithmetic for mixed-radix series expansions.
//!
//! A value x in [0,1) expands as x = sum E_n / (q_1 q_2 ... q_n) with
//! 0 <= E_n < q_n. Digits come from the exact multiply-and-floor recursion
//! r_0 = x, E_n = floor(q_n r_{n-1}), r_n = q_n r_{n-1} - E_n, which by
//! exactness can never emit an eventually-maximal digit tail.

use std::io::{BufRead, Write};

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Signed, Zero};

use crate::basic_seq::BasicSequence;
use crate::error::{CantorError, Result};
use crate::numeric::{rat_from_biguint, Rat, RatInterval};

/// A finite digit prefix E_1..E_N over a basic sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitPrefix {
    pub seq: BasicSequence,
    pub digits: Vec<BigUint>,
}

impl DigitPrefix {
    /// Validates 0 <= E_n <= q_n - 1 for every digit.
    pub fn new(seq: BasicSequence, digits: Vec<BigUint>) -> Result<Self> {
        for (i, d) in digits.iter().enumerate() {
            let q = seq.q(i as u64 + 1)?;
            if *d >= q {
                return Err(CantorError::Domain(format!(
                    "digit E_{} = {} out of range for q = {}",
                    i + 1,
                    d,
                    q
                )));
            }
        }
        Ok(DigitPrefix { seq, digits })
    }

    pub fn len(&self) -> u64 {
        self.digits.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// E_n for n >= 1.
    pub fn digit(&self, n: u64) -> Result<&BigUint> {
        self.digits
            .get((n - 1) as usize)
            .ok_or_else(|| CantorError::Range(format!("digit E_{n} beyond prefix")))
    }

    /// E_n / q_n, exact.
    pub fn digit_ratio(&self, n: u64) -> Result<Rat> {
        let e = rat_from_biguint(self.digit(n)?);
        let q = self.seq.q_rat(n)?;
        Ok(e / q)
    }

    /// Serializes as CSV rows `n,q_n,E_n` with a header.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "n,q_n,E_n")?;
        for (i, d) in self.digits.iter().enumerate() {
            let n = i as u64 + 1;
            let q = self.seq.q(n).expect("validated digit prefix");
            writeln!(w, "{n},{q},{d}")?;
        }
        Ok(())
    }

    /// Parses the `n,q_n,E_n` CSV format, checking q against `seq`.
    pub fn read_csv<R: BufRead>(seq: BasicSequence, r: R) -> Result<Self> {
        let mut digits = Vec::new();
        let mut expected_n = 1u64;
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| CantorError::Parse(format!("io: {e}")))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with('n')) {
                continue;
            }
            let mut parts = line.split(',');
            let (n_s, q_s, e_s) = match (parts.next(), parts.next(), parts.next()) {
                (Some(a), Some(b), Some(c)) => (a, b, c),
                _ => return Err(CantorError::Parse(format!("bad CSV row: {line:?}"))),
            };
            let n: u64 = n_s
                .trim()
                .parse()
                .map_err(|_| CantorError::Parse(format!("bad index {n_s:?}")))?;
            if n != expected_n {
                return Err(CantorError::Parse(format!(
                    "rows out of order: expected n = {expected_n}, got {n}"
                )));
            }
            let q: BigUint = q_s
                .trim()
                .parse()
                .map_err(|_| CantorError::Parse(format!("bad radix {q_s:?}")))?;
            if q != seq.q(n)? {
                return Err(CantorError::Parse(format!(
                    "radix mismatch at n = {n}: file says {q}, sequence says {}",
                    seq.q(n)?
                )));
            }
            let e: BigUint = e_s
                .trim()
                .parse()
                .map_err(|_| CantorError::Parse(format!("bad digit {e_s:?}")))?;
            digits.push(e);
            expected_n += 1;
        }
        DigitPrefix::new(seq, digits)
    }
}

/// First N digits of x in [0,1) by exact multiply-and-floor.
pub fn digits_of(x: &Rat, seq: &BasicSequence, n: u64) -> Result<DigitPrefix> {
    if x.is_negative() || *x >= Rat::one() {
        return Err(CantorError::Domain(format!(
            "x = {x} outside [0,1)"
        )));
    }
    if n == 0 {
        return Err(CantorError::Domain("need at least one digit".into()));
    }
    let mut digits = Vec::with_capacity(n as usize);
    let mut rem = x.clone();
    for i in 1..=n {
        let q = seq.q_rat(i)?;
        let scaled = q * rem;
        let e = scaled.floor();
        rem = scaled - &e;
        let e_int = e.to_integer();
        debug_assert!(!e_int.is_negative());
        digits.push(e_int.magnitude().clone());
    }
    Ok(DigitPrefix { seq: seq.clone(), digits })
}

/// sum_{n<=N} E_n/(q_1...q_n), exact; a left inverse of `digits_of` up to
/// truncation error below 1/(q_1...q_N).
pub fn value_of(prefix: &DigitPrefix) -> Result<Rat> {
    let mut acc = Rat::zero();
    let mut denom = BigUint::one();
    for (i, d) in prefix.digits.iter().enumerate() {
        denom *= prefix.seq.q(i as u64 + 1)?;
        acc += Rat::new(
            BigInt::from_biguint(Sign::Plus, d.clone()),
            BigInt::from_biguint(Sign::Plus, denom.clone()),
        );
    }
    Ok(acc)
}

/// Product q_1 q_2 ... q_n (n = 0 gives 1).
pub fn radix_product(seq: &BasicSequence, n: u64) -> Result<BigUint> {
    let mut p = BigUint::one();
    for i in 1..=n {
        p *= seq.q(i)?;
    }
    Ok(p)
}

/// The orbit value T_n(x) = q_n q_{n-1} ... q_1 x mod 1, exact. n = 0 returns x.
pub fn t_qn(x: &Rat, seq: &BasicSequence, n: u64) -> Result<Rat> {
    if x.is_negative() || *x >= Rat::one() {
        return Err(CantorError::Domain(format!("x = {x} outside [0,1)")));
    }
    let prod = rat_from_biguint(&radix_product(seq, n)?);
    let scaled = prod * x;
    Ok(&scaled - scaled.floor())
}

/// Enclosure of T_n(x) from digits alone: T_n(x) = 0.E_{n+1}E_{n+2}... with
/// respect to the shifted radix, so the first `tail_terms` digits give
/// [lo, lo + 1/(q_{n+1}...q_{n+tail_terms})].
pub fn t_qn_from_digits(prefix: &DigitPrefix, n: u64, tail_terms: u64) -> Result<RatInterval> {
    if tail_terms == 0 {
        return Err(CantorError::Domain("need at least one tail term".into()));
    }
    if n + tail_terms > prefix.len() {
        return Err(CantorError::Range(format!(
            "need digits through {} but prefix has {}",
            n + tail_terms,
            prefix.len()
        )));
    }
    let mut lo = Rat::zero();
    let mut denom = BigUint::one();
    for k in 1..=tail_terms {
        denom *= prefix.seq.q(n + k)?;
        lo += Rat::new(
            BigInt::from_biguint(Sign::Plus, prefix.digit(n + k)?.clone()),
            BigInt::from_biguint(Sign::Plus, denom.clone()),
        );
    }
    let width = Rat::new(BigInt::one(), BigInt::from_biguint(Sign::Plus, denom));
    Ok(RatInterval::new(lo.clone(), lo + width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{rat, rat_int};
    use proptest::prelude::*;

    fn succ() -> BasicSequence {
        BasicSequence::successor()
    }

    #[test]
    fn digits_of_five_sixths() {
        // hand iteration: 2*(5/6) = 5/3 -> E1=1 r=2/3; 3*(2/3) = 2 -> E2=2 r=0; E3=0
        let d = digits_of(&rat(5, 6), &succ(), 3).unwrap();
        let got: Vec<u64> = d.digits.iter().map(|b| b.try_into().unwrap()).collect();
        assert_eq!(got, vec![1, 2, 0]);
    }

    #[test]
    fn digits_of_zero_and_half() {
        let z = digits_of(&Rat::zero(), &succ(), 4).unwrap();
        assert!(z.digits.iter().all(|d| d.is_zero()));
        let h = digits_of(&rat(1, 2), &succ(), 2).unwrap();
        let got: Vec<u64> = h.digits.iter().map(|b| b.try_into().unwrap()).collect();
        assert_eq!(got, vec![1, 0]);
    }

    #[test]
    fn digits_domain_errors() {
        assert!(digits_of(&rat_int(1), &succ(), 2).is_err());
        assert!(digits_of(&rat(-1, 2), &succ(), 2).is_err());
    }

    #[test]
    fn value_of_inverts() {
        // 1/2 + 2/6 = 5/6
        let d = DigitPrefix::new(
            succ(),
            vec![1u32.into(), 2u32.into(), 0u32.into()],
        )
        .unwrap();
        assert_eq!(value_of(&d).unwrap(), rat(5, 6));
        let h = DigitPrefix::new(succ(), vec![1u32.into(), 0u32.into()]).unwrap();
        assert_eq!(value_of(&h).unwrap(), rat(1, 2));
    }

    #[test]
    fn orbit_values() {
        assert_eq!(t_qn(&rat(5, 6), &succ(), 1).unwrap(), rat(2, 3));
        assert_eq!(t_qn(&rat(5, 6), &succ(), 2).unwrap(), Rat::zero());
        assert_eq!(t_qn(&Rat::zero(), &succ(), 7).unwrap(), Rat::zero());
        assert_eq!(t_qn(&rat(5, 6), &succ(), 0).unwrap(), rat(5, 6));
    }

    #[test]
    fn orbit_enclosure_from_digits() {
        let d = digits_of(&rat(5, 6), &succ(), 6).unwrap();
        let enc = t_qn_from_digits(&d, 1, 2).unwrap();
        assert!(enc.contains(&rat(2, 3)));
        // width <= 1/(q2 q3) = 1/12
        assert!(enc.width() <= rat(1, 12));
        // full remaining tail pins the exact truncated sum
        let full = t_qn_from_digits(&d, 1, 5).unwrap();
        let exact = t_qn(&rat(5, 6), &succ(), 1).unwrap();
        assert!(full.contains(&exact));
    }

    #[test]
    fn csv_round_trip() {
        let d = digits_of(&rat(7, 13), &succ(), 8).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = DigitPrefix::read_csv(succ(), buf.as_slice()).unwrap();
        assert_eq!(d, back);
    }

    proptest! {
        #[test]
        fn round_trip_truncation_bound(num in 0u64..1_000_000, den in 1u64..1_000_000, n in 1u64..20) {
            prop_assume!(num < den);
            let x = rat(num as i64, den as i64);
            for seq in [BasicSequence::successor(), BasicSequence::power_of_two()] {
                let d = digits_of(&x, &seq, n).unwrap();
                let v = value_of(&d).unwrap();
                let gap = &x - &v;
                prop_assert!(!gap.is_negative());
                let prod = rat_from_biguint(&radix_product(&seq, n).unwrap());
                prop_assert!(gap < Rat::one() / prod);
            }
        }

        #[test]
        fn digit_recursion_via_orbit(num in 0u64..100_000, den in 1u64..100_000, n in 0u64..12) {
            prop_assume!(num < den);
            let x = rat(num as i64, den as i64);
            let seq = BasicSequence::successor();
            let d = digits_of(&x, &seq, n + 1).unwrap();
            // E_{n+1} = floor(q_{n+1} T_n(x))
            let t = t_qn(&x, &seq, n).unwrap();
            let q = seq.q_rat(n + 1).unwrap();
            let e = (q * t).floor().to_integer();
            prop_assert_eq!(e.magnitude(), d.digit(n + 1).unwrap());
        }

        #[test]
        fn enclosure_refinement(num in 0u64..10_000, den in 1u64..10_000, n in 0u64..5) {
            prop_assume!(num < den);
            let x = rat(num as i64, den as i64);
            let seq = BasicSequence::successor();
            let d = digits_of(&x, &seq, n + 6).unwrap();
            let exact = t_qn(&x, &seq, n).unwrap();
            let mut prev_width: Option<Rat> = None;
            for k in 1..=5 {
                let enc = t_qn_from_digits(&d, n, k).unwrap();
                prop_assert!(enc.contains(&exact));
                if let Some(w) = prev_width {
                    prop_assert!(enc.width() <= w);
                }
                prev_width = Some(enc.width());
            }
        }
    }
}
