//! Basic sequences: the mixed radix `q_1, q_2, ...` underlying an expansion.

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{CantorError, Result};
use crate::numeric::{ln2, ln_interval_u64, rat_int, Rat, RatInterval};

/// How the sequence is defined. Formula kinds allow certified monotone
/// search for growth indices; explicit lists are certified only when the
/// listed prefix is non-decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqKind {
    /// q_n = n + 1
    Successor,
    /// q_n = 2^n
    PowerOfTwo,
    /// q_n = b for all n
    Constant { base: u64 },
    /// finite explicit prefix
    Explicit { values: Vec<u64> },
}

/// A basic sequence `q_n >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasicSequence {
    #[serde(flatten)]
    pub kind: SeqKind,
}

impl BasicSequence {
    pub fn successor() -> Self {
        BasicSequence { kind: SeqKind::Successor }
    }

    pub fn power_of_two() -> Self {
        BasicSequence { kind: SeqKind::PowerOfTwo }
    }

    pub fn constant(base: u64) -> Result<Self> {
        if base < 2 {
            return Err(CantorError::Domain(format!("constant base {base} < 2")));
        }
        Ok(BasicSequence { kind: SeqKind::Constant { base } })
    }

    pub fn explicit(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() {
            return Err(CantorError::Domain("empty explicit sequence".into()));
        }
        if let Some(bad) = values.iter().position(|&q| q < 2) {
            return Err(CantorError::Domain(format!(
                "q_{} = {} violates q_n >= 2",
                bad + 1,
                values[bad]
            )));
        }
        Ok(BasicSequence { kind: SeqKind::Explicit { values } })
    }

    /// True when q_n tends to infinity (a requirement for scheduling).
    pub fn infinite_in_limit(&self) -> bool {
        matches!(self.kind, SeqKind::Successor | SeqKind::PowerOfTwo)
    }

    /// Number of defined entries; `None` means all n >= 1.
    pub fn len(&self) -> Option<u64> {
        match &self.kind {
            SeqKind::Explicit { values } => Some(values.len() as u64),
            _ => None,
        }
    }

    /// q_n for n >= 1, exact.
    pub fn q(&self, n: u64) -> Result<BigUint> {
        if n == 0 {
            return Err(CantorError::Domain("sequence index starts at 1".into()));
        }
        match &self.kind {
            SeqKind::Successor => Ok(BigUint::from(n + 1)),
            SeqKind::PowerOfTwo => Ok(BigUint::one() << n),
            SeqKind::Constant { base } => Ok(BigUint::from(*base)),
            SeqKind::Explicit { values } => values
                .get((n - 1) as usize)
                .map(|&q| BigUint::from(q))
                .ok_or_else(|| CantorError::Range(format!("q_{n} beyond explicit prefix"))),
        }
    }

    /// q_n when it fits in a machine word.
    pub fn q_u64(&self, n: u64) -> Result<Option<u64>> {
        match &self.kind {
            SeqKind::PowerOfTwo => Ok(if n < 63 { Some(1u64 << n) } else { None }),
            _ => Ok(Some(match &self.kind {
                SeqKind::Successor => n + 1,
                SeqKind::Constant { base } => *base,
                SeqKind::Explicit { values } => *values
                    .get((n - 1) as usize)
                    .ok_or_else(|| CantorError::Range(format!("q_{n} beyond explicit prefix")))?,
                SeqKind::PowerOfTwo => unreachable!(),
            })),
        }
    }

    /// q_n as an exact rational.
    pub fn q_rat(&self, n: u64) -> Result<Rat> {
        Ok(Rat::from_integer(BigInt::from(self.q(n)?)))
    }

    /// Enclosure of ln(q_n).
    pub fn ln_q(&self, n: u64, bits: u32) -> Result<RatInterval> {
        match &self.kind {
            SeqKind::PowerOfTwo => Ok(ln2(bits).scale(&rat_int(n as i64))),
            _ => {
                let q = self.q_u64(n)?.ok_or_else(|| {
                    CantorError::Internal("non-power sequence exceeded u64".into())
                })?;
                ln_interval_u64(q, bits)
            }
        }
    }

    /// Enclosure of ln(q_1 q_2 ... q_k); k = 0 gives the empty product.
    pub fn ln_q_prefix(&self, k: u64, bits: u32) -> Result<RatInterval> {
        match &self.kind {
            SeqKind::PowerOfTwo => {
                // sum_{j<=k} j = k(k+1)/2
                let tri = rat_int(k as i64) * rat_int(k as i64 + 1) / rat_int(2);
                Ok(ln2(bits).scale(&tri))
            }
            SeqKind::Constant { base } => {
                Ok(ln_interval_u64(*base, bits)?.scale(&rat_int(k as i64)))
            }
            _ => {
                let mut acc = RatInterval::exact(Rat::from_integer(BigInt::from(0)));
                for j in 1..=k {
                    acc = acc + self.ln_q(j, bits)?;
                }
                Ok(acc)
            }
        }
    }

    /// Smallest index m such that q_j >= t for every j >= m, with a
    /// certified failure witness just below when m > 1.
    ///
    /// Formula kinds are monotone, so a first-hit scan is a proof; explicit
    /// prefixes are accepted only when non-decreasing (the tail is then
    /// uncertifiable and rejected if never reached within the prefix).
    pub fn growth_index(&self, t: u64) -> Result<u64> {
        if t <= 2 {
            return Ok(1);
        }
        match &self.kind {
            SeqKind::Successor => Ok(t - 1),
            SeqKind::PowerOfTwo => {
                let mut m = 1u64;
                while (m < 63 && (1u64 << m) < t) || (m >= 63 && m < 64) {
                    m += 1;
                    if m >= 64 {
                        break;
                    }
                }
                Ok(m)
            }
            SeqKind::Constant { base } => {
                if *base >= t {
                    Ok(1)
                } else {
                    Err(CantorError::Unsupported(format!(
                        "constant sequence {base} never reaches {t}"
                    )))
                }
            }
            SeqKind::Explicit { values } => {
                let monotone = values.windows(2).all(|w| w[0] <= w[1]);
                if !monotone {
                    return Err(CantorError::Unsupported(
                        "explicit sequence is not non-decreasing; no growth witness".into(),
                    ));
                }
                match values.iter().position(|&q| q >= t) {
                    Some(i) => Ok(i as u64 + 1),
                    None => Err(CantorError::Unsupported(format!(
                        "explicit prefix never reaches {t}"
                    ))),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn successor_values() {
        let q = BasicSequence::successor();
        assert_eq!(q.q(1).unwrap(), BigUint::from(2u32));
        assert_eq!(q.q(9).unwrap(), BigUint::from(10u32));
    }

    #[test]
    fn growth_index_examples() {
        // q_n = n+1: q_j >= 3 iff j >= 2
        let q = BasicSequence::successor();
        assert_eq!(q.growth_index(3).unwrap(), 2);
        assert_eq!(q.growth_index(1).unwrap(), 1);
        // q_n = 2^n: 2^3 = 8 >= 7 and 2^2 = 4 < 7
        let p = BasicSequence::power_of_two();
        assert_eq!(p.growth_index(7).unwrap(), 3);
        assert_eq!(p.growth_index(2).unwrap(), 1);
    }

    #[test]
    fn explicit_validation() {
        assert!(BasicSequence::explicit(vec![2, 3, 1]).is_err());
        let q = BasicSequence::explicit(vec![2, 2, 5, 9]).unwrap();
        assert_eq!(q.growth_index(5).unwrap(), 3);
        assert!(q.growth_index(10).is_err());
        assert!(q.q(5).is_err());
    }

    #[test]
    fn prefix_log_of_powers() {
        let q = BasicSequence::power_of_two();
        // ln(q1 q2 q3) = 6 ln 2
        let enc = q.ln_q_prefix(3, 64).unwrap();
        let expect = ln2(64).scale(&rat_int(6));
        assert!(enc.overlaps(&expect));
    }
}
