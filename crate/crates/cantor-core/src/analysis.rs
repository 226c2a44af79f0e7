//! Empirical verification: counts, empirical distribution functions,
//! one-sided discrepancies, subsequence extraction, accumulation-point
//! estimation, and the nested-interval dimension lower bound.
//!
//! Window values are rational enclosures [lo, hi]. Every statistic here is
//! computed twice, once with all values at their lower ends and once at
//! their upper ends, which brackets the true statistic exactly because the
//! counting function is monotone in each value.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::adf::{Adf, Breakpoint, ClosedSetU, Side};
use crate::error::{CantorError, Result};
use crate::expansion::{t_qn_from_digits, DigitPrefix};
use crate::numeric::{ln_interval, ln_interval_biguint, rat_int, rat_to_string, Rat, RatInterval};
use crate::poly::IntPolynomial;

/// A value known to lie in [lo, hi].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Rat,
    pub hi: Rat,
}

impl Enclosure {
    pub fn exact(v: Rat) -> Self {
        Enclosure { lo: v.clone(), hi: v }
    }

    pub fn new(lo: Rat, hi: Rat) -> Result<Self> {
        if lo > hi {
            return Err(CantorError::Domain("enclosure bounds out of order".into()));
        }
        Ok(Enclosure { lo, hi })
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }
}

/// A finite sequence of value enclosures in [0, 1).
#[derive(Debug, Clone, Default)]
pub struct SequenceWindow {
    vals: Vec<Enclosure>,
}

impl SequenceWindow {
    pub fn from_enclosures(vals: Vec<Enclosure>) -> Result<Self> {
        for v in &vals {
            if v.lo.is_negative() || v.hi >= Rat::one() {
                return Err(CantorError::Domain(format!(
                    "window value [{}, {}] outside [0,1)",
                    v.lo, v.hi
                )));
            }
        }
        Ok(SequenceWindow { vals })
    }

    pub fn from_exact(vals: Vec<Rat>) -> Result<Self> {
        SequenceWindow::from_enclosures(vals.into_iter().map(Enclosure::exact).collect())
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn values(&self) -> &[Enclosure] {
        &self.vals
    }

    pub fn push(&mut self, v: Enclosure) {
        self.vals.push(v);
    }

    pub fn truncated(&self, n: usize) -> SequenceWindow {
        SequenceWindow { vals: self.vals[..n.min(self.vals.len())].to_vec() }
    }

    pub fn concat(windows: &[&SequenceWindow]) -> SequenceWindow {
        let mut vals = Vec::new();
        for w in windows {
            vals.extend(w.vals.iter().cloned());
        }
        SequenceWindow { vals }
    }

    pub fn is_exact(&self) -> bool {
        self.vals.iter().all(|v| v.lo == v.hi)
    }

    pub fn max_width(&self) -> Rat {
        self.vals.iter().map(|v| v.width()).max().unwrap_or_else(Rat::zero)
    }

    fn weighted(&self, n: usize, lower_ends: bool) -> WeightedValues {
        let mut counts: BTreeMap<Rat, u64> = BTreeMap::new();
        for v in self.vals.iter().take(n) {
            let key = if lower_ends { v.lo.clone() } else { v.hi.clone() };
            *counts.entry(key).or_insert(0) += 1;
        }
        WeightedValues {
            total: self.vals.len().min(n) as u64,
            entries: counts.into_iter().collect(),
        }
    }
}

/// Sorted distinct values with multiplicities.
#[derive(Debug, Clone)]
pub struct WeightedValues {
    pub entries: Vec<(Rat, u64)>,
    pub total: u64,
}

impl WeightedValues {
    pub fn from_counts(mut entries: Vec<(Rat, u64)>) -> Self {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let total = entries.iter().map(|e| e.1).sum();
        WeightedValues { entries, total }
    }
}

/// A one-dimensional interval with configurable endpoint inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealInterval {
    pub lo: Rat,
    pub hi: Rat,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl RealInterval {
    pub fn half_open(lo: Rat, hi: Rat) -> Self {
        RealInterval { lo, hi, lo_closed: true, hi_closed: false }
    }

    pub fn closed(lo: Rat, hi: Rat) -> Self {
        RealInterval { lo, hi, lo_closed: true, hi_closed: true }
    }

    fn contains(&self, x: &Rat) -> bool {
        let lo_ok = if self.lo_closed { x >= &self.lo } else { x > &self.lo };
        let hi_ok = if self.hi_closed { x <= &self.hi } else { x < &self.hi };
        lo_ok && hi_ok
    }
}

/// An exact count, or a min/max pair when enclosures straddle an endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountRange {
    pub min: u64,
    pub max: u64,
}

/// Number of the first n window values inside the interval; ambiguous
/// enclosures are reported as a count range rather than resolved.
pub fn count_in(interval: &RealInterval, window: &SequenceWindow, n: usize) -> Result<CountRange> {
    if n > window.len() {
        return Err(CantorError::Range(format!(
            "count over {n} values but the window holds {}",
            window.len()
        )));
    }
    let mut min = 0u64;
    let mut max = 0u64;
    for v in window.values().iter().take(n) {
        let definitely = interval.contains(&v.lo) && interval.contains(&v.hi);
        let possibly = !(v.hi < interval.lo
            || (!interval.lo_closed && v.hi == interval.lo)
            || v.lo > interval.hi
            || (!interval.hi_closed && v.lo == interval.hi));
        if definitely {
            min += 1;
        }
        if possibly {
            max += 1;
        }
    }
    Ok(CountRange { min, max })
}

/// The empirical step adf of the first n values; requires exact values.
pub fn empirical_adf(window: &SequenceWindow, n: usize) -> Result<Adf> {
    if n == 0 || n > window.len() {
        return Err(CantorError::Domain(format!("bad prefix length {n}")));
    }
    if !window.truncated(n).is_exact() {
        return Err(CantorError::Domain(
            "empirical adf needs exact values, not enclosures".into(),
        ));
    }
    let w = window.weighted(n, true);
    let total = rat_int(w.total as i64);
    let mut pts: Vec<Breakpoint> = Vec::new();
    let mut below = Rat::zero();
    if w.entries.first().map(|(v, _)| !v.is_zero()).unwrap_or(true) {
        pts.push(Breakpoint { x: Rat::zero(), left: Rat::zero(), point: Rat::zero(), right: Rat::zero() });
    }
    for (v, c) in &w.entries {
        let after = &below + rat_int(*c as i64) / &total;
        pts.push(Breakpoint { x: v.clone(), left: below.clone(), point: below.clone(), right: after.clone() });
        below = after;
    }
    pts.push(Breakpoint { x: Rat::one(), left: Rat::one(), point: Rat::one(), right: Rat::one() });
    Adf::from_breakpoints(pts)
}

/// sup over gamma of A([0,gamma))/n - f(gamma), exactly; the supremum over
/// each affine piece is attained at a one-sided limit at a candidate point
/// (data values and breakpoints of f), so three evaluations per candidate
/// suffice.
fn signed_extremes(w: &WeightedValues, f: &Adf, want_max: bool) -> Result<Rat> {
    let n = rat_int(w.total as i64);
    let mut candidates: Vec<Rat> = w.entries.iter().map(|(v, _)| v.clone()).collect();
    candidates.extend(f.breakpoints().iter().map(|b| b.x.clone()));
    candidates.push(Rat::zero());
    candidates.push(Rat::one());
    candidates.sort();
    candidates.dedup();

    let mut best: Option<Rat> = None;
    let mut lt_count = 0u64; // values strictly below the current candidate
    let mut idx = 0usize;
    for gamma in &candidates {
        while idx < w.entries.len() && &w.entries[idx].0 < gamma {
            lt_count += w.entries[idx].1;
            idx += 1;
        }
        let le_count = if idx < w.entries.len() && &w.entries[idx].0 == gamma {
            lt_count + w.entries[idx].1
        } else {
            lt_count
        };
        let a_lt = rat_int(lt_count as i64) / &n;
        let a_le = rat_int(le_count as i64) / &n;
        for h in [
            &a_lt - f.eval(gamma, Side::Left)?,
            &a_lt - f.eval(gamma, Side::Point)?,
            &a_le - f.eval(gamma, Side::Right)?,
        ] {
            let better = match &best {
                None => true,
                Some(b) => {
                    if want_max {
                        h > *b
                    } else {
                        h < *b
                    }
                }
            };
            if better {
                best = Some(h);
            }
        }
    }
    best.ok_or_else(|| CantorError::Internal("no candidates inspected".into()))
}

fn upper_of(w: &WeightedValues, f: &Adf) -> Result<Rat> {
    Ok(signed_extremes(w, f, true)?.max(Rat::zero()))
}

fn lower_of(w: &WeightedValues, f: &Adf) -> Result<Rat> {
    Ok(signed_extremes(w, f, false)?.min(Rat::zero()))
}

/// Upper discrepancy of the first n values against f, bracketed by the
/// enclosure ends. Exact windows give a zero-width result.
pub fn upper_discrepancy(window: &SequenceWindow, n: usize, f: &Adf) -> Result<RatInterval> {
    check_prefix(window, n)?;
    let hi = upper_of(&window.weighted(n, true), f)?;
    let lo = upper_of(&window.weighted(n, false), f)?;
    Ok(RatInterval::new(lo, hi))
}

/// Lower discrepancy (a value in [-1, 0]), bracketed.
pub fn lower_discrepancy(window: &SequenceWindow, n: usize, f: &Adf) -> Result<RatInterval> {
    check_prefix(window, n)?;
    let hi = lower_of(&window.weighted(n, true), f)?;
    let lo = lower_of(&window.weighted(n, false), f)?;
    Ok(RatInterval::new(lo, hi))
}

fn check_prefix(window: &SequenceWindow, n: usize) -> Result<()> {
    if n == 0 || n > window.len() {
        return Err(CantorError::Domain(format!(
            "prefix length {n} outside 1..={}",
            window.len()
        )));
    }
    Ok(())
}

/// Classical two-sided discrepancy sup |A/n - f| against a continuous adf.
pub fn two_sided_discrepancy(window: &SequenceWindow, n: usize, f: &Adf) -> Result<RatInterval> {
    let up = upper_discrepancy(window, n, f)?;
    let low = lower_discrepancy(window, n, f)?;
    Ok(RatInterval::new(
        up.lo.clone().max(-low.hi.clone()),
        up.hi.max(-low.lo),
    ))
}

/// Star discrepancy: the two-sided discrepancy against the identity.
pub fn star_discrepancy(window: &SequenceWindow, n: usize) -> Result<RatInterval> {
    two_sided_discrepancy(window, n, &Adf::identity())
}

/// How to read a subsequence out of a digit prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubsequenceMode {
    /// orbit values T_{p(mi+r)} as digit-tail enclosures
    Orbit { tail_terms: u64 },
    /// exact digit ratios E_{p(mi+r)} / q_{p(mi+r)}
    Ratio,
}

/// Extracts the (m, r)-indexed subsequence along a polynomial.
pub fn subsequence(
    prefix: &DigitPrefix,
    p: &IntPolynomial,
    m: u64,
    r: u64,
    mode: SubsequenceMode,
) -> Result<SequenceWindow> {
    if m == 0 || r >= m {
        return Err(CantorError::Domain(format!("bad progression ({m}, {r})")));
    }
    let mut vals = Vec::new();
    let mut i = 0u64;
    loop {
        let arg = m
            .checked_mul(i)
            .and_then(|x| x.checked_add(r))
            .ok_or_else(|| CantorError::Range("progression argument overflow".into()))?;
        let idx_big = p.eval_u64(arg);
        if idx_big.is_negative() {
            i += 1;
            continue;
        }
        let idx: u64 = (&idx_big)
            .try_into()
            .map_err(|_| CantorError::Range("subsequence index overflow".into()))?;
        match mode {
            SubsequenceMode::Ratio => {
                if idx > prefix.len() {
                    break;
                }
                if idx >= 1 {
                    vals.push(Enclosure::exact(prefix.digit_ratio(idx)?));
                }
            }
            SubsequenceMode::Orbit { tail_terms } => {
                if idx + tail_terms > prefix.len() {
                    break;
                }
                let enc = t_qn_from_digits(prefix, idx, tail_terms)?;
                // tail sums live in [lo, lo + width] with the top end possibly 1
                let hi = enc.hi.min(Rat::one() - Rat::new(BigInt::one(), BigInt::from(u64::MAX)));
                vals.push(Enclosure { lo: enc.lo.clone().min(hi.clone()), hi });
            }
        }
        i += 1;
        if i > prefix.len() + 1 {
            break;
        }
    }
    SequenceWindow::from_enclosures(vals)
}

/// Per-checkpoint discrepancies of orbit and digit-ratio subsequences for
/// every progression (m, r) with m <= max_m, with sandwich cross-checks.
#[derive(Debug, Serialize)]
pub struct NormalityReport {
    pub rows: Vec<NormalityRow>,
    /// indices where the orbit enclosure escapes the digit sandwich
    pub sandwich_violations: u64,
}

#[derive(Debug, Serialize)]
pub struct NormalityRow {
    pub m: u64,
    pub r: u64,
    pub checkpoint: u64,
    pub orbit_star_hi: String,
    pub ratio_star_hi: String,
}

pub fn ap_normality_report(
    prefix: &DigitPrefix,
    max_m: u64,
    checkpoints: &[u64],
    tail_terms: u64,
) -> Result<NormalityReport> {
    let x = IntPolynomial::identity();
    let mut rows = Vec::new();
    let mut sandwich_violations = 0u64;
    // sandwich: T_k sits between E_{k+1}/q_{k+1} and (E_{k+1}+1)/q_{k+1}
    for k in 0..prefix.len().saturating_sub(tail_terms) {
        let enc = t_qn_from_digits(prefix, k, tail_terms)?;
        let lo = prefix.digit_ratio(k + 1)?;
        let q = prefix.seq.q_rat(k + 1)?;
        let hi = &lo + Rat::one() / q;
        if enc.hi < lo || enc.lo > hi {
            sandwich_violations += 1;
        }
    }
    for m in 1..=max_m {
        for r in 0..m {
            let orbit = subsequence(prefix, &x, m, r, SubsequenceMode::Orbit { tail_terms })?;
            let ratio = subsequence(prefix, &x, m, r, SubsequenceMode::Ratio)?;
            for &cp in checkpoints {
                let o_n = orbit.len().min((cp / m).max(1) as usize);
                let r_n = ratio.len().min((cp / m).max(1) as usize);
                if o_n == 0 || r_n == 0 {
                    continue;
                }
                let o_star = star_discrepancy(&orbit, o_n)?;
                let r_star = star_discrepancy(&ratio, r_n)?;
                rows.push(NormalityRow {
                    m,
                    r,
                    checkpoint: cp,
                    orbit_star_hi: rat_to_string(&o_star.hi),
                    ratio_star_hi: rat_to_string(&r_star.hi),
                });
            }
        }
    }
    Ok(NormalityReport { rows, sandwich_violations })
}

/// Covers the values recurring in the tail half of the window by closed
/// intervals of width at least eps: a desk-scale stand-in for the
/// accumulation set (finite windows have none). Values cluster greedily at
/// gap eps; clusters below the frequency threshold drop; each surviving
/// cluster pads rightward to the minimum width.
pub fn accumulation_estimate(
    window: &SequenceWindow,
    eps: &Rat,
    freq_threshold: &Rat,
) -> Result<ClosedSetU> {
    let half = window.len() / 2;
    let tail = &window.values()[half..];
    let mut counts: BTreeMap<Rat, u64> = BTreeMap::new();
    for v in tail {
        *counts.entry(v.lo.clone()).or_insert(0) += 1;
    }
    accumulation_estimate_from_counts(
        &counts.into_iter().collect::<Vec<_>>(),
        tail.len() as u64,
        eps,
        freq_threshold,
    )
}

/// The clustering core of [`accumulation_estimate`], applicable to
/// streaming aggregates.
pub fn accumulation_estimate_from_counts(
    value_counts: &[(Rat, u64)],
    total: u64,
    eps: &Rat,
    freq_threshold: &Rat,
) -> Result<ClosedSetU> {
    if !eps.is_positive() {
        return Err(CantorError::Domain("eps must be positive".into()));
    }
    if total == 0 {
        return ClosedSetU::new(vec![]);
    }
    let mut sorted: Vec<(Rat, u64)> = value_counts.to_vec();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut clusters: Vec<(Rat, Rat, u64)> = Vec::new(); // (lo, hi, count)
    for (v, c) in sorted {
        match clusters.last_mut() {
            Some((_, hi, count)) if &v - &*hi <= *eps => {
                *hi = v;
                *count += c;
            }
            _ => clusters.push((v.clone(), v, c)),
        }
    }
    let total_rat = rat_int(total as i64);
    let mut comps = Vec::new();
    for (lo, hi, count) in clusters {
        if rat_int(count as i64) / &total_rat >= *freq_threshold {
            let padded_hi = hi.max(&lo + eps).min(Rat::one());
            comps.push((lo, padded_hi));
        }
    }
    ClosedSetU::new(comps)
}

/// Partial quotients of the nested-interval dimension bound:
/// for each k, log(n_1 ... n_k) / -log(c_1 ... c_{k+1} n_{k+1}).
/// The caller takes a running minimum as the liminf proxy.
pub fn moran_lower_bound(
    child_counts: &[BigUint],
    ratios: &[Rat],
    k_max: usize,
) -> Result<Vec<RatInterval>> {
    if child_counts.len() <= k_max || ratios.len() <= k_max {
        return Err(CantorError::Domain(format!(
            "need {} levels of data for k_max = {k_max}",
            k_max + 1
        )));
    }
    let two = BigUint::from(2u32);
    for (n, c) in child_counts.iter().zip(ratios.iter()) {
        if n < &two {
            return Err(CantorError::Domain("child counts must be >= 2".into()));
        }
        if !c.is_positive() || c >= &Rat::one() {
            return Err(CantorError::Domain("contraction ratios must lie in (0,1)".into()));
        }
        let scaled = Rat::from_integer(BigInt::from(n.clone())) * c;
        if scaled > Rat::one() {
            return Err(CantorError::Domain(
                "child count times ratio must not exceed 1".into(),
            ));
        }
    }
    const BITS: u32 = 64;
    let mut out = Vec::with_capacity(k_max);
    let mut log_counts = RatInterval::exact(Rat::zero());
    let mut neg_log_ratios = RatInterval::exact(Rat::zero()); // sum of -ln c_j, j <= k+1
    // seed with c_1
    neg_log_ratios = neg_log_ratios + ln_interval(&(Rat::one() / &ratios[0]), BITS)?;
    for k in 1..=k_max {
        log_counts = log_counts + ln_interval_biguint(&child_counts[k - 1], BITS)?;
        neg_log_ratios = neg_log_ratios + ln_interval(&(Rat::one() / &ratios[k]), BITS)?;
        let ln_next_count = ln_interval_biguint(&child_counts[k], BITS)?;
        let denom = neg_log_ratios.sub(&ln_next_count);
        out.push(log_counts.div(&denom)?);
    }
    Ok(out)
}

/// Outcome of one inequality check in the discrepancy property suite.
#[derive(Debug, Serialize)]
pub struct SuiteItem {
    pub name: &'static str,
    pub checks: u64,
    pub violations: u64,
}

/// Exact verification of the one-sided discrepancy inequalities on a
/// window: monotone comparison against the two-sided discrepancy, the
/// concatenation bound, the family refinement bound, the upper-vs-lower
/// target comparison, and the sorted-window bound. Violations are
/// implementation bugs, not statistical noise.
pub struct DiscrepancySuite {
    pub items: Vec<SuiteItem>,
}

impl DiscrepancySuite {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.violations == 0)
    }
}

/// Runs the suite over exact windows against a continuous adf `f`, a
/// pointwise-ordered pair (f_hi >= f_lo), and a linear family for the
/// refinement bound.
pub fn discrepancy_property_suite(
    windows: &[SequenceWindow],
    f: &Adf,
    ordered_pair: (&Adf, &Adf),
    family: &crate::family::LinearFamily,
    refinement: (u64, u64, u64),
) -> Result<DiscrepancySuite> {
    let mut one_sided = SuiteItem { name: "one_sided_below_two_sided", checks: 0, violations: 0 };
    let mut concat = SuiteItem { name: "concatenation_bound", checks: 0, violations: 0 };
    let mut refine = SuiteItem { name: "family_refinement_bound", checks: 0, violations: 0 };
    let mut ordered = SuiteItem { name: "ordered_targets", checks: 0, violations: 0 };
    let mut sorted_bound = SuiteItem { name: "sorted_window_bound", checks: 0, violations: 0 };

    let (m, r, d) = refinement;
    for w in windows {
        if !w.is_exact() || w.is_empty() {
            return Err(CantorError::Domain("the suite needs exact nonempty windows".into()));
        }
        let n = w.len();

        // upper discrepancy never exceeds the two-sided discrepancy
        let up = upper_discrepancy(w, n, f)?.hi;
        let two = two_sided_discrepancy(w, n, f)?.hi;
        one_sided.checks += 1;
        if up > two {
            one_sided.violations += 1;
        }

        // concatenation: split into three blocks and average
        if n >= 3 {
            let third = n / 3;
            let parts = [
                w.truncated(third),
                SequenceWindow { vals: w.vals[third..2 * third].to_vec() },
                SequenceWindow { vals: w.vals[2 * third..].to_vec() },
            ];
            let whole = upper_discrepancy(w, n, f)?.hi;
            let mut weighted = Rat::zero();
            for part in &parts {
                if part.is_empty() {
                    continue;
                }
                weighted += rat_int(part.len() as i64) * upper_discrepancy(part, part.len(), f)?.hi;
            }
            concat.checks += 1;
            if whole > weighted / rat_int(n as i64) {
                concat.violations += 1;
            }
        }

        // refinement bound along the family
        if n as u64 > m * d {
            let base_member = family.member(m, r)?;
            let base_adf = Adf::interpolate_stage(base_member.as_ref(), 64)?;
            let sub = window_progression(w, m, r);
            if !sub.is_empty() {
                let lhs = upper_discrepancy(&sub, sub.len(), &base_adf)?.hi;
                let mut rhs_max = Rat::zero();
                for i in 0..d {
                    let fam_member = family.member(m * d, m * i + r)?;
                    let fam_adf = Adf::interpolate_stage(fam_member.as_ref(), 64)?;
                    let subsub = window_progression(w, m * d, m * i + r);
                    if subsub.is_empty() {
                        continue;
                    }
                    let v = upper_discrepancy(&subsub, subsub.len(), &fam_adf)?.hi;
                    if v > rhs_max {
                        rhs_max = v;
                    }
                }
                let slack = rat_int((m * (d + 1)) as i64) / rat_int((n as u64 - m * d) as i64);
                refine.checks += 1;
                if lhs > rhs_max + slack {
                    refine.violations += 1;
                }
            }
        }

        // a higher target never has larger upper discrepancy
        let (f_hi, f_lo) = ordered_pair;
        let up_hi = upper_discrepancy(w, n, f_hi)?.hi;
        let up_lo = upper_discrepancy(w, n, f_lo)?.hi;
        ordered.checks += 1;
        if up_hi > up_lo {
            ordered.violations += 1;
        }

        // sorted windows: bound through the values themselves
        let mut sorted_vals: Vec<Rat> = w.vals.iter().map(|v| v.lo.clone()).collect();
        sorted_vals.sort();
        let sorted_w = SequenceWindow::from_exact(sorted_vals.clone())?;
        let up_sorted = upper_discrepancy(&sorted_w, n, f)?.hi;
        let n_rat = rat_int(n as i64);
        let mut bound = Rat::zero();
        for (i, z) in sorted_vals.iter().enumerate() {
            let fz = f.eval(z, Side::Point)?;
            let a = (&fz - rat_int(i as i64) / &n_rat).abs();
            let b = (&fz - rat_int(i as i64 + 1) / &n_rat).abs();
            let m = a.max(b);
            if m > bound {
                bound = m;
            }
        }
        sorted_bound.checks += 1;
        if up_sorted > bound {
            sorted_bound.violations += 1;
        }
    }
    Ok(DiscrepancySuite { items: vec![one_sided, concat, refine, ordered, sorted_bound] })
}

/// The positions i = r, r+m, r+2m, ... of a window (0-based).
fn window_progression(w: &SequenceWindow, m: u64, r: u64) -> SequenceWindow {
    let vals: Vec<Enclosure> = w
        .vals
        .iter()
        .enumerate()
        .filter(|(i, _)| *i as u64 % m == r % m)
        .map(|(_, v)| v.clone())
        .collect();
    SequenceWindow { vals }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic_seq::BasicSequence;
    use crate::expansion::digits_of;
    use crate::numeric::rat;

    fn exact_window(vals: &[(i64, i64)]) -> SequenceWindow {
        SequenceWindow::from_exact(vals.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn count_examples() {
        let w = exact_window(&[(1, 10), (2, 10), (3, 10)]);
        let i = RealInterval::half_open(Rat::zero(), rat(1, 4));
        let c = count_in(&i, &w, 3).unwrap();
        assert_eq!(c, CountRange { min: 2, max: 2 });
        let all = RealInterval::half_open(Rat::zero(), Rat::one());
        assert_eq!(count_in(&all, &w, 3).unwrap(), CountRange { min: 3, max: 3 });
        let point = RealInterval::closed(rat(1, 2), rat(1, 2));
        assert_eq!(count_in(&point, &w, 3).unwrap(), CountRange { min: 0, max: 0 });
    }

    #[test]
    fn ambiguous_counts() {
        let w = SequenceWindow::from_enclosures(vec![
            Enclosure::new(rat(24, 100), rat(26, 100)).unwrap(),
            Enclosure::exact(rat(1, 10)),
        ])
        .unwrap();
        let i = RealInterval::half_open(Rat::zero(), rat(1, 4));
        assert_eq!(count_in(&i, &w, 2).unwrap(), CountRange { min: 1, max: 2 });
    }

    #[test]
    fn empirical_step() {
        let w = exact_window(&[(1, 2)]);
        let f = empirical_adf(&w, 1).unwrap();
        assert_eq!(f, Adf::step_at(&rat(1, 2)).unwrap());
        // uniform staircase
        let grid = exact_window(&[(0, 4), (1, 4), (2, 4), (3, 4)]);
        let g = empirical_adf(&grid, 4).unwrap();
        assert_eq!(g.eval(&rat(1, 2), Side::Point).unwrap(), rat(1, 2));
        assert_eq!(g.eval(&rat(1, 2), Side::Right).unwrap(), rat(3, 4));
    }

    #[test]
    fn empirical_concat_is_weighted_average() {
        let a = exact_window(&[(1, 10), (3, 10)]);
        let b = exact_window(&[(7, 10)]);
        let joint = SequenceWindow::concat(&[&a, &b]);
        let fa = empirical_adf(&a, 2).unwrap();
        let fb = empirical_adf(&b, 1).unwrap();
        let fj = empirical_adf(&joint, 3).unwrap();
        for i in 0..=10 {
            let x = rat(i, 10);
            let lhs = fj.eval(&x, Side::Point).unwrap();
            let rhs = (fa.eval(&x, Side::Point).unwrap() * rat_int(2)
                + fb.eval(&x, Side::Point).unwrap())
                / rat_int(3);
            assert_eq!(lhs, rhs, "at {x}");
        }
    }

    #[test]
    fn discrepancy_examples() {
        let id = Adf::identity();
        // single value at 0: mass 1 just right of 0
        let w = exact_window(&[(0, 1)]);
        assert_eq!(upper_discrepancy(&w, 1, &id).unwrap().hi, rat(1, 1));
        // (0, 1/2): sup approached just右 of 1/2: 1 - 1/2
        let w2 = exact_window(&[(0, 1), (1, 2)]);
        assert_eq!(upper_discrepancy(&w2, 2, &id).unwrap().hi, rat(1, 2));
        // uniform grid i/n has upper discrepancy exactly 1/n
        let grid = exact_window(&[(0, 5), (1, 5), (2, 5), (3, 5), (4, 5)]);
        assert_eq!(upper_discrepancy(&grid, 5, &id).unwrap().hi, rat(1, 5));
        // lower discrepancy of the same grid is 0 (empirical never lags)
        assert_eq!(lower_discrepancy(&grid, 5, &id).unwrap().lo, rat(0, 1));
    }

    #[test]
    fn discrepancy_zero_iff_match() {
        // empirical adf of the window matches the step target exactly
        let w = exact_window(&[(1, 2)]);
        let step = Adf::step_at(&rat(1, 2)).unwrap();
        let up = upper_discrepancy(&w, 1, &step).unwrap();
        let low = lower_discrepancy(&w, 1, &step).unwrap();
        assert!(up.hi.is_zero() && low.lo.is_zero());
        // against the identity both sides are nonzero
        let up_id = upper_discrepancy(&w, 1, &Adf::identity()).unwrap();
        assert!(up_id.hi.is_positive());
    }

    #[test]
    fn brute_force_oracle_star() {
        // classical one-sided formulas on sorted exact values vs candidates
        let vals = [rat(1, 7), rat(2, 7), rat(1, 2), rat(9, 10)];
        let w = SequenceWindow::from_exact(vals.to_vec()).unwrap();
        let star = star_discrepancy(&w, 4).unwrap();
        // D+ = max(i/n - z_i), D- = max(z_i - (i-1)/n), D* = max(D+, D-)
        let n = rat_int(4);
        let mut dp = Rat::zero();
        let mut dm = Rat::zero();
        for (i, z) in vals.iter().enumerate() {
            dp = dp.max(rat_int(i as i64 + 1) / &n - z);
            dm = dm.max(z - rat_int(i as i64) / &n);
        }
        let expect = dp.max(dm);
        assert_eq!(star.hi, expect);
        assert_eq!(star.lo, expect);
    }

    #[test]
    fn transform_bridge_for_continuous_targets() {
        // for a strictly increasing piecewise-affine f, the star discrepancy
        // of {f(x_i)} equals the two-sided f-discrepancy of {x_i}
        let f = crate::adf::adf_from_closed_set(&ClosedSetU::full()).unwrap();
        assert_eq!(f, Adf::identity());
        let ramp = crate::adf::olsen_constraint_adf(
            (Rat::zero(), rat(1, 4)),
            (rat(1, 4), rat(1, 2)),
            &rat(1, 8),
            (rat(1, 2), Rat::one()),
        )
        .unwrap();
        let vals = [rat(1, 5), rat(2, 5), rat(3, 5), rat(4, 5), rat(1, 16)];
        let w = SequenceWindow::from_exact(vals.to_vec()).unwrap();
        let lhs = two_sided_discrepancy(&w, 5, &ramp).unwrap().hi;
        let image: Vec<Rat> = vals
            .iter()
            .map(|x| ramp.eval(x, Side::Point).unwrap())
            .collect();
        let wi = SequenceWindow::from_exact(image).unwrap();
        let rhs = star_discrepancy(&wi, 5).unwrap().hi;
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn subsequence_modes() {
        let seq = BasicSequence::successor();
        let d = digits_of(&rat(5, 6), &seq, 12).unwrap();
        let x = IntPolynomial::identity();
        let ratio = subsequence(&d, &x, 1, 0, SubsequenceMode::Ratio).unwrap();
        assert_eq!(ratio.len(), 12);
        assert_eq!(ratio.values()[0].lo, rat(1, 2)); // E_1/q_1
        // square indices 1, 4, 9
        let sq = IntPolynomial::x_pow(2);
        let rsq = subsequence(&d, &sq, 1, 1, SubsequenceMode::Ratio).unwrap();
        assert_eq!(rsq.len(), 3);
        // orbit values straddle the matching digit ratio shifted by one
        let orbit = subsequence(&d, &x, 1, 0, SubsequenceMode::Orbit { tail_terms: 3 }).unwrap();
        for (k, enc) in orbit.values().iter().enumerate() {
            let lo = d.digit_ratio(k as u64 + 2).unwrap();
            let q = seq.q_rat(k as u64 + 2).unwrap();
            let hi = &lo + Rat::one() / q;
            assert!(enc.hi >= lo && enc.lo <= hi, "sandwich at orbit index {}", k + 1);
        }
    }

    #[test]
    fn accumulation_estimates() {
        // alternating atoms
        let mut vals = Vec::new();
        for _ in 0..50 {
            vals.push(rat(1, 4));
            vals.push(rat(3, 4));
        }
        let w = SequenceWindow::from_exact(vals).unwrap();
        let est = accumulation_estimate(&w, &rat(1, 20), &rat(1, 5)).unwrap();
        let target = ClosedSetU::new(vec![(rat(1, 4), rat(3, 4))]).unwrap();
        // two clusters at the atoms, each padded rightward by eps
        assert_eq!(est.components().len(), 2);
        assert!(est.hausdorff_distance(&target).unwrap() <= rat(1, 4));
        assert!(est.contains_point(&rat(1, 4)));
        assert!(est.contains_point(&rat(3, 4)));
        // a repeated full sweep covers everything
        let sweep: Vec<Rat> = (0..100).map(|i| rat(i % 10, 10)).collect();
        let ws = SequenceWindow::from_exact(sweep).unwrap();
        let est2 = accumulation_estimate(&ws, &rat(1, 8), &rat(1, 100)).unwrap();
        assert_eq!(est2.components().len(), 1);
    }

    #[test]
    fn moran_examples() {
        // n_k = q, c_k = 1/q: quotient 1 at every level
        let counts: Vec<BigUint> = vec![BigUint::from(4u32); 12];
        let ratios: Vec<Rat> = vec![rat(1, 4); 12];
        let out = moran_lower_bound(&counts, &ratios, 10).unwrap();
        for q in &out {
            assert!(q.contains(&Rat::one()));
        }
        // n_k = 2, c_k = 1/4: quotient at k = 10 is 10/21
        let counts: Vec<BigUint> = vec![BigUint::from(2u32); 12];
        let ratios: Vec<Rat> = vec![rat(1, 4); 12];
        let out = moran_lower_bound(&counts, &ratios, 10).unwrap();
        assert!(out[9].contains(&rat(10, 21)));
        // precondition violations
        assert!(moran_lower_bound(&[BigUint::from(1u32); 3], &[rat(1, 4); 3], 1).is_err());
        assert!(moran_lower_bound(&[BigUint::from(3u32); 3], &[rat(1, 2); 3], 1).is_err());
    }

    #[test]
    fn suite_on_deterministic_windows() {
        let vals: Vec<Rat> = (0..60).map(|i| rat((i * 37 + 11) % 101, 101)).collect();
        let w = SequenceWindow::from_exact(vals).unwrap();
        let fam = crate::family::LinearFamily::uniform();
        let suite = discrepancy_property_suite(
            &[w],
            &Adf::identity(),
            (&Adf::identity(), &Adf::step_at(&Rat::one()).unwrap()),
            &fam,
            (2, 1, 2),
        )
        .unwrap();
        assert!(suite.passed(), "{:?}", suite.items);
    }
}
