//! Stage construction: from a target family to per-index digit envelopes.
//!
//! Digit indices split into windows (L_{j-1}, L_j], window j holding l_j
//! blocks of j!*j indices each. Within a block the index decomposes into a
//! band (which quantile of the target the digit must realize) and a slot.
//! A window opens only after two gates pass: the radix is large enough that
//! every band holds at least two digits (the growth gate), and windows are
//! long enough that foreign polynomial values are rare inside them (the
//! pair gate). The canonical element takes every digit at the bottom of its
//! envelope.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::adf::Adf;
use crate::basic_seq::BasicSequence;
use crate::error::{CantorError, Result};
use crate::expansion::DigitPrefix;
use crate::family::LinearFamily;
use crate::numeric::{
    ceil_int, floor_int, ln2, ln_interval_biguint, ln_interval_u64, rat_from_biguint, rat_int,
    rat_to_string, Rat, RatInterval,
};
use crate::poly::SparsePolySet;

const LN_BITS: u32 = 64;

/// Upper and lower target families for one polynomial.
#[derive(Debug, Clone)]
pub struct TargetSpec {
    pub upper: Arc<LinearFamily>,
    pub lower: Arc<LinearFamily>,
}

impl TargetSpec {
    pub fn symmetric(family: Arc<LinearFamily>) -> Self {
        TargetSpec { upper: family.clone(), lower: family }
    }

    fn pick(&self, upper: bool) -> &LinearFamily {
        if upper {
            &self.upper
        } else {
            &self.lower
        }
    }

    /// Checks upper >= lower pointwise at a rational sample grid.
    pub fn validate_ordered(&self, samples: &[Rat]) -> Result<()> {
        let up = self.upper.member(1, 0)?;
        let lo = self.lower.member(1, 0)?;
        for x in samples {
            if up.value(x)? < lo.value(x)? {
                return Err(CantorError::Domain(format!(
                    "upper target below lower target at x = {x}"
                )));
            }
        }
        Ok(())
    }
}

/// Which residue indexes the family member governing a digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueMode {
    /// r = n mod (stage factorial); the default
    IndexMod,
    /// r = slot coordinate mod (stage factorial)
    SlotCoordinate,
}

/// Inputs of a schedule.
#[derive(Debug, Clone)]
pub struct ScheduleParams {
    pub seq: BasicSequence,
    pub polys: Arc<SparsePolySet>,
    pub targets: Vec<TargetSpec>,
    pub residue_mode: ResidueMode,
}

impl ScheduleParams {
    pub fn single_poly(
        seq: BasicSequence,
        upper: Arc<LinearFamily>,
        lower: Arc<LinearFamily>,
    ) -> Self {
        ScheduleParams {
            seq,
            polys: Arc::new(SparsePolySet::identity_only()),
            targets: vec![TargetSpec { upper, lower }],
            residue_mode: ResidueMode::IndexMod,
        }
    }
}

/// Per-window constants.
#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: u64,
    /// exact minimum quantile-band width of the stage interpolants
    #[serde(serialize_with = "ser_rat")]
    pub min_band_width: Rat,
    /// first index from which both gate conditions hold for this stage
    pub gate_index: u64,
    pub gate_growth: u64,
    pub gate_pairs: u64,
    /// anchored-window gate from pair certificates
    pub window_gate: u64,
    /// number of blocks in the window
    pub block_count: u64,
    /// last digit index of the window
    pub end: u64,
}

fn ser_rat<S: serde::Serializer>(r: &Rat, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&rat_to_string(r))
}

/// A digit index resolved to its governing polynomial and window position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexDecomposition {
    pub n: u64,
    /// 0-based index into the polynomial set
    pub poly: usize,
    pub stage: u64,
    pub block: u64,
    /// quantile band, 0 <= band < stage
    pub band: u64,
    /// slot within the band, 1 <= slot <= stage!
    pub slot: u64,
}

/// Exact digit envelope at one index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitEnvelope {
    pub n: u64,
    pub lo: BigUint,
    pub hi: BigUint,
}

impl DigitEnvelope {
    /// Number of admissible digits.
    pub fn count(&self) -> BigUint {
        &self.hi - &self.lo + BigUint::one()
    }
}

fn factorial(k: u64) -> Result<u64> {
    let mut acc = 1u64;
    for i in 2..=k {
        acc = acc
            .checked_mul(i)
            .ok_or_else(|| CantorError::Resource(format!("{k}! overflows u64")))?;
    }
    Ok(acc)
}

/// The schedule: stage table plus caches for interpolants and band bottoms.
pub struct Schedule {
    params: ScheduleParams,
    stages: Vec<StageRecord>,
    /// gate components by stage (kept one past the built windows)
    gates: BTreeMap<u64, (u64, u64, u64)>,
    deltas: BTreeMap<u64, Rat>,
    g_cache: Mutex<BTreeMap<(u64, usize, u64), Arc<Adf>>>,
    band_cache: Mutex<BTreeMap<(u64, usize, u64, u64), Arc<Rat>>>,
}

impl std::fmt::Debug for Schedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Schedule").field("stages", &self.stages).finish()
    }
}

struct Builder<'a> {
    params: &'a ScheduleParams,
    deltas: BTreeMap<u64, Rat>,
    nus: BTreeMap<u64, (u64, u64, u64)>,
    g_cache: BTreeMap<(u64, usize, u64), Arc<Adf>>,
}

impl<'a> Builder<'a> {
    fn new(params: &'a ScheduleParams) -> Self {
        Builder { params, deltas: BTreeMap::new(), nus: BTreeMap::new(), g_cache: BTreeMap::new() }
    }

    fn poly_count_at(&self, stage: u64) -> usize {
        (self.params.polys.len() as u64).min(stage) as usize
    }

    fn interpolant(
        &mut self,
        stage: u64,
        poly: usize,
        residue: u64,
        upper: bool,
    ) -> Result<Arc<Adf>> {
        let fam = self.params.targets[poly].pick(upper);
        let (m, r) = if fam.residue_invariant() { (1, 0) } else { (factorial(stage)?, residue) };
        let key = (stage, poly, 2 * r + upper as u64);
        if let Some(g) = self.g_cache.get(&key) {
            return Ok(g.clone());
        }
        let member = fam.member(m, r)?;
        let g = Arc::new(Adf::interpolate_stage(member.as_ref(), stage)?);
        self.g_cache.insert(key, g.clone());
        Ok(g)
    }

    /// Minimum quantile-band width over every stage interpolant.
    fn delta(&mut self, stage: u64) -> Result<Rat> {
        if let Some(d) = self.deltas.get(&stage) {
            return Ok(d.clone());
        }
        let mut best: Option<Rat> = None;
        let stage_i = rat_int(stage as i64);
        for poly in 0..self.poly_count_at(stage) {
            for upper in [true, false] {
                let fam = self.params.targets[poly].pick(upper);
                let residues = if fam.residue_invariant() { 1 } else { factorial(stage)? };
                for r in 0..residues {
                    let g = self.interpolant(stage, poly, r, upper)?;
                    let mut prev = g.inf_preimage(&Rat::zero())?;
                    for band in 1..=stage {
                        let level = rat_int(band as i64) / &stage_i;
                        let cur = g.inf_preimage(&level)?;
                        let len = &cur - &prev;
                        if !len.is_positive() {
                            return Err(CantorError::Internal(format!(
                                "zero band width at stage {stage}, band {}",
                                band - 1
                            )));
                        }
                        if best.as_ref().map(|b| len < *b).unwrap_or(true) {
                            best = Some(len.clone());
                        }
                        prev = cur;
                    }
                }
            }
        }
        let d = best.ok_or_else(|| CantorError::Internal("no bands inspected".into()))?;
        self.deltas.insert(stage, d.clone());
        Ok(d)
    }

    /// Smallest integer t with ln(t) at or above the squared gate threshold.
    fn growth_target(theta_sq_hi: &Rat) -> Result<u64> {
        if theta_sq_hi <= &Rat::zero() {
            return Ok(1);
        }
        let ok = |t: u64| -> Result<bool> { Ok(ln_interval_u64(t, LN_BITS)?.lo >= *theta_sq_hi) };
        let mut hi = 2u64;
        while !ok(hi)? {
            hi = hi
                .checked_mul(2)
                .ok_or_else(|| CantorError::Resource("gate threshold exceeds u64".into()))?;
        }
        let mut lo = 1u64;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// Smallest k with ln(q_1 ... q_{k-1}) at or above the threshold; prefix
    /// sums are non-decreasing, so the first hit certifies every later k.
    fn prefix_target(&self, theta_sq_hi: &Rat) -> Result<u64> {
        if theta_sq_hi <= &Rat::zero() {
            return Ok(1);
        }
        let seq = &self.params.seq;
        let ok = |k: u64| -> Result<bool> { Ok(seq.ln_q_prefix(k - 1, LN_BITS)?.lo >= *theta_sq_hi) };
        let mut hi = 2u64;
        while !ok(hi)? {
            hi = hi
                .checked_mul(2)
                .ok_or_else(|| CantorError::Resource("prefix gate exceeds u64".into()))?;
            if hi > (1 << 34) {
                return Err(CantorError::Resource("prefix gate search too deep".into()));
            }
        }
        let mut lo = 1u64;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if ok(mid)? {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(lo)
    }

    /// The gate index of a stage along with its two components.
    fn nu(&mut self, stage: u64) -> Result<(u64, u64, u64)> {
        if let Some(v) = self.nus.get(&stage) {
            return Ok(*v);
        }
        let delta = self.delta(stage)?;
        // threshold: min{sqrt(ln q_k), sqrt(ln q_1..q_{k-1})} >= ln 4 - ln delta
        let ln4 = ln2(LN_BITS).scale(&rat_int(2));
        let ln_delta = crate::numeric::ln_interval(&delta, LN_BITS)?;
        let theta = ln4.sub(&ln_delta);
        let theta_sq_hi =
            if theta.hi.is_negative() { Rat::zero() } else { &theta.hi * &theta.hi };
        let t0 = Self::growth_target(&theta_sq_hi)?;
        let k1 = self.params.seq.growth_index(t0)?;
        let k2 = self.prefix_target(&theta_sq_hi)?;
        let growth_gate = k1.max(k2);

        // pair gate: certified window bound at density threshold (stage!)^2 stage^3
        let pair_count = self.poly_count_at(stage);
        let pair_gate = if pair_count < 2 {
            0
        } else {
            let fact = factorial(stage)?;
            let m = fact
                .checked_mul(fact)
                .and_then(|f2| f2.checked_mul(stage.checked_pow(3)?))
                .ok_or_else(|| CantorError::Resource("pair gate threshold overflow".into()))?;
            let bound = self.params.polys.max_window_bound(pair_count, m)?;
            let bound: u64 = (&bound)
                .try_into()
                .map_err(|_| CantorError::Resource("pair gate exceeds u64".into()))?;
            bound + 1
        };
        let v = (growth_gate.max(pair_gate), growth_gate, pair_gate);
        self.nus.insert(stage, v);
        Ok(v)
    }

    /// Anchored-window gate: block offsets beyond it keep every pairwise
    /// density below the next stage's threshold for all admissible window
    /// lengths.
    fn window_gate(&mut self, stage: u64) -> Result<u64> {
        let pair_count = self.poly_count_at(stage);
        if pair_count < 2 || stage < 2 {
            return Ok(0);
        }
        let next = stage + 1;
        let fact_next = factorial(next)?;
        let m = fact_next
            .checked_mul(fact_next)
            .and_then(|f2| f2.checked_mul(next.checked_pow(3)?))
            .ok_or_else(|| CantorError::Resource("window gate threshold overflow".into()))?;
        let bound = self.params.polys.max_window_bound(pair_count, m)?;
        let anchor = factorial(stage - 1)?;
        let t = bound / BigUint::from(anchor) + BigUint::one();
        (&t).try_into().map_err(|_| CantorError::Resource("window gate exceeds u64".into()))
    }
}

impl Schedule {
    /// Builds the stage table until it covers digit indices up to
    /// `max_index`.
    pub fn new(params: ScheduleParams, max_index: u64) -> Result<Self> {
        if params.targets.len() == 1 && params.polys.len() > 1 {
            let mut params = params;
            let t = params.targets[0].clone();
            params.targets = vec![t; params.polys.len()];
            return Schedule::new(params, max_index);
        }
        if params.targets.len() != params.polys.len() {
            return Err(CantorError::Domain(format!(
                "{} target specs for {} polynomials",
                params.targets.len(),
                params.polys.len()
            )));
        }
        if !params.seq.infinite_in_limit() {
            return Err(CantorError::Unsupported(
                "scheduling needs a sequence that is infinite in limit".into(),
            ));
        }
        let sample_grid: Vec<Rat> = (0..=32).map(|i| rat_int(i) / rat_int(32)).collect();
        for t in &params.targets {
            t.validate_ordered(&sample_grid)?;
        }

        let (stages, gates, deltas, g_cache) = Self::build_stages(&params, max_index)?;
        Ok(Schedule {
            params,
            stages,
            gates,
            deltas,
            g_cache: Mutex::new(g_cache),
            band_cache: Mutex::new(BTreeMap::new()),
        })
    }

    #[allow(clippy::type_complexity)]
    fn build_stages(
        params: &ScheduleParams,
        max_index: u64,
    ) -> Result<(
        Vec<StageRecord>,
        BTreeMap<u64, (u64, u64, u64)>,
        BTreeMap<u64, Rat>,
        BTreeMap<(u64, usize, u64), Arc<Adf>>,
    )> {
        let mut builder = Builder::new(params);
        let mut stages: Vec<StageRecord> = Vec::new();
        let mut end_prev = 0u64;
        for stage in 1..=64u64 {
            let (nu_j, nu1_j, nu2_j) = builder.nu(stage)?;
            let (nu_next, _, _) = builder.nu(stage + 1)?;
            let psi = builder.window_gate(stage)?;
            let fact = factorial(stage)?;
            let block_len = fact
                .checked_mul(stage)
                .ok_or_else(|| CantorError::Resource("block length overflow".into()))?;
            let gate_term = if nu_next <= end_prev + 1 {
                1
            } else {
                (nu_next - 1 - end_prev).div_ceil(block_len).max(1)
            };
            let block_count = gate_term.max(psi).max(stage * stage);
            let end = end_prev
                .checked_add(block_len.checked_mul(block_count).ok_or_else(|| {
                    CantorError::Resource("window length overflow".into())
                })?)
                .ok_or_else(|| CantorError::Resource("window end overflow".into()))?;
            stages.push(StageRecord {
                stage,
                min_band_width: builder.delta(stage)?,
                gate_index: nu_j,
                gate_growth: nu1_j,
                gate_pairs: nu2_j,
                window_gate: psi,
                block_count,
                end,
            });
            end_prev = end;
            if end >= max_index {
                break;
            }
        }
        if end_prev < max_index {
            return Err(CantorError::Resource(format!(
                "stage table exhausted at index {end_prev} < {max_index}"
            )));
        }
        Ok((stages, builder.nus, builder.deltas, builder.g_cache))
    }

    /// Diagnostic constructor with prescribed block counts; gate conditions
    /// are not enforced.
    pub fn with_prescribed_blocks(params: ScheduleParams, blocks: &[u64]) -> Result<Self> {
        let (stages, gates, deltas, g_cache) = {
            let mut builder = Builder::new(&params);
            let mut stages = Vec::new();
            let mut end_prev = 0u64;
            for (i, &block_count) in blocks.iter().enumerate() {
                let stage = i as u64 + 1;
                let block_len = factorial(stage)? * stage;
                let end = end_prev + block_len * block_count;
                stages.push(StageRecord {
                    stage,
                    min_band_width: builder.delta(stage)?,
                    gate_index: 0,
                    gate_growth: 0,
                    gate_pairs: 0,
                    window_gate: 0,
                    block_count,
                    end,
                });
                end_prev = end;
            }
            (stages, builder.nus, builder.deltas, builder.g_cache)
        };
        Ok(Schedule {
            params,
            stages,
            gates,
            deltas,
            g_cache: Mutex::new(g_cache),
            band_cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn params(&self) -> &ScheduleParams {
        &self.params
    }

    pub fn stages(&self) -> &[StageRecord] {
        &self.stages
    }

    pub fn stage_record(&self, stage: u64) -> Result<&StageRecord> {
        if stage == 0 {
            return Err(CantorError::Domain("stages start at 1".into()));
        }
        self.stages
            .get((stage - 1) as usize)
            .ok_or_else(|| CantorError::Range(format!("stage {stage} beyond the built table")))
    }

    /// Gate components (gate, growth, pairs) for a stage; present for every
    /// built stage and one beyond.
    pub fn gate_components(&self, stage: u64) -> Option<(u64, u64, u64)> {
        self.gates.get(&stage).copied()
    }

    pub fn band_width(&self, stage: u64) -> Result<&Rat> {
        self.deltas
            .get(&stage)
            .ok_or_else(|| CantorError::Range(format!("no band width for stage {stage}")))
    }

    /// Last covered digit index.
    pub fn max_index(&self) -> u64 {
        self.stages.last().map(|s| s.end).unwrap_or(0)
    }

    fn window_start(&self, stage: u64) -> u64 {
        if stage <= 1 {
            0
        } else {
            self.stages[(stage - 2) as usize].end
        }
    }

    /// The window index whose inner range (L_{i-1}, L_i] contains `inner`.
    pub fn window_of(&self, inner: u64) -> Result<u64> {
        if inner == 0 {
            return Err(CantorError::Domain("indices start at 1".into()));
        }
        if inner > self.max_index() {
            return Err(CantorError::Range(format!(
                "index {inner} beyond the built stage table"
            )));
        }
        let pos = self.stages.partition_point(|s| s.end < inner);
        Ok(self.stages[pos].stage)
    }

    /// Growth exponent enclosure for a stage index k >= 2.
    pub fn growth_exponent(&self, k: u64) -> Result<RatInterval> {
        if k < 2 {
            return Err(CantorError::Domain(
                "the growth exponent needs a nonempty radix prefix".into(),
            ));
        }
        let seq = &self.params.seq;
        let ln_qk = seq.ln_q(k, LN_BITS)?;
        let ln_prefix = seq.ln_q_prefix(k - 1, LN_BITS)?;
        let s1 = crate::numeric::sqrt_interval(&ln_qk, LN_BITS)?;
        let s2 = crate::numeric::sqrt_interval(&ln_prefix, LN_BITS)?;
        let min = RatInterval::new(s1.lo.clone().min(s2.lo.clone()), s1.hi.min(s2.hi));
        min.div(&ln_qk)
    }

    /// Full decomposition of a digit index: governing polynomial, window and
    /// coordinates. The governing polynomial is the last set member whose
    /// preimage window rank admits it.
    pub fn decompose(&self, n: u64) -> Result<IndexDecomposition> {
        if n == 0 {
            return Err(CantorError::Domain("digit indices start at 1".into()));
        }
        let polys = self.params.polys.polys();
        let n_big = BigInt::from(n);
        for j in (0..polys.len()).rev() {
            let inner = if polys[j].is_identity() {
                Some(n)
            } else {
                polys[j].integer_preimage(&n_big)?
            };
            let Some(inner) = inner else { continue };
            let stage = match self.window_of(inner) {
                Ok(s) => s,
                Err(e) => {
                    if j == 0 {
                        return Err(e);
                    }
                    continue;
                }
            };
            if (j as u64 + 1) <= stage {
                let fact = factorial(stage)?;
                let off = inner - self.window_start(stage) - 1;
                return Ok(IndexDecomposition {
                    n,
                    poly: j,
                    stage,
                    block: off / (fact * stage),
                    band: (off / fact) % stage,
                    slot: off % fact + 1,
                });
            }
        }
        Err(CantorError::Internal(format!("index {n} admitted by no polynomial")))
    }

    /// The encoding map: index of the digit governed by polynomial `poly`
    /// at the given window coordinates.
    pub fn encode_index(
        &self,
        poly: usize,
        stage: u64,
        block: u64,
        band: u64,
        slot: u64,
    ) -> Result<u64> {
        let rec = self.stage_record(stage)?;
        let fact = factorial(stage)?;
        if block >= rec.block_count || band >= stage || slot < 1 || slot > fact {
            return Err(CantorError::Domain(format!(
                "coordinates ({block}, {band}, {slot}) outside window {stage}"
            )));
        }
        let inner = self.window_start(stage) + block * fact * stage + band * fact + slot;
        let p = &self.params.polys.polys()[poly];
        let v = p.eval_u64(inner);
        (&v).try_into()
            .map_err(|_| CantorError::Resource("encoded index overflows u64".into()))
    }

    /// Inverse of the encoding map for one polynomial.
    pub fn decode_index(&self, poly: usize, n: u64) -> Result<(u64, u64, u64, u64)> {
        let p = &self.params.polys.polys()[poly];
        let inner = p
            .integer_preimage(&BigInt::from(n))?
            .ok_or_else(|| CantorError::Domain(format!("{n} is not a value of the polynomial")))?;
        let stage = self.window_of(inner)?;
        let fact = factorial(stage)?;
        let off = inner - self.window_start(stage) - 1;
        Ok((stage, off / (fact * stage), (off / fact) % stage, off % fact + 1))
    }

    fn residue_for(&self, dec: &IndexDecomposition, fact: u64) -> u64 {
        match self.params.residue_mode {
            ResidueMode::IndexMod => dec.n % fact,
            ResidueMode::SlotCoordinate => dec.slot % fact,
        }
    }

    /// The stage interpolant governing a decomposed index.
    pub fn interpolant_for(&self, dec: &IndexDecomposition) -> Result<Arc<Adf>> {
        let upper = dec.stage % 2 == 0;
        let fam = self.params.targets[dec.poly].pick(upper);
        let (key_r, m, r) = if fam.residue_invariant() {
            (0, 1, 0)
        } else {
            let fact = factorial(dec.stage)?;
            let r = self.residue_for(dec, fact);
            (r, fact, r)
        };
        let key = (dec.stage, dec.poly, 2 * key_r + upper as u64);
        {
            let cache = self.g_cache.lock().expect("interpolant cache");
            if let Some(g) = cache.get(&key) {
                return Ok(g.clone());
            }
        }
        let member = fam.member(m, r)?;
        let g = Arc::new(Adf::interpolate_stage(member.as_ref(), dec.stage)?);
        self.g_cache.lock().expect("interpolant cache").insert(key, g.clone());
        Ok(g)
    }

    /// Bottom of the band preimage: the digit ratio at this index lies in
    /// [band_bottom, band_bottom + 1/q_n).
    pub fn band_bottom(&self, dec: &IndexDecomposition) -> Result<Arc<Rat>> {
        if dec.stage <= 1 {
            return Ok(Arc::new(Rat::zero()));
        }
        let upper = dec.stage % 2 == 0;
        let fam = self.params.targets[dec.poly].pick(upper);
        let key_r = if fam.residue_invariant() {
            0
        } else {
            self.residue_for(dec, factorial(dec.stage)?)
        };
        let key = (dec.stage, dec.poly, key_r, dec.band);
        {
            let cache = self.band_cache.lock().expect("band cache");
            if let Some(v) = cache.get(&key) {
                return Ok(v.clone());
            }
        }
        let g = self.interpolant_for(dec)?;
        let level = rat_int(dec.band as i64) / rat_int(dec.stage as i64);
        let v = Arc::new(g.inf_preimage(&level)?);
        self.band_cache.lock().expect("band cache").insert(key, v.clone());
        Ok(v)
    }

    /// The exact digit envelope at index n. Unconstrained indices (window 1)
    /// admit every digit.
    pub fn envelope(&self, n: u64) -> Result<DigitEnvelope> {
        let dec = self.decompose(n)?;
        self.envelope_of(&dec)
    }

    pub fn envelope_of(&self, dec: &IndexDecomposition) -> Result<DigitEnvelope> {
        let q = self.params.seq.q(dec.n)?;
        if dec.stage <= 1 {
            return Ok(DigitEnvelope { n: dec.n, lo: BigUint::zero(), hi: q - BigUint::one() });
        }
        let bottom = self.band_bottom(dec)?;
        let delta = self.band_width(dec.stage)?;
        let q_rat = rat_from_biguint(&q);
        let scaled_lo = &q_rat * bottom.as_ref();
        let lo_int = ceil_int(&scaled_lo);
        let hi_int = floor_int(&(&scaled_lo + &q_rat * delta - rat_int(1)));
        if lo_int.is_negative() || hi_int < lo_int {
            return Err(CantorError::ScheduleViolation(format!(
                "empty envelope at index {} (window {})",
                dec.n, dec.stage
            )));
        }
        let lo = lo_int.magnitude().clone();
        let hi = hi_int.magnitude().clone();
        if hi >= q {
            return Err(CantorError::ScheduleViolation(format!(
                "envelope exceeds the radix at index {}",
                dec.n
            )));
        }
        Ok(DigitEnvelope { n: dec.n, lo, hi })
    }

    /// Checks the envelope-count bound: count > 4 q_n^(1 - e) - 2 with e the
    /// stage growth exponent, rounded against the claim.
    pub fn envelope_count_bound_holds(
        &self,
        dec: &IndexDecomposition,
        count: &BigUint,
    ) -> Result<bool> {
        if dec.stage < 2 {
            return Err(CantorError::Domain("bound applies to constrained digits".into()));
        }
        let eps = self.growth_exponent(dec.stage)?;
        let ln_q = self.params.seq.ln_q(dec.n, LN_BITS)?;
        let ln4 = ln2(LN_BITS).scale(&rat_int(2));
        // rhs = ln 4 + (1 - eps) ln q, maximized over the enclosures
        let one_minus_eps_hi = Rat::one() - &eps.lo;
        let rhs_hi = &ln4.hi + one_minus_eps_hi * &ln_q.hi;
        let lhs = ln_interval_biguint(&(count + BigUint::from(2u32)), LN_BITS)?;
        Ok(lhs.lo > rhs_hi)
    }

    /// The canonical digit at index n: the bottom of its envelope.
    pub fn canonical_digit(&self, n: u64) -> Result<BigUint> {
        let dec = self.decompose(n)?;
        if dec.stage <= 1 {
            return Ok(BigUint::zero());
        }
        let bottom = self.band_bottom(&dec)?;
        let q = self.params.seq.q(n)?;
        let scaled = rat_from_biguint(&q) * bottom.as_ref();
        Ok(ceil_int(&scaled).magnitude().clone())
    }

    /// Emits the canonical digit prefix E_1..E_N.
    pub fn emit_digits(&self, n: u64) -> Result<DigitPrefix> {
        let mut digits = Vec::with_capacity(n as usize);
        for i in 1..=n {
            digits.push(self.canonical_digit(i)?);
        }
        DigitPrefix::new(self.params.seq.clone(), digits)
    }

    /// True when every digit of the prefix lies inside its envelope;
    /// otherwise reports the first violating index.
    pub fn membership_check(&self, prefix: &DigitPrefix) -> Result<(bool, Option<u64>)> {
        for n in 1..=prefix.len() {
            let env = self.envelope(n)?;
            let e = prefix.digit(n)?;
            if *e < env.lo || *e > env.hi {
                return Ok((false, Some(n)));
            }
        }
        Ok((true, None))
    }

    /// Streaming iterator over canonical digit-ratio enclosures.
    pub fn ratio_stream(&self, from: u64, to: u64) -> RatioStream<'_> {
        RatioStream { schedule: self, next: from.max(1), end: to }
    }
}

/// One emitted index in ratio form: the canonical digit ratio E_n/q_n lies
/// in [bottom, bottom + width].
#[derive(Debug, Clone)]
pub struct RatioRecord {
    pub n: u64,
    pub stage: u64,
    pub band: u64,
    pub bottom: Arc<Rat>,
    /// conservative enclosure width: 1/q_n, capped at 2^-63 for huge radixes
    pub width: Rat,
}

pub struct RatioStream<'a> {
    schedule: &'a Schedule,
    next: u64,
    end: u64,
}

impl<'a> Iterator for RatioStream<'a> {
    type Item = Result<RatioRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next > self.end {
            return None;
        }
        let n = self.next;
        self.next += 1;
        Some(self.record(n))
    }
}

impl<'a> RatioStream<'a> {
    fn record(&self, n: u64) -> Result<RatioRecord> {
        let dec = self.schedule.decompose(n)?;
        let bottom = self.schedule.band_bottom(&dec)?;
        let width = match self.schedule.params.seq.q_u64(n)? {
            Some(q) => Rat::new(BigInt::one(), BigInt::from(q)),
            None => Rat::new(BigInt::one(), BigInt::one() << 63),
        };
        Ok(RatioRecord { n, stage: dec.stage, band: dec.band, bottom, width })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn uniform_pow2(max_index: u64) -> Schedule {
        let fam = Arc::new(LinearFamily::uniform());
        let params =
            ScheduleParams::single_poly(BasicSequence::power_of_two(), fam.clone(), fam);
        Schedule::new(params, max_index).unwrap()
    }

    #[test]
    fn uniform_band_widths() {
        let s = uniform_pow2(200);
        // identity targets: stage k has k equal bands
        assert_eq!(s.band_width(1).unwrap(), &rat(1, 1));
        assert_eq!(s.band_width(2).unwrap(), &rat(1, 2));
        assert_eq!(s.band_width(3).unwrap(), &rat(1, 3));
    }

    #[test]
    fn stage_one_gate_example() {
        // uniform targets over q_n = 2^n: the growth gate of stage 1 is 3
        let s = uniform_pow2(30);
        let (_, growth, pairs) = s.gate_components(1).unwrap();
        assert_eq!(growth, 3);
        assert_eq!(pairs, 0);
    }

    #[test]
    fn uniform_pow2_stage_table() {
        let s = uniform_pow2(100_000);
        let ends: Vec<u64> = s.stages().iter().map(|r| r.end).collect();
        // window 1 ends at gate(2) - 1 = 6; block counts then clamp at j^2
        assert_eq!(&ends[..6], &[6, 22, 184, 1720, 16720, 172240]);
        let blocks: Vec<u64> = s.stages().iter().map(|r| r.block_count).collect();
        assert_eq!(&blocks[..6], &[6, 4, 9, 16, 25, 36]);
        let (nu2, _, _) = s.gate_components(2).unwrap();
        assert_eq!(nu2, 7);
    }

    #[test]
    fn decompose_and_encode_round_trip() {
        let s = uniform_pow2(3000);
        for n in [1u64, 6, 7, 8, 22, 23, 184, 185, 1720, 2999] {
            let d = s.decompose(n).unwrap();
            let back = s.encode_index(d.poly, d.stage, d.block, d.band, d.slot).unwrap();
            assert_eq!(back, n);
        }
        // window boundaries: 7 is the first index of window 2
        assert_eq!(s.decompose(6).unwrap().stage, 1);
        let d7 = s.decompose(7).unwrap();
        assert_eq!((d7.stage, d7.block, d7.band, d7.slot), (2, 0, 0, 1));
        let d22 = s.decompose(22).unwrap();
        assert_eq!((d22.stage, d22.block, d22.band, d22.slot), (2, 3, 1, 2));
    }

    #[test]
    fn prescribed_blocks_match_hand_example() {
        // two blocks in window 1: the encoding sends (0,0,1) -> 1, (1,0,1) -> 2,
        // and index 4 decodes to window-2 coordinates (0, 0, 2)
        let fam = Arc::new(LinearFamily::uniform());
        let params =
            ScheduleParams::single_poly(BasicSequence::power_of_two(), fam.clone(), fam);
        let s = Schedule::with_prescribed_blocks(params, &[2, 4, 9]).unwrap();
        assert_eq!(s.encode_index(0, 1, 0, 0, 1).unwrap(), 1);
        assert_eq!(s.encode_index(0, 1, 1, 0, 1).unwrap(), 2);
        assert_eq!(s.decode_index(0, 4).unwrap(), (2, 0, 0, 2));
        // the encoding sweeps each window exactly once
        let mut seen = std::collections::BTreeSet::new();
        let rec = s.stage_record(2).unwrap();
        for b in 0..rec.block_count {
            for c in 0..2 {
                for d in 1..=2 {
                    seen.insert(s.encode_index(0, 2, b, c, d).unwrap());
                }
            }
        }
        let expect: std::collections::BTreeSet<u64> = (3..=18).collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn envelopes_on_uniform_pow2() {
        let s = uniform_pow2(200);
        // stage-1 digits are unconstrained
        let e1 = s.envelope(3).unwrap();
        assert_eq!(e1.lo, BigUint::zero());
        assert_eq!(e1.hi, BigUint::from(7u32)); // q_3 - 1
        // first constrained digit: n = 7, band 0, q = 128, width 1/2
        let e7 = s.envelope(7).unwrap();
        assert_eq!(e7.lo, BigUint::zero());
        assert_eq!(e7.hi, BigUint::from(63u32));
        // n = 9 sits in band 1: bottom half step
        let d9 = s.decompose(9).unwrap();
        assert_eq!(d9.band, 1);
        let e9 = s.envelope(9).unwrap();
        assert_eq!(e9.lo, BigUint::from(256u32)); // ceil(512 * 1/2)
        assert_eq!(e9.hi, BigUint::from(511u32));
        assert_eq!(e9.count(), BigUint::from(256u32));
    }

    #[test]
    fn envelope_count_bound() {
        let s = uniform_pow2(200);
        for n in 7..=60u64 {
            let dec = s.decompose(n).unwrap();
            if dec.stage < 2 {
                continue;
            }
            let env = s.envelope_of(&dec).unwrap();
            assert!(env.count() >= BigUint::from(2u32), "count at {n}");
            assert!(
                s.envelope_count_bound_holds(&dec, &env.count()).unwrap(),
                "growth bound at {n}"
            );
        }
    }

    #[test]
    fn canonical_digits_and_membership() {
        let s = uniform_pow2(64);
        let prefix = s.emit_digits(40).unwrap();
        let (ok, violation) = s.membership_check(&prefix).unwrap();
        assert!(ok, "violation at {violation:?}");
        // tampering breaks membership at the reported index
        let mut bad = prefix.clone();
        let env = s.envelope(9).unwrap();
        bad.digits[8] = env.hi + BigUint::one();
        let (ok, violation) = s.membership_check(&bad).unwrap();
        assert!(!ok);
        assert_eq!(violation, Some(9));
        // an arbitrary rational's digits generally violate the envelopes
        let third =
            crate::expansion::digits_of(&rat(1, 3), &BasicSequence::power_of_two(), 40).unwrap();
        let (ok, _) = s.membership_check(&third).unwrap();
        assert!(!ok);
    }

    #[test]
    fn ratio_stream_matches_digits() {
        let s = uniform_pow2(64);
        let prefix = s.emit_digits(50).unwrap();
        for rec in s.ratio_stream(1, 50) {
            let rec = rec.unwrap();
            let ratio = prefix.digit_ratio(rec.n).unwrap();
            assert!(*rec.bottom <= ratio);
            assert!(ratio < rec.bottom.as_ref() + &rec.width);
        }
    }

    #[test]
    fn growth_exponent_examples() {
        let s = uniform_pow2(64);
        // q = 2^n at k = 3: exponent = 1/sqrt(3 ln 2) = 0.693468...
        let e3 = s.growth_exponent(3).unwrap();
        assert!(e3.lo < rat(69347, 100000) && e3.hi > rat(69346, 100000));
        assert!(s.growth_exponent(1).is_err());

        // constant radix 16 at k = 2: 1/sqrt(ln 16) = 0.60056...
        let fam = Arc::new(LinearFamily::uniform());
        let params =
            ScheduleParams::single_poly(BasicSequence::constant(16).unwrap(), fam.clone(), fam);
        // constant sequences cannot satisfy the gates, so probe the raw
        // exponent through a prescribed-block schedule
        let s16 = Schedule::with_prescribed_blocks(params, &[4]).unwrap();
        let e2 = s16.growth_exponent(2).unwrap();
        assert!(e2.lo < rat(6006, 10000) && e2.hi > rat(6005, 10000));
    }

    #[test]
    fn two_poly_schedule_decomposition() {
        // {X, X^2}: squares inside their window rank go to the square
        let polys = Arc::new(
            SparsePolySet::from_polys(vec![
                crate::poly::IntPolynomial::identity(),
                crate::poly::IntPolynomial::x_pow(2),
            ])
            .unwrap(),
        );
        let fam = Arc::new(LinearFamily::uniform());
        let params = ScheduleParams {
            seq: BasicSequence::power_of_two(),
            polys,
            targets: vec![TargetSpec::symmetric(fam.clone()), TargetSpec::symmetric(fam)],
            residue_mode: ResidueMode::IndexMod,
        };
        let s = Schedule::with_prescribed_blocks(params, &[6, 4, 9, 16]).unwrap();
        // n = 100 = 10^2 with inner 10 inside window 2: governed by X^2
        let d = s.decompose(100).unwrap();
        assert_eq!(d.poly, 1);
        assert_eq!(d.stage, 2);
        // n = 4 = 2^2 with inner 2 inside window 1: rank 2 > window 1, so
        // it falls back to the identity
        let d4 = s.decompose(4).unwrap();
        assert_eq!(d4.poly, 0);
        assert_eq!(d4.stage, 1);
        // a non-square in window 2 is governed by the identity
        let d10 = s.decompose(10).unwrap();
        assert_eq!(d10.poly, 0);
        assert_eq!(d10.stage, 2);
    }

    #[test]
    fn pair_gate_uses_certificates() {
        // {X, X^2}: the stage-2 pair gate comes from the identity-route
        // bound at threshold (2!)^2 * 2^3 = 32: N(32) = 8 * 32^2 = 8192
        let polys = Arc::new(
            SparsePolySet::from_polys(vec![
                crate::poly::IntPolynomial::identity(),
                crate::poly::IntPolynomial::x_pow(2),
            ])
            .unwrap(),
        );
        let fam = Arc::new(LinearFamily::uniform());
        let params = ScheduleParams {
            seq: BasicSequence::power_of_two(),
            polys,
            targets: vec![TargetSpec::symmetric(fam.clone()), TargetSpec::symmetric(fam)],
            residue_mode: ResidueMode::IndexMod,
        };
        let s = Schedule::with_prescribed_blocks(params, &[2]).unwrap();
        // probe the builder through a fresh schedule over one window (the
        // gate map retains stage 2's components)
        drop(s);
        let polys = Arc::new(
            SparsePolySet::from_polys(vec![
                crate::poly::IntPolynomial::identity(),
                crate::poly::IntPolynomial::x_pow(2),
            ])
            .unwrap(),
        );
        let fam = Arc::new(LinearFamily::uniform());
        let params = ScheduleParams {
            seq: BasicSequence::power_of_two(),
            polys,
            targets: vec![TargetSpec::symmetric(fam.clone()), TargetSpec::symmetric(fam)],
            residue_mode: ResidueMode::IndexMod,
        };
        let s = Schedule::new(params, 1).unwrap();
        let (_, _, pairs) = s.gate_components(2).unwrap();
        assert_eq!(pairs, 8193);
    }
}
