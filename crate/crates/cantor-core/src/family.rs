//! Indexed families of distribution functions used as targets.
//!
//! A linear family assigns an adf f_{m,r} to every index pair (m >= 1,
//! 0 <= r < m) subject to the averaging identity
//! f_{m,r} = (1/d) sum_{i<d} f_{md, mi+r}. Constant families (every member
//! the same adf) satisfy it trivially; the residue-partition family built
//! from lcm-grid cells satisfies it exactly and is the canonical example of
//! a family whose members differ.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::adf::{adf_from_closed_set, Adf, ClosedSetU, DistributionFn, PowerFn};
use crate::error::{CantorError, Result};
use crate::numeric::{rat_int, Rat};

/// Cell budget for materializing residue-partition sets as interval unions.
const MATERIALIZE_CELL_BUDGET: u64 = 1 << 21;

/// Ratio lcm(1..j)/lcm(1..j-1): p when j is a power of the prime p, else 1.
fn lcm_ratio(j: u64) -> u64 {
    if j < 2 {
        return 1;
    }
    let mut p = 0u64;
    let mut m = j;
    for cand in 2..=j {
        if cand * cand > j {
            break;
        }
        if m % cand == 0 {
            p = cand;
            while m % cand == 0 {
                m /= cand;
            }
            break;
        }
    }
    if p == 0 {
        // j itself is prime
        return j;
    }
    if m == 1 {
        p
    } else {
        1
    }
}

/// Largest prime power dividing m exactly; the grid depth needed so that
/// m divides lcm(1..depth).
fn grid_depth(m: u64) -> u64 {
    let mut depth = 1u64;
    let mut rem = m;
    let mut p = 2u64;
    while rem > 1 {
        if p * p > rem {
            depth = depth.max(rem);
            break;
        }
        if rem % p == 0 {
            let mut pw = 1u64;
            while rem % p == 0 {
                rem /= p;
                pw *= p;
            }
            depth = depth.max(pw);
        }
        p += 1;
    }
    depth
}

#[derive(Debug, Clone)]
struct Level {
    radix: u64,
    /// lcm(1..j-1) mod m: the residue contribution of one unit of this digit.
    rho_weight: u64,
    /// Number of cells spanned by one unit of this digit.
    pos_weight: u64,
}

/// Lazy evaluator for the residue-partition family.
///
/// Split [0,1] into lcm(1..K) cells by the nested mixed-radix grid; cell
/// number C encodes an integer rho(C) (mixed-radix with weights
/// lcm(1..j-1)), and the (m,r) member is supported on the cells with
/// rho = r (mod m). Counting cells below a position with a fixed residue is
/// a digit walk against precomputed suffix tables, so members can be
/// evaluated without materializing the cell set.
#[derive(Debug)]
pub struct ResiduePartition {
    modulus: u64,
    cells: u64,
    levels: Vec<Level>,
    suffix: Vec<Vec<u64>>,
}

impl ResiduePartition {
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus == 0 {
            return Err(CantorError::Domain("family modulus must be >= 1".into()));
        }
        let depth = grid_depth(modulus);
        let mut levels = Vec::new();
        let mut lcm_prev: u64 = 1; // lcm(1..j-1)
        let mut cells: u64 = 1;
        for j in 2..=depth {
            let d = lcm_ratio(j);
            lcm_prev = lcm_prev
                .checked_mul(lcm_ratio(j - 1).max(1))
                .ok_or_else(|| CantorError::Resource("grid lcm overflow".into()))?;
            if d > 1 {
                levels.push(Level { radix: d, rho_weight: lcm_prev % modulus, pos_weight: 0 });
                cells = cells
                    .checked_mul(d)
                    .ok_or_else(|| CantorError::Resource("grid cell overflow".into()))?;
            }
        }
        if cells > (1 << 40) {
            return Err(CantorError::Resource(format!(
                "modulus {modulus} needs {cells} grid cells"
            )));
        }
        // position weights: one unit of a coarse digit spans all finer cells
        let mut span = 1u64;
        for lvl in levels.iter_mut().rev() {
            lvl.pos_weight = span;
            span *= lvl.radix;
        }
        debug_assert_eq!(span, cells);
        // suffix[i][res] = assignments of digits at levels i.. with weighted sum res mod m
        let m = modulus as usize;
        let mut suffix = vec![vec![0u64; m]; levels.len() + 1];
        suffix[levels.len()][0] = 1;
        for i in (0..levels.len()).rev() {
            let lvl = &levels[i];
            let (head, tail) = suffix.split_at_mut(i + 1);
            let cur = &mut head[i];
            let next = &tail[0];
            for t in 0..lvl.radix {
                let shift = (t % modulus) * (lvl.rho_weight % modulus) % modulus;
                for res in 0..modulus {
                    // digits here contribute `shift`, the finer levels must cover the rest
                    let target = ((res + modulus - shift) % modulus) as usize;
                    cur[res as usize] += next[target];
                }
            }
        }
        Ok(ResiduePartition { modulus, cells, levels, suffix })
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn cells(&self) -> u64 {
        self.cells
    }

    fn digit_of(&self, cell: u64, level: usize) -> u64 {
        (cell / self.levels[level].pos_weight) % self.levels[level].radix
    }

    /// rho(cell) mod m.
    fn residue_of(&self, cell: u64) -> u64 {
        let mut acc = 0u64;
        for (i, lvl) in self.levels.iter().enumerate() {
            acc = (acc + self.digit_of(cell, i) % self.modulus * lvl.rho_weight) % self.modulus;
        }
        acc
    }

    /// Number of cells C' < C with rho(C') = r (mod m).
    fn count_below(&self, cell: u64, r: u64) -> u64 {
        let m = self.modulus;
        if cell >= self.cells {
            // every residue class gets an equal share of the full grid
            return self.cells / m;
        }
        let mut count = 0u64;
        let mut prefix = 0u64; // rho of the fixed coarse digits, mod m
        for (i, lvl) in self.levels.iter().enumerate() {
            let t_cur = self.digit_of(cell, i);
            for t in 0..t_cur {
                let p = (prefix + t % m * lvl.rho_weight) % m;
                // need suffix sum ≡ r - p
                let need = ((r + m - p) % m) as usize;
                count += self.suffix[i + 1][need];
            }
            prefix = (prefix + t_cur % m * lvl.rho_weight) % m;
        }
        count
    }

    /// Exact f_{m,r}(x) = m * length(S_{m,r} ∩ [0,x]).
    pub fn eval(&self, r: u64, x: &Rat) -> Result<Rat> {
        if x.is_negative() || *x > Rat::one() {
            return Err(CantorError::Domain(format!("x = {x} outside [0,1]")));
        }
        if r >= self.modulus {
            return Err(CantorError::Domain(format!(
                "residue {r} out of range for modulus {}",
                self.modulus
            )));
        }
        let cells = rat_int(self.cells as i64);
        let pos = x * &cells;
        let cell_idx = pos.floor().to_integer();
        let cell: u64 = (&cell_idx)
            .try_into()
            .map_err(|_| CantorError::Internal("cell index overflow".into()))?;
        if cell >= self.cells {
            return Ok(Rat::one());
        }
        let frac = &pos - Rat::from_integer(cell_idx);
        let mut covered = rat_int(self.count_below(cell, r) as i64);
        if self.residue_of(cell) == r {
            covered += frac;
        }
        Ok(covered * rat_int(self.modulus as i64) / cells)
    }

    /// inf { x : f_{m,r}(x) = q } by binary search over the cell grid.
    pub fn inf_preimage(&self, r: u64, q: &Rat) -> Result<Rat> {
        if q.is_negative() || *q > Rat::one() {
            return Err(CantorError::Domain(format!("level {q} outside [0,1]")));
        }
        if q.is_zero() {
            return Ok(Rat::zero());
        }
        // cells of mass needed: q/m scaled to cell units
        let scaled = q * rat_int(self.cells as i64) / rat_int(self.modulus as i64);
        // smallest C with count_below(C+1) >= scaled
        let (mut lo, mut hi) = (0u64, self.cells - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if rat_int(self.count_below(mid + 1, r) as i64) >= scaled {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let below = rat_int(self.count_below(lo, r) as i64);
        let within = &scaled - below;
        Ok((rat_int(lo as i64) + within) / rat_int(self.cells as i64))
    }

    /// Materializes S_{m,r} as an interval union; bounded by the cell budget.
    pub fn closed_set(&self, r: u64) -> Result<ClosedSetU> {
        if self.cells > MATERIALIZE_CELL_BUDGET {
            return Err(CantorError::Resource(format!(
                "materializing modulus {} needs {} cells",
                self.modulus, self.cells
            )));
        }
        let denom = rat_int(self.cells as i64);
        let mut comps = Vec::new();
        let mut run_start: Option<u64> = None;
        for cell in 0..self.cells {
            let hit = self.residue_of(cell) == r;
            match (hit, run_start) {
                (true, None) => run_start = Some(cell),
                (false, Some(s)) => {
                    comps.push((rat_int(s as i64) / &denom, rat_int(cell as i64) / &denom));
                    run_start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = run_start {
            comps.push((rat_int(s as i64) / &denom, Rat::one()));
        }
        ClosedSetU::new(comps)
    }
}

/// One member of a residue-partition family.
pub struct PartitionMember {
    engine: Arc<ResiduePartition>,
    residue: u64,
}

impl DistributionFn for PartitionMember {
    fn value(&self, x: &Rat) -> Result<Rat> {
        self.engine.eval(self.residue, x)
    }
    fn left_limit(&self, x: &Rat) -> Result<Rat> {
        self.engine.eval(self.residue, x)
    }
    fn right_limit(&self, x: &Rat) -> Result<Rat> {
        self.engine.eval(self.residue, x)
    }
    fn inf_preimage(&self, q: &Rat) -> Result<Rat> {
        self.engine.inf_preimage(self.residue, q)
    }
    fn jumps_exceeding(&self, _threshold: &Rat) -> Result<Vec<Rat>> {
        Ok(Vec::new())
    }
}

/// Declarative family description; serializable as run configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// every member is the identity
    Uniform,
    /// every member is x^exponent
    Power { exponent: u32 },
    /// every member is the adf supported on one closed set
    ClosedSet { set: ClosedSetU },
    /// the residue-partition family; materialization capped at max_m
    SFamily { max_m: u64 },
    /// every member is the constrained-frequency adf
    Olsen { i: [String; 2], j: [String; 2], x0: String, k: [String; 2] },
}

/// An indexed family (m, r) -> distribution function.
pub struct LinearFamily {
    pub kind: FamilyKind,
    constant: Option<Arc<Adf>>,
    engines: Mutex<BTreeMap<u64, Arc<ResiduePartition>>>,
}

impl std::fmt::Debug for LinearFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearFamily").field("kind", &self.kind).finish()
    }
}

impl LinearFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let constant = match &kind {
            FamilyKind::Uniform => Some(Arc::new(Adf::identity())),
            FamilyKind::ClosedSet { set } => Some(Arc::new(adf_from_closed_set(set)?)),
            FamilyKind::Olsen { i, j, x0, k } => {
                let p = |s: &[String; 2]| -> Result<(Rat, Rat)> {
                    Ok((crate::numeric::rat_from_str(&s[0])?, crate::numeric::rat_from_str(&s[1])?))
                };
                Some(Arc::new(crate::adf::olsen_constraint_adf(
                    p(i)?,
                    p(j)?,
                    &crate::numeric::rat_from_str(x0)?,
                    p(k)?,
                )?))
            }
            FamilyKind::SFamily { max_m } => {
                if grid_depth(*max_m) > 40 {
                    return Err(CantorError::Resource(format!(
                        "max_m = {max_m} exceeds the interval-count budget"
                    )));
                }
                None
            }
            FamilyKind::Power { .. } => None,
        };
        Ok(LinearFamily { kind, constant, engines: Mutex::new(BTreeMap::new()) })
    }

    pub fn uniform() -> Self {
        LinearFamily::new(FamilyKind::Uniform).expect("uniform family")
    }

    pub fn power(exponent: u32) -> Self {
        LinearFamily::new(FamilyKind::Power { exponent }).expect("power family")
    }

    /// True when every member is the same function (the residue argument
    /// can then be ignored by callers that iterate members).
    pub fn residue_invariant(&self) -> bool {
        !matches!(self.kind, FamilyKind::SFamily { .. })
    }

    fn engine(&self, modulus: u64) -> Result<Arc<ResiduePartition>> {
        let mut map = self.engines.lock().expect("family engine lock");
        if let Some(e) = map.get(&modulus) {
            return Ok(e.clone());
        }
        let e = Arc::new(ResiduePartition::new(modulus)?);
        map.insert(modulus, e.clone());
        Ok(e)
    }

    /// The family member f_{m,r}.
    pub fn member(&self, m: u64, r: u64) -> Result<Arc<dyn DistributionFn + Send + Sync>> {
        if m == 0 || r >= m {
            return Err(CantorError::Domain(format!("bad family index ({m}, {r})")));
        }
        if let Some(adf) = &self.constant {
            return Ok(adf.clone());
        }
        match &self.kind {
            FamilyKind::Power { exponent } => Ok(Arc::new(PowerFn { exponent: *exponent })),
            FamilyKind::SFamily { .. } => {
                if m == 1 {
                    return Ok(Arc::new(Adf::identity()));
                }
                Ok(Arc::new(PartitionMember { engine: self.engine(m)?, residue: r }))
            }
            _ => unreachable!("constant kinds handled above"),
        }
    }

    /// The support set of a residue-partition member, materialized exactly.
    /// Limited to m <= max_m for that family kind.
    pub fn member_closed_set(&self, m: u64, r: u64) -> Result<ClosedSetU> {
        match &self.kind {
            FamilyKind::SFamily { max_m } => {
                if m > *max_m {
                    return Err(CantorError::Resource(format!(
                        "member modulus {m} above the configured max_m = {max_m}"
                    )));
                }
                if m == 1 {
                    return Ok(ClosedSetU::full());
                }
                self.engine(m)?.closed_set(r)
            }
            FamilyKind::ClosedSet { set } => Ok(set.clone()),
            _ => Err(CantorError::Unsupported(
                "closed-set materialization applies to set-backed families".into(),
            )),
        }
    }
}

/// Verifies the averaging identity f_{m,r} = (1/d) sum_{i<d} f_{md, mi+r}
/// exactly at each sample point. Returns pass/fail and the largest defect.
pub fn family_identity_check(
    fam: &LinearFamily,
    m: u64,
    r: u64,
    d: u64,
    samples: &[Rat],
) -> Result<(bool, Rat)> {
    if d == 0 {
        return Err(CantorError::Domain("refinement factor d must be >= 1".into()));
    }
    let base = fam.member(m, r)?;
    let mut refined = Vec::with_capacity(d as usize);
    for i in 0..d {
        refined.push(fam.member(m * d, m * i + r)?);
    }
    let mut worst = Rat::zero();
    for x in samples {
        let lhs = base.value(x)?;
        let mut sum = Rat::zero();
        for f in &refined {
            sum += f.value(x)?;
        }
        let rhs = sum / rat_int(d as i64);
        let defect = (lhs - rhs).abs();
        if defect > worst {
            worst = defect;
        }
    }
    Ok((worst.is_zero(), worst))
}

/// The residue-partition family used for progression-abnormal targets;
/// members below max_m can be materialized as interval unions.
pub fn ap_abnormal_family(max_m: u64) -> Result<LinearFamily> {
    if max_m == 0 {
        return Err(CantorError::Domain("max_m must be >= 1".into()));
    }
    for m in 2..=max_m {
        let depth = grid_depth(m);
        let mut cells: u64 = 1;
        for j in 2..=depth {
            let d = lcm_ratio(j);
            cells = cells
                .checked_mul(d)
                .ok_or_else(|| CantorError::Resource("cell count overflow".into()))?;
        }
        if cells > MATERIALIZE_CELL_BUDGET {
            return Err(CantorError::Resource(format!(
                "max_m = {max_m} exceeds the interval-count budget at m = {m}"
            )));
        }
    }
    LinearFamily::new(FamilyKind::SFamily { max_m })
}

/// Congruence patterns: the tuples (x mod 1, ..., x mod n-1) arising from
/// integers x with x = r (mod n), deduplicated and sorted.
pub fn congruence_patterns(n: u64, r: u64) -> Result<Vec<Vec<u64>>> {
    if n == 0 || r >= n {
        return Err(CantorError::Domain(format!("bad pattern index ({n}, {r})")));
    }
    let mut l: u64 = 1;
    for t in 1..=n {
        l = l.lcm(&t);
    }
    let mut out = Vec::new();
    for x in 0..l {
        if x % n == r {
            let tuple: Vec<u64> = (1..n).map(|t| x % t).collect();
            out.push(tuple);
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The target table for accumulation-point families: closed sets D_{m,r}
/// for m <= k, combined by exact intersection for indices beyond k.
pub struct AccumulationTargets {
    pub depth: u64,
    targets: BTreeMap<(u64, u64), ClosedSetU>,
}

impl AccumulationTargets {
    pub fn new(depth: u64, targets: BTreeMap<(u64, u64), ClosedSetU>) -> Result<Self> {
        if depth == 0 {
            return Err(CantorError::Domain("depth k must be >= 1".into()));
        }
        let mut global: Option<ClosedSetU> = None;
        for m in 1..=depth {
            for r in 0..m {
                let d = targets.get(&(m, r)).ok_or_else(|| {
                    CantorError::Domain(format!("missing target set for ({m}, {r})"))
                })?;
                global = Some(match global {
                    None => d.clone(),
                    Some(g) => g.intersect(d),
                });
            }
        }
        if global.map(|g| g.is_empty()).unwrap_or(true) {
            return Err(CantorError::Constraint(
                "the target sets have empty global intersection".into(),
            ));
        }
        Ok(AccumulationTargets { depth, targets })
    }

    /// The combined set A_{q,s}: the target itself for q <= k, and the
    /// divisor-filtered intersection above.
    pub fn combined_set(&self, q: u64, s: u64) -> Result<ClosedSetU> {
        if q == 0 || s >= q {
            return Err(CantorError::Domain(format!("bad index ({q}, {s})")));
        }
        if q <= self.depth {
            return Ok(self.targets[&(q, s)].clone());
        }
        let mut acc: Option<ClosedSetU> = None;
        let mut meet = |set: &ClosedSetU| {
            acc = Some(match acc.take() {
                None => set.clone(),
                Some(g) => g.intersect(set),
            });
        };
        for d in 1..=self.depth {
            if q % d == 0 {
                meet(&self.targets[&(d, s % d)]);
            } else {
                for j in 0..d {
                    meet(&self.targets[&(d, j)]);
                }
            }
        }
        let result = acc.expect("depth >= 1 guarantees at least one set");
        if result.is_empty() {
            return Err(CantorError::Constraint(format!(
                "combined target for ({q}, {s}) is empty"
            )));
        }
        Ok(result)
    }

    /// The adf targeted at index (q, s).
    pub fn member(&self, q: u64, s: u64) -> Result<Adf> {
        adf_from_closed_set(&self.combined_set(q, s)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adf::Side;
    use crate::numeric::rat;

    #[test]
    fn lcm_ratios() {
        let got: Vec<u64> = (1..=12).map(lcm_ratio).collect();
        assert_eq!(got, vec![1, 2, 3, 2, 5, 1, 7, 2, 3, 1, 11, 1]);
    }

    #[test]
    fn grid_depths() {
        assert_eq!(grid_depth(2), 2);
        assert_eq!(grid_depth(6), 3);
        assert_eq!(grid_depth(24), 8);
        assert_eq!(grid_depth(720), 16);
        assert_eq!(grid_depth(5040), 16);
    }

    #[test]
    fn partition_halves() {
        let fam = ap_abnormal_family(4).unwrap();
        let s20 = fam.member_closed_set(2, 0).unwrap();
        let s21 = fam.member_closed_set(2, 1).unwrap();
        assert_eq!(s20, ClosedSetU::parse("[0,1/2]").unwrap());
        assert_eq!(s21, ClosedSetU::parse("[1/2,1]").unwrap());
    }

    #[test]
    fn partition_is_measure_disjoint_with_equal_lengths() {
        let fam = ap_abnormal_family(6).unwrap();
        for m in 2..=6u64 {
            let sets: Vec<ClosedSetU> =
                (0..m).map(|r| fam.member_closed_set(m, r).unwrap()).collect();
            for r in 0..m as usize {
                assert_eq!(sets[r].total_length(), rat(1, m as i64), "length of ({m},{r})");
                for r2 in (r + 1)..m as usize {
                    assert!(sets[r].overlap_length(&sets[r2]).is_zero());
                }
            }
        }
    }

    #[test]
    fn partition_refinement_identity() {
        // S_{m,r} = union over i of S_{md, mi+r}, exactly, as interval unions
        let fam = ap_abnormal_family(12).unwrap();
        for (m, r, d) in [(1u64, 0u64, 2u64), (1, 0, 3), (2, 0, 2), (2, 1, 3), (3, 2, 2)] {
            let coarse = fam.member_closed_set(m, r).unwrap();
            let mut union: Option<ClosedSetU> = None;
            for i in 0..d {
                let fine = fam.member_closed_set(m * d, m * i + r).unwrap();
                union = Some(match union {
                    None => fine,
                    Some(u) => u.union(&fine),
                });
            }
            assert_eq!(coarse, union.unwrap(), "refinement of ({m},{r}) by {d}");
        }
    }

    #[test]
    fn congruence_pattern_example() {
        // x = 1 (mod 3) gives residue tuples (x mod 1, x mod 2) in {(0,0),(0,1)}
        let got = congruence_patterns(3, 1).unwrap();
        assert_eq!(got, vec![vec![0, 0], vec![0, 1]]);
    }

    #[test]
    fn partition_member_eval_matches_set() {
        let fam = ap_abnormal_family(6).unwrap();
        for (m, r) in [(2u64, 0u64), (3, 1), (4, 2), (6, 5)] {
            let member = fam.member(m, r).unwrap();
            let set = fam.member_closed_set(m, r).unwrap();
            let slope = rat_int(m as i64);
            for num in 0..=20i64 {
                let x = rat(num, 20);
                // f(x) = m * len(S ∩ [0,x])
                let clipped = set.intersect(
                    &ClosedSetU::new(vec![(Rat::zero(), x.clone())]).unwrap(),
                );
                let expect = clipped.total_length() * &slope;
                assert_eq!(member.value(&x).unwrap(), expect, "({m},{r}) at {x}");
            }
        }
    }

    #[test]
    fn partition_inf_preimage() {
        let fam = ap_abnormal_family(4).unwrap();
        // f_{2,1} ramps over [1/2, 1], so level 1/2 is first hit at 3/4
        let f21 = fam.member(2, 1).unwrap();
        assert_eq!(f21.inf_preimage(&rat(1, 2)).unwrap(), rat(3, 4));
        assert_eq!(f21.inf_preimage(&Rat::zero()).unwrap(), Rat::zero());
        assert_eq!(f21.inf_preimage(&Rat::one()).unwrap(), Rat::one());
        let f20 = fam.member(2, 0).unwrap();
        assert_eq!(f20.inf_preimage(&rat(1, 2)).unwrap(), rat(1, 4));
    }

    #[test]
    fn identity_check_uniform_and_partition() {
        let samples: Vec<Rat> = (0..=16).map(|i| rat(i, 16)).collect();
        let uni = LinearFamily::uniform();
        let (ok, defect) = family_identity_check(&uni, 3, 1, 4, &samples).unwrap();
        assert!(ok);
        assert!(defect.is_zero());
        let fam = ap_abnormal_family(4).unwrap();
        let (ok, defect) = family_identity_check(&fam, 1, 0, 2, &samples).unwrap();
        assert!(ok, "partition family defect {defect}");
        let (ok, _) = family_identity_check(&fam, 2, 1, 2, &samples).unwrap();
        assert!(ok);
    }

    #[test]
    fn identity_check_detects_corruption() {
        // a deliberately non-linear "family": member(m,r) = x for m = 1 and
        // x^2 otherwise; check reports a positive defect
        let upper = LinearFamily::uniform();
        let lower = LinearFamily::power(2);
        let samples = vec![rat(1, 4)];
        let base = upper.member(1, 0).unwrap();
        let refined0 = lower.member(2, 0).unwrap();
        let refined1 = lower.member(2, 1).unwrap();
        let lhs = base.value(&rat(1, 4)).unwrap();
        let rhs = (refined0.value(&rat(1, 4)).unwrap() + refined1.value(&rat(1, 4)).unwrap())
            / rat_int(2);
        assert!(lhs != rhs);
        // and the uniform family itself reports zero defect at the same point
        let (ok, _) = family_identity_check(&upper, 1, 0, 2, &samples).unwrap();
        assert!(ok);
    }

    #[test]
    fn sfamily_budget_guard() {
        assert!(ap_abnormal_family(64).is_err());
    }

    #[test]
    fn accumulation_targets_combined() {
        // all full: identity everywhere
        let mut t = BTreeMap::new();
        t.insert((1u64, 0u64), ClosedSetU::full());
        let acc = AccumulationTargets::new(1, t).unwrap();
        let f = acc.member(5, 3).unwrap();
        assert_eq!(f, Adf::identity());

        // depth 2 with atoms at 1/2: indices above depth intersect down to the atom
        let mut t = BTreeMap::new();
        t.insert((1u64, 0u64), ClosedSetU::full());
        t.insert((2u64, 0u64), ClosedSetU::point(rat(1, 2)).unwrap());
        t.insert((2u64, 1u64), ClosedSetU::point(rat(1, 2)).unwrap());
        let acc = AccumulationTargets::new(2, t).unwrap();
        let a40 = acc.combined_set(4, 0).unwrap();
        assert_eq!(a40, ClosedSetU::point(rat(1, 2)).unwrap());
        let f = acc.member(4, 0).unwrap();
        assert_eq!(f.eval(&rat(1, 4), Side::Point).unwrap(), Rat::zero());
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), Rat::one());

        // two atoms with equal jumps
        let mut t = BTreeMap::new();
        t.insert(
            (1u64, 0u64),
            ClosedSetU::new(vec![(rat(1, 4), rat(1, 4)), (rat(3, 4), rat(3, 4))]).unwrap(),
        );
        let acc = AccumulationTargets::new(1, t).unwrap();
        let f = acc.member(1, 0).unwrap();
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), rat(1, 2));

        // empty intersection is rejected
        let mut t = BTreeMap::new();
        t.insert((1u64, 0u64), ClosedSetU::point(rat(1, 4)).unwrap());
        t.insert((2u64, 0u64), ClosedSetU::point(rat(3, 4)).unwrap());
        t.insert((2u64, 1u64), ClosedSetU::point(rat(3, 4)).unwrap());
        assert!(AccumulationTargets::new(2, t).is_err());
    }
}
