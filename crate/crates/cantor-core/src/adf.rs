//! Asymptotic distribution functions as exact piecewise-affine objects.
//!
//! An [`Adf`] is a non-decreasing function on [0,1] with f(0) = 0 and
//! f(1) = 1, stored as rational breakpoints carrying left-limit, point and
//! right-limit values, with affine segments between breakpoints. Storing all
//! three values lets both the half-open counting statements and the
//! pointwise ones be expressed without re-deriving limits.
//!
//! [`ClosedSetU`] is the representable class of closed sets: finite unions
//! of closed rational intervals (degenerate intervals are points).

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CantorError, Result};
use crate::numeric::{rat_from_str, rat_int, rat_to_string, Rat};

/// Which value of a distribution function to read at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Point,
    Right,
}

/// A breakpoint of a piecewise-affine adf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Breakpoint {
    pub x: Rat,
    pub left: Rat,
    pub point: Rat,
    pub right: Rat,
}

/// Exact evaluation interface shared by piecewise-affine adfs and
/// closed-form families (powers, lazily evaluated set families).
pub trait DistributionFn {
    /// Point value f(x).
    fn value(&self, x: &Rat) -> Result<Rat>;
    /// Left limit at x (equals the value where f is continuous).
    fn left_limit(&self, x: &Rat) -> Result<Rat>;
    /// Right limit at x.
    fn right_limit(&self, x: &Rat) -> Result<Rat>;
    /// inf { x : f(x) = q }, with the jump-location convention when the
    /// level set is empty because q falls inside a jump.
    fn inf_preimage(&self, q: &Rat) -> Result<Rat>;
    /// Locations where the jump right-left exceeds `threshold`.
    fn jumps_exceeding(&self, threshold: &Rat) -> Result<Vec<Rat>>;
}

fn check_unit_range(x: &Rat, what: &str) -> Result<()> {
    if x.is_negative() || *x > Rat::one() {
        return Err(CantorError::Domain(format!("{what} = {x} outside [0,1]")));
    }
    Ok(())
}

/// Piecewise-affine asymptotic distribution function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adf {
    pts: Vec<Breakpoint>,
}

impl Adf {
    /// Builds from raw breakpoints, validating every adf invariant.
    pub fn from_breakpoints(pts: Vec<Breakpoint>) -> Result<Self> {
        if pts.len() < 2 {
            return Err(CantorError::Domain("an adf needs breakpoints at 0 and 1".into()));
        }
        let first = &pts[0];
        if !first.x.is_zero() || !first.point.is_zero() || !first.left.is_zero() {
            return Err(CantorError::Domain("adf must start at (0, 0)".into()));
        }
        let last = &pts[pts.len() - 1];
        if last.x != Rat::one() || last.point != Rat::one() || last.right != Rat::one() {
            return Err(CantorError::Domain("adf must end at (1, 1)".into()));
        }
        for (i, p) in pts.iter().enumerate() {
            check_unit_range(&p.x, "breakpoint x")?;
            if p.left > p.point || p.point > p.right {
                return Err(CantorError::Domain(format!(
                    "breakpoint values out of order at x = {}",
                    p.x
                )));
            }
            if i + 1 < pts.len() {
                let nx = &pts[i + 1];
                if p.x >= nx.x {
                    return Err(CantorError::Domain("breakpoints not strictly increasing".into()));
                }
                if p.right > nx.left {
                    return Err(CantorError::Domain(format!(
                        "decreasing segment between x = {} and x = {}",
                        p.x, nx.x
                    )));
                }
            }
        }
        // drop interior breakpoints that sit on the segment through their
        // neighbors, so equal functions compare equal
        let mut keep = vec![true; pts.len()];
        loop {
            let live: Vec<usize> = (0..pts.len()).filter(|&i| keep[i]).collect();
            let mut changed = false;
            for w in live.windows(3) {
                let (a, b, c) = (&pts[w[0]], &pts[w[1]], &pts[w[2]]);
                if b.left == b.point && b.point == b.right {
                    let lhs = (&b.point - &a.right) * (&c.x - &b.x);
                    let rhs = (&c.left - &b.point) * (&b.x - &a.x);
                    if lhs == rhs {
                        keep[w[1]] = false;
                        changed = true;
                        break;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let pts: Vec<Breakpoint> = pts
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        Ok(Adf { pts })
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.pts
    }

    fn continuous_points(values: Vec<(Rat, Rat)>) -> Result<Self> {
        let pts = values
            .into_iter()
            .map(|(x, v)| Breakpoint { x, left: v.clone(), point: v.clone(), right: v })
            .collect();
        Adf::from_breakpoints(pts)
    }

    /// f(x) = x.
    pub fn identity() -> Self {
        Adf::continuous_points(vec![
            (Rat::zero(), Rat::zero()),
            (Rat::one(), Rat::one()),
        ])
        .expect("identity is an adf")
    }

    /// The step adf: 0 below t, 1 at and above t.
    pub fn step_at(t: &Rat) -> Result<Self> {
        check_unit_range(t, "step location")?;
        if t.is_zero() {
            // a jump of full mass at 0
            return Adf::from_breakpoints(vec![
                Breakpoint {
                    x: Rat::zero(),
                    left: Rat::zero(),
                    point: Rat::zero(),
                    right: Rat::one(),
                },
                Breakpoint { x: Rat::one(), left: Rat::one(), point: Rat::one(), right: Rat::one() },
            ]);
        }
        if *t == Rat::one() {
            return Adf::from_breakpoints(vec![
                Breakpoint { x: Rat::zero(), left: Rat::zero(), point: Rat::zero(), right: Rat::zero() },
                Breakpoint { x: Rat::one(), left: Rat::zero(), point: Rat::one(), right: Rat::one() },
            ]);
        }
        Adf::from_breakpoints(vec![
            Breakpoint { x: Rat::zero(), left: Rat::zero(), point: Rat::zero(), right: Rat::zero() },
            Breakpoint { x: t.clone(), left: Rat::zero(), point: Rat::one(), right: Rat::one() },
            Breakpoint { x: Rat::one(), left: Rat::one(), point: Rat::one(), right: Rat::one() },
        ])
    }

    /// Continuous interpolant of `f` on the quantile grid of a stage:
    /// grid points i/(stage+1) plus every jump of f exceeding 1/stage.
    pub fn interpolate_stage(f: &dyn DistributionFn, stage: u64) -> Result<Self> {
        if stage == 0 {
            return Err(CantorError::Domain("interpolation stage must be >= 1".into()));
        }
        let n = stage as i64;
        let mut grid: Vec<Rat> = (0..=(n + 1)).map(|i| Rat::new(i.into(), (n + 1).into())).collect();
        grid.extend(f.jumps_exceeding(&Rat::new(1.into(), n.into()))?);
        grid.sort();
        grid.dedup();
        let mut values = Vec::with_capacity(grid.len());
        for x in grid {
            let v = f.value(&x)?;
            values.push((x, v));
        }
        Adf::continuous_points(values)
    }

    /// True when every breakpoint has equal left, point and right values.
    pub fn is_continuous(&self) -> bool {
        self.pts.iter().all(|p| p.left == p.point && p.point == p.right)
    }

    /// Exact evaluation. `side` selects the one-sided limit or point value.
    pub fn eval(&self, x: &Rat, side: Side) -> Result<Rat> {
        check_unit_range(x, "x")?;
        // locate: binary search for the breakpoint with largest x_i <= x
        let idx = self.pts.partition_point(|p| &p.x <= x) - 1;
        let p = &self.pts[idx];
        if &p.x == x {
            return Ok(match side {
                Side::Left => {
                    if idx == 0 {
                        p.point.clone()
                    } else {
                        p.left.clone()
                    }
                }
                Side::Point => p.point.clone(),
                Side::Right => {
                    if idx == self.pts.len() - 1 {
                        p.point.clone()
                    } else {
                        p.right.clone()
                    }
                }
            });
        }
        let nx = &self.pts[idx + 1];
        let t = (x - &p.x) / (&nx.x - &p.x);
        Ok(&p.right + (&nx.left - &p.right) * t)
    }

    /// inf { x : f(x) = q } with the jump-location convention.
    pub fn inf_preimage(&self, q: &Rat) -> Result<Rat> {
        check_unit_range(q, "level q")?;
        for i in 0..self.pts.len() {
            if i > 0 {
                let a = &self.pts[i - 1];
                let b = &self.pts[i];
                let (lo_v, hi_v) = (&a.right, &b.left);
                if lo_v == hi_v {
                    // flat open segment: preimage infimum sits at its left end
                    if q == lo_v && a.point != *q {
                        return Ok(a.x.clone());
                    }
                } else if lo_v < q && q < hi_v {
                    let t = (q - lo_v) / (hi_v - lo_v);
                    return Ok(&a.x + (&b.x - &a.x) * t);
                }
            }
            let p = &self.pts[i];
            if &p.point == q {
                return Ok(p.x.clone());
            }
            let left = if i == 0 { &p.point } else { &p.left };
            let right = if i == self.pts.len() - 1 { &p.point } else { &p.right };
            if left <= q && q <= right {
                // q inside the jump at this breakpoint; level set is empty here
                return Ok(p.x.clone());
            }
        }
        Err(CantorError::Internal(format!("level {q} not located in [0,1]")))
    }

    /// Jump locations with size right - left exceeding the threshold.
    pub fn jumps_exceeding(&self, threshold: &Rat) -> Vec<Rat> {
        let mut out = Vec::new();
        for (i, p) in self.pts.iter().enumerate() {
            let left = if i == 0 { &p.point } else { &p.left };
            let right = if i == self.pts.len() - 1 { &p.point } else { &p.right };
            if &(right - left) > threshold {
                out.push(p.x.clone());
            }
        }
        out
    }

    /// Closure of the set where f increases: positive-slope segments plus
    /// jump points.
    pub fn increase_set(&self) -> ClosedSetU {
        let mut comps = Vec::new();
        for (i, p) in self.pts.iter().enumerate() {
            let left = if i == 0 { &p.point } else { &p.left };
            let right = if i == self.pts.len() - 1 { &p.point } else { &p.right };
            if left < right {
                comps.push((p.x.clone(), p.x.clone()));
            }
            if i + 1 < self.pts.len() {
                let nx = &self.pts[i + 1];
                if p.right < nx.left {
                    comps.push((p.x.clone(), nx.x.clone()));
                }
            }
        }
        ClosedSetU::new(comps).expect("increase set components are valid")
    }

    /// Largest jump size anywhere (0 for continuous adfs).
    pub fn max_jump(&self) -> Rat {
        let mut best = Rat::zero();
        for (i, p) in self.pts.iter().enumerate() {
            let left = if i == 0 { &p.point } else { &p.left };
            let right = if i == self.pts.len() - 1 { &p.point } else { &p.right };
            let j = right - left;
            if j > best {
                best = j;
            }
        }
        best
    }
}

impl DistributionFn for Adf {
    fn value(&self, x: &Rat) -> Result<Rat> {
        self.eval(x, Side::Point)
    }
    fn left_limit(&self, x: &Rat) -> Result<Rat> {
        self.eval(x, Side::Left)
    }
    fn right_limit(&self, x: &Rat) -> Result<Rat> {
        self.eval(x, Side::Right)
    }
    fn inf_preimage(&self, q: &Rat) -> Result<Rat> {
        Adf::inf_preimage(self, q)
    }
    fn jumps_exceeding(&self, threshold: &Rat) -> Result<Vec<Rat>> {
        Ok(Adf::jumps_exceeding(self, threshold))
    }
}

/// f(x) = x^k as a closed-form distribution function.
#[derive(Debug, Clone)]
pub struct PowerFn {
    pub exponent: u32,
}

impl DistributionFn for PowerFn {
    fn value(&self, x: &Rat) -> Result<Rat> {
        check_unit_range(x, "x")?;
        Ok(x.pow(self.exponent as i32))
    }
    fn left_limit(&self, x: &Rat) -> Result<Rat> {
        self.value(x)
    }
    fn right_limit(&self, x: &Rat) -> Result<Rat> {
        self.value(x)
    }
    fn inf_preimage(&self, q: &Rat) -> Result<Rat> {
        check_unit_range(q, "level q")?;
        // exact k-th root when it exists
        let num = q.numer().magnitude();
        let den = q.denom().magnitude();
        let rn = num.nth_root(self.exponent);
        let rd = den.nth_root(self.exponent);
        if rn.pow(self.exponent) == *num && rd.pow(self.exponent) == *den {
            Ok(Rat::new(rn.into(), rd.into()))
        } else {
            Err(CantorError::Unsupported(format!(
                "preimage of {q} under x^{} is irrational",
                self.exponent
            )))
        }
    }
    fn jumps_exceeding(&self, _threshold: &Rat) -> Result<Vec<Rat>> {
        Ok(Vec::new())
    }
}

/// A finite union of disjoint closed rational intervals inside [0,1].
/// Touching components merge on construction; degenerate intervals are
/// points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[String; 2]>", into = "Vec<[String; 2]>")]
pub struct ClosedSetU {
    comps: Vec<(Rat, Rat)>,
}

impl ClosedSetU {
    pub fn new(mut comps: Vec<(Rat, Rat)>) -> Result<Self> {
        for (a, b) in &comps {
            if a > b {
                return Err(CantorError::Domain(format!("interval [{a}, {b}] reversed")));
            }
            check_unit_range(a, "interval endpoint")?;
            check_unit_range(b, "interval endpoint")?;
        }
        comps.sort();
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(comps.len());
        for (a, b) in comps {
            match merged.last_mut() {
                Some((_, pb)) if a <= *pb => {
                    if b > *pb {
                        *pb = b;
                    }
                }
                _ => merged.push((a, b)),
            }
        }
        Ok(ClosedSetU { comps: merged })
    }

    pub fn point(x: Rat) -> Result<Self> {
        ClosedSetU::new(vec![(x.clone(), x)])
    }

    pub fn full() -> Self {
        ClosedSetU::new(vec![(Rat::zero(), Rat::one())]).expect("unit interval")
    }

    pub fn components(&self) -> &[(Rat, Rat)] {
        &self.comps
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    /// Total length of the positive-length components.
    pub fn total_length(&self) -> Rat {
        self.comps.iter().map(|(a, b)| b - a).sum()
    }

    pub fn contains_point(&self, x: &Rat) -> bool {
        self.comps.iter().any(|(a, b)| a <= x && x <= b)
    }

    /// Exact intersection.
    pub fn intersect(&self, other: &ClosedSetU) -> ClosedSetU {
        let mut comps = Vec::new();
        for (a, b) in &self.comps {
            for (c, d) in &other.comps {
                let lo = a.max(c).clone();
                let hi = b.min(d).clone();
                if lo <= hi {
                    comps.push((lo, hi));
                }
            }
        }
        ClosedSetU::new(comps).expect("intersection of valid sets")
    }

    /// Length of the overlap with another set (0 means interior-disjoint).
    pub fn overlap_length(&self, other: &ClosedSetU) -> Rat {
        self.intersect(other).total_length()
    }

    /// Exact union.
    pub fn union(&self, other: &ClosedSetU) -> ClosedSetU {
        let mut comps = self.comps.clone();
        comps.extend(other.comps.iter().cloned());
        ClosedSetU::new(comps).expect("union of valid sets")
    }

    /// Distance from a point to the set.
    pub fn distance_to(&self, x: &Rat) -> Rat {
        let mut best: Option<Rat> = None;
        for (a, b) in &self.comps {
            let d = if x < a {
                a - x
            } else if x > b {
                x - b
            } else {
                Rat::zero()
            };
            best = Some(match best {
                Some(cur) => cur.min(d),
                None => d,
            });
        }
        best.unwrap_or_else(Rat::one)
    }

    /// Exact Hausdorff distance between two nonempty sets.
    pub fn hausdorff_distance(&self, other: &ClosedSetU) -> Result<Rat> {
        if self.is_empty() || other.is_empty() {
            return Err(CantorError::Domain(
                "Hausdorff distance of an empty set is undefined".into(),
            ));
        }
        fn directed(a: &ClosedSetU, b: &ClosedSetU) -> Rat {
            // sup over a of dist(x, b): attained at endpoints of a's components
            // or at gap midpoints of b lying inside a
            let mut candidates: Vec<Rat> = Vec::new();
            for (lo, hi) in &a.comps {
                candidates.push(lo.clone());
                candidates.push(hi.clone());
            }
            for w in b.comps.windows(2) {
                let mid = (&w[0].1 + &w[1].0) / rat_int(2);
                if a.contains_point(&mid) {
                    candidates.push(mid);
                }
            }
            candidates
                .into_iter()
                .map(|x| b.distance_to(&x))
                .max()
                .unwrap_or_else(Rat::zero)
        }
        Ok(directed(self, other).max(directed(other, self)))
    }

    /// Parses `[a,b],[c,d],...` with rational or decimal endpoints.
    pub fn parse(s: &str) -> Result<Self> {
        let mut comps = Vec::new();
        let s = s.trim();
        if s.is_empty() {
            return ClosedSetU::new(comps);
        }
        let mut rest = s;
        while !rest.is_empty() {
            let rest2 = rest.trim_start().strip_prefix('[').ok_or_else(|| {
                CantorError::Parse(format!("expected '[' in closed set at {rest:?}"))
            })?;
            let end = rest2
                .find(']')
                .ok_or_else(|| CantorError::Parse("missing ']' in closed set".into()))?;
            let body = &rest2[..end];
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| CantorError::Parse(format!("expected 'a,b' in {body:?}")))?;
            comps.push((rat_from_str(a)?, rat_from_str(b)?));
            rest = rest2[end + 1..].trim_start().trim_start_matches(',');
        }
        ClosedSetU::new(comps)
    }
}

impl std::fmt::Display for ClosedSetU {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .comps
            .iter()
            .map(|(a, b)| format!("[{},{}]", rat_to_string(a), rat_to_string(b)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl TryFrom<Vec<[String; 2]>> for ClosedSetU {
    type Error = CantorError;
    fn try_from(v: Vec<[String; 2]>) -> Result<Self> {
        let comps = v
            .into_iter()
            .map(|[a, b]| Ok((rat_from_str(&a)?, rat_from_str(&b)?)))
            .collect::<Result<Vec<_>>>()?;
        ClosedSetU::new(comps)
    }
}

impl From<ClosedSetU> for Vec<[String; 2]> {
    fn from(s: ClosedSetU) -> Self {
        s.comps
            .iter()
            .map(|(a, b)| [rat_to_string(a), rat_to_string(b)])
            .collect()
    }
}

/// The adf supported exactly on a closed set: positive-length components
/// carry affine mass proportional to their length, degenerate points carry
/// equal jumps, and the function is constant off the set. When both kinds
/// are present the mass splits evenly between them.
pub fn adf_from_closed_set(d: &ClosedSetU) -> Result<Adf> {
    if d.is_empty() {
        return Err(CantorError::Domain("cannot build an adf on the empty set".into()));
    }
    let comps = d.components();
    let total_len = d.total_length();
    let n_points = comps.iter().filter(|(a, b)| a == b).count();
    let (interval_scale, point_mass) = if n_points == 0 {
        (Rat::one() / &total_len, Rat::zero())
    } else if total_len.is_zero() {
        (Rat::zero(), Rat::one() / rat_int(n_points as i64))
    } else {
        (
            Rat::new(1.into(), 2.into()) / &total_len,
            Rat::new(1.into(), 2.into()) / rat_int(n_points as i64),
        )
    };

    let mut pts: Vec<Breakpoint> = Vec::new();
    let mut v = Rat::zero();
    if !comps[0].0.is_zero() {
        pts.push(Breakpoint {
            x: Rat::zero(),
            left: Rat::zero(),
            point: Rat::zero(),
            right: Rat::zero(),
        });
    }
    for (a, b) in comps {
        if a == b {
            let mass = point_mass.clone();
            if a.is_zero() {
                pts.push(Breakpoint {
                    x: Rat::zero(),
                    left: Rat::zero(),
                    point: Rat::zero(),
                    right: mass.clone(),
                });
            } else {
                pts.push(Breakpoint {
                    x: a.clone(),
                    left: v.clone(),
                    point: &v + &mass,
                    right: &v + &mass,
                });
            }
            v += mass;
        } else {
            let mass = (b - a) * &interval_scale;
            pts.push(Breakpoint { x: a.clone(), left: v.clone(), point: v.clone(), right: v.clone() });
            v += mass;
            pts.push(Breakpoint { x: b.clone(), left: v.clone(), point: v.clone(), right: v.clone() });
        }
    }
    if v != Rat::one() {
        return Err(CantorError::Internal(format!("closed-set adf mass {v} != 1")));
    }
    match pts.last_mut() {
        Some(p) if p.x == Rat::one() => {
            p.point = Rat::one();
            p.right = Rat::one();
        }
        _ => pts.push(Breakpoint {
            x: Rat::one(),
            left: Rat::one(),
            point: Rat::one(),
            right: Rat::one(),
        }),
    }
    Adf::from_breakpoints(pts)
}

/// The constrained-frequency adf: density c_I on I, c_J on J, c_K on K and
/// zero elsewhere, with c_I len(I) = c_J len(J) = x0 and total mass one.
pub fn olsen_constraint_adf(
    i: (Rat, Rat),
    j: (Rat, Rat),
    x0: &Rat,
    k: (Rat, Rat),
) -> Result<Adf> {
    for (name, (a, b)) in [("I", &i), ("J", &j), ("K", &k)] {
        check_unit_range(a, name)?;
        check_unit_range(b, name)?;
        if a >= b {
            return Err(CantorError::Domain(format!("{name} must be non-degenerate")));
        }
    }
    let len = |p: &(Rat, Rat)| &p.1 - &p.0;
    let overlap = |p: &(Rat, Rat), q: &(Rat, Rat)| {
        let lo = p.0.clone().max(q.0.clone());
        let hi = p.1.clone().min(q.1.clone());
        hi > lo
    };
    if overlap(&i, &j) || overlap(&i, &k) || overlap(&j, &k) {
        return Err(CantorError::Domain("I, J, K must have disjoint interiors".into()));
    }
    if len(&i) + len(&j) >= Rat::one() {
        return Err(CantorError::Domain("len(I) + len(J) must be < 1".into()));
    }
    if x0.is_negative() || *x0 > Rat::new(1.into(), 2.into()) {
        return Err(CantorError::Domain(format!("x0 = {x0} outside [0, 1/2]")));
    }
    let c_i = x0 / len(&i);
    let c_j = x0 / len(&j);
    let c_k = (Rat::one() - x0 - x0) / len(&k);
    if c_k.is_negative() {
        return Err(CantorError::Constraint(format!(
            "remaining mass is negative (c_K = {c_k})"
        )));
    }
    let mut segs = vec![(i, c_i), (j, c_j), (k, c_k)];
    segs.sort_by(|a, b| a.0 .0.cmp(&b.0 .0));
    let mut values: Vec<(Rat, Rat)> = vec![(Rat::zero(), Rat::zero())];
    let mut v = Rat::zero();
    for ((a, b), c) in segs {
        if values.last().unwrap().0 < a {
            values.push((a.clone(), v.clone()));
        }
        v = &v + (&b - &a) * &c;
        values.push((b, v.clone()));
    }
    if values.last().unwrap().0 < Rat::one() {
        values.push((Rat::one(), v.clone()));
    }
    if v != Rat::one() {
        return Err(CantorError::Internal(format!("constraint adf mass {v} != 1")));
    }
    let dedup: Vec<(Rat, Rat)> = {
        let mut out: Vec<(Rat, Rat)> = Vec::new();
        for (x, val) in values {
            if out.last().map(|(px, _)| px == &x).unwrap_or(false) {
                continue;
            }
            out.push((x, val));
        }
        out
    };
    Adf::continuous_points(dedup)
}

/// Serialized form of an adf: breakpoints plus the segment slopes.
#[derive(Debug, Serialize, Deserialize)]
pub struct AdfJson {
    pub breakpoints: Vec<BreakpointJson>,
    pub segment_slopes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BreakpointJson {
    pub x: String,
    pub left: String,
    pub point: String,
    pub right: String,
}

impl From<&Adf> for AdfJson {
    fn from(f: &Adf) -> Self {
        let breakpoints = f
            .pts
            .iter()
            .map(|p| BreakpointJson {
                x: rat_to_string(&p.x),
                left: rat_to_string(&p.left),
                point: rat_to_string(&p.point),
                right: rat_to_string(&p.right),
            })
            .collect();
        let segment_slopes = f
            .pts
            .windows(2)
            .map(|w| rat_to_string(&((&w[1].left - &w[0].right) / (&w[1].x - &w[0].x))))
            .collect();
        AdfJson { breakpoints, segment_slopes }
    }
}

impl TryFrom<&AdfJson> for Adf {
    type Error = CantorError;
    fn try_from(j: &AdfJson) -> Result<Self> {
        let pts = j
            .breakpoints
            .iter()
            .map(|b| {
                Ok(Breakpoint {
                    x: rat_from_str(&b.x)?,
                    left: rat_from_str(&b.left)?,
                    point: rat_from_str(&b.point)?,
                    right: rat_from_str(&b.right)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Adf::from_breakpoints(pts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn identity_eval() {
        let f = Adf::identity();
        assert_eq!(f.eval(&rat(1, 3), Side::Point).unwrap(), rat(1, 3));
        assert!(f.eval(&rat(3, 2), Side::Point).is_err());
    }

    #[test]
    fn step_eval_and_preimage() {
        let f = Adf::step_at(&rat(1, 2)).unwrap();
        assert_eq!(f.eval(&rat(1, 4), Side::Point).unwrap(), Rat::zero());
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), Rat::one());
        assert_eq!(f.eval(&rat(1, 2), Side::Left).unwrap(), Rat::zero());
        // level 1/2 sits strictly inside the jump: convention returns the jump location
        assert_eq!(f.inf_preimage(&rat(1, 2)).unwrap(), rat(1, 2));
    }

    #[test]
    fn power_eval_and_preimage() {
        let f = PowerFn { exponent: 2 };
        assert_eq!(f.value(&rat(1, 2)).unwrap(), rat(1, 4));
        assert_eq!(f.inf_preimage(&rat(1, 4)).unwrap(), rat(1, 2));
        assert!(f.inf_preimage(&rat(1, 3)).is_err());
    }

    #[test]
    fn identity_preimage() {
        let f = Adf::identity();
        assert_eq!(f.inf_preimage(&rat(1, 3)).unwrap(), rat(1, 3));
        assert_eq!(f.inf_preimage(&Rat::zero()).unwrap(), Rat::zero());
        assert_eq!(f.inf_preimage(&Rat::one()).unwrap(), Rat::one());
    }

    #[test]
    fn increase_sets() {
        assert_eq!(Adf::identity().increase_set(), ClosedSetU::full());
        let step = Adf::step_at(&rat(1, 2)).unwrap();
        assert_eq!(step.increase_set(), ClosedSetU::point(rat(1, 2)).unwrap());
        // constant 0 on [0,1/2], affine to 1 on [1/2,1]
        let ramp = Adf::from_breakpoints(vec![
            Breakpoint { x: Rat::zero(), left: Rat::zero(), point: Rat::zero(), right: Rat::zero() },
            Breakpoint { x: rat(1, 2), left: Rat::zero(), point: Rat::zero(), right: Rat::zero() },
            Breakpoint { x: Rat::one(), left: Rat::one(), point: Rat::one(), right: Rat::one() },
        ])
        .unwrap();
        assert_eq!(
            ramp.increase_set(),
            ClosedSetU::new(vec![(rat(1, 2), Rat::one())]).unwrap()
        );
    }

    #[test]
    fn closed_set_adf_round_trip() {
        // full interval: identity
        let full = adf_from_closed_set(&ClosedSetU::full()).unwrap();
        assert_eq!(full, Adf::identity());
        // single atom: a step
        let atom = adf_from_closed_set(&ClosedSetU::point(rat(1, 2)).unwrap()).unwrap();
        assert_eq!(atom, Adf::step_at(&rat(1, 2)).unwrap());
        // two intervals of equal length: slope 2 on each, flat between
        let d = ClosedSetU::new(vec![(Rat::zero(), rat(1, 4)), (rat(3, 4), Rat::one())]).unwrap();
        let f = adf_from_closed_set(&d).unwrap();
        assert_eq!(f.eval(&rat(1, 8), Side::Point).unwrap(), rat(1, 4));
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), rat(1, 2));
        assert_eq!(f.eval(&rat(7, 8), Side::Point).unwrap(), rat(3, 4));
        assert_eq!(f.increase_set(), d);
    }

    #[test]
    fn interpolation_of_step() {
        let step = Adf::step_at(&rat(1, 2)).unwrap();
        // stage 1: grid {0, 1/2, 1} (the jump exceeds 1/1? no: jump = 1 > 1 is false;
        // but 1/2 = grid point anyway)
        let g1 = Adf::interpolate_stage(&step, 1).unwrap();
        assert!(g1.is_continuous());
        assert_eq!(g1.eval(&rat(1, 4), Side::Point).unwrap(), rat(1, 2));
        assert_eq!(g1.eval(&rat(3, 4), Side::Point).unwrap(), Rat::one());
        // stage 2: grid {0, 1/3, 1/2, 2/3, 1}; ramp on [1/3, 1/2]
        let g2 = Adf::interpolate_stage(&step, 2).unwrap();
        assert_eq!(g2.eval(&rat(1, 3), Side::Point).unwrap(), Rat::zero());
        assert_eq!(g2.eval(&rat(5, 12), Side::Point).unwrap(), rat(1, 2));
        assert_eq!(g2.eval(&rat(1, 2), Side::Point).unwrap(), Rat::one());
    }

    #[test]
    fn olsen_uniform_case() {
        // masses 1/4 + 1/4 + 1/2 with equal densities: the identity
        let f = olsen_constraint_adf(
            (Rat::zero(), rat(1, 4)),
            (rat(1, 4), rat(1, 2)),
            &rat(1, 4),
            (rat(1, 2), Rat::one()),
        )
        .unwrap();
        assert_eq!(f, Adf::identity());
    }

    #[test]
    fn olsen_hand_solved() {
        // x0 = 1/8: c_I = c_J = 1/2, c_K = 3/2
        let f = olsen_constraint_adf(
            (Rat::zero(), rat(1, 4)),
            (rat(1, 4), rat(1, 2)),
            &rat(1, 8),
            (rat(1, 2), Rat::one()),
        )
        .unwrap();
        assert_eq!(f.eval(&rat(1, 4), Side::Point).unwrap(), rat(1, 8));
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), rat(1, 4));
        assert_eq!(f.eval(&rat(3, 4), Side::Point).unwrap(), rat(5, 8));
    }

    #[test]
    fn olsen_zero_frequency() {
        let f = olsen_constraint_adf(
            (Rat::zero(), rat(1, 4)),
            (rat(1, 4), rat(1, 2)),
            &Rat::zero(),
            (rat(1, 2), Rat::one()),
        )
        .unwrap();
        assert_eq!(f.eval(&rat(1, 2), Side::Point).unwrap(), Rat::zero());
        assert_eq!(f.eval(&rat(3, 4), Side::Point).unwrap(), rat(1, 2));
    }

    #[test]
    fn olsen_infeasible() {
        // x0 too large for K to absorb: c_K would be negative only if 1 - 2 x0 < 0,
        // impossible for x0 <= 1/2; instead make K tiny and x0 = 1/2 feasible, so
        // check the disjointness guard instead
        let r = olsen_constraint_adf(
            (Rat::zero(), rat(1, 2)),
            (rat(1, 4), rat(3, 4)),
            &rat(1, 8),
            (rat(3, 4), Rat::one()),
        );
        assert!(r.is_err());
    }

    #[test]
    fn closed_set_parse_and_hausdorff() {
        let d = ClosedSetU::parse("[0,1/4],[3/4,1]").unwrap();
        assert_eq!(d.components().len(), 2);
        let e = ClosedSetU::parse("[0,1/4],[0.7,1]").unwrap();
        // directed distances: components differ only on the right block start
        let h = d.hausdorff_distance(&e).unwrap();
        assert_eq!(h, rat(1, 20));
        // touching components merge
        let m = ClosedSetU::parse("[0,1/2],[1/2,1]").unwrap();
        assert_eq!(m, ClosedSetU::full());
    }

    #[test]
    fn adf_json_round_trip() {
        let d = ClosedSetU::parse("[0,1/4],[1/2,1/2],[3/4,1]").unwrap();
        let f = adf_from_closed_set(&d).unwrap();
        let j = AdfJson::from(&f);
        let back = Adf::try_from(&j).unwrap();
        assert_eq!(f, back);
    }
}
