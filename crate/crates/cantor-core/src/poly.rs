//! Integer polynomials, value-set intersection densities, and sparsity
//! certificates.
//!
//! The density d(p, q, s, n) is the fraction of q-values in the window
//! [s, n] that are also p-values, computed by exact enumeration with
//! membership decided by certified monotone integer search. A pair
//! certificate is a computable bound N(m) such that windows longer than
//! N(m) have density below 1/m in a recorded orientation.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CantorError, Result};
use crate::numeric::{ceil_nth_root, Rat};

/// An integer polynomial, constant coefficient first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    /// Builds from coefficients (constant term first); trailing zeros trim.
    pub fn new(mut coeffs: Vec<BigInt>) -> Result<Self> {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().all(|c| c.is_zero()) {
            return Err(CantorError::Domain("the zero polynomial is not allowed".into()));
        }
        Ok(IntPolynomial { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        IntPolynomial::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// The identity polynomial X.
    pub fn identity() -> Self {
        IntPolynomial::from_i64(&[0, 1]).expect("X is a polynomial")
    }

    /// X^k.
    pub fn x_pow(k: u32) -> Self {
        let mut coeffs = vec![BigInt::zero(); k as usize + 1];
        coeffs[k as usize] = BigInt::one();
        IntPolynomial { coeffs }
    }

    pub fn is_identity(&self) -> bool {
        self.coeffs.len() == 2 && self.coeffs[0].is_zero() && self.coeffs[1].is_one()
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonempty coefficients")
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    /// Max of the coefficient absolute values.
    pub fn height(&self) -> BigUint {
        self.coeffs
            .iter()
            .map(|c| c.magnitude().clone())
            .max()
            .expect("nonempty coefficients")
    }

    /// Positive leading coefficient and degree >= 1, so the value sequence
    /// is eventually increasing and positive.
    pub fn eventually_increasing(&self) -> bool {
        self.degree() >= 1 && self.leading().is_positive()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_u64(&self, x: u64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    /// A certified index T: the values p(T), p(T+1), ... strictly increase.
    /// Uses a root bound on the forward difference p(x+1) - p(x).
    pub fn increasing_threshold(&self) -> Result<u64> {
        if !self.eventually_increasing() {
            return Err(CantorError::Domain(
                "polynomial is not eventually increasing".into(),
            ));
        }
        if self.degree() == 1 {
            return Ok(1);
        }
        // forward difference via binomial expansion
        let shifted = self.compose_linear(&BigInt::one(), &BigInt::one());
        let diff: Vec<BigInt> = shifted
            .coeffs
            .iter()
            .zip(self.coeffs.iter().chain(std::iter::repeat(&BigInt::zero())))
            .map(|(a, b)| a - b)
            .collect();
        let diff = IntPolynomial::new(diff)?;
        // all real roots of the difference lie within 1 + max |b_i| / |b_lead|
        let lead = diff.leading().magnitude().clone();
        let max_low = diff.coeffs[..diff.coeffs.len() - 1]
            .iter()
            .map(|c| c.magnitude().clone())
            .max()
            .unwrap_or_else(BigUint::zero);
        let bound = BigUint::one() + max_low.div_ceil(&lead);
        let t: u64 = (&bound)
            .try_into()
            .map_err(|_| CantorError::Resource("increasing threshold overflows u64".into()))?;
        Ok(t.max(1) + 1)
    }

    /// The least integer x >= 1 with p(x) = v, if one exists.
    pub fn integer_preimage(&self, v: &BigInt) -> Result<Option<u64>> {
        let t = self.increasing_threshold()?;
        for x in 1..=t {
            if &self.eval_u64(x) == v {
                return Ok(Some(x));
            }
        }
        if &self.eval_u64(t) >= v {
            return Ok(None);
        }
        // p strictly increasing beyond t: bracket then bisect
        let mut lo = t;
        let mut hi = t.max(1) * 2;
        while &self.eval_u64(hi) < v {
            lo = hi;
            hi = hi
                .checked_mul(2)
                .ok_or_else(|| CantorError::Resource("membership search exceeded u64".into()))?;
        }
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if &self.eval_u64(mid) < v {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok((&self.eval_u64(lo) == v).then_some(lo))
    }

    /// Whether v = p(x) for some integer x >= 1.
    pub fn contains_value(&self, v: &BigInt) -> Result<bool> {
        Ok(self.integer_preimage(v)?.is_some())
    }

    /// Distinct values p(x), x >= 1, landing in [s, n], sorted.
    pub fn values_in_window(&self, s: u64, n: u64) -> Result<Vec<BigInt>> {
        if s == 0 || s > n {
            return Err(CantorError::Domain(format!("bad window [{s}, {n}]")));
        }
        let t = self.increasing_threshold()?;
        let s_big = BigInt::from(s);
        let n_big = BigInt::from(n);
        let mut out = BTreeSet::new();
        let mut x = 1u64;
        loop {
            let v = self.eval_u64(x);
            if x > t && v > n_big {
                break;
            }
            if v >= s_big && v <= n_big {
                out.insert(v);
            }
            x += 1;
        }
        Ok(out.into_iter().collect())
    }

    /// p(aX + b), exact.
    pub fn compose_linear(&self, a: &BigInt, b: &BigInt) -> IntPolynomial {
        // Horner: acc = acc * (aX + b) + c_i
        let mut acc: Vec<BigInt> = vec![self.leading().clone()];
        for c in self.coeffs.iter().rev().skip(1) {
            let mut next = vec![BigInt::zero(); acc.len() + 1];
            for (i, t) in acc.iter().enumerate() {
                next[i + 1] += t * a;
                next[i] += t * b;
            }
            next[0] += c;
            acc = next;
        }
        while acc.len() > 1 && acc.last().map(|c| c.is_zero()).unwrap_or(false) {
            acc.pop();
        }
        IntPolynomial { coeffs: acc }
    }

    /// Renders like `X^2+3X-1`.
    pub fn display(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() && self.degree() > 0 {
                continue;
            }
            let mag = c.magnitude().to_string();
            let coeff_part = if i > 0 && mag == "1" { String::new() } else { mag };
            let var_part = match i {
                0 => String::new(),
                1 => "X".to_string(),
                _ => format!("X^{i}"),
            };
            let sign = if c.is_negative() {
                "-"
            } else if parts.is_empty() {
                ""
            } else {
                "+"
            };
            parts.push(format!("{sign}{coeff_part}{var_part}"));
        }
        parts.join("")
    }

    /// Parses `X`, `X^2+1`, `2X^3-X+4`, or a comma list of coefficients
    /// (constant term first).
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.contains(',') {
            let coeffs = s
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<BigInt>()
                        .map_err(|_| CantorError::Parse(format!("bad coefficient {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            return IntPolynomial::new(coeffs);
        }
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(CantorError::Parse("empty polynomial".into()));
        }
        let norm = compact.replace('x', "X");
        let mut terms: Vec<(usize, BigInt)> = Vec::new();
        let mut rest = norm.as_str();
        while !rest.is_empty() {
            let sign = if let Some(r) = rest.strip_prefix('-') {
                rest = r;
                -1
            } else {
                rest = rest.strip_prefix('+').unwrap_or(rest);
                1
            };
            let end = rest
                .char_indices()
                .find(|(i, c)| *i > 0 && (*c == '+' || *c == '-'))
                .map(|(i, _)| i)
                .unwrap_or(rest.len());
            let term = &rest[..end];
            rest = &rest[end..];
            let (coeff_str, pow) = match term.find('X') {
                None => (term, 0usize),
                Some(xi) => {
                    let after = &term[xi + 1..];
                    let pow = if let Some(p) = after.strip_prefix('^') {
                        p.parse::<usize>()
                            .map_err(|_| CantorError::Parse(format!("bad power in {term:?}")))?
                    } else if after.is_empty() {
                        1
                    } else {
                        return Err(CantorError::Parse(format!("bad term {term:?}")));
                    };
                    (&term[..xi], pow)
                }
            };
            let coeff: BigInt = if coeff_str.is_empty() {
                BigInt::one()
            } else {
                coeff_str
                    .parse()
                    .map_err(|_| CantorError::Parse(format!("bad coefficient in {term:?}")))?
            };
            terms.push((pow, coeff * sign));
        }
        let deg = terms.iter().map(|(p, _)| *p).max().unwrap_or(0);
        let mut coeffs = vec![BigInt::zero(); deg + 1];
        for (p, c) in terms {
            coeffs[p] += c;
        }
        IntPolynomial::new(coeffs)
    }
}

/// d(p, q, s, n): the fraction of q-values in [s, n] that are also p-values.
pub fn intersection_density(
    p: &IntPolynomial,
    q: &IntPolynomial,
    s: u64,
    n: u64,
) -> Result<Rat> {
    let q_values = q.values_in_window(s, n)?;
    if q_values.is_empty() {
        return Err(CantorError::Domain(format!(
            "q has no values in [{s}, {n}]"
        )));
    }
    let mut inter = 0u64;
    for v in &q_values {
        if p.contains_value(v)? {
            inter += 1;
        }
    }
    Ok(Rat::new(inter.into(), (q_values.len() as u64).into()))
}

/// Searches integer linear polynomials mu, lambda with coefficients bounded
/// by `coeff_bound` such that p(mu(X)) = q(lambda(X)) as exact coefficient
/// identities. A witness certifies the similarity p ~ q; absence within the
/// bound is not a disproof.
pub fn linear_composition_witness(
    p: &IntPolynomial,
    q: &IntPolynomial,
    coeff_bound: i64,
) -> Result<Option<(IntPolynomial, IntPolynomial)>> {
    if coeff_bound < 1 {
        return Err(CantorError::Domain("coefficient bound must be >= 1".into()));
    }
    if p.degree() != q.degree() {
        // linear composition preserves degree
        return Ok(None);
    }
    let b = coeff_bound;
    for a1 in (-b..=b).filter(|&a| a != 0) {
        for b1 in -b..=b {
            let left = p.compose_linear(&BigInt::from(a1), &BigInt::from(b1));
            for a2 in (-b..=b).filter(|&a| a != 0) {
                for b2 in -b..=b {
                    let right = q.compose_linear(&BigInt::from(a2), &BigInt::from(b2));
                    if left == right {
                        let mu = IntPolynomial::from_i64(&[b1, a1])?;
                        let lambda = IntPolynomial::from_i64(&[b2, a2])?;
                        return Ok(Some((mu, lambda)));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// The solution bound for p(x) = q(y) under the divisor-power estimate:
/// max{|x|, |y|} <= d^(2m^2/d - m) (m+1)^(3m/2d) (m/d+1)^(3m/2)
///                  (h+1)^((m^2+mn+m)/d + 2m),
/// evaluated exactly with rational exponents handled by integer root
/// extraction and outward rounding. Requires monic p, q with
/// deg p = n <= deg q = m and d > 1 dividing gcd(n, m); irreducibility of
/// p(X) - q(Y) is the caller's responsibility.
pub fn tengely_bound(p: &IntPolynomial, q: &IntPolynomial, d: u64) -> Result<BigUint> {
    if !p.is_monic() || !q.is_monic() {
        return Err(CantorError::Domain("both polynomials must be monic".into()));
    }
    let n = p.degree() as u64;
    let m = q.degree() as u64;
    if n > m {
        return Err(CantorError::Domain("expect deg p <= deg q".into()));
    }
    if n == 0 {
        return Err(CantorError::Domain("degenerate constant polynomial".into()));
    }
    let g = n.gcd(&m);
    if d <= 1 || g % d != 0 {
        return Err(CantorError::Domain(format!(
            "d = {d} must exceed 1 and divide gcd({n}, {m}) = {g}"
        )));
    }
    let h = p.height().max(q.height());
    if h.is_zero() {
        return Err(CantorError::Domain("zero height".into()));
    }
    // raise everything to the power 2d, then take the 2d-th root
    let root: u32 = (2 * d)
        .try_into()
        .map_err(|_| CantorError::Resource("divisor too large".into()))?;
    let e1 = 2 * m * m / d - m; // integer: d | m
    let e4 = (m * m + m * n + m) / d + 2 * m;
    let pow = |base: BigUint, exp: u64| -> Result<BigUint> {
        let exp: u32 = exp
            .try_into()
            .map_err(|_| CantorError::Resource("exponent overflow".into()))?;
        Ok(base.pow(exp))
    };
    let total = pow(BigUint::from(d), e1 * 2 * d)?
        * pow(BigUint::from(m + 1), 3 * m)?
        * pow(BigUint::from(m / d + 1), 3 * m * d)?
        * pow(h + BigUint::one(), e4 * 2 * d)?;
    Ok(ceil_nth_root(&total, root))
}

/// The route a pair certificate was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "kebab-case")]
pub enum CertificateRoute {
    /// sparse side against the identity polynomial:
    /// N(m) = ceil(max{4 k a* m / a_k, 8 m^2 / a_k})
    IdentityRoute { degree: u64, coeff_max: String, leading: String },
    /// bounded-solution route: N(m) = ceil(M / m)
    SolutionBound { bound: String },
}

/// Certifies d(sparse, dense, s, n) < 1/m whenever n - s > window_bound(m).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCertificate {
    pub route: CertificateRoute,
}

impl PairCertificate {
    /// The window-length bound N(m).
    pub fn window_bound(&self, m: u64) -> Result<BigUint> {
        if m == 0 {
            return Err(CantorError::Domain("m must be >= 1".into()));
        }
        match &self.route {
            CertificateRoute::IdentityRoute { degree, coeff_max, leading } => {
                let a_star: BigUint = coeff_max
                    .parse()
                    .map_err(|_| CantorError::Parse("bad certificate coefficient".into()))?;
                let a_k: BigUint = leading
                    .parse()
                    .map_err(|_| CantorError::Parse("bad certificate leading".into()))?;
                let m_big = BigUint::from(m);
                let t1 = BigUint::from(4u32) * degree * &a_star * &m_big;
                let t2 = BigUint::from(8u32) * &m_big * &m_big;
                Ok(t1.max(t2).div_ceil(&a_k))
            }
            CertificateRoute::SolutionBound { bound } => {
                let b: BigUint = bound
                    .parse()
                    .map_err(|_| CantorError::Parse("bad certificate bound".into()))?;
                Ok(b.div_ceil(&BigUint::from(m)))
            }
        }
    }
}

/// A crude reducibility screen for p(X) - q(Y): catches the blatant case
/// where q composed with a small linear polynomial reproduces p (a linear
/// factor in the X-Y plane). Full bivariate factorization is out of scope.
fn blatantly_reducible(p: &IntPolynomial, q: &IntPolynomial) -> bool {
    for a in [-1i64, 1] {
        for b in -4i64..=4 {
            if p == &q.compose_linear(&BigInt::from(a), &BigInt::from(b)) {
                return true;
            }
        }
    }
    false
}

/// Builds the certificate for an ordered pair: `sparse` is the later
/// (sparser) polynomial, `dense` the earlier one. Identity route when the
/// dense side is X; otherwise the bounded-solution route. Pairs fitting
/// neither route are unsupported and must be excluded from the set.
pub fn pair_bound_certificate(
    sparse: &IntPolynomial,
    dense: &IntPolynomial,
) -> Result<PairCertificate> {
    if sparse == dense {
        return Err(CantorError::Domain(
            "a certificate never pairs a polynomial with itself".into(),
        ));
    }
    if dense.is_identity() {
        if sparse.degree() < 2 {
            return Err(CantorError::Unsupported(
                "identity-route certificates need degree >= 2 on the sparse side".into(),
            ));
        }
        if !sparse.eventually_increasing() {
            return Err(CantorError::Unsupported(
                "sparse side must be eventually increasing".into(),
            ));
        }
        return Ok(PairCertificate {
            route: CertificateRoute::IdentityRoute {
                degree: sparse.degree() as u64,
                coeff_max: sparse.height().to_string(),
                leading: sparse.leading().magnitude().to_string(),
            },
        });
    }
    // bounded-solution route
    let (lo, hi) = if sparse.degree() <= dense.degree() {
        (sparse, dense)
    } else {
        (dense, sparse)
    };
    if !lo.is_monic() || !hi.is_monic() {
        return Err(CantorError::Unsupported(
            "bounded-solution route needs monic polynomials".into(),
        ));
    }
    let g = (lo.degree() as u64).gcd(&(hi.degree() as u64));
    if g <= 1 {
        return Err(CantorError::Unsupported(
            "bounded-solution route needs gcd of degrees > 1".into(),
        ));
    }
    if blatantly_reducible(lo, hi) || blatantly_reducible(hi, lo) {
        return Err(CantorError::Unsupported(
            "difference polynomial has an obvious linear factor".into(),
        ));
    }
    let bound = tengely_bound(lo, hi, g)?;
    Ok(PairCertificate {
        route: CertificateRoute::SolutionBound { bound: bound.to_string() },
    })
}

/// An ordered set of polynomials with pairwise sparsity certificates.
/// The first entry is always X; later entries are strictly sparser inside
/// earlier ones, witnessed by the certificates.
#[derive(Debug)]
pub struct SparsePolySet {
    polys: Vec<IntPolynomial>,
    /// keyed by (later index, earlier index)
    certificates: std::collections::BTreeMap<(usize, usize), PairCertificate>,
}

impl SparsePolySet {
    /// The singleton {X}.
    pub fn identity_only() -> Self {
        SparsePolySet {
            polys: vec![IntPolynomial::identity()],
            certificates: std::collections::BTreeMap::new(),
        }
    }

    /// Builds a set from explicit polynomials (X is prepended when absent),
    /// certifying every pair; any pair failing both routes is an error.
    pub fn from_polys(mut polys: Vec<IntPolynomial>) -> Result<Self> {
        if polys.first().map(|p| !p.is_identity()).unwrap_or(true) {
            polys.insert(0, IntPolynomial::identity());
        }
        let mut set = SparsePolySet::identity_only();
        for p in polys.into_iter().skip(1) {
            set.try_insert(p)?.ok_or_else(|| {
                CantorError::Unsupported("polynomial duplicates an existing entry".into())
            })?;
        }
        Ok(set)
    }

    pub fn polys(&self) -> &[IntPolynomial] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    pub fn certificate(&self, later: usize, earlier: usize) -> Option<&PairCertificate> {
        self.certificates.get(&(later, earlier))
    }

    /// Largest N(m) over all certified pairs among the first `count` polys.
    /// Zero when there are no pairs.
    pub fn max_window_bound(&self, count: usize, m: u64) -> Result<BigUint> {
        let mut best = BigUint::zero();
        for later in 1..count.min(self.polys.len()) {
            for earlier in 0..later {
                let cert = self.certificate(later, earlier).ok_or_else(|| {
                    CantorError::Unsupported(format!(
                        "missing certificate for pair ({later}, {earlier})"
                    ))
                })?;
                let b = cert.window_bound(m)?;
                if b > best {
                    best = b;
                }
            }
        }
        Ok(best)
    }

    /// Tries to add a polynomial, certifying it against all current
    /// members. Returns Ok(None) if it is similar to an existing member
    /// (collapsed as a duplicate), Err if some pair fits no route.
    fn try_insert(&mut self, p: IntPolynomial) -> Result<Option<()>> {
        if self.polys.contains(&p) {
            return Ok(None);
        }
        let h: i64 = u64::try_from(&p.height()).map(|v| v.min(2) as i64).unwrap_or(2);
        let witness_bound = h + 2;
        for existing in &self.polys {
            if linear_composition_witness(&p, existing, witness_bound)?.is_some() {
                return Ok(None);
            }
        }
        let mut new_certs = Vec::new();
        for (idx, existing) in self.polys.iter().enumerate() {
            let cert = pair_bound_certificate(&p, existing)?;
            new_certs.push((idx, cert));
        }
        let new_idx = self.polys.len();
        for (idx, cert) in new_certs {
            self.certificates.insert((new_idx, idx), cert);
        }
        self.polys.push(p);
        Ok(Some(()))
    }
}

/// Enumerates polynomials stage by stage (degree and coefficient caps grow
/// together), retaining those certifiable against everything retained so
/// far. Similar polynomials collapse; pairs fitting no certificate route
/// drop the candidate, mirroring the removal step of the construction.
pub fn build_explicit_polyset(stage_count: u64) -> Result<SparsePolySet> {
    if stage_count == 0 {
        return Err(CantorError::Domain("stage count must be >= 1".into()));
    }
    let mut set = SparsePolySet::identity_only();
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    seen.insert(IntPolynomial::identity().coefficients().to_vec());
    for stage in 1..=stage_count {
        let cap = stage as i64;
        for degree in 1..=stage as usize {
            // enumerate all coefficient tuples for this degree, then order by
            // (height, lex) so the smallest representative of each similarity
            // class is the one retained
            let mut candidates: Vec<(i64, Vec<i64>)> = Vec::new();
            for lead in 1..=cap {
                let mut low = vec![-cap; degree]; // a_{deg-1} .. a_0
                'tuples: loop {
                    let mut coeffs = vec![0i64; degree + 1];
                    coeffs[degree] = lead;
                    for (i, &v) in low.iter().enumerate() {
                        coeffs[degree - 1 - i] = v;
                    }
                    let height = coeffs.iter().map(|c| c.abs()).max().unwrap_or(0);
                    candidates.push((height, coeffs));
                    let mut pos = degree;
                    loop {
                        if pos == 0 {
                            break 'tuples;
                        }
                        pos -= 1;
                        if low[pos] < cap {
                            low[pos] += 1;
                            low[pos + 1..].iter_mut().for_each(|t| *t = -cap);
                            break;
                        }
                    }
                }
            }
            candidates.sort();
            for (_, coeffs) in candidates {
                let cand = IntPolynomial::from_i64(&coeffs)?;
                let key = cand.coefficients().to_vec();
                if cand.eventually_increasing() && !seen.contains(&key) {
                    seen.insert(key);
                    // a candidate that fits no certificate route is dropped
                    let _ = set.try_insert(cand);
                }
            }
        }
    }
    Ok(set)
}

/// Serialized polyset configuration.
#[derive(Debug, Serialize, Deserialize)]
pub struct PolySetJson {
    pub polys: Vec<Vec<String>>,
    pub certificates: Vec<PairCertificateJson>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairCertificateJson {
    pub later: usize,
    pub earlier: usize,
    #[serde(flatten)]
    pub certificate: PairCertificate,
}

impl From<&SparsePolySet> for PolySetJson {
    fn from(s: &SparsePolySet) -> Self {
        PolySetJson {
            polys: s
                .polys
                .iter()
                .map(|p| p.coefficients().iter().map(|c| c.to_string()).collect())
                .collect(),
            certificates: s
                .certificates
                .iter()
                .map(|(&(later, earlier), c)| PairCertificateJson {
                    later,
                    earlier,
                    certificate: c.clone(),
                })
                .collect(),
        }
    }
}
