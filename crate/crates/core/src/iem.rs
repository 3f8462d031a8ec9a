//! Interval exchange maps of the circle `R/Z`: exact orbit iteration,
//! singular sets, periodic-orbit and saddle-connection searches, and the
//! expansiveness verdict with re-checkable certificates.
//!
//! An exchange is presented by `n` interval lengths summing to 1 and a
//! permutation sending interval `i` to image slot `perm(i)`. Breakpoints
//! are the left endpoints `a_0 = 0, a_1, ...`; the map translates each
//! open interval. A breakpoint is singular when its one-sided image
//! limits differ as circle points.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exactnum::{ExactNumError, QuadExtScalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IemError {
    #[error("lengths must be positive and sum to 1 exactly")]
    BadLengths,
    #[error("permutation is not a bijection of 0..n")]
    BadPermutation,
    #[error("exactly one length per interval required")]
    BadArity,
    #[error("point lies on breakpoint {0} (outside the map's domain)")]
    DomainError(usize),
    #[error("scalar error: {0}")]
    Scalar(#[from] ExactNumError),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// A point of the circle `R/Z`, normalized into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CirclePoint(QuadExtScalar);

impl CirclePoint {
    pub fn new(x: QuadExtScalar) -> Self {
        CirclePoint(x.qmod1())
    }

    pub fn from_ratio(num: i64, den: i64, d: u64) -> Self {
        CirclePoint::new(QuadExtScalar::from_ratio(num, den, d).expect("valid field"))
    }

    pub fn value(&self) -> &QuadExtScalar {
        &self.0
    }

    pub fn into_value(self) -> QuadExtScalar {
        self.0
    }

    /// Circle metric `min(|x-y|, 1-|x-y|)`, exact.
    pub fn distance(&self, other: &CirclePoint) -> QuadExtScalar {
        let diff = self.0.qsub(&other.0).expect("same field").abs();
        let one = QuadExtScalar::one(diff.field_d());
        let comp = one.qsub(&diff).expect("same field");
        diff.min(comp)
    }

    pub fn translate(&self, t: &QuadExtScalar) -> CirclePoint {
        CirclePoint::new(self.0.qadd(t).expect("same field"))
    }
}

impl std::fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A bijection of `{0, .., n-1}`, stored as the position map
/// (interval `i` goes to image slot `perm[i]`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self, IemError> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(IemError::BadPermutation);
            }
            seen[v] = true;
        }
        Ok(Permutation(map))
    }

    /// From the one-line notation `(p(1) p(2) ... p(n))` with 1-based values.
    pub fn from_one_based(map: &[usize]) -> Result<Self, IemError> {
        let shifted: Vec<usize> = map
            .iter()
            .map(|&v| v.checked_sub(1).ok_or(IemError::BadPermutation))
            .collect::<Result<_, _>>()?;
        Permutation::new(shifted)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v] = i;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Irreducible: no proper prefix `{0..k}` maps onto itself. The trivial
    /// `n = 1` exchange is treated as reducible (its suspension carries no
    /// quasi-global section data).
    pub fn is_irreducible(&self) -> bool {
        let n = self.0.len();
        if n <= 1 {
            return false;
        }
        let mut max = 0;
        for k in 0..n - 1 {
            max = max.max(self.0[k]);
            if max == k {
                return false;
            }
        }
        true
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|&v| v + 1).collect()
    }
}

/// Classification of the breakpoints of an exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularData {
    /// Indices of singular breakpoints (one-sided limits differ).
    pub singular: Vec<usize>,
    /// Indices of removable breakpoints.
    pub removable: Vec<usize>,
}

impl SingularData {
    pub fn is_singular(&self, i: usize) -> bool {
        self.singular.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Yes => "Yes",
            Verdict::No => "No",
            Verdict::Unknown => "Unknown",
        }
    }
}

/// Side of a one-sided limit at a breakpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Minus,
    Plus,
}

/// Finite, independently re-checkable evidence attached to a verdict.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// `f^period(point) = point`, verified exactly.
    Periodic { point: CirclePoint, period: u64 },
    /// The exchange is a rotation by an exactly irrational constant.
    IrrationalRotation { rotation: QuadExtScalar },
    /// The exchange has no singular breakpoints (circle homeomorphism).
    NoSingularPoints,
    /// A separatrix of breakpoint `from` (side `side`) lands on singular
    /// breakpoint `to` after `steps` applications of the map.
    SaddleConnection {
        from: usize,
        side: Side,
        steps: u64,
        to: usize,
    },
    /// Searches were exhausted without finding an obstruction.
    SearchExhausted { budget: u64 },
    /// Both the periodic and the connection search came back clean.
    CleanSearches {
        periodic_depth: u64,
        connection_depth: u64,
    },
    /// Underlying surface cannot carry an expansive flow.
    InadmissibleSurface { signature: (u32, u32, u32) },
}

/// A three-valued verdict with its witness. `Yes` verdicts produced by
/// bounded searches are flagged `conditional` and depth-stamped.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub verdict: Verdict,
    pub conditional: bool,
    pub depth: Option<u64>,
    pub witness: Option<Witness>,
}

impl Certificate {
    pub fn yes_conditional(depth: u64, witness: Witness) -> Self {
        Certificate {
            verdict: Verdict::Yes,
            conditional: true,
            depth: Some(depth),
            witness: Some(witness),
        }
    }

    pub fn yes(witness: Witness) -> Self {
        Certificate {
            verdict: Verdict::Yes,
            conditional: false,
            depth: None,
            witness: Some(witness),
        }
    }

    pub fn no(witness: Witness) -> Self {
        Certificate {
            verdict: Verdict::No,
            conditional: false,
            depth: None,
            witness: Some(witness),
        }
    }

    pub fn unknown(depth: u64, witness: Option<Witness>) -> Self {
        Certificate {
            verdict: Verdict::Unknown,
            conditional: false,
            depth: Some(depth),
            witness,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut obj = json!({ "verdict": self.verdict.as_str() });
        let map = obj.as_object_mut().unwrap();
        if self.conditional {
            map.insert("conditional".into(), json!(true));
        }
        if let Some(depth) = self.depth {
            map.insert("depth".into(), json!(depth));
        }
        if let Some(w) = &self.witness {
            map.insert("witness".into(), witness_json(w));
        }
        obj
    }
}

fn witness_json(w: &Witness) -> Value {
    match w {
        Witness::Periodic { point, period } => json!({
            "kind": "periodic",
            "point": point.to_string(),
            "period": period,
        }),
        Witness::IrrationalRotation { rotation } => json!({
            "kind": "irrational_rotation",
            "rotation": rotation.to_string(),
        }),
        Witness::NoSingularPoints => json!({ "kind": "no_singular_points" }),
        Witness::SaddleConnection {
            from,
            side,
            steps,
            to,
        } => json!({
            "kind": "saddle_connection",
            "from_breakpoint": from,
            "side": match side { Side::Minus => "-", Side::Plus => "+" },
            "steps": steps,
            "to_breakpoint": to,
        }),
        Witness::SearchExhausted { budget } => json!({
            "kind": "search_exhausted",
            "budget": budget,
        }),
        Witness::CleanSearches {
            periodic_depth,
            connection_depth,
        } => json!({
            "kind": "clean_searches",
            "periodic_depth": periodic_depth,
            "connection_depth": connection_depth,
        }),
        Witness::InadmissibleSurface { signature } => json!({
            "kind": "inadmissible_surface",
            "signature": { "h": signature.0, "b": signature.1, "c": signature.2 },
        }),
    }
}

/// Result of an orbit iteration that may run into a breakpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitRun {
    /// `x, f(x), ..` — stops early at a breakpoint hit.
    pub points: Vec<CirclePoint>,
    /// Breakpoint reached, if any: `(step at which it was reached, index)`.
    pub hit: Option<(u64, usize)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeparationResult {
    /// Least `k` with `dist(f^k x, f^k y) > delta` (strict).
    Separated { step: u64, distance: QuadExtScalar },
    NotSeparated { horizon: u64 },
    /// One of the two orbits landed on a breakpoint before separating.
    OrbitHitBreakpoint {
        orbit: u8,
        step: u64,
        breakpoint: usize,
    },
}

impl SeparationResult {
    pub fn to_json(&self) -> Value {
        match self {
            SeparationResult::Separated { step, distance } => json!({
                "result": "separated", "step": step, "distance": distance.to_string(),
            }),
            SeparationResult::NotSeparated { horizon } => json!({
                "result": "not_separated", "horizon": horizon,
            }),
            SeparationResult::OrbitHitBreakpoint {
                orbit,
                step,
                breakpoint,
            } => json!({
                "result": "breakpoint_hit", "orbit": orbit, "step": step,
                "breakpoint": breakpoint,
            }),
        }
    }
}

/// An exchange of `n` intervals of the circle.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalExchange {
    lengths: Vec<QuadExtScalar>,
    perm: Permutation,
    field_d: u64,
    /// Left endpoints `a_0 = 0 < a_1 < ... < a_{n-1}`.
    breakpoints: Vec<QuadExtScalar>,
    /// Image breakpoints `b_0 = 0 < b_1 < ...` (slot left endpoints).
    image_breakpoints: Vec<QuadExtScalar>,
    /// Translation of interval `i`, reduced into `[0, 1)`.
    translations: Vec<QuadExtScalar>,
}

impl IntervalExchange {
    pub fn new(lengths: Vec<QuadExtScalar>, perm: Permutation) -> Result<Self, IemError> {
        let n = lengths.len();
        if n == 0 || perm.n() != n {
            return Err(IemError::BadArity);
        }
        let field_d = lengths
            .iter()
            .find(|l| !l.is_rational())
            .map(|l| l.field_d())
            .unwrap_or_else(|| lengths[0].field_d());
        let mut sum = QuadExtScalar::zero(field_d);
        for l in &lengths {
            if l.qsign() <= 0 {
                return Err(IemError::BadLengths);
            }
            sum = sum.qadd(l)?;
        }
        if sum != QuadExtScalar::one(field_d) {
            return Err(IemError::BadLengths);
        }
        // Domain breakpoints: partial sums of lengths.
        let mut breakpoints = Vec::with_capacity(n);
        let mut acc = QuadExtScalar::zero(field_d);
        for l in &lengths {
            breakpoints.push(acc.clone());
            acc = acc.qadd(l)?;
        }
        // Image slot widths: length of the interval landing in each slot.
        let inv = perm.inverse();
        let mut image_breakpoints = Vec::with_capacity(n);
        let mut acc = QuadExtScalar::zero(field_d);
        for k in 0..n {
            image_breakpoints.push(acc.clone());
            acc = acc.qadd(&lengths[inv.apply(k)])?;
        }
        let translations = (0..n)
            .map(|i| {
                image_breakpoints[perm.apply(i)]
                    .qsub(&breakpoints[i])
                    .map(|t| t.qmod1())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntervalExchange {
            lengths,
            perm,
            field_d,
            breakpoints,
            image_breakpoints,
            translations,
        })
    }

    pub fn from_one_based(
        lengths: Vec<QuadExtScalar>,
        perm: &[usize],
    ) -> Result<Self, IemError> {
        IntervalExchange::new(lengths, Permutation::from_one_based(perm)?)
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn field_d(&self) -> u64 {
        self.field_d
    }

    pub fn lengths(&self) -> &[QuadExtScalar] {
        &self.lengths
    }

    pub fn permutation(&self) -> &Permutation {
        &self.perm
    }

    pub fn breakpoints(&self) -> &[QuadExtScalar] {
        &self.breakpoints
    }

    pub fn image_breakpoints(&self) -> &[QuadExtScalar] {
        &self.image_breakpoints
    }

    pub fn translations(&self) -> &[QuadExtScalar] {
        &self.translations
    }

    pub fn min_length(&self) -> QuadExtScalar {
        self.lengths
            .iter()
            .cloned()
            .reduce(|a, b| a.min(b))
            .expect("nonempty")
    }

    /// Index of the breakpoint equal to `x`, if any.
    pub fn breakpoint_index(&self, x: &CirclePoint) -> Option<usize> {
        self.breakpoints.iter().position(|a| a == x.value())
    }

    /// Interval containing `x`, or the breakpoint it sits on.
    pub fn interval_of(&self, x: &CirclePoint) -> Result<usize, IemError> {
        // Largest i with a_i <= x; error when equal.
        let mut lo = 0usize;
        let mut hi = self.n(); // exclusive
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let cmp = x
                .value()
                .qsub(&self.breakpoints[mid])
                .expect("same field")
                .qsign();
            if cmp >= 0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if x.value() == &self.breakpoints[lo] {
            return Err(IemError::DomainError(lo));
        }
        Ok(lo)
    }

    /// The exchange applied to a non-breakpoint circle point.
    pub fn apply(&self, x: &CirclePoint) -> Result<CirclePoint, IemError> {
        let i = self.interval_of(x)?;
        Ok(x.translate(&self.translations[i]))
    }

    /// One-sided image limits `(f(a_i-), f(a_i+))` at breakpoint `i`.
    pub fn one_sided_limits(&self, i: usize) -> (CirclePoint, CirclePoint) {
        let n = self.n();
        let prev = (i + n - 1) % n;
        let a = CirclePoint::new(self.breakpoints[i].clone());
        let minus = a.translate(&self.translations[prev]);
        let plus = a.translate(&self.translations[i]);
        (minus, plus)
    }

    /// Exact classification of breakpoints into singular and removable.
    pub fn singular_set(&self) -> SingularData {
        let mut singular = Vec::new();
        let mut removable = Vec::new();
        for i in 0..self.n() {
            let (minus, plus) = self.one_sided_limits(i);
            if minus == plus {
                removable.push(i);
            } else {
                singular.push(i);
            }
        }
        SingularData {
            singular,
            removable,
        }
    }

    /// Applies the map, extending continuously through removable
    /// breakpoints; errors only on singular ones.
    fn apply_through(&self, x: &CirclePoint, sing: &SingularData) -> Result<CirclePoint, usize> {
        match self.interval_of(x) {
            Ok(i) => Ok(x.translate(&self.translations[i])),
            Err(IemError::DomainError(i)) => {
                if sing.is_singular(i) {
                    Err(i)
                } else {
                    Ok(x.translate(&self.translations[i]))
                }
            }
            Err(_) => unreachable!(),
        }
    }

    /// `[x, f(x), ..., f^k(x)]`; truncates at a breakpoint hit, reporting it.
    pub fn orbit(&self, x: &CirclePoint, k: u64) -> OrbitRun {
        let mut points = vec![x.clone()];
        let mut cur = x.clone();
        for step in 0..k {
            if let Some(idx) = self.breakpoint_index(&cur) {
                return OrbitRun {
                    points,
                    hit: Some((step, idx)),
                };
            }
            cur = self.apply(&cur).expect("checked off breakpoints");
            points.push(cur.clone());
        }
        // Report a terminal breakpoint as well: it blocks further iteration.
        let hit = self.breakpoint_index(&cur).map(|idx| (k, idx));
        OrbitRun { points, hit }
    }

    /// The inverse exchange: image slots become domain intervals.
    pub fn inverse(&self) -> IntervalExchange {
        let inv = self.perm.inverse();
        let lengths = (0..self.n())
            .map(|k| self.lengths[inv.apply(k)].clone())
            .collect();
        IntervalExchange::new(lengths, inv).expect("inverse data is valid")
    }

    pub fn is_rational(&self) -> bool {
        self.lengths.iter().all(|l| l.is_rational())
    }

    /// Common denominator of all lengths, when rational.
    pub fn common_denominator(&self) -> Option<BigInt> {
        if !self.is_rational() {
            return None;
        }
        let mut q = BigInt::one();
        for l in &self.lengths {
            let den = l.as_rational().unwrap().denom().clone();
            q = q.lcm(&den);
        }
        Some(q)
    }

    fn midpoint(&self, i: usize) -> CirclePoint {
        let half = QuadExtScalar::from_ratio(1, 2, self.field_d).unwrap();
        let off = self.lengths[i].qmul(&half).expect("same field");
        CirclePoint::new(self.breakpoints[i].qadd(&off).expect("same field"))
    }

    /// Checks `f^period(x) = x` with every intermediate point off the
    /// breakpoint set.
    pub fn verify_periodic(&self, x: &CirclePoint, period: u64) -> bool {
        if period == 0 {
            return false;
        }
        let mut cur = x.clone();
        for _ in 0..period {
            match self.apply(&cur) {
                Ok(next) => cur = next,
                Err(_) => return false,
            }
        }
        cur == *x
    }

    /// Searches for a periodic orbit. Rational exchanges are decided
    /// exactly via the grid; the 2-interval case falls to the rational /
    /// irrational rotation dichotomy; otherwise forward recurrence is
    /// checked from interval midpoints (plus any extra seeds) up to the
    /// budget.
    pub fn detect_periodic(&self, budget: u64) -> Certificate {
        self.detect_periodic_with_starts(budget, &[])
    }

    pub fn detect_periodic_with_starts(
        &self,
        budget: u64,
        extra_starts: &[CirclePoint],
    ) -> Certificate {
        if self.perm.is_identity() {
            let x = self.midpoint(0);
            debug_assert!(self.verify_periodic(&x, 1));
            return Certificate::yes(Witness::Periodic { point: x, period: 1 });
        }
        if let Some(q) = self.common_denominator() {
            // Orbits of c + j/q stay on a q-point grid avoiding all
            // breakpoints for c = 1/(2q); every such orbit is periodic
            // with period at most q.
            if let Some(qi) = q.to_string().parse::<i64>().ok().filter(|&v| v <= 50_000_000) {
                let x = CirclePoint::from_ratio(1, 2 * qi, self.field_d);
                let mut cur = x.clone();
                for p in 1..=qi as u64 {
                    cur = self.apply(&cur).expect("grid avoids breakpoints");
                    if cur == x {
                        return Certificate::yes(Witness::Periodic { point: x, period: p });
                    }
                }
                unreachable!("rational exchange must recur within the grid size");
            }
        }
        if self.n() == 2 {
            // Both 2-interval permutations are rotations; the rational case
            // was handled above, so the rotation constant is irrational.
            let rot = self.translations[0].clone();
            debug_assert!(!rot.is_rational());
            return Certificate::no(Witness::IrrationalRotation { rotation: rot });
        }
        let mut starts: Vec<CirclePoint> = (0..self.n()).map(|i| self.midpoint(i)).collect();
        starts.extend_from_slice(extra_starts);
        for x in &starts {
            if self.breakpoint_index(x).is_some() {
                continue;
            }
            let mut cur = x.clone();
            for p in 1..=budget {
                match self.apply(&cur) {
                    Ok(next) => cur = next,
                    Err(_) => break,
                }
                if cur == *x {
                    debug_assert!(self.verify_periodic(x, p));
                    return Certificate::yes(Witness::Periodic {
                        point: x.clone(),
                        period: p,
                    });
                }
            }
        }
        Certificate::unknown(budget, Some(Witness::SearchExhausted { budget }))
    }

    /// Semi-decides the existence of a saddle connection: iterates each
    /// one-sided image of each singular breakpoint forward, checking exact
    /// landings on singular breakpoints. Seeds equal to the circle anchor
    /// `0` are skipped: those limits are slot wrap-ends, not separatrices.
    pub fn saddle_connection_search(&self, depth: u64) -> Certificate {
        let sing = self.singular_set();
        if sing.singular.is_empty() {
            return Certificate::unknown(0, Some(Witness::NoSingularPoints));
        }
        let zero = CirclePoint::new(QuadExtScalar::zero(self.field_d));
        struct Seed {
            from: usize,
            side: Side,
            cur: CirclePoint,
            dead: bool,
        }
        let mut seeds = Vec::new();
        for &i in &sing.singular {
            let (minus, plus) = self.one_sided_limits(i);
            for (side, pt) in [(Side::Minus, minus), (Side::Plus, plus)] {
                if pt != zero {
                    seeds.push(Seed {
                        from: i,
                        side,
                        cur: pt,
                        dead: false,
                    });
                }
            }
        }
        // Breadth-first in the step count, so the witness is minimal.
        for step in 1..=depth {
            let mut all_dead = true;
            for seed in seeds.iter_mut() {
                if seed.dead {
                    continue;
                }
                if let Some(idx) = self.breakpoint_index(&seed.cur) {
                    if sing.is_singular(idx) {
                        return Certificate::yes(Witness::SaddleConnection {
                            from: seed.from,
                            side: seed.side,
                            steps: step,
                            to: idx,
                        });
                    }
                }
                match self.apply_through(&seed.cur, &sing) {
                    Ok(next) => {
                        seed.cur = next;
                        all_dead = false;
                    }
                    Err(idx) => {
                        seed.dead = true;
                        return Certificate::yes(Witness::SaddleConnection {
                            from: seed.from,
                            side: seed.side,
                            steps: step,
                            to: idx,
                        });
                    }
                }
            }
            if all_dead {
                break;
            }
        }
        Certificate::unknown(depth, Some(Witness::SearchExhausted { budget: depth }))
    }

    /// Expansiveness of the exchange.
    ///
    /// `No` when there are no singular breakpoints (the map extends to a
    /// circle homeomorphism) or when a periodic orbit is certified.
    /// `Yes(conditional, depth)` when singular points exist and both the
    /// periodicity and the saddle-connection search come back clean to the
    /// given budget. `Unknown` otherwise.
    pub fn is_expansive(&self, budget: u64) -> Certificate {
        self.is_expansive_with_starts(budget, &[])
    }

    pub fn is_expansive_with_starts(
        &self,
        budget: u64,
        extra_starts: &[CirclePoint],
    ) -> Certificate {
        let sing = self.singular_set();
        if sing.singular.is_empty() {
            return Certificate::no(Witness::NoSingularPoints);
        }
        let periodic = self.detect_periodic_with_starts(budget, extra_starts);
        match periodic.verdict {
            Verdict::Yes => {
                return Certificate::no(periodic.witness.expect("periodic witness"));
            }
            Verdict::No => {
                // Exact no-periodic certificates only arise for rotations,
                // which have no singular points.
                unreachable!("irrational rotations have no singular points");
            }
            Verdict::Unknown => {}
        }
        let connections = self.saddle_connection_search(budget);
        if connections.verdict == Verdict::Yes {
            // A connection does not obstruct expansiveness by itself, but
            // it voids the minimality evidence backing a conditional Yes.
            return Certificate::unknown(budget, connections.witness);
        }
        Certificate::yes_conditional(
            budget,
            Witness::CleanSearches {
                periodic_depth: budget,
                connection_depth: budget,
            },
        )
    }

    /// First iterate separating `x` and `y` beyond `delta` (strict), up to
    /// the horizon. Breakpoint hits abort with a witness.
    pub fn separation_test(
        &self,
        x: &CirclePoint,
        y: &CirclePoint,
        delta: &QuadExtScalar,
        horizon: u64,
    ) -> SeparationResult {
        assert!(delta.qsign() > 0, "delta must be positive");
        let mut cx = x.clone();
        let mut cy = y.clone();
        for step in 0..=horizon {
            let dist = cx.distance(&cy);
            if dist.qsub(delta).expect("same field").qsign() > 0 {
                return SeparationResult::Separated {
                    step,
                    distance: dist,
                };
            }
            if step == horizon {
                break;
            }
            if let Some(idx) = self.breakpoint_index(&cx) {
                return SeparationResult::OrbitHitBreakpoint {
                    orbit: 0,
                    step,
                    breakpoint: idx,
                };
            }
            if let Some(idx) = self.breakpoint_index(&cy) {
                return SeparationResult::OrbitHitBreakpoint {
                    orbit: 1,
                    step,
                    breakpoint: idx,
                };
            }
            cx = self.apply(&cx).expect("off breakpoints");
            cy = self.apply(&cy).expect("off breakpoints");
        }
        SeparationResult::NotSeparated { horizon }
    }

    /// Re-presents the same circle map with the breakpoint `a_c` moved to
    /// the origin (conjugation by the rotation `x -> x - a_c`). When the
    /// rotated image slots wrap through 0 the wrapping interval is split,
    /// so the result may have one extra (removable) breakpoint.
    pub fn rotate_presentation(&self, c: usize) -> Result<IntervalExchange, IemError> {
        let n = self.n();
        assert!(c < n);
        if c == 0 {
            return Ok(self.clone());
        }
        let anchor = self.breakpoints[c].clone();
        // Pieces of the conjugated map: (start, length, translation).
        let mut pieces: Vec<(QuadExtScalar, QuadExtScalar, QuadExtScalar)> = Vec::new();
        for i in 0..n {
            let idx = (c + i) % n;
            let start = self.breakpoints[idx].qsub(&anchor).map(|v| v.qmod1())?;
            pieces.push((
                start,
                self.lengths[idx].clone(),
                self.translations[idx].clone(),
            ));
        }
        // Split any piece whose image wraps through 0.
        let one = QuadExtScalar::one(self.field_d);
        let mut split: Vec<(QuadExtScalar, QuadExtScalar, QuadExtScalar)> = Vec::new();
        for (start, len, t) in pieces {
            let img_start = start.qadd(&t)?.qmod1();
            let img_end_unwrapped = img_start.qadd(&len)?;
            if img_end_unwrapped.qsub(&one)?.qsign() > 0 {
                let first_len = one.qsub(&img_start)?;
                let second_len = len.qsub(&first_len)?;
                if first_len.qsign() > 0 && second_len.qsign() > 0 {
                    let mid = start.qadd(&first_len)?;
                    split.push((start, first_len, t.clone()));
                    split.push((mid, second_len, t));
                    continue;
                }
            }
            split.push((start, len, t));
        }
        split.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("same field"));
        let lengths: Vec<QuadExtScalar> = split.iter().map(|p| p.1.clone()).collect();
        // Rank the image starts to recover the permutation.
        let image_starts: Vec<QuadExtScalar> = split
            .iter()
            .map(|(s, _, t)| s.qadd(t).map(|v| v.qmod1()))
            .collect::<Result<_, _>>()?;
        let mut order: Vec<usize> = (0..split.len()).collect();
        order.sort_by(|&i, &j| {
            image_starts[i]
                .partial_cmp(&image_starts[j])
                .expect("same field")
        });
        let mut perm = vec![0usize; split.len()];
        for (rank, &piece) in order.iter().enumerate() {
            perm[piece] = rank;
        }
        IntervalExchange::new(lengths, Permutation::new(perm)?)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "iem/1",
            "n": self.n(),
            "field_d": self.field_d,
            "lengths": self.lengths.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
            "permutation": self.perm.one_based(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, IemError> {
        let field_d = v
            .get("field_d")
            .and_then(Value::as_u64)
            .ok_or_else(|| IemError::Invalid("missing field_d".into()))?;
        let lengths = v
            .get("lengths")
            .and_then(Value::as_array)
            .ok_or_else(|| IemError::Invalid("missing lengths".into()))?
            .iter()
            .map(|s| {
                s.as_str()
                    .ok_or_else(|| IemError::Invalid("length must be a string".into()))
                    .and_then(|s| QuadExtScalar::parse(s, field_d).map_err(IemError::from))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let perm: Vec<usize> = v
            .get("permutation")
            .and_then(Value::as_array)
            .ok_or_else(|| IemError::Invalid("missing permutation".into()))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| IemError::Invalid("permutation entries must be integers".into()))
            })
            .collect::<Result<_, _>>()?;
        IntervalExchange::from_one_based(lengths, &perm)
    }
}

/// A rotation by `alpha` presented as a 2-interval exchange.
pub fn rotation_iem(alpha: &QuadExtScalar) -> Result<IntervalExchange, IemError> {
    let a = alpha.qmod1();
    if a.qsign() == 0 {
        return Err(IemError::Invalid("rotation by 0 is not an exchange".into()));
    }
    let one = QuadExtScalar::one(a.field_d());
    let l0 = one.qsub(&a)?;
    IntervalExchange::from_one_based(vec![l0, a], &[2, 1])
}
