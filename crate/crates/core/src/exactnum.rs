//! Exact arithmetic over `Q` and real quadratic extensions `Q(sqrt(d))`.
//!
//! Every scalar is `a + b*sqrt(d)` with `a`, `b` arbitrary-precision
//! rationals and `d` a squarefree integer >= 2 fixed per computation
//! context. Signs, floors and comparisons are computed exactly by rational
//! sign analysis; there is no floating-point fallback in this module.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type BigRational = num_rational::BigRational;

/// Largest supported field discriminant; keeps the squarefree check cheap.
pub const MAX_FIELD_D: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactNumError {
    #[error("operands live in different quadratic fields: sqrt({0}) vs sqrt({1})")]
    MismatchedField(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("field parameter {0} is not a squarefree integer >= 2 (or exceeds {MAX_FIELD_D})")]
    InvalidField(u64),
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

fn is_squarefree(d: u64) -> bool {
    if d < 2 || d > MAX_FIELD_D {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// An exact element `a + b*sqrt(d)` of the quadratic field `Q(sqrt(d))`.
///
/// Rationals are the `b = 0` elements and are treated as field-agnostic:
/// they combine with scalars of any `d`. A genuine irrational part pins the
/// field, and mixing two different pinned fields is an error rather than a
/// lift to a compositum.
#[derive(Debug, Clone)]
pub struct QuadExtScalar {
    a: BigRational,
    b: BigRational,
    d: u64,
}

impl QuadExtScalar {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self, ExactNumError> {
        if !is_squarefree(d) {
            return Err(ExactNumError::InvalidField(d));
        }
        Ok(QuadExtScalar { a, b, d })
    }

    /// A pure rational placed in the field `Q(sqrt(d))`.
    pub fn rational(a: BigRational, d: u64) -> Result<Self, ExactNumError> {
        Self::new(a, BigRational::zero(), d)
    }

    pub fn from_integer(n: i64, d: u64) -> Result<Self, ExactNumError> {
        Self::rational(BigRational::from_integer(BigInt::from(n)), d)
    }

    pub fn from_ratio(num: i64, den: i64, d: u64) -> Result<Self, ExactNumError> {
        assert!(den != 0, "zero denominator");
        Self::rational(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            d,
        )
    }

    pub fn zero(d: u64) -> Self {
        QuadExtScalar {
            a: BigRational::zero(),
            b: BigRational::zero(),
            d,
        }
    }

    pub fn one(d: u64) -> Self {
        QuadExtScalar {
            a: BigRational::one(),
            b: BigRational::zero(),
            d,
        }
    }

    /// `sqrt(d)` itself, scaled by `b`.
    pub fn sqrt_part(b: BigRational, d: u64) -> Result<Self, ExactNumError> {
        Self::new(BigRational::zero(), b, d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    pub fn field_d(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The rational value when `b = 0`.
    pub fn as_rational(&self) -> Option<&BigRational> {
        if self.b.is_zero() {
            Some(&self.a)
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn unified_field(&self, other: &Self) -> Result<u64, ExactNumError> {
        if self.d == other.d || other.b.is_zero() {
            Ok(self.d)
        } else if self.b.is_zero() {
            Ok(other.d)
        } else {
            Err(ExactNumError::MismatchedField(self.d, other.d))
        }
    }

    pub fn qadd(&self, other: &Self) -> Result<Self, ExactNumError> {
        let d = self.unified_field(other)?;
        Ok(QuadExtScalar {
            a: &self.a + &other.a,
            b: &self.b + &other.b,
            d,
        })
    }

    pub fn qsub(&self, other: &Self) -> Result<Self, ExactNumError> {
        let d = self.unified_field(other)?;
        Ok(QuadExtScalar {
            a: &self.a - &other.a,
            b: &self.b - &other.b,
            d,
        })
    }

    pub fn qmul(&self, other: &Self) -> Result<Self, ExactNumError> {
        let d = self.unified_field(other)?;
        let dq = BigRational::from_integer(BigInt::from(d));
        Ok(QuadExtScalar {
            a: &self.a * &other.a + (&self.b * &other.b) * &dq,
            b: &self.a * &other.b + &self.b * &other.a,
            d,
        })
    }

    pub fn qdiv(&self, other: &Self) -> Result<Self, ExactNumError> {
        let inv = other.qinv()?;
        let d = self.unified_field(other)?;
        let mut out = self.qmul(&inv)?;
        out.d = d;
        Ok(out)
    }

    /// Multiplicative inverse via the conjugate: `1/(a+b√d) = (a-b√d)/(a²-b²d)`.
    pub fn qinv(&self) -> Result<Self, ExactNumError> {
        if self.is_zero() {
            return Err(ExactNumError::DivisionByZero);
        }
        let dq = BigRational::from_integer(BigInt::from(self.d));
        let norm = &self.a * &self.a - (&self.b * &self.b) * &dq;
        // norm = 0 would force sqrt(d) rational; squarefree d >= 2 rules it out.
        assert!(!norm.is_zero(), "zero field norm for nonzero element");
        Ok(QuadExtScalar {
            a: &self.a / &norm,
            b: -(&self.b / &norm),
            d: self.d,
        })
    }

    pub fn qneg(&self) -> Self {
        QuadExtScalar {
            a: -self.a.clone(),
            b: -self.b.clone(),
            d: self.d,
        }
    }

    /// Exact sign of the real value `a + b*sqrt(d)`: -1, 0 or +1.
    pub fn qsign(&self) -> i32 {
        let sa = rat_sign(&self.a);
        let sb = rat_sign(&self.b);
        if sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        if sa == sb {
            return sa;
        }
        // Opposite signs: compare a^2 against b^2 d. The value has the sign
        // of a exactly when |a| > |b| sqrt(d).
        let dq = BigRational::from_integer(BigInt::from(self.d));
        let lhs = &self.a * &self.a;
        let rhs = (&self.b * &self.b) * &dq;
        match lhs.cmp(&rhs) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.qsign() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.qsign() < 0
    }

    pub fn abs(&self) -> Self {
        if self.is_negative() {
            self.qneg()
        } else {
            self.clone()
        }
    }

    /// Exact floor of the real value.
    pub fn floor_int(&self) -> BigInt {
        if self.b.is_zero() {
            return self.a.floor().to_integer();
        }
        // floor(b sqrt(d)) for the irrational part, then a two-candidate fix
        // against the exact value.
        let dq = BigRational::from_integer(BigInt::from(self.d));
        let sq = (&self.b * &self.b) * &dq; // (b sqrt(d))^2, non-negative
        let root_floor = rational_sqrt_floor(&sq);
        let m = if self.b.is_positive() {
            root_floor
        } else {
            // b sqrt(d) is a negative irrational, so floor = -(floor of
            // the absolute value) - 1.
            -root_floor - BigInt::one()
        };
        let mut cand = self.a.floor().to_integer() + m;
        // The estimate is off by at most 1 in each part; correct exactly.
        for _ in 0..4 {
            let next = &cand + BigInt::one();
            if self.cmp_int(&next) >= 0 {
                cand = next;
            } else if self.cmp_int(&cand) < 0 {
                cand -= BigInt::one();
            } else {
                return cand;
            }
        }
        unreachable!("floor correction did not converge");
    }

    fn cmp_int(&self, n: &BigInt) -> i32 {
        let shifted = QuadExtScalar {
            a: &self.a - BigRational::from_integer(n.clone()),
            b: self.b.clone(),
            d: self.d,
        };
        shifted.qsign()
    }

    /// `x - floor(x)`, always in `[0, 1)`.
    pub fn qmod1(&self) -> Self {
        // Orbit iteration adds values of [0,1) together, so the common
        // cases are handled by plain sign comparisons.
        if self.qsign() >= 0 {
            if self.cmp_int(&BigInt::one()) < 0 {
                return self.clone();
            }
            let shifted = QuadExtScalar {
                a: &self.a - BigRational::one(),
                b: self.b.clone(),
                d: self.d,
            };
            if shifted.cmp_int(&BigInt::one()) < 0 {
                return shifted;
            }
        }
        let f = BigRational::from_integer(self.floor_int());
        QuadExtScalar {
            a: &self.a - f,
            b: self.b.clone(),
            d: self.d,
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.qsub(&other).map(|r| r.qsign() <= 0).unwrap_or(true) {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.qsub(&other).map(|r| r.qsign() >= 0).unwrap_or(true) {
            self
        } else {
            other
        }
    }

    /// Approximate value, for rendering only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        let b = self.b.to_f64().unwrap_or(f64::NAN);
        a + b * (self.d as f64).sqrt()
    }

    /// Parses `"p/q"`, `"p/q+r/s*sqrt(d)"`, `"r/s*sqrt(d)"` and the same
    /// with `-` signs; integers may omit `/q`. A rational string lands in
    /// the field `default_d`.
    pub fn parse(text: &str, default_d: u64) -> Result<Self, ExactNumError> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(ExactNumError::Parse(text.to_string()));
        }
        // Split at the last top-level '+' or '-' that separates two terms.
        let bytes = s.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-') && bytes[i - 1] as char != '/' {
                // Only a term boundary when a sqrt term follows.
                if s[i + 1..].contains("sqrt") {
                    split = Some(i);
                    break;
                }
            }
        }
        let (rat_text, irr_text) = match split {
            Some(i) => (&s[..i], &s[i..]),
            None => {
                if s.contains("sqrt") {
                    ("", &s[..])
                } else {
                    (&s[..], "")
                }
            }
        };
        let a = if rat_text.is_empty() {
            BigRational::zero()
        } else {
            parse_rational(rat_text).ok_or_else(|| ExactNumError::Parse(text.to_string()))?
        };
        if irr_text.is_empty() {
            return Self::rational(a, default_d);
        }
        let (coef_text, d_text) = irr_text
            .split_once("sqrt(")
            .ok_or_else(|| ExactNumError::Parse(text.to_string()))?;
        let d_text = d_text
            .strip_suffix(')')
            .ok_or_else(|| ExactNumError::Parse(text.to_string()))?;
        let d: u64 = d_text
            .parse()
            .map_err(|_| ExactNumError::Parse(text.to_string()))?;
        let coef_text = coef_text.strip_suffix('*').unwrap_or(coef_text);
        let b = match coef_text {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            t => parse_rational(t).ok_or_else(|| ExactNumError::Parse(text.to_string()))?,
        };
        Self::new(a, b, d)
    }
}

fn parse_rational(t: &str) -> Option<BigRational> {
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.parse().ok()?;
            let q: BigInt = q.parse().ok()?;
            if q.is_zero() {
                None
            } else {
                Some(BigRational::new(p, q))
            }
        }
        None => {
            let p: BigInt = t.parse().ok()?;
            Some(BigRational::from_integer(p))
        }
    }
}

fn rat_sign(r: &BigRational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// Floor of `sqrt(r)` for a non-negative rational, exactly.
fn rational_sqrt_floor(r: &BigRational) -> BigInt {
    assert!(!r.is_negative());
    let p = r.numer().to_biguint().expect("non-negative numerator");
    let q = r.denom().to_biguint().expect("positive denominator");
    // floor(sqrt(p/q)) differs from isqrt(p div q) by at most 1.
    let mut n = BigInt::from((&p / &q).sqrt());
    let value = |n: &BigInt| -> Ordering {
        // compare n^2 with p/q, i.e. n^2 q with p
        let n2q = n * n * BigInt::from(q.clone());
        n2q.cmp(&BigInt::from(p.clone()))
    };
    while value(&(&n + BigInt::one())) != Ordering::Greater {
        n += BigInt::one();
    }
    while value(&n) == Ordering::Greater {
        n -= BigInt::one();
    }
    n
}

impl PartialEq for QuadExtScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.a != other.a || self.b != other.b {
            return false;
        }
        // Rationals are equal across fields; irrational parts pin d.
        self.b.is_zero() || self.d == other.d
    }
}

impl Eq for QuadExtScalar {}

impl Hash for QuadExtScalar {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
        if !self.b.is_zero() {
            self.d.hash(state);
        }
    }
}

impl PartialOrd for QuadExtScalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.qsub(other).ok()?;
        Some(match diff.qsign() {
            s if s < 0 => Ordering::Less,
            0 => Ordering::Equal,
            _ => Ordering::Greater,
        })
    }
}

impl fmt::Display for QuadExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        if self.a.is_zero() {
            if self.b.is_negative() {
                return write!(f, "-{}*sqrt({})", rat_text(&-self.b.clone()), self.d);
            }
            return write!(f, "{}*sqrt({})", rat_text(&self.b), self.d);
        }
        if self.b.is_negative() {
            write!(
                f,
                "{}-{}*sqrt({})",
                rat_text(&self.a),
                rat_text(&-self.b.clone()),
                self.d
            )
        } else {
            write!(
                f,
                "{}+{}*sqrt({})",
                rat_text(&self.a),
                rat_text(&self.b),
                self.d
            )
        }
    }
}

fn rat_text(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn s(a: (i64, i64), b: (i64, i64), d: u64) -> QuadExtScalar {
        QuadExtScalar::new(q(a.0, a.1), q(b.0, b.1), d).unwrap()
    }

    #[test]
    fn conjugate_product() {
        // (1+sqrt(2)) * (1-sqrt(2)) = -1
        let x = s((1, 1), (1, 1), 2);
        let y = s((1, 1), (-1, 1), 2);
        assert_eq!(x.qmul(&y).unwrap(), QuadExtScalar::from_integer(-1, 2).unwrap());
    }

    #[test]
    fn additive_identity() {
        let x = s((3, 7), (2, 5), 2);
        let z = QuadExtScalar::zero(2);
        assert_eq!(z.qadd(&x).unwrap(), x);
    }

    #[test]
    fn self_division() {
        let x = s((3, 1), (1, 1), 5);
        assert_eq!(x.qdiv(&x).unwrap(), QuadExtScalar::one(5));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(s((3, 1), (-2, 1), 2).qsign(), 1); // 9 > 8
        assert_eq!(QuadExtScalar::zero(2).qsign(), 0);
        assert_eq!(s((1, 1), (-1, 1), 2).qsign(), -1); // 1 < 2
    }

    #[test]
    fn mod1_examples() {
        // (1+sqrt(5))/2 -> (sqrt(5)-1)/2
        let x = s((1, 2), (1, 2), 5);
        assert_eq!(x.qmod1(), s((-1, 2), (1, 2), 5));
        // 7/3 -> 1/3
        let y = QuadExtScalar::from_ratio(7, 3, 5).unwrap();
        assert_eq!(y.qmod1(), QuadExtScalar::from_ratio(1, 3, 5).unwrap());
        // -1/4 -> 3/4
        let z = QuadExtScalar::from_ratio(-1, 4, 5).unwrap();
        assert_eq!(z.qmod1(), QuadExtScalar::from_ratio(3, 4, 5).unwrap());
    }

    #[test]
    fn mod1_in_unit_interval() {
        for (a, b) in [((17, 3), (-9, 4)), ((-22, 7), (5, 2)), ((0, 1), (-1, 3))] {
            let x = s(a, b, 3);
            let m = x.qmod1();
            assert!(m.qsign() >= 0);
            assert!(m.qsub(&QuadExtScalar::one(3)).unwrap().qsign() < 0);
            let diff = x.qsub(&m).unwrap();
            assert!(diff.is_rational());
            assert!(diff.as_rational().unwrap().is_integer());
        }
    }

    #[test]
    fn mismatched_fields_reject() {
        let x = s((1, 1), (1, 1), 2);
        let y = s((1, 1), (1, 1), 3);
        assert!(matches!(
            x.qadd(&y),
            Err(ExactNumError::MismatchedField(2, 3))
        ));
        // but rationals are field-agnostic
        let r = QuadExtScalar::from_ratio(1, 2, 3).unwrap();
        assert_eq!(x.qadd(&r).unwrap(), s((3, 2), (1, 1), 2));
    }

    #[test]
    fn invalid_fields_reject() {
        assert!(QuadExtScalar::from_integer(1, 4).is_err());
        assert!(QuadExtScalar::from_integer(1, 12).is_err());
        assert!(QuadExtScalar::from_integer(1, 1).is_err());
        assert!(QuadExtScalar::from_integer(1, 10).is_ok());
    }

    #[test]
    fn parse_round_trip() {
        for text in [
            "1/2",
            "-7/3",
            "5",
            "1/2+1/3*sqrt(2)",
            "-1/2-3*sqrt(5)",
            "2*sqrt(3)",
            "-1*sqrt(2)",
        ] {
            let v = QuadExtScalar::parse(text, 2).unwrap();
            let again = QuadExtScalar::parse(&v.to_string(), 2).unwrap();
            assert_eq!(v, again, "round trip through {text:?}");
        }
    }

    /// 100-digit decimal oracle for the sign: scale by 10^100 and compare
    /// integer parts, using exact integer square roots.
    fn sign_oracle(x: &QuadExtScalar) -> Option<i32> {
        let scale = BigInt::from(10u32).pow(100);
        // a*10^100 as integer floor
        let a_scaled = (x.rational_part() * BigRational::from_integer(scale.clone())).floor();
        // b*sqrt(d)*10^100: sqrt(b^2 d 10^200) with sign of b
        let dq = BigRational::from_integer(BigInt::from(x.field_d()));
        let b2d = x.irrational_part() * x.irrational_part() * dq
            * BigRational::from_integer(&scale * &scale);
        let root = rational_sqrt_floor(&b2d);
        let b_scaled = if x.irrational_part().is_negative() {
            -root
        } else {
            root
        };
        let total = a_scaled.to_integer() + b_scaled;
        // Abstain within 2 ulps of zero: the floor truncation could flip it.
        if total.magnitude() <= &BigUint::from(2u32) {
            return None;
        }
        Some(if total.is_negative() { -1 } else { 1 })
    }

    #[test]
    fn sign_matches_high_precision_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        for _ in 0..10_000 {
            let a = q(rng.gen_range(-50..=50), rng.gen_range(1..=50));
            let b = q(rng.gen_range(-50..=50), rng.gen_range(1..=50));
            let d = *[2u64, 3, 5, 7].iter().nth(rng.gen_range(0..4)).unwrap();
            let x = QuadExtScalar::new(a, b, d).unwrap();
            if x.is_zero() {
                assert_eq!(x.qsign(), 0);
                continue;
            }
            if let Some(expect) = sign_oracle(&x) {
                assert_eq!(x.qsign(), expect, "sign of {x}");
                checked += 1;
            }
        }
        assert!(checked > 9_000);
    }

    #[test]
    fn floor_of_negative_irrational() {
        // -sqrt(2) ~ -1.414: floor -2
        let x = s((0, 1), (-1, 1), 2);
        assert_eq!(x.floor_int(), BigInt::from(-2));
        // 3 - sqrt(2) ~ 1.586: floor 1
        let y = s((3, 1), (-1, 1), 2);
        assert_eq!(y.floor_int(), BigInt::from(1));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_scalar(d: u64) -> impl Strategy<Value = QuadExtScalar> {
            (-40i64..=40, 1i64..=20, -40i64..=40, 1i64..=20).prop_map(move |(an, ad, bn, bd)| {
                QuadExtScalar::new(q(an, ad), q(bn, bd), d).unwrap()
            })
        }

        fn q(n: i64, d: i64) -> BigRational {
            BigRational::new(BigInt::from(n), BigInt::from(d))
        }

        proptest! {
            #[test]
            fn field_axioms(x in arb_scalar(2), y in arb_scalar(2), z in arb_scalar(2)) {
                let assoc_l = x.qadd(&y).unwrap().qadd(&z).unwrap();
                let assoc_r = x.qadd(&y.qadd(&z).unwrap()).unwrap();
                prop_assert_eq!(assoc_l, assoc_r);

                let massoc_l = x.qmul(&y).unwrap().qmul(&z).unwrap();
                let massoc_r = x.qmul(&y.qmul(&z).unwrap()).unwrap();
                prop_assert_eq!(massoc_l, massoc_r);

                let dist_l = x.qmul(&y.qadd(&z).unwrap()).unwrap();
                let dist_r = x.qmul(&y).unwrap().qadd(&x.qmul(&z).unwrap()).unwrap();
                prop_assert_eq!(dist_l, dist_r);

                if !x.is_zero() {
                    let inv = x.qinv().unwrap();
                    prop_assert_eq!(x.qmul(&inv).unwrap(), QuadExtScalar::one(2));
                }
            }

            #[test]
            fn mod1_invariant(x in arb_scalar(3)) {
                let m = x.qmod1();
                prop_assert!(m.qsign() >= 0);
                prop_assert!(m.qsub(&QuadExtScalar::one(3)).unwrap().qsign() < 0);
                let diff = x.qsub(&m).unwrap();
                prop_assert!(diff.as_rational().map(|r| r.is_integer()).unwrap_or(false));
            }
        }
    }
}
