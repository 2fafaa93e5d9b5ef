//! Toy symmetric pairing over discrete-log representations.
//!
//! `G1` and `G2` are both `Z_q` under addition, each element stored as its
//! discrete log with respect to a fixed generator. `GT` is the order-`q`
//! subgroup of `Z_p^*`, generated by `gt_gen`. The pairing is
//! `e(a, b) = gt_gen^(a*b mod q) mod p`, which is bilinear and non-degenerate
//! but offers no hiding at all: every algebraic identity can be checked
//! exactly.
//!
//! Protocol code never touches the representation directly; it goes through
//! [`PairingOps`], which is also where operation counting hooks in (see
//! [`Meter`]).

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, AddAssign};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

macro_rules! residue {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(u64);

        impl $name {
            /// Wraps a raw residue without range checks. Use the
            /// constructors on [`PairingParams`] for validated values.
            pub const fn new(value: u64) -> Self {
                Self(value)
            }

            pub const fn value(self) -> u64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(&self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse::<u64>().map(Self).map_err(serde::de::Error::custom)
            }
        }
    };
}

residue!(
    /// Exponent in `Z_q`.
    Scalar
);
residue!(
    /// Element of `G1`, stored as its discrete log. Identity is `0`.
    G1Elem
);
residue!(
    /// Element of `G2`, stored as its discrete log. Identity is `0`.
    G2Elem
);
residue!(
    /// Element of the order-`q` subgroup of `Z_p^*`.
    GtElem
);

impl GtElem {
    pub const ONE: GtElem = GtElem(1);
}

/// Public description of a toy pairing instance.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct PairingParams {
    q: u64,
    p: u64,
    gt_gen: u64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    q: Scalar,
    p: Scalar,
    gt_gen: Scalar,
}

impl TryFrom<RawParams> for PairingParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        PairingParams::new(raw.q.0, raw.p.0, raw.gt_gen.0)
    }
}

impl From<PairingParams> for RawParams {
    fn from(params: PairingParams) -> Self {
        RawParams {
            q: Scalar(params.q),
            p: Scalar(params.p),
            gt_gen: Scalar(params.gt_gen),
        }
    }
}

const MAX_COFACTOR: u64 = 4096;
const MAX_SEARCH_ATTEMPTS: usize = 100_000;
const MAX_BITS: u32 = 48;

impl PairingParams {
    /// Validates `(q, p, gt_gen)`: both moduli prime, `q | p - 1` and
    /// `gt_gen` of multiplicative order exactly `q`.
    pub fn new(q: u64, p: u64, gt_gen: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if (p - 1) % q != 0 {
            return Err(Error::InvalidParams(format!("{q} does not divide {p} - 1")));
        }
        if gt_gen == 0 || gt_gen >= p {
            return Err(Error::InvalidParams(format!("generator {gt_gen} not a unit mod {p}")));
        }
        // q prime, so g^q = 1 with g != 1 means the order is exactly q.
        if gt_gen == 1 || pow_mod(gt_gen, q, p) != 1 {
            return Err(Error::InvalidParams(format!(
                "{gt_gen} does not have order {q} mod {p}"
            )));
        }
        Ok(Self { q, p, gt_gen })
    }

    /// Completes a prime group order to full parameters: the smallest even
    /// cofactor `k` with `k*q + 1` prime, then the smallest integer `g >= 2`
    /// of order `q` modulo that prime.
    pub fn from_q(q: u64) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        for k in (2..=MAX_COFACTOR).step_by(2) {
            let Some(p) = q.checked_mul(k).and_then(|kq| kq.checked_add(1)) else {
                break;
            };
            if p >= 1 << 63 {
                break;
            }
            if !is_prime(p) {
                continue;
            }
            let gen = (2..p.min(1 << 16))
                .find(|&g| pow_mod(g, q, p) == 1)
                .or_else(|| (2..p).map(|h| pow_mod(h, k, p)).find(|&g| g != 1));
            if let Some(g) = gen {
                return Self::new(q, p, g);
            }
        }
        Err(Error::InvalidParams(format!("no prime p = kq + 1 with k <= {MAX_COFACTOR} for q = {q}")))
    }

    /// Deterministic parameter search for a `bits`-bit group order.
    pub fn generate(bits: u32, seed: u64) -> Result<Self> {
        if !(4..=MAX_BITS).contains(&bits) {
            return Err(Error::InvalidParams(format!("bits must be in 4..={MAX_BITS}, got {bits}")));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let lo = 1u64 << (bits - 1);
        let hi = 1u64 << bits;
        for _ in 0..MAX_SEARCH_ATTEMPTS {
            let candidate = rng.gen_range(lo..hi) | 1;
            if !is_prime(candidate) {
                continue;
            }
            if let Ok(params) = Self::from_q(candidate) {
                return Ok(params);
            }
        }
        Err(Error::ParamSearch { bits, attempts: MAX_SEARCH_ATTEMPTS })
    }

    /// `q = 11, p = 23, gt_gen = 2`; small enough for exhaustive checks.
    pub fn desk() -> Self {
        Self { q: 11, p: 23, gt_gen: 2 }
    }

    /// A 31-bit instance for randomized trials (`generate(31, 0)`).
    pub fn large() -> Self {
        Self { q: LARGE_Q, p: LARGE_P, gt_gen: LARGE_GEN }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn gt_gen(&self) -> GtElem {
        GtElem(self.gt_gen)
    }

    pub fn scalar(&self, value: u64) -> Scalar {
        Scalar(value % self.q)
    }

    pub fn g1(&self, value: u64) -> Result<G1Elem> {
        self.check_g1(G1Elem(value))
    }

    pub fn g2(&self, value: u64) -> Result<G2Elem> {
        self.check_g2(G2Elem(value))
    }

    pub fn gt(&self, value: u64) -> Result<GtElem> {
        self.check_gt(GtElem(value))
    }

    pub fn check_g1(&self, e: G1Elem) -> Result<G1Elem> {
        if e.0 < self.q {
            Ok(e)
        } else {
            Err(Error::InvalidElement { group: "G1", value: e.0 })
        }
    }

    pub fn check_g2(&self, e: G2Elem) -> Result<G2Elem> {
        if e.0 < self.q {
            Ok(e)
        } else {
            Err(Error::InvalidElement { group: "G2", value: e.0 })
        }
    }

    pub fn check_gt(&self, e: GtElem) -> Result<GtElem> {
        if e.0 != 0 && e.0 < self.p && pow_mod(e.0, self.q, self.p) == 1 {
            Ok(e)
        } else {
            Err(Error::InvalidElement { group: "GT", value: e.0 })
        }
    }

    pub fn scalar_add(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(add_mod(a.0, b.0, self.q))
    }

    pub fn scalar_sub(&self, a: Scalar, b: Scalar) -> Scalar {
        self.scalar_add(a, self.scalar_neg(b))
    }

    pub fn scalar_mul(&self, a: Scalar, b: Scalar) -> Scalar {
        Scalar(mul_mod(a.0, b.0, self.q))
    }

    pub fn scalar_neg(&self, a: Scalar) -> Scalar {
        Scalar((self.q - a.0 % self.q) % self.q)
    }

    /// Uniform draw from `Z_q^*`; zero draws are rejected and redrawn.
    pub fn random_nonzero_scalar<R: Rng + ?Sized>(&self, rng: &mut R) -> Scalar {
        loop {
            let v = rng.gen_range(0..self.q);
            if v != 0 {
                return Scalar(v);
            }
        }
    }

    pub fn random_g1_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> G1Elem {
        G1Elem(self.random_nonzero_scalar(rng).0)
    }

    pub fn random_g2_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> G2Elem {
        G2Elem(self.random_nonzero_scalar(rng).0)
    }

    /// Uniform element of `GT`.
    pub fn random_gt<R: Rng + ?Sized>(&self, rng: &mut R) -> GtElem {
        GtElem(pow_mod(self.gt_gen, rng.gen_range(0..self.q), self.p))
    }

    /// Uniform element of `GT` other than `excluded`.
    pub fn random_gt_except<R: Rng + ?Sized>(&self, rng: &mut R, excluded: GtElem) -> GtElem {
        loop {
            let t = self.random_gt(rng);
            if t != excluded {
                return t;
            }
        }
    }
}

// generate(31, 0), frozen so the instance does not depend on the search code.
const LARGE_Q: u64 = 1_277_931_859;
const LARGE_P: u64 = 23_002_773_463;
const LARGE_GEN: u64 = 14;

/// Group operations and the pairing, as seen by protocol code.
pub trait PairingOps {
    fn params(&self) -> &PairingParams;

    fn g1_add(&self, a: G1Elem, b: G1Elem) -> G1Elem;
    fn g1_sub(&self, a: G1Elem, b: G1Elem) -> G1Elem;
    fn g1_mul(&self, k: Scalar, a: G1Elem) -> G1Elem;

    fn g2_add(&self, a: G2Elem, b: G2Elem) -> G2Elem;
    fn g2_sub(&self, a: G2Elem, b: G2Elem) -> G2Elem;
    fn g2_mul(&self, k: Scalar, a: G2Elem) -> G2Elem;

    fn pair(&self, a: G1Elem, b: G2Elem) -> GtElem;

    fn gt_mul(&self, x: GtElem, y: GtElem) -> GtElem;
    fn gt_inv(&self, x: GtElem) -> GtElem;
    fn gt_pow(&self, x: GtElem, k: Scalar) -> GtElem;
}

impl PairingOps for PairingParams {
    fn params(&self) -> &PairingParams {
        self
    }

    fn g1_add(&self, a: G1Elem, b: G1Elem) -> G1Elem {
        G1Elem(add_mod(a.0, b.0, self.q))
    }

    fn g1_sub(&self, a: G1Elem, b: G1Elem) -> G1Elem {
        G1Elem(add_mod(a.0, self.q - b.0 % self.q, self.q))
    }

    fn g1_mul(&self, k: Scalar, a: G1Elem) -> G1Elem {
        G1Elem(mul_mod(k.0, a.0, self.q))
    }

    fn g2_add(&self, a: G2Elem, b: G2Elem) -> G2Elem {
        G2Elem(add_mod(a.0, b.0, self.q))
    }

    fn g2_sub(&self, a: G2Elem, b: G2Elem) -> G2Elem {
        G2Elem(add_mod(a.0, self.q - b.0 % self.q, self.q))
    }

    fn g2_mul(&self, k: Scalar, a: G2Elem) -> G2Elem {
        G2Elem(mul_mod(k.0, a.0, self.q))
    }

    fn pair(&self, a: G1Elem, b: G2Elem) -> GtElem {
        GtElem(pow_mod(self.gt_gen, mul_mod(a.0, b.0, self.q), self.p))
    }

    fn gt_mul(&self, x: GtElem, y: GtElem) -> GtElem {
        GtElem(mul_mod(x.0, y.0, self.p))
    }

    fn gt_inv(&self, x: GtElem) -> GtElem {
        GtElem(pow_mod(x.0, self.p - 2, self.p))
    }

    fn gt_pow(&self, x: GtElem, k: Scalar) -> GtElem {
        GtElem(pow_mod(x.0, k.0 % self.q, self.p))
    }
}

/// Operation counts for one party.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub pairings: u64,
    pub scalar_mults: u64,
    pub group_adds: u64,
    pub gt_mults: u64,
    pub gt_exps: u64,
    pub gt_invs: u64,
}

impl OpCounts {
    pub fn is_zero(&self) -> bool {
        *self == OpCounts::default()
    }

    pub fn scaled(self, n: u64) -> OpCounts {
        OpCounts {
            pairings: self.pairings * n,
            scalar_mults: self.scalar_mults * n,
            group_adds: self.group_adds * n,
            gt_mults: self.gt_mults * n,
            gt_exps: self.gt_exps * n,
            gt_invs: self.gt_invs * n,
        }
    }
}

impl Add for OpCounts {
    type Output = OpCounts;

    fn add(self, o: OpCounts) -> OpCounts {
        OpCounts {
            pairings: self.pairings + o.pairings,
            scalar_mults: self.scalar_mults + o.scalar_mults,
            group_adds: self.group_adds + o.group_adds,
            gt_mults: self.gt_mults + o.gt_mults,
            gt_exps: self.gt_exps + o.gt_exps,
            gt_invs: self.gt_invs + o.gt_invs,
        }
    }
}

impl AddAssign for OpCounts {
    fn add_assign(&mut self, o: OpCounts) {
        *self = *self + o;
    }
}

/// Counting wrapper: every call is tallied, then delegated to the backend.
/// Subtraction counts as one group addition.
pub struct Meter<'a, B: PairingOps = PairingParams> {
    backend: &'a B,
    counts: Cell<OpCounts>,
}

impl<'a, B: PairingOps> Meter<'a, B> {
    pub fn new(backend: &'a B) -> Self {
        Self { backend, counts: Cell::new(OpCounts::default()) }
    }

    pub fn counts(&self) -> OpCounts {
        self.counts.get()
    }

    fn tally(&self, f: impl FnOnce(&mut OpCounts)) {
        let mut c = self.counts.get();
        f(&mut c);
        self.counts.set(c);
    }
}

impl<B: PairingOps> PairingOps for Meter<'_, B> {
    fn params(&self) -> &PairingParams {
        self.backend.params()
    }

    fn g1_add(&self, a: G1Elem, b: G1Elem) -> G1Elem {
        self.tally(|c| c.group_adds += 1);
        self.backend.g1_add(a, b)
    }

    fn g1_sub(&self, a: G1Elem, b: G1Elem) -> G1Elem {
        self.tally(|c| c.group_adds += 1);
        self.backend.g1_sub(a, b)
    }

    fn g1_mul(&self, k: Scalar, a: G1Elem) -> G1Elem {
        self.tally(|c| c.scalar_mults += 1);
        self.backend.g1_mul(k, a)
    }

    fn g2_add(&self, a: G2Elem, b: G2Elem) -> G2Elem {
        self.tally(|c| c.group_adds += 1);
        self.backend.g2_add(a, b)
    }

    fn g2_sub(&self, a: G2Elem, b: G2Elem) -> G2Elem {
        self.tally(|c| c.group_adds += 1);
        self.backend.g2_sub(a, b)
    }

    fn g2_mul(&self, k: Scalar, a: G2Elem) -> G2Elem {
        self.tally(|c| c.scalar_mults += 1);
        self.backend.g2_mul(k, a)
    }

    fn pair(&self, a: G1Elem, b: G2Elem) -> GtElem {
        self.tally(|c| c.pairings += 1);
        self.backend.pair(a, b)
    }

    fn gt_mul(&self, x: GtElem, y: GtElem) -> GtElem {
        self.tally(|c| c.gt_mults += 1);
        self.backend.gt_mul(x, y)
    }

    fn gt_inv(&self, x: GtElem) -> GtElem {
        self.tally(|c| c.gt_invs += 1);
        self.backend.gt_inv(x)
    }

    fn gt_pow(&self, x: GtElem, k: Scalar) -> GtElem {
        self.tally(|c| c.gt_exps += 1);
        self.backend.gt_pow(x, k)
    }
}
