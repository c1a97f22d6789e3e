//! Valuations, prime-power residue rings and the linear congruence counter
//! shared by the measure oracles and the row-by-row ideal counts.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational numbers; always in lowest terms with positive denominator.
pub type ExactRational = BigRational;

/// A p-adic valuation: a non-negative integer or infinity (the valuation of 0).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valuation {
    Finite(u32),
    Infinite,
}

impl Valuation {
    pub fn is_finite(self) -> bool {
        matches!(self, Valuation::Finite(_))
    }

    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    /// Minimum with a finite cap, returning a plain integer.
    pub fn capped(self, cap: u32) -> u32 {
        match self {
            Valuation::Finite(v) => v.min(cap),
            Valuation::Infinite => cap,
        }
    }

    /// `self >= t` for a finite threshold.
    pub fn at_least(self, t: u32) -> bool {
        self >= Valuation::Finite(t)
    }
}

impl Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl Add<u32> for Valuation {
    type Output = Valuation;
    fn add(self, rhs: u32) -> Valuation {
        self + Valuation::Finite(rhs)
    }
}

impl PartialEq<u32> for Valuation {
    fn eq(&self, other: &u32) -> bool {
        *self == Valuation::Finite(*other)
    }
}

impl PartialOrd<u32> for Valuation {
    fn partial_cmp(&self, other: &u32) -> Option<Ordering> {
        Some(self.cmp(&Valuation::Finite(*other)))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "inf"),
        }
    }
}

/// Deterministic Miller-Rabin, exact for every 64-bit input.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let mulmod = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let powmod = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mulmod(r, b);
            }
            b = mulmod(b, b);
            e >>= 1;
        }
        r
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// The residue ring Z/p^K, with p checked prime at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimePowerModulus {
    p: u64,
    k: u32,
}

impl PrimePowerModulus {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Self { p, k })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn value(&self) -> BigUint {
        BigUint::from(self.p).pow(self.k)
    }

    /// p^K as an i128 when it leaves room for products of two residues.
    pub fn value_i128(&self) -> Option<i128> {
        pow_i128(self.p, self.k).filter(|&m| m < (1i128 << 62))
    }
}

pub fn pow_i128(p: u64, e: u32) -> Option<i128> {
    (p as i128).checked_pow(e)
}

pub fn pow_u128(p: u64, e: u32) -> Option<u128> {
    (p as u128).checked_pow(e)
}

pub fn valuation(n: &BigInt, p: u64) -> Valuation {
    if n.is_zero() {
        return Valuation::Infinite;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    while (&n % &p).is_zero() {
        n /= &p;
        v += 1;
    }
    Valuation::Finite(v)
}

pub fn valuation_i128(mut n: i128, p: u64) -> Valuation {
    if n == 0 {
        return Valuation::Infinite;
    }
    let p = p as i128;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Valuation::Finite(v)
}

/// p^e as an exact rational, for any integer exponent.
pub fn p_pow(p: u64, e: i64) -> ExactRational {
    let base = BigInt::from(p).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        ExactRational::from_integer(base)
    } else {
        ExactRational::new(BigInt::one(), base)
    }
}

/// 1 - 1/p.
pub fn unit_measure(p: u64) -> ExactRational {
    ExactRational::one() - p_pow(p, -1)
}

pub type Mat3 = [[i128; 3]; 3];

pub fn det3(m: &Mat3) -> i128 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Classical adjugate, so that `n * adjugate3(n) = det(n) * I`.
pub fn adjugate3(n: &Mat3) -> Mat3 {
    let mut adj = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (r0, r1) = others(j);
            let (c0, c1) = others(i);
            let minor = n[r0][c0] * n[r1][c1] - n[r0][c1] * n[r1][c0];
            adj[i][j] = if (i + j) % 2 == 0 { minor } else { -minor };
        }
    }
    adj
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0i128; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// One affine congruence `sum coeffs[i] * x_i + constant == 0 (mod p^exponent)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub coeffs: Vec<i128>,
    pub constant: i128,
    pub exponent: u32,
}

impl Congruence {
    pub fn new(coeffs: Vec<i128>, constant: i128, exponent: u32) -> Self {
        Self { coeffs, constant, exponent }
    }

    pub fn homogeneous(coeffs: Vec<i128>, exponent: u32) -> Self {
        Self::new(coeffs, 0, exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CountMethod {
    Auto,
    Reduction,
    Exhaustion,
}

/// Exact number of solutions in `(Z/p^K)^unknowns`. Zero means the system is
/// inconsistent.
pub fn residue_solutions_count(
    system: &[Congruence],
    unknowns: usize,
    modulus: &PrimePowerModulus,
    method: CountMethod,
) -> Result<BigUint> {
    validate(system, unknowns, modulus)?;
    let small = BigUint::from(modulus.p).pow(modulus.k * unknowns as u32) <= BigUint::from(1u32 << 16);
    match method {
        CountMethod::Exhaustion => count_by_exhaustion(system, unknowns, modulus),
        CountMethod::Auto if small => count_by_exhaustion(system, unknowns, modulus),
        _ => Ok(match solution_exponent(system, unknowns, modulus)? {
            Some(e) => BigUint::from(modulus.p).pow(e),
            None => BigUint::zero(),
        }),
    }
}

fn validate(system: &[Congruence], unknowns: usize, modulus: &PrimePowerModulus) -> Result<()> {
    for eq in system {
        if eq.coeffs.len() != unknowns {
            return Err(Error::InvalidInput(format!(
                "congruence has {} coefficients, expected {unknowns}",
                eq.coeffs.len()
            )));
        }
        if eq.exponent > modulus.k {
            return Err(Error::InvalidInput(format!(
                "congruence modulus p^{} exceeds ambient p^{}",
                eq.exponent, modulus.k
            )));
        }
    }
    Ok(())
}

/// Smith-style reduction over Z/p^K. Returns `Some(e)` when the system has
/// exactly p^e solutions, `None` when it has none.
pub fn solution_exponent(
    system: &[Congruence],
    unknowns: usize,
    modulus: &PrimePowerModulus,
) -> Result<Option<u32>> {
    validate(system, unknowns, modulus)?;
    let (p, k) = (modulus.p, modulus.k);
    if k == 0 {
        return Ok(Some(0));
    }
    let m = modulus.value_i128().ok_or(Error::Overflow)?;
    let mut rows: Vec<(Vec<i128>, i128)> = Vec::with_capacity(system.len());
    for eq in system.iter().filter(|eq| eq.exponent > 0) {
        let scale = pow_i128(p, k - eq.exponent).ok_or(Error::Overflow)?;
        let coeffs = eq.coeffs.iter().map(|c| (c.rem_euclid(m) * scale) % m).collect();
        rows.push((coeffs, (eq.constant.rem_euclid(m) * scale) % m));
    }
    Ok(reduce_and_count(&mut rows, unknowns, p, k, m))
}

fn reduce_and_count(
    rows: &mut [(Vec<i128>, i128)],
    unknowns: usize,
    p: u64,
    k: u32,
    m: i128,
) -> Option<u32> {
    let val = |x: i128| valuation_i128(x, p).capped(k);
    let mut exponent = 0u32;
    let mut rank = 0usize;
    let mut col_perm: Vec<usize> = (0..unknowns).collect();
    while rank < rows.len() && rank < unknowns {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate().skip(rank) {
            for &c in col_perm.iter().skip(rank) {
                let v = val(row.0[c]);
                if v < k && best.map_or(true, |b| v < b.0) {
                    best = Some((v, i, c));
                }
            }
        }
        let Some((e, pi, pc)) = best else { break };
        rows.swap(rank, pi);
        let pos = col_perm.iter().position(|&c| c == pc).unwrap();
        col_perm.swap(rank, pos);
        let pe = pow_i128(p, e).unwrap();
        let unit = rows[rank].0[pc] / pe;
        let inv = inverse_mod(unit, m);
        let (pivot_row, pivot_rhs) = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let entry = row.0[pc];
            if entry == 0 {
                continue;
            }
            let factor = ((entry / pe) % m * inv) % m;
            for c in 0..unknowns {
                row.0[c] = (row.0[c] - factor * pivot_row[c]).rem_euclid(m);
            }
            row.1 = (row.1 - factor * pivot_rhs).rem_euclid(m);
        }
        // Column operations only change coordinates, so the pivot row can be
        // cleared without touching the right-hand side.
        for &c in col_perm.iter().skip(rank + 1) {
            rows[rank].0[c] = 0;
        }
        if val(rows[rank].1) < e {
            return None;
        }
        exponent += e;
        rank += 1;
    }
    if rows.iter().skip(rank).any(|r| r.1.rem_euclid(m) != 0) {
        return None;
    }
    Some(exponent + k * (unknowns - rank) as u32)
}

/// Inverse of a unit modulo m (m a prime power).
pub fn inverse_mod(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    debug_assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(m)
}

fn count_by_exhaustion(
    system: &[Congruence],
    unknowns: usize,
    modulus: &PrimePowerModulus,
) -> Result<BigUint> {
    let m = modulus.value_i128().ok_or(Error::Overflow)?;
    let total = BigUint::from(modulus.p).pow(modulus.k * unknowns as u32);
    if total > BigUint::from(1u64 << 32) {
        return Err(Error::BudgetExceeded { needed: u128::MAX, budget: 1 << 32 });
    }
    let moduli: Vec<i128> = system
        .iter()
        .map(|eq| pow_i128(modulus.p, eq.exponent).unwrap())
        .collect();
    let mut x = vec![0i128; unknowns];
    let mut count = 0u64;
    loop {
        let ok = system.iter().zip(&moduli).all(|(eq, &q)| {
            let s: i128 = eq.coeffs.iter().zip(&x).map(|(c, v)| c * v).sum::<i128>() + eq.constant;
            s.rem_euclid(q) == 0
        });
        if ok {
            count += 1;
        }
        let mut i = 0;
        loop {
            if i == unknowns {
                return Ok(BigUint::from(count));
            }
            x[i] += 1;
            if x[i] < m {
                break;
            }
            x[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn valuation_examples() {
        assert_eq!(valuation(&BigInt::from(75), 5), Valuation::Finite(2));
        assert_eq!(valuation(&BigInt::from(0), 7), Valuation::Infinite);
        assert_eq!(valuation(&BigInt::from(18), 3), Valuation::Finite(2));
        assert_eq!(valuation_i128(-54, 3), Valuation::Finite(3));
    }

    #[test]
    fn infinity_absorbs_and_orders() {
        assert_eq!(Valuation::Infinite + 3, Valuation::Infinite);
        assert_eq!(Valuation::Infinite.min(Valuation::Finite(4)), Valuation::Finite(4));
        assert!(Valuation::Finite(10) < Valuation::Infinite);
        assert_eq!(Valuation::Infinite.capped(5), 5);
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..60).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(3_215_031_751));
        assert!(PrimePowerModulus::new(9, 1).is_err());
    }

    #[test]
    fn adjugate_examples() {
        let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
        assert_eq!(adjugate3(&id), id);
        assert_eq!(adjugate3(&[[2, 0, 0], [0, 3, 0], [0, 0, 5]]), [[15, 0, 0], [0, 10, 0], [0, 0, 6]]);
        let (b, c, p) = (4, 7, 11);
        assert_eq!(adjugate3(&[[1, 0, b], [0, 1, c], [0, 0, p]]), [[p, 0, -b], [0, p, -c], [0, 0, 1]]);
    }

    #[test]
    fn congruence_examples() {
        let m = PrimePowerModulus::new(3, 2).unwrap();
        let sys = [Congruence::homogeneous(vec![1], 1)];
        for method in [CountMethod::Reduction, CountMethod::Exhaustion] {
            assert_eq!(residue_solutions_count(&sys, 1, &m, method).unwrap(), BigUint::from(3u32));
        }
        let m = PrimePowerModulus::new(5, 3).unwrap();
        assert_eq!(
            residue_solutions_count(&[], 2, &m, CountMethod::Auto).unwrap(),
            BigUint::from(5u32).pow(6)
        );
        // t + beta*u + gamma*w == 0 mod p with (u, w) not both zero.
        let m = PrimePowerModulus::new(7, 1).unwrap();
        let sys = [Congruence::new(vec![3, 0], 5, 1)];
        assert_eq!(residue_solutions_count(&sys, 2, &m, CountMethod::Reduction).unwrap(), BigUint::from(7u32));
        let sys = [Congruence::new(vec![0, 0], 5, 1)];
        assert!(residue_solutions_count(&sys, 2, &m, CountMethod::Reduction).unwrap().is_zero());
    }

    fn system_strategy() -> impl Strategy<Value = (u64, u32, usize, Vec<Congruence>)> {
        (prop::sample::select(vec![2u64, 3, 5]), 1u32..=3, 1usize..=3).prop_flat_map(|(p, k, n)| {
            let eq = (prop::collection::vec(-30i128..30, n), -30i128..30, 0..=k)
                .prop_map(|(c, b, t)| Congruence::new(c, b, t));
            (Just(p), Just(k), Just(n), prop::collection::vec(eq, 0..4))
        })
    }

    proptest! {
        #[test]
        fn reduction_matches_exhaustion((p, k, n, sys) in system_strategy()) {
            prop_assume!(k as usize * n <= 8 && (p as u128).pow(k * n as u32) <= 1 << 16);
            let m = PrimePowerModulus::new(p, k).unwrap();
            let a = residue_solutions_count(&sys, n, &m, CountMethod::Reduction).unwrap();
            let b = residue_solutions_count(&sys, n, &m, CountMethod::Exhaustion).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn valuation_divides_exactly(n in 1i64..1_000_000, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            let v = valuation(&BigInt::from(n), p).finite().unwrap();
            let pv = BigInt::from(p).pow(v);
            prop_assert!((BigInt::from(n) % &pv).is_zero());
            prop_assert!(!(BigInt::from(n) % (pv * p)).is_zero());
        }

        #[test]
        fn adjugate_identity(n1 in 1i128..50, n2 in 1i128..50, n3 in 1i128..50, a in -50i128..50, b in -50i128..50, c in -50i128..50) {
            let n = [[n1, a, b], [0, n2, c], [0, 0, n3]];
            let prod = mat3_mul(&n, &adjugate3(&n));
            let d = det3(&n);
            prop_assert_eq!(prod, [[d, 0, 0], [0, d, 0], [0, 0, d]]);
        }
    }
}
