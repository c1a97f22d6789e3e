//! Curve normal forms, point counts over F_p, the lines M1 and M2 of the
//! (b, c)-chart, and Hensel lifting of curve solutions.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{is_prime, pow_i128, valuation_i128, Valuation};

pub const DEFAULT_PRIME_BOUND: u64 = 10_000;

/// `Y^2 + a3*Y = X^3 + a1*X^2 + a2*X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EllipticNormalForm {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
}

/// `Y^2 + b*Y = a0*X^6 + a1*X^5 + ... + a5*X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Genus2NormalForm {
    pub a: [i64; 6],
    pub b: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveSpec {
    Elliptic(EllipticNormalForm),
    Genus2(Genus2NormalForm),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointCount {
    pub affine: u64,
    pub projective: u64,
    pub unit_affine: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Genus2PointCount {
    pub count: PointCount,
    /// p divides every right-hand coefficient and b.
    pub degenerate: bool,
}

/// `(|M1|, |M2|, |E ∩ M1|, |E ∩ M2|, |E ∩ M1 ∩ M2|)` in the (b, c)-chart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineCounts {
    pub m1: u64,
    pub m2: u64,
    pub e_m1: u64,
    pub e_m2: u64,
    pub e_m1_m2: u64,
}

fn md(x: i128, p: u64) -> i128 {
    x.rem_euclid(p as i128)
}

fn pow_mod(mut b: i128, mut e: u64, p: i128) -> i128 {
    let mut r = 1i128;
    b = b.rem_euclid(p);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Number of y in F_p with y^2 + s*y = r.
fn quadratic_roots(s: i128, r: i128, p: u64) -> u64 {
    let pi = p as i128;
    if p == 2 {
        return (0..2).filter(|&y| md(y * y + s * y - r, p) == 0).count() as u64;
    }
    let disc = md(s * s + 4 * r, p);
    if disc == 0 {
        1
    } else if pow_mod(disc, (p - 1) / 2, pi) == 1 {
        2
    } else {
        0
    }
}

fn check_prime(p: u64, bound: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > bound {
        return Err(Error::PrimeTooLarge { p, bound });
    }
    Ok(())
}

impl EllipticNormalForm {
    pub fn new(a1: i64, a2: i64, a3: i64) -> Self {
        Self { a1, a2, a3 }
    }

    /// Discriminant of the long Weierstrass model with a4 = a2, a6 = 0.
    pub fn discriminant(&self) -> BigInt {
        let (a1, a2, a3) = (BigInt::from(self.a1), BigInt::from(self.a2), BigInt::from(self.a3));
        let b2: BigInt = &a1 * 4;
        let b4: BigInt = &a2 * 2;
        let b6: BigInt = &a3 * &a3;
        let b8: BigInt = &a1 * &a3 * &a3 - &a2 * &a2;
        let t: BigInt = &b2 * &b2 * &b8;
        -t - 8 * b4.pow(3) - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    /// Weierstrass polynomial `Y^2 + a3 Y - X^3 - a1 X^2 - a2 X` at (x, y).
    pub fn eval(&self, x: i128, y: i128) -> i128 {
        let (a1, a2, a3) = (self.a1 as i128, self.a2 as i128, self.a3 as i128);
        y * y + a3 * y - x * x * x - a1 * x * x - a2 * x
    }

    /// A prime is bad when it divides the discriminant or a non-zero coefficient.
    pub fn is_bad_prime(&self, p: u64) -> bool {
        let pb = BigInt::from(p);
        if (self.discriminant() % &pb) == BigInt::from(0) {
            return true;
        }
        [self.a1, self.a2, self.a3].iter().any(|&a| a != 0 && a.rem_euclid(p as i64) == 0)
    }

    /// Parameters of the determinantal pattern whose locus is this curve
    /// after `X -> -X`: `(a1, -a2, a3)`.
    pub fn pattern_params(&self) -> (i64, i64, i64) {
        (self.a1, -self.a2, self.a3)
    }

    /// `phi(b, c) = b^3 - P1 b^2 - P2 b + c^2 - P3 c` with pattern params P;
    /// its zero set is the curve under `(b, c) = (-X, -Y)`.
    pub fn chart_eval(&self, b: i128, c: i128) -> i128 {
        let (p1, p2, p3) = self.pattern_params();
        let (p1, p2, p3) = (p1 as i128, p2 as i128, p3 as i128);
        b * b * b - p1 * b * b - p2 * b + c * c - p3 * c
    }
}

impl Genus2NormalForm {
    pub fn new(a: [i64; 6], b: i64) -> Self {
        Self { a, b }
    }

    /// Right-hand side a0 x^6 + ... + a5 x.
    pub fn rhs(&self, x: i128) -> i128 {
        self.a.iter().fold(0i128, |acc, &c| (acc + c as i128) * x)
    }

    pub fn eval(&self, x: i128, y: i128) -> i128 {
        y * y + self.b as i128 * y - self.rhs(x)
    }

    pub fn is_degenerate_at(&self, p: u64) -> bool {
        let p = p as i64;
        self.a.iter().all(|a| a.rem_euclid(p) == 0) && self.b.rem_euclid(p) == 0
    }

    /// Discriminant of the sextic `b^2 + 4 * rhs(x)` (as a polynomial of
    /// formal degree 6), via the Sylvester resultant with its derivative.
    pub fn discriminant(&self) -> BigInt {
        let mut h: Vec<BigInt> = self.a.iter().map(|&c| BigInt::from(4 * c as i128)).collect();
        h.push(BigInt::from(self.b as i128 * self.b as i128));
        let dh: Vec<BigInt> = h
            .iter()
            .take(6)
            .enumerate()
            .map(|(i, c)| c * BigInt::from(6 - i as i64))
            .collect();
        crate::poly::det_bigint(&sylvester(&h, &dh))
    }

    /// Bad primes: 2, divisors of the leading coefficient or of the
    /// discriminant of the sextic model, and degenerate reductions.
    pub fn is_bad_prime(&self, p: u64) -> bool {
        p == 2
            || self.a[0].rem_euclid(p as i64) == 0
            || self.is_degenerate_at(p)
            || (self.discriminant() % BigInt::from(p)) == BigInt::from(0)
    }
}

fn sylvester(f: &[BigInt], g: &[BigInt]) -> Vec<Vec<BigInt>> {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut rows = Vec::with_capacity(size);
    for i in 0..n {
        let mut r = vec![BigInt::from(0); size];
        for (j, c) in f.iter().enumerate() {
            r[i + j] = c.clone();
        }
        rows.push(r);
    }
    for i in 0..m {
        let mut r = vec![BigInt::from(0); size];
        for (j, c) in g.iter().enumerate() {
            r[i + j] = c.clone();
        }
        rows.push(r);
    }
    rows
}

impl CurveSpec {
    pub fn ring_id(&self) -> String {
        self.to_string()
    }

    pub fn is_bad_prime(&self, p: u64) -> bool {
        match self {
            CurveSpec::Elliptic(e) => e.is_bad_prime(p),
            CurveSpec::Genus2(c) => c.is_bad_prime(p),
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Elliptic(e) => write!(f, "elliptic:{},{},{}", e.a1, e.a2, e.a3),
            CurveSpec::Genus2(c) => {
                let a: Vec<String> = c.a.iter().map(|x| x.to_string()).collect();
                write!(f, "genus2:{};{}", a.join(","), c.b)
            }
        }
    }
}

impl FromStr for CurveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::CurveSpec(s.to_string());
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let ints = |t: &str| -> Result<Vec<i64>> {
            t.split(',').map(|x| x.trim().parse::<i64>().map_err(|_| bad())).collect()
        };
        match kind.trim() {
            "elliptic" => match ints(rest)?.as_slice() {
                &[a1, a2, a3] => Ok(CurveSpec::Elliptic(EllipticNormalForm::new(a1, a2, a3))),
                _ => Err(bad()),
            },
            "genus2" => {
                let (coeffs, b) = rest.split_once(';').ok_or_else(bad)?;
                let a: [i64; 6] = ints(coeffs)?.try_into().map_err(|_| bad())?;
                let b = b.trim().parse::<i64>().map_err(|_| bad())?;
                Ok(CurveSpec::Genus2(Genus2NormalForm::new(a, b)))
            }
            _ => Err(bad()),
        }
    }
}

pub fn count_points_elliptic(e: &EllipticNormalForm, p: u64) -> Result<PointCount> {
    count_points_elliptic_bounded(e, p, DEFAULT_PRIME_BOUND)
}

/// Per-x quadratic solving; the point at infinity is (0:1:0).
pub fn count_points_elliptic_bounded(e: &EllipticNormalForm, p: u64, bound: u64) -> Result<PointCount> {
    check_prime(p, bound)?;
    let (a1, a2, a3) = (e.a1 as i128, e.a2 as i128, e.a3 as i128);
    let mut affine = 0;
    let mut unit = 0;
    for x in 0..p as i128 {
        let r = md(x * x * x + a1 * x * x + a2 * x, p);
        let n = quadratic_roots(a3, r, p);
        affine += n;
        if x != 0 {
            unit += n - u64::from(r == 0);
        }
    }
    Ok(PointCount { affine, projective: affine + 1, unit_affine: unit })
}

/// Plain O(p^2) exhaustion, used as an oracle for the fast count.
pub fn count_points_elliptic_exhaustive(e: &EllipticNormalForm, p: u64) -> PointCount {
    let mut pc = PointCount::default();
    for x in 0..p as i128 {
        for y in 0..p as i128 {
            if md(e.eval(x, y), p) == 0 {
                pc.affine += 1;
                if x != 0 && y != 0 {
                    pc.unit_affine += 1;
                }
            }
        }
    }
    pc.projective = pc.affine + 1;
    pc
}

pub fn count_points_genus2(c: &Genus2NormalForm, p: u64) -> Result<Genus2PointCount> {
    count_points_genus2_bounded(c, p, DEFAULT_PRIME_BOUND)
}

/// Affine count plus the points of `Y^2 Z^4 + b Y Z^5 = a0 X^6 + ...` on Z = 0.
pub fn count_points_genus2_bounded(c: &Genus2NormalForm, p: u64, bound: u64) -> Result<Genus2PointCount> {
    check_prime(p, bound)?;
    let mut affine = 0;
    let mut unit = 0;
    for x in 0..p as i128 {
        let r = md(c.rhs(x), p);
        let n = quadratic_roots(c.b as i128, r, p);
        affine += n;
        if x != 0 {
            unit += n - u64::from(r == 0);
        }
    }
    let at_infinity = if c.a[0].rem_euclid(p as i64) == 0 { p + 1 } else { 1 };
    Ok(Genus2PointCount {
        count: PointCount { affine, projective: affine + at_infinity, unit_affine: unit },
        degenerate: c.is_degenerate_at(p),
    })
}

/// Points of the chart in which the genus-2 ring sees the curve: pairs
/// `(b, c)` with `C(-b, -c) = 0` and `c != b_C`, where `b_C` is the
/// coefficient of `Y` (the entry of the determinantal matrix paired with
/// `c` in the last congruence). Equivalently, affine points off `Y = -b_C`.
pub fn count_points_genus2_chart(c: &Genus2NormalForm, p: u64) -> Result<u64> {
    check_prime(p, DEFAULT_PRIME_BOUND)?;
    let pi = p as i128;
    let mut n = 0;
    for b in 0..pi {
        for cc in 0..pi {
            if md(cc - c.b as i128, p) != 0 && md(c.eval(-b, -cc), p) == 0 {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Count the zeros of a homogeneous polynomial over all of P^2(F_p).
pub fn projective_plane_count(p: u64, f: impl Fn(i128, i128, i128) -> i128) -> u64 {
    let pi = p as i128;
    let mut n = 0;
    for x in 0..pi {
        for y in 0..pi {
            n += u64::from(md(f(x, y, 1), p) == 0);
        }
    }
    for x in 0..pi {
        n += u64::from(md(f(x, 1, 0), p) == 0);
    }
    n + u64::from(md(f(1, 0, 0), p) == 0)
}

pub fn count_line_and_intersections(e: &EllipticNormalForm, p: u64) -> Result<LineCounts> {
    check_prime(p, DEFAULT_PRIME_BOUND)?;
    let (p1, p2, p3) = e.pattern_params();
    if p1.rem_euclid(p as i64) == 0 {
        return Err(Error::DegenerateLine(p));
    }
    let pi = p as i128;
    let beta0 = md(-(p2 as i128) * crate::padic::inverse_mod(p1 as i128, pi), p);
    let gamma0 = md(p3 as i128, p);
    let e_m1 = (0..pi).filter(|&c| md(e.chart_eval(beta0, c), p) == 0).count() as u64;
    let e_m2 = (0..pi).filter(|&b| md(e.chart_eval(b, gamma0), p) == 0).count() as u64;
    let e_m1_m2 = u64::from(md(e.chart_eval(beta0, gamma0), p) == 0);
    Ok(LineCounts { m1: p, m2: p, e_m1, e_m2, e_m1_m2 })
}

/// Number of lifts of a solution mod p^K of the Weierstrass congruence to
/// solutions mod p^(K+1).
pub fn hensel_lift_count(e: &EllipticNormalForm, p: u64, k: u32, (b, c): (i128, i128)) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let pk = pow_i128(p, k).ok_or(Error::Overflow)?;
    let pk1 = pk.checked_mul(p as i128).ok_or(Error::Overflow)?;
    if e.eval(b, c).rem_euclid(pk) != 0 {
        return Err(Error::NotOnCurve { p, k, b, c });
    }
    let (a1, a2, a3) = (e.a1 as i128, e.a2 as i128, e.a3 as i128);
    let dx = md(-3 * b * b - 2 * a1 * b - a2, p);
    let dy = md(2 * c + a3, p);
    if dx == 0 && dy == 0 {
        return Err(Error::SingularPoint { p, b, c });
    }
    let mut n = 0;
    for beta in 0..p as i128 {
        for gamma in 0..p as i128 {
            n += u64::from(e.eval(b + beta * pk, c + gamma * pk).rem_euclid(pk1) == 0);
        }
    }
    Ok(n)
}

/// All solutions mod p^K of the Weierstrass congruence, found by lifting
/// level by level (every solution mod p^K reduces to one mod p^(K-1)).
pub fn solutions_mod_pk(e: &EllipticNormalForm, p: u64, k: u32) -> Result<Vec<(i128, i128)>> {
    if k == 0 {
        return Ok(vec![(0, 0)]);
    }
    let mut sols: Vec<(i128, i128)> = (0..p as i128)
        .flat_map(|x| (0..p as i128).map(move |y| (x, y)))
        .filter(|&(x, y)| md(e.eval(x, y), p) == 0)
        .collect();
    for level in 1..k {
        let pl = pow_i128(p, level).ok_or(Error::Overflow)?;
        let pl1 = pl * p as i128;
        let mut next = Vec::new();
        for &(x, y) in &sols {
            for beta in 0..p as i128 {
                for gamma in 0..p as i128 {
                    let (x1, y1) = (x + beta * pl, y + gamma * pl);
                    if e.eval(x1, y1).rem_euclid(pl1) == 0 {
                        next.push((x1, y1));
                    }
                }
            }
        }
        sols = next;
    }
    Ok(sols)
}

/// Full exhaustion over (Z/p^K)^2, for cross-checking small cases.
pub fn count_solutions_exhaustive(e: &EllipticNormalForm, p: u64, k: u32) -> u64 {
    let m = pow_i128(p, k).unwrap();
    let mut n = 0;
    for x in 0..m {
        for y in 0..m {
            n += u64::from(e.eval(x, y).rem_euclid(m) == 0);
        }
    }
    n
}

pub fn valuation_of(x: i128, p: u64) -> Valuation {
    valuation_i128(x, p)
}
