//! Exact rational fits of coefficient data against `p` and `|E(F_p)|`.
//!
//! A coefficient `a_n(p)` is modelled as `Q1(p) + Q2(p) |E(F_p)|` with
//! polynomials `Q1, Q2` over Q. Fitting `a_n` directly would need as many
//! primes as the degree in p, so the fit is made per stratum: the central
//! matrices of one diagonal whose M-row count is `p^k` are counted, that
//! count is fitted with low-degree `q1 + q2 |E|`, and the strata are summed
//! back with their weights `p^{w + k}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::enumeration::{center_strata, weight_exponent, DiagonalVector, ZetaCoefficientTable};
use crate::error::{Error, Result};
use crate::liering::ClassTwoLieRing;

/// Polynomial in p with rational coefficients; `0[i]` multiplies `p^i`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatPoly(pub Vec<BigRational>);

impl RatPoly {
    pub fn zero() -> Self {
        Self(Vec::new())
    }

    pub fn monomial(c: BigRational, e: usize) -> Self {
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = c;
        Self(v).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|c| c.is_zero())
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_u64(&self, p: u64) -> BigRational {
        self.eval(&BigRational::from_integer(p.into()))
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.0.len().max(other.0.len());
        let get = |v: &Vec<BigRational>, i: usize| v.get(i).cloned().unwrap_or_else(BigRational::zero);
        RatPoly((0..n).map(|i| get(&self.0, i) + get(&other.0, i)).collect()).trimmed()
    }

    /// `self * p^e`.
    pub fn shift(&self, e: usize) -> RatPoly {
        if self.is_zero() {
            return RatPoly::zero();
        }
        let mut v = vec![BigRational::zero(); e];
        v.extend(self.0.iter().cloned());
        RatPoly(v)
    }
}

impl fmt::Display for RatPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            let show_coeff = !a.is_one() || i == 0;
            if show_coeff {
                write!(f, "{a}")?;
            }
            match (i, show_coeff) {
                (0, _) => {}
                (1, true) => f.write_str("*p")?,
                (1, false) => f.write_str("p")?,
                (_, true) => write!(f, "*p^{i}")?,
                (_, false) => write!(f, "p^{i}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Solves `A x = y` exactly over Q. Returns `Ok(None)` when the system is
/// inconsistent and an error when the solution is not unique.
pub fn solve_exact(a: &[Vec<BigRational>], y: &[BigRational]) -> Result<Option<Vec<BigRational>>> {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<BigRational>> =
        a.iter().zip(y).map(|(r, v)| r.iter().cloned().chain(std::iter::once(v.clone())).collect()).collect();
    let mut pivot_row = 0;
    for col in 0..cols {
        let Some(pr) = (pivot_row..rows).find(|&r| !m[r][col].is_zero()) else {
            return Err(Error::Fit(format!("column {col} is not determined by the data")));
        };
        m.swap(pivot_row, pr);
        let inv = m[pivot_row][col].recip();
        for x in m[pivot_row].iter_mut() {
            *x = &*x * &inv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=cols {
                    let delta = &factor * &m[pivot_row][c];
                    m[r][c] -= delta;
                }
            }
        }
        pivot_row += 1;
    }
    if m[pivot_row..].iter().any(|r| !r[cols].is_zero()) {
        return Ok(None);
    }
    Ok(Some((0..cols).map(|c| m[c][cols].clone()).collect()))
}

/// One data point: `value` observed at prime `p` where the curve has `e` points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub p: u64,
    pub e: u64,
    pub value: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependenceFit {
    pub q1: RatPoly,
    pub q2: RatPoly,
}

impl DependenceFit {
    pub fn eval(&self, p: u64, e: u64) -> BigRational {
        self.q1.eval_u64(p) + self.q2.eval_u64(p) * BigRational::from_integer(e.into())
    }
}

fn q(x: u64) -> BigRational {
    BigRational::from_integer(x.into())
}

/// Exact fit with `deg Q1 <= d1`, `deg Q2 <= d2` (`None` drops the term),
/// demanding at least one more sample than unknowns so that the fit is
/// checked by the data. `Ok(None)` means no such polynomials exist.
pub fn fit_dependence(samples: &[Sample], d1: usize, d2: Option<usize>) -> Result<Option<DependenceFit>> {
    let unknowns = d1 + 1 + d2.map_or(0, |d| d + 1);
    if samples.len() <= unknowns {
        return Err(Error::Fit(format!("{} samples cannot check {unknowns} unknowns", samples.len())));
    }
    let rows: Vec<Vec<BigRational>> = samples
        .iter()
        .map(|s| {
            let mut r: Vec<BigRational> = (0..=d1).map(|i| q(s.p).pow(i as i32)).collect();
            if let Some(d2) = d2 {
                r.extend((0..=d2).map(|i| q(s.p).pow(i as i32) * q(s.e)));
            }
            r
        })
        .collect();
    let y: Vec<BigRational> = samples.iter().map(|s| BigRational::from_integer(s.value.clone())).collect();
    let Some(x) = solve_exact(&rows, &y)? else {
        return Ok(None);
    };
    let q1 = RatPoly(x[..=d1].to_vec()).trimmed();
    let q2 = RatPoly(x[d1 + 1..].to_vec()).trimmed();
    Ok(Some(DependenceFit { q1, q2 }))
}

/// Fewest unknowns (`deg Q1 + deg Q2 + 1`, at most `max_degree + 1`) that
/// fit exactly; ties go to the smaller `deg Q2`.
pub fn minimal_dependence_fit(samples: &[Sample], max_degree: usize) -> Option<DependenceFit> {
    for total in 0..=max_degree {
        let mut shapes: Vec<(usize, Option<usize>)> = vec![(total, None)];
        shapes.extend((0..total).map(|d2| (total - 1 - d2, Some(d2))));
        for (d1, d2) in shapes {
            if let Ok(Some(fit)) = fit_dependence(samples, d1, d2) {
                return Some(fit);
            }
        }
    }
    None
}

/// Polynomial in p alone, of degree at most `deg`, checked by a spare point.
pub fn fit_polynomial(points: &[(u64, BigInt)], deg: usize) -> Result<Option<RatPoly>> {
    let samples: Vec<Sample> = points.iter().map(|(p, v)| Sample { p: *p, e: 0, value: v.clone() }).collect();
    Ok(fit_dependence(&samples, deg, None)?.map(|f| f.q1))
}

/// A stratum: central matrices of one diagonal whose M-row count is `p^k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StratumKey {
    pub diagonal: DiagonalVector,
    pub exponent: u32,
    pub weight: u32,
}

/// Number of central matrices in every stratum of index `p^n`.
pub fn collect_strata(
    ring: &ClassTwoLieRing,
    table: &ZetaCoefficientTable,
    n: usize,
) -> Result<BTreeMap<StratumKey, u64>> {
    let mut out = BTreeMap::new();
    let mut check = BigUint::zero();
    let p = table.p;
    for dc in &table.breakdown[n] {
        let weight = weight_exponent(ring, &dc.diagonal);
        for (k, count) in center_strata(ring, p, &dc.diagonal)? {
            let k = k.ok_or_else(|| Error::Fit(format!("row count of {} is not a power of p", dc.diagonal)))?;
            check += BigUint::from(count) * BigUint::from(p).pow(weight + k);
            out.insert(StratumKey { diagonal: dc.diagonal.clone(), exponent: k, weight }, count);
        }
    }
    if check != table.coefficients[n] {
        return Err(Error::Fit(format!("strata at p = {p} do not sum to a_{n}")));
    }
    Ok(out)
}

/// Training data for one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeStrata {
    pub p: u64,
    pub e: u64,
    pub strata: BTreeMap<StratumKey, u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumFit {
    pub key: StratumKey,
    pub fit: DependenceFit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeldOut {
    pub p: u64,
    pub e: u64,
    pub predicted: BigRational,
    pub actual: BigInt,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratifiedFit {
    pub training: Vec<u64>,
    pub strata: Vec<StratumFit>,
    pub q1: RatPoly,
    pub q2: RatPoly,
    pub held_out: Vec<HeldOut>,
}

impl StratifiedFit {
    pub fn predict(&self, p: u64, e: u64) -> BigRational {
        self.q1.eval_u64(p) + self.q2.eval_u64(p) * q(e)
    }

    pub fn validated(&self) -> bool {
        !self.held_out.is_empty() && self.held_out.iter().all(|h| h.ok)
    }
}

/// Fits every stratum over the training primes (absent strata count 0),
/// sums the strata into `Q1, Q2`, and evaluates on the held-out data.
pub fn stratified_fit(
    training: &[PrimeStrata],
    held_out: &[Sample],
    max_degree: usize,
) -> Result<StratifiedFit> {
    let keys: BTreeSet<&StratumKey> = training.iter().flat_map(|t| t.strata.keys()).collect();
    let mut strata = Vec::new();
    let mut q1 = RatPoly::zero();
    let mut q2 = RatPoly::zero();
    for key in keys {
        let samples: Vec<Sample> = training
            .iter()
            .map(|t| Sample { p: t.p, e: t.e, value: BigInt::from(*t.strata.get(key).unwrap_or(&0)) })
            .collect();
        let fit = minimal_dependence_fit(&samples, max_degree)
            .ok_or_else(|| Error::Fit(format!("no fit of degree <= {max_degree} for stratum {} / p^{}", key.diagonal, key.exponent)))?;
        let shift = (key.weight + key.exponent) as usize;
        q1 = q1.add(&fit.q1.shift(shift));
        q2 = q2.add(&fit.q2.shift(shift));
        strata.push(StratumFit { key: key.clone(), fit });
    }
    let mut out = StratifiedFit { training: training.iter().map(|t| t.p).collect(), strata, q1, q2, held_out: Vec::new() };
    out.held_out = held_out
        .iter()
        .map(|s| {
            let predicted = out.predict(s.p, s.e);
            let ok = predicted == BigRational::from_integer(s.value.clone());
            HeldOut { p: s.p, e: s.e, predicted, actual: s.value.clone(), ok }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(n.into())
    }

    #[test]
    fn display() {
        let f = RatPoly(vec![r(1), r(-1), r(0), r(2)]);
        assert_eq!(f.to_string(), "2*p^3 - p + 1");
        assert_eq!(RatPoly::zero().to_string(), "0");
        assert_eq!(RatPoly(vec![BigRational::new(1.into(), 2.into())]).shift(2).to_string(), "1/2*p^2");
    }

    #[test]
    fn inconsistent_and_underdetermined() {
        let a = vec![vec![r(1)], vec![r(1)]];
        assert_eq!(solve_exact(&a, &[r(1), r(2)]).unwrap(), None);
        let a = vec![vec![r(1), r(1)], vec![r(2), r(2)]];
        assert!(solve_exact(&a, &[r(1), r(2)]).is_err());
    }

    #[test]
    fn recovers_dependence() {
        let primes = [3u64, 5, 7, 11, 13, 17];
        let es = [7u64, 4, 9, 12, 16, 14];
        let samples: Vec<Sample> = primes
            .iter()
            .zip(es)
            .map(|(&p, e)| Sample { p, e, value: BigInt::from(p * p - 3 + (p + 1) * e) })
            .collect();
        let fit = minimal_dependence_fit(&samples, 4).unwrap();
        assert_eq!(fit.q1.to_string(), "p^2 - 3");
        assert_eq!(fit.q2.to_string(), "p + 1");
    }

    #[test]
    fn needs_a_spare_sample() {
        let s = vec![Sample { p: 3, e: 1, value: 1.into() }, Sample { p: 5, e: 2, value: 2.into() }];
        assert!(fit_dependence(&s, 0, Some(0)).is_err());
    }

    proptest! {
        #[test]
        fn polynomial_round_trip(coeffs in prop::collection::vec(-50i64..50, 1..4)) {
            let poly = RatPoly(coeffs.iter().map(|&c| r(c)).collect()).trimmed();
            let pts: Vec<(u64, BigInt)> = [3u64, 5, 7, 11, 13]
                .iter()
                .map(|&p| (p, poly.eval_u64(p).to_integer()))
                .collect();
            let fit = fit_polynomial(&pts, 3).unwrap().unwrap();
            prop_assert_eq!(fit, poly);
        }
    }
}
