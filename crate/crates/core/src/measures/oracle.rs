//! Exact measures of subsets of `Z_p^2` cut out by valuation conditions on
//! integer polynomials in (b, c).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{is_prime, pow_i128, p_pow, valuation_i128, ExactRational, Valuation};

/// Sum of `coeff * b^i * c^j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BcPoly {
    pub terms: Vec<(i128, u32, u32)>,
}

impl BcPoly {
    pub fn new(terms: Vec<(i128, u32, u32)>) -> Self {
        Self { terms: terms.into_iter().filter(|t| t.0 != 0).collect() }
    }

    pub fn b() -> Self {
        Self::new(vec![(1, 1, 0)])
    }

    pub fn c() -> Self {
        Self::new(vec![(1, 0, 1)])
    }

    /// Value modulo `m`, in `[0, m)`.
    pub fn eval_mod(&self, b: i128, c: i128, m: i128) -> i128 {
        let pow = |x: i128, e: u32| (0..e).fold(1i128, |acc, _| acc * x % m);
        self.terms
            .iter()
            .fold(0i128, |acc, &(k, i, j)| (acc + k.rem_euclid(m) * pow(b, i) % m * pow(c, j)) % m)
    }

    pub fn eval(&self, b: i128, c: i128) -> i128 {
        self.terms.iter().map(|&(k, i, j)| k * b.pow(i) * c.pow(j)).sum()
    }
}

impl fmt::Display for BcPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (n, &(k, i, j)) in self.terms.iter().enumerate() {
            let sign = if k < 0 { "-" } else if n > 0 { "+" } else { "" };
            if n > 0 {
                write!(f, " {sign} ")?;
            } else {
                f.write_str(sign)?;
            }
            let mut parts = Vec::new();
            if k.abs() != 1 || (i == 0 && j == 0) {
                parts.push(k.abs().to_string());
            }
            for (name, e) in [("b", i), ("c", j)] {
                match e {
                    0 => {}
                    1 => parts.push(name.to_string()),
                    _ => parts.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    /// `v(f) = t`
    Eq,
    /// `v(f) >= t`
    Ge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Condition {
    pub poly: BcPoly,
    pub relation: Relation,
    pub threshold: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PadicSetSpec {
    pub conditions: Vec<Condition>,
}

impl PadicSetSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn v_eq(mut self, poly: BcPoly, t: u32) -> Self {
        self.conditions.push(Condition { poly, relation: Relation::Eq, threshold: t });
        self
    }

    pub fn v_ge(mut self, poly: BcPoly, t: u32) -> Self {
        if t > 0 {
            self.conditions.push(Condition { poly, relation: Relation::Ge, threshold: t });
        }
        self
    }

    /// Membership is decided modulo `p^level`.
    pub fn stabilization_level(&self) -> u32 {
        1 + self.conditions.iter().map(|c| c.threshold).max().unwrap_or(0)
    }
}

fn check(spec: &PadicSetSpec, p: u64, k: u32) -> Result<i128> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let required = spec.stabilization_level();
    if k < required {
        return Err(Error::LevelTooLow { level: k, required });
    }
    match pow_i128(p, k) {
        Some(m) if m < (1i128 << 62) => Ok(m),
        _ => Err(Error::Overflow),
    }
}

/// Truth value of a condition on a residue cell mod `p^k`, if already decided.
fn decide(cond: &Condition, value_mod_pk: i128, k: u32, p: u64) -> Option<bool> {
    let t = cond.threshold;
    if value_mod_pk != 0 {
        let v = valuation_i128(value_mod_pk, p).finite().unwrap();
        return Some(match cond.relation {
            Relation::Eq => v == t,
            Relation::Ge => v >= t,
        });
    }
    match cond.relation {
        Relation::Eq if k > t => Some(false),
        Relation::Ge if k >= t => Some(true),
        _ => None,
    }
}

/// Exact Haar measure of the set, by refining residue cells until every
/// condition is decided. Equal to the count of solutions mod `p^K` divided
/// by `p^{2K}` for any `K` at or beyond the stabilization level.
pub fn measure_oracle(spec: &PadicSetSpec, p: u64, k: u32) -> Result<ExactRational> {
    let big_m = check(spec, p, k)?;
    let mut count_at_level = vec![0u128; k as usize + 1];
    refine(spec, p, big_m, 0, 1, 0, 0, &mut count_at_level);
    let mut total = BigRational::zero();
    for (level, &n) in count_at_level.iter().enumerate() {
        if n > 0 {
            total += BigRational::from_integer(BigInt::from(n)) * p_pow(p, -2 * level as i64);
        }
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn refine(spec: &PadicSetSpec, p: u64, big_m: i128, level: u32, pk: i128, b: i128, c: i128, acc: &mut [u128]) {
    let mut open = false;
    for cond in &spec.conditions {
        let value = cond.poly.eval_mod(b, c, big_m) % pk;
        match decide(cond, value, level, p) {
            Some(false) => return,
            Some(true) => {}
            None => open = true,
        }
    }
    if !open {
        acc[level as usize] += 1;
        return;
    }
    let pi = p as i128;
    for db in 0..pi {
        for dc in 0..pi {
            refine(spec, p, big_m, level + 1, pk * pi, b + db * pk, c + dc * pk, acc);
        }
    }
}

/// `#{(b, c) mod p^K in the set} / p^{2K}` by plain exhaustion.
pub fn measure_exhaustive(spec: &PadicSetSpec, p: u64, k: u32) -> Result<ExactRational> {
    let m = check(spec, p, k)?;
    let mut n = 0u128;
    for b in 0..m {
        for c in 0..m {
            let ok = spec.conditions.iter().all(|cond| {
                let v = cond.poly.eval_mod(b, c, m);
                decide(cond, v, k, p).expect("level at least the stabilization level")
            });
            n += ok as u128;
        }
    }
    Ok(BigRational::from_integer(BigInt::from(n)) * p_pow(p, -2 * k as i64))
}

/// Measure of `{spec and v(f) = t}` for every `t < cap`, plus `v(f) >= cap`
/// under the key `Infinite`.
pub fn valuation_histogram(
    spec: &PadicSetSpec,
    f: &BcPoly,
    cap: u32,
    p: u64,
) -> Result<BTreeMap<Valuation, ExactRational>> {
    let mut out = BTreeMap::new();
    for t in 0..cap {
        let s = spec.clone().v_eq(f.clone(), t);
        out.insert(Valuation::Finite(t), measure_oracle(&s, p, s.stabilization_level())?);
    }
    let s = spec.clone().v_ge(f.clone(), cap);
    out.insert(Valuation::Infinite, measure_oracle(&s, p, s.stabilization_level())?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::unit_measure;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> ExactRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn cylinder_measures() {
        let units = PadicSetSpec::new().v_eq(BcPoly::b(), 0);
        assert_eq!(measure_oracle(&units, 7, 1).unwrap(), unit_measure(7));
        let s = PadicSetSpec::new().v_ge(BcPoly::b(), 2).v_ge(BcPoly::c(), 1);
        assert_eq!(measure_oracle(&s, 3, 3).unwrap(), q(1, 27));
        assert_eq!(measure_exhaustive(&s, 3, 3).unwrap(), q(1, 27));
    }

    #[test]
    fn level_guard() {
        let s = PadicSetSpec::new().v_eq(BcPoly::b(), 2);
        assert!(matches!(measure_oracle(&s, 3, 2), Err(Error::LevelTooLow { level: 2, required: 3 })));
        assert!(matches!(measure_oracle(&s, 4, 3), Err(Error::NotPrime(4))));
    }

    #[test]
    fn unit_curve_points() {
        // Y^2 = X^3 - X at p = 5, read in the chart where the curve is
        // b^3 - b + c^2 = 0 with b, c units.
        let phi = BcPoly::new(vec![(1, 3, 0), (-1, 1, 0), (1, 0, 2)]);
        let s = PadicSetSpec::new().v_eq(BcPoly::b(), 0).v_eq(BcPoly::c(), 0).v_ge(phi, 1);
        let e = crate::curves::EllipticNormalForm::new(0, -1, 0);
        let unit = crate::curves::count_points_elliptic(&e, 5).unwrap().unit_affine as i64;
        assert_eq!(measure_oracle(&s, 5, 2).unwrap(), q(unit, 25));
    }

    #[test]
    fn display_poly() {
        let f = BcPoly::new(vec![(1, 3, 0), (-2, 2, 0), (-1, 0, 1), (5, 0, 0)]);
        assert_eq!(f.to_string(), "b^3 - 2*b^2 - c + 5");
    }

    #[test]
    fn histogram_sums_to_base() {
        let base = PadicSetSpec::new().v_eq(BcPoly::c(), 0);
        let f = BcPoly::new(vec![(1, 2, 0), (1, 0, 1), (-3, 0, 0)]);
        let h = valuation_histogram(&base, &f, 3, 5).unwrap();
        let total: ExactRational = h.values().cloned().sum();
        assert_eq!(total, unit_measure(5));
    }

    fn arb_spec() -> impl Strategy<Value = PadicSetSpec> {
        let poly = prop::collection::vec((-4i128..5, 0u32..3, 0u32..3), 1..4).prop_map(BcPoly::new);
        let cond = (poly, any::<bool>(), 0u32..3).prop_map(|(poly, eq, threshold)| Condition {
            poly,
            relation: if eq { Relation::Eq } else { Relation::Ge },
            threshold,
        });
        prop::collection::vec(cond, 1..4).prop_map(|conditions| PadicSetSpec { conditions })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn refinement_matches_exhaustion(spec in arb_spec(), p in prop::sample::select(vec![2u64, 3])) {
            let k = spec.stabilization_level();
            prop_assert_eq!(measure_oracle(&spec, p, k).unwrap(), measure_exhaustive(&spec, p, k).unwrap());
        }

        #[test]
        fn stable_beyond_level(spec in arb_spec(), p in prop::sample::select(vec![2u64, 3, 5])) {
            let k = spec.stabilization_level();
            prop_assert_eq!(measure_oracle(&spec, p, k).unwrap(), measure_oracle(&spec, p, k + 1).unwrap());
        }

        #[test]
        fn additivity(spec in arb_spec(), f in prop::collection::vec((-4i128..5, 0u32..3, 0u32..3), 1..3), t in 0u32..3, u in 0u32..3, p in prop::sample::select(vec![3u64, 5])) {
            prop_assume!(t != u);
            let f = BcPoly::new(f);
            let a = spec.clone().v_eq(f.clone(), t);
            let b = spec.clone().v_eq(f.clone(), u);
            let union_lo = t.min(u);
            let hi = t.max(u);
            // {v = lo} ∪ {v = hi} as {v >= lo} minus the slices strictly between and above hi.
            let mut expected = measure_oracle(&spec.clone().v_ge(f.clone(), union_lo), p, spec.stabilization_level().max(hi + 2)).unwrap();
            for mid in union_lo + 1..hi {
                let s = spec.clone().v_eq(f.clone(), mid);
                expected -= measure_oracle(&s, p, s.stabilization_level()).unwrap();
            }
            let above = spec.clone().v_ge(f.clone(), hi + 1);
            expected -= measure_oracle(&above, p, above.stabilization_level()).unwrap();
            let got = measure_oracle(&a, p, a.stabilization_level()).unwrap() + measure_oracle(&b, p, b.stabilization_level()).unwrap();
            prop_assert_eq!(got, expected);
        }
    }
}
