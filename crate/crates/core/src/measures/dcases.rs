//! The case-split measures `d(B, C, F, G, H)`, the exact-`G` variant `d'`,
//! and the set Phi, each as a closed form, as the displayed statement, and
//! as a set specification for the oracle.

use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::curves::{count_line_and_intersections, count_points_elliptic, EllipticNormalForm};
use crate::error::{Error, Result};
use crate::measures::oracle::{BcPoly, PadicSetSpec};
use crate::padic::{p_pow, unit_measure, ExactRational};

/// Substitution regime: 1 is `N <= B, C`, 2 is `B < N, B <= C`, 3 is `C < B, N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    One,
    Two,
    Three,
}

impl Regime {
    pub fn number(self) -> u8 {
        match self {
            Regime::One => 1,
            Regime::Two => 2,
            Regime::Three => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Regime::One),
            2 => Ok(Regime::Two),
            3 => Ok(Regime::Three),
            _ => Err(Error::InvalidInput(format!("case must be 1, 2 or 3, got {n}"))),
        }
    }

    /// Whether `(B, C)` lies in the range the regime's set is written for.
    pub fn admits(self, b: u32, c: u32) -> bool {
        match self {
            Regime::One => true,
            Regime::Two => b >= 1,
            Regime::Three => b >= 1 && c >= 1,
        }
    }
}

/// `(B, C, F, G, H)`: exact valuations of b and c, lower bounds for the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DProfile {
    pub b: u32,
    pub c: u32,
    pub f: u32,
    pub g: u32,
    pub h: u32,
}

impl DProfile {
    pub fn new(b: u32, c: u32, f: u32, g: u32, h: u32) -> Self {
        Self { b, c, f, g, h }
    }
}

impl fmt::Display for DProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{},{})", self.b, self.c, self.f, self.g, self.h)
    }
}

/// Point counts of the curve and its lines in the (b, c)-chart over F_p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartCounts {
    pub p: u64,
    pub params: (i64, i64, i64),
    pub projective: u64,
    pub affine: u64,
    /// Affine points with b and c both non-zero.
    pub unit: u64,
    /// `|E ∩ M1|`; every such point has b, c non-zero.
    pub e_m1: u64,
    /// `|E ∩ M2|`, including the point (0, P3).
    pub e_m2: u64,
    pub e_m1_m2: u64,
    /// Non-zero roots of `b^2 - P1 b - P2`: `|E ∩ M2| - 1`.
    pub rho: u64,
}

impl ChartCounts {
    pub fn new(e: &EllipticNormalForm, p: u64) -> Result<Self> {
        if e.is_bad_prime(p) {
            return Err(Error::InvalidInput(format!("{p} is a bad prime for the curve")));
        }
        let pc = count_points_elliptic(e, p)?;
        let lines = count_line_and_intersections(e, p)?;
        Ok(Self {
            p,
            params: e.pattern_params(),
            projective: pc.projective,
            affine: pc.affine,
            unit: pc.unit_affine,
            e_m1: lines.e_m1,
            e_m2: lines.e_m2,
            e_m1_m2: lines.e_m1_m2,
            rho: lines.e_m2 - 1,
        })
    }
}

fn poly(terms: &[(i64, u32, u32)]) -> BcPoly {
    BcPoly::new(terms.iter().map(|&(k, i, j)| (k as i128, i, j)).collect())
}

/// The three defining polynomials `(G-poly, H-poly, F-poly)` of a regime.
pub fn regime_polys(regime: Regime, (p1, p2, p3): (i64, i64, i64)) -> [BcPoly; 3] {
    match regime {
        Regime::One => [
            poly(&[(p3, 0, 0), (-1, 0, 1)]),
            poly(&[(p1, 1, 0), (p2, 0, 0)]),
            poly(&[(1, 3, 0), (-p1, 2, 0), (-p2, 1, 0), (1, 0, 2), (-p3, 0, 1)]),
        ],
        Regime::Two => [
            poly(&[(p3, 1, 0), (-1, 0, 1)]),
            poly(&[(p1, 0, 0), (p2, 1, 0)]),
            poly(&[(1, 0, 0), (p1, 1, 0), (p2, 2, 0), (1, 1, 2), (p3, 2, 1)]),
        ],
        Regime::Three => [
            poly(&[(p3, 0, 1), (-1, 0, 0)]),
            poly(&[(p1, 1, 0), (p2, 0, 1)]),
            poly(&[(1, 3, 0), (-p1, 2, 1), (-p2, 1, 2), (1, 0, 1), (-p3, 0, 2)]),
        ],
    }
}

/// The set measured by `d(B, C, F, G, H)` in the given regime.
pub fn d_set(regime: Regime, d: DProfile, params: (i64, i64, i64)) -> PadicSetSpec {
    let [g, h, f] = regime_polys(regime, params);
    PadicSetSpec::new()
        .v_eq(BcPoly::b(), d.b)
        .v_eq(BcPoly::c(), d.c)
        .v_ge(g, d.g)
        .v_ge(h, d.h)
        .v_ge(f, d.f)
}

/// The set of `d'(B, 0, F, G, 0)`: regime 1 with `v(P3 - c) = G` exactly.
pub fn d_prime_set(b: u32, f: u32, g: u32, params: (i64, i64, i64)) -> PadicSetSpec {
    let [gp, _, fp] = regime_polys(Regime::One, params);
    PadicSetSpec::new().v_eq(BcPoly::b(), b).v_eq(BcPoly::c(), 0).v_eq(gp, g).v_ge(fp, f)
}

fn pp(p: u64, e: i64) -> ExactRational {
    p_pow(p, e)
}

fn int(n: u64) -> ExactRational {
    BigRational::from_integer(n.into())
}

fn zero() -> ExactRational {
    BigRational::zero()
}

fn full(p: u64, b: u32, c: u32) -> ExactRational {
    let u = unit_measure(p);
    pp(p, -((b + c) as i64)) * &u * &u
}

/// Closed form of `d(B, C, F, G, H)`; `None` when the regime does not admit `(B, C)`.
pub fn d_closed_form(regime: Regime, d: DProfile, k: &ChartCounts) -> Option<ExactRational> {
    if !regime.admits(d.b, d.c) {
        return None;
    }
    let p = k.p;
    let u = unit_measure(p);
    let (b, c, f, g, h) = (d.b as i64, d.c as i64, d.f as i64, d.g as i64, d.h as i64);
    Some(match regime {
        Regime::One => match (b, c) {
            (0, 0) => match (f, g > 0, h > 0) {
                (0, false, false) => &u * &u,
                (0, true, false) => &u * pp(p, -g),
                (0, false, true) => &u * pp(p, -h),
                (0, true, true) => pp(p, -g - h),
                (_, false, false) => int(k.unit) * pp(p, -f - 1),
                (_, true, false) => int(k.rho) * pp(p, -f - g),
                (_, false, true) => int(k.e_m1) * pp(p, -f - h),
                (_, true, true) => int(k.e_m1_m2) * pp(p, -f - g - h),
            },
            (0, _) => match (g > 0, h > 0, f > 0) {
                (true, _, _) => zero(),
                (false, true, false) => &u * pp(p, -h - c),
                (false, true, true) => zero(),
                (false, false, false) => &u * &u * pp(p, -c),
                (false, false, true) => int(k.rho) * &u * pp(p, -f - c),
            },
            (_, 0) => {
                if h > 0 {
                    zero()
                } else if f <= b {
                    let gg = g.max(f);
                    let lambda = if gg == 0 { u.clone() } else { pp(p, -gg) };
                    pp(p, -b) * &u * lambda
                } else if g <= b {
                    pp(p, -b - f) * &u
                } else {
                    zero()
                }
            }
            _ => {
                if g > 0 || h > 0 {
                    zero()
                } else if f <= b.min(c) {
                    full(p, d.b, d.c)
                } else if b == c {
                    pp(p, -f - c) * &u
                } else {
                    zero()
                }
            }
        },
        Regime::Two => {
            if f > 0 || h > 0 || (g > b.min(c) && b != c) {
                zero()
            } else if g <= b.min(c) {
                full(p, d.b, d.c)
            } else {
                pp(p, -b - g) * &u
            }
        }
        Regime::Three => {
            if g > 0 {
                zero()
            } else if 3 * b == c {
                match (h <= b, f <= c) {
                    (false, _) => zero(),
                    (true, true) => full(p, d.b, d.c),
                    (true, false) => pp(p, -f - b) * &u,
                }
            } else if b == c {
                match (f <= c, h <= b) {
                    (false, _) => zero(),
                    (true, true) => full(p, d.b, d.c),
                    (true, false) => pp(p, -h - b) * &u,
                }
            } else if f <= (3 * b).min(c) && h <= b.min(c) {
                full(p, d.b, d.c)
            } else {
                zero()
            }
        }
    })
}

/// Closed form of `d'(B, 0, F, G, 0)` for `B >= 1`.
pub fn d_prime_closed_form(b: u32, f: u32, g: u32, k: &ChartCounts) -> ExactRational {
    let p = k.p;
    let u = unit_measure(p);
    let mu_c = if g == 0 { BigRational::new((p as i64 - 2).into(), (p as i64).into()) } else { pp(p, -(g as i64)) * &u };
    if f <= b.min(g) {
        pp(p, -(b as i64)) * &u * mu_c
    } else if b == g {
        pp(p, -((b + f) as i64)) * &u
    } else {
        zero()
    }
}

/// How a displayed statement relates to a given input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Printed {
    /// `None` when the text gives no value here (or calls it uniform and neglects it).
    pub value: Option<ExactRational>,
    pub formula_id: &'static str,
    /// Value after reading the text under the declared conventions and the
    /// two sanctioned typo corrections, when that differs from `value`.
    pub reading: Option<ExactRational>,
}

impl Printed {
    fn literal(formula_id: &'static str, value: Option<ExactRational>) -> Self {
        Self { value, formula_id, reading: None }
    }

    fn read_as(formula_id: &'static str, value: Option<ExactRational>, reading: ExactRational) -> Self {
        Self { value, formula_id, reading: Some(reading) }
    }

    /// The value to hold against the oracle.
    pub fn effective(&self) -> Option<&ExactRational> {
        self.reading.as_ref().or(self.value.as_ref())
    }
}

/// The displayed statement covering `d(B, C, F, G, H)`.
///
/// Declared convention for the point-count cases with `B = C = 0`: a count
/// `|X(F_p)|` means the points of X with b and c both units, and the factor
/// `p^{-F+1}` reads `p^{-F-1}`; `|E(F_p)| - 1` therefore reads as the unit
/// count.
pub fn d_printed(regime: Regime, d: DProfile, k: &ChartCounts) -> Printed {
    let p = k.p;
    let u = unit_measure(p);
    let (b, c, f, g, h) = (d.b as i64, d.c as i64, d.f as i64, d.g as i64, d.h as i64);
    match regime {
        Regime::One => match (b, c) {
            (0, 0) => match (f > 0, g > 0, h > 0) {
                (false, false, false) => Printed::literal("eight-case-1", Some(&u * &u)),
                (true, false, false) => Printed::read_as(
                    "eight-case-2",
                    Some(int(k.projective - 1) * pp(p, 1 - f)),
                    int(k.unit) * pp(p, -1 - f),
                ),
                (false, true, false) => Printed::literal("eight-case-3", Some(&u * pp(p, -g))),
                (false, false, true) => Printed::literal("eight-case-4", Some(&u * pp(p, -h))),
                (false, true, true) => Printed::literal("eight-case-5", Some(pp(p, -g - h))),
                (true, false, true) if h == 1 => Printed::read_as(
                    "eight-case-6",
                    Some(int(k.e_m1) * pp(p, 1 - f)),
                    int(k.e_m1) * pp(p, -1 - f),
                ),
                (true, true, false) if g == 1 => Printed::read_as(
                    "eight-case-7",
                    Some(int(k.e_m2) * pp(p, 1 - f)),
                    int(k.rho) * pp(p, -1 - f),
                ),
                (true, true, true) if g == 1 && h == 1 => Printed::read_as(
                    "eight-case-8",
                    Some(int(k.e_m1_m2) * pp(p, 1 - f)),
                    int(k.e_m1_m2) * pp(p, -1 - f),
                ),
                (true, false, true) => Printed::literal("eight-case-6", None),
                (true, true, false) => Printed::literal("eight-case-7", None),
                _ => Printed::literal("eight-case-8", None),
            },
            (0, _) => {
                if g > 0 {
                    Printed::literal("d1-b0", Some(zero()))
                } else if h > 0 {
                    Printed::literal("d1-b0(1)", if f > 0 { Some(zero()) } else { None })
                } else if (1..=c).contains(&f) {
                    Printed::literal("d1-b0(2)", Some(int(2) * pp(p, -f - c) * &u))
                } else {
                    Printed::literal("d1-b0(2)", None)
                }
            }
            (_, 0) => {
                if h > 0 {
                    Printed::literal("d1-c0", Some(zero()))
                } else {
                    Printed::literal("d1-c0", None)
                }
            }
            _ => {
                if g > 0 || h > 0 {
                    Printed::literal("d1", Some(zero()))
                } else if f <= b.min(c) {
                    Printed::literal("d1(1)", Some(full(p, d.b, d.c)))
                } else {
                    // Branch (2) is printed with the condition F < min{B, C}.
                    let v = if b == c { pp(p, -f - c) * &u } else { zero() };
                    Printed::read_as("d1(2)", None, v)
                }
            }
        },
        Regime::Two => {
            if f > 0 || h > 0 {
                Printed::literal("d2", Some(zero()))
            } else if g > b.min(c) {
                Printed::literal("d2(1)", Some(zero()))
            } else {
                let inv_u = unit_measure(p).recip();
                let printed = pp(p, -b - c) * &inv_u * &inv_u;
                Printed::read_as("d2(2)", Some(printed), full(p, d.b, d.c))
            }
        }
        Regime::Three => {
            let (m3, m1) = ((3 * b).min(c), b.min(c));
            if g > 0 {
                Printed::literal("d3", Some(zero()))
            } else if f <= m3 && h <= m1 {
                Printed::literal("d3(1)", Some(full(p, d.b, d.c)))
            } else if (f > m3 && 3 * b != c) || (h > m1 && b != c) {
                Printed::literal("d3(2)", Some(zero()))
            } else if f > m3 && 3 * b == c && h <= m1 {
                Printed::literal("d3(3)", Some(pp(p, -f - b) * &u))
            } else if h > m1 && b == c && f <= m3 {
                Printed::literal("d3(4)", Some(pp(p, -h - b) * &u))
            } else {
                Printed::literal("d3", None)
            }
        }
    }
}

/// Displayed statement for `d'(B, 0, F, G, 0)`.
pub fn d_prime_printed(b: u32, f: u32, g: u32) -> Printed {
    if f > b.min(g) {
        Printed::literal("d1-c0(1)", Some(zero()))
    } else {
        Printed::literal("d1-c0(2)", None)
    }
}

/// `d(B, C, F, G, H)` for a curve at a good prime.
pub fn d_measure(regime: Regime, d: DProfile, e: &EllipticNormalForm, p: u64) -> Result<ExactRational> {
    let k = ChartCounts::new(e, p)?;
    d_closed_form(regime, d, &k)
        .ok_or_else(|| Error::InvalidInput(format!("case {} needs B >= 1 (and C >= 1 for case 3)", regime.number())))
}

/// Inputs of Phi: `A = v(a)`, `B = v(b~)`, `C = v(c)` and `N2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PhiInput {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub n2: u32,
}

/// The displayed four-branch value of `mu(Phi)`.
pub fn phi_measure(x: PhiInput, p: u64) -> ExactRational {
    let (a, b, c, n2) = (x.a as i64, x.b as i64, x.c as i64, x.n2 as i64);
    if b != a + c {
        if n2 - c > a.min(b - c) {
            zero()
        } else {
            pp(p, -a) * unit_measure(p)
        }
    } else if a + c > n2 {
        pp(p, c - n2)
    } else {
        pp(p, -a)
    }
}

/// Which displayed branch of Phi applies.
pub fn phi_branch(x: PhiInput) -> u8 {
    let (a, b, c, n2) = (x.a as i64, x.b as i64, x.c as i64, x.n2 as i64);
    match (b != a + c, n2 - c > a.min(b - c), a + c > n2) {
        (true, true, _) => 1,
        (true, false, _) => 2,
        (false, _, true) => 3,
        (false, _, false) => 4,
    }
}

/// Measure of `{a : v(a) = A, a c ≡ b~ mod p^{N2}}` for `v(c) = C`,
/// `v(b~) = B`: the set Phi read as an intersection.
pub fn phi_closed_form(x: PhiInput, p: u64) -> ExactRational {
    let (a, b, c, n2) = (x.a as i64, x.b as i64, x.c as i64, x.n2 as i64);
    let u = unit_measure(p);
    if b != a + c {
        if a + c >= n2 && b >= n2 {
            pp(p, -a) * u
        } else {
            zero()
        }
    } else if b < n2 {
        pp(p, c - n2)
    } else {
        pp(p, -a) * u
    }
}

/// Oracle set for Phi with `c = p^C u_c`, `b~ = p^B u_b`; the variable `b`
/// of the spec plays the role of `a`.
pub fn phi_set(x: PhiInput, p: u64, unit_c: i64, unit_b: i64) -> PadicSetSpec {
    let pc = (p as i128).pow(x.c) * unit_c as i128;
    let pb = (p as i128).pow(x.b) * unit_b as i128;
    PadicSetSpec::new().v_eq(BcPoly::b(), x.a).v_ge(BcPoly::new(vec![(pc, 1, 0), (-pb, 0, 0)]), x.n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::oracle::measure_oracle;

    fn curve() -> EllipticNormalForm {
        EllipticNormalForm::new(-2, -1, 1)
    }

    fn oracle(spec: &PadicSetSpec, p: u64) -> ExactRational {
        measure_oracle(spec, p, spec.stabilization_level()).unwrap()
    }

    #[test]
    fn regime_one_example() {
        let k = ChartCounts::new(&curve(), 5).unwrap();
        let d = DProfile::new(2, 2, 1, 0, 0);
        let u = unit_measure(5);
        assert_eq!(d_closed_form(Regime::One, d, &k).unwrap(), pp(5, -4) * &u * &u);
    }

    #[test]
    fn eight_case_5_example() {
        let k = ChartCounts::new(&curve(), 7).unwrap();
        let d = DProfile::new(0, 0, 0, 2, 1);
        assert_eq!(d_closed_form(Regime::One, d, &k).unwrap(), pp(7, -3));
        assert_eq!(d_printed(Regime::One, d, &k).value.unwrap(), pp(7, -3));
    }

    #[test]
    fn unit_count_at_p5() {
        // alpha_1 = 0 here, so only the oracle applies.
        let e = EllipticNormalForm::new(0, -1, 0);
        let unit = count_points_elliptic(&e, 5).unwrap().unit_affine;
        let spec = d_set(Regime::One, DProfile::new(0, 0, 1, 0, 0), e.pattern_params());
        assert_eq!(oracle(&spec, 5), int(unit) * pp(5, -2));
    }

    #[test]
    fn phi_examples() {
        let x = PhiInput { a: 1, b: 1, c: 0, n2: 2 };
        assert_eq!(phi_measure(x, 3), pp(3, -1));
        let x = PhiInput { a: 2, b: 3, c: 1, n2: 2 };
        assert_eq!(phi_branch(x), 3);
        assert_eq!(phi_measure(x, 3), pp(3, -1));
        let x = PhiInput { a: 0, b: 1, c: 0, n2: 2 };
        assert_eq!(phi_branch(x), 1);
        assert!(phi_measure(x, 3).is_zero());
    }

    #[test]
    fn closed_forms_match_oracle_small_grid() {
        let k = ChartCounts::new(&curve(), 3).unwrap();
        for regime in [Regime::One, Regime::Two, Regime::Three] {
            for b in 0..3 {
                for c in 0..3 {
                    if !regime.admits(b, c) {
                        continue;
                    }
                    for f in 0..3 {
                        for g in 0..3 {
                            for h in 0..3 {
                                let d = DProfile::new(b, c, f, g, h);
                                let closed = d_closed_form(regime, d, &k).unwrap();
                                assert_eq!(closed, oracle(&d_set(regime, d, k.params), 3), "{regime:?} {d}");
                            }
                        }
                    }
                }
            }
        }
        for b in 1..3 {
            for f in 0..3 {
                for g in 0..3 {
                    assert_eq!(d_prime_closed_form(b, f, g, &k), oracle(&d_prime_set(b, f, g, k.params), 3));
                }
            }
        }
    }

    #[test]
    fn phi_closed_form_matches_oracle() {
        for p in [3u64, 5] {
            for a in 0..3 {
                for b in 0..4 {
                    for c in 0..3 {
                        for n2 in 0..3 {
                            let x = PhiInput { a, b, c, n2 };
                            for (uc, ub) in [(1, 1), (p as i64 - 1, 1), (1, 2)] {
                                assert_eq!(phi_closed_form(x, p), oracle(&phi_set(x, p, uc, ub), p), "{x:?}");
                            }
                        }
                    }
                }
            }
        }
    }
}
