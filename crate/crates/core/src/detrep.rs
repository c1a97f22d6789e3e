//! Determinantal representations: the 3x3 elliptic matrix F and the 6x6
//! genus-2 matrix G, with exact verification against the curve.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::curves::{CurveSpec, EllipticNormalForm, Genus2NormalForm};
use crate::error::{Error, Result};
use crate::poly::{det_poly, poly_equal, LinearForm, LinearFormMatrix, MultiPoly};

/// How the determinant locus relates to the input Weierstrass curve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalization {
    /// The curve is `{det(F)(x_sign * X, Y, Z) = 0}`.
    pub x_sign: i64,
    /// Paper parameters derived from the Weierstrass coefficients.
    pub params_from_curve: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticDetRep {
    /// Parameters (a1, a2, a3) substituted verbatim into the printed pattern.
    pub params: (i64, i64, i64),
    pub matrix: LinearFormMatrix,
    pub normalization: Normalization,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Genus2DetRep {
    pub betas: [BigRational; 7],
    /// Present when every beta is an integer.
    pub matrix: Option<LinearFormMatrix>,
    pub integral: bool,
    /// All right-hand coefficients vanish, so beta_1..beta_5 are free (set to 0).
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Infeasibility {
    /// Coefficient equations that could not be satisfied, after substitution.
    pub residual: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetRep {
    Elliptic(EllipticDetRep),
    Genus2(Genus2DetRep),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepCheck {
    pub ok: bool,
    /// `det - curve`, scaled by the common denominator of its coefficients.
    pub residual: MultiPoly,
}

fn lf(x: i64, y: i64, z: i64) -> LinearForm {
    LinearForm::new(x, y, z)
}

/// The printed 3x3 pattern with integer parameters.
pub fn elliptic_pattern(a1: i64, a2: i64, a3: i64) -> LinearFormMatrix {
    LinearFormMatrix::new(vec![
        vec![lf(a1, 0, a2), lf(1, 0, 0), lf(0, 1, a3)],
        vec![lf(1, 0, 0), lf(0, 0, 1), LinearForm::ZERO],
        vec![lf(0, 1, 0), LinearForm::ZERO, lf(1, 0, 0)],
    ])
    .expect("square")
}

pub fn elliptic_symbolic_vars() -> Arc<Vec<String>> {
    MultiPoly::variables(&["X", "Y", "Z", "a1", "a2", "a3"])
}

/// The printed matrix F with a1, a2, a3 left symbolic.
pub fn elliptic_symbolic_matrix() -> Vec<Vec<MultiPoly>> {
    let v = elliptic_symbolic_vars();
    let var = |n: &str| MultiPoly::var(&v, n);
    let zero = MultiPoly::zero(&v);
    vec![
        vec![&(&var("a1") * &var("X")) + &(&var("a2") * &var("Z")), var("X"), &var("Y") + &(&var("a3") * &var("Z"))],
        vec![var("X"), var("Z"), zero.clone()],
        vec![var("Y"), zero, var("X")],
    ]
}

/// `a1 X^2 Z + a2 X Z^2 - X^3 - Y^2 Z - a3 Y Z^2` over the given variables;
/// the parameters may be integers or symbols present in `vars`.
pub fn elliptic_pattern_det(vars: &Arc<Vec<String>>, a: [MultiPoly; 3]) -> MultiPoly {
    let var = |n: &str| MultiPoly::var(vars, n);
    let (x, y, z) = (var("X"), var("Y"), var("Z"));
    let t1 = &(&a[0] * &x.pow(2)) * &z;
    let t2 = &(&a[1] * &x) * &z.pow(2);
    let t3 = &(&a[2] * &y) * &z.pow(2);
    &(&(&(&t1 + &t2) - &x.pow(3)) - &(&y.pow(2) * &z)) - &t3
}

/// Homogeneous Weierstrass polynomial `Y^2 Z + a3 Y Z^2 - X^3 - a1 X^2 Z - a2 X Z^2`.
pub fn elliptic_homogeneous(e: &EllipticNormalForm) -> MultiPoly {
    let v = MultiPoly::variables(&["X", "Y", "Z"]);
    let var = |n: &str| MultiPoly::var(&v, n);
    let c = |k: i64| BigInt::from(k);
    let (x, y, z) = (var("X"), var("Y"), var("Z"));
    let mut p = &y.pow(2) * &z;
    p = &p + &(&y * &z.pow(2)).scale(&c(e.a3));
    p = &p - &x.pow(3);
    p = &p - &(&x.pow(2) * &z).scale(&c(e.a1));
    &p - &(&x * &z.pow(2)).scale(&c(e.a2))
}

impl EllipticDetRep {
    /// The printed pattern with the given parameters, determinant checked.
    pub fn from_pattern_params(a1: i64, a2: i64, a3: i64) -> Self {
        let matrix = elliptic_pattern(a1, a2, a3);
        let v = MultiPoly::variables(&["X", "Y", "Z"]);
        let consts = [a1, a2, a3].map(|a| MultiPoly::constant(&v, a));
        assert!(
            poly_equal(&matrix.det(), &elliptic_pattern_det(&v, consts)).unwrap(),
            "determinant identity of the elliptic pattern failed"
        );
        Self {
            params: (a1, a2, a3),
            matrix,
            normalization: Normalization { x_sign: 1, params_from_curve: "verbatim".into() },
        }
    }

    pub fn det(&self) -> MultiPoly {
        self.matrix.det()
    }
}

/// Representation whose determinant locus is `E` after `X -> -X`:
/// the pattern is filled with `(a1, -a2, a3)`.
pub fn build_elliptic_rep(e: &EllipticNormalForm) -> EllipticDetRep {
    let (a1, a2, a3) = e.pattern_params();
    let mut rep = EllipticDetRep::from_pattern_params(a1, a2, a3);
    rep.normalization = Normalization { x_sign: -1, params_from_curve: "(a1, -a2, a3)".into() };
    rep
}

pub fn genus2_symbolic_vars() -> Arc<Vec<String>> {
    MultiPoly::variables(&["X", "Y", "Z", "b1", "b2", "b3", "b4", "b5", "b6", "b7"])
}

/// The printed 6x6 matrix G with beta_1..beta_7 symbolic.
pub fn genus2_symbolic_matrix() -> Vec<Vec<MultiPoly>> {
    let v = genus2_symbolic_vars();
    let var = |n: &str| MultiPoly::var(&v, n);
    let z0 = MultiPoly::zero(&v);
    let (x, y, z) = (var("X"), var("Y"), var("Z"));
    let m = |a: &str, f: &MultiPoly| &var(a) * f;
    vec![
        vec![y.clone(), x.clone(), m("b1", &x), z0.clone(), &m("b2", &x) + &m("b3", &z), m("b4", &z)],
        vec![z0.clone(), z.clone(), x.clone(), m("b5", &z), z0.clone(), z0.clone()],
        vec![z0.clone(), z0.clone(), z.clone(), x.clone(), z0.clone(), z0.clone()],
        vec![z0.clone(), z0.clone(), z0.clone(), z.clone(), x.clone(), z0.clone()],
        vec![z0.clone(), z0.clone(), z0.clone(), z0.clone(), z.clone(), x.clone()],
        vec![m("b6", &x), z0.clone(), z0.clone(), z0.clone(), z0, &y + &m("b7", &z)],
    ]
}

/// Full symbolic determinant of G, computed once.
pub fn genus2_symbolic_det() -> &'static MultiPoly {
    static DET: OnceLock<MultiPoly> = OnceLock::new();
    DET.get_or_init(|| det_poly(&genus2_symbolic_matrix()))
}

pub fn genus2_matrix(b: [i64; 7]) -> LinearFormMatrix {
    let z = LinearForm::ZERO;
    LinearFormMatrix::new(vec![
        vec![lf(0, 1, 0), lf(1, 0, 0), lf(b[0], 0, 0), z, lf(b[1], 0, b[2]), lf(0, 0, b[3])],
        vec![z, lf(0, 0, 1), lf(1, 0, 0), lf(0, 0, b[4]), z, z],
        vec![z, z, lf(0, 0, 1), lf(1, 0, 0), z, z],
        vec![z, z, z, lf(0, 0, 1), lf(1, 0, 0), z],
        vec![z, z, z, z, lf(0, 0, 1), lf(1, 0, 0)],
        vec![lf(b[5], 0, 0), z, z, z, z, lf(0, 1, b[6])],
    ])
    .expect("square")
}

/// `Y^2 Z^4 + b Y Z^5 - a0 X^6 - ... - a5 X Z^5`.
pub fn genus2_homogeneous(c: &Genus2NormalForm) -> MultiPoly {
    let v = MultiPoly::variables(&["X", "Y", "Z"]);
    let var = |n: &str| MultiPoly::var(&v, n);
    let (x, y, z) = (var("X"), var("Y"), var("Z"));
    let mut p = &y.pow(2) * &z.pow(4);
    p = &p + &(&y * &z.pow(5)).scale(&BigInt::from(c.b));
    for (i, &a) in c.a.iter().enumerate() {
        let mono = &x.pow(6 - i as u32) * &z.pow(i as u32);
        p = &p - &mono.scale(&BigInt::from(a));
    }
    p
}

/// Solve for the betas by matching the coefficients of X^6, X^5 Z, ..., X Z^5.
pub fn fit_genus2_betas(c: &Genus2NormalForm) -> std::result::Result<Genus2DetRep, Infeasibility> {
    let det = genus2_symbolic_det();
    let vars = det.vars().clone();
    let beta_idx = |i: usize| 2 + i; // b1 sits at index 3
    let mut known: Vec<Option<BigRational>> = vec![None; vars.len()];
    known[beta_idx(7)] = Some(BigRational::from_integer(BigInt::from(c.b)));

    let xyz = ["X", "Y", "Z"];
    let equations: Vec<MultiPoly> = (0..6)
        .map(|i| {
            let coeff = det.coefficient_of(&xyz, &[6 - i as u32, 0, i as u32]);
            &coeff + &MultiPoly::constant(&vars, c.a[i])
        })
        .collect();

    let mut used = vec![false; equations.len()];
    loop {
        let mut progress = false;
        for (n, eq) in equations.iter().enumerate() {
            if used[n] {
                continue;
            }
            let unknown: Vec<usize> = eq.support().into_iter().filter(|&i| known[i].is_none()).collect();
            match unknown.as_slice() {
                [] => {
                    used[n] = true;
                    if !eq.eval_rational(&fill(&known)).is_zero() {
                        return Err(infeasible(&equations, &known));
                    }
                    progress = true;
                }
                [u] => {
                    let coeffs = eq.univariate_in(*u, &known).expect("other variables known");
                    match coeffs.len() {
                        0 => {
                            used[n] = true;
                            progress = true;
                        }
                        1 => return Err(infeasible(&equations, &known)),
                        2 => {
                            known[*u] = Some(-&coeffs[0] / &coeffs[1]);
                            used[n] = true;
                            progress = true;
                        }
                        _ => {}
                    }
                }
                _ => {}
            }
            if progress {
                break;
            }
        }
        if !progress {
            break;
        }
    }

    let free: Vec<usize> = (1..=6).map(beta_idx).filter(|&i| known[i].is_none()).collect();
    let degenerate = !free.is_empty();
    if degenerate && c.a.iter().any(|&a| a != 0) {
        return Err(infeasible(&equations, &known));
    }
    for i in free {
        known[i] = Some(BigRational::zero());
    }
    let betas: [BigRational; 7] = std::array::from_fn(|i| known[beta_idx(i + 1)].clone().unwrap());
    let integral = betas.iter().all(|b| b.is_integer());
    let matrix = if integral {
        let ints: Option<Vec<i64>> = betas.iter().map(|b| b.to_integer().to_i64()).collect();
        ints.map(|v| genus2_matrix(v.try_into().unwrap()))
    } else {
        None
    };
    let rep = Genus2DetRep { betas, matrix, integral, degenerate };
    let check = verify_genus2(&rep, c);
    if !check.ok {
        return Err(Infeasibility { residual: vec![check.residual.to_string()] });
    }
    Ok(rep)
}

fn fill(known: &[Option<BigRational>]) -> Vec<BigRational> {
    known.iter().map(|k| k.clone().unwrap_or_else(BigRational::zero)).collect()
}

fn infeasible(equations: &[MultiPoly], known: &[Option<BigRational>]) -> Infeasibility {
    let residual = equations
        .iter()
        .map(|eq| {
            let subs: Vec<(String, BigRational)> = eq
                .support()
                .into_iter()
                .filter_map(|i| known[i].clone().map(|v| (eq.vars()[i].clone(), v)))
                .collect();
            if subs.is_empty() {
                format!("{eq} = 0")
            } else {
                let s: Vec<String> = subs.iter().map(|(n, v)| format!("{n}={v}")).collect();
                format!("{eq} = 0 with {}", s.join(", "))
            }
        })
        .collect();
    Infeasibility { residual }
}

/// Exact comparison of det(G) at the fitted betas with the curve polynomial.
pub fn verify_genus2(rep: &Genus2DetRep, c: &Genus2NormalForm) -> RepCheck {
    let det = genus2_symbolic_det();
    let mut acc: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
    for (e, coef) in det.terms() {
        let mut val = BigRational::from_integer(coef.clone());
        for (i, beta) in rep.betas.iter().enumerate() {
            val *= beta.pow(e[3 + i] as i32);
        }
        *acc.entry(e[..3].to_vec()).or_insert_with(BigRational::zero) += val;
    }
    for (e, coef) in genus2_homogeneous(c).terms() {
        *acc.entry(e.clone()).or_insert_with(BigRational::zero) -= BigRational::from_integer(coef.clone());
    }
    acc.retain(|_, v| !v.is_zero());
    let denom = acc.values().fold(BigInt::one(), |l, v| l.lcm(v.denom()));
    let v = MultiPoly::variables(&["X", "Y", "Z"]);
    let mut residual = MultiPoly::zero(&v);
    for (e, val) in acc {
        residual.add_term(e, (val * BigRational::from_integer(denom.clone())).to_integer());
    }
    RepCheck { ok: residual.is_zero(), residual }
}

/// `det(F)(x_sign * X, Y, Z) + E_hom` must vanish; for a verbatim rep the
/// curve is compared after the same substitution.
pub fn verify_elliptic(rep: &EllipticDetRep, e: &EllipticNormalForm) -> RepCheck {
    let mut det = rep.det();
    if rep.normalization.x_sign < 0 {
        det = det.negate_var("X");
    }
    let residual = &det + &elliptic_homogeneous(e);
    RepCheck { ok: residual.is_zero(), residual }
}

pub fn verify_rep(rep: &DetRep, curve: &CurveSpec) -> Result<RepCheck> {
    match (rep, curve) {
        (DetRep::Elliptic(r), CurveSpec::Elliptic(e)) => Ok(verify_elliptic(r, e)),
        (DetRep::Genus2(r), CurveSpec::Genus2(c)) => Ok(verify_genus2(r, c)),
        _ => Err(Error::InvalidInput("representation and curve kinds differ".into())),
    }
}

/// Integer betas of a fitted representation, when they all are integers.
pub fn integral_betas(rep: &Genus2DetRep) -> Option<[i64; 7]> {
    let v: Option<Vec<i64>> = rep
        .betas
        .iter()
        .map(|b| if b.is_integer() { b.to_integer().to_i64() } else { None })
        .collect();
    v.map(|v| v.try_into().unwrap())
}

pub fn betas_display(rep: &Genus2DetRep) -> String {
    let s: Vec<String> = rep
        .betas
        .iter()
        .map(|b| if b.is_negative() { format!("({b})") } else { b.to_string() })
        .collect();
    s.join(",")
}
