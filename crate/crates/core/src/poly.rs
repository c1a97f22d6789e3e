//! Sparse multivariate integer polynomials and exact determinants of
//! matrices of linear forms.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl MultiPoly {
    pub fn zero(vars: &Arc<Vec<String>>) -> Self {
        Self { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &Arc<Vec<String>>, c: impl Into<BigInt>) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(vec![0; vars.len()], c.into());
        p
    }

    pub fn var(vars: &Arc<Vec<String>>, name: &str) -> Self {
        let idx = vars
            .iter()
            .position(|v| v == name)
            .unwrap_or_else(|| panic!("unknown variable {name}"));
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        let mut p = Self::zero(vars);
        p.add_term(exps, BigInt::one());
        p
    }

    pub fn variables(vars: &[&str]) -> Arc<Vec<String>> {
        Arc::new(vars.iter().map(|s| s.to_string()).collect())
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &[u32]) -> BigInt {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigInt) {
        assert_eq!(exps.len(), self.vars.len());
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        let mut out = Self::zero(&self.vars);
        if !c.is_zero() {
            out.terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::constant(&self.vars, 1);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Total degrees of all monomials, sorted and deduplicated.
    pub fn total_degrees(&self) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|e| e.iter().sum()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Total degree in the named subset of variables, for every monomial.
    pub fn degrees_in(&self, names: &[&str]) -> Vec<u32> {
        let idx: Vec<usize> = names.iter().filter_map(|n| self.vars.iter().position(|v| v == n)).collect();
        let mut d: Vec<u32> = self.terms.keys().map(|e| idx.iter().map(|&i| e[i]).sum()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        assert_eq!(point.len(), self.vars.len());
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(point).fold(c.clone(), |acc, (&k, x)| acc * x.pow(k))
            })
            .sum()
    }

    pub fn eval_i128(&self, point: &[i128]) -> BigInt {
        let big: Vec<BigInt> = point.iter().map(|&x| BigInt::from(x)).collect();
        self.eval(&big)
    }

    /// Substitute integers for some variables (by name), keeping the variable list.
    pub fn substitute(&self, values: &[(&str, BigInt)]) -> Self {
        let idx: Vec<(usize, &BigInt)> = values
            .iter()
            .map(|(n, v)| (self.vars.iter().position(|x| x == n).expect("unknown variable"), v))
            .collect();
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            let mut c = c.clone();
            for &(i, v) in &idx {
                c *= v.pow(e[i]);
                e[i] = 0;
            }
            out.add_term(e, c);
        }
        out
    }

    /// Apply `var -> sign * var` for the named variable.
    pub fn negate_var(&self, name: &str) -> Self {
        let i = self.vars.iter().position(|x| x == name).expect("unknown variable");
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            let c = if e[i] % 2 == 1 { -c } else { c.clone() };
            out.add_term(e.clone(), c);
        }
        out
    }

    /// Coefficient polynomial of `X^e` where the named variables carry the
    /// given exponents: the remaining variables stay symbolic.
    pub fn coefficient_of(&self, names: &[&str], exps: &[u32]) -> Self {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.vars.iter().position(|x| x == n).expect("unknown variable"))
            .collect();
        let mut out = Self::zero(&self.vars);
        for (e, c) in &self.terms {
            if idx.iter().zip(exps).all(|(&i, &k)| e[i] == k) {
                let mut e = e.clone();
                for &i in &idx {
                    e[i] = 0;
                }
                out.add_term(e, c.clone());
            }
        }
        out
    }

    /// The variables (by index) that actually occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|&i| self.terms.keys().any(|e| e[i] > 0))
            .collect()
    }

    /// Treat the polynomial as univariate in `var` once every other occurring
    /// variable has a known rational value; returns coefficients by degree.
    pub fn univariate_in(&self, var: usize, known: &[Option<BigRational>]) -> Option<Vec<BigRational>> {
        let mut coeffs: Vec<BigRational> = Vec::new();
        for (e, c) in &self.terms {
            let mut value = BigRational::from_integer(c.clone());
            for (i, &k) in e.iter().enumerate() {
                if i == var || k == 0 {
                    continue;
                }
                value *= known[i].as_ref()?.pow(k as i32);
            }
            let d = e[var] as usize;
            if coeffs.len() <= d {
                coeffs.resize(d + 1, BigRational::zero());
            }
            coeffs[d] += value;
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Some(coeffs)
    }

    pub fn eval_rational(&self, point: &[BigRational]) -> BigRational {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(BigRational::from_integer(c.clone()), |acc, (&k, x)| acc * x.pow(k as i32))
            })
            .fold(BigRational::zero(), |a, b| a + b)
    }

    fn check_vars(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "polynomials over different variable lists"
        );
    }
}

pub fn poly_equal(a: &MultiPoly, b: &MultiPoly) -> Result<bool> {
    if a.vars != b.vars {
        return Err(Error::InvalidInput("variable lists differ".into()));
    }
    Ok(a.terms == b.terms)
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        self + &(-rhs)
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        self.check_vars(rhs);
        let mut acc: BTreeMap<Vec<u32>, BigInt> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_default() += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        MultiPoly { vars: self.vars.clone(), terms: acc }
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for MultiPoly {
            type Output = MultiPoly;
            fn $f(self, rhs: MultiPoly) -> MultiPoly { (&self).$f(&rhs) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first, then lexicographically descending.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| {
            let (da, db): (u32, u32) = (a.0.iter().sum(), b.0.iter().sum());
            db.cmp(&da).then_with(|| b.0.cmp(a.0))
        });
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let monomial: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { self.vars[i].clone() } else { format!("{}^{k}", self.vars[i]) })
                .collect();
            let sign = if c.is_negative() { "-" } else { "+" };
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mag = c.abs();
            if monomial.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", monomial.join("*"))?;
            } else {
                write!(f, "{mag}*{}", monomial.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({self})")
    }
}

/// Homogeneous integer linear form `x*X + y*Y + z*Z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinearForm {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl LinearForm {
    pub const ZERO: LinearForm = LinearForm { x: 0, y: 0, z: 0 };
    pub const X: LinearForm = LinearForm { x: 1, y: 0, z: 0 };
    pub const Y: LinearForm = LinearForm { x: 0, y: 1, z: 0 };
    pub const Z: LinearForm = LinearForm { x: 0, y: 0, z: 1 };

    pub fn new(x: i64, y: i64, z: i64) -> Self {
        Self { x, y, z }
    }

    pub fn coeffs(&self) -> [i64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }

    pub fn to_poly(&self, vars: &Arc<Vec<String>>) -> MultiPoly {
        let mut p = MultiPoly::zero(vars);
        for (name, c) in ["X", "Y", "Z"].iter().zip(self.coeffs()) {
            p = &p + &MultiPoly::var(vars, name).scale(&BigInt::from(c));
        }
        p
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = MultiPoly::variables(&["X", "Y", "Z"]);
        write!(f, "{}", self.to_poly(&vars))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearFormMatrix {
    entries: Vec<Vec<LinearForm>>,
}

impl LinearFormMatrix {
    pub fn new(entries: Vec<Vec<LinearForm>>) -> Result<Self> {
        let d = entries.len();
        if entries.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("linear form matrix must be square".into()));
        }
        Ok(Self { entries })
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> LinearForm {
        self.entries[i][j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: LinearForm) {
        self.entries[i][j] = f;
    }

    pub fn rows(&self) -> &[Vec<LinearForm>] {
        &self.entries
    }

    pub fn to_poly_matrix(&self) -> Vec<Vec<MultiPoly>> {
        let vars = MultiPoly::variables(&["X", "Y", "Z"]);
        self.entries
            .iter()
            .map(|r| r.iter().map(|f| f.to_poly(&vars)).collect())
            .collect()
    }

    pub fn det(&self) -> MultiPoly {
        det_poly(&self.to_poly_matrix())
    }
}

/// Exact determinant by Laplace expansion along rows, memoised on the set
/// of remaining columns.
pub fn det_poly(m: &[Vec<MultiPoly>]) -> MultiPoly {
    let n = m.len();
    assert!(n > 0 && n <= 16 && m.iter().all(|r| r.len() == n), "square matrix expected");
    let vars = m[0][0].vars().clone();
    let mut memo: HashMap<u32, MultiPoly> = HashMap::new();
    memo.insert(0, MultiPoly::constant(&vars, 1));
    fn go(m: &[Vec<MultiPoly>], cols: u32, memo: &mut HashMap<u32, MultiPoly>) -> MultiPoly {
        if let Some(v) = memo.get(&cols) {
            return v.clone();
        }
        let n = m.len();
        let row = n - cols.count_ones() as usize;
        let mut acc = MultiPoly::zero(m[0][0].vars());
        let mut sign_pos = true;
        for c in 0..n {
            if cols & (1 << c) == 0 {
                continue;
            }
            let entry = &m[row][c];
            if !entry.is_zero() {
                let minor = go(m, cols & !(1 << c), memo);
                let term = entry * &minor;
                acc = if sign_pos { &acc + &term } else { &acc - &term };
            }
            sign_pos = !sign_pos;
        }
        memo.insert(cols, acc.clone());
        acc
    }
    go(m, (1u32 << n) - 1, &mut memo)
}

/// Exact integer determinant by fraction-free (Bareiss) elimination.
pub fn det_bigint(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
