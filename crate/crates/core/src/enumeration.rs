//! Counting ideals and subalgebras of index p^n through Hermite pairs (M, N).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liering::{center_matrix, in_center_lattice, ClassTwoLieRing};
use crate::padic::{adjugate3, det3, pow_i128, pow_u128, solution_exponent, Congruence, Mat3, PrimePowerModulus};

pub const DEFAULT_BUDGET: u128 = 100_000_000;
/// Auto mode brute-forces a diagonal only when its search space is this small.
pub const DEFAULT_BRUTE_LIMIT: u128 = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DiagonalVector {
    pub m: Vec<u32>,
    pub n: [u32; 3],
}

impl DiagonalVector {
    pub fn new(m: Vec<u32>, n: [u32; 3]) -> Self {
        Self { m, n }
    }

    pub fn total(&self) -> u32 {
        self.m.iter().sum::<u32>() + self.n.iter().sum::<u32>()
    }

    pub fn central_total(&self) -> u32 {
        self.n.iter().sum()
    }
}

impl fmt::Display for DiagonalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m: Vec<String> = self.m.iter().map(|x| x.to_string()).collect();
        write!(f, "{}|{},{},{}", m.join(","), self.n[0], self.n[1], self.n[2])
    }
}

impl FromStr for DiagonalVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::InvalidInput(format!("diagonal vector '{s}' is not of the form m1,..,mk|n1,n2,n3"));
        let (m, n) = s.split_once('|').ok_or_else(err)?;
        let parse = |t: &str| -> Result<Vec<u32>> {
            t.split(',').map(|x| x.trim().parse::<u32>().map_err(|_| err())).collect()
        };
        let n = parse(n)?;
        Ok(Self { m: parse(m)?, n: n.try_into().map_err(|_| err())? })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideals,
    Subalgebras,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideals" => Ok(Mode::Ideals),
            "subalgebras" => Ok(Mode::Subalgebras),
            _ => Err(Error::InvalidInput(format!("unknown mode '{s}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ideals => "ideals",
            Mode::Subalgebras => "subalgebras",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Row,
    Brute,
    Pruned,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Row => "row",
            Method::Brute => "brute",
            Method::Pruned => "pruned",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Auto,
    Row,
    Brute,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    /// Cap on candidate evaluations for brute force.
    pub budget: u128,
    pub brute_limit: u128,
    pub method: MethodChoice,
    /// Skip diagonals whose necessary congruences are already unsatisfiable.
    pub prune: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, brute_limit: DEFAULT_BRUTE_LIMIT, method: MethodChoice::Auto, prune: true }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiagonalCount {
    pub diagonal: DiagonalVector,
    pub count: BigUint,
    pub method: Method,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaCoefficientTable {
    pub ring_id: String,
    pub p: u64,
    pub mode: Mode,
    /// `coefficients[n] = a_n`.
    pub coefficients: Vec<BigUint>,
    /// Per index, the nonzero diagonal counts in lexicographic order.
    pub breakdown: Vec<Vec<DiagonalCount>>,
}

/// All compositions of `n` into `parts` non-negative parts, lexicographically.
pub fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(n: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 0..=n {
            prefix.push(first);
            rec(n - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(n, parts, &mut Vec::new(), &mut out);
    }
    out
}

pub fn diagonal_vectors(abelian_rank: usize, n: u32) -> Vec<DiagonalVector> {
    compositions(n, abelian_rank + 3)
        .into_iter()
        .map(|v| DiagonalVector { m: v[..abelian_rank].to_vec(), n: [v[abelian_rank], v[abelian_rank + 1], v[abelian_rank + 2]] })
        .collect()
}

/// All reduced upper-triangular N with diagonal `p^n_i`, ordered by (a, b, c).
pub fn enumerate_center_matrices(p: u64, n: [u32; 3]) -> impl Iterator<Item = Mat3> {
    let q = |e| pow_i128(p, e).expect("central exponent in range");
    let (n2, n3) = (q(n[1]), q(n[2]));
    (0..n2).flat_map(move |a| (0..n3).flat_map(move |b| (0..n3).map(move |c| center_matrix(p, n, a, b, c))))
}

/// `p^{2k (N_1 + N_2 + N_3)}`: the number of ways to complete the central
/// columns of the abelian rows.
pub fn weight_exponent(ring: &ClassTwoLieRing, d: &DiagonalVector) -> u32 {
    2 * ring.k() as u32 * d.central_total()
}

/// Support bound for the 6-dimensional abelianization: M_i >= N_1, M_3, M_6 >= N_2, M_2, M_5 >= N_3.
pub fn support_bound_holds(d: &DiagonalVector) -> bool {
    let m = &d.m;
    m.len() == 6 && m.iter().all(|&x| x >= d.n[0]) && m[2] >= d.n[1] && m[5] >= d.n[1] && m[1] >= d.n[2] && m[4] >= d.n[2]
}

/// The analogous support bound for the 12-dimensional abelianization.
pub fn genus2_support_bound_holds(d: &DiagonalVector) -> bool {
    let a = |i: usize| d.m[i - 1];
    let [b1, b2, b3] = d.n;
    d.m.len() == 12
        && [1, 2, 3, 4, 5, 6, 7, 9, 10, 11, 12].iter().all(|&i| a(i) >= b1)
        && [2, 4, 5, 12].iter().all(|&i| a(i) >= b3)
        && [6, 12].iter().all(|&i| a(i) >= b2)
}

struct RowContext<'a> {
    ring: &'a ClassTwoLieRing,
    p: u64,
    /// For each j, `C(j) N^+`.
    products: Vec<Vec<[i128; 3]>>,
    det: i128,
    t: u32,
}

impl<'a> RowContext<'a> {
    fn new(ring: &'a ClassTwoLieRing, p: u64, n: &Mat3) -> Self {
        let nplus = adjugate3(n);
        let det = det3(n);
        let products = (1..=ring.abelian_rank()).map(|j| ring.c_times_adjugate(j, &nplus)).collect();
        let t = crate::liering::power_exponent(det, p).expect("det N is a p-power");
        Self { ring, p, products, det, t }
    }

    /// Linear forms (over the full row vector) whose values must vanish mod det N.
    fn forms(&self) -> Vec<Vec<i128>> {
        let k = self.ring.k();
        let d = self.ring.abelian_rank();
        let mut out = Vec::new();
        for j in 1..=d {
            let off = self.ring.c_row_offset(j);
            let t = &self.products[j - 1];
            for l in 0..3 {
                let mut form = vec![0i128; d];
                for r in 0..k {
                    form[off + r] = t[r][l];
                }
                if form.iter().any(|&c| c != 0) {
                    out.push(form);
                }
            }
        }
        out
    }

    /// Number of valid rows i (entries j > i reduced mod p^{M_j}).
    fn row_count(&self, forms: &[Vec<i128>], diag: &[u32], i: usize) -> Result<u128> {
        let (p, t) = (self.p, self.t);
        let d = diag.len();
        let free: Vec<usize> = (i + 1..d).collect();
        let box_size = |js: &[usize]| -> Result<u128> {
            js.iter().try_fold(1u128, |acc, &j| {
                pow_u128(p, diag[j]).and_then(|q| acc.checked_mul(q)).ok_or(Error::Overflow)
            })
        };
        if t == 0 {
            return box_size(&free);
        }
        let (big, small): (Vec<usize>, Vec<usize>) = free.iter().partition(|&&j| diag[j] >= t);
        let pi = pow_i128(p, diag[i]).ok_or(Error::Overflow)?;
        let modulus = PrimePowerModulus::new(p, t)?;
        let m = self.det;
        let mut multiplicity = 1u128;
        for &j in &big {
            multiplicity = multiplicity.checked_mul(pow_u128(p, diag[j] - t).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
        }
        let small_ranges: Vec<i128> = small.iter().map(|&j| pow_i128(p, diag[j]).unwrap()).collect();
        let mut assignment = vec![0i128; small.len()];
        let mut total = 0u128;
        loop {
            let system: Vec<Congruence> = forms
                .iter()
                .map(|f| {
                    let mut constant = (f[i] % m) * (pi % m) % m;
                    for (s, &j) in small.iter().enumerate() {
                        constant = (constant + (f[j] % m) * assignment[s]) % m;
                    }
                    let coeffs = big.iter().map(|&j| f[j] % m).collect();
                    Congruence::new(coeffs, constant, t)
                })
                .collect();
            if let Some(e) = solution_exponent(&system, big.len(), &modulus)? {
                let sols = pow_u128(p, e).ok_or(Error::Overflow)?;
                total = total.checked_add(sols.checked_mul(multiplicity).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
            }
            let mut pos = 0;
            loop {
                if pos == small.len() {
                    return Ok(total);
                }
                assignment[pos] += 1;
                if assignment[pos] < small_ranges[pos] {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Per-row congruence count of M-matrices over one central matrix.
pub fn count_m_rows(ring: &ClassTwoLieRing, p: u64, diag: &[u32], n: &Mat3) -> Result<BigUint> {
    let ctx = RowContext::new(ring, p, n);
    let forms = ctx.forms();
    let mut total = BigUint::one();
    for i in 0..diag.len() {
        let r = ctx.row_count(&forms, diag, i)?;
        if r == 0 {
            return Ok(BigUint::zero());
        }
        total *= BigUint::from(r);
    }
    Ok(total)
}

/// Row-method counts for every central matrix of the diagonal, in
/// enumeration order.
pub fn count_per_center(ring: &ClassTwoLieRing, p: u64, d: &DiagonalVector) -> Result<Vec<(Mat3, BigUint)>> {
    check_shape(ring, d)?;
    let centers: Vec<Mat3> = enumerate_center_matrices(p, d.n).collect();
    centers
        .into_par_iter()
        .map(|n| count_m_rows(ring, p, &d.m, &n).map(|c| (n, c)))
        .collect()
}

pub fn count_pairs_rows(ring: &ClassTwoLieRing, p: u64, d: &DiagonalVector) -> Result<BigUint> {
    Ok(count_per_center(ring, p, d)?.into_iter().map(|(_, c)| c).sum())
}

fn check_shape(ring: &ClassTwoLieRing, d: &DiagonalVector) -> Result<()> {
    if d.m.len() != ring.abelian_rank() {
        return Err(Error::InvalidInput(format!(
            "diagonal has {} M-entries, ring needs {}",
            d.m.len(),
            ring.abelian_rank()
        )));
    }
    Ok(())
}

/// Size of the full reduced pair space of a diagonal, saturating.
pub fn search_space(p: u64, d: &DiagonalVector) -> u128 {
    let mut exp = d.n[1] + 2 * d.n[2];
    for (j, &mj) in d.m.iter().enumerate() {
        exp += j as u32 * mj;
    }
    pow_u128(p, exp).unwrap_or(u128::MAX)
}

/// Exhaustive search over every reduced pair with the exact predicate,
/// choosing rows bottom-up and rejecting a partial matrix as soon as one of
/// its rows fails.
pub fn count_pairs_brute(ring: &ClassTwoLieRing, p: u64, d: &DiagonalVector, mode: Mode, budget: u128) -> Result<BigUint> {
    check_shape(ring, d)?;
    let visited = AtomicU64::new(0);
    let centers: Vec<Mat3> = enumerate_center_matrices(p, d.n).collect();
    let counts: Result<Vec<u128>> = centers
        .par_iter()
        .map(|n| {
            let mut search = BruteSearch::new(ring, p, &d.m, n, mode, budget, &visited);
            search.run()
        })
        .collect();
    Ok(counts?.into_iter().map(BigUint::from).sum())
}

struct BruteSearch<'a> {
    ring: &'a ClassTwoLieRing,
    diag: Vec<i128>,
    mode: Mode,
    nplus: Mat3,
    det: i128,
    products: Vec<Vec<[i128; 3]>>,
    rows: Vec<Vec<i128>>,
    budget: u128,
    visited: &'a AtomicU64,
}

impl<'a> BruteSearch<'a> {
    fn new(ring: &'a ClassTwoLieRing, p: u64, diag: &[u32], n: &Mat3, mode: Mode, budget: u128, visited: &'a AtomicU64) -> Self {
        let nplus = adjugate3(n);
        let products = (1..=ring.abelian_rank()).map(|j| ring.c_times_adjugate(j, &nplus)).collect();
        let d = diag.len();
        Self {
            ring,
            diag: diag.iter().map(|&e| pow_i128(p, e).expect("exponent in range")).collect(),
            mode,
            nplus,
            det: det3(n),
            products,
            rows: vec![vec![0; d]; d],
            budget,
            visited,
        }
    }

    fn run(&mut self) -> Result<u128> {
        let d = self.diag.len();
        self.place(d)
    }

    /// Count completions once rows `i..d` are fixed; `i` rows remain.
    fn place(&mut self, i: usize) -> Result<u128> {
        if i == 0 {
            return Ok(1);
        }
        let r = i - 1;
        let d = self.diag.len();
        let mut total = 0u128;
        let mut entries = vec![0i128; d];
        entries[r] = self.diag[r];
        loop {
            let v = self.visited.fetch_add(1, Ordering::Relaxed) as u128;
            if v >= self.budget {
                return Err(Error::BudgetExceeded { needed: v + 1, budget: self.budget });
            }
            self.rows[r].clone_from(&entries);
            if self.row_ok(r) {
                total += self.place(r)?;
            }
            let mut pos = r + 1;
            loop {
                if pos == d {
                    return Ok(total);
                }
                entries[pos] += 1;
                if entries[pos] < self.diag[pos] {
                    break;
                }
                entries[pos] = 0;
                pos += 1;
            }
        }
    }

    fn row_ok(&self, r: usize) -> bool {
        let row = &self.rows[r];
        match self.mode {
            Mode::Ideals => {
                let k = self.ring.k();
                (1..=self.ring.abelian_rank()).all(|j| {
                    let off = self.ring.c_row_offset(j);
                    let t = &self.products[j - 1];
                    (0..3).all(|l| (0..k).map(|x| row[off + x] * t[x][l]).sum::<i128>() % self.det == 0)
                })
            }
            Mode::Subalgebras => (r + 1..self.diag.len()).all(|s| {
                let b = self.ring.bracket_vectors(row, &self.rows[s]);
                let d = self.ring.abelian_rank();
                in_center_lattice(&[b[d], b[d + 1], b[d + 2]], &self.nplus, self.det)
            }),
        }
    }
}

/// Necessary conditions that depend only on the diagonal: writing
/// `v = x C(j)`, membership of `v` in the row lattice of N forces
/// `v_1 = 0 mod p^{N_1}`, then `v_2 = 0 mod p^{N_2}` when `v_1` vanishes
/// identically, and `v_3 = 0 mod p^{N_3}` when both do.
pub fn passes_pruning(ring: &ClassTwoLieRing, p: u64, d: &DiagonalVector) -> Result<bool> {
    check_shape(ring, d)?;
    let top = *d.n.iter().max().unwrap();
    if top == 0 {
        return Ok(true);
    }
    let modulus = PrimePowerModulus::new(p, top)?;
    let dim = ring.abelian_rank();
    let k = ring.k();
    for i in 0..dim {
        let pi = pow_i128(p, d.m[i]).ok_or(Error::Overflow)?;
        let free: Vec<usize> = (i + 1..dim).collect();
        let mut system = Vec::new();
        for j in 1..=dim {
            let off = ring.c_row_offset(j);
            let c = ring.c(j);
            let form = |l: usize| -> (Vec<i128>, i128) {
                let coeff = |col: usize| -> i128 {
                    if col >= off && col < off + k {
                        c[col - off][l] as i128
                    } else {
                        0
                    }
                };
                let constant = coeff(i) * pi;
                (free.iter().map(|&col| coeff(col)).collect(), constant)
            };
            let mut vanished = true;
            for l in 0..3 {
                if !vanished {
                    break;
                }
                let (coeffs, constant) = form(l);
                let zero = constant == 0 && coeffs.iter().all(|&x| x == 0);
                if !zero && d.n[l] > 0 {
                    system.push(Congruence::new(coeffs, constant, d.n[l]));
                }
                vanished = zero;
            }
        }
        if solution_exponent(&system, free.len(), &modulus)?.is_none() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn count_pairs_for_diagonal(
    ring: &ClassTwoLieRing,
    p: u64,
    d: &DiagonalVector,
    mode: Mode,
    cfg: &EnumConfig,
) -> Result<DiagonalCount> {
    check_shape(ring, d)?;
    if mode == Mode::Ideals && cfg.prune && !passes_pruning(ring, p, d)? {
        return Ok(DiagonalCount { diagonal: d.clone(), count: BigUint::zero(), method: Method::Pruned });
    }
    let space = search_space(p, d);
    let brute = match (cfg.method, mode) {
        (_, Mode::Subalgebras) | (MethodChoice::Brute, _) => true,
        (MethodChoice::Row, _) => false,
        (MethodChoice::Auto, Mode::Ideals) => space <= cfg.brute_limit.min(cfg.budget),
    };
    if brute {
        let count = count_pairs_brute(ring, p, d, mode, cfg.budget)?;
        Ok(DiagonalCount { diagonal: d.clone(), count, method: Method::Brute })
    } else {
        let count = count_pairs_rows(ring, p, d)?;
        Ok(DiagonalCount { diagonal: d.clone(), count, method: Method::Row })
    }
}

pub fn zeta_coefficients(
    ring: &ClassTwoLieRing,
    ring_id: &str,
    p: u64,
    n_max: u32,
    mode: Mode,
    cfg: &EnumConfig,
) -> Result<ZetaCoefficientTable> {
    match zeta_coefficients_partial(ring, ring_id, p, n_max, mode, cfg) {
        (table, None) => Ok(table),
        (_, Some(e)) => Err(e),
    }
}

/// Like [`zeta_coefficients`], but keeps the indices finished before the
/// first failure (typically an exceeded budget) together with that error.
pub fn zeta_coefficients_partial(
    ring: &ClassTwoLieRing,
    ring_id: &str,
    p: u64,
    n_max: u32,
    mode: Mode,
    cfg: &EnumConfig,
) -> (ZetaCoefficientTable, Option<Error>) {
    let mut table =
        ZetaCoefficientTable { ring_id: ring_id.to_string(), p, mode, coefficients: Vec::new(), breakdown: Vec::new() };
    for n in 0..=n_max {
        let diagonals = diagonal_vectors(ring.abelian_rank(), n);
        let counts: Result<Vec<DiagonalCount>> =
            diagonals.par_iter().map(|d| count_pairs_for_diagonal(ring, p, d, mode, cfg)).collect();
        let counts: Vec<DiagonalCount> = match counts {
            Ok(c) => c.into_iter().filter(|c| !c.count.is_zero()).collect(),
            Err(e) => return (table, Some(e)),
        };
        let a_n: BigUint = counts
            .iter()
            .map(|c| &c.count * BigUint::from(p).pow(weight_exponent(ring, &c.diagonal)))
            .sum();
        table.coefficients.push(a_n);
        table.breakdown.push(counts);
    }
    (table, None)
}

/// Counts of central matrices grouped by their M-count `p^e`, per diagonal.
/// A count that is not a power of p is reported under `None`.
pub fn center_strata(
    ring: &ClassTwoLieRing,
    p: u64,
    d: &DiagonalVector,
) -> Result<BTreeMap<Option<u32>, u64>> {
    let mut strata = BTreeMap::new();
    for (_, c) in count_per_center(ring, p, d)? {
        if c.is_zero() {
            continue;
        }
        let key = power_of(&c, p);
        *strata.entry(key).or_insert(0) += 1;
    }
    Ok(strata)
}

fn power_of(x: &BigUint, p: u64) -> Option<u32> {
    let mut x = x.clone();
    let p = BigUint::from(p);
    let mut e = 0;
    while !x.is_one() {
        if (&x % &p) != BigUint::zero() {
            return None;
        }
        x /= &p;
        e += 1;
    }
    Some(e)
}

/// Ideals (or subalgebras) of index p^n counted from the definition: every
/// Hermite basis of a sublattice of `Z^{2k+3}` is enumerated, including the
/// central columns of the abelian rows, and closure is tested with the full
/// bracket. No structure matrices, adjugates or weights are used.
pub fn count_full_lattice(ring: &ClassTwoLieRing, p: u64, n: u32, mode: Mode, budget: u128) -> Result<BigUint> {
    let dim = ring.dim();
    let visited = AtomicU64::new(0);
    let mut total = BigUint::zero();
    for e in compositions(n, dim) {
        let diag: Vec<i128> = e.iter().map(|&x| pow_i128(p, x).expect("exponent in range")).collect();
        let mut search = FullSearch { ring, diag, rows: vec![vec![0; dim]; dim], mode, budget, visited: &visited };
        total += BigUint::from(search.place(dim)?);
    }
    Ok(total)
}

struct FullSearch<'a> {
    ring: &'a ClassTwoLieRing,
    diag: Vec<i128>,
    rows: Vec<Vec<i128>>,
    mode: Mode,
    budget: u128,
    visited: &'a AtomicU64,
}

impl FullSearch<'_> {
    fn place(&mut self, i: usize) -> Result<u128> {
        if i == 0 {
            return Ok(1);
        }
        let r = i - 1;
        let dim = self.diag.len();
        let central = r >= self.ring.abelian_rank();
        let mut entries = vec![0i128; dim];
        entries[r] = self.diag[r];
        let mut total = 0u128;
        loop {
            let v = self.visited.fetch_add(1, Ordering::Relaxed) as u128;
            if v >= self.budget {
                return Err(Error::BudgetExceeded { needed: v + 1, budget: self.budget });
            }
            self.rows[r].clone_from(&entries);
            if central || self.row_ok(r) {
                total += self.place(r)?;
            }
            let mut pos = r + 1;
            loop {
                if pos == dim {
                    return Ok(total);
                }
                entries[pos] += 1;
                if entries[pos] < self.diag[pos] {
                    break;
                }
                entries[pos] = 0;
                pos += 1;
            }
        }
    }

    fn row_ok(&self, r: usize) -> bool {
        let dim = self.diag.len();
        let row = &self.rows[r];
        match self.mode {
            Mode::Ideals => (0..dim).all(|j| {
                let mut e = vec![0i128; dim];
                e[j] = 1;
                self.contains(&self.ring.bracket_vectors(row, &e), r)
            }),
            Mode::Subalgebras => (r + 1..dim).all(|s| self.contains(&self.ring.bracket_vectors(row, &self.rows[s]), r)),
        }
    }

    /// Membership in the lattice spanned by rows `r..dim` (all rows when
    /// `r = 0`), by back-substitution in the triangular basis. Rows above `r`
    /// are not chosen yet; a central vector never needs them since its
    /// leading coordinates vanish.
    fn contains(&self, w: &[i128], r: usize) -> bool {
        let dim = self.diag.len();
        let mut rest = w.to_vec();
        for i in 0..dim {
            if rest[i] == 0 {
                continue;
            }
            if i < r || rest[i] % self.rows[i][i] != 0 {
                return false;
            }
            let lambda = rest[i] / self.rows[i][i];
            for j in i..dim {
                rest[j] -= lambda * self.rows[i][j];
            }
        }
        true
    }
}

/// `a_n` from the weighted diagonal counts as a plain integer, for reports.
pub fn coefficient_u128(table: &ZetaCoefficientTable, n: usize) -> Option<u128> {
    table.coefficients.get(n).and_then(|c| c.to_u128())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::EllipticNormalForm;
    use crate::detrep::build_elliptic_rep;
    use crate::liering::{build_ring, ideal_condition, subalgebra_condition, LatticePair};
    use proptest::prelude::*;

    fn ring() -> ClassTwoLieRing {
        build_ring(&build_elliptic_rep(&EllipticNormalForm::new(-2, -1, 1)).matrix, 3).unwrap()
    }

    #[test]
    fn center_matrix_counts() {
        assert_eq!(enumerate_center_matrices(3, [0, 0, 0]).count(), 1);
        assert_eq!(enumerate_center_matrices(3, [0, 0, 1]).count(), 9);
        assert_eq!(enumerate_center_matrices(5, [0, 1, 0]).count(), 5);
        assert_eq!(enumerate_center_matrices(2, [1, 1, 1]).count(), 8);
    }

    #[test]
    fn diagonal_vector_listing() {
        let v = diagonal_vectors(6, 2);
        assert_eq!(v.len(), 45);
        assert!(v.windows(2).all(|w| w[0] < w[1] || w[0].m.iter().chain(&w[0].n).lt(w[1].m.iter().chain(&w[1].n))));
        assert!(v.iter().all(|d| d.total() == 2));
        let d: DiagonalVector = "0,1,2,0,0,0|0,0,1".parse().unwrap();
        assert_eq!(d.to_string(), "0,1,2,0,0,0|0,0,1");
    }

    #[test]
    fn trivial_diagonals() {
        let r = ring();
        let cfg = EnumConfig::default();
        let zero = DiagonalVector::new(vec![0; 6], [0, 0, 0]);
        assert_eq!(count_pairs_for_diagonal(&r, 5, &zero, Mode::Ideals, &cfg).unwrap().count, BigUint::one());
        // No central conditions: the count is the size of the M-box.
        let d = DiagonalVector::new(vec![0, 1, 0, 2, 0, 1], [0, 0, 0]);
        let expected = BigUint::from(7u32).pow(1 + 2 * 3 + 5);
        assert_eq!(count_pairs_rows(&r, 7, &d).unwrap(), expected);
    }

    #[test]
    fn support_bounds() {
        assert!(support_bound_holds(&DiagonalVector::new(vec![0, 1, 0, 0, 1, 0], [0, 0, 1])));
        assert!(!support_bound_holds(&DiagonalVector::new(vec![0, 1, 0, 0, 0, 0], [0, 0, 1])));
        let mut m = vec![1; 12];
        m[0] = 0;
        m[6] = 0;
        assert!(genus2_support_bound_holds(&DiagonalVector::new(m.clone(), [0, 0, 1])));
        m[1] = 0;
        assert!(!genus2_support_bound_holds(&DiagonalVector::new(m, [0, 0, 1])));
    }

    #[test]
    fn brute_matches_materialized_predicate() {
        // Enumerate every pair explicitly and call the whole-pair predicates.
        let r = ring();
        let p = 2u64;
        for d in diagonal_vectors(6, 2) {
            for mode in [Mode::Ideals, Mode::Subalgebras] {
                let mut explicit = 0u64;
                for n in enumerate_center_matrices(p, d.n) {
                    let offs: Vec<(usize, usize)> = (0..6).flat_map(|i| (i + 1..6).map(move |j| (i, j))).collect();
                    let ranges: Vec<i128> = offs.iter().map(|&(_, j)| 1 << d.m[j]).collect();
                    let total: i128 = ranges.iter().product();
                    for code in 0..total {
                        let mut m = vec![vec![0i128; 6]; 6];
                        for i in 0..6 {
                            m[i][i] = 1 << d.m[i];
                        }
                        let mut c = code;
                        for (&(i, j), &q) in offs.iter().zip(&ranges) {
                            m[i][j] = c % q;
                            c /= q;
                        }
                        let pair = LatticePair::new(p, m, n).unwrap();
                        let ok = match mode {
                            Mode::Ideals => ideal_condition(&r, &pair),
                            Mode::Subalgebras => subalgebra_condition(&r, &pair),
                        };
                        explicit += ok as u64;
                    }
                }
                assert_eq!(count_pairs_brute(&r, p, &d, mode, DEFAULT_BUDGET).unwrap(), BigUint::from(explicit), "{d} {mode}");
            }
        }
    }

    #[test]
    fn weighted_pairs_match_full_lattice_count() {
        let r = ring();
        let cfg = EnumConfig { prune: false, method: MethodChoice::Row, ..EnumConfig::default() };
        for (p, n) in [(2u64, 1u32), (2, 2), (3, 1), (3, 2), (2, 3)] {
            let table = zeta_coefficients(&r, "t", p, n, Mode::Ideals, &cfg).unwrap();
            let full = count_full_lattice(&r, p, n, Mode::Ideals, DEFAULT_BUDGET).unwrap();
            assert_eq!(table.coefficients[n as usize], full, "p={p} n={n}");
        }
        let sub = zeta_coefficients(&r, "t", 2, 2, Mode::Subalgebras, &cfg).unwrap();
        assert_eq!(sub.coefficients[2], count_full_lattice(&r, 2, 2, Mode::Subalgebras, DEFAULT_BUDGET).unwrap());
    }

    #[test]
    fn budget_is_enforced() {
        let r = ring();
        let d = DiagonalVector::new(vec![0, 0, 0, 0, 0, 3], [0, 0, 0]);
        assert!(matches!(count_pairs_brute(&r, 3, &d, Mode::Ideals, 100), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn pruning_is_sound_for_small_primes() {
        let r = ring();
        for p in [2u64, 3] {
            for n in 0..=4 {
                for d in diagonal_vectors(6, n) {
                    if !passes_pruning(&r, p, &d).unwrap() {
                        assert!(count_pairs_rows(&r, p, &d).unwrap().is_zero(), "p={p} {d}");
                    }
                }
            }
        }
    }

    #[test]
    fn index_p5_support_obeys_support_bound() {
        let r = ring();
        for d in diagonal_vectors(6, 5) {
            if passes_pruning(&r, 5, &d).unwrap() {
                assert!(support_bound_holds(&d), "{d}");
                assert_eq!(d.n[0], 0);
                assert!(d.n[1] + d.n[2] <= 1);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn row_and_brute_agree(p in prop::sample::select(vec![2u64, 3]), n in 0u32..=3, pick in any::<prop::sample::Index>()) {
            let r = ring();
            let all = diagonal_vectors(6, n);
            let d = pick.get(&all);
            let brute = count_pairs_brute(&r, p, d, Mode::Ideals, DEFAULT_BUDGET).unwrap();
            prop_assert_eq!(brute, count_pairs_rows(&r, p, d).unwrap());
        }

        #[test]
        fn subalgebras_dominate_ideals(p in prop::sample::select(vec![2u64, 3]), n in 0u32..=2, pick in any::<prop::sample::Index>()) {
            let r = ring();
            let all = diagonal_vectors(6, n);
            let d = pick.get(&all);
            let ideals = count_pairs_brute(&r, p, d, Mode::Ideals, DEFAULT_BUDGET).unwrap();
            let subs = count_pairs_brute(&r, p, d, Mode::Subalgebras, DEFAULT_BUDGET).unwrap();
            prop_assert!(subs >= ideals);
        }
    }
}
