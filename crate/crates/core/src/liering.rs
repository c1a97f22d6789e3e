//! Class-two Lie rings built from a k x k matrix of linear forms, their
//! structure matrices, and the ideal and subalgebra predicates on Hermite
//! pairs (M, N).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::padic::{adjugate3, det3, pow_i128, Mat3};
use crate::poly::LinearFormMatrix;

/// Basis order: `A_1..A_k, B_1..B_k` (abelianization) then `X, Y, Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTwoLieRing {
    k: usize,
    rep: LinearFormMatrix,
    brackets: Vec<Vec<[i64; 3]>>,
    structure: StructureMatrixSet,
}

/// `c[j]` is the k x 3 matrix of `C(j+1)` in split form: for `j < k` its rows
/// are indexed by the B-part, otherwise by the A-part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructureMatrixSet {
    pub c: Vec<Vec<[i64; 3]>>,
}

/// Rows of `m` are the abelian parts of a sublattice basis; `n` is the central
/// block. Entries are reduced representatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct LatticePair {
    pub p: u64,
    pub m: Vec<Vec<i128>>,
    pub n: Mat3,
}

pub fn build_ring(rep: &LinearFormMatrix, k: usize) -> Result<ClassTwoLieRing> {
    ClassTwoLieRing::new(rep.clone(), k)
}

impl ClassTwoLieRing {
    pub fn new(rep: LinearFormMatrix, k: usize) -> Result<Self> {
        if rep.dim() != k {
            return Err(Error::InvalidInput(format!("representation is {0}x{0}, expected {k}x{k}", rep.dim())));
        }
        let d = 2 * k;
        let mut brackets = vec![vec![[0i64; 3]; d]; d];
        for i in 0..k {
            for j in 0..k {
                let f = rep.get(i, j).coeffs();
                brackets[i][k + j] = f;
                brackets[k + j][i] = f.map(|c| -c);
            }
        }
        let structure = StructureMatrixSet {
            c: (0..d)
                .map(|j| {
                    (0..k)
                        .map(|r| if j < k { brackets[j][k + r] } else { brackets[r][j] })
                        .collect()
                })
                .collect(),
        };
        Ok(Self { k, rep, brackets, structure })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Rank of the abelianization, `2k`.
    pub fn abelian_rank(&self) -> usize {
        2 * self.k
    }

    pub fn dim(&self) -> usize {
        2 * self.k + 3
    }

    pub fn rep(&self) -> &LinearFormMatrix {
        &self.rep
    }

    /// Central coordinates of `(e_i, e_j)` for abelianization indices.
    pub fn bracket(&self, i: usize, j: usize) -> [i64; 3] {
        self.brackets[i][j]
    }

    /// Bracket of two vectors in full coordinates (length `dim`).
    pub fn bracket_vectors(&self, u: &[i128], v: &[i128]) -> Vec<i128> {
        let d = self.abelian_rank();
        let mut out = vec![0i128; self.dim()];
        for i in 0..d {
            if u[i] == 0 {
                continue;
            }
            for j in 0..d {
                if v[j] == 0 {
                    continue;
                }
                let b = self.brackets[i][j];
                for l in 0..3 {
                    out[d + l] += u[i] * v[j] * b[l] as i128;
                }
            }
        }
        out
    }

    pub fn structure(&self) -> &StructureMatrixSet {
        &self.structure
    }

    /// `C(j)` for `j` in `1..=2k`.
    pub fn c(&self, j: usize) -> &[[i64; 3]] {
        &self.structure.c[j - 1]
    }

    /// `D(l)` for `l` in `1..=2k`: the 2k x 3 matrix whose row i is `(e_i, e_l)`.
    pub fn d(&self, l: usize) -> Vec<[i64; 3]> {
        (0..self.abelian_rank()).map(|i| self.brackets[i][l - 1]).collect()
    }

    /// Index range of the part of a row that multiplies `C(j)`.
    pub fn c_row_offset(&self, j: usize) -> usize {
        if j <= self.k {
            self.k
        } else {
            0
        }
    }

    /// `C(j) N^+` as a k x 3 integer matrix.
    pub fn c_times_adjugate(&self, j: usize, nplus: &Mat3) -> Vec<[i128; 3]> {
        self.c(j)
            .iter()
            .map(|row| {
                let mut out = [0i128; 3];
                for (l, o) in out.iter_mut().enumerate() {
                    *o = (0..3).map(|r| row[r] as i128 * nplus[r][l]).sum();
                }
                out
            })
            .collect()
    }
}

impl LatticePair {
    pub fn new(p: u64, m: Vec<Vec<i128>>, n: Mat3) -> Result<Self> {
        let pair = Self { p, m, n };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.m.len();
        let bad = |s: String| Err(Error::InvalidInput(s));
        for (i, row) in self.m.iter().enumerate() {
            if row.len() != d {
                return bad(format!("row {i} of M has length {}", row.len()));
            }
            if power_exponent(row[i], self.p).is_none() {
                return bad(format!("M[{i}][{i}] = {} is not a power of {}", row[i], self.p));
            }
            for j in 0..d {
                let ok = if j < i { row[j] == 0 } else if j > i { (0..self.m[j][j]).contains(&row[j]) } else { true };
                if !ok {
                    return bad(format!("M[{i}][{j}] = {} is not reduced", row[j]));
                }
            }
        }
        let n = &self.n;
        for i in 0..3 {
            if power_exponent(n[i][i], self.p).is_none() {
                return bad(format!("N[{i}][{i}] is not a power of {}", self.p));
            }
            for j in 0..i {
                if n[i][j] != 0 {
                    return bad("N is not upper triangular".into());
                }
            }
        }
        if !(0..n[1][1]).contains(&n[0][1]) || !(0..n[2][2]).contains(&n[0][2]) || !(0..n[2][2]).contains(&n[1][2]) {
            return bad("N is not reduced".into());
        }
        Ok(())
    }

    pub fn m_exponents(&self) -> Vec<u32> {
        (0..self.m.len()).map(|i| power_exponent(self.m[i][i], self.p).unwrap()).collect()
    }

    pub fn n_exponents(&self) -> [u32; 3] {
        std::array::from_fn(|i| power_exponent(self.n[i][i], self.p).unwrap())
    }
}

/// `e` with `x = p^e`, if any.
pub fn power_exponent(mut x: i128, p: u64) -> Option<u32> {
    let p = p as i128;
    if x < 1 {
        return None;
    }
    let mut e = 0;
    while x % p == 0 {
        x /= p;
        e += 1;
    }
    (x == 1).then_some(e)
}

/// Upper-triangular central block with the given diagonal exponents.
pub fn center_matrix(p: u64, n: [u32; 3], a: i128, b: i128, c: i128) -> Mat3 {
    let q = |e| pow_i128(p, e).expect("exponent in range");
    [[q(n[0]), a, b], [0, q(n[1]), c], [0, 0, q(n[2])]]
}

/// Is `v` in the row lattice of N, via `v N^+ = 0 mod det N`.
pub fn in_center_lattice(v: &[i128; 3], nplus: &Mat3, det: i128) -> bool {
    (0..3).all(|l| (0..3).map(|r| v[r] * nplus[r][l]).sum::<i128>() % det == 0)
}

/// Condition (4): for every row i of M and every j, the relevant half of the
/// row times `C(j) N^+` is divisible by `det N`.
pub fn ideal_condition(ring: &ClassTwoLieRing, pair: &LatticePair) -> bool {
    let nplus = adjugate3(&pair.n);
    let det = det3(&pair.n);
    let k = ring.k();
    let products: Vec<Vec<[i128; 3]>> = (1..=2 * k).map(|j| ring.c_times_adjugate(j, &nplus)).collect();
    pair.m.iter().all(|row| {
        (1..=2 * k).all(|j| {
            let off = ring.c_row_offset(j);
            let t = &products[j - 1];
            (0..3).all(|l| (0..k).map(|r| row[off + r] * t[r][l]).sum::<i128>() % det == 0)
        })
    })
}

/// Closure of the M-rows under brackets, modulo the central lattice of N.
pub fn subalgebra_condition(ring: &ClassTwoLieRing, pair: &LatticePair) -> bool {
    let nplus = adjugate3(&pair.n);
    let det = det3(&pair.n);
    let d = ring.abelian_rank();
    let dl: Vec<Vec<[i64; 3]>> = (1..=d).map(|l| ring.d(l)).collect();
    for i in 0..d {
        for j in i + 1..d {
            let mut v = [0i128; 3];
            for (l, dmat) in dl.iter().enumerate() {
                let mjl = pair.m[j][l];
                if mjl == 0 {
                    continue;
                }
                for (r, drow) in dmat.iter().enumerate() {
                    let mir = pair.m[i][r];
                    if mir == 0 {
                        continue;
                    }
                    for c in 0..3 {
                        v[c] += mir * mjl * drow[c] as i128;
                    }
                }
            }
            if !in_center_lattice(&v, &nplus, det) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::EllipticNormalForm;
    use crate::detrep::{build_elliptic_rep, elliptic_pattern};
    use proptest::prelude::*;

    fn elliptic_ring(a: (i64, i64, i64)) -> ClassTwoLieRing {
        build_ring(&elliptic_pattern(a.0, a.1, a.2), 3).unwrap()
    }

    fn to3(m: &[[i64; 3]]) -> Vec<[i64; 3]> {
        m.to_vec()
    }

    #[test]
    fn printed_structure_matrices() {
        let (a1, a2, a3) = (2, 5, 7);
        let r = elliptic_ring((a1, a2, a3));
        assert_eq!(to3(r.c(1)), vec![[a1, 0, a2], [1, 0, 0], [0, 1, a3]]);
        assert_eq!(to3(r.c(2)), vec![[1, 0, 0], [0, 0, 1], [0, 0, 0]]);
        assert_eq!(to3(r.c(3)), vec![[0, 1, 0], [0, 0, 0], [1, 0, 0]]);
        assert_eq!(to3(r.c(4)), vec![[a1, 0, a2], [1, 0, 0], [0, 1, 0]]);
        assert_eq!(to3(r.c(5)), vec![[1, 0, 0], [0, 0, 1], [0, 0, 0]]);
        assert_eq!(to3(r.c(6)), vec![[0, 1, a3], [0, 0, 0], [1, 0, 0]]);
    }

    #[test]
    fn printed_d1() {
        let (a1, a2, a3) = (2, 5, 7);
        let r = elliptic_ring((a1, a2, a3));
        assert_eq!(
            r.d(1),
            vec![[0, 0, 0], [0, 0, 0], [0, 0, 0], [-a1, 0, -a2], [-1, 0, 0], [0, -1, -a3]]
        );
    }

    #[test]
    fn bracket_table_shape() {
        let r = elliptic_ring((1, 2, 3));
        for i in 0..6 {
            for j in 0..6 {
                let (u, v) = (r.bracket(i, j), r.bracket(j, i));
                assert_eq!(u, v.map(|c| -c));
                if (i < 3) == (j < 3) {
                    assert_eq!(u, [0, 0, 0]);
                }
            }
        }
    }

    #[test]
    fn identity_center_accepts_everything() {
        let r = build_ring(&build_elliptic_rep(&EllipticNormalForm::new(-2, -1, 1)).matrix, 3).unwrap();
        let mut m = vec![vec![0i128; 6]; 6];
        for i in 0..6 {
            m[i][i] = 9;
            for j in i + 1..6 {
                m[i][j] = (i * 7 + j) as i128 % 9;
            }
        }
        let pair = LatticePair::new(3, m, center_matrix(3, [0, 0, 0], 0, 0, 0)).unwrap();
        assert!(ideal_condition(&r, &pair));
        assert!(subalgebra_condition(&r, &pair));
    }

    #[test]
    fn case_two_instance_matches_hand_derivation() {
        // N = diag(1, p, 1) with a = 0 forces m_i1, m_i3, m_i4, m_i6 = 0 mod p.
        let r = elliptic_ring((2, 5, 7));
        let p = 3u64;
        let n = center_matrix(p, [0, 1, 0], 0, 0, 0);
        for code in 0..3i128.pow(5) {
            let mut m = vec![vec![0i128; 6]; 6];
            for i in 0..6 {
                m[i][i] = 3;
            }
            let mut c = code;
            for j in 1..6 {
                m[0][j] = c % 3;
                c /= 3;
            }
            let expected = [2, 3, 5].iter().all(|&j| m[0][j] == 0);
            let pair = LatticePair::new(p, m, n).unwrap();
            assert_eq!(ideal_condition(&r, &pair), expected);
        }
    }

    #[test]
    fn rejects_malformed_pairs() {
        let n = center_matrix(3, [0, 0, 0], 0, 0, 0);
        assert!(LatticePair::new(3, vec![vec![2]], n).is_err());
        assert!(LatticePair::new(3, vec![vec![3, 3], vec![0, 3]], n).is_err());
        assert!(LatticePair::new(3, vec![vec![1]], center_matrix(3, [0, 1, 0], 3, 0, 0)).is_err());
    }

    #[test]
    fn class_two_jacobi() {
        let r = elliptic_ring((1, -1, 2));
        let e = |i: usize| {
            let mut v = vec![0i128; 9];
            v[i] = 1;
            v
        };
        for i in 0..9 {
            for j in 0..9 {
                let b = r.bracket_vectors(&e(i), &e(j));
                assert!(b[..6].iter().all(|&x| x == 0));
                for l in 0..9 {
                    assert!(r.bracket_vectors(&b, &e(l)).iter().all(|&x| x == 0));
                }
            }
        }
    }

    fn arb_pair(p: u64) -> impl Strategy<Value = (Vec<u32>, [u32; 3], Vec<i128>, [i128; 3])> {
        (prop::collection::vec(0u32..=2, 6), prop::array::uniform3(0u32..=2), prop::collection::vec(0i128..1000, 15), prop::array::uniform3(0i128..1000))
            .prop_map(move |(me, ne, offs, nc)| (me, ne, offs, nc))
            .prop_filter("bounded index", move |_| p > 0)
    }

    fn assemble(p: u64, me: &[u32], ne: [u32; 3], offs: &[i128], nc: [i128; 3]) -> LatticePair {
        let q = |e| pow_i128(p, e).unwrap();
        let mut m = vec![vec![0i128; 6]; 6];
        let mut t = 0;
        for i in 0..6 {
            m[i][i] = q(me[i]);
            for j in i + 1..6 {
                m[i][j] = offs[t] % q(me[j]);
                t += 1;
            }
        }
        let n = center_matrix(p, ne, nc[0] % q(ne[1]), nc[1] % q(ne[2]), nc[2] % q(ne[2]));
        LatticePair::new(p, m, n).unwrap()
    }

    proptest! {
        #[test]
        fn ideal_predicate_well_defined((me, ne, offs, nc) in arb_pair(3), i in 0usize..6, j in 0usize..6) {
            let r = elliptic_ring((-2, 1, 1));
            let pair = assemble(3, &me, ne, &offs, nc);
            let (i, j) = (i.min(j), i.max(j));
            prop_assume!(i < j);
            let mut shifted = pair.clone();
            shifted.m[i][j] += pair.m[j][j];
            prop_assert_eq!(ideal_condition(&r, &pair), ideal_condition(&r, &shifted));
        }

        #[test]
        fn ideals_are_subalgebras((me, ne, offs, nc) in arb_pair(3)) {
            let r = elliptic_ring((-2, 1, 1));
            let pair = assemble(3, &me, ne, &offs, nc);
            if ideal_condition(&r, &pair) {
                prop_assert!(subalgebra_condition(&r, &pair));
            }
        }

        #[test]
        fn predicate_matches_bracket_definition((me, ne, offs, nc) in arb_pair(2)) {
            // [row_i, e_j] must lie in the central lattice for every basis vector e_j.
            let r = elliptic_ring((1, 1, 1));
            let pair = assemble(2, &me, ne, &offs, nc);
            let nplus = adjugate3(&pair.n);
            let det = det3(&pair.n);
            let direct = pair.m.iter().all(|row| {
                (0..6).all(|j| {
                    let mut u = row.clone();
                    u.extend([0, 0, 0]);
                    let mut e = vec![0i128; 9];
                    e[j] = 1;
                    let b = r.bracket_vectors(&u, &e);
                    in_center_lattice(&[b[6], b[7], b[8]], &nplus, det)
                })
            });
            prop_assert_eq!(ideal_condition(&r, &pair), direct);
        }
    }
}
