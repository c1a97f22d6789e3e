//! The sets Omega_1..Omega_6 attached to a central block N, their closed-form
//! measures in terms of capped elementary-divisor data of (S1, S2), and
//! exhaustive oracles on the defining congruences.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::detrep::EllipticDetRep;
use crate::liering::{center_matrix, ClassTwoLieRing};
use crate::padic::{adjugate3, pow_i128, p_pow, valuation, valuation_i128, ExactRational, Mat3, Valuation};

/// Central block data for the Omega sets. `b~ = ac - b p^{N2}` is always
/// derived from `(a, b, c)`.
#[derive(Clone, Debug)]
pub struct OmegaContext {
    p: u64,
    n: [u32; 3],
    a: i128,
    b: i128,
    c: i128,
    alpha: (i64, i64, i64),
    ring: ClassTwoLieRing,
}

impl OmegaContext {
    /// `alpha` are the parameters of the determinantal pattern.
    pub fn new(p: u64, n: [u32; 3], (a, b, c): (i128, i128, i128), alpha: (i64, i64, i64)) -> Self {
        let rep = EllipticDetRep::from_pattern_params(alpha.0, alpha.1, alpha.2);
        let ring = ClassTwoLieRing::new(rep.matrix, 3).expect("3x3 pattern");
        Self { p, n, a, b, c, alpha, ring }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> [u32; 3] {
        self.n
    }

    pub fn entries(&self) -> (i128, i128, i128) {
        (self.a, self.b, self.c)
    }

    pub fn alpha(&self) -> (i64, i64, i64) {
        self.alpha
    }

    pub fn ring(&self) -> &ClassTwoLieRing {
        &self.ring
    }

    pub fn q(&self, e: u32) -> i128 {
        pow_i128(self.p, e).expect("small exponent")
    }

    pub fn b_tilde(&self) -> i128 {
        self.a * self.c - self.b * self.q(self.n[1])
    }

    pub fn v(&self, x: i128) -> Valuation {
        valuation_i128(x, self.p)
    }

    pub fn va(&self) -> Valuation {
        self.v(self.a)
    }

    pub fn vb(&self) -> Valuation {
        self.v(self.b)
    }

    pub fn vc(&self) -> Valuation {
        self.v(self.c)
    }

    pub fn vbt(&self) -> Valuation {
        self.v(self.b_tilde())
    }

    /// `t = N1 + N2 + N3`.
    pub fn t(&self) -> u32 {
        self.n.iter().sum()
    }

    /// `s = N2 + N3`, the modulus exponent once the forced factor `p^{N1}` is removed.
    pub fn s(&self) -> u32 {
        self.n[1] + self.n[2]
    }

    pub fn center(&self) -> Mat3 {
        center_matrix(self.p, self.n, self.a, self.b, self.c)
    }

    pub fn adjugate(&self) -> Mat3 {
        adjugate3(&self.center())
    }

    /// The 3 x 6 matrix whose columns are columns 2 and 3 of `C(j) N^+` for
    /// the three structure matrices acting on one half of a row.
    fn block(&self, js: [usize; 3]) -> [[i128; 6]; 3] {
        let nplus = self.adjugate();
        let t: Vec<Vec<[i128; 3]>> = js.iter().map(|&j| self.ring.c_times_adjugate(j, &nplus)).collect();
        let mut s = [[0i128; 6]; 3];
        for (r, row) in s.iter_mut().enumerate() {
            for q in 0..3 {
                row[q] = t[q][r][1];
                row[q + 3] = t[q][r][2];
            }
        }
        s
    }

    /// Block for the A-half of a row, from `C(4), C(5), C(6)`; this is (S1, S2).
    pub fn s_a(&self) -> [[i128; 6]; 3] {
        self.block([4, 5, 6])
    }

    /// Block for the B-half of a row, from `C(1), C(2), C(3)`.
    pub fn s_b(&self) -> [[i128; 6]; 3] {
        self.block([1, 2, 3])
    }

    /// (S1, S2) entry by entry as displayed.
    pub fn printed_s(&self) -> [[i128; 6]; 3] {
        let (a, c) = (self.a, self.c);
        let (a1, a2, a3) = (self.alpha.0 as i128, self.alpha.1 as i128, self.alpha.2 as i128);
        let bt = self.b_tilde();
        let [n1, n2, n3] = self.n.map(|e| self.q(e));
        [
            [-a * a1 * n3, -a * n3, n1 * n3, a1 * bt + a2 * n1 * n2, bt, -c * n1 + a3 * n1 * n2],
            [-a * n3, 0, 0, bt, n1 * n2, 0],
            [n1 * n3, 0, -a * n3, -c * n1, 0, bt],
        ]
    }
}

fn det_big(m: &[Vec<i128>]) -> BigInt {
    match m.len() {
        1 => BigInt::from(m[0][0]),
        2 => BigInt::from(m[0][0]) * m[1][1] - BigInt::from(m[0][1]) * m[1][0],
        3 => {
            let e = |r: usize, c: usize| BigInt::from(m[r][c]);
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => unreachable!("minors up to 3x3"),
    }
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    (r - 1..n)
        .flat_map(|last| {
            subsets(last, r - 1).into_iter().map(move |mut s| {
                s.push(last);
                s
            })
        })
        .collect()
}

/// Minimum valuation over all `r x r` minors of the given rows, for each
/// `r = 1..=rows.len()`.
pub fn minor_minima(rows: &[[i128; 6]], p: u64) -> Vec<Valuation> {
    (1..=rows.len())
        .map(|r| {
            let mut best = Valuation::Infinite;
            for rs in subsets(rows.len(), r) {
                for cs in subsets(6, r) {
                    let m: Vec<Vec<i128>> = rs.iter().map(|&i| cs.iter().map(|&j| rows[i][j]).collect()).collect();
                    best = best.min(valuation(&det_big(&m), p));
                }
            }
            best
        })
        .collect()
}

/// Successive differences of minor minima: the elementary-divisor valuations.
pub fn divisor_valuations(minima: &[Valuation]) -> Vec<Valuation> {
    let mut prev = Valuation::Finite(0);
    minima
        .iter()
        .map(|&m| {
            let d = match (m, prev) {
                (Valuation::Finite(x), Valuation::Finite(y)) => Valuation::Finite(x - y),
                _ => Valuation::Infinite,
            };
            prev = m;
            d
        })
        .collect()
}

/// Minima computed from the actual minors of the two blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationMinima {
    pub u1: Valuation,
    pub u2: Valuation,
    pub w1: Valuation,
    pub w2: Valuation,
    pub w3: Valuation,
    pub u4: Valuation,
    pub u5: Valuation,
    pub big_u1: u32,
    pub big_u2: u32,
    pub big_v1: u32,
    pub big_u4: u32,
    pub big_u5: u32,
    pub big_v4: u32,
    pub big_w: [u32; 3],
    /// The same three capped divisors for the B-block.
    pub big_w_b: [u32; 3],
}

pub fn valuation_minima(ctx: &OmegaContext) -> ValuationMinima {
    let p = ctx.p;
    let s = ctx.s();
    let sa = ctx.s_a();
    let sb = ctx.s_b();
    let ua = divisor_valuations(&minor_minima(&sa[1..], p));
    let wa = divisor_valuations(&minor_minima(&sa, p));
    let ub = divisor_valuations(&minor_minima(&sb[1..], p));
    let wb = divisor_valuations(&minor_minima(&sb, p));
    let v1 = minor_minima(&sa[2..], p)[0];
    let v4 = minor_minima(&sb[2..], p)[0];
    ValuationMinima {
        u1: ua[0],
        u2: ua[1],
        w1: wa[0],
        w2: wa[1],
        w3: wa[2],
        u4: ub[0],
        u5: ub[1],
        big_u1: ua[0].capped(s),
        big_u2: ua[1].capped(s),
        big_v1: v1.capped(s),
        big_u4: ub[0].capped(s),
        big_u5: ub[1].capped(s),
        big_v4: v4.capped(s),
        big_w: [0, 1, 2].map(|i| wa[i].capped(s)),
        big_w_b: [0, 1, 2].map(|i| wb[i].capped(s)),
    }
}

/// The displayed minimum lists, evaluated on the context.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PrintedMinima {
    pub u1: Valuation,
    pub u2: Valuation,
    pub w1: Valuation,
    pub w2: Valuation,
    pub w3: Valuation,
    pub v1: Valuation,
    /// Needs `u4`, which is not displayed; the computed one is used.
    pub u5: Valuation,
}

fn vmin(xs: &[Valuation]) -> Valuation {
    xs.iter().copied().min().unwrap_or(Valuation::Infinite)
}

fn vsub(x: Valuation, y: Valuation) -> Valuation {
    match (x, y) {
        (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a.saturating_sub(b)),
        _ => Valuation::Infinite,
    }
}

pub fn printed_minima(ctx: &OmegaContext) -> PrintedMinima {
    let [n1, n2, n3] = ctx.n;
    let f = Valuation::Finite;
    let (va, vb, vc, vx) = (ctx.va(), ctx.vb(), ctx.vc(), ctx.vbt());
    let (a1, a2, a3) = (ctx.alpha.0 as i128, ctx.alpha.1 as i128, ctx.alpha.2 as i128);
    let bt = ctx.b_tilde();
    let c = ctx.c;
    // v(a3 p^{N2} - c) and v(a1 b~ + a2 p^{N1+N2})
    let vg = ctx.v(a3 * ctx.q(n2) - c);
    let vh = ctx.v(a1 * bt + a2 * ctx.q(n1 + n2));
    let cubic = ctx.v(
        -bt * bt * bt + a1 * bt * bt * ctx.q(n1 + n2) + a2 * bt * ctx.q(2 * (n1 + n2))
            - c * c * ctx.q(2 * n1) * ctx.q(n1 + n2)
            + a3 * c * ctx.q(2 * n1) * ctx.q(n1 + n2),
    );
    let u1 = vmin(&[va + n3, f(n1 + n3), vx, f(n1 + n2), vc + n1]);
    let u2 = vsub(
        vmin(&[
            va + va + 2 * n3,
            vb + (n1 + n2 + n3),
            f(2 * n1 + n2 + n3),
            va + vx + n3,
            va + (n1 + n2 + n3),
            vc + (2 * n1 + n2),
            vx + vx,
            vx + (n1 + n2),
        ]),
        u1,
    );
    let w1 = vmin(&[va + n3, f(n1 + n3), vx, f(n1 + n2), vc + n1, vg + n1, vh]);
    let w2 = vsub(
        vmin(&[
            va + va + 2 * n3,
            va + (n1 + 2 * n3),
            va + (n1 + n2 + n3),
            va + vx + n3,
            va + vg + (n1 + n3),
            vx + (n1 + n3),
            f(2 * n1 + n2 + n3),
            vx + vx,
            f(2 * (n1 + n2)),
            vx + vg + n1,
            vg + (2 * n1 + n2),
            vx + (n1 + n2),
            f(2 * (n1 + n3)),
            vb + (n1 + n2 + n3),
            vc + (2 * n1 + n2),
            vg + (2 * n1 + n3),
            va + vc + (n1 + n3),
            vc + (2 * n1 + n3),
            vc + vx + n1,
            vc + vg + 2 * n1,
        ]),
        w1,
    );
    let w3 = vsub(
        vsub(
            vmin(&[
                va + va + va + 3 * n3,
                va + vb + (n1 + n2 + n3),
                va + va + vx + 2 * n3,
                vb + (2 * n1 + n2 + n3),
                f(3 * n1 + n2 + 2 * n3),
                va + va + (n1 + 2 * n3),
                vx + vb + (n1 + n2 + n3),
                vg + vb + (2 * n1 + n2 + n3),
                vg + (3 * n1 + n2 + n3),
                va + vc + (2 * n1 + n2 + n3),
                va + vx + vx + n3,
                vc + (3 * n1 + n2 + n3),
                va + vx + (n1 + n3),
                va + (2 * n1 + n2 + n3),
                cubic,
            ]),
            w1,
        ),
        w2,
    );
    let v1 = vmin(&[f(n1 + n3), va + n3, vc + n1, vx, f(n2 + n3)]);
    let u4 = valuation_minima(ctx).u4;
    let u5 = vsub(
        vmin(&[
            va + va + 2 * n3,
            va + (n1 + n2 + n3),
            vx + (n1 + n2),
            va + vx + n3,
            vb + (n1 + n2 + n3),
            f(2 * n1 + n2 + n3),
            vg + (2 * n1 + n2),
            vx + vx,
        ]),
        u4,
    );
    PrintedMinima { u1, u2, w1, w2, w3, v1, u5 }
}

/// The six Omega values for row exponents `M1..M6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OmegaMeasures {
    pub mu: [ExactRational; 6],
    pub omega3: bool,
    pub omega6: bool,
}

fn indicator(b: bool) -> ExactRational {
    if b {
        BigRational::one()
    } else {
        BigRational::zero()
    }
}

fn ge(v: Valuation, lhs_add: u32, rhs: u32) -> bool {
    (v + lhs_add).at_least(rhs)
}

/// Closed forms. Omega_1 and Omega_4 use the capped divisors of their own
/// block and the exponent `U + U' - 2t`; Omega_3 uses `M3 >= N2`; Omega_6
/// uses the threshold `t` on `v(a3 p^{N1+N2} - c p^{N1})`.
pub fn omega_measures(ctx: &OmegaContext, m: [u32; 6]) -> OmegaMeasures {
    let mins = valuation_minima(ctx);
    let p = ctx.p;
    let t = ctx.t() as i64;
    let [n1, n2, n3] = ctx.n;
    let mu_free = |m: u32, u: u32, u_next: u32, w: [u32; 3]| {
        let threshold = (u + u_next + ctx.s()) as i64 - w.iter().sum::<u32>() as i64 + n1 as i64;
        if (m as i64) < threshold {
            BigRational::zero()
        } else {
            p_pow(p, (u + u_next) as i64 - 2 * t)
        }
    };
    let mu_one = |m: u32, v: u32, u: u32, u_next: u32| {
        if (m as i64) < v as i64 - (u + u_next) as i64 + t {
            BigRational::zero()
        } else {
            p_pow(p, v as i64 - t)
        }
    };
    let omega3 = m[2] >= n1
        && m[2] >= n2
        && ge(ctx.va(), m[2], n1 + n2)
        && ge(ctx.vbt(), m[2], n1 + n2 + n3)
        && ge(ctx.vc(), m[2], n2 + n3);
    let a3 = ctx.alpha.2 as i128;
    let g6 = ctx.v(a3 * ctx.q(n1 + n2) - ctx.c * ctx.q(n1));
    let omega6 = m[5] >= n1
        && ge(ctx.va(), m[5], n1 + n2)
        && m[5] >= n2
        && ge(g6, m[5], n1 + n2 + n3)
        && ge(ctx.vbt(), m[5], n1 + n2 + n3);
    OmegaMeasures {
        mu: [
            mu_free(m[0], mins.big_u1, mins.big_u2, mins.big_w),
            mu_one(m[1], mins.big_v1, mins.big_u1, mins.big_u2),
            indicator(omega3),
            mu_free(m[3], mins.big_u4, mins.big_u5, mins.big_w_b),
            mu_one(m[4], mins.big_v4, mins.big_u4, mins.big_u5),
            indicator(omega6),
        ],
        omega3,
        omega6,
    }
}

/// The displayed versions: exponent `U1 + U2 - t`, `M3 >= N3`, and the A-block
/// `W` reused for Omega_4.
pub fn omega_measures_printed(ctx: &OmegaContext, m: [u32; 6]) -> OmegaMeasures {
    let mins = valuation_minima(ctx);
    let p = ctx.p;
    let t = ctx.t() as i64;
    let [n1, n2, n3] = ctx.n;
    let wsum = mins.big_w.iter().sum::<u32>() as i64;
    let mu_free = |m: u32, u: u32, u_next: u32| {
        if (m as i64) < (u + u_next) as i64 - wsum + t {
            BigRational::zero()
        } else {
            p_pow(p, (u + u_next) as i64 - t)
        }
    };
    let corrected = omega_measures(ctx, m);
    let omega3 = m[2] >= n1
        && m[2] >= n3
        && ge(ctx.va(), m[2], n1 + n2)
        && ge(ctx.vbt(), m[2], n1 + n2 + n3)
        && ge(ctx.vc(), m[2], n2 + n3);
    OmegaMeasures {
        mu: [
            mu_free(m[0], mins.big_u1, mins.big_u2),
            corrected.mu[1].clone(),
            indicator(omega3),
            mu_free(m[3], mins.big_u4, mins.big_u5),
            corrected.mu[4].clone(),
            corrected.mu[5].clone(),
        ],
        omega3,
        omega6: corrected.omega6,
    }
}

/// Exhaustive evaluation of the defining congruences: the free entries of the
/// row range over residues mod `p^t`, and the row condition is
/// `x C(j) N^+ = 0 mod det N` for the three relevant `j`.
pub fn omega_oracle(ctx: &OmegaContext, which: usize, m: u32) -> ExactRational {
    assert!((1..=6).contains(&which));
    let js: [usize; 3] = if which <= 3 { [4, 5, 6] } else { [1, 2, 3] };
    let nplus = ctx.adjugate();
    let modulus = ctx.q(ctx.t());
    // cols[(j, l)] = (T_j[0][l], T_j[1][l], T_j[2][l]) reduced mod det N
    let cols: Vec<[i128; 3]> = js
        .iter()
        .flat_map(|&j| {
            let t = ctx.ring.c_times_adjugate(j, &nplus);
            (0..3).map(move |l| [0, 1, 2].map(|r| t[r][l].rem_euclid(modulus)))
        })
        .collect();
    let pm = ctx.q(m) % modulus;
    let holds = |x: [i128; 3]| cols.iter().all(|col| (0..3).map(|r| x[r] * col[r] % modulus).sum::<i128>() % modulus == 0);
    let (count, free) = match (which - 1) % 3 {
        0 => {
            let mut n = 0u64;
            for m2 in 0..modulus {
                for m3 in 0..modulus {
                    n += holds([pm, m2, m3]) as u64;
                }
            }
            (n, 2)
        }
        1 => ((0..modulus).filter(|&m3| holds([0, pm, m3])).count() as u64, 1),
        _ => (holds([0, 0, pm]) as u64, 0),
    };
    BigRational::from_integer(BigInt::from(count)) * p_pow(ctx.p, -(free * ctx.t() as i64))
}

/// `v(x)` of a big integer, exposed for ledger inputs.
pub fn big_valuation(x: &BigInt, p: u64) -> Valuation {
    if x.is_zero() {
        Valuation::Infinite
    } else {
        valuation(&x.abs(), p)
    }
}
