//! The twenty 3 x 3 minors of (S1, S2): direct determinants next to the
//! expressions printed for them.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::measures::omega::OmegaContext;

/// All column triples `1 <= i < j < k <= 6`, in lexicographic order.
pub fn column_triples() -> Vec<[usize; 3]> {
    let mut out = Vec::with_capacity(20);
    for i in 1..=6 {
        for j in i + 1..=6 {
            for k in j + 1..=6 {
                out.push([i, j, k]);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMatch {
    Equal,
    Negated,
    Differs,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MinorComparison {
    pub columns: [usize; 3],
    pub direct: BigInt,
    pub printed: BigInt,
    pub verdict: SignMatch,
}

fn det3_big(m: [[BigInt; 3]; 3]) -> BigInt {
    &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]) - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
}

/// Determinant of the chosen columns (1-based) of (S1, S2) built as displayed.
pub fn direct_minor(columns: [usize; 3], ctx: &OmegaContext) -> BigInt {
    let s = ctx.printed_s();
    let m = [0, 1, 2].map(|r| columns.map(|c| BigInt::from(s[r][c - 1])));
    det3_big(m)
}

/// The printed expression for the chosen columns.
pub fn printed_minor(columns: [usize; 3], ctx: &OmegaContext) -> BigInt {
    let (a, b, c) = ctx.entries();
    let (a1, a2, a3) = ctx.alpha();
    let [e1, e2, e3] = ctx.n();
    let q = |e: u32| BigInt::from(ctx.q(e));
    let (n1, n2, n3) = (q(e1), q(e2), q(e3));
    let (a, b, c) = (BigInt::from(a), BigInt::from(b), BigInt::from(c));
    let (a1, a2, a3) = (BigInt::from(a1), BigInt::from(a2), BigInt::from(a3));
    let bt = BigInt::from(ctx.b_tilde());
    let g = &a3 * &n2 - &c;
    match columns {
        [1, 2, 3] => a.pow(3) * n3.pow(3),
        [1, 2, 4] => &a * &b * &n1 * &n2 * n3.pow(2),
        [1, 2, 5] => &a * n1.pow(2) * &n2 * n3.pow(2),
        [1, 2, 6] => -(a.pow(2)) * &bt * n3.pow(2),
        [1, 3, 4] => -(&b * n1.pow(2) * &n2 * n3.pow(2)) + &a2 * a.pow(2) * &n1 * &n2 * n3.pow(2),
        [1, 3, 5] => n1.pow(3) * &n2 * n3.pow(2) + a.pow(2) * &bt * n3.pow(2) - a.pow(2) * &a1 * &n1 * &n2 * n3.pow(3),
        [1, 3, 6] => &a * &bt * &n1 * n3.pow(2) + a.pow(2) * &g * &n1 * n3.pow(2),
        [1, 4, 5] => {
            &bt * &b * &n1 * &n2 * &n3 + &a2 * n1.pow(3) * n2.pow(2) * &n3 - &a1 * &b * n1.pow(2) * n2.pow(2) * &n3
        }
        [1, 4, 6] => &g * &b * n1.pow(2) * &n2 * &n3 + &a2 * &a * &bt * &n1 * &n2 * &n3,
        [1, 5, 6] => &g * n1.pow(3) * &n2 * &n3 + &a * bt.pow(2) * &n3 - &a * &bt * &n1 * &n2 * &n3,
        [2, 3, 4] => -(a.pow(2)) * &bt * n3.pow(2),
        [2, 3, 5] => -(a.pow(2)) * &n1 * &n2 * n3.pow(2),
        [2, 3, 6] => BigInt::zero(),
        [2, 4, 5] => -(&a * &c * n1.pow(2) * &n2 * &n3),
        [2, 4, 6] => -(&a * bt.pow(2) * &n3),
        [2, 5, 6] => &a * &bt * &n1 * &n2 * &n3,
        [3, 4, 5] => {
            &c * n1.pow(3) * &n2 * &n3 + &a * bt.pow(2) * &n3
                - &a1 * &a * &bt * &n1 * &n2 * &n3
                - &a * &a2 * n1.pow(2) * n2.pow(2) * &n3
        }
        [3, 4, 6] => bt.pow(2) * &n1 * &n3 + &a * &bt * &g * &n1 * &n3,
        [3, 5, 6] => &g * &a * n1.pow(2) * &n2 * &n3,
        [4, 5, 6] => {
            -(bt.pow(3)) + &a1 * bt.pow(2) * &n1 * &n2 + &a2 * &bt * n1.pow(2) * n2.pow(2)
                - c.pow(2) * n1.pow(3) * &n2
                + &a3 * &c * n1.pow(3) * &n2
        }
        _ => panic!("columns must be an increasing triple in 1..=6"),
    }
}

pub fn compare_minor(columns: [usize; 3], ctx: &OmegaContext) -> MinorComparison {
    let direct = direct_minor(columns, ctx);
    let printed = printed_minor(columns, ctx);
    let verdict = if direct == printed {
        SignMatch::Equal
    } else if direct == -&printed {
        SignMatch::Negated
    } else {
        SignMatch::Differs
    };
    MinorComparison { columns, direct, printed, verdict }
}
