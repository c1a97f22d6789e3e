//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! A criterion fails when the displayed mathematics disagrees with the exact
//! oracles. Such failures are listed in `EXPECTED_FAIL` with their cause and
//! do not fail the run, provided the library's own closed forms agree with
//! the oracles everywhere. Any other failure exits non-zero.

use std::collections::BTreeSet;
use std::fs;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nilzeta_core::curves::{
    count_points_elliptic, count_points_genus2, count_points_genus2_chart, hensel_lift_count, solutions_mod_pk,
    CurveSpec, EllipticNormalForm, Genus2NormalForm,
};
use nilzeta_core::detrep::{
    elliptic_pattern, elliptic_pattern_det, elliptic_symbolic_matrix, elliptic_symbolic_vars, fit_genus2_betas,
    genus2_homogeneous, verify_genus2,
};
use nilzeta_core::enumeration::{
    count_full_lattice, count_pairs_brute, count_pairs_rows, support_bound_holds, search_space, zeta_coefficients,
    EnumConfig, Mode,
};
use nilzeta_core::fit::fit_polynomial;
use nilzeta_core::harness::{cmd_verify, cmd_zeta, fit_elliptic, fit_genus2, ring_for, ExperimentConfig};
use nilzeta_core::measures::ledger::Ledger;
use nilzeta_core::measures::oracle::{measure_oracle, PadicSetSpec};
use nilzeta_core::measures::suite::{run_minors, run_d_cases, run_omega, run_phi, SuiteConfig};
use nilzeta_core::measures::{d_set, DProfile, PhiInput, Regime};
use nilzeta_core::poly::{det_poly, poly_equal, MultiPoly};

/// Criteria whose printed statements the oracles refute, with the cause.
const EXPECTED_FAIL: &[(u8, &str)] = &[
    (4, "Phi branches 3 and 4, and d2 branch (1) at B = C, disagree with the oracle"),
    (5, "omega(1) prints the exponent -t where the oracle gives -2t; omega(3) prints M3 >= N3 where it needs N2"),
    (6, "four printed minors, (1,3,5) (1,5,6) (3,5,6) (4,5,6), differ from the determinants"),
];

struct Outcome {
    pass: bool,
    /// The library's own closed forms and engines agree with the oracles.
    sound: bool,
    detail: String,
}

fn run(n: u8, what: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> (u8, Outcome) {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if took > limit {
        o.pass = false;
        o.detail.push_str(&format!("; over the time limit {limit:?}"));
    }
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("criterion {n} {tag} {what}: {} [{:.2}s of {}s]", o.detail, took.as_secs_f64(), limit.as_secs());
    (n, o)
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn criterion_1() -> Outcome {
    let v = elliptic_symbolic_vars();
    let a = ["a1", "a2", "a3"].map(|n| MultiPoly::var(&v, n));
    let symbolic = poly_equal(&det_poly(&elliptic_symbolic_matrix()), &elliptic_pattern_det(&v, a)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut instances = 0;
    for _ in 0..50 {
        let (a1, a2, a3) = (rng.gen_range(-1000..1000), rng.gen_range(-1000..1000), rng.gen_range(-1000..1000));
        let m = elliptic_pattern(a1, a2, a3);
        let xyz = MultiPoly::variables(&["X", "Y", "Z"]);
        let ok_poly = poly_equal(&m.det(), &elliptic_pattern_det(&xyz, [a1, a2, a3].map(|c| MultiPoly::constant(&xyz, c)))).unwrap();
        // Independent check: the 3x3 determinant by the rule of Sarrus at random points.
        let ok_points = (0..5).all(|_| {
            let (x, y, z): (i128, i128, i128) = (rng.gen_range(-99..99), rng.gen_range(-99..99), rng.gen_range(-99..99));
            let e = |i: usize, j: usize| {
                let c = m.get(i, j).coeffs();
                c[0] as i128 * x + c[1] as i128 * y + c[2] as i128 * z
            };
            let det = e(0, 0) * e(1, 1) * e(2, 2) + e(0, 1) * e(1, 2) * e(2, 0) + e(0, 2) * e(1, 0) * e(2, 1)
                - e(0, 2) * e(1, 1) * e(2, 0)
                - e(0, 0) * e(1, 2) * e(2, 1)
                - e(0, 1) * e(1, 0) * e(2, 2);
            let (a1, a2, a3) = (a1 as i128, a2 as i128, a3 as i128);
            det == a1 * x * x * z + a2 * x * z * z - x * x * x - y * y * z - a3 * y * z * z
        });
        instances += usize::from(ok_poly && ok_points);
    }
    let pass = symbolic && instances == 50;
    Outcome { pass, sound: pass, detail: format!("symbolic identity {symbolic}, {instances}/50 random instances exact") }
}

fn det_leibniz(m: &[Vec<BigInt>]) -> BigInt {
    fn rec(m: &[Vec<BigInt>], row: usize, used: &mut Vec<bool>, sign: i32) -> BigInt {
        if row == m.len() {
            return BigInt::from(sign);
        }
        let mut acc = BigInt::zero();
        let mut s = sign;
        for j in 0..m.len() {
            if used[j] {
                continue;
            }
            // Sign of the permutation: parity of the unused columns skipped.
            if !m[row][j].is_zero() {
                used[j] = true;
                acc += &m[row][j] * rec(m, row + 1, used, s);
                used[j] = false;
            }
            s = -s;
        }
        acc
    }
    rec(m, 0, &mut vec![false; m.len()], 1)
}

fn criterion_2() -> Outcome {
    let curves = [
        Genus2NormalForm::new([1, 0, 0, 0, 0, 1], 1),
        Genus2NormalForm::new([1, 0, 0, 0, 1, 0], 1),
        Genus2NormalForm::new([1, 2, 0, -1, 0, 3], 1),
        Genus2NormalForm::new([1, 1, 1, 1, 1, 1], 1),
        Genus2NormalForm::new([-1, 3, -2, 5, 0, 7], -2),
        Genus2NormalForm::new([2, 1, 0, 3, 0, 1], 1),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut ok = 0;
    let mut notes = Vec::new();
    for c in &curves {
        let Ok(rep) = fit_genus2_betas(c) else {
            notes.push(format!("{c:?} infeasible"));
            continue;
        };
        let symbolic = verify_genus2(&rep, c).ok;
        let exact = match &rep.matrix {
            Some(m) => {
                let poly = poly_equal(&det_poly(&m.to_poly_matrix()), &genus2_homogeneous(c)).unwrap();
                let points = (0..4).all(|_| {
                    let (x, y, z): (i64, i64, i64) = (rng.gen_range(-9..9), rng.gen_range(-9..9), rng.gen_range(-9..9));
                    let num: Vec<Vec<BigInt>> = m
                        .rows()
                        .iter()
                        .map(|r| r.iter().map(|f| {
                            let k = f.coeffs();
                            BigInt::from(k[0] * x + k[1] * y + k[2] * z)
                        }).collect())
                        .collect();
                    let (xb, yb, zb) = (BigInt::from(x), BigInt::from(y), BigInt::from(z));
                    let mut curve = yb.pow(2) * zb.pow(4) + BigInt::from(c.b) * &yb * zb.pow(5);
                    for (i, a) in c.a.iter().enumerate() {
                        curve -= BigInt::from(*a) * xb.pow(6 - i as u32) * zb.pow(i as u32);
                    }
                    det_leibniz(&num) == curve
                });
                poly && points
            }
            None => {
                notes.push("rational betas checked symbolically".to_string());
                true
            }
        };
        ok += usize::from(symbolic && exact);
    }
    let pass = ok >= 5 && ok == curves.len();
    let mut detail = format!("{ok}/{} sample curves: det(G) equals the curve polynomial", curves.len());
    if !notes.is_empty() {
        detail.push_str(&format!(" ({})", notes.join(", ")));
    }
    Outcome { pass, sound: pass, detail }
}

fn criterion_3() -> Outcome {
    let e = EllipticNormalForm::new(0, -1, 0);
    let mut lifts_ok = true;
    let mut growth_ok = true;
    for p in [5u64, 7, 11, 13] {
        let pi = p as i64;
        let base: Vec<(i128, i128)> = (0..pi)
            .flat_map(|x| (0..pi).map(move |y| (x, y)))
            .filter(|&(x, y)| (y * y - x * x * x + x).rem_euclid(pi) == 0)
            .map(|(x, y)| (x as i128, y as i128))
            .collect();
        lifts_ok &= base.iter().all(|&pt| hensel_lift_count(&e, p, 1, pt) == Ok(p));
        for k in 1..=4u32 {
            let n = solutions_mod_pk(&e, p, k).unwrap().len() as u64;
            growth_ok &= n == p.pow(k - 1) * base.len() as u64;
            // Exhaustive recount where (Z/p^k)^2 is small enough.
            let m = (p as i128).pow(k);
            if m * m <= 6_000_000 {
                let direct = (0..m)
                    .map(|x| (0..m).filter(|&y| (y * y - x * x * x + x).rem_euclid(m) == 0).count() as u64)
                    .sum::<u64>();
                growth_ok &= direct == n;
            }
        }
    }
    let pass = lifts_ok && growth_ok;
    Outcome { pass, sound: pass, detail: format!("p lifts per point {lifts_ok}, count mod p^K = p^(K-1) count mod p for K <= 4 {growth_ok}") }
}

fn family_line(l: &Ledger, families: &[&str]) -> (u64, u64, Vec<String>) {
    let mut differs = 0;
    let mut ids = Vec::new();
    let mut checked = 0;
    for f in families {
        if let Some(s) = l.families.get(*f) {
            checked += s.checked;
            differs += s.printed_differs;
            ids.extend(s.differing_ids.iter().cloned());
        }
    }
    ids.sort();
    (checked, differs, ids)
}

fn criterion_4() -> Outcome {
    let cfg = SuiteConfig::default();
    let mut l = run_d_cases(&cfg).unwrap();
    l.merge(run_phi(&cfg).unwrap());
    let families = ["phi", "d1", "d2", "d3", "eight-case"];
    let (checked, differs, ids) = family_line(&l, &families);
    let sanctioned: u64 = families.iter().filter_map(|f| l.families.get(*f)).map(|s| s.sanctioned).sum();
    let convention: u64 = families.iter().filter_map(|f| l.families.get(*f)).map(|s| s.convention).sum();
    let mismatches = l.closed_form_mismatches();

    // d(0,0,F,0,0) on Y^2 = X^3 - X, by the oracle alone.
    let e = EllipticNormalForm::new(0, -1, 0);
    let mut ratio_ok = true;
    let mut stat_ok = true;
    for p in [5u64, 7, 11, 13] {
        let d = |f: u32| {
            let spec = d_set(Regime::One, DProfile::new(0, 0, f, 0, 0), e.pattern_params());
            measure_oracle(&spec, p, spec.stabilization_level()).unwrap()
        };
        let d1 = d(1);
        for f in 2..=3 {
            ratio_ok &= d(f) / &d1 == BigRational::new(1.into(), BigInt::from(p).pow(f - 1));
        }
        let unit = count_points_elliptic(&e, p).unwrap().unit_affine;
        stat_ok &= d1 * q(p as i64 * p as i64) == q(unit as i64);
    }
    let pass = differs == 0 && ratio_ok && stat_ok;
    Outcome {
        pass,
        sound: mismatches == 0 && ratio_ok && stat_ok,
        detail: format!(
            "{checked} grid checks, closed forms vs oracle {mismatches} mismatches, {sanctioned} sanctioned typo corrections, \
             {convention} unit-point convention readings, printed departures {differs} {ids:?}; \
             d(0,0,F,0,0)/d(0,0,1,0,0) = p^(1-F) {ratio_ok}; d(0,0,1,0,0) p^2 = unit-(b,c) point count {stat_ok}"
        ),
    }
}

fn criterion_5() -> Outcome {
    let l = run_omega(&SuiteConfig::default());
    let (checked, differs, ids) = family_line(&l, &["omega", "minima"]);
    let ids: BTreeSet<String> = ids.into_iter().collect();
    let mismatches = l.closed_form_mismatches();
    Outcome {
        pass: differs == 0 && mismatches == 0,
        sound: mismatches == 0,
        detail: format!(
            "{checked} checks over N1+N2+N3 <= 2, M <= 3, 50 samples, p in {{3,5}}: corrected closed forms vs oracle \
             {mismatches} mismatches; printed departures {differs} in {ids:?}"
        ),
    }
}

fn criterion_6() -> Outcome {
    let l = run_minors(&SuiteConfig::default());
    let s = &l.families["minor"];
    Outcome {
        pass: s.printed_differs == 0,
        sound: l.closed_form_mismatches() == 0,
        detail: format!(
            "{} minor checks over 100 contexts: {} equal, {} equal up to sign, {} differ in {:?}",
            s.checked, s.agree, s.convention, s.printed_differs, s.differing_ids
        ),
    }
}

fn criterion_7() -> Outcome {
    let curve = EllipticNormalForm::new(-2, -1, 1);
    let ring = ring_for(&CurveSpec::Elliptic(curve)).unwrap();
    let primes = [3u64, 5, 7, 11, 13, 17, 19, 23];
    let default = EnumConfig::default();
    let mut violations = 0;
    let mut tables = Vec::new();
    for &p in &primes {
        let t = zeta_coefficients(&ring, "acceptance", p, 5, Mode::Ideals, &default).unwrap();
        violations += t.breakdown.iter().flatten().filter(|c| !support_bound_holds(&c.diagonal)).count();
        tables.push(t);
    }
    // Without pruning every diagonal is counted, so the support bound is tested rather than assumed.
    let unpruned = EnumConfig { prune: false, ..default };
    let mut pruning_ok = true;
    let mut brute_checked = 0;
    let mut brute_ok = true;
    for (i, p, n_max) in [(0, 3u64, 5u32), (1, 5, 4)] {
        let t = zeta_coefficients(&ring, "acceptance", p, n_max, Mode::Ideals, &unpruned).unwrap();
        violations += t.breakdown.iter().flatten().filter(|c| !support_bound_holds(&c.diagonal)).count();
        pruning_ok &= t.coefficients[..] == tables[i].coefficients[..=n_max as usize];
        for c in t.breakdown.iter().flatten() {
            if search_space(p, &c.diagonal) <= 200_000 {
                let brute = count_pairs_brute(&ring, p, &c.diagonal, Mode::Ideals, u128::MAX).unwrap();
                brute_ok &= brute == count_pairs_rows(&ring, p, &c.diagonal).unwrap();
                brute_checked += 1;
            }
        }
    }
    // Definition-level count of small indices at p = 3.
    let t3 = zeta_coefficients(&ring, "acceptance", 3, 2, Mode::Ideals, &default).unwrap();
    let full_ok = (0..=2).all(|n| count_full_lattice(&ring, 3, n, Mode::Ideals, u128::MAX).unwrap() == t3.coefficients[n as usize]);

    let mut cfg = ExperimentConfig::default();
    cfg.primes = primes.to_vec();
    cfg.n_max = 5;
    let report = fit_elliptic(&cfg, &curve).unwrap();
    let held: Vec<u64> = report.fit.held_out.iter().map(|h| h.p).collect();
    let pass = violations == 0 && pruning_ok && brute_ok && full_ok && report.q2_nonzero && report.validated && held.len() >= 2;
    Outcome {
        pass,
        sound: pass,
        detail: format!(
            "a5 at {primes:?}; support-bound violations {violations}; unpruned counts (p=3 to n=5, p=5 to n=4) equal pruned {pruning_ok}; brute = row on \
             {brute_checked} diagonals {brute_ok}; definition-level a0..a2 at p=3 {full_ok}; fit Q1 + Q2 |E| with \
             Q2 = {} (nonzero {}), held out {held:?} reproduced {}",
            report.fit.q2, report.q2_nonzero, report.validated
        ),
    }
}

fn criterion_8() -> Outcome {
    let curves = ["genus2:1,0,0,0,0,1;1", "genus2:1,2,0,-1,0,3;1", "genus2:1,1,1,1,1,1;1"];
    let mut ok = true;
    let mut literal_both_units = 0;
    let mut cases = 0;
    let mut zero_values = BTreeSet::new();
    for spec in curves {
        let mut cfg = ExperimentConfig::default();
        cfg.set("curve", spec).unwrap();
        cfg.set("primes", "3,5,7").unwrap();
        let CurveSpec::Genus2(c) = cfg.curve else { unreachable!() };
        let r = fit_genus2(&cfg).unwrap();
        for t in &r.counts {
            cases += 1;
            let chart = count_points_genus2_chart(&c, t.p).unwrap();
            ok &= t.nonzero_part == BigUint::from(chart - 1) && t.max_per_center == BigUint::from(1u32);
            // The stricter reading: b and c both non-zero, |C| the affine count.
            let affine = count_points_genus2(&c, t.p).unwrap().count.affine;
            let ring = ring_for(&cfg.curve).unwrap();
            let both: u64 = nilzeta_core::enumeration::count_per_center(&ring, t.p, &t.diagonal.parse().unwrap())
                .unwrap()
                .iter()
                .filter(|(n, cnt)| n[0][2] != 0 && n[1][2] != 0 && !cnt.is_zero())
                .count() as u64;
            literal_both_units += usize::from(both + 1 == affine);
        }
        let pts: Vec<(u64, BigInt)> = r.counts.iter().map(|t| (t.p, BigInt::from(t.zero_part.clone()))).collect();
        let constant = fit_polynomial(&pts, 0).unwrap();
        ok &= constant.is_some() && r.zero_constant;
        zero_values.extend(r.counts.iter().map(|t| t.zero_part.to_string()));
        let f = r.nonzero_fit.unwrap();
        ok &= f.q1.to_string() == "-1" && f.q2.to_string() == "1";
    }
    Outcome {
        pass: ok,
        sound: ok,
        detail: format!(
            "{cases} (curve, p) cases: (b,c) != (0,0) part = |C(F_p)| - 1 with |C| the points of the (b,c)-chart {ok}, \
             one M per N, b=c=0 part constant {zero_values:?}; stricter reading (b, c both units, |C| affine) holds in \
             {literal_both_units}/{cases}"
        ),
    }
}

fn criterion_9() -> Outcome {
    let curve = EllipticNormalForm::new(-2, -1, 1);
    let ring = ring_for(&CurveSpec::Elliptic(curve)).unwrap();
    let cfg = EnumConfig::default();
    let mut contained = true;
    let mut pairs = 0;
    for (p, n_max) in [(3u64, 3u32), (5, 2)] {
        let ideals = zeta_coefficients(&ring, "acceptance", p, n_max, Mode::Ideals, &cfg).unwrap();
        let subs = zeta_coefficients(&ring, "acceptance", p, n_max, Mode::Subalgebras, &cfg).unwrap();
        for (a, b) in ideals.coefficients.iter().zip(&subs.coefficients) {
            contained &= a <= b;
            pairs += 1;
        }
    }

    let base = std::env::temp_dir().join(format!("nilzeta-acceptance-{}", std::process::id()));
    let mut identical = true;
    let mut outputs: Vec<Vec<(String, Vec<u8>)>> = Vec::new();
    for workers in [1usize, 4] {
        let mut cfg = ExperimentConfig::default();
        cfg.primes = vec![3, 5, 7];
        cfg.n_max = 4;
        cfg.workers = workers;
        cfg.out = base.join(format!("w{workers}"));
        cmd_zeta(&cfg).unwrap();
        cmd_verify(&cfg).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&cfg.out)
            .unwrap()
            .map(|e| e.unwrap())
            .filter(|e| e.file_name() != "manifest.txt")
            .map(|e| (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap()))
            .collect();
        files.sort();
        outputs.push(files);
    }
    identical &= outputs[0] == outputs[1] && !outputs[0].is_empty();
    let _ = fs::remove_dir_all(&base);

    // Every oracle set used by the suites gives the same measure one level up.
    let mut specs: Vec<(PadicSetSpec, u64)> = Vec::new();
    for p in [3u64, 5, 7] {
        for regime in [Regime::One, Regime::Two, Regime::Three] {
            for b in 0..=3 {
                for c in 0..=3 {
                    if !regime.admits(b, c) {
                        continue;
                    }
                    for f in 0..=3 {
                        for g in 0..=3 {
                            for h in 0..=3 {
                                specs.push((d_set(regime, DProfile::new(b, c, f, g, h), curve.pattern_params()), p));
                            }
                        }
                    }
                }
            }
        }
        for a in 0..=3 {
            for b in 0..=3 {
                for c in 0..=3 {
                    for n2 in 0..=3 {
                        specs.push((nilzeta_core::measures::dcases::phi_set(PhiInput { a, b, c, n2 }, p, 1, 1), p));
                    }
                }
            }
        }
    }
    let stable = specs.iter().all(|(s, p)| {
        let k = s.stabilization_level();
        measure_oracle(s, *p, k).unwrap() == measure_oracle(s, *p, k + 1).unwrap()
    });
    let pass = contained && identical && stable;
    Outcome {
        pass,
        sound: pass,
        detail: format!(
            "ideals <= subalgebras on {pairs} (p, n) {contained}; 1 vs 4 workers byte-identical outputs {identical}; \
             K-stability on {} oracle sets {stable}",
            specs.len()
        ),
    }
}

fn main() {
    let minute = Duration::from_secs(60);
    let results = vec![
        run(1, "determinantal identity (elliptic)", Duration::from_secs(1), criterion_1),
        run(2, "genus-2 representation", Duration::from_secs(10), criterion_2),
        run(3, "Hensel lifting", Duration::from_secs(30), criterion_3),
        run(4, "measure calculus", 5 * minute, criterion_4),
        run(5, "Omega chain", 10 * minute, criterion_5),
        run(6, "printed 3x3 minors", minute, criterion_6),
        run(7, "index p^5 enumeration and fit", 30 * minute, criterion_7),
        run(8, "genus-2 targeted diagonal", 10 * minute, criterion_8),
        run(9, "engine self-consistency", 10 * minute, criterion_9),
    ];
    let mut unexpected = Vec::new();
    for (n, o) in &results {
        let expected = EXPECTED_FAIL.iter().find(|(k, _)| k == n);
        match (o.pass, expected) {
            (false, Some((_, why))) if o.sound => println!("criterion {n}: expected failure, {why}"),
            (false, _) => unexpected.push(*n),
            (true, Some(_)) => println!("criterion {n}: listed as an expected failure but passes"),
            (true, None) => {}
        }
    }
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if !unexpected.is_empty() {
        println!("acceptance: unexpected failures {unexpected:?}");
        std::process::exit(1);
    }
}
