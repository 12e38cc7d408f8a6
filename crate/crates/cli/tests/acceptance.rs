//! Acceptance run: one line per criterion.
//!
//! Criteria that the mathematics does not support are computed faithfully and
//! reported as FAIL. The target only exits non-zero when an outcome differs
//! from `EXPECTED_FAIL`, so a regression in either direction is caught.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use cuntz_core::adjudicator::{
    adjudicate_matrix_elements, adjudicate_t, adjudicate_volumes, basis_claims, displem_claims, structural_suite, Verdict,
};
use cuntz_core::exact::{self, q, Q};
use cuntz_core::kernel::{apply_t, Mode};
use cuntz_core::operators::{build_block, fiber_block, BoundaryWord, OpName, DEFAULT_MAX_DIM};
use cuntz_core::sheets::{e_vector, inner};
use cuntz_core::spectral::{commutator_svd, heat_trace, projection_compare, CommutatorWith, DecayLaw};
use cuntz_core::states::{state_report, FrohlichEngine};
use cuntz_core::{Alphabet, GradeIndex, Variant, Word};

/// Criteria whose claims do not hold for the objects as defined.
const EXPECTED_FAIL: [usize; 3] = [1, 3, 8];

const EXACT_CAP: usize = 729;

struct Outcome {
    pass: bool,
    detail: String,
}

fn al(n: u32) -> Alphabet {
    Alphabet::new(n).unwrap()
}

fn w(s: &str) -> Word {
    Word::parse(s).unwrap()
}

/// `(N, max grade)` at desk scale.
const SCALES: [(u32, usize); 2] = [(2, 8), (3, 6)];

fn find<'a>(vs: &'a [Verdict], id: &str) -> &'a Verdict {
    vs.iter().find(|v| v.id == id).unwrap_or_else(|| panic!("verdict {id} missing"))
}

/// All listed ids verified; otherwise the first offender with its first witness.
fn all_verified(vs: &[Verdict], ids: &[&str], tag: &str) -> Result<(), String> {
    for id in ids {
        let v = find(vs, id);
        if !v.verified() {
            let wit = v.witnesses.first().map(|x| format!("{}: {} vs {}", x.input, x.paper, x.oracle)).unwrap_or_default();
            return Err(format!("{tag} {id} {:?} ({wit})", v.status));
        }
    }
    Ok(())
}

fn outcome(r: Result<String, String>) -> Outcome {
    match r {
        Ok(detail) => Outcome { pass: true, detail },
        Err(detail) => Outcome { pass: false, detail },
    }
}

fn c1(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    let r = [2, 3].iter().try_for_each(|&n| {
        let tag = format!("N={n}");
        all_verified(&basis_claims(al(n), 6, EXACT_CAP), &["defofbasis.orthogonality"], &tag)
            .and(all_verified(&suites[&n], &["kappagonbasis.norms"], &tag))
    });
    outcome(r.map(|_| "orthogonal with the stated norms up to grade 6".into()))
}

fn c2(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    outcome(
        suites
            .iter()
            .try_for_each(|(n, vs)| all_verified(vs, &["kappagonbasis.eigen", "kappagonbasis.bruteforce"], &format!("N={n}")))
            .map(|_| "kappa_G eigen-law and cell brute force agree".into()),
    )
}

fn c3(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    let structural = suites
        .iter()
        .try_for_each(|(n, vs)| all_verified(vs, &["displem.kernel", "displem.commutation"], &format!("N={n}")));
    let norms = SCALES.iter().try_for_each(|&(n, g)| all_verified(&displem_claims(al(n), g), &["displem.column_norm"], &format!("N={n}")));
    outcome(structural.and(norms).map(|_| "column norms, kernel and commutation hold".into()))
}

/// `Tě` lies in the span of its own block: frame reconstruction is exact.
fn block_preserving(n: u32, max_grade: usize) -> Result<(), String> {
    let a = al(n);
    for g in GradeIndex::all_up_to(max_grade) {
        let op = build_block(a, OpName::TOracle, g, DEFAULT_MAX_DIM).map_err(|e| e.to_string())?;
        let es: Vec<_> = op.basis.iter().map(|b| e_vector(a, &b.mu, &b.nu).v).collect();
        for (j, b) in op.basis.iter().enumerate() {
            let tv = apply_t(&es[j], Mode::Sphere);
            let rec = op.columns[j].iter().fold(cuntz_core::GroupoidVector::zero(a), |acc, (i, c)| acc.add(&es[*i].scale(c)));
            let d = tv.sub(&rec);
            if inner(&d, &d) != exact::zero() {
                return Err(format!("N={n} T e[{},{}] leaves block {g}", b.mu, b.nu));
            }
        }
    }
    Ok(())
}

fn c4(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    let ids = ["toracle.modes", "toracle.symmetry", "toracle.positivity", "toracle.kernel"];
    let r = suites
        .iter()
        .try_for_each(|(n, vs)| all_verified(vs, &ids, &format!("N={n}")))
        .and_then(|_| block_preserving(2, 6))
        .and_then(|_| block_preserving(3, 4));
    outcome(r.map(|_| "modes agree; Gram-symmetric, PSD, block-preserving, kernel as stated".into()))
}

fn c5() -> Outcome {
    let a = al(3);
    let e = |m: &str, n: &str| e_vector(a, &w(m), &w(n)).v;
    let cases: Vec<(&str, _, _)> = vec![
        ("e[11,1]", e("11", "1"), e("11", "1").scale(&q(3, 2))),
        ("e[21,31]", e("21", "31"), e("21", "31").scale(&q(2, 1))),
        ("e[221,331]", e("221", "331"), e("221", "331").scale(&q(8, 3))),
        ("e[1,2]", e("1", "2"), e("1", "2").sub(&e("1", "3")).scale(&q(1, 2))),
        ("e[211,11]", e("211", "11"), e("211", "11").scale(&q(5, 2))),
    ];
    let mut worst: Option<(String, Q)> = None;
    for (name, v, want) in cases {
        for mode in [Mode::Sphere, Mode::Direct] {
            let d = apply_t(&v, mode).sub(&want);
            let r = inner(&d, &d);
            if r != exact::zero() && worst.is_none() {
                worst = Some((format!("{name} {mode:?}"), r));
            }
        }
    }
    match worst {
        None => Outcome { pass: true, detail: "five N=3 values reproduce with residual 0 in both modes".into() },
        Some((n, r)) => Outcome { pass: false, detail: format!("{n}: squared residual {}", exact::to_string(&r)) },
    }
}

fn c6() -> Outcome {
    let mut r = Ok(());
    for n in [2, 3] {
        let a = al(n);
        let mut vs = adjudicate_volumes(a, 4).unwrap();
        vs.extend(adjudicate_t(a, 4, DEFAULT_MAX_DIM).unwrap());
        vs.push(adjudicate_matrix_elements(a, 4));
        let ids = [
            "lemmaa",
            "lemmab.case1",
            "lemmab.case2",
            "lemmab.case3",
            "bigtcomp.diagonal",
            "bigtcomp.offdiagonal",
            "tchimunu",
            "frohlich.matrix_element",
        ];
        for id in ids {
            if find(&vs, id).witnesses.is_empty() {
                r = r.and(Err(format!("N={n} {id} has no witnesses")));
            }
        }
        r = r.and(all_verified(&vs, &["bigtcomp.offdiagonal"], &format!("N={n}")));
        if n == 3 {
            let c3 = find(&vs, "lemmab.case3");
            let hit = c3.witnesses.iter().any(|x| x.input.contains("mu=1 nu=2") && x.input.contains("ell=0") && x.paper == "4/3" && x.oracle == "1/3");
            if !hit {
                r = r.and(Err("lemmab.case3 witness 4/3 vs 1/3 missing".into()));
            }
        }
    }
    outcome(r.map(|_| "all verdicts present with witnesses; off-diagonal verified; 4/3 vs 1/3 witnessed".into()))
}

fn c7(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    let mut r = suites.iter().try_for_each(|(n, vs)| all_verified(vs, &["opineq.chain", "dtilde.sign"], &format!("N={n}")));
    for &(n, g) in &SCALES {
        for var in [Variant::DTilde, Variant::DKappa] {
            let rows = projection_compare(al(n), var, g, EXACT_CAP, DEFAULT_MAX_DIM).unwrap();
            if let Some(row) = rows.iter().find(|x| x.difference != 0) {
                r = r.and(Err(format!("N={n} {var} block {}: difference {}", row.grade, row.difference)));
            }
        }
    }
    outcome(r.map(|_| "projection_compare = 0 for d_tilde, d_kappa; chain and sign pattern hold".into()))
}

fn c8() -> Outcome {
    let ts = [1.0, 0.5, 0.25];
    let mut r = Ok(());
    let mut worst = 0.0f64;
    for var in [Variant::DTilde, Variant::DKappa] {
        for row in heat_trace(al(2), var, &ts, 8, DEFAULT_MAX_DIM).unwrap() {
            if !row.monotone {
                r = r.and(Err(format!("{var} t={} not monotone", row.t)));
            }
            let rel = row.tail_bound / row.partial_trace;
            worst = worst.max(rel);
            if !(rel < 1e-6) {
                r = r.and(Err(format!("{var} t={}: tail bound / partial trace = {rel:.3e}", row.t)));
            }
        }
    }
    outcome(r.map(|_| format!("monotone; worst tail ratio {worst:.3e}")))
}

fn c9() -> Outcome {
    let a = al(2);
    let s1 = (w("1"), Word::empty());
    let p6 = commutator_svd(a, CommutatorWith::Phase, &s1.0, &s1.1, 6, &[0.5]).unwrap();
    let p8 = commutator_svd(a, CommutatorWith::Phase, &s1.0, &s1.1, 8, &[0.5]).unwrap();
    let change = (p8.schatten[0].1 - p6.schatten[0].1).abs();
    let law = match &p8.law {
        DecayLaw::Geometric { rate, .. } => Ok(format!("geometric rate {rate:.6}")),
        DecayLaw::FiniteRank { rank } => Ok(format!("finite rank {rank}, geometric with rate 0")),
        DecayLaw::None => Err("commutator vanishes".to_string()),
    };
    match law {
        Ok(l) if change < 1e-6 => Outcome { pass: true, detail: format!("{l}; Schatten-1/2 change {change:.3e}") },
        Ok(l) => Outcome { pass: false, detail: format!("{l}; Schatten-1/2 change {change:.3e}") },
        Err(e) => Outcome { pass: false, detail: e },
    }
}

fn c10() -> Outcome {
    let ts = [1.0, 0.5, 0.25];
    let mut r = Ok(());
    for &(n, g) in &[(2, 8), (3, 5)] {
        let eng = FrohlichEngine::new(al(n), Variant::DTilde, g, DEFAULT_MAX_DIM).unwrap();
        let rep = state_report(&eng, &ts, 2, 2).unwrap();
        for (rho, sigma, vals) in &rep.values {
            if rho != sigma && vals.iter().any(|v| !v.exact_zero) {
                r = r.and(Err(format!("N={n} rho={rho} sigma={sigma} not exactly 0")));
            }
        }
        if !rep.factors_through_expectation {
            r = r.and(Err(format!("N={n} state does not factor through the expectation")));
        }
        for (ti, levels) in rep.masses.iter().enumerate() {
            for m in levels {
                if (m.sum - 1.0).abs() > m.error_bound.max(1e-12) {
                    r = r.and(Err(format!("N={n} t={} level {} masses sum to {}", ts[ti], m.level, m.sum)));
                }
            }
        }
        if rep.ratios.is_empty() || rep.kms_reference.is_empty() {
            r = r.and(Err("KMS diagnostic table empty".into()));
        }
    }
    outcome(r.map(|_| "off-diagonal values exactly 0; masses sum to 1 within bounds; KMS table emitted".into()))
}

fn c11(suites: &BTreeMap<u32, Vec<Verdict>>) -> Outcome {
    let mut r = all_verified(&suites[&2], &["fiber.cuntz", "fiber.spectrum"], "N=2");
    let a = al(2);
    let wd = BoundaryWord::new(a, Word::empty(), w("1")).unwrap();
    let fb = fiber_block(a, &wd, 8);
    for t in [1.0, 0.5, 0.25] {
        let mut by_grade = vec![0.0f64; 9];
        for (pt, d) in fb.basis.iter().zip(&fb.d) {
            by_grade[pt.mu.len() + pt.k] += (-t * (*d as f64).powi(2)).exp();
        }
        // increments must shrink over the last grades
        let tail = &by_grade[5..];
        if !tail.windows(2).all(|x| x[1] < x[0]) {
            r = r.and(Err(format!("fiber heat trace increments at t={t} do not decrease: {tail:?}")));
        }
    }
    outcome(r.map(|_| "D_w eigenvalues, fiber Cuntz relations, heat-trace increments shrinking".into()))
}

fn c12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_cuntz"))
            .args(["adjudicate", "--n", "3", "--max-grade", "4", "--format", "json", "--out", out.to_str().unwrap()])
            .output()
            .unwrap();
        (o.status.code(), std::fs::read(out).unwrap_or_default())
    };
    let (a, b) = (run("a.json"), run("b.json"));
    if a.0 == Some(0) && b.0 == Some(0) && !a.1.is_empty() && a.1 == b.1 {
        Outcome { pass: true, detail: format!("two runs byte-identical ({} bytes)", a.1.len()) }
    } else {
        Outcome { pass: false, detail: format!("exit {:?}/{:?}, identical {}", a.0, b.0, a.1 == b.1) }
    }
}

fn main() {
    let start = Instant::now();
    let suites: BTreeMap<u32, Vec<Verdict>> =
        SCALES.iter().map(|&(n, g)| (n, structural_suite(al(n), g, EXACT_CAP).unwrap())).collect();
    let results: Vec<(usize, Outcome)> = vec![
        (1, c1(&suites)),
        (2, c2(&suites)),
        (3, c3(&suites)),
        (4, c4(&suites)),
        (5, c5()),
        (6, c6()),
        (7, c7(&suites)),
        (8, c8()),
        (9, c9()),
        (10, c10()),
        (11, c11(&suites)),
        (12, c12()),
    ];
    let mut unexpected = Vec::new();
    for (i, o) in &results {
        println!("criterion {i:>2}: {}  {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if o.pass == EXPECTED_FAIL.contains(i) {
            unexpected.push(*i);
        }
    }
    println!("acceptance finished in {:.1} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        println!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
