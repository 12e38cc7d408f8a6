//! Invariants asserted by the crate, checked exactly.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{gram_law, labels_up_to, verdict, Check, Scope, Verdict};
use crate::error::Result;
use crate::exact::{self, Q};
use crate::kernel::{apply_t, Mode};
use crate::operators::{build_block, diagonal_d_value, fiber_block, BoundaryWord, FiberImage, GradeIndex, OpName, Variant, DEFAULT_MAX_DIM};
use crate::sheets::{brute_force_kappa, e_inner_with, e_norm_sq, e_vector, gen_action, inner, BasisIndex, GroupoidVector, PrefixIntegrals, Sheet};
use crate::spectral::spectrum;
use crate::words::{Alphabet, Word};

/// Generator relations and adjoint pairs are checked up to this grade.
const GENERATOR_GRADE: usize = 4;
const ADJOINT_GRADE: usize = 3;

/// Runs every structural invariant. Blocks above `exact_cap` fall back to a
/// floating eigen-decomposition for positivity and kernel counts.
pub fn structural_suite(alphabet: Alphabet, max_grade: usize, exact_cap: usize) -> Result<Vec<Verdict>> {
    let scope = Scope::new(alphabet, max_grade);
    let labels = labels_up_to(alphabet, max_grade);
    let mut out = vec![
        verdict("kappagonbasis.norms", scope.clone(), norm_checks(alphabet, &labels)),
        verdict("defofbasis.gram", scope.clone(), gram_checks(alphabet, &labels, |a, b| gram_law(alphabet, a, b))),
        verdict("kappagonbasis.eigen", scope.clone(), eigen_checks(alphabet, &labels)),
        verdict("kappagonbasis.bruteforce", scope.clone(), brute_force_checks(alphabet, &labels)),
    ];
    let small = labels_up_to(alphabet, max_grade.min(GENERATOR_GRADE));
    out.push(verdict("cuntz.relations", Scope::new(alphabet, max_grade.min(GENERATOR_GRADE)), cuntz_checks(alphabet, &small)));
    let tiny = labels_up_to(alphabet, max_grade.min(ADJOINT_GRADE));
    out.push(verdict("cuntz.adjoint", Scope::new(alphabet, max_grade.min(ADJOINT_GRADE)), adjoint_checks(alphabet, &tiny)));
    out.extend(dispersion_verdicts(alphabet, max_grade)?);
    out.push(verdict("opineq.chain", scope.clone(), opineq_checks(alphabet, &labels)));
    out.push(verdict("dtilde.sign", scope.clone(), sign_checks(alphabet, &labels)));
    out.push(verdict("toracle.modes", scope.clone(), mode_checks(&labels, alphabet)));
    out.push(verdict("toracle.kernel", scope.clone(), kernel_checks(alphabet, max_grade)));
    out.extend(oracle_block_verdicts(alphabet, max_grade, exact_cap)?);
    out.extend(fiber_verdicts(alphabet, max_grade));
    Ok(out)
}

fn norm_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    labels
        .par_iter()
        .map(|b| {
            let e = e_vector(alphabet, &b.mu, &b.nu);
            Check::diff(format!("N={} {b}", alphabet.size()), e_norm_sq(alphabet, b), inner(&e.v, &e.v))
        })
        .collect()
}

/// All same-sheet pairs `a ≤ b`, compared to `expected`. Pairs on different
/// sheets have disjoint support.
pub(crate) fn gram_checks(alphabet: Alphabet, labels: &[BasisIndex], expected: impl Fn(&BasisIndex, &BasisIndex) -> Q + Sync) -> Vec<Check> {
    let mut by_sheet: BTreeMap<Sheet, Vec<&BasisIndex>> = BTreeMap::new();
    for b in labels {
        by_sheet.entry(b.sheet()).or_default().push(b);
    }
    let groups: Vec<Vec<&BasisIndex>> = by_sheet.into_values().collect();
    groups
        .par_iter()
        .flat_map_iter(|group| {
            let ints: Vec<PrefixIntegrals> = group
                .iter()
                .map(|b| {
                    let e = e_vector(alphabet, &b.mu, &b.nu).v;
                    PrefixIntegrals::new(e.part(&b.sheet()).expect("on its sheet"))
                })
                .collect();
            let mut out = Vec::new();
            for (j, b) in group.iter().enumerate() {
                for a in &group[..=j] {
                    let got = e_inner_with(alphabet, a, Some(&ints[j]));
                    out.push(Check::diff(format!("N={} <{a},{b}>", alphabet.size()), expected(a, b), got));
                }
            }
            out
        })
        .collect()
}

fn eigen_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    labels
        .par_iter()
        .map(|b| {
            let e = e_vector(alphabet, &b.mu, &b.nu);
            let kv = exact::qi(b.kappa_v() as i64);
            let kg = e.v.mul_kappa_g();
            let rayleigh = inner(&e.v, &kg) / &e.norm_sq;
            let diff = kg.sub(&e.v.scale(&kv));
            let c_diff = e.v.mul_c().sub(&e.v.scale(&exact::qi(b.n())));
            let residual = inner(&diff, &diff) + inner(&c_diff, &c_diff);
            Check { input: format!("N={} {b}", alphabet.size()), paper: kv, oracle: rayleigh, residual }
        })
        .collect()
}

/// Cell-level `κ_G` on every cell `ν·τ` with `|τ| = 2` agrees with the sheet.
fn brute_force_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    let tails = alphabet.words(2);
    labels
        .par_iter()
        .map(|b| {
            let sheet = b.sheet();
            let bad = tails
                .iter()
                .filter(|t| {
                    let (k, mu_g) = brute_force_kappa(&b.mu, &b.nu, &b.nu.concat(t));
                    k != sheet.k || mu_g != sheet.mu0
                })
                .count();
            Check::count(format!("N={} {b} sheet={sheet}", alphabet.size()), bad)
        })
        .collect()
}

fn sq(v: &GroupoidVector) -> Q {
    inner(v, v)
}

/// `Σ_i S_i S_i* = 1` and `S_i* S_j = δ_ij` on every label.
fn cuntz_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    labels
        .par_iter()
        .map(|b| {
            let v = e_vector(alphabet, &b.mu, &b.nu).v;
            let mut sum = GroupoidVector::zero(alphabet);
            let mut residual = Q::zero();
            for i in alphabet.letters() {
                sum = sum.add(&gen_action(i, &gen_action(i, &v, true), false));
                let si = gen_action(i, &v, false);
                for j in alphabet.letters() {
                    let back = gen_action(j, &si, true);
                    let want = if i == j { v.clone() } else { GroupoidVector::zero(alphabet) };
                    residual += sq(&back.sub(&want));
                }
            }
            residual += sq(&sum.sub(&v));
            Check { input: format!("N={} {b}", alphabet.size()), paper: Q::zero(), oracle: residual.clone(), residual }
        })
        .collect()
}

/// `⟨S_i ě_a, ě_b⟩ = ⟨ě_a, S_i* ě_b⟩` over all pairs and letters.
fn adjoint_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    let vs: Vec<GroupoidVector> = labels.par_iter().map(|b| e_vector(alphabet, &b.mu, &b.nu).v).collect();
    let mut out = Vec::new();
    for i in alphabet.letters() {
        let fwd: Vec<GroupoidVector> = vs.par_iter().map(|v| gen_action(i, v, false)).collect();
        let back: Vec<GroupoidVector> = vs.par_iter().map(|v| gen_action(i, v, true)).collect();
        let rows: Vec<Check> = (0..labels.len())
            .into_par_iter()
            .map(|a| {
                let mut bad = 0;
                for b in 0..labels.len() {
                    if inner(&fwd[a], &vs[b]) != inner(&vs[a], &back[b]) {
                        bad += 1;
                    }
                }
                Check::count(format!("N={} S_{i} on {} against all labels", alphabet.size(), labels[a]), bad)
            })
            .collect();
        out.extend(rows);
    }
    out
}

fn dispersion_verdicts(alphabet: Alphabet, max_grade: usize) -> Result<Vec<Verdict>> {
    let scope = Scope::new(alphabet, max_grade);
    let grades = GradeIndex::all_up_to(max_grade);
    let blocks: Vec<_> = grades
        .par_iter()
        .map(|&g| -> Result<_> {
            let b = build_block(alphabet, OpName::B, g, DEFAULT_MAX_DIM)?;
            let mut nonzero = 0;
            for name in [OpName::Kappa, OpName::KappaG, OpName::C] {
                let d = build_block(alphabet, name, g, DEFAULT_MAX_DIM)?;
                nonzero += b.commutator(&d).columns.iter().map(Vec::len).sum::<usize>();
            }
            let wavelet_cols = b.basis.iter().zip(&b.columns).filter(|(l, c)| l.is_wavelet() && !c.is_empty()).count();
            let complement = b
                .basis
                .iter()
                .zip(&b.columns)
                .filter(|(l, c)| !c.is_empty() && l.k() != l.kappa_v())
                .count();
            Ok((g, nonzero, wavelet_cols, complement, !b.is_gram_symmetric()))
        })
        .collect::<Result<_>>()?;
    let n = alphabet.size();
    let row = |g: &GradeIndex, what: &str| format!("N={n} block ({},{}) {what}", g.n, g.k);
    Ok(vec![
        verdict("displem.kernel", scope.clone(), blocks.iter().map(|(g, _, w, _, _)| Check::count(row(g, "wavelet columns of B"), *w))),
        verdict(
            "displem.commutation",
            scope.clone(),
            blocks.iter().map(|(g, c, _, _, _)| Check::count(row(g, "nonzero entries of [B,kappa],[B,kappa_g],[B,c]"), *c)),
        ),
        verdict("displem.complement", scope.clone(), blocks.iter().map(|(g, _, _, k, _)| Check::count(row(g, "B columns with kappa != kappa_v"), *k))),
        verdict(
            "displem.symmetry",
            scope,
            blocks.iter().map(|(g, _, _, _, s)| Check::count(row(g, "B not Gram-symmetric"), *s as usize)),
        ),
    ])
}

/// `(1 − 1/N)κ ≤ κ − κ_G/N ≤ κ` and `κ_G ≤ κ`, label by label. The residual
/// is the total violation.
fn opineq_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    let n = alphabet.size() as i64;
    labels
        .iter()
        .map(|b| {
            let k = exact::qi(b.k() as i64);
            let kv = exact::qi(b.kappa_v() as i64);
            let t = &k - &kv / exact::qi(n);
            let lower = &k * exact::q(n - 1, n);
            let mut violation = Q::zero();
            for gap in [&t - &lower, &k - &t, &k - &kv] {
                if gap.is_negative() {
                    violation -= gap;
                }
            }
            Check { input: format!("N={n} {b}"), paper: Q::zero(), oracle: violation.clone(), residual: violation }
        })
        .collect()
}

/// `D̃ = (2P_F − 1)(|c| + T̃)` and its sign is that of `2P_F − 1` off the kernel.
fn sign_checks(alphabet: Alphabet, labels: &[BasisIndex]) -> Vec<Check> {
    let n = alphabet.size() as i64;
    labels
        .iter()
        .map(|b| {
            let d = diagonal_d_value(alphabet, Variant::DTilde, b);
            let t = exact::qi(b.k() as i64) - exact::q(b.kappa_v() as i64, n);
            let sign = if b.is_fock() { Q::one() } else { -Q::one() };
            let want = &sign * (exact::qi(b.n().abs()) + t);
            let mut residual = (&d - &want).abs();
            if !d.is_zero() && d.is_positive() != b.is_fock() {
                residual += Q::one();
            }
            Check { input: format!("N={n} {b}"), paper: want, oracle: d, residual }
        })
        .collect()
}

fn mode_checks(labels: &[BasisIndex], alphabet: Alphabet) -> Vec<Check> {
    labels
        .par_iter()
        .map(|b| {
            let v = e_vector(alphabet, &b.mu, &b.nu).v;
            let s = apply_t(&v, Mode::Sphere);
            let d = apply_t(&v, Mode::Direct);
            let residual = sq(&s.sub(&d));
            Check { input: format!("N={} {b}", alphabet.size()), paper: inner(&v, &s), oracle: inner(&v, &d), residual }
        })
        .collect()
}

/// `T ě_{μ,∅} = 0` and `T` kills the indicator of every sheet in range.
fn kernel_checks(alphabet: Alphabet, max_grade: usize) -> Vec<Check> {
    let mut inputs: Vec<(String, GroupoidVector)> = Vec::new();
    for mu in alphabet.words_up_to(max_grade) {
        let v = e_vector(alphabet, &mu, &Word::empty()).v;
        inputs.push((format!("e[{mu},∅]"), v));
    }
    for k in 0..=max_grade {
        for mu0 in alphabet.words_up_to(max_grade - k) {
            let s = Sheet::new(mu0, k);
            let v = GroupoidVector::on_sheet(s.clone(), s.domain(alphabet)).expect("domain lies on the sheet");
            inputs.push((format!("indicator of sheet {s}"), v));
        }
    }
    inputs
        .par_iter()
        .map(|(name, v)| {
            let r = sq(&apply_t(v, Mode::Sphere));
            Check { input: format!("N={} {name}", alphabet.size()), paper: Q::zero(), oracle: r.clone(), residual: r }
        })
        .collect()
}

/// Number of sheets whose indicator lies in the block.
fn sheet_count(alphabet: Alphabet, g: GradeIndex) -> usize {
    if g.k == 0 {
        g.label_count(alphabet)
    } else if g.n + g.k as i64 == 0 {
        1
    } else {
        (alphabet.size() as usize).pow((g.n + g.k as i64) as u32)
    }
}

fn oracle_block_verdicts(alphabet: Alphabet, max_grade: usize, exact_cap: usize) -> Result<Vec<Verdict>> {
    let scope = Scope::new(alphabet, max_grade);
    let n = alphabet.size();
    let rows: Vec<_> = GradeIndex::all_up_to(max_grade)
        .into_par_iter()
        .map(|g| -> Result<_> {
            let op = build_block(alphabet, OpName::TOracle, g, DEFAULT_MAX_DIM)?;
            let symmetric = op.is_gram_symmetric();
            let red = op.reduce();
            let (negative, zero, how) = if red.dim() <= exact_cap {
                let i = op.inertia();
                (i.negative, i.zero, "exact")
            } else {
                let s = spectrum(&op);
                let eps = 1e-9 * (1.0 + s.norm);
                let neg = s.eigenvalues.iter().filter(|&&l| l < -eps).count();
                let zero = s.eigenvalues.iter().filter(|&&l| l.abs() <= eps).count();
                (neg, zero, "float")
            };
            Ok((g, symmetric, negative, zero, how))
        })
        .collect::<Result<_>>()?;
    let label = |g: &GradeIndex, how: &str| format!("N={n} block ({},{}) {how}", g.n, g.k);
    Ok(vec![
        verdict("toracle.symmetry", scope.clone(), rows.iter().map(|(g, s, ..)| Check::count(label(g, "Gram asymmetry"), !s as usize))),
        verdict("toracle.positivity", scope.clone(), rows.iter().map(|(g, _, neg, _, how)| Check::count(label(g, &format!("negative eigenvalues ({how})")), *neg))),
        verdict(
            "toracle.kernel_census",
            scope,
            rows.iter().map(|(g, _, _, zero, how)| {
                Check::diff(label(g, &format!("zero modes vs sheets in block ({how})")), exact::qi(sheet_count(alphabet, *g) as i64), exact::qi(*zero as i64))
            }),
        ),
    ])
}

fn fiber_verdicts(alphabet: Alphabet, max_grade: usize) -> Vec<Verdict> {
    let scope = Scope::new(alphabet, max_grade);
    let w = BoundaryWord::new(alphabet, Word::empty(), Word::new(vec![1])).expect("valid word");
    let fb = fiber_block(alphabet, &w, max_grade);
    let n = alphabet.size();
    let letters: Vec<usize> = alphabet.letters().map(|i| i as usize - 1).collect();
    let mut cuntz = Vec::new();
    let mut eigen = Vec::new();
    for (j, pt) in fb.basis.iter().enumerate() {
        let input = format!("N={n} w=1^inf point ({},{})", pt.mu, pt.k);
        let mut bad = 0;
        let mut complete = true;
        let mut returns = 0;
        for &i in &letters {
            match fb.s_adj[i][j] {
                FiberImage::Point(p) => match fb.s[i][p] {
                    FiberImage::Point(q) if q == j => returns += 1,
                    FiberImage::Outside => complete = false,
                    _ => bad += 1,
                },
                FiberImage::Outside => complete = false,
                FiberImage::Zero => {}
            }
            if let FiberImage::Point(p) = fb.s[i][j] {
                for &i2 in &letters {
                    match fb.s_adj[i2][p] {
                        FiberImage::Point(q) if i2 == i && q == j => {}
                        FiberImage::Zero if i2 != i => {}
                        FiberImage::Outside => {}
                        _ => bad += 1,
                    }
                }
            }
        }
        if complete && returns != 1 {
            bad += 1;
        }
        cuntz.push(Check::count(input.clone(), bad));
        let label = BasisIndex::new(pt.mu.clone(), w.prefix(pt.k));
        let want = diagonal_d_value(alphabet, Variant::DKappa, &label);
        eigen.push(Check::diff(input, want, exact::qi(fb.d[j])));
    }
    vec![verdict("fiber.cuntz", scope.clone(), cuntz), verdict("fiber.spectrum", scope, eigen)]
}
