//! Least-structure fit of the diagonal discrepancy between the oracle and the
//! printed closed form of `T`.
//!
//! Labels are split into classes by `ν = ∅`, `δ = [t(μ) = t(ν) ≠ ∅]`,
//! `[κ_V > 0]` and whether the sheet root `μ₀` is empty. Within a class the
//! discrepancy is fitted by the fewest terms from a small dictionary in
//! `N`, `|ν|` and `κ_V`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::paper::block_comparison;
use crate::error::Result;
use crate::exact::{self, Q};
use crate::operators::GradeIndex;
use crate::words::Alphabet;

/// Largest number of terms tried per class.
const MAX_TERMS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiagonalDatum {
    pub n: u32,
    pub mu: String,
    pub nu: String,
    pub nu_len: usize,
    pub kappa_v: usize,
    /// `t(μ) = t(ν) ≠ ∅`.
    pub same_tail: bool,
    /// The label lives on a sheet `(∅, k)` with `ν ≠ ∅`.
    pub root: bool,
    /// Oracle minus printed Rayleigh quotient.
    pub discrepancy: Q,
}

/// Diagonal discrepancies for every label up to `max_grade`.
pub fn diagonal_discrepancies(alphabet: Alphabet, max_grade: usize, max_dim: usize) -> Result<Vec<DiagonalDatum>> {
    let blocks: Vec<Vec<DiagonalDatum>> = GradeIndex::all_up_to(max_grade)
        .into_par_iter()
        .map(|g| {
            let (diag, _) = block_comparison(alphabet, g, max_dim)?;
            Ok(diag
                .into_iter()
                .map(|(b, c)| DiagonalDatum {
                    n: alphabet.size(),
                    mu: b.mu.to_string(),
                    nu: b.nu.to_string(),
                    nu_len: b.k(),
                    kappa_v: b.kappa_v(),
                    same_tail: b.is_wavelet(),
                    root: !b.nu.is_empty() && b.sheet().mu0.is_empty(),
                    discrepancy: c.residual,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitTerm {
    pub name: String,
    pub coefficient: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassFit {
    pub class: String,
    /// Empty means zero on this class.
    pub terms: Vec<FitTerm>,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub class: String,
    pub nu_len: usize,
    pub kappa_v: usize,
    pub discrepancy: String,
    pub fitted: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrectionFit {
    pub classes: Vec<ClassFit>,
    /// Sum of squared residuals over the distinct rows.
    pub residual: String,
    pub rows: Vec<CorrectionRow>,
}

impl CorrectionFit {
    /// No class needs a term.
    pub fn is_zero(&self) -> bool {
        self.classes.iter().all(|c| c.terms.is_empty())
    }
}

fn class_of(d: &DiagonalDatum) -> String {
    if d.nu_len == 0 {
        return "nu=∅".into();
    }
    let tail = if d.same_tail { "t(mu)=t(nu)" } else { "t(mu)!=t(nu)" };
    let kv = if d.kappa_v > 0 { "kappa_v>0" } else { "kappa_v=0" };
    let root = if d.root { "mu0=∅" } else { "mu0!=∅" };
    format!("{tail}, {kv}, {root}")
}

/// `(name, value)` of every dictionary term at `(N, |ν|, κ_V)`.
fn dictionary(n: u32, nu_len: usize, kappa_v: usize) -> Vec<(&'static str, Q)> {
    let n = n as i64;
    let kv = exact::qi(kappa_v as i64);
    let len = exact::qi(nu_len as i64);
    vec![
        ("1", Q::one()),
        ("1/N", exact::q(1, n)),
        ("1/(N-1)", exact::q(1, n - 1)),
        ("1/(N(N-1))", exact::q(1, n * (n - 1))),
        ("kappa_v", kv.clone()),
        ("kappa_v/N", kv / exact::qi(n)),
        ("|nu|", len.clone()),
        ("|nu|/N", len / exact::qi(n)),
    ]
}

/// Solves the normal equations exactly; `None` when the columns are dependent.
fn least_squares(cols: &[Vec<Q>], y: &[Q]) -> Option<Vec<Q>> {
    let m = cols.len();
    let mut a: Vec<Vec<Q>> = (0..m)
        .map(|i| {
            let mut row: Vec<Q> = (0..m).map(|j| cols[i].iter().zip(&cols[j]).map(|(x, z)| x * z).sum()).collect();
            row.push(cols[i].iter().zip(y).map(|(x, z)| x * z).sum());
            row
        })
        .collect();
    for c in 0..m {
        let p = (c..m).find(|&r| !a[r][c].is_zero())?;
        a.swap(c, p);
        let piv = a[c][c].clone();
        for j in c..=m {
            a[c][j] = &a[c][j] / &piv;
        }
        for r in 0..m {
            if r != c && !a[r][c].is_zero() {
                let f = a[r][c].clone();
                for j in c..=m {
                    let t = &f * &a[c][j];
                    a[r][j] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[m].clone()).collect())
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for s in subsets(n, size - 1) {
        let start = s.last().map_or(0, |&l| l + 1);
        for i in start..n {
            let mut t = s.clone();
            t.push(i);
            out.push(t);
        }
    }
    out
}

/// Best subset for one class: the first with zero residual by size then term
/// order, else the smallest residual seen.
fn fit_class(feats: &[Vec<(&'static str, Q)>], y: &[Q]) -> (Vec<usize>, Vec<Q>, Q) {
    let width = feats.first().map_or(0, Vec::len);
    let mut best: Option<(Q, Vec<usize>, Vec<Q>)> = None;
    for size in 0..=MAX_TERMS {
        for subset in subsets(width, size) {
            let cols: Vec<Vec<Q>> = subset.iter().map(|&t| feats.iter().map(|f| f[t].1.clone()).collect()).collect();
            let Some(coef) = least_squares(&cols, y) else { continue };
            let res: Q = (0..y.len())
                .map(|r| {
                    let fit: Q = subset.iter().zip(&coef).map(|(&t, c)| c * &feats[r][t].1).sum();
                    let e = fit - &y[r];
                    &e * &e
                })
                .sum();
            if best.as_ref().map_or(true, |(b, ..)| res < *b) {
                let done = res.is_zero();
                best = Some((res, subset, coef));
                if done {
                    let (r, s, c) = best.unwrap();
                    return (s, c, r);
                }
            }
        }
    }
    let (r, s, c) = best.expect("the empty subset always fits");
    (s, c, r)
}

/// Fits the discrepancy class by class; never asserted, only reported.
pub fn fit_correction(data: &[DiagonalDatum]) -> CorrectionFit {
    // distinct (class, N, |ν|, κ_V, value) rows with multiplicities
    let mut groups: BTreeMap<(String, u32, usize, usize, Q), usize> = BTreeMap::new();
    for d in data {
        *groups.entry((class_of(d), d.n, d.nu_len, d.kappa_v, d.discrepancy.clone())).or_insert(0) += 1;
    }
    let mut by_class: BTreeMap<String, Vec<(u32, usize, usize, Q, usize)>> = BTreeMap::new();
    for ((class, n, len, kv, v), c) in groups {
        by_class.entry(class).or_default().push((n, len, kv, v, c));
    }
    let mut classes = Vec::new();
    let mut rows = Vec::new();
    let mut total = Q::zero();
    for (class, data) in &by_class {
        let feats: Vec<Vec<(&'static str, Q)>> = data.iter().map(|(n, len, kv, ..)| dictionary(*n, *len, *kv)).collect();
        let y: Vec<Q> = data.iter().map(|r| r.3.clone()).collect();
        let (subset, coef, res) = fit_class(&feats, &y);
        total += &res;
        for (r, (n, len, kv, v, c)) in data.iter().enumerate() {
            let fitted: Q = subset.iter().zip(&coef).map(|(&t, k)| k * &feats[r][t].1).sum();
            rows.push(CorrectionRow {
                n: *n,
                class: class.clone(),
                nu_len: *len,
                kappa_v: *kv,
                discrepancy: exact::to_string(v),
                fitted: exact::to_string(&fitted),
                count: *c,
            });
        }
        let names = dictionary(2, 0, 0);
        classes.push(ClassFit {
            class: class.clone(),
            terms: subset
                .iter()
                .zip(&coef)
                .filter(|(_, c)| !c.is_zero())
                .map(|(&t, c)| FitTerm { name: names[t].0.to_string(), coefficient: exact::to_string(c) })
                .collect(),
            residual: exact::to_string(&res),
        });
    }
    CorrectionFit { classes, residual: exact::to_string(&total), rows }
}
