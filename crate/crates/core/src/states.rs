//! The KMS state, the heat-weighted functionals `φ_t^D` and matrix elements
//! of `S_ρ S_σ*` in the `ě` family.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::operators::{assemble_d_with, diagonal_d_value, BlockSource, Direct, GradeIndex, Variant};
use crate::sheets::{apply_word_pair, block_basis, e_norm_sq, e_vector, frame_weight, inner, BasisIndex};
use crate::spectral::{tail_bound, Truncation};
use crate::words::{common_prefix_len, same_nonempty_tail, Alphabet, Word};

/// `φ(S_ρ S_σ*) = δ_{ρ,σ} N^{−|σ|}`.
pub fn kms_phi(alphabet: Alphabet, rho: &Word, sigma: &Word) -> Q {
    if rho == sigma {
        exact::pow(alphabet.size(), -(sigma.len() as i64))
    } else {
        Q::zero()
    }
}

/// `⟨ě, S_ρ S_σ* ě⟩ / ⟨ě, ě⟩`, computed from the generator action.
pub fn matrix_element_direct(alphabet: Alphabet, mu: &Word, nu: &Word, rho: &Word, sigma: &Word) -> Q {
    let e = e_vector(alphabet, mu, nu);
    inner(&e.v, &apply_word_pair(rho, sigma, &e.v)) / e.norm_sq
}

/// One of two words is a prefix of the other.
fn nested(a: &Word, b: &Word) -> bool {
    common_prefix_len(a, b) == a.len().min(b.len())
}

/// The printed closed form for `⟨e_{μ,ν}, S_ρ S_σ* e_{μ,ν}⟩`. The reading
/// used: `δ_{|σ∨μ|, min(|μ|,|σ|)}` is one factor, `μ̲` is `μ` without its
/// last letter, and `(∅, ∅)` falls under the first case.
pub fn matrix_element_formula(alphabet: Alphabet, mu: &Word, nu: &Word, rho: &Word, sigma: &Word) -> Q {
    if rho != sigma {
        return Q::zero();
    }
    let n = alphabet.size();
    let m = mu.len() as i64;
    let r = rho.len() as i64;
    let first = if nested(sigma, mu) { exact::pow(n, (m - r).min(0)) } else { Q::zero() };
    if !same_nonempty_tail(mu, nu) {
        return first;
    }
    let second = if nested(sigma, &mu.init()) { exact::pow(n, (m - r - 1).min(0)) } else { Q::zero() };
    (first * exact::qi(n as i64 - 2) + second) / exact::qi(n as i64 - 1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrohlichValue {
    pub value: f64,
    pub error_bound: f64,
    /// The value is an exact zero: every weighted trace vanished in rationals.
    pub exact_zero: bool,
}

enum BlockData {
    Diagonal { labels: Vec<(BasisIndex, Q)> },
    Dense { eigenvalues: Vec<f64>, eigenvectors: DMatrix<f64>, trunc: Truncation },
}

/// Precomputed spectral data of a variant for evaluating `φ_t^D`.
pub struct FrohlichEngine {
    pub alphabet: Alphabet,
    pub variant: Variant,
    pub max_grade: usize,
    blocks: Vec<BlockData>,
}

/// Exact per-eigenvalue traces (diagonal blocks) and per-eigenpair expectations.
struct Weights {
    exact: BTreeMap<Q, Q>,
    float: Vec<(f64, f64)>,
}

impl FrohlichEngine {
    pub fn new(alphabet: Alphabet, variant: Variant, max_grade: usize, max_dim: usize) -> Result<Self> {
        Self::new_with(&Direct, alphabet, variant, max_grade, max_dim)
    }

    /// [`FrohlichEngine::new`] with blocks from `source`.
    pub fn new_with(source: &dyn BlockSource, alphabet: Alphabet, variant: Variant, max_grade: usize, max_dim: usize) -> Result<Self> {
        let blocks = GradeIndex::all_up_to(max_grade)
            .into_par_iter()
            .map(|g| -> Result<BlockData> {
                if variant.is_diagonal() {
                    let labels = block_basis(alphabet, g.n, g.k)?
                        .into_iter()
                        .map(|b| {
                            let l = diagonal_d_value(alphabet, variant, &b);
                            (b, l)
                        })
                        .collect();
                    Ok(BlockData::Diagonal { labels })
                } else {
                    let op = assemble_d_with(source, alphabet, variant, g, max_dim)?;
                    let m = op.reduce().orthonormal_f64();
                    let d = m.len();
                    let a = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[i][j] + m[j][i]));
                    let eig = SymmetricEigen::new(a);
                    let trunc = Truncation::new(alphabet, &[g])?;
                    Ok(BlockData::Dense { eigenvalues: eig.eigenvalues.iter().copied().collect(), eigenvectors: eig.eigenvectors, trunc })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FrohlichEngine { alphabet, variant, max_grade, blocks })
    }

    fn weights(&self, rho: &Word, sigma: &Word) -> Weights {
        let al = self.alphabet;
        let per_block: Vec<Weights> = self
            .blocks
            .par_iter()
            .map(|blk| match blk {
                BlockData::Diagonal { labels } => {
                    let mut exact: BTreeMap<Q, Q> = BTreeMap::new();
                    for (b, l) in labels {
                        let e = e_vector(al, &b.mu, &b.nu);
                        let ip = if rho.is_empty() && sigma.is_empty() {
                            e.norm_sq.clone()
                        } else {
                            inner(&e.v, &apply_word_pair(rho, sigma, &e.v))
                        };
                        if !ip.is_zero() {
                            *exact.entry(l.clone()).or_insert_with(Q::zero) += ip * frame_weight(al, b) / e_norm_sq(al, b);
                        }
                    }
                    Weights { exact, float: Vec::new() }
                }
                BlockData::Dense { eigenvalues, eigenvectors, trunc } => {
                    let cols = trunc.scale_f64(&trunc.matrix(|u| apply_word_pair(rho, sigma, u)));
                    let d = trunc.dim();
                    let mut x = DMatrix::<f64>::zeros(d, d);
                    for (q, col) in cols.iter().enumerate() {
                        for (p, v) in col {
                            x[(*p, q)] = *v;
                        }
                    }
                    let float = eigenvalues
                        .iter()
                        .enumerate()
                        .map(|(j, &l)| {
                            let v = eigenvectors.column(j);
                            (l, (v.transpose() * &x * v)[(0, 0)])
                        })
                        .collect();
                    Weights { exact: BTreeMap::new(), float }
                }
            })
            .collect();
        let mut out = Weights { exact: BTreeMap::new(), float: Vec::new() };
        for w in per_block {
            for (l, c) in w.exact {
                *out.exact.entry(l).or_insert_with(Q::zero) += c;
            }
            out.float.extend(w.float);
        }
        out.exact.retain(|_, c| !c.is_zero());
        out
    }

    fn heat_sum(w: &Weights, t: f64) -> f64 {
        let a: f64 = w.exact.iter().map(|(l, c)| {
            let l = exact::to_f64(l);
            exact::to_f64(c) * (-t * l * l).exp()
        }).sum();
        let b: f64 = w.float.iter().map(|(l, c)| c * (-t * l * l).exp()).sum();
        a + b
    }

    /// `Tr(S_ρS_σ* e^{−tD²}) / Tr(e^{−tD²})` for each `t`.
    pub fn values(&self, rho: &Word, sigma: &Word, ts: &[f64]) -> Result<Vec<FrohlichValue>> {
        if let Some(&t) = ts.iter().find(|&&t| !(t > 0.0)) {
            return Err(Error::NonPositiveT(t));
        }
        let num = self.weights(rho, sigma);
        let den = self.weights(&Word::empty(), &Word::empty());
        let exact_zero = num.exact.is_empty() && num.float.iter().all(|(_, c)| *c == 0.0);
        Ok(ts
            .iter()
            .map(|&t| {
                let d = Self::heat_sum(&den, t);
                let tau = tail_bound(self.alphabet, self.variant, t, self.max_grade);
                let value = if exact_zero { 0.0 } else { Self::heat_sum(&num, t) / d };
                FrohlichValue { value, error_bound: 2.0 * tau / d, exact_zero }
            })
            .collect())
    }
}

/// `φ_t^D(S_ρ S_σ*)` at a single `t`.
pub fn frohlich(alphabet: Alphabet, variant: Variant, rho: &Word, sigma: &Word, t: f64, max_grade: usize, max_dim: usize) -> Result<FrohlichValue> {
    if !(t > 0.0) {
        return Err(Error::NonPositiveT(t));
    }
    let eng = FrohlichEngine::new(alphabet, variant, max_grade, max_dim)?;
    Ok(eng.values(rho, sigma, &[t])?.remove(0))
}

/// Geometric grid `t = 2^{−j}`, `j = 0..=levels`.
pub fn t_grid(levels: usize) -> Vec<f64> {
    (0..=levels).map(|j| 0.5f64.powi(j as i32)).collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassLevel {
    pub level: usize,
    pub masses: Vec<(String, f64)>,
    pub sum: f64,
    pub error_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub nu: String,
    pub j: u8,
    pub t: Vec<f64>,
    /// `φ_t(S_νS_ν*) / (N φ_t(S_{νj}S_{νj}*))` along the grid.
    pub ratio: Vec<f64>,
    /// `2 r(t/2) − r(t)` along the grid.
    pub richardson: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateReport {
    pub variant: Variant,
    pub t_grid: Vec<f64>,
    /// `(ρ, σ, values along the grid)`.
    pub values: Vec<(String, String, Vec<FrohlichValue>)>,
    pub masses: Vec<Vec<MassLevel>>,
    /// `(ρ, σ, φ(S_ρS_σ*))` exact, as strings.
    pub kms_reference: Vec<(String, String, String)>,
    pub ratios: Vec<RatioRow>,
    /// `φ_t(S_ρS_σ*) = δ_{ρ,σ} φ_t(S_ρS_ρ*)` held for every pair and `t`.
    pub factors_through_expectation: bool,
    pub normalised: bool,
}

/// Values on `{S_ρS_σ*: |ρ|,|σ| ≤ word_len}`, cylinder masses up to `mass_depth`,
/// the KMS reference and the ratio diagnostic.
pub fn state_report(eng: &FrohlichEngine, ts: &[f64], word_len: usize, mass_depth: usize) -> Result<StateReport> {
    let al = eng.alphabet;
    let words = al.words_up_to(word_len.max(mass_depth + 1));
    let family: Vec<(Word, Word)> = al
        .words_up_to(word_len)
        .iter()
        .flat_map(|r| al.words_up_to(word_len).into_iter().map(move |s| (r.clone(), s)))
        .collect();
    let mut cache: BTreeMap<(Word, Word), Vec<FrohlichValue>> = BTreeMap::new();
    for (r, s) in &family {
        cache.insert((r.clone(), s.clone()), eng.values(r, s, ts)?);
    }
    for w in &words {
        if !cache.contains_key(&(w.clone(), w.clone())) {
            cache.insert((w.clone(), w.clone()), eng.values(w, w, ts)?);
        }
    }
    let mut factors = true;
    for (r, s) in &family {
        if r != s && cache[&(r.clone(), s.clone())].iter().any(|v| !v.exact_zero) {
            factors = false;
        }
    }
    let one = &cache[&(Word::empty(), Word::empty())];
    let normalised = one.iter().all(|v| (v.value - 1.0).abs() <= v.error_bound.max(1e-12));
    let masses = (0..ts.len())
        .map(|ti| {
            (0..=mass_depth)
                .map(|level| {
                    let ms: Vec<(String, f64)> =
                        al.words(level).iter().map(|w| (w.to_string(), cache[&(w.clone(), w.clone())][ti].value)).collect();
                    let sum = ms.iter().map(|(_, v)| v).sum();
                    let error_bound = ms.iter().map(|(w, _)| {
                        let word = Word::parse(w).unwrap_or_default();
                        cache[&(word.clone(), word)][ti].error_bound
                    }).sum();
                    MassLevel { level, masses: ms, sum, error_bound }
                })
                .collect()
        })
        .collect();
    let mut ratios = Vec::new();
    for nu in al.words_up_to(mass_depth) {
        for j in al.letters() {
            let a = &cache[&(nu.clone(), nu.clone())];
            let child = nu.push(j);
            let b = &cache[&(child.clone(), child)];
            let ratio: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.value / (al.size() as f64 * y.value)).collect();
            let richardson = ratio.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
            ratios.push(RatioRow { nu: nu.to_string(), j, t: ts.to_vec(), ratio, richardson });
        }
    }
    let kms_reference = family
        .iter()
        .map(|(r, s)| (r.to_string(), s.to_string(), exact::to_string(&kms_phi(al, r, s))))
        .collect();
    let values = family.iter().map(|(r, s)| (r.to_string(), s.to_string(), cache[&(r.clone(), s.clone())].clone())).collect();
    Ok(StateReport { variant: eng.variant, t_grid: ts.to_vec(), values, masses, kms_reference, ratios, factors_through_expectation: factors, normalised })
}

/// `Φ(S_ρ S_σ*) = δ_{ρ,σ} S_ρ S_ρ*`, as the pair it leaves (or `None`).
pub fn conditional_expectation(rho: &Word, sigma: &Word) -> Option<(Word, Word)> {
    (rho == sigma).then(|| (rho.clone(), rho.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};
    use crate::operators::DEFAULT_MAX_DIM;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn a(n: u32) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    #[test]
    fn kms_examples() {
        assert_eq!(kms_phi(a(3), &w("1"), &w("1")), q(1, 3));
        assert_eq!(kms_phi(a(3), &w("1"), &w("2")), qi(0));
        assert_eq!(kms_phi(a(3), &w(""), &w("")), qi(1));
    }

    #[test]
    fn matrix_element_examples() {
        let al = a(3);
        assert_eq!(matrix_element_formula(al, &w(""), &w(""), &w("1"), &w("1")), q(1, 3));
        assert_eq!(matrix_element_direct(al, &w(""), &w(""), &w("1"), &w("1")), q(1, 3));
        assert_eq!(matrix_element_formula(al, &w("12"), &w("3"), &w("1"), &w("2")), qi(0));
        assert_eq!(matrix_element_formula(al, &w("12"), &w("3"), &w("1"), &w("1")), qi(1));
        assert_eq!(matrix_element_direct(al, &w("12"), &w("3"), &w("1"), &w("1")), qi(1));
        assert_eq!(matrix_element_direct(al, &w("1"), &w("1"), &w("1"), &w("1")), q(2, 3));
        assert_eq!(matrix_element_formula(al, &w("1"), &w("1"), &w("1"), &w("1")), q(2, 3));
    }

    #[test]
    fn frohlich_examples() {
        let al = a(2);
        let eng = FrohlichEngine::new(al, Variant::DTilde, 4, DEFAULT_MAX_DIM).unwrap();
        let v = eng.values(&w("1"), &w("2"), &[1.0, 0.5]).unwrap();
        assert!(v.iter().all(|x| x.exact_zero && x.value == 0.0));
        let one = eng.values(&w(""), &w(""), &[0.5]).unwrap();
        assert!((one[0].value - 1.0).abs() < 1e-12);
        let r = state_report(&eng, &[1.0, 0.5], 1, 2).unwrap();
        assert!(r.factors_through_expectation && r.normalised);
        for lv in &r.masses[0] {
            assert!((lv.sum - 1.0).abs() <= lv.error_bound + 1e-9, "{lv:?}");
        }
        assert!(frohlich(al, Variant::DKappa, &w(""), &w(""), 0.0, 2, DEFAULT_MAX_DIM).is_err());
    }

    #[test]
    fn dense_variant_is_normalised() {
        let eng = FrohlichEngine::new(a(2), Variant::DOracle, 3, DEFAULT_MAX_DIM).unwrap();
        let one = eng.values(&w(""), &w(""), &[0.5]).unwrap();
        assert!((one[0].value - 1.0).abs() < 1e-12);
        let m1 = eng.values(&w("1"), &w("1"), &[0.5]).unwrap()[0].value;
        let m2 = eng.values(&w("2"), &w("2"), &[0.5]).unwrap()[0].value;
        assert!((m1 + m2 - 1.0).abs() < 1e-9);
    }
}
