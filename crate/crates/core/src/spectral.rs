//! Floating-point spectra, heat traces, commutator singular values and
//! projection comparisons. Exact data stays rational until the last step.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::kernel::{apply_fock_kernel, apply_t, Mode};
use crate::operators::{assemble_d, assemble_d_with, b_column, diagonal_d_value, BlockOperator, BlockSource, Direct, GradeIndex, ReducedBasis, Variant};
use crate::sheets::{
    basis_on_sheet, block_basis, e_inner_with, e_norm_sq, expand, frame_weight, synthesize, BasisIndex, GroupoidVector,
    PrefixIntegrals, Sheet,
};
use crate::words::Alphabet;

/// Relative residual accepted for an eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Spectrum {
    pub grade: GradeIndex,
    /// Sorted ascending, with multiplicity.
    pub eigenvalues: Vec<f64>,
    /// `max ‖Av − λv‖ / ‖A‖` over computed pairs.
    pub residual: f64,
    pub norm: f64,
}

impl Spectrum {
    /// Group eigenvalues that agree to `tol` (relative to `1 + ‖A‖`).
    pub fn multiplicities(&self, tol: f64) -> Vec<(f64, usize)> {
        let eps = tol * (1.0 + self.norm);
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if (l - *v).abs() <= eps => *m += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }
}

fn symmetric_eigen(m: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>, f64, f64) {
    let d = m.len();
    if d == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0), 0.0, 0.0);
    }
    let a = DMatrix::from_fn(d, d, |i, j| 0.5 * (m[i][j] + m[j][i]));
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let eig = SymmetricEigen::new(a.clone());
    let mut residual: f64 = 0.0;
    for (j, &l) in eig.eigenvalues.iter().enumerate() {
        let v = eig.eigenvectors.column(j);
        let r = (&a * v - v * l).norm();
        residual = residual.max(r);
    }
    let rel = if norm > 0.0 { residual / norm } else { residual };
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors, rel, norm)
}

/// Spectrum of a block as an operator on its subspace.
pub fn spectrum(op: &BlockOperator) -> Spectrum {
    let red = op.reduce();
    let (mut ev, _, residual, norm) = symmetric_eigen(&red.orthonormal_f64());
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Spectrum { grade: op.grade, eigenvalues: ev, residual, norm }
}

/// Exact `(eigenvalue, multiplicity)` pairs of a diagonal variant on a block.
/// A sibling family of wavelets spans `N − 1` dimensions.
pub fn diagonal_spectrum(alphabet: Alphabet, variant: Variant, grade: GradeIndex) -> Result<Vec<(Q, Q)>> {
    if !variant.is_diagonal() {
        return Err(Error::UnknownOperator(format!("{variant} has no closed-form spectrum")));
    }
    let mut m: BTreeMap<Q, Q> = BTreeMap::new();
    for b in block_basis(alphabet, grade.n, grade.k)? {
        *m.entry(diagonal_d_value(alphabet, variant, &b)).or_insert_with(Q::zero) += frame_weight(alphabet, &b);
    }
    Ok(m.into_iter().collect())
}

/// Spectrum of a variant on one block: exact for diagonal variants, through
/// the eigensolver otherwise.
pub fn variant_spectrum(alphabet: Alphabet, variant: Variant, grade: GradeIndex, max_dim: usize) -> Result<Spectrum> {
    variant_spectrum_with(&Direct, alphabet, variant, grade, max_dim)
}

/// [`variant_spectrum`] with blocks from `source`.
pub fn variant_spectrum_with(source: &dyn BlockSource, alphabet: Alphabet, variant: Variant, grade: GradeIndex, max_dim: usize) -> Result<Spectrum> {
    if variant.is_diagonal() {
        let mut ev = Vec::new();
        for (l, m) in diagonal_spectrum(alphabet, variant, grade)? {
            let count = m.to_integer().to_string().parse::<usize>().expect("integer multiplicity");
            ev.extend(std::iter::repeat(exact::to_f64(&l)).take(count));
        }
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let norm = ev.iter().map(|v| v * v).sum::<f64>().sqrt();
        return Ok(Spectrum { grade, eigenvalues: ev, residual: 0.0, norm });
    }
    Ok(spectrum(&assemble_d_with(source, alphabet, variant, grade, max_dim)?))
}

/// Certified lower bound for `|λ|` on a block, where one is known.
pub fn lambda_min(alphabet: Alphabet, variant: Variant, grade: GradeIndex) -> Option<f64> {
    let n = grade.n.unsigned_abs() as f64;
    let k = grade.k as f64;
    let c = 1.0 - 1.0 / alphabet.size() as f64;
    match variant {
        Variant::DKappa => Some(n + k),
        Variant::DTilde => Some(n + c * k),
        _ => None,
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `Σ_{n+2k > max_grade} N^{n+2k} e^{−t λ_min(n,k)²}`, summed level by level
/// in log space until a ratio test bounds the remainder.
pub fn tail_bound(alphabet: Alphabet, variant: Variant, t: f64, max_grade: usize) -> f64 {
    let ln_n = (alphabet.size() as f64).ln();
    let level = |g: usize| -> Option<f64> {
        let mut xs = Vec::new();
        for k in 0..=g {
            let n = g as i64 - 2 * k as i64;
            if n < -(k as i64) {
                continue;
            }
            let l = lambda_min(alphabet, variant, GradeIndex { n, k })?;
            xs.push(g as f64 * ln_n - t * l * l);
        }
        Some(log_sum_exp(&xs))
    };
    let mut logs: Vec<f64> = Vec::new();
    let mut g = max_grade + 1;
    loop {
        let Some(cur) = level(g) else { return f64::INFINITY };
        logs.push(cur);
        if logs.len() >= 2 {
            let prev = logs[logs.len() - 2];
            let ratio = (cur - prev).exp();
            // λ_min grows linearly, so the log-ratio decreases from here on
            if ratio < 0.5 && cur < log_sum_exp(&logs) - 40.0 {
                let rem = cur + (ratio / (1.0 - ratio)).ln();
                logs.push(rem);
                return log_sum_exp(&logs).exp();
            }
        }
        g += 1;
        if g > max_grade + 100_000 {
            return f64::INFINITY;
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatTraceRow {
    pub t: f64,
    /// Partial trace after each grade `0..=max_grade`.
    pub by_grade: Vec<f64>,
    pub partial_trace: f64,
    pub tail_bound: f64,
    pub monotone: bool,
}

/// `Tr e^{−tD²}` over blocks with `n + 2k ≤ max_grade`.
pub fn heat_trace(alphabet: Alphabet, variant: Variant, ts: &[f64], max_grade: usize, max_dim: usize) -> Result<Vec<HeatTraceRow>> {
    heat_trace_with(&Direct, alphabet, variant, ts, max_grade, max_dim)
}

/// [`heat_trace`] with blocks from `source`.
pub fn heat_trace_with(
    source: &dyn BlockSource,
    alphabet: Alphabet,
    variant: Variant,
    ts: &[f64],
    max_grade: usize,
    max_dim: usize,
) -> Result<Vec<HeatTraceRow>> {
    if let Some(&t) = ts.iter().find(|&&t| !(t > 0.0)) {
        return Err(Error::NonPositiveT(t));
    }
    let grades = GradeIndex::all_up_to(max_grade);
    let spectra: Vec<Spectrum> = grades
        .par_iter()
        .map(|&g| variant_spectrum_with(source, alphabet, variant, g, max_dim))
        .collect::<Result<Vec<_>>>()?;
    Ok(ts
        .iter()
        .map(|&t| {
            let mut by_grade = vec![0.0; max_grade + 1];
            for s in &spectra {
                let v: f64 = s.eigenvalues.iter().map(|l| (-t * l * l).exp()).sum();
                by_grade[s.grade.total()] += v;
            }
            for g in 1..=max_grade {
                by_grade[g] += by_grade[g - 1];
            }
            let monotone = by_grade.windows(2).all(|w| w[1] >= w[0]);
            HeatTraceRow {
                t,
                partial_trace: by_grade[max_grade],
                tail_bound: tail_bound(alphabet, variant, t, max_grade),
                by_grade,
                monotone,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionRow {
    pub grade: GradeIndex,
    pub nonnegative: usize,
    pub fock_dim: usize,
    pub difference: i64,
    /// Counts confirmed by exact inertia.
    pub exact: bool,
}

/// Per block: number of eigenvalues `≥ 0` minus the Fock dimension.
pub fn projection_compare(alphabet: Alphabet, variant: Variant, max_grade: usize, exact_cap: usize, max_dim: usize) -> Result<Vec<ProjectionRow>> {
    GradeIndex::all_up_to(max_grade)
        .into_par_iter()
        .map(|g| {
            let fock_dim = if g.k == 0 { g.label_count(alphabet) } else { 0 };
            let (nonnegative, exact_flag) = if variant.is_diagonal() {
                let mut c = Q::zero();
                for (l, m) in diagonal_spectrum(alphabet, variant, g)? {
                    if !l.is_negative() {
                        c += m;
                    }
                }
                (c.to_integer().to_string().parse::<usize>().unwrap(), true)
            } else {
                let op = assemble_d(alphabet, variant, g, max_dim)?;
                if g.dimension(alphabet) <= exact_cap {
                    let i = op.inertia();
                    (i.positive + i.zero, true)
                } else {
                    let s = spectrum(&op);
                    let eps = 1e-9 * (1.0 + s.norm);
                    (s.eigenvalues.iter().filter(|&&l| l >= -eps).count(), false)
                }
            };
            Ok(ProjectionRow { grade: g, nonnegative, fock_dim, difference: nonnegative as i64 - fock_dim as i64, exact: exact_flag })
        })
        .collect()
}

/// Orthogonal basis of every block up to a grade, with exact projections.
pub struct Truncation {
    pub alphabet: Alphabet,
    pub labels: Vec<BasisIndex>,
    label_index: HashMap<BasisIndex, usize>,
    by_sheet: HashMap<Sheet, Vec<usize>>,
    /// Each basis vector as `(label, coefficient)` pairs.
    pub vectors: Vec<Vec<(usize, Q)>>,
    pub norms: Vec<Q>,
    pub grades: Vec<GradeIndex>,
    by_label: Vec<Vec<(usize, Q)>>,
}

impl Truncation {
    pub fn new(alphabet: Alphabet, grades: &[GradeIndex]) -> Result<Self> {
        let mut labels = Vec::new();
        let mut vectors = Vec::new();
        let mut norms = Vec::new();
        let mut vgrades = Vec::new();
        for &g in grades {
            let basis = block_basis(alphabet, g.n, g.k)?;
            let off = labels.len();
            let red = ReducedBasis::new(alphabet, &basis);
            for (v, nrm) in red.vectors.into_iter().zip(red.norms) {
                vectors.push(v.into_iter().map(|(i, c)| (i + off, c)).collect::<Vec<_>>());
                norms.push(nrm);
                vgrades.push(g);
            }
            labels.extend(basis);
        }
        let label_index = labels.iter().cloned().enumerate().map(|(i, b)| (b, i)).collect();
        let mut by_sheet: HashMap<Sheet, Vec<usize>> = HashMap::new();
        for (i, b) in labels.iter().enumerate() {
            by_sheet.entry(b.sheet()).or_default().push(i);
        }
        let mut by_label = vec![Vec::new(); labels.len()];
        for (p, v) in vectors.iter().enumerate() {
            for (a, c) in v {
                by_label[*a].push((p, c.clone()));
            }
        }
        Ok(Truncation { alphabet, labels, label_index, by_sheet, vectors, norms, grades: vgrades, by_label })
    }

    pub fn up_to(alphabet: Alphabet, max_grade: usize) -> Result<Self> {
        Self::new(alphabet, &GradeIndex::all_up_to(max_grade))
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn label(&self, b: &BasisIndex) -> Option<usize> {
        self.label_index.get(b).copied()
    }

    pub fn vector(&self, p: usize) -> GroupoidVector {
        synthesize(self.alphabet, self.vectors[p].iter().map(|(a, c)| (&self.labels[*a], c)))
    }

    /// Exact `⟨u_p, v⟩` for every basis vector `u_p` that meets `v`.
    pub fn project(&self, v: &GroupoidVector) -> BTreeMap<usize, Q> {
        let mut out: BTreeMap<usize, Q> = BTreeMap::new();
        for (s, g) in v.parts() {
            let Some(idx) = self.by_sheet.get(s) else { continue };
            let ints = PrefixIntegrals::new(g);
            for &a in idx {
                let ip = e_inner_with(self.alphabet, &self.labels[a], Some(&ints));
                if ip.is_zero() {
                    continue;
                }
                for (p, c) in &self.by_label[a] {
                    *out.entry(*p).or_insert_with(Q::zero) += c * &ip;
                }
            }
        }
        out.retain(|_, v| !v.is_zero());
        out
    }

    /// Orthonormal-basis matrix of `f` compressed to the truncation: entry
    /// `(p, q)` is `⟨u_p, f(u_q)⟩ / (‖u_p‖ ‖u_q‖)`. Exact before the final scaling.
    pub fn matrix<F>(&self, f: F) -> Vec<BTreeMap<usize, Q>>
    where
        F: Fn(&GroupoidVector) -> GroupoidVector + Sync,
    {
        (0..self.dim()).into_par_iter().map(|q| self.project(&f(&self.vector(q)))).collect()
    }

    pub fn scale_f64(&self, cols: &[BTreeMap<usize, Q>]) -> Vec<Vec<(usize, f64)>> {
        let s: Vec<f64> = self.norms.iter().map(|v| exact::to_f64(v).sqrt()).collect();
        cols.iter()
            .enumerate()
            .map(|(q, c)| c.iter().map(|(p, v)| (*p, exact::to_f64(v) / (s[*p] * s[q]))).collect())
            .collect()
    }
}

/// `D_variant v` for an exact vector, through its frame expansion.
pub fn apply_d(variant: Variant, v: &GroupoidVector) -> Result<GroupoidVector> {
    let alphabet = v.alphabet();
    let ex = expand(v)?;
    let mut out = GroupoidVector::zero(alphabet);
    let mut diag_terms: Vec<(BasisIndex, Q)> = Vec::new();
    match variant {
        Variant::DKappa | Variant::DTilde => {
            for (b, c) in &ex.coords {
                diag_terms.push((b.clone(), c * diagonal_d_value(alphabet, variant, b)));
            }
        }
        Variant::DPaper => {
            for (b, c) in &ex.coords {
                let sign = if b.is_fock() { 1 } else { -1 };
                let n = alphabet.size() as i64;
                let t = exact::qi(b.k() as i64) - exact::q(b.kappa_v() as i64, n) + exact::q(b.is_wavelet() as i64, n - 1);
                diag_terms.push((b.clone(), c * (exact::qi(sign * b.n().abs()) - t)));
                for (tgt, bc) in b_column(alphabet, b) {
                    diag_terms.push((tgt, c * bc));
                }
            }
        }
        Variant::DOracle => {
            for (b, c) in &ex.coords {
                let sign = if b.is_fock() { 1 } else { -1 };
                diag_terms.push((b.clone(), c * exact::qi(sign * b.n().abs())));
            }
            out = out.sub(&apply_t(v, Mode::Sphere));
        }
    }
    Ok(out.add(&synthesize(alphabet, diag_terms.iter().map(|(b, c)| (b, c)))))
}

/// `P_F`.
pub fn apply_phase_projection(v: &GroupoidVector) -> GroupoidVector {
    apply_fock_kernel(v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DecayLaw {
    /// Only finitely many non-zero singular values at every computed grade.
    FiniteRank { rank: usize },
    /// `s_j ≈ C r^j`.
    Geometric { rate: f64, constant: f64 },
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SummabilityProfile {
    pub max_grade: usize,
    pub singular_values: Vec<f64>,
    pub law: DecayLaw,
    /// `(p, Σ s_j^p)`.
    pub schatten: Vec<(f64, f64)>,
}

/// Which operator the commutator is taken with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommutatorWith {
    Phase,
    Dirac(Variant),
}

fn singular_values(cols: &[Vec<(usize, f64)>], rows: usize) -> Vec<f64> {
    let live_cols: Vec<usize> = (0..cols.len()).filter(|&q| cols[q].iter().any(|(_, v)| *v != 0.0)).collect();
    let mut live_rows: Vec<usize> = live_cols.iter().flat_map(|&q| cols[q].iter().map(|(p, _)| *p)).collect();
    live_rows.sort_unstable();
    live_rows.dedup();
    let _ = rows;
    if live_cols.is_empty() {
        return Vec::new();
    }
    let rpos: HashMap<usize, usize> = live_rows.iter().enumerate().map(|(i, &r)| (r, i)).collect();
    let mut m = DMatrix::<f64>::zeros(live_rows.len(), live_cols.len());
    for (j, &q) in live_cols.iter().enumerate() {
        for (p, v) in &cols[q] {
            m[(rpos[p], j)] = *v;
        }
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Least-squares fit of `log s_j` against `j` over the non-negligible values.
pub fn fit_decay(s: &[f64], finite_rank_hint: bool) -> DecayLaw {
    let top = s.first().copied().unwrap_or(0.0);
    let live: Vec<f64> = s.iter().copied().filter(|&v| v > 1e-12 * top.max(1e-300)).collect();
    if live.is_empty() {
        return DecayLaw::None;
    }
    if finite_rank_hint {
        return DecayLaw::FiniteRank { rank: live.len() };
    }
    if live.len() == 1 {
        return DecayLaw::Geometric { rate: 0.0, constant: live[0] };
    }
    let n = live.len() as f64;
    let xs: Vec<f64> = (0..live.len()).map(|j| j as f64).collect();
    let ys: Vec<f64> = live.iter().map(|v| v.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    DecayLaw::Geometric { rate: slope.exp(), constant: (my - slope * mx).exp() }
}

/// Singular values of `[F, S_ρ S_σ*]` compressed to grades `≤ max_grade`,
/// plus the count at `max_grade − 2` used to decide finite rank.
pub fn commutator_svd(
    alphabet: Alphabet,
    with: CommutatorWith,
    rho: &crate::words::Word,
    sigma: &crate::words::Word,
    max_grade: usize,
    ps: &[f64],
) -> Result<SummabilityProfile> {
    let s = commutator_singular_values(alphabet, with, rho, sigma, max_grade)?;
    let finite = if max_grade >= 2 {
        let lower = commutator_singular_values(alphabet, with, rho, sigma, max_grade - 2)?;
        let rank = |v: &[f64]| v.iter().filter(|&&x| x > 1e-12).count();
        rank(&lower) == rank(&s)
    } else {
        false
    };
    let schatten = ps.iter().map(|&p| (p, s.iter().map(|v| v.powf(p)).sum())).collect();
    Ok(SummabilityProfile { max_grade, law: fit_decay(&s, finite), singular_values: s, schatten })
}

pub fn commutator_singular_values(
    alphabet: Alphabet,
    with: CommutatorWith,
    rho: &crate::words::Word,
    sigma: &crate::words::Word,
    max_grade: usize,
) -> Result<Vec<f64>> {
    let tr = Truncation::up_to(alphabet, max_grade)?;
    let apply_f = |v: &GroupoidVector| -> GroupoidVector {
        match with {
            CommutatorWith::Phase => apply_phase_projection(v),
            CommutatorWith::Dirac(var) => apply_d(var, v).expect("finite expansion"),
        }
    };
    let x = |v: &GroupoidVector| crate::sheets::apply_word_pair(rho, sigma, v);
    let cols = tr.matrix(|u| apply_f(&x(u)).sub(&x(&apply_f(u))));
    Ok(singular_values(&tr.scale_f64(&cols), tr.dim()))
}

/// Exact `⟨ě_b, X ě_b⟩` summed with frame weights over a set of labels:
/// the trace of `X` compressed to their span.
pub fn frame_trace<F>(alphabet: Alphabet, labels: &[BasisIndex], x: F) -> Q
where
    F: Fn(&GroupoidVector) -> GroupoidVector,
{
    let mut acc = Q::zero();
    for b in labels {
        let e = crate::sheets::e_vector(alphabet, &b.mu, &b.nu);
        let xe = x(&e.v);
        let ip = crate::sheets::inner(&e.v, &xe);
        if !ip.is_zero() {
            acc += ip * frame_weight(alphabet, b) / e_norm_sq(alphabet, b);
        }
    }
    acc
}

/// Labels of `basis_on_sheet` for every sheet, exposed for state computations.
pub fn labels_on(alphabet: Alphabet, sheet: &Sheet, k: usize) -> Vec<BasisIndex> {
    basis_on_sheet(alphabet, sheet, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};
    use crate::operators::{build_block, OpName, DEFAULT_MAX_DIM};
    use crate::words::Word;

    fn a(n: u32) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn g(n: i64, k: usize) -> GradeIndex {
        GradeIndex::new(n, k).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        let s = variant_spectrum(a(2), Variant::DKappa, g(1, 0), DEFAULT_MAX_DIM).unwrap();
        assert_eq!(s.eigenvalues, vec![1.0, 1.0]);
        let t = build_block(a(3), OpName::TOracle, g(0, 1), DEFAULT_MAX_DIM).unwrap();
        let s = spectrum(&t);
        assert!(s.residual < RESIDUAL_TOL);
        assert_eq!(s.eigenvalues.len(), 8);
        let id = build_block(a(3), OpName::PF, g(2, 0), DEFAULT_MAX_DIM).unwrap();
        assert!(spectrum(&id).eigenvalues.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn diagonal_spectrum_counts_dimension() {
        for gr in GradeIndex::all_up_to(4) {
            let d = diagonal_spectrum(a(3), Variant::DTilde, gr).unwrap();
            let total: Q = d.iter().map(|(_, m)| m.clone()).sum();
            assert_eq!(total, qi(gr.dimension(a(3)) as i64), "{gr}");
        }
        let d = diagonal_spectrum(a(3), Variant::DTilde, g(0, 0)).unwrap();
        assert_eq!(d, vec![(qi(0), qi(1))]);
    }

    #[test]
    fn projection_compare_examples() {
        for v in [Variant::DTilde, Variant::DKappa] {
            let rows = projection_compare(a(3), v, 4, 729, DEFAULT_MAX_DIM).unwrap();
            assert!(rows.iter().all(|r| r.difference == 0));
        }
        let rows = projection_compare(a(3), Variant::DPaper, 2, 729, DEFAULT_MAX_DIM).unwrap();
        let r = rows.iter().find(|r| r.grade == g(0, 1)).unwrap();
        assert!(r.difference > 0);
    }

    #[test]
    fn heat_trace_block_contribution() {
        let rows = heat_trace(a(2), Variant::DKappa, &[0.5], 3, DEFAULT_MAX_DIM).unwrap();
        let s = variant_spectrum(a(2), Variant::DKappa, g(2, 0), DEFAULT_MAX_DIM).unwrap();
        let v: f64 = s.eigenvalues.iter().map(|l| (-0.5 * l * l).exp()).sum();
        assert!((v - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
        assert!(rows[0].monotone);
        assert!(heat_trace(a(2), Variant::DKappa, &[0.0], 3, DEFAULT_MAX_DIM).is_err());
        let b4 = tail_bound(a(2), Variant::DKappa, 1.0, 4);
        let b6 = tail_bound(a(2), Variant::DKappa, 1.0, 6);
        assert!(b6 < b4);
    }

    #[test]
    fn phase_commutator_with_s1() {
        let w = |s: &str| Word::parse(s).unwrap();
        let sv = commutator_singular_values(a(3), CommutatorWith::Phase, &w("1"), &w(""), 3).unwrap();
        assert_eq!(sv.len(), 1);
        assert!((sv[0] - 3f64.powf(-0.5)).abs() < 1e-12);
        let tr = Truncation::up_to(a(3), 2).unwrap();
        let e = crate::sheets::e_vector(a(3), &w(""), &w("1")).v;
        let img = apply_phase_projection(&crate::sheets::gen_action(1, &e, false));
        assert_eq!(img, crate::sheets::e_vector(a(3), &w(""), &w("")).v.scale(&q(1, 3)));
        assert!(tr.dim() > 0);
    }

    #[test]
    fn apply_d_matches_blocks() {
        let al = a(3);
        let w = |s: &str| Word::parse(s).unwrap();
        let e = crate::sheets::e_vector(al, &w("1"), &w("2")).v;
        for v in Variant::ALL {
            let d = assemble_d(al, v, g(0, 1), DEFAULT_MAX_DIM).unwrap();
            let i = d.basis.iter().position(|b| *b == BasisIndex::parse("1", "2").unwrap()).unwrap();
            assert_eq!(apply_d(v, &e).unwrap(), d.image(i), "{v}");
        }
    }
}
