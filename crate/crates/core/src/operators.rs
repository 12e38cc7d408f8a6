//! Exact block matrices on `H_{n,k}`.
//!
//! Column `b` of a [`BlockOperator`] holds the canonical frame coefficients
//! of `A ě_b`. Inside a block the effective weight `⟨ě,ě⟩ / frame_weight` is
//! `N^{-k}` for every label, so entries are `N^k ⟨ě_a, A ě_b⟩` and the matrix
//! of a self-adjoint operator is symmetric.
//!
//! Spectral data needs an orthogonal basis. [`BlockOperator::reduce`] keeps
//! the non-wavelet labels and replaces each sibling family `ě_{pi,qi}` by the
//! `N − 1` Helmert combinations `Σ_{i≤j} ě_i − j ě_{j+1}`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::kernel::{apply_t, Mode};
use crate::linalg;
use crate::sheets::{block_basis, e_inner_with, e_norm_sq, e_vector, frame_weight, BasisIndex, GroupoidVector, PrefixIntegrals, Sheet};
use crate::words::{common_prefix_len, strip, Alphabet, Word};

/// Default dimension guard for materialised blocks.
pub const DEFAULT_MAX_DIM: usize = 6561;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GradeIndex {
    pub n: i64,
    pub k: usize,
}

impl GradeIndex {
    pub fn new(n: i64, k: usize) -> Result<Self> {
        if n < -(k as i64) {
            return Err(Error::Grade { n, k });
        }
        Ok(GradeIndex { n, k })
    }

    /// `|μ| + |ν|` for the labels of the block.
    pub fn total(&self) -> usize {
        (self.n + 2 * self.k as i64) as usize
    }

    /// Number of labels, `N^{n+2k}`.
    pub fn label_count(&self, alphabet: Alphabet) -> usize {
        (alphabet.size() as usize).pow(self.total() as u32)
    }

    /// Dimension of the block as a subspace.
    pub fn dimension(&self, alphabet: Alphabet) -> usize {
        let labels = self.label_count(alphabet);
        if self.k >= 1 && self.total() >= 2 && self.n + self.k as i64 >= 1 {
            labels - labels / (alphabet.size() as usize).pow(2)
        } else {
            labels
        }
    }

    /// All blocks with `n + 2k ≤ max_total`, ordered by `(total, k, n)`.
    pub fn all_up_to(max_total: usize) -> Vec<GradeIndex> {
        let mut out = Vec::new();
        for t in 0..=max_total as i64 {
            for k in 0..=t as usize {
                let n = t - 2 * k as i64;
                if n >= -(k as i64) {
                    out.push(GradeIndex { n, k });
                }
            }
        }
        out
    }
}

impl fmt::Display for GradeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpName {
    Kappa,
    KappaG,
    C,
    AbsC,
    Q,
    PF,
    B,
    TTilde,
    TPaper,
    TOracle,
}

impl OpName {
    pub const ALL: [OpName; 10] = [
        OpName::Kappa,
        OpName::KappaG,
        OpName::C,
        OpName::AbsC,
        OpName::Q,
        OpName::PF,
        OpName::B,
        OpName::TTilde,
        OpName::TPaper,
        OpName::TOracle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OpName::Kappa => "kappa",
            OpName::KappaG => "kappa_g",
            OpName::C => "c",
            OpName::AbsC => "abs_c",
            OpName::Q => "Q",
            OpName::PF => "P_F",
            OpName::B => "B",
            OpName::TTilde => "T_tilde",
            OpName::TPaper => "T_paper",
            OpName::TOracle => "T_oracle",
        }
    }

    pub fn is_diagonal(self) -> bool {
        !matches!(self, OpName::B | OpName::TPaper | OpName::TOracle)
    }
}

impl FromStr for OpName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OpName::ALL.into_iter().find(|o| o.as_str() == s).ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

impl fmt::Display for OpName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    DKappa,
    DTilde,
    DPaper,
    DOracle,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::DKappa, Variant::DTilde, Variant::DPaper, Variant::DOracle];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::DKappa => "d_kappa",
            Variant::DTilde => "d_tilde",
            Variant::DPaper => "d_paper",
            Variant::DOracle => "d_oracle",
        }
    }

    /// Variants whose blocks are diagonal in the `ě` labels.
    pub fn is_diagonal(self) -> bool {
        matches!(self, Variant::DKappa | Variant::DTilde)
    }

    fn t_part(self) -> OpName {
        match self {
            Variant::DKappa => OpName::Kappa,
            Variant::DTilde => OpName::TTilde,
            Variant::DPaper => OpName::TPaper,
            Variant::DOracle => OpName::TOracle,
        }
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL.into_iter().find(|v| v.as_str() == s).ok_or_else(|| Error::UnknownOperator(s.to_string()))
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact block; columns are sparse lists of `(row, value)` sorted by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockOperator {
    pub alphabet: Alphabet,
    pub grade: GradeIndex,
    pub basis: Vec<BasisIndex>,
    pub columns: Vec<Vec<(usize, Q)>>,
    pub norm_sq_diag: Vec<Q>,
}

impl BlockOperator {
    fn empty(alphabet: Alphabet, grade: GradeIndex, basis: Vec<BasisIndex>) -> Self {
        let norm_sq_diag = basis.iter().map(|b| e_norm_sq(alphabet, b)).collect();
        let columns = vec![Vec::new(); basis.len()];
        BlockOperator { alphabet, grade, basis, columns, norm_sq_diag }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn get(&self, a: usize, b: usize) -> Q {
        match self.columns[b].binary_search_by_key(&a, |(r, _)| *r) {
            Ok(i) => self.columns[b][i].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn diagonal(&self) -> Vec<Q> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        self.columns.iter().enumerate().all(|(b, col)| col.iter().all(|(a, _)| *a == b))
    }

    pub fn dense(&self) -> Vec<Vec<Q>> {
        let d = self.dim();
        let mut m = vec![vec![Q::zero(); d]; d];
        for (b, col) in self.columns.iter().enumerate() {
            for (a, v) in col {
                m[*a][b] = v.clone();
            }
        }
        m
    }

    /// Effective weight `⟨ě,ě⟩ / frame_weight` of each label.
    pub fn effective_weights(&self) -> Vec<Q> {
        self.basis
            .iter()
            .zip(&self.norm_sq_diag)
            .map(|(b, ns)| ns / frame_weight(self.alphabet, b))
            .collect()
    }

    /// `M[a][b] ω_a = M[b][a] ω_b` for the effective weights `ω`.
    pub fn is_gram_symmetric(&self) -> bool {
        let w = self.effective_weights();
        self.columns.iter().enumerate().all(|(b, col)| col.iter().all(|(a, v)| v * &w[*a] == self.get(b, *a) * &w[b]))
    }

    /// The literal relation `M[a][b] ⟨ě_b,ě_b⟩ = M[b][a] ⟨ě_a,ě_a⟩`.
    pub fn is_norm_sq_symmetric(&self) -> bool {
        let w = &self.norm_sq_diag;
        self.columns.iter().enumerate().all(|(b, col)| col.iter().all(|(a, v)| v * &w[b] == self.get(b, *a) * &w[*a]))
    }

    /// Rebuilds a block from stored columns. The basis must be the block's
    /// canonical label order and every column sorted by row.
    pub fn from_columns(alphabet: Alphabet, grade: GradeIndex, basis: Vec<BasisIndex>, columns: Vec<Vec<(usize, Q)>>) -> Result<Self> {
        if basis != block_basis(alphabet, grade.n, grade.k)? {
            return Err(Error::Invalid(format!("basis does not match block ({},{})", grade.n, grade.k)));
        }
        if columns.len() != basis.len() {
            return Err(Error::Invalid("column count differs from basis".into()));
        }
        let ok = columns.iter().all(|c| c.windows(2).all(|w| w[0].0 < w[1].0) && c.iter().all(|(r, _)| *r < basis.len()));
        if !ok {
            return Err(Error::Invalid("columns must be sorted and in range".into()));
        }
        let mut op = Self::empty(alphabet, grade, basis);
        op.columns = columns;
        Ok(op)
    }

    fn from_dense_columns(alphabet: Alphabet, grade: GradeIndex, basis: Vec<BasisIndex>, cols: Vec<BTreeMap<usize, Q>>) -> Self {
        let mut op = Self::empty(alphabet, grade, basis);
        op.columns = cols.into_iter().map(|c| c.into_iter().filter(|(_, v)| !v.is_zero()).collect()).collect();
        op
    }

    pub fn combine(&self, other: &Self, a: &Q, b: &Q) -> Self {
        assert_eq!(self.grade, other.grade);
        let cols = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(x, y)| {
                let mut m: BTreeMap<usize, Q> = BTreeMap::new();
                for (r, v) in x {
                    *m.entry(*r).or_insert_with(Q::zero) += v * a;
                }
                for (r, v) in y {
                    *m.entry(*r).or_insert_with(Q::zero) += v * b;
                }
                m
            })
            .collect();
        Self::from_dense_columns(self.alphabet, self.grade, self.basis.clone(), cols)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, &Q::one(), &Q::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, &Q::one(), &-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        self.combine(self, c, &Q::zero())
    }

    /// Matrix product in coordinates. Meaningful for operators that preserve
    /// the block, since the coordinate map is a left inverse of synthesis there.
    pub fn compose(&self, other: &Self) -> Self {
        let cols = other
            .columns
            .iter()
            .map(|col| {
                let mut m: BTreeMap<usize, Q> = BTreeMap::new();
                for (j, v) in col {
                    for (i, u) in &self.columns[*j] {
                        *m.entry(*i).or_insert_with(Q::zero) += u * v;
                    }
                }
                m
            })
            .collect();
        Self::from_dense_columns(self.alphabet, self.grade, self.basis.clone(), cols)
    }

    /// Commutator `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.compose(other).sub(&other.compose(self))
    }

    /// Exact image `A ě_b` as a vector.
    pub fn image(&self, b: usize) -> GroupoidVector {
        crate::sheets::synthesize(self.alphabet, self.columns[b].iter().map(|(a, v)| (&self.basis[*a], v)))
    }

    /// Exact inertia of the block on its span.
    ///
    /// The reduced form is conjugated first by an unnormalised Haar transform
    /// over the `ν`-prefix tree of each sheet. The transform is invertible, so
    /// the inertia is unchanged, and blocks that are symmetric under the tree
    /// come out nearly diagonal, which keeps the rational elimination small.
    pub fn inertia(&self) -> linalg::Inertia {
        let red = self.reduce();
        let mut by_sheet: BTreeMap<Sheet, Vec<usize>> = BTreeMap::new();
        for (p, &l) in red.labels.iter().enumerate() {
            by_sheet.entry(self.basis[l].sheet()).or_default().push(p);
        }
        let mut cols: Vec<BTreeMap<usize, i64>> = Vec::with_capacity(red.dim());
        for members in by_sheet.into_values() {
            let paths: Vec<&[u8]> = members.iter().map(|&p| self.basis[red.labels[p]].nu.letters()).collect();
            let sum = haar_node(&members, &paths, 0, &mut cols);
            cols.push(sum);
        }
        let p: Vec<Vec<(usize, Q)>> =
            cols.into_iter().map(|c| c.into_iter().filter(|(_, v)| *v != 0).map(|(i, v)| (i, exact::qi(v))).collect()).collect();
        linalg::inertia(&congruence(&red.z, &p))
    }

    /// Congruent form on an orthogonal basis of the block.
    pub fn reduce(&self) -> ReducedBlock {
        let basis = ReducedBasis::new(self.alphabet, &self.basis);
        let scale = exact::pow(self.alphabet.size(), -(self.grade.k as i64));
        // Y = N^{-k} M is the Gram-type matrix ⟨ě_a, A ě_b⟩
        let y_cols: Vec<Vec<(usize, Q)>> =
            self.columns.iter().map(|c| c.iter().map(|(a, v)| (*a, v * &scale)).collect()).collect();
        let r = basis.vectors.len();
        // Y H column by column, then Hᵀ (Y H)
        let yh: Vec<BTreeMap<usize, Q>> = basis
            .vectors
            .iter()
            .map(|h| {
                let mut m: BTreeMap<usize, Q> = BTreeMap::new();
                for (j, c) in h {
                    for (i, v) in &y_cols[*j] {
                        *m.entry(*i).or_insert_with(Q::zero) += v * c;
                    }
                }
                m
            })
            .collect();
        let z: Vec<Vec<Q>> = (0..r)
            .into_par_iter()
            .map(|p| {
                (0..r)
                    .map(|q| {
                        let mut acc = Q::zero();
                        for (i, c) in &basis.vectors[p] {
                            if let Some(v) = yh[q].get(i) {
                                acc += c * v;
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        ReducedBlock { z, norms: basis.norms, labels: basis.labels }
    }
}

/// Orthogonal basis of a block: each vector is a sparse combination of labels.
#[derive(Debug, Clone)]
pub struct ReducedBasis {
    pub vectors: Vec<Vec<(usize, Q)>>,
    pub norms: Vec<Q>,
    /// Label index the vector is attached to (its first label).
    pub labels: Vec<usize>,
}

impl ReducedBasis {
    pub fn new(alphabet: Alphabet, basis: &[BasisIndex]) -> Self {
        let mut vectors = Vec::new();
        let mut norms = Vec::new();
        let mut labels = Vec::new();
        let mut groups: BTreeMap<(Word, Word), Vec<usize>> = BTreeMap::new();
        for (i, b) in basis.iter().enumerate() {
            match b.parent() {
                Some(p) => groups.entry(p).or_default().push(i),
                None => {
                    vectors.push(vec![(i, Q::one())]);
                    norms.push(e_norm_sq(alphabet, b));
                    labels.push(i);
                }
            }
        }
        for (_, members) in groups {
            let s = exact::pow(alphabet.size(), -(basis[members[0]].k() as i64));
            for j in 1..members.len() {
                let mut v: Vec<(usize, Q)> = members[..j].iter().map(|&i| (i, Q::one())).collect();
                v.push((members[j], exact::qi(-(j as i64))));
                vectors.push(v);
                norms.push(&s * exact::qi((j * (j + 1)) as i64));
                labels.push(members[0]);
            }
        }
        ReducedBasis { vectors, norms, labels }
    }
}

/// Pushes the Helmert differences of the subtree below `depth` into `out` and
/// returns the subtree sum.
fn haar_node(members: &[usize], paths: &[&[u8]], depth: usize, out: &mut Vec<BTreeMap<usize, i64>>) -> BTreeMap<usize, i64> {
    if members.len() == 1 {
        return BTreeMap::from([(members[0], 1)]);
    }
    // children: one per next letter, and one per member whose path ends here
    let mut groups: BTreeMap<u8, (Vec<usize>, Vec<&[u8]>)> = BTreeMap::new();
    let mut sums = Vec::new();
    for (&m, &path) in members.iter().zip(paths) {
        match path.get(depth) {
            Some(&a) => {
                let g = groups.entry(a).or_default();
                g.0.push(m);
                g.1.push(path);
            }
            None => sums.push(BTreeMap::from([(m, 1)])),
        }
    }
    for (ms, ps) in groups.into_values() {
        sums.push(haar_node(&ms, &ps, depth + 1, out));
    }
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for (j, s) in sums.iter().enumerate() {
        if j > 0 {
            // Σ_{t<j} s_t − j·s_j
            let mut d = acc.clone();
            for (i, v) in s {
                *d.entry(*i).or_insert(0) -= j as i64 * v;
            }
            out.push(d);
        }
        for (i, v) in s {
            *acc.entry(*i).or_insert(0) += v;
        }
    }
    acc
}

/// `Pᵀ Z P` for sparse columns `P`.
fn congruence(z: &[Vec<Q>], p: &[Vec<(usize, Q)>]) -> Vec<Vec<Q>> {
    let n = z.len();
    let zp: Vec<Vec<Q>> = p
        .par_iter()
        .map(|col| {
            let mut out = vec![Q::zero(); n];
            for (i, c) in col {
                for (r, o) in out.iter_mut().enumerate() {
                    if !z[r][*i].is_zero() {
                        *o += c * &z[r][*i];
                    }
                }
            }
            out
        })
        .collect();
    (0..p.len())
        .into_par_iter()
        .map(|a| {
            (0..p.len())
                .map(|b| {
                    let mut acc = Q::zero();
                    for (i, c) in &p[a] {
                        if !zp[b][*i].is_zero() {
                            acc += c * &zp[b][*i];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `z[p][q] = ⟨u_p, A u_q⟩` on an orthogonal basis `u` with `‖u_p‖² = norms[p]`.
/// The orthonormal matrix is `z[p][q] / √(norms[p] norms[q])`; `z` is congruent to it.
#[derive(Debug, Clone)]
pub struct ReducedBlock {
    pub z: Vec<Vec<Q>>,
    pub norms: Vec<Q>,
    pub labels: Vec<usize>,
}

impl ReducedBlock {
    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn orthonormal_f64(&self) -> Vec<Vec<f64>> {
        let s: Vec<f64> = self.norms.iter().map(|v| exact::to_f64(v).sqrt()).collect();
        self.z
            .iter()
            .enumerate()
            .map(|(p, row)| row.iter().enumerate().map(|(q, v)| exact::to_f64(v) / (s[p] * s[q])).collect())
            .collect()
    }
}

fn check_cap(alphabet: Alphabet, grade: GradeIndex, max_dim: usize) -> Result<()> {
    let dim = grade.label_count(alphabet);
    if dim > max_dim {
        return Err(Error::Cap { dim, cap: max_dim });
    }
    Ok(())
}

fn diag_value(alphabet: Alphabet, name: OpName, b: &BasisIndex) -> Q {
    let n = alphabet.size() as i64;
    let k = b.k() as i64;
    let kv = b.kappa_v() as i64;
    match name {
        OpName::Kappa => exact::qi(k),
        OpName::KappaG => exact::qi(kv),
        OpName::C => exact::qi(b.n()),
        OpName::AbsC => exact::qi(b.n().abs()),
        OpName::Q => exact::qi(b.is_wavelet() as i64),
        OpName::PF => exact::qi(b.is_fock() as i64),
        OpName::TTilde => exact::qi(k) - exact::q(kv, n),
        _ => unreachable!("not diagonal"),
    }
}

/// Column `B ě_b` as `(target label, coefficient)`.
pub fn b_column(alphabet: Alphabet, b: &BasisIndex) -> Vec<(BasisIndex, Q)> {
    if b.is_wavelet() || b.nu.is_empty() {
        return Vec::new();
    }
    let n = alphabet.size();
    let pre = exact::q(n as i64, n as i64 - 1);
    let k = b.nu.len();
    let mut out = Vec::new();
    for gamma in alphabet.words(k - 1) {
        let l = common_prefix_len(&gamma, &b.nu) as i64;
        let c = &pre * exact::pow(n, l - k as i64);
        for m in alphabet.letters() {
            if Some(m) == b.mu.last() {
                continue;
            }
            out.push((BasisIndex::new(b.mu.clone(), gamma.push(m)), c.clone()));
        }
    }
    out
}

/// Canonical coordinates of `f` on the labels of `basis` that share a sheet with `f`.
fn sparse_coords(alphabet: Alphabet, f: &GroupoidVector, by_sheet: &HashMap<Sheet, Vec<usize>>, basis: &[BasisIndex]) -> BTreeMap<usize, Q> {
    let mut out = BTreeMap::new();
    for (s, g) in f.parts() {
        let Some(idx) = by_sheet.get(s) else { continue };
        let ints = PrefixIntegrals::new(g);
        for &i in idx {
            let b = &basis[i];
            let ip = e_inner_with(alphabet, b, Some(&ints));
            if !ip.is_zero() {
                out.insert(i, ip * frame_weight(alphabet, b) / e_norm_sq(alphabet, b));
            }
        }
    }
    out
}

/// Exact block of a named operator.
pub fn build_block(alphabet: Alphabet, name: OpName, grade: GradeIndex, max_dim: usize) -> Result<BlockOperator> {
    check_cap(alphabet, grade, max_dim)?;
    let basis = block_basis(alphabet, grade.n, grade.k)?;
    let index: HashMap<&BasisIndex, usize> = basis.iter().enumerate().map(|(i, b)| (b, i)).collect();
    let cols: Vec<BTreeMap<usize, Q>> = match name {
        n if n.is_diagonal() => basis
            .iter()
            .enumerate()
            .map(|(i, b)| BTreeMap::from([(i, diag_value(alphabet, n, b))]))
            .collect(),
        OpName::B => basis
            .iter()
            .map(|b| b_column(alphabet, b).into_iter().map(|(t, c)| (index[&t], c)).collect())
            .collect(),
        OpName::TPaper => {
            let n = alphabet.size() as i64;
            basis
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let mut col: BTreeMap<usize, Q> = b_column(alphabet, b).into_iter().map(|(t, c)| (index[&t], -c)).collect();
                    let d = exact::qi(b.k() as i64) - exact::q(b.kappa_v() as i64, n)
                        + exact::q(b.is_wavelet() as i64, n - 1);
                    *col.entry(i).or_insert_with(Q::zero) += d;
                    col
                })
                .collect()
        }
        OpName::TOracle => {
            let mut by_sheet: HashMap<Sheet, Vec<usize>> = HashMap::new();
            for (i, b) in basis.iter().enumerate() {
                by_sheet.entry(b.sheet()).or_default().push(i);
            }
            basis
                .par_iter()
                .map(|b| {
                    let v = e_vector(alphabet, &b.mu, &b.nu).v;
                    let tv = apply_t(&v, Mode::Sphere);
                    sparse_coords(alphabet, &tv, &by_sheet, &basis)
                })
                .collect()
        }
        _ => unreachable!(),
    };
    Ok(BlockOperator::from_dense_columns(alphabet, grade, basis, cols))
}

/// Where exact blocks come from: built on the spot, or loaded from a store.
pub trait BlockSource: Sync {
    fn block(&self, alphabet: Alphabet, name: OpName, grade: GradeIndex, max_dim: usize) -> Result<BlockOperator>;
}

/// Builds every block with [`build_block`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Direct;

impl BlockSource for Direct {
    fn block(&self, alphabet: Alphabet, name: OpName, grade: GradeIndex, max_dim: usize) -> Result<BlockOperator> {
        build_block(alphabet, name, grade, max_dim)
    }
}

/// `(2P_F − 1)|c| − T_variant` on one block.
pub fn assemble_d(alphabet: Alphabet, variant: Variant, grade: GradeIndex, max_dim: usize) -> Result<BlockOperator> {
    assemble_d_with(&Direct, alphabet, variant, grade, max_dim)
}

/// [`assemble_d`] with the `T` part taken from `source`.
pub fn assemble_d_with(source: &dyn BlockSource, alphabet: Alphabet, variant: Variant, grade: GradeIndex, max_dim: usize) -> Result<BlockOperator> {
    let abs_c = build_block(alphabet, OpName::AbsC, grade, max_dim)?;
    let pf = build_block(alphabet, OpName::PF, grade, max_dim)?;
    let phase = pf.scale(&exact::qi(2)).sub(&BlockOperator {
        columns: (0..pf.dim()).map(|i| vec![(i, Q::one())]).collect(),
        ..pf.clone()
    });
    let t = source.block(alphabet, variant.t_part(), grade, max_dim)?;
    Ok(phase.compose(&abs_c).sub(&t))
}

/// Exact diagonal entry of a diagonal variant on a label.
pub fn diagonal_d_value(alphabet: Alphabet, variant: Variant, b: &BasisIndex) -> Q {
    let abs_n = exact::qi(b.n().abs());
    if b.is_fock() {
        return abs_n;
    }
    let t = match variant {
        Variant::DKappa => diag_value(alphabet, OpName::Kappa, b),
        Variant::DTilde => diag_value(alphabet, OpName::TTilde, b),
        _ => panic!("{variant} is not diagonal"),
    };
    -abs_n - t
}

/// A boundary point `w = preperiod · period^∞`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryWord {
    pub preperiod: Word,
    pub period: Word,
}

impl BoundaryWord {
    pub fn new(alphabet: Alphabet, preperiod: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::Boundary("empty period".into()));
        }
        alphabet.check(&preperiod).map_err(|e| Error::Boundary(e.to_string()))?;
        alphabet.check(&period).map_err(|e| Error::Boundary(e.to_string()))?;
        Ok(BoundaryWord { preperiod, period })
    }

    /// `w_j`, 1-based.
    pub fn letter(&self, j: usize) -> u8 {
        let p = self.preperiod.len();
        if j <= p {
            self.preperiod.letters()[j - 1]
        } else {
            self.period.letters()[(j - p - 1) % self.period.len()]
        }
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word::new((1..=len).map(|j| self.letter(j)).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FiberPoint {
    pub mu: Word,
    pub k: usize,
}

/// Image of a fiber point under a generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FiberImage {
    Zero,
    Point(usize),
    /// Leaves the truncation.
    Outside,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiberBlock {
    pub basis: Vec<FiberPoint>,
    pub d: Vec<i64>,
    pub p: Vec<bool>,
    /// `s[i-1][j]` is the image of point `j` under `S_i`; `s_adj` likewise for `S_i*`.
    pub s: Vec<Vec<FiberImage>>,
    pub s_adj: Vec<Vec<FiberImage>>,
}

/// The fiber model over `w`, truncated to `|μ| + k ≤ max_grade`.
pub fn fiber_block(alphabet: Alphabet, w: &BoundaryWord, max_grade: usize) -> FiberBlock {
    let mut basis = Vec::new();
    for total in 0..=max_grade {
        for k in 0..=total {
            for mu in alphabet.words(total - k) {
                let ok = k == 0 || mu.is_empty() || mu.last() != Some(w.letter(k));
                if ok {
                    basis.push(FiberPoint { mu, k });
                }
            }
        }
    }
    let index: HashMap<FiberPoint, usize> = basis.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let locate = |p: FiberPoint| match index.get(&p) {
        Some(&i) => FiberImage::Point(i),
        None => FiberImage::Outside,
    };
    let mut s = Vec::new();
    let mut s_adj = Vec::new();
    for i in alphabet.letters() {
        let mut fwd = Vec::new();
        let mut back = Vec::new();
        for pt in &basis {
            let (mu0, k) = strip(&pt.mu.prepend(i), &w.prefix(pt.k));
            fwd.push(locate(FiberPoint { mu: mu0, k }));
            let img = match pt.mu.first() {
                Some(a) if a == i => locate(FiberPoint { mu: pt.mu.tail(), k: pt.k }),
                Some(_) => FiberImage::Zero,
                None if w.letter(pt.k + 1) == i => locate(FiberPoint { mu: Word::empty(), k: pt.k + 1 }),
                None => FiberImage::Zero,
            };
            back.push(img);
        }
        s.push(fwd);
        s_adj.push(back);
    }
    let d = basis
        .iter()
        .map(|pt| {
            let n = pt.mu.len() as i64 - pt.k as i64;
            let sign = if pt.k == 0 { 1 } else { -1 };
            n.abs() * sign - pt.k as i64
        })
        .collect();
    let p = basis.iter().map(|pt| pt.k == 0).collect();
    FiberBlock { basis, d, p, s, s_adj }
}
