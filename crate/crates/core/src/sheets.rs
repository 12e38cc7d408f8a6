//! Exact model of `L²(O_N) ≅ L²(G_N, m_G)`.
//!
//! A groupoid element `g = (x, n, y)` is located by its sheet
//! `(μ_G(g), κ_G(g))` and its domain point `y`; on a fixed sheet the map
//! `g ↦ y` is a measure preserving bijection onto the clopen set
//! `U_{μ0,k}` of admissible domain points. A [`GroupoidVector`] is therefore
//! a finitely supported map from sheets to [`CylinderFunction`]s in `y`.
//!
//! The vectors `ě_{μ,ν}` are the unnormalised `e_{μ,ν}`. They are not an
//! orthogonal family: for every parent pair `(p, q)` the `N` vectors
//! `ě_{pi,qi}` sum to zero. Coordinates are therefore the canonical
//! (minimum-norm) frame coefficients, see [`frame_weight`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cylinder::CylinderFunction;
use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::words::{same_nonempty_tail, strip, Alphabet, Word};

/// The finite-distance class `C_{μ0,k}` of the extended metric.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sheet {
    pub mu0: Word,
    pub k: usize,
}

impl fmt::Display for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.mu0, self.k)
    }
}

impl fmt::Debug for Sheet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sheet{self}")
    }
}

impl Sheet {
    pub fn new(mu0: Word, k: usize) -> Self {
        Sheet { mu0, k }
    }

    /// The sheet carrying `X_{μ,ν}`.
    pub fn of_pair(mu: &Word, nu: &Word) -> Self {
        let (mu0, k) = strip(mu, nu);
        Sheet { mu0, k }
    }

    /// Value of the cocycle `c` on the sheet.
    pub fn grade(&self) -> i64 {
        self.mu0.len() as i64 - self.k as i64
    }

    fn restricted(&self) -> Option<u8> {
        if self.k == 0 {
            None
        } else {
            self.mu0.last()
        }
    }

    /// Whether the domain points in `cell` (depth at least `k`) lie in `U`.
    pub fn admits(&self, cell: &Word) -> bool {
        debug_assert!(cell.len() >= self.k);
        match self.restricted() {
            None => true,
            Some(t) => cell.letters()[self.k - 1] != t,
        }
    }

    /// Whether `cell` of any depth lies entirely inside `U`.
    pub fn contains_cell(&self, cell: &Word) -> bool {
        match self.restricted() {
            None => true,
            Some(t) => cell.len() >= self.k && cell.letters()[self.k - 1] != t,
        }
    }

    /// Indicator of the domain set `U_{μ0,k}`.
    pub fn domain(&self, alphabet: Alphabet) -> CylinderFunction {
        match self.restricted() {
            None => CylinderFunction::constant(alphabet, exact::one()),
            Some(t) => {
                let cells = alphabet
                    .words(self.k)
                    .into_iter()
                    .filter(|w| w.letters()[self.k - 1] != t)
                    .map(|w| (w, exact::one()));
                CylinderFunction::from_cells(alphabet, self.k, cells).expect("cells at depth k")
            }
        }
    }

    /// Admissible prefixes `ν0` of length `k`.
    pub fn admissible_prefixes(&self, alphabet: Alphabet) -> Vec<Word> {
        alphabet.words(self.k).into_iter().filter(|w| self.admits(w)).collect()
    }
}

/// A basis label `(μ, ν)`; it lives in the block `H_{|μ|-|ν|, |ν|}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    pub mu: Word,
    pub nu: Word,
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e[{},{}]", self.mu, self.nu)
    }
}

impl fmt::Debug for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl BasisIndex {
    pub fn new(mu: Word, nu: Word) -> Self {
        BasisIndex { mu, nu }
    }

    pub fn parse(mu: &str, nu: &str) -> Result<Self> {
        Ok(BasisIndex { mu: Word::parse(mu)?, nu: Word::parse(nu)? })
    }

    pub fn n(&self) -> i64 {
        self.mu.len() as i64 - self.nu.len() as i64
    }

    pub fn k(&self) -> usize {
        self.nu.len()
    }

    /// `t(μ) = t(ν) ≠ ∅`: the vector is a mean-zero wavelet inside its parent cell.
    pub fn is_wavelet(&self) -> bool {
        same_nonempty_tail(&self.mu, &self.nu)
    }

    pub fn is_fock(&self) -> bool {
        self.nu.is_empty()
    }

    pub fn sheet(&self) -> Sheet {
        Sheet::of_pair(&self.mu, &self.nu)
    }

    pub fn kappa_v(&self) -> usize {
        crate::words::kappa_v(&self.mu, &self.nu)
    }

    /// Parent pair `(μ̲, ν̲)` of a wavelet label.
    pub fn parent(&self) -> Option<(Word, Word)> {
        self.is_wavelet().then(|| (self.mu.init(), self.nu.init()))
    }
}

/// Exact element of `C_c^∞(G_N)`.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupoidVector {
    alphabet: Alphabet,
    parts: BTreeMap<Sheet, CylinderFunction>,
}

impl fmt::Debug for GroupoidVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.parts.iter()).finish()
    }
}

impl GroupoidVector {
    pub fn zero(alphabet: Alphabet) -> Self {
        GroupoidVector { alphabet, parts: BTreeMap::new() }
    }

    /// Single-sheet vector; fails if `f` is not supported inside the sheet domain.
    pub fn on_sheet(sheet: Sheet, f: CylinderFunction) -> Result<Self> {
        let alphabet = f.alphabet();
        let restricted = f.multiply(&sheet.domain(alphabet));
        if restricted != f {
            return Err(Error::OutsideSheet { cell: format!("{f:?}"), sheet: sheet.to_string() });
        }
        let mut parts = BTreeMap::new();
        if !f.is_zero() {
            parts.insert(sheet, f);
        }
        Ok(GroupoidVector { alphabet, parts })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn parts(&self) -> impl Iterator<Item = (&Sheet, &CylinderFunction)> {
        self.parts.iter()
    }

    pub fn part(&self, sheet: &Sheet) -> Option<&CylinderFunction> {
        self.parts.get(sheet)
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    /// Largest cylinder depth over all parts.
    pub fn depth(&self) -> usize {
        self.parts.values().map(|f| f.depth()).max().unwrap_or(0)
    }

    fn insert_add(&mut self, sheet: Sheet, f: CylinderFunction) {
        if f.is_zero() {
            return;
        }
        let merged = match self.parts.remove(&sheet) {
            Some(g) => g.add(&f),
            None => f,
        };
        if !merged.is_zero() {
            self.parts.insert(sheet, merged);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (s, f) in &other.parts {
            out.insert_add(s.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&exact::qi(-1)))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet);
        }
        GroupoidVector {
            alphabet: self.alphabet,
            parts: self.parts.iter().map(|(s, f)| (s.clone(), f.scale(c))).collect(),
        }
    }

    /// Pointwise multiplication by a function that is constant on each sheet.
    pub fn map_sheets(&self, weight: impl Fn(&Sheet) -> Q) -> Self {
        let mut out = Self::zero(self.alphabet);
        for (s, f) in &self.parts {
            out.insert_add(s.clone(), f.scale(&weight(s)));
        }
        out
    }

    /// Pointwise product with a function of the domain point `y = d(g)`.
    pub fn mul_domain(&self, h: &CylinderFunction) -> Self {
        let mut out = Self::zero(self.alphabet);
        for (s, f) in &self.parts {
            out.insert_add(s.clone(), f.multiply(h));
        }
        out
    }

    /// Multiplication by the function `κ_G`.
    pub fn mul_kappa_g(&self) -> Self {
        self.map_sheets(|s| exact::qi(s.k as i64))
    }

    /// Multiplication by the cocycle `c`.
    pub fn mul_c(&self) -> Self {
        self.map_sheets(|s| exact::qi(s.grade()))
    }

    pub fn sheets(&self) -> impl Iterator<Item = &Sheet> {
        self.parts.keys()
    }
}

/// `χ_{μ,ν}`, the indicator of the basic open set `X_{μ,ν}`.
pub fn chi_vector(alphabet: Alphabet, mu: &Word, nu: &Word) -> GroupoidVector {
    let sheet = Sheet::of_pair(mu, nu);
    let f = CylinderFunction::indicator(alphabet, nu);
    GroupoidVector::on_sheet(sheet, f).expect("X_{mu,nu} lies in its sheet")
}

/// Unnormalised basis vector together with its exact squared norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EVector {
    pub v: GroupoidVector,
    pub norm_sq: Q,
}

/// `ě_{μ,ν}`: `χ_{μ,ν}` if `t(μ) ≠ t(ν)`, else `χ_{μ,ν} − N^{-1} χ_{μ̲,ν̲}`.
pub fn e_vector(alphabet: Alphabet, mu: &Word, nu: &Word) -> EVector {
    let chi = chi_vector(alphabet, mu, nu);
    let v = if same_nonempty_tail(mu, nu) {
        let parent = chi_vector(alphabet, &mu.init(), &nu.init());
        chi.sub(&parent.scale(&exact::q(1, alphabet.size() as i64)))
    } else {
        chi
    };
    let norm_sq = inner(&v, &v);
    EVector { v, norm_sq }
}

/// Closed form for `⟨ě_{μ,ν}, ě_{μ,ν}⟩`.
pub fn e_norm_sq(alphabet: Alphabet, b: &BasisIndex) -> Q {
    let n = alphabet.size();
    let base = exact::pow(n, -(b.k() as i64));
    if b.is_wavelet() {
        base * (exact::one() - exact::q(1, n as i64))
    } else {
        base
    }
}

/// Canonical frame weight: the minimum-norm coefficient of `f` on `ě_a` is
/// `frame_weight(a) · ⟨ě_a, f⟩ / ⟨ě_a, ě_a⟩`. Wavelet families form a tight
/// frame with bound `N/(N−1)`; the other vectors are orthogonal to everything.
pub fn frame_weight(alphabet: Alphabet, b: &BasisIndex) -> Q {
    if b.is_wavelet() {
        let n = alphabet.size() as i64;
        exact::q(n - 1, n)
    } else {
        exact::one()
    }
}

/// Exact `L²(G_N, m_G)` inner product (all vectors are real).
pub fn inner(f: &GroupoidVector, g: &GroupoidVector) -> Q {
    let mut acc = Q::zero();
    for (s, a) in &f.parts {
        if let Some(b) = g.parts.get(s) {
            acc += a.multiply(b).integrate();
        }
    }
    acc
}

/// New sheet of a point of `sheet` whose domain point lies in `cell`, after
/// left multiplication by `S_i` (or `S_i*`); `None` when `S_i*` kills it.
/// `cell` must have depth at least `k + 1`.
fn translate(sheet: &Sheet, cell: &Word, i: u8, adjoint: bool) -> Option<Sheet> {
    let nu0 = cell.prefix(sheet.k);
    if !adjoint {
        return Some(Sheet::of_pair(&sheet.mu0.prepend(i), &nu0));
    }
    match sheet.mu0.first() {
        Some(a) if a == i => Some(Sheet::of_pair(&sheet.mu0.tail(), &nu0)),
        Some(_) => None,
        None => {
            // x = σ^k(y), so the first letter of x is y_{k+1}
            (cell.letters()[sheet.k] == i).then(|| Sheet::new(Word::empty(), sheet.k + 1))
        }
    }
}

/// Left action of `S_i` (or `S_i*` when `adjoint`) on `L²(O_N)`. Both
/// operators preserve the domain coordinate `y`.
pub fn gen_action(i: u8, f: &GroupoidVector, adjoint: bool) -> GroupoidVector {
    let alphabet = f.alphabet;
    let mut out = GroupoidVector::zero(alphabet);
    for (sheet, func) in &f.parts {
        let d = func.depth().max(sheet.k + 1);
        let mut local: BTreeMap<Sheet, Vec<(Word, Q)>> = BTreeMap::new();
        for (cell, v) in func.refine(d) {
            if let Some(target) = translate(sheet, &cell, i, adjoint) {
                local.entry(target).or_default().push((cell, v));
            }
        }
        for (target, cells) in local {
            let g = CylinderFunction::from_cells(alphabet, d, cells).expect("uniform depth");
            out.insert_add(target, g);
        }
    }
    out
}

/// `S_ρ S_σ* f`.
pub fn apply_word_pair(rho: &Word, sigma: &Word, f: &GroupoidVector) -> GroupoidVector {
    let mut g = f.clone();
    for &a in sigma.letters() {
        g = gen_action(a, &g, true);
    }
    for &a in rho.letters().iter().rev() {
        g = gen_action(a, &g, false);
    }
    g
}

/// Integrals of a cylinder function over every cell up to its depth.
pub struct PrefixIntegrals {
    alphabet: Alphabet,
    depth: usize,
    sums: HashMap<Word, Q>,
    f: CylinderFunction,
}

impl PrefixIntegrals {
    pub fn new(f: &CylinderFunction) -> Self {
        let alphabet = f.alphabet();
        let d = f.depth();
        let scale = exact::pow(alphabet.size(), -(d as i64));
        let mut sums: HashMap<Word, Q> = HashMap::new();
        for (cell, v) in f.cells() {
            let m = v * &scale;
            for l in 0..=d {
                *sums.entry(cell.prefix(l)).or_insert_with(Q::zero) += &m;
            }
        }
        PrefixIntegrals { alphabet, depth: d, sums, f: f.clone() }
    }

    /// `∫_{C_w} f dm_Ω`.
    pub fn over(&self, w: &Word) -> Q {
        if w.len() >= self.depth {
            self.f.value_at(w) * exact::pow(self.alphabet.size(), -(w.len() as i64))
        } else {
            self.sums.get(w).cloned().unwrap_or_else(Q::zero)
        }
    }
}

/// `⟨ě_b, f⟩` using precomputed cell integrals of `f` on the sheet of `b`.
pub fn e_inner_with(alphabet: Alphabet, b: &BasisIndex, sheet_integrals: Option<&PrefixIntegrals>) -> Q {
    let Some(p) = sheet_integrals else { return Q::zero() };
    let mut v = p.over(&b.nu);
    if b.is_wavelet() {
        v -= p.over(&b.nu.init()) * exact::q(1, alphabet.size() as i64);
    }
    v
}

/// Basis labels supported on `sheet` inside block `H_{n, kb}` with `n` the sheet grade.
pub fn basis_on_sheet(alphabet: Alphabet, sheet: &Sheet, kb: usize) -> Vec<BasisIndex> {
    if kb < sheet.k {
        return Vec::new();
    }
    let tails = alphabet.words(kb - sheet.k);
    let mut out = Vec::new();
    for nu0 in sheet.admissible_prefixes(alphabet) {
        for s in &tails {
            out.push(BasisIndex::new(sheet.mu0.concat(s), nu0.concat(s)));
        }
    }
    out.sort();
    out
}

/// All labels of the block `H_{n,k}`, lexicographic in `(μ, ν)`.
pub fn block_basis(alphabet: Alphabet, n: i64, k: usize) -> Result<Vec<BasisIndex>> {
    if n < -(k as i64) {
        return Err(Error::Grade { n, k });
    }
    let mu_len = (n + k as i64) as usize;
    let mus = alphabet.words(mu_len);
    let nus = alphabet.words(k);
    let mut out = Vec::with_capacity(mus.len() * nus.len());
    for mu in &mus {
        for nu in &nus {
            out.push(BasisIndex::new(mu.clone(), nu.clone()));
        }
    }
    Ok(out)
}

/// Canonical frame coefficients of `f` against the labels of `H_{n,k}`.
pub fn block_coords(f: &GroupoidVector, n: i64, k: usize) -> Result<Vec<Q>> {
    let alphabet = f.alphabet;
    let basis = block_basis(alphabet, n, k)?;
    let integrals: HashMap<&Sheet, PrefixIntegrals> =
        f.parts.iter().filter(|(s, _)| s.grade() == n).map(|(s, g)| (s, PrefixIntegrals::new(g))).collect();
    Ok(basis
        .iter()
        .map(|b| {
            let sheet = b.sheet();
            let ip = e_inner_with(alphabet, b, integrals.get(&sheet));
            if ip.is_zero() {
                ip
            } else {
                ip * frame_weight(alphabet, b) / e_norm_sq(alphabet, b)
            }
        })
        .collect())
}

/// Coordinates of `f` across every block it meets, with exact reconstruction.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub coords: BTreeMap<BasisIndex, Q>,
}

impl Expansion {
    /// Block-wise view: `(n, k) -> [(label, coefficient)]`.
    pub fn by_block(&self) -> BTreeMap<(i64, usize), Vec<(BasisIndex, Q)>> {
        let mut out: BTreeMap<(i64, usize), Vec<(BasisIndex, Q)>> = BTreeMap::new();
        for (b, c) in &self.coords {
            out.entry((b.n(), b.k())).or_default().push((b.clone(), c.clone()));
        }
        out
    }

    pub fn coefficient(&self, b: &BasisIndex) -> Q {
        self.coords.get(b).cloned().unwrap_or_else(Q::zero)
    }
}

/// Expand `f` in the frame and check that the expansion reproduces `f`.
pub fn expand(f: &GroupoidVector) -> Result<Expansion> {
    let alphabet = f.alphabet;
    let mut coords = BTreeMap::new();
    for (sheet, g) in &f.parts {
        let ints = PrefixIntegrals::new(g);
        let top = g.depth().max(sheet.k);
        for kb in sheet.k..=top {
            for b in basis_on_sheet(alphabet, sheet, kb) {
                let ip = e_inner_with(alphabet, &b, Some(&ints));
                if !ip.is_zero() {
                    let c = ip * frame_weight(alphabet, &b) / e_norm_sq(alphabet, &b);
                    coords.insert(b, c);
                }
            }
        }
    }
    let expansion = Expansion { coords };
    let rebuilt = synthesize(alphabet, expansion.coords.iter());
    if rebuilt != *f {
        return Err(Error::Truncation(format!("{:?}", f.sub(&rebuilt))));
    }
    Ok(expansion)
}

/// `Σ c_b ě_b`.
pub fn synthesize<'a>(alphabet: Alphabet, terms: impl IntoIterator<Item = (&'a BasisIndex, &'a Q)>) -> GroupoidVector {
    let n = alphabet.size() as i64;
    let mut per_sheet: BTreeMap<Sheet, BTreeMap<Word, Q>> = BTreeMap::new();
    let mut depth: BTreeMap<Sheet, usize> = BTreeMap::new();
    let mut raw: Vec<(Sheet, Word, Q)> = Vec::new();
    for (b, c) in terms {
        if c.is_zero() {
            continue;
        }
        let s = b.sheet();
        raw.push((s.clone(), b.nu.clone(), c.clone()));
        if b.is_wavelet() {
            raw.push((s.clone(), b.nu.init(), -c * exact::q(1, n)));
        }
        let d = depth.entry(s).or_insert(0);
        *d = (*d).max(b.nu.len());
    }
    for (s, cell, c) in raw {
        let d = depth[&s];
        let cells = per_sheet.entry(s).or_default();
        for ext in alphabet.words(d - cell.len()) {
            *cells.entry(cell.concat(&ext)).or_insert_with(Q::zero) += &c;
        }
    }
    let mut out = GroupoidVector::zero(alphabet);
    for (s, cells) in per_sheet {
        let d = depth[&s];
        let f = CylinderFunction::from_cells(alphabet, d, cells).expect("uniform depth");
        out.insert_add(s, f);
    }
    out
}

/// Cell-level evaluation of `κ_G` and `μ_G` on `X_{μ,ν}` with the common tail
/// `z` resolved to `cell`, by direct search for the minimal synchronisation index.
pub fn brute_force_kappa(mu: &Word, nu: &Word, cell: &Word) -> (usize, Word) {
    let x = mu.concat(cell);
    let y = nu.concat(cell);
    let n = mu.len() as i64 - nu.len() as i64;
    let start = (-n).max(0) as usize;
    for k in start.. {
        let xs = (n + k as i64) as usize;
        // unresolved letters beyond the cells coincide (both are the tail of z)
        if x.letters()[xs..] == y.letters()[k..] {
            return (k, x.prefix(xs));
        }
    }
    unreachable!("k = |nu| always synchronises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{q, qi};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn a(n: u32) -> Alphabet {
        Alphabet::new(n).unwrap()
    }

    fn cf(n: u32, cells: &[(&str, Q)]) -> CylinderFunction {
        let d = cells[0].0.len();
        CylinderFunction::from_cells(a(n), d, cells.iter().map(|(c, v)| (w(c), v.clone()))).unwrap()
    }

    #[test]
    fn chi_vector_examples() {
        let v = chi_vector(a(3), &w("21"), &w("31"));
        let (s, f) = v.parts().next().unwrap();
        assert_eq!(*s, Sheet::new(w("2"), 1));
        assert_eq!(*f, CylinderFunction::indicator(a(3), &w("31")));
        let v = chi_vector(a(3), &w("12"), &w(""));
        assert_eq!(v.part(&Sheet::new(w("12"), 0)), Some(&CylinderFunction::constant(a(3), qi(1))));
        for (mu, nu) in [("21", "31"), ("", "12"), ("1", "")] {
            let v = chi_vector(a(3), &w(mu), &w(nu));
            assert_eq!(inner(&v, &v), exact::pow(3, -(nu.len() as i64)));
        }
    }

    #[test]
    fn e_vector_examples() {
        let e = e_vector(a(3), &w("11"), &w("1"));
        let want = cf(3, &[("1", qi(1))]).sub(&CylinderFunction::constant(a(3), q(1, 3)));
        assert_eq!(e.v.part(&Sheet::new(w("1"), 0)), Some(&want));
        assert_eq!(e.norm_sq, q(2, 9));
        let e = e_vector(a(3), &w(""), &w(""));
        assert_eq!(e.norm_sq, qi(1));
        let e = e_vector(a(3), &w("1"), &w("2"));
        assert_eq!(e.norm_sq, q(1, 3));
        assert_eq!(e.v.part(&Sheet::new(w("1"), 1)), Some(&CylinderFunction::indicator(a(3), &w("2"))));
    }

    #[test]
    fn kms_inner_product() {
        let one = chi_vector(a(3), &w(""), &w(""));
        let p = chi_vector(a(3), &w("1"), &w("1"));
        assert_eq!(inner(&one, &p), q(1, 3));
    }

    #[test]
    fn siblings_are_dependent() {
        let n = a(3);
        let mut sum = GroupoidVector::zero(n);
        for i in n.letters() {
            sum = sum.add(&e_vector(n, &w("2").push(i), &w("1").push(i)).v);
        }
        assert!(sum.is_zero());
        let x = e_vector(n, &w("21"), &w("11")).v;
        let y = e_vector(n, &w("22"), &w("12")).v;
        assert_eq!(inner(&x, &y), -exact::pow(3, -2) / qi(3));
    }

    #[test]
    fn generator_examples() {
        let n = a(3);
        let e = e_vector(n, &w(""), &w("1")).v;
        let got = gen_action(1, &e, false);
        let want = e_vector(n, &w("1"), &w("1")).v.add(&e_vector(n, &w(""), &w("")).v.scale(&q(1, 3)));
        assert_eq!(got, want);
        let one = chi_vector(n, &w(""), &w(""));
        for i in n.letters() {
            for j in n.letters() {
                let v = gen_action(i, &gen_action(j, &one, false), true);
                if i == j {
                    assert_eq!(v, one);
                } else {
                    assert!(v.is_zero());
                }
            }
        }
        // S_i* χ_{∅,ν} = χ_{∅,νi}
        let v = gen_action(2, &chi_vector(n, &w(""), &w("3")), true);
        assert_eq!(v, chi_vector(n, &w(""), &w("32")));
    }

    #[test]
    fn block_coords_examples() {
        let n = a(3);
        let e = e_vector(n, &w("1"), &w("2")).v;
        let c = block_coords(&e, 0, 1).unwrap();
        let basis = block_basis(n, 0, 1).unwrap();
        for (b, v) in basis.iter().zip(&c) {
            let want = if *b == BasisIndex::parse("1", "2").unwrap() { qi(1) } else { qi(0) };
            assert_eq!(*v, want, "{b}");
        }
        assert_eq!(block_coords(&e, 1, 1).unwrap().len(), 27);
        let s = gen_action(1, &e_vector(n, &w(""), &w("1")).v, false);
        let c01 = block_coords(&s, 0, 1).unwrap();
        let c00 = block_coords(&s, 0, 0).unwrap();
        let b01 = block_basis(n, 0, 1).unwrap();
        let idx = b01.iter().position(|b| *b == BasisIndex::parse("1", "1").unwrap()).unwrap();
        // minimum-norm coefficients on the wavelet family {ě_{i,i}}
        assert_eq!(c01[idx], q(2, 3));
        assert_eq!(c00, vec![q(1, 3)]);
        let rebuilt = synthesize(n, b01.iter().zip(&c01)).add(&e_vector(n, &w(""), &w("")).v.scale(&c00[0]));
        assert_eq!(rebuilt, s);
    }

    #[test]
    fn expansion_reconstructs() {
        let n = a(2);
        let f = chi_vector(n, &w("12"), &w("212")).add(&chi_vector(n, &w(""), &w("1")).scale(&q(-3, 5)));
        let ex = expand(&f).unwrap();
        assert!(!ex.coords.is_empty());
        let bad = GroupoidVector { alphabet: n, parts: [(Sheet::new(w("1"), 1), CylinderFunction::indicator(n, &w("1")))].into() };
        assert!(expand(&bad).is_err());
    }

    #[test]
    fn brute_force_kappa_matches() {
        let (k, mu0) = brute_force_kappa(&w("21"), &w("31"), &w("1231"));
        assert_eq!((k, mu0), (1, w("2")));
        let (k, mu0) = brute_force_kappa(&w(""), &w("22"), &w("21"));
        assert_eq!((k, mu0), (2, w("")));
    }
}
