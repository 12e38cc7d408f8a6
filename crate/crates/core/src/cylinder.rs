//! Locally constant rational functions on the full shift `Ω_N` and their
//! integrals against the Patterson–Sullivan measure `m(C_w) = N^{-|w|}`.
//!
//! A [`CylinderFunction`] stores values on all cells of a single depth `d`;
//! absent cells carry zero. Every public constructor returns the canonical
//! form, in which the depth cannot be lowered without changing the function.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::words::{common_prefix_len, Alphabet, Word};

#[derive(Clone, PartialEq, Eq)]
pub struct CylinderFunction {
    alphabet: Alphabet,
    depth: usize,
    values: BTreeMap<Word, Q>,
}

impl std::fmt::Debug for CylinderFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cyl[d={}]{{", self.depth)?;
        for (i, (w, v)) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}: {}", exact::to_string(v))?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlgebraOp {
    Add,
    Multiply,
}

impl CylinderFunction {
    pub fn zero(alphabet: Alphabet) -> Self {
        CylinderFunction { alphabet, depth: 0, values: BTreeMap::new() }
    }

    pub fn constant(alphabet: Alphabet, c: Q) -> Self {
        let mut values = BTreeMap::new();
        if !c.is_zero() {
            values.insert(Word::empty(), c);
        }
        CylinderFunction { alphabet, depth: 0, values }
    }

    /// `χ_{C_w}`.
    pub fn indicator(alphabet: Alphabet, w: &Word) -> Self {
        let mut values = BTreeMap::new();
        values.insert(w.clone(), exact::one());
        CylinderFunction { alphabet, depth: w.len(), values }.canonical()
    }

    /// Build from explicit cell values at a common depth. Cells of the wrong
    /// length are rejected.
    pub fn from_cells(alphabet: Alphabet, depth: usize, cells: impl IntoIterator<Item = (Word, Q)>) -> Result<Self> {
        let mut values: BTreeMap<Word, Q> = BTreeMap::new();
        for (w, v) in cells {
            if w.len() != depth {
                return Err(Error::Invalid(format!("cell {w} is not at depth {depth}")));
            }
            alphabet.check(&w)?;
            *values.entry(w).or_insert_with(Q::zero) += v;
        }
        values.retain(|_, v| !v.is_zero());
        Ok(CylinderFunction { alphabet, depth, values }.canonical())
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    /// Non-zero cells at the stored depth.
    pub fn cells(&self) -> impl Iterator<Item = (&Word, &Q)> {
        self.values.iter()
    }

    /// Value on a cell of depth at least `self.depth()`.
    pub fn value_at(&self, cell: &Word) -> Q {
        debug_assert!(cell.len() >= self.depth);
        self.values.get(&cell.prefix(self.depth)).cloned().unwrap_or_else(Q::zero)
    }

    /// Same function written at a larger depth.
    pub fn refine(&self, depth: usize) -> BTreeMap<Word, Q> {
        assert!(depth >= self.depth, "refinement cannot lower depth");
        let extra = self.alphabet.words(depth - self.depth);
        let mut out = BTreeMap::new();
        for (w, v) in &self.values {
            for e in &extra {
                out.insert(w.concat(e), v.clone());
            }
        }
        out
    }

    /// Merge sibling cells carrying equal values until no merge applies.
    fn canonical(mut self) -> Self {
        let n = self.alphabet.size() as usize;
        while self.depth > 0 {
            let mut parents: BTreeMap<Word, (usize, Q)> = BTreeMap::new();
            let mut mergeable = true;
            for (w, v) in &self.values {
                let e = parents.entry(w.init()).or_insert((0, v.clone()));
                if e.1 != *v {
                    mergeable = false;
                    break;
                }
                e.0 += 1;
            }
            if !mergeable || parents.values().any(|(c, _)| *c != n) {
                break;
            }
            self.values = parents.into_iter().map(|(p, (_, v))| (p, v)).collect();
            self.depth -= 1;
        }
        self
    }

    pub fn is_canonical(&self) -> bool {
        self.clone().canonical().depth == self.depth
    }

    fn combine(&self, other: &Self, f: impl Fn(&Q, &Q) -> Q, union: bool) -> Self {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch");
        let d = self.depth.max(other.depth);
        let a = self.refine(d);
        let b = other.refine(d);
        let z = Q::zero();
        let mut values = BTreeMap::new();
        let keys: Vec<&Word> = if union {
            let mut k: Vec<&Word> = a.keys().chain(b.keys()).collect();
            k.sort();
            k.dedup();
            k
        } else {
            a.keys().filter(|k| b.contains_key(*k)).collect()
        };
        for k in keys {
            let v = f(a.get(k).unwrap_or(&z), b.get(k).unwrap_or(&z));
            if !v.is_zero() {
                values.insert(k.clone(), v);
            }
        }
        CylinderFunction { alphabet: self.alphabet, depth: d, values }.canonical()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |x, y| x + y, true)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |x, y| x - y, true)
    }

    pub fn multiply(&self, other: &Self) -> Self {
        self.combine(other, |x, y| x * y, false)
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.alphabet);
        }
        CylinderFunction {
            alphabet: self.alphabet,
            depth: self.depth,
            values: self.values.iter().map(|(w, v)| (w.clone(), v * c)).collect(),
        }
    }

    pub fn algebra(&self, other: &Self, op: AlgebraOp) -> Self {
        match op {
            AlgebraOp::Add => self.add(other),
            AlgebraOp::Multiply => self.multiply(other),
        }
    }

    /// Exact integral against `m_Ω`.
    pub fn integrate(&self) -> Q {
        let s: Q = self.values.values().sum();
        s * exact::pow(self.alphabet.size(), -(self.depth as i64))
    }
}

/// Indicator of the set of points at `ρ_Ω`-distance exactly `e^{-ell}` from
/// every point of `C_base`, i.e. `χ_{C_{base≤ell}} − χ_{C_{base≤ell+1}}`.
pub fn annulus(alphabet: Alphabet, base: &Word, ell: usize) -> Result<CylinderFunction> {
    if ell >= base.len() {
        return Err(Error::Unresolved { ell, depth: base.len() });
    }
    let outer = CylinderFunction::indicator(alphabet, &base.prefix(ell));
    let inner = CylinderFunction::indicator(alphabet, &base.prefix(ell + 1));
    Ok(outer.sub(&inner))
}

/// Number of leading letters two points of the given cells are known to share,
/// when the cells differ; `None` if one cell contains the other.
pub fn agreement(a: &Word, b: &Word) -> Option<usize> {
    let l = common_prefix_len(a, b);
    if l == a.len() || l == b.len() {
        None
    } else {
        Some(l)
    }
}
