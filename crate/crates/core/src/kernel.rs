//! The singular integral operator
//! `T₀f(g₁) = (1 − N⁻¹)⁻¹ ∫ (f(g₁) − f(g₂)) ρ_G(g₁,g₂)^{−log N} dm_G(g₂)`
//! evaluated exactly on locally constant vectors, and the Fock kernel.
//!
//! Points at infinite distance contribute nothing, so integration never
//! leaves the sheet of `g₁`. On a sheet, `ρ_G(g₁, g₂) = e^{−ℓ}` with `ℓ` the
//! length of the common prefix of the domain points.

use std::collections::BTreeMap;

use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cylinder::{annulus, CylinderFunction};
use crate::error::{Error, Result};
use crate::exact::{self, Q};
use crate::sheets::{GroupoidVector, PrefixIntegrals, Sheet};
use crate::words::{common_prefix_len, kappa_v, Alphabet, Word};

/// The sphere `X^ℓ(g₁)` around any `g₁` on `sheet` whose domain point lies in `base_cell`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub sheet: Sheet,
    pub base_cell: Word,
    pub ell: usize,
}

/// A groupoid point resolved to a domain cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point {
    pub sheet: Sheet,
    pub cell: Word,
}

impl Point {
    /// Representative of `X_{μ,ν}` with common tail `z` resolved to `tail`.
    pub fn in_basic_set(mu: &Word, nu: &Word, tail: &Word) -> Self {
        Point { sheet: Sheet::of_pair(mu, nu), cell: nu.concat(tail) }
    }

    /// Whether the point lies in `X_{μ,ν}`; needs `|cell| ≥ |ν|`.
    pub fn in_set(&self, mu: &Word, nu: &Word) -> Result<bool> {
        if self.cell.len() < nu.len() {
            return Err(Error::Unresolved { ell: nu.len(), depth: self.cell.len() });
        }
        Ok(self.sheet == Sheet::of_pair(mu, nu) && self.cell.starts_with(nu))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Sphere,
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VolumeCase {
    /// `m(X^ℓ(g₁) ∖ X_{μ,ν})` for `g₁ ∈ X_{μ,ν}`.
    In,
    /// `m(X^ℓ(g₁) ∩ X_{μ,ν})` for `g₁ ∉ X_{μ,ν}`.
    Out,
}

fn check_cell(s: &SphereSpec) -> Result<()> {
    if !s.sheet.contains_cell(&s.base_cell) {
        return Err(Error::OutsideSheet { cell: s.base_cell.to_string(), sheet: s.sheet.to_string() });
    }
    if s.ell >= s.base_cell.len() {
        return Err(Error::Unresolved { ell: s.ell, depth: s.base_cell.len() });
    }
    Ok(())
}

/// `m_G(X^ℓ(g₁))`.
pub fn sphere_volume(alphabet: Alphabet, s: &SphereSpec) -> Result<Q> {
    check_cell(s)?;
    let a = annulus(alphabet, &s.base_cell, s.ell)?;
    Ok(a.multiply(&s.sheet.domain(alphabet)).integrate())
}

fn normaliser(alphabet: Alphabet) -> Q {
    let n = alphabet.size() as i64;
    exact::q(n, n - 1)
}

/// `Σ_ℓ N^ℓ [f(w) m(A_ℓ ∩ U) − ∫_{A_ℓ ∩ U} f]` for `ℓ < levels`, with
/// `A_ℓ` the annuli around `w`.
fn sphere_sum(n: u32, w: &Word, fw: &Q, f_int: &PrefixIntegrals, u_int: &PrefixIntegrals, levels: usize) -> Q {
    let mut acc = Q::zero();
    for ell in 0..levels {
        let (a, b) = (w.prefix(ell), w.prefix(ell + 1));
        let m = u_int.over(&a) - u_int.over(&b);
        let i = f_int.over(&a) - f_int.over(&b);
        acc += (fw * m - i) * exact::pow(n, ell as i64);
    }
    acc
}

fn apply_t_sheet(alphabet: Alphabet, sheet: &Sheet, f: &CylinderFunction, mode: Mode) -> CylinderFunction {
    let n = alphabet.size();
    let d = f.depth().max(sheet.k);
    let cells: Vec<Word> = alphabet.words(d).into_iter().filter(|w| sheet.admits(w)).collect();
    let values: Vec<(Word, Q)> = match mode {
        Mode::Sphere => {
            let f_int = PrefixIntegrals::new(f);
            let u_int = PrefixIntegrals::new(&sheet.domain(alphabet));
            cells
                .par_iter()
                .map(|w| {
                    let fw = f.value_at(w);
                    let v = sphere_sum(n, w, &fw, &f_int, &u_int, d);
                    // level d, resolved one letter deeper, must vanish
                    let child = w.push(1);
                    let extra = {
                        let (a, b) = (child.prefix(d), child.prefix(d + 1));
                        &fw * (u_int.over(&a) - u_int.over(&b)) - (f_int.over(&a) - f_int.over(&b))
                    };
                    assert!(extra.is_zero(), "sphere level {d} does not vanish at {w}");
                    (w.clone(), v)
                })
                .collect()
        }
        Mode::Direct => {
            let m = exact::pow(n, -(d as i64));
            let vals: Vec<Q> = cells.iter().map(|w| f.value_at(w)).collect();
            let mut classes: BTreeMap<&Q, usize> = BTreeMap::new();
            let class: Vec<usize> = vals.iter().map(|v| { let n = classes.len(); *classes.entry(v).or_insert(n) }).collect();
            cells
                .par_iter()
                .enumerate()
                .map(|(i, w1)| {
                    let mut acc = Q::zero();
                    for (j, w2) in cells.iter().enumerate() {
                        if class[i] == class[j] {
                            continue;
                        }
                        let l = common_prefix_len(w1, w2);
                        acc += (&vals[i] - &vals[j]) * exact::pow(n, l as i64);
                    }
                    (w1.clone(), acc * &m)
                })
                .collect()
        }
    };
    let c = normaliser(alphabet);
    CylinderFunction::from_cells(alphabet, d, values.into_iter().map(|(w, v)| (w, v * &c))).expect("uniform depth")
}

/// `T₀ f`, exact.
pub fn apply_t(f: &GroupoidVector, mode: Mode) -> GroupoidVector {
    let alphabet = f.alphabet();
    let parts: Vec<(Sheet, CylinderFunction)> = f.parts().map(|(s, g)| (s.clone(), g.clone())).collect();
    let images: Vec<GroupoidVector> = parts
        .par_iter()
        .map(|(s, g)| {
            let h = apply_t_sheet(alphabet, s, g, mode);
            GroupoidVector::on_sheet(s.clone(), h).expect("T preserves sheets")
        })
        .collect();
    images.iter().fold(GroupoidVector::zero(alphabet), |acc, v| acc.add(v))
}

/// Integral operator with kernel `χ` of `∪_μ X_{μ,∅} × X_{μ,∅}`; keeps the
/// integral of every part on a sheet `(μ, 0)` and drops the rest.
pub fn apply_fock_kernel(f: &GroupoidVector) -> GroupoidVector {
    let alphabet = f.alphabet();
    let mut out = GroupoidVector::zero(alphabet);
    for (s, g) in f.parts() {
        if s.k == 0 {
            let c = g.integrate();
            let v = GroupoidVector::on_sheet(s.clone(), CylinderFunction::constant(alphabet, c)).expect("unrestricted sheet");
            out = out.add(&v);
        }
    }
    out
}

/// Exact counterpart of [`paper_volumes`], by cylinder integration.
pub fn oracle_volumes(alphabet: Alphabet, mu: &Word, nu: &Word, ell: usize, case: VolumeCase, g1: &Point) -> Result<Q> {
    let inside = g1.in_set(mu, nu)?;
    match (case, inside) {
        (VolumeCase::In, false) | (VolumeCase::Out, true) => {
            return Err(Error::Invalid(format!("point {:?} on the wrong side of X_({mu},{nu})", g1)))
        }
        _ => {}
    }
    let spec = SphereSpec { sheet: g1.sheet.clone(), base_cell: g1.cell.clone(), ell };
    let sphere = annulus(alphabet, &spec.base_cell, ell)?.multiply(&spec.sheet.domain(alphabet));
    let target = Sheet::of_pair(mu, nu);
    let meet = if target == g1.sheet {
        sphere.multiply(&CylinderFunction::indicator(alphabet, nu)).integrate()
    } else {
        Q::zero()
    };
    Ok(match case {
        VolumeCase::Out => meet,
        VolumeCase::In => sphere.integrate() - meet,
    })
}

/// The printed volume formulas, evaluated literally.
///
/// `Out`: `N^{−|ν|} Σ_γ χ_{μ̲_{n+|γ|},γ}(g₁)(χ_{ν̲_ℓ}(y₁) − χ_{ν̲_{ℓ+1}}(y₁))` over `|γ| = κ_V(μ,ν) = κ_V(μ,γ)`.
/// `In`: `0` for `ℓ ≥ |ν|`, `N^{−ℓ} − N^{−ℓ−1}` for `κ_G(g₁) ≤ ℓ < |ν|`, `N^{−ℓ−1}(N−1)²` below.
pub fn paper_volumes(alphabet: Alphabet, mu: &Word, nu: &Word, ell: usize, case: VolumeCase, g1: &Point) -> Result<Q> {
    let nn = alphabet.size();
    match case {
        VolumeCase::In => {
            let kg = g1.sheet.k;
            let l = ell as i64;
            Ok(if ell >= nu.len() {
                Q::zero()
            } else if kg <= ell {
                exact::pow(nn, -l) - exact::pow(nn, -l - 1)
            } else {
                exact::pow(nn, -l - 1) * exact::qi((nn as i64 - 1) * (nn as i64 - 1))
            })
        }
        VolumeCase::Out => {
            let need = (ell + 1).min(nu.len());
            if g1.cell.len() < need {
                return Err(Error::Unresolved { ell, depth: g1.cell.len() });
            }
            let y = &g1.cell;
            let chi = |w: &Word| if y.starts_with(w) { 1i64 } else { 0 };
            let radial = chi(&nu.prefix(ell)) - chi(&nu.prefix(ell + 1));
            if radial == 0 {
                return Ok(Q::zero());
            }
            let kv = kappa_v(mu, nu);
            let n = mu.len() as i64 - nu.len() as i64;
            let head = (n + kv as i64).max(0) as usize;
            let mut count = 0i64;
            for gamma in alphabet.words(kv) {
                if kappa_v(mu, &gamma) != kv {
                    continue;
                }
                if g1.cell.len() < gamma.len() {
                    return Err(Error::Unresolved { ell: gamma.len(), depth: g1.cell.len() });
                }
                if g1.in_set(&mu.prefix(head), &gamma)? {
                    count += 1;
                }
            }
            Ok(exact::pow(nn, -(nu.len() as i64)) * exact::qi(count * radial))
        }
    }
}

/// Mass of each sphere level around a point of a cell, for reporting.
pub fn sphere_profile(alphabet: Alphabet, sheet: &Sheet, cell: &Word) -> Result<BTreeMap<usize, Q>> {
    let mut out = BTreeMap::new();
    for ell in 0..cell.len() {
        out.insert(ell, sphere_volume(alphabet, &SphereSpec { sheet: sheet.clone(), base_cell: cell.clone(), ell })?);
    }
    Ok(out)
}
