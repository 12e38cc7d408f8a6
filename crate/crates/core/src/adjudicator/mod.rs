//! Verification campaigns and machine-readable verdicts.
//!
//! The structural suite holds the invariants this crate asserts about its own
//! objects. The paper suite compares printed closed forms against the exact
//! oracle and is allowed to come out either way.

mod fit;
mod paper;
mod structural;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{self, Q};
use crate::operators::GradeIndex;
use crate::sheets::{e_norm_sq, BasisIndex};
use crate::words::Alphabet;

pub use fit::{diagonal_discrepancies, fit_correction, ClassFit, CorrectionFit, CorrectionRow, DiagonalDatum, FitTerm};
pub use paper::{adjudicate_matrix_elements, adjudicate_t, adjudicate_volumes, basis_claims, displem_claims, mainthm_census, paper_suite};
pub use structural::structural_suite;

/// Failing witnesses kept per verdict.
pub const MAX_WITNESSES: usize = 24;
/// Passing witnesses kept per verdict, after the failing ones.
const PASSING_WITNESSES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Verified,
    Refuted,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scope {
    #[serde(rename = "N")]
    pub n: u32,
    pub min_grade: usize,
    pub max_grade: usize,
}

impl Scope {
    pub fn new(alphabet: Alphabet, max_grade: usize) -> Self {
        Scope { n: alphabet.size(), min_grade: 0, max_grade }
    }
}

/// Exact values serialised as rational strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub input: String,
    pub paper: String,
    pub oracle: String,
    pub residual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub status: Status,
    pub scope: Scope,
    pub witnesses: Vec<Witness>,
}

impl Verdict {
    pub fn verified(&self) -> bool {
        self.status == Status::Verified
    }
}

/// One comparison. The residual is usually `oracle − paper`; vector-valued
/// comparisons put a squared norm there instead.
#[derive(Debug, Clone)]
pub struct Check {
    pub input: String,
    pub paper: Q,
    pub oracle: Q,
    pub residual: Q,
}

impl Check {
    pub fn diff(input: String, paper: Q, oracle: Q) -> Self {
        let residual = &oracle - &paper;
        Check { input, paper, oracle, residual }
    }

    /// A pass/fail property: `paper` is the expected count of failures (0).
    pub fn count(input: String, failures: usize) -> Self {
        Check::diff(input, Q::zero(), exact::qi(failures as i64))
    }

    fn witness(&self) -> Witness {
        Witness {
            input: self.input.clone(),
            paper: exact::to_string(&self.paper),
            oracle: exact::to_string(&self.oracle),
            residual: exact::to_string(&self.residual),
        }
    }
}

/// Status and witnesses from a list of checks, in enumeration order.
pub fn verdict(id: &str, scope: Scope, checks: impl IntoIterator<Item = Check>) -> Verdict {
    let mut failing = Vec::new();
    let mut passing = Vec::new();
    let (mut total, mut failures) = (0usize, 0usize);
    for c in checks {
        total += 1;
        if c.residual.is_zero() {
            if passing.len() < PASSING_WITNESSES {
                passing.push(c.witness());
            }
        } else {
            failures += 1;
            if failing.len() < MAX_WITNESSES {
                failing.push(c.witness());
            }
        }
    }
    let status = match failures {
        0 => Status::Verified,
        f if f == total => Status::Refuted,
        _ => Status::Mixed,
    };
    failing.extend(passing);
    Verdict { id: id.to_string(), status, scope, witnesses: failing }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(rename = "N")]
    pub n: u32,
    pub max_grade: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn new(alphabet: Alphabet, max_grade: usize, verdicts: Vec<Verdict>) -> Self {
        let meta = Meta { n: alphabet.size(), max_grade, version: env!("CARGO_PKG_VERSION").to_string() };
        Report { meta, verdicts }
    }

    pub fn get(&self, id: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.id == id)
    }

    /// Pretty JSON with a trailing newline; field order is fixed by the types.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// Every label with `|μ| + |ν| ≤ max_grade`, block by block.
pub(crate) fn labels_up_to(alphabet: Alphabet, max_grade: usize) -> Vec<BasisIndex> {
    GradeIndex::all_up_to(max_grade)
        .into_iter()
        .flat_map(|g| crate::sheets::block_basis(alphabet, g.n, g.k).expect("valid grade"))
        .collect()
}

/// `⟨ě_a, ě_b⟩` from the sibling law: norms on the diagonal, `−N^{-k}/N`
/// between distinct wavelets with a common parent, zero otherwise.
pub fn gram_law(alphabet: Alphabet, a: &BasisIndex, b: &BasisIndex) -> Q {
    if a == b {
        return e_norm_sq(alphabet, a);
    }
    if a.is_wavelet() && b.is_wavelet() && a.sheet() == b.sheet() && a.parent() == b.parent() {
        let n = alphabet.size();
        return -exact::pow(n, -(a.k() as i64) - 1);
    }
    Q::zero()
}

#[cfg(test)]
mod tests;
