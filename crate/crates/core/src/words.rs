//! Finite words over `{1, ..., N}`: suffix and prefix calculus and the
//! depth-kore word function `kappa_V`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alphabet size `N >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet(u8);

impl Alphabet {
    pub fn new(n: u32) -> Result<Self> {
        if !(2..=255).contains(&n) {
            return Err(Error::Alphabet(n));
        }
        Ok(Alphabet(n as u8))
    }

    pub fn size(self) -> u32 {
        self.0 as u32
    }

    pub fn letters(self) -> impl Iterator<Item = u8> + Clone {
        1..=self.0
    }

    /// Every word of length exactly `len`, in lexicographic order.
    pub fn words(self, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * self.0 as usize);
            for w in &out {
                for a in self.letters() {
                    next.push(w.push(a));
                }
            }
            out = next;
        }
        out
    }

    /// Words of length `0..=max_len`, ordered by length then lexicographically.
    pub fn words_up_to(self, max_len: usize) -> Vec<Word> {
        (0..=max_len).flat_map(|l| self.words(l)).collect()
    }

    pub fn check(self, w: &Word) -> Result<()> {
        match w.0.iter().find(|&&a| a == 0 || a > self.0) {
            Some(&letter) => Err(Error::Letter { letter, n: self.0 }),
            None => Ok(()),
        }
    }
}

/// A finite word; letters are 1-based. The empty word is a valid value.
///
/// The derived ordering is lexicographic; [`Word::canonical_cmp`] gives the
/// length-then-lexicographic enumeration order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Word(Vec<u8>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<u8>) -> Self {
        Word(letters)
    }

    /// Parse a word written as digits, e.g. `"221"`. `""` and `"∅"` give the empty word.
    /// Only alphabets up to 9 letters can be written this way.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "∅" || s == "e" {
            return Ok(Word::empty());
        }
        s.chars()
            .map(|c| match c.to_digit(10) {
                Some(d) if d >= 1 => Ok(d as u8),
                _ => Err(Error::Invalid(format!("bad letter `{c}` in word `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Last letter, `None` for the empty word.
    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn push(&self, a: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(a);
        Word(v)
    }

    pub fn prepend(&self, a: u8) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// First `len` letters (the whole word if shorter).
    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Last `len` letters (the whole word if shorter).
    pub fn suffix(&self, len: usize) -> Word {
        let l = self.0.len();
        Word(self.0[l - len.min(l)..].to_vec())
    }

    /// The word without its last letter; the empty word stays empty.
    pub fn init(&self) -> Word {
        self.prefix(self.0.len().saturating_sub(1))
    }

    /// The word without its first letter.
    pub fn tail(&self) -> Word {
        Word(self.0.get(1..).unwrap_or(&[]).to_vec())
    }

    pub fn starts_with(&self, p: &Word) -> bool {
        self.0.starts_with(&p.0)
    }

    pub fn canonical_cmp(&self, other: &Word) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for a in &self.0 {
            if *a < 10 {
                write!(f, "{a}")?;
            } else {
                write!(f, "[{a}]")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// Length of the longest common suffix.
pub fn common_suffix_len(mu: &Word, nu: &Word) -> usize {
    mu.0.iter()
        .rev()
        .zip(nu.0.iter().rev())
        .take_while(|(a, b)| a == b)
        .count()
}

/// Length of the longest common prefix.
pub fn common_prefix_len(mu: &Word, nu: &Word) -> usize {
    mu.0.iter().zip(nu.0.iter()).take_while(|(a, b)| a == b).count()
}

/// `kappa_V(mu, nu) = |nu| - |mu ∧ nu|`, with `mu ∧ nu` the longest common suffix.
pub fn kappa_v(mu: &Word, nu: &Word) -> usize {
    nu.len() - common_suffix_len(mu, nu)
}

/// `(mu ∧ nu, mu ∨ nu)`: maximal common suffix and maximal common prefix.
pub fn common_parts(mu: &Word, nu: &Word) -> (Word, Word) {
    (
        mu.suffix(common_suffix_len(mu, nu)),
        mu.prefix(common_prefix_len(mu, nu)),
    )
}

/// Remove the common suffix: returns `(mu0, k)` with `k = kappa_V(mu, nu)`.
pub fn strip(mu: &Word, nu: &Word) -> (Word, usize) {
    let s = common_suffix_len(mu, nu);
    (mu.prefix(mu.len() - s), nu.len() - s)
}

/// `t(mu) = t(nu) != ∅`.
pub fn same_nonempty_tail(mu: &Word, nu: &Word) -> bool {
    matches!((mu.last(), nu.last()), (Some(a), Some(b)) if a == b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa_v(&w("21"), &w("")), 0);
        assert_eq!(kappa_v(&w("21"), &w("31")), 1);
        assert_eq!(kappa_v(&w("221"), &w("331")), 2);
        assert_eq!(kappa_v(&w("211"), &w("11")), 0);
    }

    #[test]
    fn common_parts_examples() {
        assert_eq!(common_parts(&w("12"), &w("12")), (w("12"), w("12")));
        assert_eq!(common_parts(&w("221"), &w("331")), (w("1"), w("")));
        assert_eq!(common_parts(&w("2"), &w("23")).1, w("2"));
    }

    #[test]
    fn strip_examples() {
        assert_eq!(strip(&w("21"), &w("31")), (w("2"), 1));
        assert_eq!(strip(&w("12"), &w("")), (w("12"), 0));
        assert_eq!(strip(&w("11"), &w("1")), (w("1"), 0));
    }

    #[test]
    fn enumeration_order() {
        let a = Alphabet::new(2).unwrap();
        let ws: Vec<String> = a.words_up_to(2).iter().map(|x| x.to_string()).collect();
        assert_eq!(ws, ["∅", "1", "2", "11", "12", "21", "22"]);
        assert!(Alphabet::new(1).is_err());
        assert!(a.check(&w("13")).is_err());
    }

    /// Exhaustive check of the letter-extension identity up to length 5.
    #[test]
    fn kappa_extension_identity_exhaustive() {
        for n in [2u32, 3] {
            let a = Alphabet::new(n).unwrap();
            let max = if n == 2 { 5 } else { 3 };
            let words = a.words_up_to(max);
            for mu in &words {
                for nu in &words {
                    for i in a.letters() {
                        for j in a.letters() {
                            let lhs = kappa_v(&mu.push(i), &nu.push(j));
                            let rhs = if i == j { kappa_v(mu, nu) } else { nu.len() + 1 };
                            assert_eq!(lhs, rhs, "mu={mu} nu={nu} i={i} j={j}");
                        }
                    }
                }
            }
        }
    }

    fn arb_word(n: u8, max: usize) -> impl Strategy<Value = Word> {
        proptest::collection::vec(1..=n, 0..=max).prop_map(Word::new)
    }

    proptest! {
        #[test]
        fn kappa_bounds(mu in arb_word(3, 7), nu in arb_word(3, 7)) {
            let k = kappa_v(&mu, &nu);
            prop_assert!(k <= nu.len());
        }

        #[test]
        fn strip_leaves_no_common_suffix(mu in arb_word(3, 7), nu in arb_word(3, 7)) {
            let (mu0, k) = strip(&mu, &nu);
            prop_assert_eq!(k, kappa_v(&mu, &nu));
            prop_assert_eq!(mu0.len() as i64, mu.len() as i64 - nu.len() as i64 + k as i64);
            let nu0 = nu.prefix(k);
            prop_assert_eq!(common_suffix_len(&mu0, &nu0), 0);
        }
    }
}
