//! Content-addressed store of exact non-diagonal blocks.
//!
//! One JSON file per `(operator, N, n, k)`, named by the SHA-256 of the key.
//! Entries are rational strings. A file whose schema version differs from
//! [`SCHEMA_VERSION`] is stale and gets rebuilt; an unreadable one is rebuilt
//! with a warning.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{bail, Context};
use cuntz_core::exact;
use cuntz_core::operators::{build_block, BlockOperator, BlockSource};
use cuntz_core::{Alphabet, BasisIndex, GradeIndex, OpName, Word};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Key {
    pub op: String,
    #[serde(rename = "N")]
    pub n_letters: u32,
    pub n: i64,
    pub k: usize,
}

impl Key {
    pub fn new(alphabet: Alphabet, op: OpName, grade: GradeIndex) -> Self {
        Key { op: op.as_str().to_string(), n_letters: alphabet.size(), n: grade.n, k: grade.k }
    }

    pub fn file_name(&self) -> String {
        let text = format!("{}|{}|{}|{}", self.op, self.n_letters, self.n, self.k);
        format!("{}.json", hex::encode(Sha256::digest(text.as_bytes())))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Entry {
    schema_version: u32,
    key: Key,
    /// `(μ, ν)` as letter lists.
    basis: Vec<(Vec<u8>, Vec<u8>)>,
    /// Sparse columns of `(row, rational)`.
    columns: Vec<Vec<(usize, String)>>,
}

enum Lookup {
    Hit(BlockOperator),
    Missing,
    Stale(u32),
    Corrupt(String),
}

pub struct BlockCache {
    dir: PathBuf,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl BlockCache {
    pub fn open(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating cache dir {}", dir.display()))?;
        Ok(BlockCache { dir: dir.to_path_buf(), hits: AtomicUsize::new(0), misses: AtomicUsize::new(0) })
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn path(&self, key: &Key) -> PathBuf {
        self.dir.join(key.file_name())
    }

    fn decode(alphabet: Alphabet, key: &Key, text: &str) -> anyhow::Result<Result<BlockOperator, u32>> {
        let entry: Entry = serde_json::from_str(text)?;
        if entry.schema_version != SCHEMA_VERSION {
            return Ok(Err(entry.schema_version));
        }
        if entry.key != *key {
            bail!("key mismatch: file holds {:?}", entry.key);
        }
        let grade = GradeIndex::new(key.n, key.k)?;
        let basis = entry.basis.into_iter().map(|(m, n)| BasisIndex::new(Word::new(m), Word::new(n))).collect();
        let columns = entry
            .columns
            .into_iter()
            .map(|col| {
                col.into_iter()
                    .map(|(r, v)| exact::parse(&v).map(|q| (r, q)).with_context(|| format!("bad rational `{v}`")))
                    .collect::<anyhow::Result<Vec<_>>>()
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        Ok(Ok(BlockOperator::from_columns(alphabet, grade, basis, columns)?))
    }

    fn lookup(&self, alphabet: Alphabet, key: &Key) -> Lookup {
        let text = match fs::read_to_string(self.path(key)) {
            Ok(t) => t,
            Err(_) => return Lookup::Missing,
        };
        match Self::decode(alphabet, key, &text) {
            Ok(Ok(op)) => Lookup::Hit(op),
            Ok(Err(v)) => Lookup::Stale(v),
            Err(e) => Lookup::Corrupt(format!("{e:#}")),
        }
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn store(&self, key: &Key, op: &BlockOperator) -> anyhow::Result<()> {
        let entry = Entry {
            schema_version: SCHEMA_VERSION,
            key: key.clone(),
            basis: op.basis.iter().map(|b| (b.mu.letters().to_vec(), b.nu.letters().to_vec())).collect(),
            columns: op.columns.iter().map(|c| c.iter().map(|(r, v)| (*r, exact::to_string(v))).collect()).collect(),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(self.path(key))?;
        Ok(())
    }
}

impl BlockSource for BlockCache {
    fn block(&self, alphabet: Alphabet, name: OpName, grade: GradeIndex, max_dim: usize) -> cuntz_core::Result<BlockOperator> {
        // diagonal blocks are closed forms; storing them would cost more than rebuilding
        if name.is_diagonal() {
            return build_block(alphabet, name, grade, max_dim);
        }
        let key = Key::new(alphabet, name, grade);
        let start = Instant::now();
        match self.lookup(alphabet, &key) {
            Lookup::Hit(op) => {
                self.hits.fetch_add(1, Ordering::Relaxed);
                log::info!(
                    "block op={name} N={} grade={grade} cache=hit elapsed_ms={:.3}",
                    alphabet.size(),
                    start.elapsed().as_secs_f64() * 1e3
                );
                return Ok(op);
            }
            Lookup::Missing => {}
            Lookup::Stale(v) => log::info!("block op={name} grade={grade}: schema version {v} is stale, rebuilding"),
            Lookup::Corrupt(why) => log::warn!("corrupt cache entry {}: {why}; recomputing", self.path(&key).display()),
        }
        let op = build_block(alphabet, name, grade, max_dim)?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        if let Err(e) = self.store(&key, &op) {
            log::warn!("could not write cache entry {}: {e:#}", self.path(&key).display());
        }
        log::info!(
            "block op={name} N={} grade={grade} cache=miss elapsed_ms={:.3}",
            alphabet.size(),
            start.elapsed().as_secs_f64() * 1e3
        );
        Ok(op)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use cuntz_core::operators::DEFAULT_MAX_DIM;

    fn setup() -> (tempfile::TempDir, BlockCache, Alphabet, GradeIndex) {
        let dir = tempfile::tempdir().unwrap();
        let cache = BlockCache::open(dir.path()).unwrap();
        (dir, cache, Alphabet::new(3).unwrap(), GradeIndex::new(0, 1).unwrap())
    }

    #[test]
    fn round_trip_is_exact() {
        let (_d, cache, al, g) = setup();
        let direct = build_block(al, OpName::B, g, DEFAULT_MAX_DIM).unwrap();
        let first = cache.block(al, OpName::B, g, DEFAULT_MAX_DIM).unwrap();
        let second = cache.block(al, OpName::B, g, DEFAULT_MAX_DIM).unwrap();
        assert_eq!((cache.misses(), cache.hits()), (1, 1));
        assert_eq!(first, direct);
        assert_eq!(second, direct);
    }

    #[test]
    fn stale_and_corrupt_entries_are_rebuilt() {
        let (_d, cache, al, g) = setup();
        let direct = cache.block(al, OpName::TOracle, g, DEFAULT_MAX_DIM).unwrap();
        let path = cache.path(&Key::new(al, OpName::TOracle, g));
        let text = fs::read_to_string(&path).unwrap();
        let bumped = text.replacen(&format!("\"schema_version\":{SCHEMA_VERSION}"), "\"schema_version\":0", 1);
        assert_ne!(bumped, text);
        fs::write(&path, bumped).unwrap();
        assert_eq!(cache.block(al, OpName::TOracle, g, DEFAULT_MAX_DIM).unwrap(), direct);
        assert_eq!(cache.misses(), 2);
        fs::write(&path, "{ not json").unwrap();
        assert_eq!(cache.block(al, OpName::TOracle, g, DEFAULT_MAX_DIM).unwrap(), direct);
        assert_eq!(cache.misses(), 3);
        // overwritten with a readable entry
        assert_eq!(cache.block(al, OpName::TOracle, g, DEFAULT_MAX_DIM).unwrap(), direct);
        assert_eq!(cache.hits(), 1);
    }

    #[test]
    fn file_names_are_stable_and_distinct() {
        let al = Alphabet::new(3).unwrap();
        let a = Key::new(al, OpName::B, GradeIndex::new(0, 1).unwrap());
        let b = Key::new(al, OpName::B, GradeIndex::new(1, 1).unwrap());
        assert_eq!(a.file_name(), a.clone().file_name());
        assert_ne!(a.file_name(), b.file_name());
        assert_eq!(a.file_name().len(), 64 + 5);
    }
}
