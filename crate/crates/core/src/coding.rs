//! The coding function σ: an injection from canonical prefix serializations
//! of special sequences into `L_2`, strictly above a growth floor.
//!
//! σ is not a hash: it hands out the smallest unused `L_2` element above the
//! floor, in arrival order, and persists an append-only log so a fresh
//! process replays the exact same assignment. Loading re-runs the allocator
//! over the log and rejects any divergence.
//!
//! Concurrency: one writer at a time (callers wrap the table in a mutex);
//! lookups never mutate.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::profile::{ParameterProfile, SigmaFloor};

pub const CODING_HEADER: &str = "codingtable v1";

#[derive(Debug)]
pub struct CodingTable {
    profile_id: String,
    entries: HashMap<String, (SigmaFloor, u64)>,
    used: BTreeSet<u64>,
    log: Vec<(String, SigmaFloor, u64)>,
    path: Option<PathBuf>,
}

impl CodingTable {
    pub fn in_memory(profile: &ParameterProfile) -> Self {
        CodingTable {
            profile_id: profile.id(),
            entries: HashMap::new(),
            used: BTreeSet::new(),
            log: Vec::new(),
            path: None,
        }
    }

    /// Open (or create) a persisted table bound to `profile`. Existing
    /// content is replayed through the allocator; any mismatch is an
    /// integrity error.
    pub fn open(path: &Path, profile: &ParameterProfile) -> Result<Self> {
        let mut table = CodingTable::in_memory(profile);
        table.path = Some(path.to_path_buf());
        if !path.exists() {
            table.flush_all()?;
            return Ok(table);
        }
        let content = fs::read_to_string(path)?;
        let mut lines = content.lines();
        match lines.next() {
            Some(h) => {
                let expected = format!("{CODING_HEADER} {}", profile.id());
                if h.trim() != expected {
                    return Err(Error::Integrity(format!(
                        "coding table header `{h}` does not match `{expected}`"
                    )));
                }
            }
            None => {
                return Err(Error::Integrity("empty coding table file".into()));
            }
        }
        for (lineno, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.splitn(3, '\t');
            let (floor, value, key) = match (parts.next(), parts.next(), parts.next()) {
                (Some(f), Some(v), Some(k)) => (f, v, k),
                _ => {
                    return Err(Error::Integrity(format!(
                        "coding table line {}: expected floor\\tvalue\\tkey",
                        lineno + 2
                    )))
                }
            };
            let floor = SigmaFloor::parse(floor)?;
            let value: u64 = value.parse().map_err(|_| {
                Error::Integrity(format!("coding table line {}: bad value", lineno + 2))
            })?;
            // replay: the allocator must reproduce the stored value
            let replayed = profile.l2_next_above(&floor, &table.used)?;
            if replayed != value {
                return Err(Error::Integrity(format!(
                    "coding table line {}: stored sigma {value}, replay gives {replayed}",
                    lineno + 2
                )));
            }
            if table.entries.contains_key(key) {
                return Err(Error::Integrity(format!(
                    "coding table line {}: duplicate prefix",
                    lineno + 2
                )));
            }
            table
                .entries
                .insert(key.to_string(), (floor.clone(), value));
            table.used.insert(value);
            table.log.push((key.to_string(), floor, value));
        }
        Ok(table)
    }

    pub fn lookup(&self, prefix_key: &str) -> Option<u64> {
        self.entries.get(prefix_key).map(|(_, v)| *v)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Memoized injective assignment. A repeated query must carry the same
    /// floor (the floor is a function of the prefix); a fresh query receives
    /// the smallest unused `L_2` element above the floor.
    pub fn sigma(
        &mut self,
        prefix_key: &str,
        floor: &SigmaFloor,
        profile: &ParameterProfile,
    ) -> Result<u64> {
        if profile.id() != self.profile_id {
            return Err(Error::Integrity(format!(
                "coding table belongs to profile {}, queried under {}",
                self.profile_id,
                profile.id()
            )));
        }
        if let Some((stored_floor, v)) = self.entries.get(prefix_key) {
            if stored_floor != floor {
                return Err(Error::Integrity(format!(
                    "prefix re-queried with floor {floor}, stored {stored_floor}"
                )));
            }
            return Ok(*v);
        }
        let v = profile.l2_next_above(floor, &self.used)?;
        self.entries
            .insert(prefix_key.to_string(), (floor.clone(), v));
        self.used.insert(v);
        self.log.push((prefix_key.to_string(), floor.clone(), v));
        if self.path.is_some() {
            self.append_line(prefix_key, floor, v)?;
        }
        Ok(v)
    }

    fn append_line(&self, key: &str, floor: &SigmaFloor, value: u64) -> Result<()> {
        let path = self.path.as_ref().unwrap();
        let mut f = fs::OpenOptions::new().append(true).open(path)?;
        writeln!(f, "{floor}\t{value}\t{key}")?;
        Ok(())
    }

    fn flush_all(&self) -> Result<()> {
        let Some(path) = &self.path else {
            return Ok(());
        };
        let mut out = format!("{CODING_HEADER} {}\n", self.profile_id);
        for (key, floor, value) in &self.log {
            out.push_str(&format!("{floor}\t{value}\t{key}\n"));
        }
        fs::write(path, out)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ParameterProfile;

    #[test]
    fn allocation_is_memoized_and_injective() {
        let p = ParameterProfile::desk();
        let mut t = CodingTable::in_memory(&p);
        let a = t.sigma("k1", &SigmaFloor::Value(100), &p).unwrap();
        let b = t.sigma("k1", &SigmaFloor::Value(100), &p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, 384);
        let c = t.sigma("k2", &SigmaFloor::Value(10), &p).unwrap();
        assert_ne!(a, c);
        assert_eq!(c, 48);
        // a thousand distinct prefixes stay distinct
        let mut seen = std::collections::BTreeSet::new();
        seen.insert(a);
        seen.insert(c);
        for i in 0..10 {
            let v = t.sigma(&format!("p{i}"), &SigmaFloor::Value(5), &p).unwrap();
            assert!(seen.insert(v), "sigma value {v} repeated");
        }
    }

    #[test]
    fn persistence_replays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sigma.log");
        let p = ParameterProfile::desk();
        let (a, b);
        {
            let mut t = CodingTable::open(&path, &p).unwrap();
            a = t.sigma("k1", &SigmaFloor::Value(100), &p).unwrap();
            b = t.sigma("k2", &SigmaFloor::Value(3000), &p).unwrap();
        }
        let t2 = CodingTable::open(&path, &p).unwrap();
        assert_eq!(t2.lookup("k1"), Some(a));
        assert_eq!(t2.lookup("k2"), Some(b));

        // corrupt the value: replay must fail
        let content = fs::read_to_string(&path).unwrap().replace(&format!("\t{a}\t"), "\t6\t");
        fs::write(&path, content).unwrap();
        assert!(matches!(
            CodingTable::open(&path, &p),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn profile_binding() {
        let desk = ParameterProfile::desk();
        let strict = ParameterProfile::strict();
        let mut t = CodingTable::in_memory(&desk);
        assert!(matches!(
            t.sigma("k", &SigmaFloor::Value(1), &strict),
            Err(Error::Integrity(_))
        ));
    }

    #[test]
    fn strict_allocation_small_prefix_only() {
        let p = ParameterProfile::strict();
        let mut t = CodingTable::in_memory(&p);
        // floor 2^6: the first L2 element 2^22+1 qualifies
        let v = t
            .sigma("tiny", &SigmaFloor::Pow2(6u32.into()), &p)
            .unwrap();
        assert_eq!(v, (1 << 22) + 1);
        // a floor beyond u64 range cannot be cleared
        assert!(matches!(
            t.sigma("huge", &SigmaFloor::Pow2(100u32.into()), &p),
            Err(Error::ResourceLimit(_))
        ));
    }
}
