//! Location containment table.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use crate::error::{Error, Result};

/// `location -> containing locations`, looked up case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    names: BTreeMap<String, String>,
    parents: BTreeMap<String, BTreeSet<String>>,
}

fn key(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl Gazetteer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Build from `(location, containing location)` pairs, rejecting cycles.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self> {
        let mut g = Gazetteer::default();
        for (child, parent) in pairs {
            g.insert(child, parent);
        }
        g.check_acyclic()?;
        Ok(g)
    }

    fn insert(&mut self, child: &str, parent: &str) {
        for name in [child, parent] {
            self.names.entry(key(name)).or_insert_with(|| name.trim().to_string());
        }
        self.parents.entry(key(child)).or_default().insert(key(parent));
    }

    /// Parse `location<TAB>containing-location` lines.
    pub fn parse(src: &str, origin: &str) -> Result<Self> {
        let mut g = Gazetteer::default();
        for (n, line) in src.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_once('\t') {
                Some((c, p)) if !c.trim().is_empty() && !p.trim().is_empty() && !p.contains('\t') => {
                    g.insert(c, p)
                }
                _ => return Err(Error::parse(origin, n + 1, "expected location<TAB>containing-location")),
            }
        }
        g.check_acyclic()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&src, &path.display().to_string())
    }

    fn check_acyclic(&self) -> Result<()> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: BTreeMap<&str, u8> = BTreeMap::new();
        fn visit<'a>(g: &'a Gazetteer, k: &'a str, state: &mut BTreeMap<&'a str, u8>) -> Result<()> {
            match state.get(k) {
                Some(1) => return Err(Error::GazetteerCycle(g.names[k].clone())),
                Some(_) => return Ok(()),
                None => {}
            }
            state.insert(k, 1);
            for p in g.parents.get(k).into_iter().flatten() {
                visit(g, p, state)?;
            }
            state.insert(k, 2);
            Ok(())
        }
        for k in self.parents.keys() {
            visit(self, k, &mut state)?;
        }
        Ok(())
    }

    /// Every location transitively containing `location`, by display name.
    /// Unknown locations expand to nothing.
    pub fn containing(&self, location: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![key(location)];
        let mut seen = BTreeSet::new();
        while let Some(k) = stack.pop() {
            for p in self.parents.get(&k).into_iter().flatten() {
                if seen.insert(p.clone()) {
                    out.insert(self.names[p].clone());
                    stack.push(p.clone());
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}
