//! Addressing on the rooted semi-infinite Cayley tree of order `k`.
//!
//! Every vertex is a path of child indices from the root. The root has `k`
//! children and so does every other vertex (its remaining neighbour is its
//! parent), so the rooted tree is the complete `k`-ary tree.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Result, ZipperError};

/// Address of a vertex as the sequence of child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    path: Vec<u32>,
}

impl VertexId {
    pub fn root() -> Self {
        Self { path: Vec::new() }
    }

    pub fn from_path(path: Vec<u32>) -> Self {
        Self { path }
    }

    pub fn path(&self) -> &[u32] {
        &self.path
    }

    pub fn depth(&self) -> usize {
        self.path.len()
    }

    pub fn is_root(&self) -> bool {
        self.path.is_empty()
    }

    /// True when every child index is below `k`.
    pub fn is_valid_for(&self, k: usize) -> bool {
        self.path.iter().all(|&i| (i as usize) < k)
    }

    pub fn child(&self, index: u32) -> Self {
        let mut path = Vec::with_capacity(self.path.len() + 1);
        path.extend_from_slice(&self.path);
        path.push(index);
        Self { path }
    }

    /// The set S(x): the `k` children of this vertex.
    pub fn children(&self, k: usize) -> Result<Vec<Self>> {
        check_order(k)?;
        if !self.is_valid_for(k) {
            return Err(ZipperError::Domain(format!("{self} is not a vertex of the order-{k} tree")));
        }
        Ok((0..k as u32).map(|i| self.child(i)).collect())
    }

    /// The vertex one step closer to the root.
    pub fn parent(&self) -> Result<Self> {
        match self.path.split_last() {
            Some((_, rest)) => Ok(Self { path: rest.to_vec() }),
            None => Err(ZipperError::Domain("the root has no parent".into())),
        }
    }

    /// `[self, parent, ..., root]`; the reversed path from the root to `self`.
    pub fn path_to_root(&self) -> Vec<Self> {
        (0..=self.path.len())
            .rev()
            .map(|len| Self { path: self.path[..len].to_vec() })
            .collect()
    }

    /// Position in level (breadth-first) order of the order-`k` tree.
    pub fn level_index(&self, k: usize) -> u64 {
        let offset = level_offset(k, self.depth());
        let within = self.path.iter().fold(0u64, |acc, &i| acc * k as u64 + i as u64);
        offset + within
    }

    /// Inverse of [`VertexId::level_index`].
    pub fn from_level_index(k: usize, index: u64) -> Self {
        let mut depth = 0;
        while volume(k, depth) <= index {
            depth += 1;
        }
        let mut within = index - level_offset(k, depth);
        let mut path = vec![0u32; depth];
        for slot in path.iter_mut().rev() {
            *slot = (within % k as u64) as u32;
            within /= k as u64;
        }
        Self { path }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            return f.write_str("ε");
        }
        for (i, index) in self.path.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{index}")?;
        }
        Ok(())
    }
}

impl FromStr for VertexId {
    type Err = ZipperError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "ε" || s.is_empty() {
            return Ok(Self::root());
        }
        let path = s
            .split('.')
            .map(|part| part.parse::<u32>().map_err(|_| ZipperError::Parse(format!("bad vertex address {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { path })
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn check_order(k: usize) -> Result<()> {
    if k == 0 {
        return Err(ZipperError::Domain("tree order k must be at least 1".into()));
    }
    Ok(())
}

/// |W_n| = k^n. Saturates at `u64::MAX`.
pub fn generation_size(k: usize, n: usize) -> u64 {
    (k as u64).saturating_pow(n as u32)
}

/// |V_n| = 1 + k + ... + k^n. Saturates at `u64::MAX`.
pub fn volume(k: usize, n: usize) -> u64 {
    (0..=n).fold(0u64, |acc, d| acc.saturating_add(generation_size(k, d)))
}

/// Level-order index of the first vertex at depth `d`.
pub fn level_offset(k: usize, d: usize) -> u64 {
    if d == 0 {
        0
    } else {
        volume(k, d - 1)
    }
}

/// Vertices at depth exactly `n`, in lexicographic order.
pub fn generation(k: usize, n: usize) -> impl Iterator<Item = VertexId> {
    let start = level_offset(k, n);
    let end = volume(k, n);
    (start..end).map(move |i| VertexId::from_level_index(k, i))
}

/// All vertices of V_n in level order.
pub fn vertices(k: usize, n: usize) -> impl Iterator<Item = VertexId> {
    (0..volume(k, n)).map(move |i| VertexId::from_level_index(k, i))
}

/// Level-order index of the parent of the vertex at `index` (`index > 0`).
pub(crate) fn parent_index(k: usize, index: usize) -> usize {
    (index - 1) / k
}
