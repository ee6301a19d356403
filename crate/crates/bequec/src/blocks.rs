//! Observed edge blocks keyed by group pair.

use nalgebra::DMatrix;
use std::collections::HashMap;

use crate::error::{Error, Result};

/// Map from ordered group pair `(row_group, col_group)` to a dense block.
///
/// Entries are binary in observation mode or probabilities in ideal mode.
/// Since the adjacency matrix is symmetric, a lookup for `(l, m)` falls back
/// to the transpose of a stored `(m, l)` block.
#[derive(Debug, Clone, Default)]
pub struct BlockSet {
    blocks: HashMap<(usize, usize), DMatrix<f64>>,
}

impl BlockSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, row_group: usize, col_group: usize, entries: DMatrix<f64>) {
        self.blocks.insert((row_group, col_group), entries);
    }

    pub fn contains(&self, row_group: usize, col_group: usize) -> bool {
        self.blocks.contains_key(&(row_group, col_group))
            || self.blocks.contains_key(&(col_group, row_group))
    }

    /// Returns the block for `(row_group, col_group)`, transposing the
    /// symmetric counterpart if only that one is stored.
    pub fn block(&self, row_group: usize, col_group: usize) -> Result<DMatrix<f64>> {
        if let Some(b) = self.blocks.get(&(row_group, col_group)) {
            return Ok(b.clone());
        }
        if let Some(b) = self.blocks.get(&(col_group, row_group)) {
            return Ok(b.transpose());
        }
        Err(Error::MissingBlock(row_group, col_group))
    }

    /// Stored blocks in deterministic (sorted key) order.
    pub fn iter_sorted(&self) -> impl Iterator<Item = (&(usize, usize), &DMatrix<f64>)> {
        let mut keys: Vec<_> = self.blocks.keys().collect();
        keys.sort();
        keys.into_iter().map(move |k| (k, &self.blocks[k]))
    }

    pub fn iter_sorted_mut(&mut self) -> impl Iterator<Item = ((usize, usize), &mut DMatrix<f64>)> {
        let mut entries: Vec<_> = self.blocks.iter_mut().collect();
        entries.sort_by_key(|(k, _)| **k);
        entries.into_iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}
