use serde::{Deserialize, Serialize};

/// A sequence sampled at explicit, strictly increasing indices.
///
/// Dense sequences carry every index of a range; lacunary sums are stored at
/// their breakpoints only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedSequence<T> {
    pub indices: Vec<u64>,
    pub values: Vec<T>,
}

impl<T> IndexedSequence<T> {
    pub fn new(indices: Vec<u64>, values: Vec<T>) -> Self {
        assert_eq!(indices.len(), values.len(), "index/value length mismatch");
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &T)> {
        self.indices.iter().copied().zip(self.values.iter())
    }

    /// Value stored at exactly `index`, if any.
    pub fn get(&self, index: u64) -> Option<&T> {
        self.indices
            .binary_search(&index)
            .ok()
            .map(|i| &self.values[i])
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> IndexedSequence<U> {
        IndexedSequence {
            indices: self.indices.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }
}
