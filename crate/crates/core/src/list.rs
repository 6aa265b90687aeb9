//! The bounded list of `(element, score)` pairs kept by a cutoff sketch.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::score::Score;

/// Entries keyed by element, plus an index ordered by score so the maximum
/// and the tail above a cutoff are found in logarithmic time.
///
/// Iteration is in element order, which keeps every consumer of the list
/// (notably the per-entry Bernoulli subsampling) deterministic.
#[derive(Clone, Debug)]
pub struct CutoffList<K> {
    by_key: BTreeMap<K, Score>,
    by_score: BTreeSet<(Score, K)>,
    marked: Option<K>,
}

impl<K: Ord + Clone> Default for CutoffList<K> {
    fn default() -> Self {
        Self::new()
    }
}

impl<K: Ord + Clone> CutoffList<K> {
    pub fn new() -> Self {
        CutoffList {
            by_key: BTreeMap::new(),
            by_score: BTreeSet::new(),
            marked: None,
        }
    }

    pub fn len(&self) -> usize {
        self.by_key.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }

    pub fn contains(&self, key: &K) -> bool {
        self.by_key.contains_key(key)
    }

    pub fn get(&self, key: &K) -> Option<Score> {
        self.by_key.get(key).copied()
    }

    /// The entry inserted by the current step, if it is still present.
    pub fn marked(&self) -> Option<&K> {
        self.marked.as_ref().filter(|k| self.by_key.contains_key(k))
    }

    pub(crate) fn clear_mark(&mut self) {
        self.marked = None;
    }

    /// Inserts or replaces `key` and marks it as the newest entry.
    pub fn insert(&mut self, key: K, score: Score) -> Option<Score> {
        let previous = self.by_key.insert(key.clone(), score);
        if let Some(old) = previous {
            self.by_score.remove(&(old, key.clone()));
        }
        self.by_score.insert((score, key.clone()));
        self.marked = Some(key);
        previous
    }

    /// `Remove(L, a)`: drops `key` if present.
    pub fn remove(&mut self, key: &K) -> Option<Score> {
        let score = self.by_key.remove(key)?;
        self.by_score.remove(&(score, key.clone()));
        Some(score)
    }

    /// `Filter(L, p)`: keeps exactly the entries with score strictly below `p`.
    /// Returns the number of entries dropped.
    pub fn filter(&mut self, p: Score) -> usize {
        let doomed: Vec<(Score, K)> = self
            .by_score
            .iter()
            .rev()
            .take_while(|(score, _)| *score >= p)
            .cloned()
            .collect();
        for (score, key) in &doomed {
            self.by_score.remove(&(*score, key.clone()));
            self.by_key.remove(key);
        }
        doomed.len()
    }

    /// `max_scr(L)`.
    pub fn max_score(&self) -> Result<Score> {
        self.by_score
            .last()
            .map(|(score, _)| *score)
            .ok_or(Error::EmptyList)
    }

    /// Keeps the entries for which `keep` returns true and overwrites every
    /// survivor's stored value with `value`. `keep` is called once per entry
    /// in element order.
    pub(crate) fn resample(&mut self, value: Score, mut keep: impl FnMut(&K) -> bool) -> usize {
        let before = self.by_key.len();
        let survivors: Vec<K> = self.by_key.keys().filter(|k| keep(k)).cloned().collect();
        self.by_key = survivors.iter().map(|k| (k.clone(), value)).collect();
        self.by_score = survivors.into_iter().map(|k| (value, k)).collect();
        before - self.by_key.len()
    }

    /// Removes every entry whose key satisfies `doomed`.
    pub(crate) fn remove_where(&mut self, mut doomed: impl FnMut(&K) -> bool) -> usize {
        let keys: Vec<K> = self.by_key.keys().filter(|k| doomed(k)).cloned().collect();
        for key in &keys {
            self.remove(key);
        }
        keys.len()
    }

    /// Entries in element order.
    pub fn iter(&self) -> impl Iterator<Item = (&K, Score)> {
        self.by_key.iter().map(|(k, s)| (k, *s))
    }

    /// `set(L)`, in element order.
    pub fn elements(&self) -> impl Iterator<Item = &K> {
        self.by_key.keys()
    }

    pub fn entries(&self) -> Vec<(K, Score)> {
        self.iter().map(|(k, s)| (k.clone(), s)).collect()
    }
}

impl<K: Ord + Clone> FromIterator<(K, Score)> for CutoffList<K> {
    fn from_iter<I: IntoIterator<Item = (K, Score)>>(iter: I) -> Self {
        let mut list = CutoffList::new();
        for (k, s) in iter {
            list.insert(k, s);
        }
        list.marked = None;
        list
    }
}
