use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Probability mass over classical bitstrings (classical bit 0 first).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution {
    probs: BTreeMap<String, f64>,
}

impl Distribution {
    pub fn from_map(probs: BTreeMap<String, f64>) -> Distribution {
        Distribution { probs }
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Distribution {
        Distribution {
            probs: pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    /// Empirical frequencies of a count table.
    pub fn from_counts(counts: &BTreeMap<String, u64>) -> Distribution {
        let total: u64 = counts.values().sum();
        let probs = counts
            .iter()
            .map(|(k, &n)| (k.clone(), if total == 0 { 0.0 } else { n as f64 / total as f64 }))
            .collect();
        Distribution { probs }
    }

    pub fn prob(&self, outcome: &str) -> f64 {
        self.probs.get(outcome).copied().unwrap_or(0.0)
    }

    pub fn contains(&self, outcome: &str) -> bool {
        self.probs.contains_key(outcome)
    }

    /// Outcomes with an entry, in sorted order.
    pub fn support(&self) -> Vec<&str> {
        self.probs.keys().map(String::as_str).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}
