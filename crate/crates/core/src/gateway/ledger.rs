//! Per-run accounting of model queries and token usage, split per fragment.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct CostLedger {
    pub total_queries: u64,
    pub total_tokens: u64,
    pub per_fragment: BTreeMap<String, FragmentCost>,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct FragmentCost {
    pub queries: u64,
    pub tokens: u64,
}

impl CostLedger {
    pub fn record(&mut self, fragment: &str, tokens: u64) {
        let entry = self.per_fragment.entry(fragment.to_string()).or_default();
        entry.queries += 1;
        entry.tokens += tokens;
        self.total_queries += 1;
        self.total_tokens += tokens;
    }

    /// Totals always equal the per-fragment sums; callers can assert this
    /// after a run.
    pub fn is_conserved(&self) -> bool {
        let q: u64 = self.per_fragment.values().map(|c| c.queries).sum();
        let t: u64 = self.per_fragment.values().map(|c| c.tokens).sum();
        q == self.total_queries && t == self.total_tokens
    }

    pub fn fragment(&self, name: &str) -> FragmentCost {
        self.per_fragment.get(name).copied().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_track_per_fragment_sums() {
        let mut ledger = CostLedger::default();
        ledger.record("atoi", 120);
        ledger.record("atoi", 80);
        ledger.record("main", 300);
        assert_eq!(ledger.total_queries, 3);
        assert_eq!(ledger.total_tokens, 500);
        assert_eq!(ledger.fragment("atoi").queries, 2);
        assert!(ledger.is_conserved());
    }
}
