use serde::{Deserialize, Serialize};

use super::suite::RunRecord;
use crate::corruption::CorruptionKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub successes: f64,
    pub cells: usize,
    pub rate: f64,
}

impl Rate {
    fn of<'a>(rewards: impl Iterator<Item = &'a f64>) -> Option<Rate> {
        let (mut sum, mut n) = (0.0, 0usize);
        for r in rewards {
            sum += r;
            n += 1;
        }
        (n > 0).then(|| Rate {
            successes: sum,
            cells: n,
            rate: sum / n as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KindColumn {
    pub kind: CorruptionKind,
    pub rate: Rate,
}

/// Differences against a baseline table, in rate units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deltas {
    pub baseline: String,
    pub clean: Option<f64>,
    pub kinds: Vec<(CorruptionKind, f64)>,
    pub corrupted: Option<f64>,
    pub overall: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub agent: String,
    pub label: String,
    pub clean: Option<Rate>,
    /// Kinds present in the run, in report column order.
    pub kinds: Vec<KindColumn>,
    /// Mean reward over all non-clean cells.
    pub corrupted: Option<Rate>,
    /// Mean reward over all cells, clean included.
    pub overall: Option<Rate>,
    pub errored: usize,
    pub deltas: Option<Deltas>,
}

impl MetricsTable {
    pub fn kind(&self, kind: CorruptionKind) -> Option<Rate> {
        self.kinds.iter().find(|c| c.kind == kind).map(|c| c.rate)
    }

    pub fn with_baseline(mut self, base: &MetricsTable) -> Self {
        let diff = |a: Option<Rate>, b: Option<Rate>| Some(a?.rate - b?.rate);
        self.deltas = Some(Deltas {
            baseline: base.label.clone(),
            clean: diff(self.clean, base.clean),
            kinds: self
                .kinds
                .iter()
                .filter_map(|c| Some((c.kind, c.rate.rate - base.kind(c.kind)?.rate)))
                .collect(),
            corrupted: diff(self.corrupted, base.corrupted),
            overall: diff(self.overall, base.overall),
        });
        self
    }
}

/// Clean rate, per-kind rates and both averages. Errored cells are counted
/// but excluded from every rate.
pub fn corruption_robustness(record: &RunRecord, label: &str) -> MetricsTable {
    let ok: Vec<_> = record.cells.iter().filter(|c| c.error.is_none()).collect();
    let kinds = CorruptionKind::ALL
        .iter()
        .filter_map(|&k| {
            Rate::of(ok.iter().filter(|c| c.kind == Some(k)).map(|c| &c.reward)).map(|rate| KindColumn { kind: k, rate })
        })
        .collect();
    MetricsTable {
        agent: record.agent.clone(),
        label: label.to_string(),
        clean: Rate::of(ok.iter().filter(|c| c.kind.is_none()).map(|c| &c.reward)),
        kinds,
        corrupted: Rate::of(ok.iter().filter(|c| c.kind.is_some()).map(|c| &c.reward)),
        overall: Rate::of(ok.iter().map(|c| &c.reward)),
        errored: record.cells.len() - ok.len(),
        deltas: None,
    }
}
