//! What each experiment exercises.

use crate::config::ExperimentKind;

pub struct Entry {
    pub kind: ExperimentKind,
    pub anchor: &'static str,
    pub summary: &'static str,
}

pub fn entries() -> Vec<Entry> {
    ExperimentKind::ALL
        .into_iter()
        .map(|kind| {
            let (anchor, summary) = match kind {
                ExperimentKind::Oracle => (
                    "Theorem 2.1",
                    "solver against the heat closed form or the Cole-Hopf series",
                ),
                ExperimentKind::Contraction => (
                    "Theorem 3.1",
                    "strict L1 contraction of a pair, with the w+/w- split and the Harnack certificate",
                ),
                ExperimentKind::Dissipativity => (
                    "Theorem 2.2",
                    "uniform H1/H2 bounds after the entry time and the Kruzhkov ceiling",
                ),
                ExperimentKind::HarnackSweep => (
                    "Harnack inequality for the linear equation",
                    "distribution of the Harnack ratio theta over random data",
                ),
                ExperimentKind::Pullback => (
                    "Theorem 4.1",
                    "pullback construction of the bounded solution and its exponential attraction",
                ),
                ExperimentKind::StochasticSync => (
                    "Theorem 4.3",
                    "synchronization of two solutions under a common random force",
                ),
                ExperimentKind::FullSuite => (
                    "Theorem 3.1 and Theorem 4.1",
                    "q, gamma and theta over the regression corpus",
                ),
            };
            Entry { kind, anchor, summary }
        })
        .collect()
}

pub fn render() -> String {
    entries()
        .iter()
        .map(|e| format!("{} → {}\n    {}\n", e.kind.name(), e.anchor, e.summary))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_entry_per_kind() {
        let text = render();
        assert_eq!(entries().len(), ExperimentKind::ALL.len());
        assert!(text.contains("contraction → Theorem 3.1"));
        assert!(text.contains("stochastic_sync → Theorem 4.3"));
    }
}
