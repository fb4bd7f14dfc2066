//! Report rendering: a comparison grid across strategies in text, CSV, and
//! JSON form.

use serde::{Deserialize, Serialize};

use crate::metrics::{grade, GradeSet, RunMetrics};
use crate::model::SemanticKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyReport {
    pub metrics: RunMetrics,
    pub grades: GradeSet,
}

/// Comparison across the strategies that ran; a single entry renders
/// without the comparison framing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub scenario: String,
    pub entries: Vec<StrategyReport>,
}

impl ComparisonReport {
    pub fn new(scenario: impl Into<String>, metrics: Vec<RunMetrics>) -> Self {
        ComparisonReport {
            scenario: scenario.into(),
            entries: metrics
                .into_iter()
                .map(|m| StrategyReport {
                    grades: grade(&m),
                    metrics: m,
                })
                .collect(),
        }
    }

    /// One row per strategy and metric.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("strategy,metric,value\n");
        for entry in &self.entries {
            let m = &entry.metrics;
            let s = m.strategy.slug();
            let mut push = |metric: &str, value: String| {
                out.push_str(&format!("{s},{metric},{value}\n"));
            };
            push("grade_consistency", entry.grades.consistency.to_string());
            push("grade_sovereignty", entry.grades.sovereignty.to_string());
            push("grade_ownership", entry.grades.ownership.to_string());
            push("sharing_level", entry.grades.sharing.clone());
            push("messages_total", m.messages_total.to_string());
            for (kind, count) in &m.messages_by_kind {
                push(&format!("messages_{kind}"), count.to_string());
            }
            push("foreign_writes", m.foreign_writes.to_string());
            push("max_sources", m.max_sources.to_string());
            push(
                "staleness_events",
                m.staleness
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "never".to_string()),
            );
            push("external_flag_count", m.external_flag_count.to_string());
            push(
                "own_hosted_fraction",
                format!("{:.4}", m.own_hosted_fraction),
            );
            push("denied_events", m.denied_events.to_string());
            push("phase_skips", m.phase_skips.to_string());
            for (kind, fraction) in &m.completeness_by_kind {
                push(&format!("completeness_{kind}"), format!("{fraction:.4}"));
            }
        }
        out
    }

    /// Human-readable grid mirroring the evaluation axes.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(String, Vec<String>)> = Vec::new();
        let mut row = |name: &str, values: Vec<String>| {
            rows.push((name.to_string(), values));
        };
        row(
            "digital consistency",
            self.entries
                .iter()
                .map(|e| e.grades.consistency.to_string())
                .collect(),
        );
        row(
            "data sovereignty",
            self.entries
                .iter()
                .map(|e| e.grades.sovereignty.to_string())
                .collect(),
        );
        row(
            "ownership",
            self.entries
                .iter()
                .map(|e| e.grades.ownership.to_string())
                .collect(),
        );
        row(
            "level of sharing",
            self.entries
                .iter()
                .map(|e| e.grades.sharing.clone())
                .collect(),
        );
        row(
            "messages total",
            self.entries
                .iter()
                .map(|e| e.metrics.messages_total.to_string())
                .collect(),
        );
        row(
            "foreign writes",
            self.entries
                .iter()
                .map(|e| e.metrics.foreign_writes.to_string())
                .collect(),
        );
        row(
            "sources for aggregation",
            self.entries
                .iter()
                .map(|e| e.metrics.max_sources.to_string())
                .collect(),
        );
        row(
            "staleness (events)",
            self.entries
                .iter()
                .map(|e| {
                    e.metrics
                        .staleness
                        .map(|s| s.to_string())
                        .unwrap_or_else(|| "never".to_string())
                })
                .collect(),
        );
        row(
            "external-flagged copies",
            self.entries
                .iter()
                .map(|e| e.metrics.external_flag_count.to_string())
                .collect(),
        );
        row(
            "denied events",
            self.entries
                .iter()
                .map(|e| e.metrics.denied_events.to_string())
                .collect(),
        );
        if self.entries.iter().any(|e| e.metrics.phase_skips > 0) {
            row(
                "phase skips (flagged)",
                self.entries
                    .iter()
                    .map(|e| e.metrics.phase_skips.to_string())
                    .collect(),
            );
        }
        let kinds: Vec<SemanticKind> = self
            .entries
            .first()
            .map(|e| e.metrics.completeness_by_kind.keys().copied().collect())
            .unwrap_or_default();
        for kind in kinds {
            row(
                &format!("completeness {kind}"),
                self.entries
                    .iter()
                    .map(|e| {
                        e.metrics
                            .completeness_by_kind
                            .get(&kind)
                            .map(|f| format!("{f:.2}"))
                            .unwrap_or_else(|| "-".to_string())
                    })
                    .collect(),
            );
        }

        let label_width = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8) + 2;
        let mut column_widths: Vec<usize> = self
            .entries
            .iter()
            .map(|e| e.metrics.strategy.slug().len())
            .collect();
        for (_, values) in &rows {
            for (i, v) in values.iter().enumerate() {
                column_widths[i] = column_widths[i].max(v.len());
            }
        }
        let total_width = label_width + column_widths.iter().map(|w| w + 2).sum::<usize>();

        let mut out = String::new();
        out.push_str(&format!(
            "Strategy comparison for scenario '{}'\n",
            self.scenario
        ));
        out.push_str(&"=".repeat(total_width));
        out.push('\n');
        let mut header = format!("{:<label_width$}", "");
        for (entry, width) in self.entries.iter().zip(&column_widths) {
            header.push_str(&format!(
                "{:<w$}",
                entry.metrics.strategy.slug(),
                w = width + 2
            ));
        }
        out.push_str(header.trim_end());
        out.push('\n');
        for (name, values) in &rows {
            let mut line = format!("{name:<label_width$}");
            for (value, width) in values.iter().zip(&column_widths) {
                line.push_str(&format!("{value:<w$}", w = width + 2));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out.push_str(&"=".repeat(total_width));
        out.push('\n');
        out.push_str(
            "scale: -- not fulfilled, - insufficient, + fulfilled to some extent, ++ fulfilled\n",
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
