use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use super::ProjectState;
use crate::induction::{relation_inventory, TemplateStatus};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub iteration: u32,
    pub new_templates: usize,
    pub cumulative_templates: usize,
    pub new_instances: usize,
    pub cumulative_instances: usize,
    pub judged: usize,
    pub correct: usize,
    /// Absent when nothing was judged.
    pub precision: Option<f64>,
    pub relation_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub rows: Vec<StatsRow>,
    pub relation_count: usize,
    pub event_type_count: usize,
    pub candidate_templates: usize,
    pub accepted_templates: usize,
    pub rejected_templates: usize,
}

/// Per-iteration growth and precision. Cumulative columns are running sums
/// of the per-iteration counts.
pub fn stats(state: &ProjectState) -> StatsReport {
    let relations = relation_inventory(&state.templates);
    let event_types: BTreeSet<&str> = relations.iter().map(|r| r.event_type.as_str()).collect();

    let mut per_iteration: Vec<(u32, usize, usize, usize)> = state
        .reports
        .iter()
        .map(|r| (r.iteration, r.new_templates, r.new_instances, r.relation_count))
        .collect();
    if per_iteration.is_empty() {
        let accepted = state.templates.iter().filter(|t| t.is_accepted() && t.iteration == 0).count();
        per_iteration.push((0, accepted, state.instances.len(), relations.len()));
    }

    let mut rows = Vec::with_capacity(per_iteration.len());
    let (mut templates, mut instances) = (0, 0);
    for (iteration, new_templates, new_instances, relation_count) in per_iteration {
        templates += new_templates;
        instances += new_instances;
        let precision = state.precision(iteration);
        rows.push(StatsRow {
            iteration,
            new_templates,
            cumulative_templates: templates,
            new_instances,
            cumulative_instances: instances,
            judged: precision.map_or(0, |p| p.judged),
            correct: precision.map_or(0, |p| p.correct),
            precision: precision.map(|p| p.ratio()),
            relation_count,
        });
    }

    let counts = state.status_counts();
    let count = |s| counts.get(&s).copied().unwrap_or(0);
    StatsReport {
        rows,
        relation_count: relations.len(),
        event_type_count: event_types.len(),
        candidate_templates: count(TemplateStatus::Candidate),
        accepted_templates: count(TemplateStatus::Accepted),
        rejected_templates: count(TemplateStatus::Rejected),
    }
}

impl StatsReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:>9} {:>13} {:>13} {:>13} {:>13} {:>8} {:>9} {:>9}",
            "iteration",
            "new_templates",
            "templates",
            "new_instances",
            "instances",
            "judged",
            "precision",
            "relations"
        );
        for r in &self.rows {
            let precision = r.precision.map_or_else(|| "-".to_string(), |p| format!("{p:.4}"));
            let _ = writeln!(
                out,
                "{:>9} {:>13} {:>13} {:>13} {:>13} {:>8} {:>9} {:>9}",
                r.iteration,
                r.new_templates,
                r.cumulative_templates,
                r.new_instances,
                r.cumulative_instances,
                r.judged,
                precision,
                r.relation_count
            );
        }
        let _ = writeln!(
            out,
            "relations: {}  event types: {}  templates: {} accepted, {} candidate, {} rejected",
            self.relation_count,
            self.event_type_count,
            self.accepted_templates,
            self.candidate_templates,
            self.rejected_templates
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::tests::fixture;

    #[test]
    fn fresh_project_has_one_row() {
        let report = stats(&fixture());
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].iteration, 0);
        assert_eq!(report.rows[0].precision, None);
        assert_eq!(report.candidate_templates, 3);
        assert!(report.to_text().contains("3 candidate"));
    }
}
