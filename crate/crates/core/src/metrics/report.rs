use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::scenario::ScenarioType;

use super::ScenarioScore;

/// Aggregate over a set of scored scenarios. Scores are in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub planner: String,
    pub scenarios: usize,
    /// Mean over all scenarios.
    pub overall: f64,
    pub per_type: BTreeMap<ScenarioType, f64>,
    /// Lane-change scenarios only; `None` when there are none.
    pub drivable: Option<f64>,
    pub goal: Option<f64>,
    pub no_collision: Option<f64>,
}

/// Table columns after the planner name.
pub const REPORT_COLUMNS: [&str; 12] =
    ["Overall", "Constr.", "Acc.", "Jayw.", "Nudge", "Overt.", "LTD", "MTD", "HTD", "Driv.", "Goal", "No-Col."];

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, sum) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| sum / n as f64)
}

pub fn suite_report(planner: &str, scores: &[ScenarioScore]) -> SuiteReport {
    let per_type = ScenarioType::ALL
        .into_iter()
        .filter_map(|t| mean(scores.iter().filter(|s| s.kind == t).map(|s| s.score)).map(|m| (t, m)))
        .collect();
    let lc = || scores.iter().filter(|s| s.kind.is_lane_change());
    SuiteReport {
        planner: planner.to_owned(),
        scenarios: scores.len(),
        overall: mean(scores.iter().map(|s| s.score)).unwrap_or(0.0),
        per_type,
        drivable: mean(lc().map(|s| s.multipliers.drivable)),
        goal: mean(lc().map(|s| if s.components.lane_change_completion >= 1.0 { 1.0 } else { 0.0 })),
        no_collision: mean(lc().map(|s| s.multipliers.collision)),
    }
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_owned(), |v| format!("{}", (100.0 * v).round() as i64))
}

impl SuiteReport {
    /// Row cells in `REPORT_COLUMNS` order.
    pub fn cells(&self) -> Vec<String> {
        let mut row = vec![pct(Some(self.overall))];
        row.extend(ScenarioType::ALL.iter().map(|t| pct(self.per_type.get(t).copied())));
        row.extend([pct(self.drivable), pct(self.goal), pct(self.no_collision)]);
        row
    }

    pub fn to_markdown(&self) -> String {
        compare_reports(std::slice::from_ref(self))
    }
}

/// Markdown leaderboard, one row per report, values x100 rounded.
pub fn compare_reports(reports: &[SuiteReport]) -> String {
    let mut out = String::from("| Planner |");
    for c in REPORT_COLUMNS {
        out.push_str(&format!(" {c} |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(REPORT_COLUMNS.len()));
    out.push('\n');
    for r in reports {
        out.push_str(&format!("| {} |", r.planner));
        for c in r.cells() {
            out.push_str(&format!(" {c} |"));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: &'a str,
    #[serde(rename = "type")]
    kind: &'a str,
    planner: &'a str,
    progress: String,
    ttc: String,
    speed_limit: String,
    comfort: String,
    lane_change_completion: String,
    collision: String,
    drivable: String,
    direction: String,
    stationary: String,
    min_progress: String,
    weighted: String,
    score: String,
}

fn f6(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per scenario; numbers with six decimals.
pub fn scores_to_csv(scores: &[ScenarioScore]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for s in scores {
        let (c, m) = (&s.components, &s.multipliers);
        w.serialize(CsvRow {
            scenario: &s.scenario,
            kind: s.kind.slug(),
            planner: &s.planner,
            progress: f6(c.progress),
            ttc: f6(c.ttc),
            speed_limit: f6(c.speed_limit),
            comfort: f6(c.comfort),
            lane_change_completion: f6(c.lane_change_completion),
            collision: f6(m.collision),
            drivable: f6(m.drivable),
            direction: f6(m.direction),
            stationary: f6(m.stationary),
            min_progress: f6(m.min_progress),
            weighted: f6(s.weighted),
            score: f6(s.score),
        })
        .expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}
