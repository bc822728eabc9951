//! Benchmark reports as aligned text tables and JSON lines.

use std::fmt::Write as _;

use serde::Serialize;

/// One planner run on one instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSample {
    pub seed: u64,
    pub completion_time: f64,
    pub reward: u32,
    pub runtime_ms: f64,
    pub robots_used: usize,
    pub swaps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub instance: String,
    pub planner: String,
    pub robots: usize,
    pub robots_used: usize,
    /// Mean share of the wall reward collected, in percent.
    pub progress: f64,
    pub t_mean: f64,
    pub t_std: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub runtime_ms: f64,
    pub reward: u32,
    pub seeds: usize,
    pub swaps: usize,
    /// Published figures for side-by-side comparison, `(label, value)`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reference: Vec<(String, f64)>,
}

impl ReportRow {
    /// Aggregates `runs` (at least one) against the wall's total reward.
    pub fn from_runs(
        instance: &str,
        planner: &str,
        robots: usize,
        total_reward: u32,
        runs: &[RunSample],
    ) -> Self {
        assert!(!runs.is_empty(), "a report row needs at least one run");
        let n = runs.len() as f64;
        let times: Vec<f64> = runs.iter().map(|r| r.completion_time).collect();
        let t_mean = times.iter().sum::<f64>() / n;
        let var = times.iter().map(|t| (t - t_mean).powi(2)).sum::<f64>() / n;
        let progress = runs
            .iter()
            .map(|r| progress(r.reward, total_reward))
            .sum::<f64>()
            / n;
        ReportRow {
            instance: instance.to_string(),
            planner: planner.to_string(),
            robots,
            robots_used: runs.iter().map(|r| r.robots_used).max().unwrap_or(0),
            progress,
            t_mean,
            t_std: var.sqrt(),
            t_min: times.iter().copied().fold(f64::INFINITY, f64::min),
            t_max: times.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            runtime_ms: runs.iter().map(|r| r.runtime_ms).sum::<f64>() / n,
            reward: runs.iter().map(|r| r.reward).min().unwrap_or(0),
            seeds: runs.len(),
            swaps: runs.iter().map(|r| r.swaps).max().unwrap_or(0),
            reference: Vec::new(),
        }
    }

    pub fn with_reference(mut self, label: &str, value: f64) -> Self {
        self.reference.push((label.to_string(), value));
        self
    }
}

/// 100 exactly when every brick of the wall is laid.
pub fn progress(reward: u32, total_reward: u32) -> f64 {
    if total_reward == 0 || reward >= total_reward {
        100.0
    } else {
        100.0 * reward as f64 / total_reward as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunReport {
    pub suite: String,
    pub rows: Vec<ReportRow>,
}

impl RunReport {
    pub fn new(suite: &str) -> Self {
        RunReport {
            suite: suite.to_string(),
            rows: Vec::new(),
        }
    }

    pub fn row(&self, instance: &str, planner: &str, robots: usize) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.instance == instance && r.planner == planner && r.robots == robots)
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let mut value = serde_json::to_value(row).expect("rows serialize");
            value["suite"] = self.suite.clone().into();
            out.push_str(&value.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut header: Vec<String> = [
            "instance", "planner", "R", "R_used", "progress", "T' mean", "T' std", "T' min",
            "T' max", "runtime ms", "swaps", "seeds",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        let mut labels: Vec<String> = Vec::new();
        for row in &self.rows {
            for (label, _) in &row.reference {
                if !labels.contains(label) {
                    labels.push(label.clone());
                }
            }
        }
        header.extend(labels.iter().cloned());

        let mut cells: Vec<Vec<String>> = vec![header];
        for row in &self.rows {
            let mut line = vec![
                row.instance.clone(),
                row.planner.clone(),
                row.robots.to_string(),
                row.robots_used.to_string(),
                format!("{:.0}%", row.progress),
                format!("{:.1}", row.t_mean),
                format!("{:.1}", row.t_std),
                format!("{:.0}", row.t_min),
                format!("{:.0}", row.t_max),
                format!("{:.2}", row.runtime_ms),
                row.swaps.to_string(),
                row.seeds.to_string(),
            ];
            for label in &labels {
                let v = row.reference.iter().find(|(l, _)| l == label);
                line.push(v.map_or("-".to_string(), |(_, v)| format!("{v}")));
            }
            cells.push(line);
        }

        let widths: Vec<usize> = (0..cells[0].len())
            .map(|c| cells.iter().map(|l| l[c].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "suite: {}", self.suite);
        for (i, line) in cells.iter().enumerate() {
            let text: Vec<String> = line
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(c, (s, w))| if c < 2 { format!("{s:<w$}") } else { format!("{s:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", text.join("  ").trim_end());
            if i == 0 {
                let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
                let _ = writeln!(out, "{}", "-".repeat(total));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64, t: f64, reward: u32) -> RunSample {
        RunSample {
            seed,
            completion_time: t,
            reward,
            runtime_ms: 2.0,
            robots_used: 3,
            swaps: 0,
        }
    }

    #[test]
    fn aggregates() {
        let row = ReportRow::from_runs("w", "grasp", 3, 32, &[sample(0, 350.0, 32), sample(1, 370.0, 32)]);
        assert_eq!(row.t_mean, 360.0);
        assert_eq!(row.t_std, 10.0);
        assert_eq!(row.progress, 100.0);
        assert_eq!(row.seeds, 2);
    }

    #[test]
    fn progress_is_full_only_at_total_reward() {
        assert_eq!(progress(32, 32), 100.0);
        assert!(progress(31, 32) < 100.0);
        assert_eq!(progress(0, 0), 100.0);
    }

    #[test]
    fn table_and_json() {
        let mut report = RunReport::new("table5");
        report.rows.push(
            ReportRow::from_runs("wall_5", "grasp", 3, 8, &[sample(0, 160.0, 8)]).with_reference("published T'", 160.0),
        );
        let table = report.to_table();
        assert!(table.contains("wall_5"));
        assert!(table.contains("published T'"));
        let json = report.to_json_lines();
        assert_eq!(json.lines().count(), 1);
        assert!(json.contains("\"suite\":\"table5\""));
    }
}
