use std::fmt::Write;

use serde::Serialize;

use crate::error::Result;
use crate::scenario::Scenario;
use crate::sim::run;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct TableRow {
    pub lingo_spec: String,
    pub strategy: String,
    pub attacker_sent: u64,
    pub attacker_accepted: u64,
    pub accept_rate: f64,
    /// Half-width of the normal-approximation 95% interval on `accept_rate`.
    pub ci_half_width: f64,
}

/// Runs each scenario and summarizes its attack, sorted by lingo then strategy.
pub fn attack_table(scenarios: &[Scenario]) -> Result<Vec<TableRow>> {
    let mut rows = scenarios
        .iter()
        .map(|s| {
            let r = run(s)?;
            let n = r.attacker_sent.max(1) as f64;
            let p = r.attacker_accept_rate;
            Ok(TableRow {
                lingo_spec: s.lingo_spec.clone(),
                strategy: s.attacker.to_string(),
                attacker_sent: r.attacker_sent,
                attacker_accepted: r.attacker_accepted,
                accept_rate: p,
                ci_half_width: 1.96 * (p * (1.0 - p) / n).sqrt(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| (&a.lingo_spec, &a.strategy).cmp(&(&b.lingo_spec, &b.strategy)));
    Ok(rows)
}

/// Fixed-width text rendering of [`attack_table`] rows.
pub fn render(rows: &[TableRow]) -> String {
    let w = rows.iter().map(|r| r.lingo_spec.len()).chain([5]).max().unwrap_or(5);
    let sw = rows.iter().map(|r| r.strategy.len()).chain([8]).max().unwrap_or(8);
    let mut out =
        format!("{:w$}  {:sw$}  {:>9}  {:>9}  {:>8}  {:>8}\n", "lingo", "strategy", "sent", "accepted", "rate", "±95%");
    for r in rows {
        let _ = writeln!(
            out,
            "{:w$}  {:sw$}  {:>9}  {:>9}  {:>8.4}  {:>8.4}",
            r.lingo_spec, r.strategy, r.attacker_sent, r.attacker_accepted, r.accept_rate, r.ci_half_width
        );
    }
    out
}
