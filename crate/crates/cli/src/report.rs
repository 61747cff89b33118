//! Human-readable and CSV comparison reports.
//!
//! One column per planned system, one row per headline metric, with a
//! relative NPC difference against the first column when several systems
//! are shown. Formatting follows the usual reporting precision: whole
//! dollars for NPC, three decimals for cost of energy, two decimals of a
//! percent for unmet fractions.

use std::fmt::Write as _;

use mgplan_core::PlanSolution;

/// Whole-dollar amount with thousands separators.
pub fn dollars(value: f64) -> String {
    let rounded = value.round() as i64;
    let negative = rounded < 0;
    let digits = rounded.unsigned_abs().to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    if negative {
        format!("-{out}")
    } else {
        out
    }
}

fn option_metric(value: Option<f64>, precision: usize) -> String {
    match value {
        Some(v) => format!("{v:.precision$}"),
        None => "-".into(),
    }
}

/// Relative NPC difference vs the baseline, e.g. "-7.48%".
fn npc_diff(npc: f64, baseline: f64) -> String {
    if baseline == 0.0 {
        return "-".into();
    }
    format!("{:+.2}%", (npc / baseline - 1.0) * 100.0)
}

struct Row {
    metric: &'static str,
    cells: Vec<String>,
}

fn rows(solutions: &[(String, &PlanSolution)]) -> Vec<Row> {
    let baseline_npc = solutions[0].1.npc;
    let with_diff = solutions.len() > 1;
    let npc_cell = |s: &PlanSolution, first: bool| {
        if with_diff && !first {
            format!("{} ({})", dollars(s.npc), npc_diff(s.npc, baseline_npc))
        } else {
            dollars(s.npc)
        }
    };
    vec![
        Row {
            metric: "NPC ($)",
            cells: solutions
                .iter()
                .enumerate()
                .map(|(i, (_, s))| npc_cell(s, i == 0))
                .collect(),
        },
        Row {
            metric: "LCOE ($/kWh)",
            cells: solutions.iter().map(|(_, s)| option_metric(s.lcoe, 3)).collect(),
        },
        Row {
            metric: "PV (kW)",
            cells: solutions.iter().map(|(_, s)| format!("{:.2}", s.ratings.pv_kw)).collect(),
        },
        Row {
            metric: "WT (kW)",
            cells: solutions.iter().map(|(_, s)| format!("{:.2}", s.ratings.wt_kw)).collect(),
        },
        Row {
            metric: "BESS (kWh)",
            cells: solutions
                .iter()
                .map(|(_, s)| format!("{:.2}", s.ratings.bess_energy_kwh))
                .collect(),
        },
        Row {
            metric: "Autonomy (h)",
            cells: solutions
                .iter()
                .map(|(_, s)| option_metric(s.autonomy_hours, 1))
                .collect(),
        },
        Row {
            metric: "Unmet load (%)",
            cells: solutions
                .iter()
                .map(|(_, s)| format!("{:.2}", s.real_unserved_fraction * 100.0))
                .collect(),
        },
        Row {
            metric: "Unmet reserve (%)",
            cells: solutions
                .iter()
                .map(|(_, s)| format!("{:.2}", s.real_unmet_reserve_fraction * 100.0))
                .collect(),
        },
    ]
}

/// Side-by-side report for one or more planned systems.
///
/// Returns the aligned text table and a CSV with one row per system.
/// Every value is also present in the solution JSON; the table adds no
/// information of its own.
pub fn compare_report(solutions: &[(String, &PlanSolution)]) -> (String, String) {
    assert!(!solutions.is_empty(), "report needs at least one solution");
    let rows = rows(solutions);

    let mut widths: Vec<usize> = Vec::with_capacity(solutions.len() + 1);
    widths.push(
        rows.iter()
            .map(|r| r.metric.len())
            .max()
            .unwrap_or(0)
            .max("Metric".len()),
    );
    for (i, (label, _)) in solutions.iter().enumerate() {
        let w = rows
            .iter()
            .map(|r| r.cells[i].len())
            .max()
            .unwrap_or(0)
            .max(label.len());
        widths.push(w);
    }

    let mut table = String::new();
    let _ = write!(table, "{:<w$}", "Metric", w = widths[0]);
    for (i, (label, _)) in solutions.iter().enumerate() {
        let _ = write!(table, "  {:>w$}", label, w = widths[i + 1]);
    }
    table.push('\n');
    let total: usize = widths.iter().sum::<usize>() + 2 * solutions.len();
    table.push_str(&"-".repeat(total));
    table.push('\n');
    for row in &rows {
        let _ = write!(table, "{:<w$}", row.metric, w = widths[0]);
        for (i, cell) in row.cells.iter().enumerate() {
            let _ = write!(table, "  {:>w$}", cell, w = widths[i + 1]);
        }
        table.push('\n');
    }

    let mut csv = String::from(
        "label,npc_usd,lcoe_usd_per_kwh,pv_kw,wt_kw,bess_kwh,autonomy_h,unmet_load_pct,unmet_reserve_pct",
    );
    let with_diff = solutions.len() > 1;
    if with_diff {
        csv.push_str(",npc_diff_pct");
    }
    csv.push('\n');
    let baseline = solutions[0].1.npc;
    for (i, (label, s)) in solutions.iter().enumerate() {
        let _ = write!(
            csv,
            "{label},{:.2},{},{:.3},{:.3},{:.3},{},{:.4},{:.4}",
            s.npc,
            option_metric(s.lcoe, 4),
            s.ratings.pv_kw,
            s.ratings.wt_kw,
            s.ratings.bess_energy_kwh,
            option_metric(s.autonomy_hours, 2),
            s.real_unserved_fraction * 100.0,
            s.real_unmet_reserve_fraction * 100.0,
        );
        if with_diff {
            if i == 0 {
                csv.push(',');
            } else {
                let _ = write!(csv, ",{:.2}", (s.npc / baseline - 1.0) * 100.0);
            }
        }
        csv.push('\n');
    }

    (table, csv)
}
