use std::fmt::Write;

use wmac_core::metrics::{ComparisonTable, Window};

fn title(window: Window) -> &'static str {
    match window {
        Window::Whole => "SRMSE x 10^3, whole run",
        Window::AfterCut => "SRMSE x 10^3, t > 10 s",
    }
}

/// Plain-text rendering with one row per controller and a reduction row.
pub fn render(table: &ComparisonTable) -> String {
    let width = table.rows.iter().map(|r| r.label.len()).max().unwrap_or(0).max(24);
    let mut out = String::new();
    let _ = writeln!(out, "{}", title(table.window));
    let _ = writeln!(out, "{:<width$}  {:>9}  {:>9}", "controller", "joint 1", "joint 2");
    for row in &table.rows {
        let mark = if row.label == table.baseline {
            " (I)"
        } else if row.label == table.proposed {
            " (II)"
        } else {
            ""
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>9.3}  {:>9.3}{mark}",
            row.label, row.srmse_milli[0], row.srmse_milli[1]
        );
    }
    let _ = writeln!(
        out,
        "{:<width$}  {:>9.1}  {:>9.1}",
        "% reduction (I to II)", table.reduction_percent[0], table.reduction_percent[1]
    );
    out
}

pub fn render_all(tables: &[ComparisonTable]) -> String {
    tables.iter().map(render).collect::<Vec<_>>().join("\n")
}
