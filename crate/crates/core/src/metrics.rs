//! Tracking-error metrics over a sampled trace.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, Vec2};
use crate::simulation::TraceRecord;
use crate::{Error, Result};

/// Start of the window that leaves out the initial transient.
pub const T_CUT: f64 = 10.0;
/// Length of the post-jump window for peaks and oscillation.
pub const JUMP_WINDOW: f64 = 5.0;
/// Moving-average span removed before measuring oscillation.
pub const SMOOTHING_SPAN: f64 = 1.0;
/// Start of the window for the worst-case error norm.
pub const SETTLE_TIME: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// Per-joint RMS tracking error over the whole run (rad).
    pub srmse: Vec2,
    /// Same, restricted to `t ≥ t_cut`.
    pub srmse_after: Vec2,
    pub t_cut: f64,
    pub jump_times: Vec<f64>,
    /// Per-joint `max |e|` in the window after each jump.
    pub peak_error_per_jump: Vec<Vec2>,
    /// Per-joint RMS of `e` minus its trailing moving average, after each jump.
    pub oscillation_index: Vec<Vec2>,
    /// Largest `‖e‖` at or after `SETTLE_TIME`.
    pub max_error_after_settle: f64,
}

/// `sqrt(mean(e_joint²))` over samples with `t ≥ t_start`.
pub fn srmse(trace: &[TraceRecord], joint: usize, t_start: f64) -> Result<f64> {
    let (sum, count) = trace
        .iter()
        .filter(|r| r.t >= t_start)
        .fold((0.0, 0usize), |(s, n), r| (s + r.e[joint] * r.e[joint], n + 1));
    if count == 0 {
        return Err(Error::EmptyWindow { t_start });
    }
    Ok(libm::sqrt(sum / count as f64))
}

fn window(trace: &[TraceRecord], from: f64, to: f64) -> &[TraceRecord] {
    let start = trace.partition_point(|r| r.t < from);
    let end = trace.partition_point(|r| r.t <= to);
    &trace[start..end.max(start)]
}

pub fn peak_error(trace: &[TraceRecord], from: f64, length: f64) -> Vec2 {
    window(trace, from, from + length).iter().fold([0.0; 2], |acc, r| {
        [acc[0].max(libm::fabs(r.e[0])), acc[1].max(libm::fabs(r.e[1]))]
    })
}

/// RMS of `e − ē` over `[from, from + length]`, where `ē` is the mean of `e`
/// over the trailing `SMOOTHING_SPAN` seconds (samples before `from`
/// included).
pub fn oscillation_index(trace: &[TraceRecord], from: f64, length: f64) -> Vec2 {
    let start = trace.partition_point(|r| r.t < from);
    let end = trace.partition_point(|r| r.t <= from + length);
    if end <= start {
        return [0.0; 2];
    }
    let mut acc = [0.0; 2];
    let mut lo = trace.partition_point(|r| r.t <= trace[start].t - SMOOTHING_SPAN);
    let mut run = [0.0; 2];
    for r in &trace[lo..start] {
        run[0] += r.e[0];
        run[1] += r.e[1];
    }
    for i in start..end {
        let t = trace[i].t;
        run[0] += trace[i].e[0];
        run[1] += trace[i].e[1];
        while trace[lo].t <= t - SMOOTHING_SPAN {
            run[0] -= trace[lo].e[0];
            run[1] -= trace[lo].e[1];
            lo += 1;
        }
        let n = (i + 1 - lo) as f64;
        for j in 0..2 {
            let d = trace[i].e[j] - run[j] / n;
            acc[j] += d * d;
        }
    }
    let count = (end - start) as f64;
    [libm::sqrt(acc[0] / count), libm::sqrt(acc[1] / count)]
}

pub fn max_error_norm(trace: &[TraceRecord], t_start: f64) -> f64 {
    trace
        .iter()
        .filter(|r| r.t >= t_start)
        .map(|r| linalg::norm2(&r.e))
        .fold(0.0, f64::max)
}

pub fn summarize(trace: &[TraceRecord], jump_times: &[f64]) -> Result<RunSummary> {
    let whole = [srmse(trace, 0, 0.0)?, srmse(trace, 1, 0.0)?];
    // short runs fall back to the whole-run figure
    let after = match (srmse(trace, 0, T_CUT), srmse(trace, 1, T_CUT)) {
        (Ok(a), Ok(b)) => [a, b],
        _ => whole,
    };
    Ok(RunSummary {
        srmse: whole,
        srmse_after: after,
        t_cut: T_CUT,
        jump_times: jump_times.to_vec(),
        peak_error_per_jump: jump_times.iter().map(|t| peak_error(trace, *t, JUMP_WINDOW)).collect(),
        oscillation_index: jump_times
            .iter()
            .map(|t| oscillation_index(trace, *t, JUMP_WINDOW))
            .collect(),
        max_error_after_settle: max_error_norm(trace, SETTLE_TIME),
    })
}

/// Which SRMSE window a comparison reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    Whole,
    AfterCut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub label: String,
    /// Per-joint SRMSE ×10³.
    pub srmse_milli: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub window: Window,
    pub rows: Vec<ComparisonRow>,
    pub baseline: String,
    pub proposed: String,
    /// `100·(I − II)/I` per joint, with I the baseline row and II the proposed row.
    pub reduction_percent: Vec2,
}

pub fn reduction_percent(baseline: f64, proposed: f64) -> f64 {
    100.0 * (baseline - proposed) / baseline
}

/// Builds a per-joint SRMSE table (×10³) with a reduction row from
/// `baseline` to `proposed`.
pub fn comparison_table(
    summaries: &[(String, RunSummary)],
    baseline: &str,
    proposed: &str,
    window: Window,
) -> Result<ComparisonTable> {
    let pick = |s: &RunSummary| match window {
        Window::Whole => s.srmse,
        Window::AfterCut => s.srmse_after,
    };
    let rows: Vec<ComparisonRow> = summaries
        .iter()
        .map(|(label, s)| {
            let v = pick(s);
            ComparisonRow {
                label: label.clone(),
                srmse_milli: [1e3 * v[0], 1e3 * v[1]],
            }
        })
        .collect();
    let find = |label: &str| {
        rows.iter()
            .find(|r| r.label == label)
            .map(|r| r.srmse_milli)
            .ok_or_else(|| Error::MissingBaseline(label.to_string()))
    };
    let one = find(baseline)?;
    let two = find(proposed)?;
    Ok(ComparisonTable {
        window,
        rows,
        baseline: baseline.to_string(),
        proposed: proposed.to_string(),
        reduction_percent: [reduction_percent(one[0], two[0]), reduction_percent(one[1], two[1])],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn rec(t: f64, e: Vec2) -> TraceRecord {
        TraceRecord {
            t,
            x: [0.0; 2],
            xdot: [0.0; 2],
            s: [0.0; 2],
            e,
            r: [0.0; 2],
            tau: [0.0; 2],
            u_ad: [0.0; 2],
            masses: [1.0; 2],
            sigma: Vec::new(),
            h_o: Vec::new(),
            w_r: Vec::new(),
            dist: Vec::new(),
            n_s: 0,
            i_star: None,
            a_r_fired: false,
        }
    }

    fn trace_of(f: impl Fn(f64) -> Vec2, dt: f64, t_end: f64) -> Vec<TraceRecord> {
        let n = libm::round(t_end / dt) as usize;
        (0..=n).map(|i| rec(i as f64 * dt, f(i as f64 * dt))).collect()
    }

    #[test]
    fn srmse_simple_signals() {
        let c = trace_of(|_| [0.01, 0.0], 0.01, 2.0);
        assert!((srmse(&c, 0, 0.0).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(srmse(&c, 1, 0.0).unwrap(), 0.0);
        let alt: Vec<TraceRecord> = (0..100)
            .map(|i| rec(i as f64, [if i % 2 == 0 { 0.3 } else { -0.3 }, 0.0]))
            .collect();
        assert!((srmse(&alt, 0, 0.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(srmse(&c, 0, 5.0), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn srmse_robust_to_sampling_density() {
        let f = |t: f64| [0.02 * libm::sin(0.5 * t) + 0.01 * libm::cos(1.3 * t), 0.0];
        let coarse = srmse(&trace_of(f, 0.01, 60.0), 0, 0.0).unwrap();
        let fine = srmse(&trace_of(f, 0.001, 60.0), 0, 0.0).unwrap();
        assert!((coarse - fine).abs() / fine < 0.02);
    }

    #[test]
    fn peaks_and_oscillation() {
        // step then ring: ringing scores well above a bare offset step
        let steady = trace_of(|t| [if t >= 10.0 { 0.05 } else { 0.0 }, 0.0], 0.01, 20.0);
        let ringing = trace_of(
            |t| [if t >= 10.0 { 0.05 * libm::sin(20.0 * t) } else { 0.0 }, 0.0],
            0.01,
            20.0,
        );
        let p = peak_error(&ringing, 10.0, 5.0);
        assert!(p[0] > 0.049 && p[0] <= 0.05 && p[1] == 0.0);
        let calm = oscillation_index(&steady, 10.0, 5.0)[0];
        let osc = oscillation_index(&ringing, 10.0, 5.0)[0];
        assert!(osc > 2.0 * calm, "{osc} vs {calm}");
        // a pure sine with period far below the smoothing span averages out
        assert!((osc - 0.05 / libm::sqrt(2.0)).abs() < 0.005);
    }

    #[test]
    fn summary_fields() {
        let t = trace_of(|t| [0.01 * t, -0.02], 0.01, 30.0);
        let s = summarize(&t, &[12.0, 20.0]).unwrap();
        assert_eq!(s.peak_error_per_jump.len(), 2);
        assert!((s.peak_error_per_jump[0][0] - 0.17).abs() < 1e-9);
        assert!((s.srmse_after[1] - 0.02).abs() < 1e-12);
        assert!(s.max_error_after_settle > 0.3);
    }

    fn summary(srmse: Vec2) -> RunSummary {
        RunSummary {
            srmse,
            srmse_after: srmse,
            t_cut: T_CUT,
            jump_times: vec![],
            peak_error_per_jump: vec![],
            oscillation_index: vec![],
            max_error_after_settle: 0.0,
        }
    }

    #[test]
    fn table_reductions() {
        let rows = vec![
            ("soft".to_string(), summary([8.8e-3, 3.8e-3])),
            ("proposed".to_string(), summary([8.2e-3, 3.6e-3])),
        ];
        let t = comparison_table(&rows, "soft", "proposed", Window::Whole).unwrap();
        assert!((t.reduction_percent[0] - 100.0 * 0.6 / 8.8).abs() < 1e-9);
        assert!((t.rows[0].srmse_milli[0] - 8.8).abs() < 1e-12);
        assert!((reduction_percent(10.0, 5.0) - 50.0).abs() < 1e-12);
        assert_eq!(reduction_percent(4.0, 4.0), 0.0);
        assert!(matches!(
            comparison_table(&rows, "nn", "proposed", Window::Whole),
            Err(Error::MissingBaseline(_))
        ));
    }

    proptest! {
        #[test]
        fn swapping_rows_flips_reduction(a in 0.1..20.0f64, b in 0.1..20.0f64) {
            let forward = reduction_percent(a, b);
            let back = reduction_percent(b, a);
            prop_assert!(forward == 0.0 || forward.signum() == -back.signum());
            // (1 - b/a) and (1 - a/b): ratio of the two magnitudes is b/a
            if (a - b).abs() > 1e-9 {
                prop_assert!(((forward / back).abs() - b / a).abs() < 1e-9 * (1.0 + b / a));
            }
        }
    }
}
