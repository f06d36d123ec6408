//! Static renderings of finished runs: an aligned text table and a simple
//! accuracy-vs-round SVG.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::monitor::RoundRecord;
use crate::orchestrator::DatasetRow;

/// Renders report rows as a fixed-width text table.
pub fn render_table(rows: &[DatasetRow]) -> String {
    let header = [
        "dataset",
        "size",
        "modality",
        "method",
        "final_acc",
        "best_acc",
        "rounds",
        "round_s",
        "comm_bytes",
        "comm_s",
        "status",
    ];
    let body: Vec<[String; 11]> = rows
        .iter()
        .map(|r| {
            [
                r.name.clone(),
                r.size.to_string(),
                r.modality.to_string(),
                r.method_used.to_string(),
                format!("{:.4}", r.final_accuracy),
                format!("{:.4}", r.best_accuracy),
                r.rounds_executed.to_string(),
                format!("{:.3}", r.mean_round_time_s),
                r.comm_bytes.to_string(),
                format!("{:.3}", r.comm_time_s),
                match r.status {
                    crate::orchestrator::RunStatus::Ok => "ok".to_string(),
                    crate::orchestrator::RunStatus::Failed => "FAILED".to_string(),
                },
            ]
        })
        .collect();

    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: &mut dyn Iterator<Item = &str>| {
        let parts: Vec<String> = cells
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, &w))| {
                // text columns left-aligned, numbers right-aligned
                if i == 0 || i == 2 || i == 3 || i == 10 {
                    format!("{c:<w$}")
                } else {
                    format!("{c:>w$}")
                }
            })
            .collect();
        out.push_str(parts.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &mut header.iter().copied());
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &mut rule.iter().map(String::as_str));
    for row in &body {
        line(&mut out, &mut row.iter().map(String::as_str));
    }
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Accuracy against round, one polyline per dataset.
pub fn accuracy_svg(records: &[RoundRecord]) -> String {
    let (w, h, margin) = (720.0, 420.0, 50.0);
    let mut series: BTreeMap<&str, Vec<(usize, f64)>> = BTreeMap::new();
    // keep first-seen order for legend stability
    let mut order: Vec<&str> = Vec::new();
    for r in records {
        if !series.contains_key(r.dataset.as_str()) {
            order.push(&r.dataset);
        }
        series
            .entry(&r.dataset)
            .or_default()
            .push((r.round, r.accuracy));
    }
    let max_round = records.iter().map(|r| r.round).max().unwrap_or(1).max(2) as f64;
    let x = |round: usize| margin + (round as f64 - 1.0) / (max_round - 1.0) * (w - 2.0 * margin);
    let y = |acc: f64| h - margin - acc * (h - 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="black"/>"#,
        m = margin,
        b = h - margin,
        r = w - margin,
        t = margin
    );
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" text-anchor="end">{tick:.2}</text>"#,
            margin - 6.0,
            y(tick) + 3.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">round</text>"#,
        w / 2.0,
        h - 12.0
    );
    for (i, name) in order.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = series[name]
            .iter()
            .map(|&(r, a)| format!("{:.1},{:.1}", x(r), y(a)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="10" fill="{color}">{}</text>"#,
            w - margin + 4.0 - 160.0,
            margin + 12.0 * i as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
