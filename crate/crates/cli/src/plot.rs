//! SVG rendering of sweep summaries.

use std::fmt::Write as _;

use crate::sweep::GroupSummary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One curve per `ρ` (or per expected degree), `n` on a log axis; solid
/// lines are recovery rates, dashed lines mean misclassification.
pub fn render_svg(groups: &[GroupSummary]) -> String {
    let mut series: Vec<(u64, Vec<&GroupSummary>)> = Vec::new();
    for g in groups {
        let key = g.rho.to_bits();
        match series.iter_mut().find(|s| s.0 == key) {
            Some(s) => s.1.push(g),
            None => series.push((key, vec![g])),
        }
    }
    for s in &mut series {
        s.1.sort_by_key(|g| g.n);
    }
    let ns: Vec<f64> = groups.iter().map(|g| (g.n as f64).ln()).collect();
    let lo = ns.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x = |n: usize| MARGIN + ((n as f64).ln() - lo) / span * (WIDTH - 2.0 * MARGIN);
    let y = |v: f64| HEIGHT - MARGIN - v * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, y(0.0), y(1.0));
    let _ = writeln!(
        svg,
        r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#
    );
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{t}</text>"#,
            x0 - 6.0,
            y(t) + 4.0
        );
    }
    let mut ticks: Vec<usize> = groups.iter().map(|g| g.n).collect();
    ticks.sort_unstable();
    ticks.dedup();
    for n in ticks {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#,
            x(n),
            y0 + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">n</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    for (i, (_, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let line = |f: &dyn Fn(&GroupSummary) -> f64| {
            pts.iter()
                .enumerate()
                .map(|(j, g)| {
                    format!(
                        "{}{:.2} {:.2}",
                        if j == 0 { "M" } else { " L" },
                        x(g.n),
                        y(f(g))
                    )
                })
                .collect::<String>()
        };
        let rec = line(&|g| g.recovery_rate);
        let mis = line(&|g| g.mean_misclassification);
        let _ = writeln!(
            svg,
            r#"<path d="{rec}" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<path d="{mis}" fill="none" stroke="{color}" stroke-width="2" stroke-dasharray="6 4"/>"#
        );
        for g in pts {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                x(g.n),
                y(g.recovery_rate)
            );
        }
        let label = if pts[0].rho == 1.0 {
            "dense".to_string()
        } else {
            format!("ρ={:.3e}, λ≈{:.1}", pts[0].rho, pts[0].expected_degree)
        };
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">{label}</text>"#,
            x1 - 150.0,
            MARGIN + 16.0 * i as f64
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x0}" y="{}">solid: strong-recovery rate, dashed: mean misclassification</text>"#,
        MARGIN - 20.0
    );
    svg.push_str("</svg>\n");
    svg
}
