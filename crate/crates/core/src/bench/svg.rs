use super::{BenchError, CellSummary};
use crate::metrics::Summary;
use crate::planners::PlannerKind;
use std::fmt::Write as _;
use std::path::Path;

type Metric = fn(&Summary) -> f64;

/// File stem, title and value of each histogram.
pub const HISTOGRAMS: [(&str, &str, Metric); 5] = [
    ("planning_time", "Average planning time (s)", |s| s.planning_time),
    ("success_rate", "Success rate", |s| s.success_rate),
    ("action", "Average action", |s| s.action),
    ("power", "Average power (W)", |s| s.power),
    ("smoothness", "Average smoothness", |s| s.smoothness),
];

const COLORS: [&str; 5] = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2"];
const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.3e}")
    } else {
        format!("{v:.3}")
    }
}

/// Grouped bar chart: one group per entry of `groups`, one bar per
/// planner. Infinite values are labelled but not drawn. The data table
/// is embedded as a comment.
pub fn histogram_svg(title: &str, groups: &[(String, Vec<(PlannerKind, f64)>)]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    s.push_str("<!--\ngroup,planner,value\n");
    for (g, bars) in groups {
        for (p, v) in bars {
            let _ = writeln!(s, "{g},{p},{v}");
        }
    }
    s.push_str("-->\n");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{title}</text>"#,
        WIDTH / 2.0
    );

    let finite = groups.iter().flat_map(|(_, b)| b.iter().map(|x| x.1)).filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let y_of = |v: f64| MARGIN_T + (hi - v) / span * plot_h;
    let zero_y = y_of(0.0);

    for k in 0..=4 {
        let v = lo + span * k as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            s,
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>",
            MARGIN_L + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_value(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_L}" y1="{zero_y:.2}" x2="{:.2}" y2="{zero_y:.2}" stroke="black"/>"#,
        MARGIN_L + plot_w
    );

    let group_w = plot_w / groups.len().max(1) as f64;
    for (gi, (name, bars)) in groups.iter().enumerate() {
        let gx = MARGIN_L + gi as f64 * group_w;
        let bar_w = group_w * 0.8 / bars.len().max(1) as f64;
        for (bi, (planner, v)) in bars.iter().enumerate() {
            let x = gx + group_w * 0.1 + bi as f64 * bar_w;
            let color = COLORS[PlannerKind::ALL.iter().position(|p| p == planner).unwrap_or(0) % COLORS.len()];
            if v.is_finite() {
                let y = y_of(*v);
                let (top, h) = if y < zero_y { (y, zero_y - y) } else { (zero_y, y - zero_y) };
                let _ = writeln!(
                    s,
                    r#"<rect x="{x:.2}" y="{top:.2}" width="{:.2}" height="{h:.2}" fill="{color}"><title>{planner}: {}</title></rect>"#,
                    bar_w * 0.9,
                    fmt_value(*v)
                );
            } else {
                let _ = writeln!(
                    s,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10" fill="{color}">inf</text>"#,
                    x + bar_w * 0.45,
                    zero_y - 4.0
                );
            }
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{name}</text>"#,
            gx + group_w / 2.0,
            HEIGHT - MARGIN_B + 20.0
        );
    }

    let planners: Vec<PlannerKind> = groups.first().map(|g| g.1.iter().map(|b| b.0).collect()).unwrap_or_default();
    for (i, p) in planners.iter().enumerate() {
        let y = MARGIN_T + 10.0 + i as f64 * 20.0;
        let x = WIDTH - MARGIN_R + 20.0;
        let color = COLORS[PlannerKind::ALL.iter().position(|q| q == p).unwrap_or(0) % COLORS.len()];
        let _ = writeln!(s, r#"<rect x="{x}" y="{:.2}" width="12" height="12" fill="{color}"/>"#, y - 10.0);
        let _ = writeln!(s, r#"<text x="{}" y="{y:.2}">{p}</text>"#, x + 18.0);
    }
    s.push_str("</svg>\n");
    s
}

/// Writes one SVG per entry of [`HISTOGRAMS`] into `dir`.
pub fn write_histograms(
    dir: &Path,
    cells: &[CellSummary],
    overall: &[(PlannerKind, Summary)],
    scenes: &[String],
    planners: &[PlannerKind],
) -> Result<(), BenchError> {
    for (stem, title, metric) in HISTOGRAMS {
        let mut groups: Vec<(String, Vec<(PlannerKind, f64)>)> = scenes
            .iter()
            .map(|scene| {
                let bars = planners
                    .iter()
                    .filter_map(|&p| {
                        cells
                            .iter()
                            .find(|c| &c.scene == scene && c.planner == p)
                            .map(|c| (p, metric(&c.summary)))
                    })
                    .collect();
                (scene.clone(), bars)
            })
            .collect();
        groups.push(("overall".into(), overall.iter().map(|(p, s)| (*p, metric(s))).collect()));
        let path = dir.join(format!("{stem}.svg"));
        std::fs::write(&path, histogram_svg(title, &groups)).map_err(|e| BenchError::io(&path, e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_bars_are_labelled_not_drawn() {
        let groups = vec![(
            "scene1".to_string(),
            vec![(PlannerKind::Rrt, 2.0), (PlannerKind::Est, f64::INFINITY)],
        )];
        let svg = histogram_svg("t", &groups);
        assert!(svg.contains("scene1,est,inf"));
        assert_eq!(svg.matches("<title>").count(), 1);
        assert!(svg.contains(">inf</text>"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
