use std::fmt::Write;

use super::report::ReportDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Panel {
    /// Net benefit per model with the treat-all and treat-none curves.
    Decision,
    /// PPV per model, the diagonal, and a dotted treat-all comparison curve per model.
    Ppv,
    /// Event rates above and below the threshold against the diagonal.
    Calibration,
}

impl Panel {
    pub fn file_stem(self) -> &'static str {
        match self {
            Panel::Decision => "decision",
            Panel::Ppv => "ppv",
            Panel::Calibration => "calibration",
        }
    }
}

/// Layout and colour constants shared by every panel.
#[derive(Debug, Clone, Copy)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin_left: f64,
    pub margin_right: f64,
    pub margin_top: f64,
    pub margin_bottom: f64,
    /// Model colours, assigned by position in the report.
    pub palette: &'static [&'static str],
    pub reference_color: &'static str,
    pub treat_all_color: &'static str,
    pub dotted: &'static str,
    pub dashed: &'static str,
    pub nb_floor: f64,
}

pub const STYLE: SvgStyle = SvgStyle {
    width: 800.0,
    height: 600.0,
    margin_left: 70.0,
    margin_right: 170.0,
    margin_top: 40.0,
    margin_bottom: 60.0,
    palette: &[
        "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
    ],
    reference_color: "#7f7f7f",
    treat_all_color: "#000000",
    dotted: "2,4",
    dashed: "8,4",
    nb_floor: -0.05,
};

struct Series {
    label: String,
    color: &'static str,
    dash: Option<&'static str>,
    points: Vec<Option<(f64, f64)>>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        let w = STYLE.width - STYLE.margin_left - STYLE.margin_right;
        STYLE.margin_left + (x - self.x.0) / (self.x.1 - self.x.0) * w
    }

    fn py(&self, y: f64) -> f64 {
        let h = STYLE.height - STYLE.margin_top - STYLE.margin_bottom;
        STYLE.height - STYLE.margin_bottom - (y - self.y.0) / (self.y.1 - self.y.0) * h
    }
}

fn color(i: usize) -> &'static str {
    STYLE.palette[i % STYLE.palette.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Fixed two-decimal coordinates; avoids printing `-0.00`.
fn c(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Renders one panel as a standalone SVG 1.1 document.
///
/// Values outside the plotting range (for example treat-all PPV references
/// above 1) are clipped here only; the report keeps them as computed.
pub fn render_svg(doc: &ReportDocument, which: Panel) -> String {
    let ts: Vec<f64> = doc
        .models
        .first()
        .map(|m| m.points.iter().map(|p| *p.t.value()).collect())
        .unwrap_or_else(|| doc.metadata.grid.points());
    let mut series = Vec::new();
    let diagonal = || Series {
        label: "treat none (PPV = t)".into(),
        color: STYLE.reference_color,
        dash: None,
        points: ts.iter().map(|&t| Some((t, t))).collect(),
    };

    let (title, y_label, y_range) = match which {
        Panel::Decision => {
            for (i, m) in doc.models.iter().enumerate() {
                series.push(Series {
                    label: m.name.clone(),
                    color: color(i),
                    dash: None,
                    points: m.points.iter().map(|p| Some((*p.t.value(), p.nb_model))).collect(),
                });
            }
            if let Some(m) = doc.models.first() {
                series.push(Series {
                    label: "treat all".into(),
                    color: STYLE.treat_all_color,
                    dash: None,
                    points: m.points.iter().map(|p| Some((*p.t.value(), p.nb_all))).collect(),
                });
            }
            series.push(Series {
                label: "treat none".into(),
                color: STYLE.reference_color,
                dash: None,
                points: ts.iter().map(|&t| Some((t, 0.0))).collect(),
            });
            let values = series.iter().flat_map(|s| s.points.iter().flatten().map(|p| p.1));
            let (lo, hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            let lo = lo.max(STYLE.nb_floor);
            let hi = if hi - lo < 1e-9 { lo + 0.05 } else { hi + 0.05 * (hi - lo) };
            ("Decision curve", "Net benefit", (lo, hi))
        }
        Panel::Ppv => {
            series.push(diagonal());
            for (i, m) in doc.models.iter().enumerate() {
                series.push(Series {
                    label: format!("{} PPV", m.name),
                    color: color(i),
                    dash: None,
                    points: m.points.iter().map(|p| Some((*p.t.value(), p.ppv))).collect(),
                });
                series.push(Series {
                    label: format!("{} treat-all comparison", m.name),
                    color: color(i),
                    dash: Some(STYLE.dotted),
                    points: m
                        .points
                        .iter()
                        .map(|p| p.ppv_all_ref.map(|r| (*p.t.value(), r)))
                        .collect(),
                });
            }
            ("PPV curve", "Positive predictive value", (0.0, 1.0))
        }
        Panel::Calibration => {
            series.push(Series {
                label: "event rate = t".into(),
                ..diagonal()
            });
            for (i, m) in doc.models.iter().enumerate() {
                series.push(Series {
                    label: format!("{} rate at/above t", m.name),
                    color: color(i),
                    dash: None,
                    points: m
                        .points
                        .iter()
                        .map(|p| p.calibration.y_above.map(|y| (*p.t.value(), y)))
                        .collect(),
                });
                series.push(Series {
                    label: format!("{} rate below t", m.name),
                    color: color(i),
                    dash: Some(STYLE.dashed),
                    points: m
                        .points
                        .iter()
                        .map(|p| p.calibration.y_below.map(|y| (*p.t.value(), y)))
                        .collect(),
                });
            }
            ("Threshold calibration", "Observed event rate", (0.0, 1.0))
        }
    };

    let (x0, x1) = match (ts.first(), ts.last()) {
        (Some(&a), Some(&b)) if b > a => (a, b),
        (Some(&a), _) => ((a - 0.05).max(0.0), (a + 0.05).min(1.0)),
        _ => (0.0, 1.0),
    };
    let frame = Frame {
        x: (x0, x1),
        y: y_range,
    };
    draw(&frame, title, y_label, &series)
}

fn draw(frame: &Frame, title: &str, y_label: &str, series: &[Series]) -> String {
    let (left, top) = (STYLE.margin_left, STYLE.margin_top);
    let right = STYLE.width - STYLE.margin_right;
    let bottom = STYLE.height - STYLE.margin_bottom;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
        w = STYLE.width,
        h = STYLE.height
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot-area"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath></defs>"#,
        c(left),
        c(top),
        c(right - left),
        c(bottom - top)
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="16">{}</text>"#,
        c((left + right) / 2.0),
        c(top / 2.0 + 6.0),
        title
    );

    // axes and ticks
    let _ = writeln!(s, r#"<g stroke="black" stroke-width="1">"#);
    let _ = writeln!(s, r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/>"#, l = c(left), r = c(right), b = c(bottom));
    let _ = writeln!(s, r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}"/>"#, l = c(left), t = c(top), b = c(bottom));
    for k in 0..=5 {
        let x = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 5.0;
        let y = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 5.0;
        let (px, py) = (frame.px(x), frame.py(y));
        let _ = writeln!(s, r#"<line x1="{x}" y1="{b}" x2="{x}" y2="{b2}"/>"#, x = c(px), b = c(bottom), b2 = c(bottom + 5.0));
        let _ = writeln!(s, r#"<line x1="{l2}" y1="{y}" x2="{l}" y2="{y}"/>"#, y = c(py), l = c(left), l2 = c(left - 5.0));
    }
    let _ = writeln!(s, "</g>");
    for k in 0..=5 {
        let x = frame.x.0 + (frame.x.1 - frame.x.0) * k as f64 / 5.0;
        let y = frame.y.0 + (frame.y.1 - frame.y.0) * k as f64 / 5.0;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            c(frame.px(x)),
            c(bottom + 20.0),
            c(x)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            c(left - 8.0),
            c(frame.py(y) + 4.0),
            c(y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">Threshold probability</text>"#,
        c((left + right) / 2.0),
        c(STYLE.height - 15.0)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{y}" text-anchor="middle" transform="rotate(-90 18 {y})">{label}</text>"#,
        y = c((top + bottom) / 2.0),
        label = y_label
    );

    // curves, broken wherever a value is absent
    let _ = writeln!(s, r#"<g clip-path="url(#plot-area)" fill="none" stroke-width="2">"#);
    for series in series {
        for run in series.points.split(|p| p.is_none()).filter(|r| !r.is_empty()) {
            let coords: Vec<String> = run
                .iter()
                .flatten()
                .map(|&(x, y)| format!("{},{}", c(frame.px(x)), c(frame.py(y))))
                .collect();
            let dash = series
                .dash
                .map(|d| format!(r#" stroke-dasharray="{d}""#))
                .unwrap_or_default();
            let _ = writeln!(
                s,
                r#"<polyline stroke="{}"{} points="{}"/>"#,
                series.color,
                dash,
                coords.join(" ")
            );
        }
    }
    let _ = writeln!(s, "</g>");

    // legend
    let _ = writeln!(s, r#"<g font-size="11">"#);
    for (i, series) in series.iter().enumerate() {
        let y = top + 10.0 + 18.0 * i as f64;
        let x = right + 12.0;
        let dash = series
            .dash
            .map(|d| format!(r#" stroke-dasharray="{d}""#))
            .unwrap_or_default();
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"{}/>"#,
            c(x),
            c(x + 24.0),
            series.color,
            dash,
            y = c(y)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">{}</text>"#,
            c(x + 30.0),
            c(y + 4.0),
            escape(&series.label)
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{decision_curve, ThresholdGrid};
    use crate::io::report::{ModelReport, ReportMetadata};
    use crate::metrics::PredictionSet;

    fn doc(grid: &str) -> ReportDocument {
        let data = PredictionSet::new(
            "m<1>",
            vec![0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.2, 0.1, 0.05],
            [1, 1, 0, 1, 0, 1, 0, 0, 0, 0].iter().map(|&y| y == 1).collect(),
        )
        .unwrap();
        let grid: ThresholdGrid = grid.parse().unwrap();
        ReportDocument {
            metadata: ReportMetadata::new(grid, None),
            models: vec![ModelReport {
                name: data.name().into(),
                n: 10,
                prevalence: 0.4,
                points: decision_curve(&data, &grid).unwrap().points,
                band: None,
            }],
            comparisons: vec![],
        }
    }

    #[test]
    fn decision_panel_has_three_polylines_for_one_model() {
        let svg = render_svg(&doc("0.01:0.5:0.01"), Panel::Decision);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("m&lt;1&gt;"));
    }

    #[test]
    fn ppv_panel_has_diagonal_and_dotted_reference() {
        let svg = render_svg(&doc("0.01:0.5:0.01"), Panel::Ppv);
        assert!(svg.contains("treat none (PPV = t)"));
        assert_eq!(svg.matches(r#"stroke-dasharray="2,4""#).count(), 2); // curve + legend
    }

    #[test]
    fn reference_gaps_break_the_polyline() {
        // nobody is selected above 0.9 on D0, so the dotted curve stops there
        let svg = render_svg(&doc("0.85:0.95:0.05"), Panel::Ppv);
        let dotted = svg
            .lines()
            .filter(|l| l.starts_with("<polyline") && l.contains("2,4"))
            .count();
        assert_eq!(dotted, 1);
        let svg = render_svg(&doc("0.85:0.95:0.05"), Panel::Calibration);
        assert!(svg.contains("rate at/above t"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let d = doc("0.01:0.5:0.01");
        for panel in [Panel::Decision, Panel::Ppv, Panel::Calibration] {
            assert_eq!(render_svg(&d, panel), render_svg(&d, panel));
        }
    }
}
