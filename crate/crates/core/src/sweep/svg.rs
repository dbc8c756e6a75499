use std::fmt::Write as _;

use super::TernaryPoint;

/// A candidate drawn with an emphasized marker and a text label.
#[derive(Debug, Clone, PartialEq)]
pub struct Highlight {
    pub k: usize,
    pub label: String,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 600.0;
const SOCIAL: (f64, f64) = (320.0, 60.0);
const ECOLOGICAL: (f64, f64) = (60.0, 510.3332);
const ECONOMIC: (f64, f64) = (580.0, 510.3332);
const PALETTE: &[&str] = &["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn project(t: &TernaryPoint) -> (f64, f64) {
    (
        t.social * SOCIAL.0 + t.ecological * ECOLOGICAL.0 + t.economic * ECONOMIC.0,
        t.social * SOCIAL.1 + t.ecological * ECOLOGICAL.1 + t.economic * ECONOMIC.1,
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Ternary scatter with social at the top, ecological bottom-left and
/// economic bottom-right. Output depends only on the inputs.
pub fn render_ternary_svg(points: &[TernaryPoint], highlights: &[Highlight]) -> String {
    let mut s = String::with_capacity(points.len() * 64 + 2048);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<polygon points="{:.4},{:.4} {:.4},{:.4} {:.4},{:.4}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        SOCIAL.0, SOCIAL.1, ECOLOGICAL.0, ECOLOGICAL.1, ECONOMIC.0, ECONOMIC.1
    );
    // Gridlines at 0.2 share steps, parallel to each edge.
    for i in 1..5 {
        let f = i as f64 / 5.0;
        let g = 1.0 - f;
        let lines = [
            ((f, g, 0.0), (f, 0.0, g)),
            ((g, f, 0.0), (0.0, f, g)),
            ((g, 0.0, f), (0.0, g, f)),
        ];
        for ((a0, a1, a2), (b0, b1, b2)) in lines {
            let pa = project(&tp(a0, a1, a2));
            let pb = project(&tp(b0, b1, b2));
            let _ = writeln!(
                s,
                r##"<line x1="{:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="#cccccc" stroke-width="0.5"/>"##,
                pa.0, pa.1, pb.0, pb.1
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.4}" y="{:.4}" text-anchor="middle" font-family="sans-serif" font-size="14">Social</text>"#,
        SOCIAL.0,
        SOCIAL.1 - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.4}" y="{:.4}" text-anchor="middle" font-family="sans-serif" font-size="14">Ecological</text>"#,
        ECOLOGICAL.0,
        ECOLOGICAL.1 + 24.0
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.4}" y="{:.4}" text-anchor="middle" font-family="sans-serif" font-size="14">Economic</text>"#,
        ECONOMIC.0,
        ECONOMIC.1 + 24.0
    );
    s.push_str("<g fill=\"#555555\" fill-opacity=\"0.35\">\n");
    for t in points {
        let (x, y) = project(t);
        let _ = writeln!(s, r#"<circle cx="{x:.4}" cy="{y:.4}" r="1.5"/>"#);
    }
    s.push_str("</g>\n");
    for (i, h) in highlights.iter().enumerate() {
        let Some(t) = points.iter().find(|t| t.k == h.k) else {
            continue;
        };
        let (x, y) = project(t);
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.4}" cy="{y:.4}" r="6" fill="none" stroke="{color}" stroke-width="2"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.4}" y="{:.4}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            x + 8.0,
            y - 8.0 - 12.0 * i as f64,
            escape(&h.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn tp(social: f64, ecological: f64, economic: f64) -> TernaryPoint {
    TernaryPoint {
        k: 0,
        social,
        ecological,
        economic,
        centroid_fallback: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_map_to_corners() {
        assert_eq!(project(&tp(1.0, 0.0, 0.0)), SOCIAL);
        assert_eq!(project(&tp(0.0, 0.0, 1.0)), ECONOMIC);
    }

    #[test]
    fn deterministic_with_highlights() {
        let pts = vec![
            TernaryPoint {
                k: 1,
                ..tp(0.2, 0.3, 0.5)
            },
            TernaryPoint {
                k: 2,
                ..tp(0.6, 0.2, 0.2)
            },
        ];
        let hl = vec![Highlight {
            k: 2,
            label: "Type <A>".into(),
        }];
        let a = render_ternary_svg(&pts, &hl);
        assert_eq!(a, render_ternary_svg(&pts, &hl));
        assert_eq!(a.matches("r=\"1.5\"").count(), 2);
        assert!(a.contains("Type &lt;A&gt;"));
        assert!(a.contains(r#"<circle cx="320.0000" cy="240.1333" r="6""#));
    }
}
