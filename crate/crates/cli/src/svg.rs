//! Minimal SVG scatter of P1 per run.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;

pub fn p1_scatter(exists: &[f64], gone: &[f64], threshold: f64) -> String {
    let runs = exists.len().max(1) as f64;
    let x = |i: usize| MARGIN + (i as f64 + 0.5) / runs * (WIDTH - 2.0 * MARGIN);
    let y = |p: f64| HEIGHT - MARGIN - p.clamp(0.0, 1.0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, y(0.0), y(1.0));
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" stroke="black" fill="none"/>"#);
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{tick:.2}</text>"#,
            x0 - 6.0,
            y(tick) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{:.3}" x2="{x1}" y2="{:.3}" stroke="gray" stroke-dasharray="6 4"/>"#,
        y(threshold),
        y(threshold)
    );
    for (i, &p) in exists.iter().enumerate() {
        let _ = writeln!(s, r#"<circle cx="{:.3}" cy="{:.3}" r="3.5" fill="steelblue"/>"#, x(i), y(p));
    }
    for (i, &p) in gone.iter().enumerate() {
        let _ = writeln!(s, r#"<rect x="{:.3}" y="{:.3}" width="7" height="7" fill="firebrick"/>"#, x(i) - 3.5, y(p) - 3.5);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">run</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" font-size="12" transform="rotate(-90 14 {:.1})" text-anchor="middle">P1</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    let _ = writeln!(s, r#"<circle cx="{:.1}" cy="20" r="3.5" fill="steelblue"/><text x="{:.1}" y="24" font-size="11">object exists</text>"#, x1 - 150.0, x1 - 142.0);
    let _ = writeln!(s, r#"<rect x="{:.1}" y="31" width="7" height="7" fill="firebrick"/><text x="{:.1}" y="39" font-size="11">object gone</text>"#, x1 - 153.5, x1 - 142.0);
    s.push_str("</svg>\n");
    s
}
