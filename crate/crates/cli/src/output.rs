use std::fmt::Write as _;
use std::path::Path;

use mlab_core::zeros::{ZeroKind, ZeroReport};

/// `h,M` rows with 17 significant digits.
pub fn melnikov_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("h,M\n");
    for (h, m) in samples {
        let _ = writeln!(out, "{h:.16e},{m:.16e}");
    }
    out
}

/// Static line plot of `M(h)` with the reported zeros marked.
pub fn melnikov_svg(report: &ZeroReport) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const PAD: f64 = 40.0;
    let s = &report.samples;
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    if s.len() >= 2 {
        let (h0, h1) = (s[0].0, s[s.len() - 1].0);
        let top = s.iter().fold(0f64, |a, p| a.max(p.1.abs())).max(f64::MIN_POSITIVE);
        let px = |h: f64| PAD + (h - h0) / (h1 - h0) * (W - 2.0 * PAD);
        let py = |m: f64| H / 2.0 - m / top * (H / 2.0 - PAD);
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{y}" x2="{x2}" y2="{y}" stroke="gray" stroke-width="1"/>"#,
            y = H / 2.0,
            x2 = W - PAD
        );
        let pts: Vec<String> = s.iter().map(|&(h, m)| format!("{:.2},{:.2}", px(h), py(m))).collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="black" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        for z in &report.zeros {
            let color = if z.kind == ZeroKind::SignChange { "red" } else { "orange" };
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{color}"/>"#, px(z.h), H / 2.0);
        }
        let _ = writeln!(out, r#"<text x="{PAD}" y="{}" font-size="12">h = {h0:.6}</text>"#, H - 10.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12" text-anchor="end">h = {h1:.6}</text>"#, W - PAD, H - 10.0);
        let _ = writeln!(out, r#"<text x="{PAD}" y="20" font-size="12">{} (n = {}), max |M| = {top:.3e}</text>"#, report.family, report.n);
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_file(path: &Path, body: &str) -> Result<(), String> {
    std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display()))
}
