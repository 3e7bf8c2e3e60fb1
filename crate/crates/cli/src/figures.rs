//! Minimal static SVG renderers for the three report figures: the degree
//! distribution (log-log scatter), the membership-count histograms for all
//! nodes vs adopters (grouped bars), and the C(α) profile (line).

const W: f64 = 640.0;
const H: f64 = 440.0;
const ML: f64 = 70.0; // margins
const MR: f64 = 20.0;
const MT: f64 = 30.0;
const MB: f64 = 60.0;

fn header(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{title}</text>\n",
        W / 2.0
    )
}

fn axes(x_label: &str, y_label: &str) -> String {
    format!(
        "<line x1=\"{ML}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{0}\" stroke=\"black\"/>\n\
         <text x=\"{2}\" y=\"{3}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"16\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {4})\">{y_label}</text>\n",
        H - MB,
        W - MR,
        ML + (W - ML - MR) / 2.0,
        H - 20.0,
        MT + (H - MT - MB) / 2.0,
    )
}

fn x_pos(frac: f64) -> f64 {
    ML + frac * (W - ML - MR)
}

fn y_pos(frac: f64) -> f64 {
    (H - MB) - frac * (H - MT - MB)
}

fn tick_x(frac: f64, label: &str) -> String {
    let x = x_pos(frac);
    format!(
        "<line x1=\"{x}\" y1=\"{0}\" x2=\"{x}\" y2=\"{1}\" stroke=\"black\"/>\n\
         <text x=\"{x}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{label}</text>\n",
        H - MB,
        H - MB + 5.0,
        H - MB + 18.0
    )
}

fn tick_y(frac: f64, label: &str) -> String {
    let y = y_pos(frac);
    format!(
        "<line x1=\"{0}\" y1=\"{y}\" x2=\"{ML}\" y2=\"{y}\" stroke=\"black\"/>\n\
         <text x=\"{1}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{label}</text>\n",
        ML - 5.0,
        ML - 8.0,
        y + 3.0
    )
}

/// Log-log scatter of a degree histogram.
pub fn degree_distribution_svg(hist: &std::collections::BTreeMap<u32, u32>) -> String {
    let mut svg = header("Degree distribution (log-log)");
    svg.push_str(&axes("degree", "subscribers"));
    let points: Vec<(f64, f64)> = hist
        .iter()
        .filter(|(&d, &c)| d > 0 && c > 0)
        .map(|(&d, &c)| ((d as f64).ln(), (c as f64).ln()))
        .collect();
    if !points.is_empty() {
        let xmax = points.iter().map(|p| p.0).fold(f64::MIN, f64::max).max(1e-9);
        let ymax = points.iter().map(|p| p.1).fold(f64::MIN, f64::max).max(1e-9);
        for decade in 0..=(xmax / std::f64::consts::LN_10) as u32 {
            let v = 10f64.powi(decade as i32);
            svg.push_str(&tick_x(v.ln() / xmax, &format!("{v}")));
        }
        for decade in 0..=(ymax / std::f64::consts::LN_10) as u32 {
            let v = 10f64.powi(decade as i32);
            svg.push_str(&tick_y(v.ln() / ymax, &format!("{v}")));
        }
        for (lx, ly) in points {
            svg.push_str(&format!(
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.2\" fill=\"steelblue\"/>\n",
                x_pos(lx / xmax),
                y_pos(ly / ymax)
            ));
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// Grouped bars: membership count → share of all nodes vs share of adopters.
pub fn membership_histogram_svg(rows: &std::collections::BTreeMap<u32, (u32, u32)>) -> String {
    let mut svg = header("Community memberships: all subscribers vs adopters");
    svg.push_str(&axes("memberships", "share"));
    let total_all: u32 = rows.values().map(|r| r.0).sum();
    let total_adopt: u32 = rows.values().map(|r| r.1).sum();
    // Bucket counts above 10 together so the tail stays readable.
    let mut buckets: Vec<(String, f64, f64)> = Vec::new();
    let mut over_all = 0u32;
    let mut over_adopt = 0u32;
    for (&count, &(all, adopt)) in rows {
        if count > 10 {
            over_all += all;
            over_adopt += adopt;
        } else {
            buckets.push((
                count.to_string(),
                all as f64 / total_all.max(1) as f64,
                adopt as f64 / total_adopt.max(1) as f64,
            ));
        }
    }
    if over_all + over_adopt > 0 {
        buckets.push((
            ">10".to_string(),
            over_all as f64 / total_all.max(1) as f64,
            over_adopt as f64 / total_adopt.max(1) as f64,
        ));
    }
    let n = buckets.len().max(1) as f64;
    let ymax = buckets.iter().map(|b| b.1.max(b.2)).fold(0.0, f64::max).max(1e-9);
    let group = (W - ML - MR) / n;
    let bar = group * 0.35;
    for (i, (label, all, adopt)) in buckets.iter().enumerate() {
        let x0 = ML + i as f64 * group + group * 0.1;
        for (j, (value, color)) in [(all, "steelblue"), (adopt, "indianred")].iter().enumerate() {
            let height = (**value / ymax) * (H - MT - MB);
            let bx = x0 + j as f64 * bar;
            let by = (H - MB) - height;
            svg.push_str(&format!(
                "<rect x=\"{bx:.1}\" y=\"{by:.1}\" width=\"{bar:.1}\" height=\"{height:.1}\" fill=\"{color}\"/>\n"
            ));
        }
        svg.push_str(&tick_x((i as f64 + 0.5) / n, label));
    }
    for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
        svg.push_str(&tick_y(frac, &format!("{:.2}", frac * ymax)));
    }
    svg.push_str(&format!(
        "<rect x=\"{0}\" y=\"{MT}\" width=\"12\" height=\"12\" fill=\"steelblue\"/>\
         <text x=\"{1}\" y=\"{2}\" font-family=\"sans-serif\" font-size=\"11\">all</text>\n\
         <rect x=\"{0}\" y=\"{3}\" width=\"12\" height=\"12\" fill=\"indianred\"/>\
         <text x=\"{1}\" y=\"{4}\" font-family=\"sans-serif\" font-size=\"11\">adopters</text>\n",
        W - 120.0,
        W - 102.0,
        MT + 10.0,
        MT + 18.0,
        MT + 28.0
    ));
    svg.push_str("</svg>\n");
    svg
}

/// C(α) as a line over the α grid.
pub fn calpha_svg(points: &[(u32, f64)]) -> String {
    let mut svg = header("C(α): largest-component share of nodes with ≥ α memberships");
    svg.push_str(&axes("α (minimum memberships)", "C(α)"));
    if !points.is_empty() {
        let xmax = points.iter().map(|p| p.0).max().unwrap().max(1) as f64;
        let mut path = String::new();
        for (i, &(alpha, c)) in points.iter().enumerate() {
            let x = x_pos(alpha as f64 / xmax);
            let y = y_pos(c);
            path.push_str(&format!("{}{x:.1},{y:.1} ", if i == 0 { "M" } else { "L" }));
            svg.push_str(&format!("<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"3\" fill=\"steelblue\"/>\n"));
        }
        svg.push_str(&format!("<path d=\"{path}\" stroke=\"steelblue\" fill=\"none\" stroke-width=\"1.5\"/>\n"));
        for &(alpha, _) in points {
            svg.push_str(&tick_x(alpha as f64 / xmax, &alpha.to_string()));
        }
        for frac in [0.0, 0.25, 0.5, 0.75, 1.0] {
            svg.push_str(&tick_y(frac, &format!("{frac:.2}")));
        }
    }
    svg.push_str("</svg>\n");
    svg
}
