//! Minimal static SVG rendering for digit histograms. Hand-written markup,
//! deterministic byte-for-byte for identical inputs.

use baire::redshift::{DigitHistogram, Series};

const BAR_WIDTH: u64 = 9;
const GROUP_GAP: u64 = 14;
const PLOT_HEIGHT: u64 = 260;
const MARGIN_LEFT: u64 = 56;
const MARGIN_TOP: u64 = 34;
const MARGIN_BOTTOM: u64 = 46;

/// One bar per (position, digit), grouped by fractional position.
pub fn digit_histogram_svg(hist: &DigitHistogram) -> String {
    let base = hist.base as u64;
    let positions = hist.precision as u64;
    let group_width = base * BAR_WIDTH;
    let width = MARGIN_LEFT + positions * (group_width + GROUP_GAP) + 16;
    let height = MARGIN_TOP + PLOT_HEIGHT + MARGIN_BOTTOM;
    let max_count = (1..=hist.precision)
        .flat_map(|k| hist.position_counts(k).iter().copied())
        .max()
        .unwrap_or(0)
        .max(1);

    let series = match hist.series {
        Series::ZSpec => "z_spec",
        Series::ZPhot => "z_phot",
    };
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"monospace\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{MARGIN_LEFT}\" y=\"20\">digit distribution per fractional position ({series}, n={})</text>\n",
        hist.n
    ));
    let baseline = MARGIN_TOP + PLOT_HEIGHT;
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{baseline}\" x2=\"{}\" y2=\"{baseline}\" stroke=\"#444\"/>\n",
        width - 8
    ));
    svg.push_str(&format!(
        "  <line x1=\"{MARGIN_LEFT}\" y1=\"{MARGIN_TOP}\" x2=\"{MARGIN_LEFT}\" y2=\"{baseline}\" stroke=\"#444\"/>\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"4\" y=\"{}\">{max_count}</text>\n",
        MARGIN_TOP + 4
    ));
    svg.push_str(&format!("  <text x=\"4\" y=\"{baseline}\">0</text>\n"));

    for k in 1..=hist.precision {
        let group_x = MARGIN_LEFT + (k as u64 - 1) * (group_width + GROUP_GAP) + GROUP_GAP / 2;
        for (digit, &count) in hist.position_counts(k).iter().enumerate() {
            let bar_h = count * PLOT_HEIGHT / max_count;
            let x = group_x + digit as u64 * BAR_WIDTH;
            let y = baseline - bar_h;
            svg.push_str(&format!(
                "  <rect x=\"{x}\" y=\"{y}\" width=\"{}\" height=\"{bar_h}\" fill=\"#4682b4\">\
                 <title>position {k}, digit {digit}: {count}</title></rect>\n",
                BAR_WIDTH - 2
            ));
        }
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\">k={k}</text>\n",
            group_x + group_width / 2 - 12,
            baseline + 18
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
