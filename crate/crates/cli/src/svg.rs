//! Hand-rolled SVG bar charts of 16×16 process matrices.
//!
//! Each chart is a 16×16 grid over the Pauli-product labels II…ZZ (rows:
//! first index, columns: second index). Every cell holds a vertical bar
//! whose height is the element magnitude on a fixed 0–1 scale, colored by
//! sign, and elements above a small threshold are annotated with their
//! value. The output is plain deterministic text — the same matrix always
//! renders to the same bytes — so charts can be golden-tested directly.

use ionsim_core::linalg::CMat;
use ionsim_core::pauli::two_qubit_labels;
use std::fmt::Write as _;

/// Which scalar of each complex element is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    Abs,
    Re,
    Im,
}

impl Component {
    fn extract(self, v: num_complex::Complex64) -> f64 {
        match self {
            Component::Abs => v.norm(),
            Component::Re => v.re,
            Component::Im => v.im,
        }
    }

    /// Chart title fragment.
    pub fn label(self) -> &'static str {
        match self {
            Component::Abs => "|χ|",
            Component::Re => "Re(χ)",
            Component::Im => "Im(χ)",
        }
    }
}

const CELL: f64 = 30.0;
const LEFT: f64 = 70.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 64.0;
const RIGHT: f64 = 16.0;
/// Bars taller than full scale are clipped to the cell; the annotation
/// still shows the true value.
const FULL_SCALE: f64 = 1.0;
/// Elements at least this large (in the drawn component) get a numeric
/// annotation.
const ANNOTATE_THRESHOLD: f64 = 0.005;

fn fmt_coord(x: f64) -> String {
    format!("{x:.1}")
}

fn fmt_value(v: f64) -> String {
    ionsim_core::experiments::format_sig(v, 3)
}

/// Render one component of a 16×16 process matrix as an SVG bar chart.
pub fn chi_bar_chart(chi: &CMat, component: Component, subtitle: &str) -> String {
    assert_eq!(chi.nrows(), 16, "process matrices are 16×16");
    assert_eq!(chi.ncols(), 16, "process matrices are 16×16");
    let labels = two_qubit_labels();
    let grid = 16.0 * CELL;
    let width = LEFT + grid + RIGHT;
    let height = TOP + grid + BOTTOM;

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">",
        w = fmt_coord(width),
        h = fmt_coord(height),
    );
    let _ = writeln!(
        s,
        "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>",
        w = fmt_coord(width),
        h = fmt_coord(height),
    );
    let title = if subtitle.is_empty() {
        component.label().to_string()
    } else {
        format!("{} — {}", component.label(), subtitle)
    };
    let _ = writeln!(
        s,
        "<text x=\"{x}\" y=\"22\" font-family=\"monospace\" font-size=\"15\" \
         text-anchor=\"middle\">{title}</text>",
        x = fmt_coord(LEFT + grid / 2.0),
        title = xml_escape(&title),
    );

    // Grid background and cell bars, row-major from the top.
    for (r, row_label) in labels.iter().enumerate() {
        let y0 = TOP + r as f64 * CELL;
        // Row label (first Pauli index).
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"end\">{row_label}</text>",
            x = fmt_coord(LEFT - 8.0),
            y = fmt_coord(y0 + CELL / 2.0 + 4.0),
        );
        for (c, _) in labels.iter().enumerate() {
            let x0 = LEFT + c as f64 * CELL;
            let _ = writeln!(
                s,
                "<rect x=\"{x}\" y=\"{y}\" width=\"{cw}\" height=\"{ch}\" \
                 fill=\"#f5f5f5\" stroke=\"#dddddd\" stroke-width=\"0.5\"/>",
                x = fmt_coord(x0),
                y = fmt_coord(y0),
                cw = fmt_coord(CELL),
                ch = fmt_coord(CELL),
            );
            let value = component.extract(chi[(r, c)]);
            let magnitude = (value.abs() / FULL_SCALE).min(1.0);
            if magnitude > 0.0 {
                let bar_h = magnitude * (CELL - 2.0);
                let fill = if value >= 0.0 { "#2b6cb0" } else { "#c0392b" };
                let _ = writeln!(
                    s,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{bw}\" height=\"{bh}\" fill=\"{fill}\"/>",
                    x = fmt_coord(x0 + 5.0),
                    y = fmt_coord(y0 + CELL - 1.0 - bar_h),
                    bw = fmt_coord(CELL - 10.0),
                    bh = fmt_coord(bar_h),
                );
            }
            if value.abs() >= ANNOTATE_THRESHOLD {
                let _ = writeln!(
                    s,
                    "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"6\" \
                     text-anchor=\"middle\" fill=\"#111111\">{t}</text>",
                    x = fmt_coord(x0 + CELL / 2.0),
                    y = fmt_coord(y0 + 8.0),
                    t = fmt_value(value),
                );
            }
        }
    }

    // Column labels (second Pauli index), rotated to fit.
    for (c, col_label) in labels.iter().enumerate() {
        let x = LEFT + c as f64 * CELL + CELL / 2.0;
        let y = TOP + grid + 12.0;
        let _ = writeln!(
            s,
            "<text x=\"{x}\" y=\"{y}\" font-family=\"monospace\" font-size=\"11\" \
             text-anchor=\"end\" transform=\"rotate(-60 {x} {y})\">{col_label}</text>",
            x = fmt_coord(x),
            y = fmt_coord(y),
        );
    }

    s.push_str("</svg>\n");
    s
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
