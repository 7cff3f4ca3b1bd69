//! Native SVG 1.1 line plots of CSV tables; no plotting dependency.

use thiserror::Error;

use super::table::CsvTable;

#[derive(Debug, Error, PartialEq)]
pub enum SvgError {
    #[error("cannot plot an empty table")]
    EmptyTable,
    #[error("column {0:?} not present in the table")]
    MissingColumn(String),
    #[error("cell {value:?} in column {column:?} (row {row}) is not a number")]
    BadNumber {
        column: String,
        row: usize,
        value: String,
    },
}

/// Values at or below this are drawn at the floor on log axes (with an
/// annotation), since zero has no logarithm.
pub const LOG_PLOT_FLOOR: f64 = 1e-7;

/// What to plot from a table.
#[derive(Debug, Clone)]
pub struct AxesSpec {
    pub x_column: String,
    pub y_column: String,
    /// Rows sharing the values of these columns form one polyline.
    pub series_columns: Vec<String>,
    pub log_y: bool,
    pub title: String,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 78.0;
const RIGHT: f64 = 620.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 468.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    let s = super::table::format_sig6(v);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Series {
    key: String,
    points: Vec<(f64, f64)>,
}

/// Renders one polyline per series with circle markers, a log-scale y
/// option, axis ticks, and a legend. Byte output is a pure function of
/// the inputs.
pub fn render_svg(table: &CsvTable, axes: &AxesSpec) -> Result<String, SvgError> {
    if table.is_empty() {
        return Err(SvgError::EmptyTable);
    }
    let col = |name: &str| {
        table
            .column_index(name)
            .ok_or_else(|| SvgError::MissingColumn(name.to_string()))
    };
    let x_idx = col(&axes.x_column)?;
    let y_idx = col(&axes.y_column)?;
    let series_idx: Vec<usize> = axes
        .series_columns
        .iter()
        .map(|c| col(c))
        .collect::<Result<_, _>>()?;

    let parse = |row: usize, idx: usize, column: &str| -> Result<f64, SvgError> {
        table.rows()[row][idx]
            .parse()
            .map_err(|_| SvgError::BadNumber {
                column: column.to_string(),
                row,
                value: table.rows()[row][idx].clone(),
            })
    };

    let mut series: Vec<Series> = Vec::new();
    let mut clamped = false;
    for row in 0..table.rows().len() {
        let x = parse(row, x_idx, &axes.x_column)?;
        let mut y = parse(row, y_idx, &axes.y_column)?;
        if axes.log_y && y < LOG_PLOT_FLOOR {
            y = LOG_PLOT_FLOOR;
            clamped = true;
        }
        let key = series_idx
            .iter()
            .map(|&i| table.rows()[row][i].as_str())
            .collect::<Vec<_>>()
            .join(" / ");
        match series.iter_mut().find(|s| s.key == key) {
            Some(s) => s.points.push((x, y)),
            None => series.push(Series {
                key,
                points: vec![(x, y)],
            }),
        }
    }
    for s in &mut series {
        s.points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }

    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0))
        .collect();
    let ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .collect();
    let (x_lo, x_hi) = span(&xs);
    let (y_lo, y_hi) = if axes.log_y {
        let lo = ys
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
            .log10()
            .floor();
        let hi = ys
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
            .log10()
            .ceil();
        if lo == hi {
            (lo - 1.0, hi)
        } else {
            (lo, hi)
        }
    } else {
        let (lo, hi) = span(&ys);
        (lo.min(0.0), hi)
    };

    let to_x = |v: f64| {
        if x_hi == x_lo {
            0.5 * (LEFT + RIGHT)
        } else {
            LEFT + (v - x_lo) / (x_hi - x_lo) * (RIGHT - LEFT)
        }
    };
    let to_y = |v: f64| {
        let t = if axes.log_y { v.log10() } else { v };
        BOTTOM - (t - y_lo) / (y_hi - y_lo) * (BOTTOM - TOP)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(0.5 * (LEFT + RIGHT)),
        xml_escape(&axes.title)
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>\n",
        l = fmt_coord(LEFT),
        r = fmt_coord(RIGHT),
        t = fmt_coord(TOP),
        b = fmt_coord(BOTTOM),
    ));

    // X ticks: five even divisions.
    for i in 0..=4 {
        let v = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        let x = fmt_coord(to_x(v));
        svg.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{b2}\" stroke=\"black\"/>\n<text x=\"{x}\" y=\"{ty}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            fmt_tick(v),
            b = fmt_coord(BOTTOM),
            b2 = fmt_coord(BOTTOM + 5.0),
            ty = fmt_coord(BOTTOM + 18.0),
        ));
    }
    // Y ticks: decades on log axes, five even divisions otherwise.
    let y_ticks: Vec<(f64, String)> = if axes.log_y {
        (y_lo as i64..=y_hi as i64)
            .map(|e| (10f64.powi(e as i32), format!("1e{e}")))
            .collect()
    } else {
        (0..=4)
            .map(|i| {
                let v = y_lo + (y_hi - y_lo) * i as f64 / 4.0;
                (v, fmt_tick(v))
            })
            .collect()
    };
    for (v, label) in y_ticks {
        let y = fmt_coord(to_y(v));
        svg.push_str(&format!(
            "<line x1=\"{l2}\" y1=\"{y}\" x2=\"{l}\" y2=\"{y}\" stroke=\"black\"/>\n<text x=\"{tx}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" dominant-baseline=\"middle\">{label}</text>\n",
            l = fmt_coord(LEFT),
            l2 = fmt_coord(LEFT - 5.0),
            tx = fmt_coord(LEFT - 8.0),
        ));
    }
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        fmt_coord(0.5 * (LEFT + RIGHT)),
        fmt_coord(HEIGHT - 14.0),
        xml_escape(&axes.x_column)
    ));
    svg.push_str(&format!(
        "<text x=\"20\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">{}</text>\n",
        fmt_coord(0.5 * (TOP + BOTTOM)),
        fmt_coord(0.5 * (TOP + BOTTOM)),
        xml_escape(&axes.y_column)
    ));

    // Data.
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if s.points.len() > 1 {
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{},{}", fmt_coord(to_x(x)), fmt_coord(to_y(y))))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
        }
        for &(x, y) in &s.points {
            svg.push_str(&format!(
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>\n",
                fmt_coord(to_x(x)),
                fmt_coord(to_y(y))
            ));
        }
        let ly = TOP + 16.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{x1}\" y1=\"{y}\" x2=\"{x2}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>\n<text x=\"{tx}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" dominant-baseline=\"middle\">{}</text>\n",
            xml_escape(&s.key),
            x1 = fmt_coord(RIGHT + 12.0),
            x2 = fmt_coord(RIGHT + 34.0),
            tx = fmt_coord(RIGHT + 40.0),
            y = fmt_coord(ly),
        ));
    }

    if clamped {
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\">values below 1e-7 clamped to the plot floor 1e-7</text>\n",
            fmt_coord(LEFT),
            fmt_coord(HEIGHT - 30.0),
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn span(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::table::format_sig6;

    fn outage_axes() -> AxesSpec {
        AxesSpec {
            x_column: "snr_db".into(),
            y_column: "p_hat".into(),
            series_columns: vec!["policy".into(), "user".into()],
            log_y: true,
            title: "outage".into(),
        }
    }

    fn table(rows: &[(&str, &str, f64, f64)]) -> CsvTable {
        let mut t = CsvTable::new(vec!["policy", "user", "snr_db", "p_hat"]);
        for &(policy, user, snr, p) in rows {
            t.push_row(vec![
                policy.into(),
                user.into(),
                format_sig6(snr),
                format_sig6(p),
            ]);
        }
        t
    }

    #[test]
    fn single_row_renders_one_marker() {
        let svg = render_svg(&table(&[("qos_based", "0", 10.0, 0.25)]), &outage_axes()).unwrap();
        assert_eq!(svg.matches("<circle").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 0);
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn zero_estimates_are_clamped_with_annotation() {
        let svg = render_svg(
            &table(&[("hybrid", "1", 10.0, 0.1), ("hybrid", "1", 20.0, 0.0)]),
            &outage_axes(),
        )
        .unwrap();
        assert!(svg.contains("clamped to the plot floor 1e-7"));
        let no_zero = render_svg(&table(&[("hybrid", "1", 10.0, 0.1)]), &outage_axes()).unwrap();
        assert!(!no_zero.contains("clamped"));
    }

    #[test]
    fn deterministic_bytes() {
        let t = table(&[
            ("csi_based", "0", 0.0, 0.5),
            ("csi_based", "0", 10.0, 0.2),
            ("qos_based", "0", 0.0, 0.6),
        ]);
        assert_eq!(
            render_svg(&t, &outage_axes()).unwrap(),
            render_svg(&t, &outage_axes()).unwrap()
        );
    }

    #[test]
    fn one_polyline_per_series() {
        let t = table(&[
            ("csi_based", "0", 0.0, 0.5),
            ("csi_based", "0", 10.0, 0.2),
            ("qos_based", "0", 0.0, 0.6),
            ("qos_based", "0", 10.0, 0.3),
        ]);
        let svg = render_svg(&t, &outage_axes()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("csi_based / 0"));
    }

    #[test]
    fn rejects_empty_and_missing() {
        let empty = CsvTable::new(vec!["a"]);
        assert_eq!(
            render_svg(&empty, &outage_axes()),
            Err(SvgError::EmptyTable)
        );
        let t = table(&[("qos_based", "0", 1.0, 0.5)]);
        let mut axes = outage_axes();
        axes.x_column = "nope".into();
        assert_eq!(
            render_svg(&t, &axes),
            Err(SvgError::MissingColumn("nope".into()))
        );
    }
}
