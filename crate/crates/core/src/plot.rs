//! Minimal deterministic SVG plots: level sweeps with confidence whiskers
//! and renormalization traces. No timestamps, no randomness — identical
//! input gives identical bytes.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// estimate vs h with CI whiskers; expects the sweep CSV schema.
    Sweep,
    /// log quantities vs n; expects renormalization trace rows.
    Trace,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        if self.x1 == self.x0 {
            return W / 2.0;
        }
        MARGIN + (v - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }
    fn y(&self, v: f64) -> f64 {
        if self.y1 == self.y0 {
            return H / 2.0;
        }
        H - MARGIN - (v - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn svg_header(out: &mut impl Write) -> Result<()> {
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n"
    )?;
    Ok(())
}

fn svg_axes(out: &mut impl Write, xlab: &str, ylab: &str, f: &Frame) -> Result<()> {
    write!(
        out,
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN,
        t = MARGIN
    )?;
    write!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        H - 16.0,
        xlab
    )?;
    write!(
        out,
        "<text x=\"16\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        H / 2.0,
        H / 2.0,
        ylab
    )?;
    // corner tick labels
    write!(
        out,
        "<text x=\"{m}\" y=\"{yb}\" font-size=\"10\">{x0:.4}</text>\n\
         <text x=\"{xr}\" y=\"{yb}\" font-size=\"10\" text-anchor=\"end\">{x1:.4}</text>\n\
         <text x=\"{xl}\" y=\"{yb2}\" font-size=\"10\" text-anchor=\"end\">{y0:.4}</text>\n\
         <text x=\"{xl}\" y=\"{yt}\" font-size=\"10\" text-anchor=\"end\">{y1:.4}</text>\n",
        m = MARGIN,
        yb = H - MARGIN + 14.0,
        xr = W - MARGIN,
        x0 = f.x0,
        x1 = f.x1,
        xl = MARGIN - 4.0,
        yb2 = H - MARGIN,
        yt = MARGIN + 4.0,
        y0 = f.y0,
        y1 = f.y1
    )?;
    Ok(())
}

fn no_data(out: &mut impl Write, xlab: &str, ylab: &str) -> Result<()> {
    svg_header(out)?;
    let f = Frame {
        x0: 0.0,
        x1: 1.0,
        y0: 0.0,
        y1: 1.0,
    };
    svg_axes(out, xlab, ylab, &f)?;
    write!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"16\" text-anchor=\"middle\">no data</text>\n</svg>\n",
        W / 2.0,
        H / 2.0
    )?;
    Ok(())
}

/// Parse a CSV produced by this crate (CRLF or LF, no quoting).
fn parse_csv(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect()
}

/// Render a plot from CSV text.
pub fn plot_csv(text: &str, kind: PlotKind, out: &mut impl Write) -> Result<()> {
    let rows = parse_csv(text);
    match kind {
        PlotKind::Sweep => plot_sweep(&rows, out),
        PlotKind::Trace => plot_trace(&rows, out),
    }
}

fn column(header: &[String], name: &str) -> Result<usize> {
    header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidArgument(format!("csv schema mismatch: column {name} missing")))
}

fn plot_sweep(rows: &[Vec<String>], out: &mut impl Write) -> Result<()> {
    if rows.is_empty() {
        return no_data(out, "h", "estimate");
    }
    let header = &rows[0];
    let hcol = column(header, "h")?;
    let ecol = column(header, "estimate")?;
    let ccol = column(header, "ci_half_width")?;
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for row in &rows[1..] {
        let h: f64 = row[hcol].parse().map_err(bad_number)?;
        let e: f64 = row[ecol].parse().map_err(bad_number)?;
        let c: f64 = row[ccol].parse().map_err(bad_number)?;
        pts.push((h, e, c));
    }
    if pts.is_empty() {
        return no_data(out, "h", "estimate");
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let f = Frame {
        x0: pts.first().unwrap().0,
        x1: pts.last().unwrap().0,
        y0: 0.0,
        y1: 1.0,
    };
    svg_header(out)?;
    svg_axes(out, "h", "estimate", &f)?;
    let path: Vec<String> = pts
        .iter()
        .map(|(h, e, _)| format!("{:.3},{:.3}", f.x(*h), f.y(*e)))
        .collect();
    write!(
        out,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>\n",
        path.join(" ")
    )?;
    for (h, e, c) in &pts {
        write!(
            out,
            "<line x1=\"{x:.3}\" y1=\"{ylo:.3}\" x2=\"{x:.3}\" y2=\"{yhi:.3}\" stroke=\"steelblue\"/>\n\
             <circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"2.5\" fill=\"steelblue\"/>\n",
            x = f.x(*h),
            ylo = f.y((e - c).max(0.0)),
            yhi = f.y((e + c).min(1.0)),
            y = f.y(*e)
        )?;
    }
    write!(out, "</svg>\n")?;
    Ok(())
}

fn plot_trace(rows: &[Vec<String>], out: &mut impl Write) -> Result<()> {
    if rows.is_empty() {
        return no_data(out, "n", "log bound");
    }
    let header = &rows[0];
    let ncol = column(header, "n")?;
    let pcol = column(header, "log_p")?;
    let bcol = column(header, "log_bound")?;
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for row in &rows[1..] {
        let n: f64 = row[ncol].parse().map_err(bad_number)?;
        let p: f64 = row[pcol].parse().map_err(bad_number)?;
        let b: f64 = row[bcol].parse().map_err(bad_number)?;
        pts.push((n, p, b));
    }
    if pts.is_empty() {
        return no_data(out, "n", "log bound");
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let ymin = pts
        .iter()
        .flat_map(|(_, p, b)| [*p, *b])
        .fold(f64::INFINITY, f64::min);
    let ymax = pts
        .iter()
        .flat_map(|(_, p, b)| [*p, *b])
        .fold(f64::NEG_INFINITY, f64::max);
    let f = Frame {
        x0: pts.first().unwrap().0,
        x1: pts.last().unwrap().0,
        y0: ymin,
        y1: ymax,
    };
    svg_header(out)?;
    svg_axes(out, "n", "log p_n and log bound", &f)?;
    for (key, color) in [(1usize, "firebrick"), (2usize, "steelblue")] {
        let path: Vec<String> = pts
            .iter()
            .map(|t| {
                let v = if key == 1 { t.1 } else { t.2 };
                format!("{:.3},{:.3}", f.x(t.0), f.y(v))
            })
            .collect();
        write!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            path.join(" ")
        )?;
    }
    write!(out, "</svg>\n")?;
    Ok(())
}

fn bad_number<E: std::fmt::Display>(e: E) -> Error {
    Error::InvalidArgument(format!("csv schema mismatch: {e}"))
}
