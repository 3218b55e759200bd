//! File formats: external band tables, heatmap matrices and their SVG rendering.
//!
//! Every text output carries a `#` comment header (manifest hash and
//! effective parameters) that the readers here skip.

use std::path::Path;

use crate::bands::BandStructure;
use crate::error::{Error, Result};
use crate::units::HARTREE_EV;

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data lines of a CSV, paired with their 1-based line numbers.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EnergyUnit {
    Au,
    Ev,
}

/// Band energies on a common abscissa (k, orientation angle, …), stored in a.u.
///
/// Text schema: a header row naming the columns; the first column is the
/// abscissa, every further column is a band whose name ends in `_eV` or `_au`.
/// Rows are sorted by ascending abscissa on ingestion.
#[derive(Debug, Clone, PartialEq)]
pub struct BandTable {
    pub abscissa_label: String,
    pub abscissa: Vec<f64>,
    /// One row per abscissa value, energies ascending by band column.
    pub energies: Vec<Vec<f64>>,
}

impl BandTable {
    pub fn n_bands(&self) -> usize {
        self.energies.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> usize {
        self.abscissa.len()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let (header_row, header) = lines.next().ok_or(Error::Parse {
            row: 1,
            column: 1,
            message: "empty band table".into(),
        })?;
        let names: Vec<&str> = header.split(',').map(str::trim).collect();
        if names.len() < 2 {
            return Err(Error::Parse {
                row: header_row,
                column: 1,
                message: "need an abscissa column and at least one band column".into(),
            });
        }
        let units = names[1..]
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let lower = name.to_ascii_lowercase();
                if lower.ends_with("_ev") {
                    Ok(EnergyUnit::Ev)
                } else if lower.ends_with("_au") {
                    Ok(EnergyUnit::Au)
                } else {
                    Err(Error::Parse {
                        row: header_row,
                        column: i + 2,
                        message: format!("column `{name}` does not declare a unit (_eV or _au)"),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;

        let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
        for (row, line) in lines {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            if cells.len() > names.len() {
                return Err(Error::Parse {
                    row,
                    column: names.len() + 1,
                    message: "extra cell".into(),
                });
            }
            let mut values = Vec::with_capacity(names.len());
            for column in 0..names.len() {
                let cell = cells.get(column).copied().unwrap_or("");
                if cell.is_empty() {
                    return Err(Error::Parse {
                        row,
                        column: column + 1,
                        message: format!("missing cell `{}`", names[column]),
                    });
                }
                let v: f64 = cell.parse().map_err(|_| Error::Parse {
                    row,
                    column: column + 1,
                    message: format!("`{cell}` is not a number"),
                })?;
                values.push(v);
            }
            let x = values[0];
            let bands = values[1..]
                .iter()
                .zip(&units)
                .map(|(v, u)| match u {
                    EnergyUnit::Au => *v,
                    EnergyUnit::Ev => v / HARTREE_EV,
                })
                .collect();
            rows.push((x, bands));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (abscissa, energies) = rows.into_iter().unzip();
        Ok(BandTable {
            abscissa_label: names[0].to_string(),
            abscissa,
            energies,
        })
    }

    pub fn from_bands(bands: &BandStructure) -> Self {
        BandTable {
            abscissa_label: "k_au".into(),
            abscissa: bands.k_grid(),
            energies: bands.states.iter().map(|s| s.energies.clone()).collect(),
        }
    }
}

/// Rectangular matrix over two axes: `values[iy][ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapMatrix {
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl HeatmapMatrix {
    pub fn new(x_label: &str, y_label: &str, x: Vec<f64>, y: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != y.len() {
            return Err(Error::Invalid(format!(
                "matrix has {} rows for {} y values",
                values.len(),
                y.len()
            )));
        }
        if let Some((i, r)) = values.iter().enumerate().find(|(_, r)| r.len() != x.len()) {
            return Err(Error::Invalid(format!(
                "ragged matrix: row {} has {} cells, expected {}",
                i + 1,
                r.len(),
                x.len()
            )));
        }
        if x.is_empty() || y.is_empty() {
            return Err(Error::Invalid("empty heatmap".into()));
        }
        Ok(HeatmapMatrix {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
            values,
        })
    }

    /// Text form: first row `y_label/x_label,x1,…`, then `y_j,v_1j,…`.
    pub fn to_csv(&self, header: &str) -> String {
        let mut out = String::from(header);
        out.push_str(&format!("{}/{}", self.y_label, self.x_label));
        for x in &self.x {
            out.push_str(&format!(",{x}"));
        }
        out.push('\n');
        for (y, row) in self.y.iter().zip(&self.values) {
            out.push_str(&format!("{y}"));
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = data_lines(text);
        let (hrow, header) = lines.next().ok_or(Error::Parse {
            row: 1,
            column: 1,
            message: "empty matrix".into(),
        })?;
        let mut cells = header.split(',').map(str::trim);
        let corner = cells.next().unwrap_or("");
        let (y_label, x_label) = corner.split_once('/').unwrap_or(("y", "x"));
        let num = |row: usize, column: usize, s: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::Parse {
                row,
                column,
                message: format!("`{s}` is not a number"),
            })
        };
        let x = cells
            .enumerate()
            .map(|(i, s)| num(hrow, i + 2, s))
            .collect::<Result<Vec<_>>>()?;
        let mut y = Vec::new();
        let mut values = Vec::new();
        for (row, line) in lines {
            let mut cells = line.split(',').map(str::trim);
            y.push(num(row, 1, cells.next().unwrap_or(""))?);
            let r = cells
                .enumerate()
                .map(|(i, s)| num(row, i + 2, s))
                .collect::<Result<Vec<_>>>()?;
            values.push(r);
        }
        Self::new(x_label, y_label, x, y, values)
    }
}

/// Curve drawn on top of a heatmap, in axis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedHeatmap {
    pub svg: String,
    /// All cells equal: the colour scale collapsed to one value.
    pub degenerate: bool,
}

/// Five-stop perceptual ramp (dark blue → yellow).
const RAMP: [(f64, [u8; 3]); 5] = [
    (0.0, [68, 1, 84]),
    (0.25, [59, 82, 139]),
    (0.5, [33, 145, 140]),
    (0.75, [94, 201, 98]),
    (1.0, [253, 231, 37]),
];

pub fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    for w in RAMP.windows(2) {
        let (t0, c0) = w[0];
        let (t1, c1) = w[1];
        if t <= t1 {
            let s = (t - t0) / (t1 - t0);
            let mix = |a: u8, b: u8| (a as f64 + s * (b as f64 - a as f64)).round() as u8;
            return [mix(c0[0], c1[0]), mix(c0[1], c1[1]), mix(c0[2], c1[2])];
        }
    }
    RAMP[4].1
}

/// Renders the matrix as SVG. With `log_scale`, values are mapped through
/// log10 (floored twelve decades below the maximum) before colouring.
pub fn render_heatmap(m: &HeatmapMatrix, overlays: &[Overlay], log_scale: bool) -> RenderedHeatmap {
    let (width, height) = (800.0, 500.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let pw = width - left - right;
    let ph = height - top - bottom;

    let peak = m.values.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let transform = |v: f64| {
        if log_scale {
            let floor = peak.abs().max(f64::MIN_POSITIVE) * 1e-12;
            v.max(floor).log10()
        } else {
            v
        }
    };
    let mapped: Vec<Vec<f64>> = m.values.iter().map(|r| r.iter().map(|&v| transform(v)).collect()).collect();
    let lo = mapped.iter().flatten().cloned().fold(f64::INFINITY, f64::min);
    let hi = mapped.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max);
    let degenerate = !(hi > lo);

    let nx = m.x.len();
    let ny = m.y.len();
    let cw = pw / nx as f64;
    let ch = ph / ny as f64;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (iy, row) in mapped.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            let t = if degenerate { 0.5 } else { (v - lo) / (hi - lo) };
            let [r, g, b] = colormap(t);
            // y grows upward
            let px = left + ix as f64 * cw;
            let py = top + (ny - 1 - iy) as f64 * ch;
            svg.push_str(&format!(
                "<rect class=\"cell\" x=\"{px:.3}\" y=\"{py:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"#{r:02x}{g:02x}{b:02x}\"/>\n",
                cw + 0.01,
                ch + 0.01
            ));
        }
    }

    let span = |v: &[f64]| {
        let a = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let b = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (a, b)
    };
    let (x0, x1) = span(&m.x);
    let (y0, y1) = span(&m.y);
    // map axis values to cell centres
    let to_px = |x: f64| {
        if x1 > x0 {
            left + cw / 2.0 + (x - x0) / (x1 - x0) * (pw - cw)
        } else {
            left + pw / 2.0
        }
    };
    let to_py = |y: f64| {
        if y1 > y0 {
            top + ph - ch / 2.0 - (y - y0) / (y1 - y0) * (ph - ch)
        } else {
            top + ph / 2.0
        }
    };
    for o in overlays {
        let pts: Vec<String> = o
            .points
            .iter()
            .map(|&(x, y)| format!("{:.3},{:.3}", to_px(x), to_py(y)))
            .collect();
        svg.push_str(&format!(
            "<polyline class=\"overlay\" fill=\"none\" stroke=\"{}\" stroke-width=\"2\" stroke-dasharray=\"6,4\" points=\"{}\"><title>{}</title></polyline>\n",
            o.color,
            pts.join(" "),
            o.name
        ));
    }
    svg.push_str(&format!(
        "<rect x=\"{left}\" y=\"{top}\" width=\"{pw}\" height=\"{ph}\" fill=\"none\" stroke=\"black\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
        left + pw / 2.0,
        height - 12.0,
        m.x_label
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
        top + ph / 2.0,
        top + ph / 2.0,
        m.y_label
    ));
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        let px = if anchor == "start" { left } else { left + pw };
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"{anchor}\" font-size=\"11\">{x:.4}</text>\n",
            top + ph + 14.0
        ));
    }
    for (y, py) in [(y0, top + ph), (y1, top + 10.0)] {
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{py:.1}\" text-anchor=\"end\" font-size=\"11\">{y:.4}</text>\n",
            left - 4.0
        ));
    }
    svg.push_str("</svg>\n");
    RenderedHeatmap { svg, degenerate }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = "# comment\nk_au,b1_eV,b2_eV,b3_eV\n0.2,1,2,3\n-0.1,1.5,2.5,3.5\n0.0,1.2,2.2,3.2\n";

    #[test]
    fn table_sorts_rows() {
        let t = BandTable::parse(TABLE).unwrap();
        assert_eq!(t.abscissa, vec![-0.1, 0.0, 0.2]);
        assert_eq!(t.n_bands(), 3);
        assert!((t.energies[0][0] * HARTREE_EV - 1.5).abs() < 1e-12);
    }

    #[test]
    fn missing_cell_named() {
        let err = BandTable::parse("k_au,b1_eV,b2_eV,b3_eV\n0.2,1,,3\n").unwrap_err();
        match err {
            Error::Parse { row, column, message } => {
                assert_eq!((row, column), (2, 3));
                assert!(message.contains("b2_eV"));
            }
            other => panic!("{other}"),
        }
        let err = BandTable::parse("k_au,b1_eV,b2_eV\n0.2,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, column: 3, .. }));
    }

    #[test]
    fn unit_is_mandatory() {
        assert!(BandTable::parse("k,b1,b2\n0,1,2\n").is_err());
        let au = BandTable::parse("k,b1_au\n0,0.5\n").unwrap();
        assert_eq!(au.energies[0][0], 0.5);
    }

    #[test]
    fn two_by_two_render() {
        let m = HeatmapMatrix::new("x", "y", vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let r = render_heatmap(&m, &[], false);
        assert_eq!(r.svg.matches("class=\"cell\"").count(), 4);
        assert!(r.svg.contains("#440154"));
        assert!(r.svg.contains("#fde725"));
        assert!(!r.degenerate);
        assert_eq!(r, render_heatmap(&m, &[], false));
    }

    #[test]
    fn flat_render() {
        let m = HeatmapMatrix::new("x", "y", vec![0.0, 1.0], vec![0.0], vec![vec![7.0, 7.0]]).unwrap();
        let r = render_heatmap(&m, &[], true);
        assert!(r.degenerate);
        let [red, g, b] = colormap(0.5);
        let fill = format!("#{red:02x}{g:02x}{b:02x}");
        assert_eq!(r.svg.matches(&fill).count(), 2);
    }

    #[test]
    fn ragged_rejected() {
        assert!(HeatmapMatrix::new("x", "y", vec![0.0, 1.0], vec![0.0, 1.0], vec![vec![0.0, 1.0], vec![2.0]]).is_err());
        assert!(HeatmapMatrix::parse("y/x,0,1\n0,1,2\n1,3\n").is_err());
    }

    #[test]
    fn matrix_text_round_trip() {
        let m = HeatmapMatrix::new("U0", "order", vec![0.2, 0.3], vec![8.0, 9.0, 10.0], vec![vec![1.0, 2.0], vec![3.0, -4.5], vec![0.1, 1e-9]]).unwrap();
        let back = HeatmapMatrix::parse(&m.to_csv("# h\n")).unwrap();
        assert_eq!(m, back);
    }
}
