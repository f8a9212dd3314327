//! File formats. Numbers are written with Rust's `Display` for `f64`,
//! the shortest decimal that parses back to the same value, so repeated
//! runs produce byte-identical files.

use std::io::{self, Write};

use crate::dimension::DimensionReport;
use crate::ifs::{IfsSystem, SurfaceSample};
use crate::scaling::CertificationMethod;

/// Heightmap CSV: a header row `resolution,x_min,x_max,y_min,y_max`, the
/// matching values, then one row per lattice row from `y_min` upwards.
pub fn write_heightmap_csv<W: Write>(sample: &SurfaceSample, mut out: W) -> io::Result<()> {
    let (xr, yr) = (sample.x_range(), sample.y_range());
    writeln!(out, "resolution,x_min,x_max,y_min,y_max")?;
    writeln!(
        out,
        "{},{},{},{},{}",
        sample.resolution(),
        xr.0,
        xr.1,
        yr.0,
        yr.1
    )?;
    let r = sample.resolution();
    let mut line = String::new();
    for b in 0..r {
        line.clear();
        for a in 0..r {
            if a > 0 {
                line.push(',');
            }
            line.push_str(&sample.height(a, b).to_string());
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Reads a heightmap written by [`write_heightmap_csv`].
pub fn read_heightmap_csv(text: &str) -> Result<SurfaceSample, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    if header != "resolution,x_min,x_max,y_min,y_max" {
        return Err(format!("unexpected header `{header}`"));
    }
    let meta: Vec<&str> = lines
        .next()
        .ok_or("missing metadata row")?
        .split(',')
        .collect();
    if meta.len() != 5 {
        return Err("metadata row needs 5 fields".into());
    }
    let r: usize = meta[0].parse().map_err(|_| "bad resolution")?;
    let num = |s: &str| s.parse::<f64>().map_err(|_| format!("bad number `{s}`"));
    let (xr, yr) = (
        (num(meta[1])?, num(meta[2])?),
        (num(meta[3])?, num(meta[4])?),
    );
    let mut heights = Vec::with_capacity(r * r);
    for (b, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(num)
            .collect::<Result<Vec<f64>, String>>()?;
        if row.len() != r {
            return Err(format!("row {b} has {} values, expected {r}", row.len()));
        }
        heights.extend(row);
    }
    if heights.len() != r * r {
        return Err(format!("expected {r} rows"));
    }
    Ok(SurfaceSample::new(r, xr, yr, heights))
}

/// 16-bit binary PGM (big-endian). The top image row is `y_max`; grey
/// level `round((z − z_min)/(z_max − z_min)·65535)`, recorded in a header
/// comment.
pub fn write_pgm16<W: Write>(sample: &SurfaceSample, mut out: W) -> io::Result<()> {
    let r = sample.resolution();
    let (lo, hi) = sample.min_max();
    let span = hi - lo;
    writeln!(out, "P5")?;
    writeln!(
        out,
        "# z_min={lo} z_max={hi} level=round((z-z_min)/(z_max-z_min)*65535) top_row=y_max"
    )?;
    writeln!(out, "{r} {r}")?;
    writeln!(out, "65535")?;
    let mut bytes = Vec::with_capacity(2 * r * r);
    for b in (0..r).rev() {
        for a in 0..r {
            let level = if span > 0.0 {
                ((sample.height(a, b) - lo) / span * 65535.0).round() as u16
            } else {
                0
            };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    out.write_all(&bytes)
}

/// `x y z` per line.
pub fn write_xyz<W: Write>(points: &[[f64; 3]], mut out: W) -> io::Result<()> {
    for p in points {
        writeln!(out, "{} {} {}", p[0], p[1], p[2])?;
    }
    Ok(())
}

/// Counts table as `delta,count`; `delta` is the fraction of each axis.
pub fn write_counts_csv<W: Write>(report: &DimensionReport, mut out: W) -> io::Result<()> {
    writeln!(out, "delta,count")?;
    for (d, c) in report.counts.deltas.iter().zip(&report.counts.counts) {
        writeln!(out, "{d},{c}")?;
    }
    Ok(())
}

fn matrix(t: &[Vec<f64>]) -> String {
    t.iter()
        .map(|row| {
            row.iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect::<Vec<_>>()
        .join("; ")
}

/// `key=value` dimension report.
pub fn write_dimension_kv<W: Write>(report: &DimensionReport, mut out: W) -> io::Result<()> {
    let a = &report.applicability;
    writeln!(out, "applicable={}", a.applicable())?;
    writeln!(out, "square={}", a.square)?;
    writeln!(out, "uniform={}", a.uniform)?;
    writeln!(
        out,
        "non_collinear_line={}",
        match a.non_collinear {
            Some(crate::dimension::DataLine::Column(k)) => format!("column {k}"),
            Some(crate::dimension::DataLine::Row(k)) => format!("row {k}"),
            None => "none".into(),
        }
    )?;
    if !a.reasons.is_empty() {
        writeln!(out, "inapplicable_because={}", a.reasons.join("; "))?;
    }
    writeln!(out, "epsilon={}", report.epsilon)?;
    writeln!(out, "s_bar={}", matrix(&report.s_bar))?;
    writeln!(out, "s_underbar={}", matrix(&report.s_underbar))?;
    for (prefix, b) in [("", &report.bounds), ("limit_", &report.limit_bounds)] {
        writeln!(out, "{prefix}case={}", b.case.label())?;
        writeln!(out, "{prefix}lower_bound={}", b.lower)?;
        writeln!(out, "{prefix}upper_bound={}", b.upper)?;
        writeln!(out, "{prefix}sum_s_bar={}", b.sum_s_bar)?;
        writeln!(out, "{prefix}sum_s_underbar={}", b.sum_s_underbar)?;
        if let Some(note) = &b.note {
            writeln!(out, "{prefix}note={note}")?;
        }
    }
    let f = &report.fit;
    writeln!(out, "empirical_estimate={}", f.slope)?;
    writeln!(out, "intercept={}", f.intercept)?;
    writeln!(out, "r_squared={}", f.r_squared)?;
    writeln!(out, "excluded_coarsest={}", f.excluded_coarsest)?;
    writeln!(
        out,
        "residuals={}",
        f.residuals
            .iter()
            .map(|r| r.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    )?;
    if let Some(w) = &f.warning {
        writeln!(out, "warning={w}")?;
    }
    if report.bounds.case == crate::dimension::BoundsCase::Inapplicable {
        writeln!(out, "annotation=no theoretical band")?;
    }
    Ok(())
}

/// `key=value` contraction certificate of a system.
pub fn write_certificate<W: Write>(system: &IfsSystem, mut out: W) -> io::Result<()> {
    let c = system.certificate();
    let grid = system.grid();
    writeln!(out, "grid={}x{}", grid.n(), grid.m())?;
    writeln!(out, "c_l={}", c.c_l)?;
    writeln!(out, "c_s={}", c.c_s)?;
    writeln!(out, "c_s_cell={}", c.c_s_cell)?;
    writeln!(out, "lipschitz_q={}", c.l_q)?;
    writeln!(out, "lipschitz_s={}", c.l_s)?;
    writeln!(out, "height_bound={}", c.height_bound)?;
    match c.theta_upper() {
        Some(u) => writeln!(out, "theta_upper={u}")?,
        None => writeln!(out, "theta_upper=unbounded")?,
    }
    for cs in system.cells() {
        let cert = cs.scaling.certificate();
        let method = match cert.method {
            CertificationMethod::Analytic => "analytic".to_string(),
            CertificationMethod::Sampled {
                resolution, slack, ..
            } => format!("sampled resolution={resolution} slack={slack}"),
        };
        writeln!(
            out,
            "cell{}: sup_abs_s={} at=({}, {}) method={} lipschitz_s={} blend={}",
            cs.map.cell,
            cert.sup_abs,
            cert.witness.0,
            cert.witness.1,
            method,
            cs.scaling.lipschitz(),
            match cs.blend {
                crate::boundary::PatchBlend::Coons(_) => "coons",
                crate::boundary::PatchBlend::Explicit { .. } => "explicit",
            }
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DataGrid;

    fn sample() -> SurfaceSample {
        let grid = DataGrid::new(vec![0.0, 1.0], vec![0.0, 2.0], vec![vec![0.0; 2]; 2]).unwrap();
        SurfaceSample::from_fn(&grid, 5, |x, y| 0.1 * x + y / 3.0)
    }

    #[test]
    fn csv_round_trips_exactly() {
        let s = sample();
        let mut buf = Vec::new();
        write_heightmap_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("resolution,x_min,x_max,y_min,y_max\n5,0,1,0,2\n"));
        let back = read_heightmap_csv(&text).unwrap();
        assert_eq!(back.heights(), s.heights());
        assert_eq!(back.x_range(), s.x_range());
    }

    #[test]
    fn pgm_layout() {
        let s = sample();
        let mut buf = Vec::new();
        write_pgm16(&s, &mut buf).unwrap();
        let header_end = buf.windows(6).position(|w| w == b"65535\n").unwrap() + 6;
        assert!(buf.starts_with(b"P5\n# z_min=0 z_max="));
        let pixels = &buf[header_end..];
        assert_eq!(pixels.len(), 2 * 25);
        // first pixel is the top-left corner (x_min, y_max): level of 2/3
        let first = u16::from_be_bytes([pixels[0], pixels[1]]);
        let (lo, hi) = s.min_max();
        let expected = ((s.height(0, 4) - lo) / (hi - lo) * 65535.0).round() as u16;
        assert_eq!(first, expected);
        // last pixel is (x_max, y_min)
        let last = u16::from_be_bytes([pixels[48], pixels[49]]);
        assert_eq!(
            last,
            ((s.height(4, 0) - lo) / (hi - lo) * 65535.0).round() as u16
        );
    }

    #[test]
    fn xyz_lines() {
        let mut buf = Vec::new();
        write_xyz(&[[0.5, 0.25, -1.0], [1.0, 0.0, 1e-20]], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "0.5 0.25 -1\n1 0 0.00000000000000000001\n"
        );
    }
}
