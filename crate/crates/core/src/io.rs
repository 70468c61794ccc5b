//! CSV exchange formats.
//!
//! Numbers are written in scientific notation with 17 significant digits so
//! that every f64 survives a write/read cycle. Lines starting with `#` carry
//! provenance and are skipped by the readers.

use std::io::{Read, Write};

use crate::curve::Curve;
use crate::dims::DimExpr;
use crate::error::{Error, Result};
use crate::kernel_ops::{SampledFunction, UniformGrid};

/// Relative tolerance when checking that input abscissae are uniform.
const UNIFORM_TOL: f64 = 1e-9;

/// Scientific notation with 17 significant digits; negative zero is written
/// as `0`.
pub fn format_value(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.16e}")
}

fn write_provenance<W: Write>(w: &mut W, provenance: &[String]) -> Result<()> {
    for line in provenance {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

/// Writes `t,value` rows.
pub fn write_sampled<W: Write>(w: &mut W, f: &SampledFunction, provenance: &[String]) -> Result<()> {
    write_provenance(w, provenance)?;
    writeln!(w, "t,value")?;
    for (t, v) in f.iter() {
        writeln!(w, "{},{}", format_value(t), format_value(v))?;
    }
    Ok(())
}

/// Writes named columns of equal length.
pub fn write_columns<W: Write>(
    w: &mut W,
    headers: &[&str],
    columns: &[&[f64]],
    provenance: &[String],
) -> Result<()> {
    if headers.len() != columns.len() || columns.windows(2).any(|c| c[0].len() != c[1].len()) {
        return Err(Error::Input("column headers and lengths must agree".into()));
    }
    write_provenance(w, provenance)?;
    writeln!(w, "{}", headers.join(","))?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| format_value(c[i])).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}

/// Long format: one `abscissa,alpha,value` row per sample of every curve.
pub fn write_curves_long<W: Write>(w: &mut W, curves: &[Curve], provenance: &[String]) -> Result<()> {
    write_provenance(w, provenance)?;
    let (abscissa, value) = curves
        .first()
        .map_or(("t", "value"), |c| (c.abscissa_name.as_str(), c.value_name.as_str()));
    writeln!(w, "{abscissa},alpha,{value}")?;
    for c in curves {
        let alpha = c.alpha.map_or_else(|| "nan".to_string(), format_value);
        for &(x, y) in c.rows() {
            writeln!(w, "{},{},{}", format_value(x), alpha, format_value(y))?;
        }
    }
    Ok(())
}

fn parse_field(field: Option<&str>, line: u64, what: &str) -> Result<f64> {
    let raw = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what} column"),
    })?;
    raw.trim().parse::<f64>().map_err(|e| Error::Parse {
        line,
        message: format!("cannot parse {what} '{raw}': {e}"),
    })
}

/// Reads two numeric columns after a header row.
pub fn read_pairs<R: Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 columns, found {}", record.len()),
            });
        }
        xs.push(parse_field(record.get(0), line, "abscissa")?);
        ys.push(parse_field(record.get(1), line, "value")?);
    }
    Ok((xs, ys))
}

/// Reads a `t,value` file into a sampled function. The abscissae must be
/// uniformly spaced.
pub fn read_sampled<R: Read>(r: R, dim: DimExpr) -> Result<SampledFunction> {
    let (ts, vs) = read_pairs(r)?;
    if ts.len() < 2 {
        return Err(Error::Parse {
            line: 0,
            message: format!("need at least 2 samples, found {}", ts.len()),
        });
    }
    let n = ts.len();
    let (t0, t_end) = (ts[0], ts[n - 1]);
    let dt = (t_end - t0) / (n - 1) as f64;
    let tol = UNIFORM_TOL * t_end.abs().max(t0.abs()).max(1.0);
    for (k, &t) in ts.iter().enumerate() {
        if (t - (t0 + k as f64 * dt)).abs() > tol {
            return Err(Error::Parse {
                // header is line 1
                line: k as u64 + 2,
                message: format!("abscissa {t} breaks the uniform spacing {dt}"),
            });
        }
    }
    let grid = UniformGrid::new(t0, dt, n)?;
    SampledFunction::new(grid, vs, dim)
}
