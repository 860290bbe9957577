//! CSV import and export of coefficient vectors and grid samples.

use std::io::{Read, Write};
use std::sync::Arc;

use super::{Eigenbasis, GridField, SpectralField};
use crate::error::{FracError, Result};

/// Write `mode_index,a_j` rows in flattened basis order.
pub fn write_coeffs<W: Write>(out: W, u: &SpectralField) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode_index", "a_j"])?;
    for (j, a) in u.coeffs.iter().enumerate() {
        w.write_record([j.to_string(), format!("{a:e}")])?;
    }
    w.flush()?;
    Ok(())
}

/// Read a coefficient file written by [`write_coeffs`].
///
/// Lines starting with `#` are ignored; missing modes default to zero.
pub fn read_coeffs<R: Read>(input: R, basis: &Arc<Eigenbasis>) -> Result<SpectralField> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut coeffs = vec![0.0; basis.len()];
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<&str> {
            rec.get(i)
                .ok_or_else(|| FracError::Io(format!("short coefficient row: {rec:?}")))
        };
        let j: usize = parse(0)?
            .parse()
            .map_err(|e| FracError::Io(format!("bad mode index: {e}")))?;
        let a: f64 = parse(1)?
            .parse()
            .map_err(|e| FracError::Io(format!("bad coefficient: {e}")))?;
        if j >= coeffs.len() {
            return Err(FracError::ShapeMismatch {
                expected: format!("mode index below {}", coeffs.len()),
                found: j.to_string(),
            });
        }
        coeffs[j] = a;
    }
    SpectralField::from_coeffs(basis, coeffs)
}

/// Write `x,value` or `x,y,value` rows.
pub fn write_grid<W: Write>(out: W, g: &GridField) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if g.shape.len() == 1 {
        w.write_record(["x", "value"])?;
        for (x, v) in g.nodes(0).iter().zip(&g.values) {
            w.write_record([format!("{x:e}"), format!("{v:e}")])?;
        }
    } else {
        w.write_record(["x", "y", "value"])?;
        let (xs, ys) = (g.nodes(0), g.nodes(1));
        for (idx, v) in g.values.iter().enumerate() {
            let (i, l) = (idx / ys.len(), idx % ys.len());
            w.write_record([
                format!("{:e}", xs[i]),
                format!("{:e}", ys[l]),
                format!("{v:e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
