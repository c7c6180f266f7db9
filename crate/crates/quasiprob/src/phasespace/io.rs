//! Lossless on-disk formats for phase-space fields.
//!
//! CSV: one metadata header line
//! `# <label>,<sigma1>,<sigma2>,<min>,<max>,<step>` followed by one line per
//! α₁ index, each holding the α₂ sweep comma-separated. Floats are written
//! with 17 significant digits, so a write→read cycle reproduces every bit.
//!
//! JSON: `{label, sigma1, sigma2, grid: {min, max, step}, values: [[…]]}`,
//! likewise lossless (shortest round-trip float representation).
//!
//! Readers rebuild the field through the validating constructors, so a file
//! that parses but violates a field invariant is still rejected.

use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{FieldLabel, PhaseSpaceField, QuadratureGrid};

#[derive(Serialize, Deserialize)]
struct GridDoc {
    min: f64,
    max: f64,
    step: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldDoc {
    label: FieldLabel,
    sigma1: f64,
    sigma2: f64,
    grid: GridDoc,
    values: Vec<Vec<f64>>,
}

/// Write the CSV form. Fails only on I/O errors.
pub fn write_csv<W: Write>(field: &PhaseSpaceField, mut writer: W) -> Result<()> {
    let grid = field.grid();
    let n = grid.points();
    let mut text = String::with_capacity(n * n * 25 + 80);
    let _ = writeln!(
        text,
        "# {},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
        field.label(),
        field.sigma1(),
        field.sigma2(),
        grid.min(),
        grid.max(),
        grid.step()
    );
    for i in 0..n {
        for j in 0..n {
            if j > 0 {
                text.push(',');
            }
            let _ = write!(text, "{:.16e}", field.values()[[i, j]]);
        }
        text.push('\n');
    }
    writer.write_all(text.as_bytes())?;
    Ok(())
}

/// Read the CSV form back into a validated field.
pub fn read_csv<R: BufRead>(reader: R) -> Result<PhaseSpaceField> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty input".into()))??;
    let meta = header
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse("first line must be the `# …` metadata header".into()))?;
    let parts: Vec<&str> = meta.split(',').collect();
    if parts.len() != 6 {
        return Err(Error::Parse(format!(
            "header needs 6 fields (label,sigma1,sigma2,min,max,step), got {}",
            parts.len()
        )));
    }
    let label: FieldLabel = parts[0].trim().parse()?;
    let nums: Vec<f64> = parts[1..]
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("bad header number `{p}`: {e}")))
        })
        .collect::<Result<_>>()?;
    let (sigma1, sigma2) = (nums[0], nums[1]);
    let grid = QuadratureGrid::new(nums[2], nums[3], nums[4])?;
    let n = grid.points();

    let mut flat = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows += 1;
        if rows > n {
            return Err(Error::Parse(format!("expected {n} data rows, found more")));
        }
        let before = flat.len();
        for piece in line.split(',') {
            flat.push(
                piece
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad value `{piece}`: {e}")))?,
            );
        }
        let got = flat.len() - before;
        if got != n {
            return Err(Error::Parse(format!(
                "row {rows} has {got} values, expected {n}"
            )));
        }
    }
    if rows != n {
        return Err(Error::Parse(format!("expected {n} data rows, got {rows}")));
    }
    let values = Array2::from_shape_vec((n, n), flat)
        .map_err(|e| Error::Parse(format!("shape error: {e}")))?;
    PhaseSpaceField::checked(grid, values, label, sigma1, sigma2)
}

/// Write the JSON form. Fails only on I/O errors.
pub fn write_json<W: Write>(field: &PhaseSpaceField, mut writer: W) -> Result<()> {
    let grid = field.grid();
    let doc = FieldDoc {
        label: field.label(),
        sigma1: field.sigma1(),
        sigma2: field.sigma2(),
        grid: GridDoc { min: grid.min(), max: grid.max(), step: grid.step() },
        values: field.values().outer_iter().map(|row| row.to_vec()).collect(),
    };
    let bytes = serde_json::to_vec(&doc).map_err(|e| Error::Parse(format!("json encode: {e}")))?;
    writer.write_all(&bytes)?;
    writer.write_all(b"\n")?;
    Ok(())
}

/// Read the JSON form back into a validated field.
pub fn read_json<R: Read>(reader: R) -> Result<PhaseSpaceField> {
    let doc: FieldDoc =
        serde_json::from_reader(reader).map_err(|e| Error::Parse(format!("json decode: {e}")))?;
    let grid = QuadratureGrid::new(doc.grid.min, doc.grid.max, doc.grid.step)?;
    let n = grid.points();
    if doc.values.len() != n {
        return Err(Error::Parse(format!(
            "expected {n} value rows, got {}",
            doc.values.len()
        )));
    }
    let mut flat = Vec::with_capacity(n * n);
    for (i, row) in doc.values.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Parse(format!(
                "value row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        flat.extend_from_slice(row);
    }
    let values = Array2::from_shape_vec((n, n), flat)
        .map_err(|e| Error::Parse(format!("shape error: {e}")))?;
    PhaseSpaceField::checked(grid, values, doc.label, doc.sigma1, doc.sigma2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_state, StateSpec};
    use crate::phasespace::{q_exact_grid, smooth, wigner_grid, SmoothingWidths};

    fn sample_q() -> PhaseSpaceField {
        let grid = QuadratureGrid::new(-6.0, 6.0, 0.1).unwrap();
        let rho = build_state(&StateSpec::Fock { n: 0 }, 8).unwrap();
        q_exact_grid(&rho, grid).unwrap()
    }

    fn assert_fields_identical(a: &PhaseSpaceField, b: &PhaseSpaceField) {
        assert_eq!(a.grid(), b.grid());
        assert_eq!(a.label(), b.label());
        assert_eq!(a.sigma1().to_bits(), b.sigma1().to_bits());
        assert_eq!(a.sigma2().to_bits(), b.sigma2().to_bits());
        assert_eq!(a.values(), b.values(), "grid values differ");
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let field = sample_q();
        let mut buf = Vec::new();
        write_csv(&field, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_fields_identical(&field, &back);
    }

    #[test]
    fn csv_round_trips_signed_wigner_fields() {
        let grid = QuadratureGrid::new(-6.0, 6.0, 0.1).unwrap();
        let rho = build_state(&StateSpec::Fock { n: 1 }, 8).unwrap();
        let field = wigner_grid(&rho, grid).unwrap();
        assert!(field.min_value() < 0.0);
        let mut buf = Vec::new();
        write_csv(&field, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_fields_identical(&field, &back);
    }

    #[test]
    fn json_round_trip_is_bit_identical() {
        let grid = QuadratureGrid::new(-6.0, 6.0, 0.1).unwrap();
        let rho = build_state(&StateSpec::Fock { n: 0 }, 8).unwrap();
        let w = wigner_grid(&rho, grid).unwrap();
        let field = smooth(&w, SmoothingWidths::new(0.45, 0.5).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_json(&field, &mut buf).unwrap();
        let back = read_json(buf.as_slice()).unwrap();
        assert_fields_identical(&field, &back);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        // No metadata header.
        assert!(matches!(
            read_csv("1.0,2.0\n3.0,4.0\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        // Header with too few fields.
        assert!(matches!(
            read_csv("# q,0.5,0.5\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        // Unknown label.
        assert!(matches!(
            read_csv("# banana,0.5,0.5,-6,6,0.1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
        // Header fine, but no data rows.
        assert!(matches!(
            read_csv("# q,0.5,0.5,-6.0,6.0,0.1\n".as_bytes()),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn csv_rejects_truncated_body() {
        let field = sample_q();
        let mut buf = Vec::new();
        write_csv(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Drop the last data row.
        let truncated: Vec<&str> = text.lines().collect();
        let shorter = truncated[..truncated.len() - 1].join("\n");
        assert!(matches!(read_csv(shorter.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn json_rejects_bad_documents() {
        assert!(matches!(read_json("not json".as_bytes()), Err(Error::Parse(_))));
        // Ragged rows.
        let doc = r#"{"label":"q","sigma1":0.5,"sigma2":0.5,
                      "grid":{"min":-6.0,"max":6.0,"step":0.1},
                      "values":[[1.0,2.0],[3.0]]}"#;
        assert!(matches!(read_json(doc.as_bytes()), Err(Error::Parse(_))));
    }

    #[test]
    fn readers_enforce_field_invariants() {
        // Syntactically valid CSV whose payload integrates to 0: the field
        // constructor must reject it.
        let grid = QuadratureGrid::new(-2.0, 2.0, 0.1).unwrap();
        let n = grid.points();
        let mut text = String::from("# wigner,0.0e0,0.0e0,-2.0e0,2.0e0,1.0e-1\n");
        for _ in 0..n {
            text.push_str(&vec!["0.0"; n].join(","));
            text.push('\n');
        }
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::FieldInvariant(_))
        ));
    }
}
