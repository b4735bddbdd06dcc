//! Field snapshot files.
//!
//! Each record is a text header followed by `count` little-endian `f64`
//! pairs `(re, im)` in storage order:
//!
//! ```text
//! GAUGEWAVE-SNAPSHOT 1
//! dim=3
//! n=32
//! box_length=20
//! name=phi
//! reality=complex
//! normalization=D2
//! count=32768
//! end
//! ```
//!
//! A file may hold several records back to back.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{Reality, SpectralField};
use crate::grid::Grid;

const MAGIC: &str = "GAUGEWAVE-SNAPSHOT 1";
const NORMALIZATION: &str = "D2";

pub fn write_record<W: Write>(w: &mut W, name: &str, field: &SpectralField) -> Result<()> {
    if name.is_empty() || name.contains(char::is_whitespace) || name.contains('=') {
        return Err(Error::Snapshot(format!("invalid field name {name:?}")));
    }
    let g = field.grid();
    let reality = match field.reality() {
        Reality::Real => "real",
        Reality::Complex => "complex",
    };
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim={}", g.dim())?;
    writeln!(w, "n={}", g.n())?;
    writeln!(w, "box_length={:?}", g.box_length())?;
    writeln!(w, "name={name}")?;
    writeln!(w, "reality={reality}")?;
    writeln!(w, "normalization={NORMALIZATION}")?;
    writeln!(w, "count={}", field.coeffs().len())?;
    writeln!(w, "end")?;
    let mut buf = Vec::with_capacity(16 * field.coeffs().len());
    for c in field.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_fields(path: impl AsRef<Path>, fields: &[(&str, &SpectralField)]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (name, f) in fields {
        write_record(&mut w, name, f)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads the next record, or `None` at a clean end of input.
pub fn read_record<R: BufRead>(r: &mut R) -> Result<Option<(String, SpectralField)>> {
    let mut line = String::new();
    if r.read_line(&mut line)? == 0 {
        return Ok(None);
    }
    if line.trim_end() != MAGIC {
        return Err(Error::Snapshot(format!("bad magic line {:?}", line.trim_end())));
    }
    let mut dim = None;
    let mut n = None;
    let mut box_length = None;
    let mut name = None;
    let mut reality = None;
    let mut count = None;
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Snapshot("truncated header".into()));
        }
        let l = line.trim_end();
        if l == "end" {
            break;
        }
        let (key, value) = l
            .split_once('=')
            .ok_or_else(|| Error::Snapshot(format!("malformed header line {l:?}")))?;
        let bad = |what: &str| Error::Snapshot(format!("bad {what} {value:?}"));
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| bad("dim"))?),
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad("n"))?),
            "box_length" => box_length = Some(value.parse::<f64>().map_err(|_| bad("box_length"))?),
            "name" => name = Some(value.to_string()),
            "reality" => {
                reality = Some(match value {
                    "real" => Reality::Real,
                    "complex" => Reality::Complex,
                    _ => return Err(bad("reality")),
                })
            }
            "normalization" => {
                if value != NORMALIZATION {
                    return Err(bad("normalization"));
                }
            }
            "count" => count = Some(value.parse::<usize>().map_err(|_| bad("count"))?),
            _ => return Err(Error::Snapshot(format!("unknown header key {key:?}"))),
        }
    }
    let missing = |k: &str| Error::Snapshot(format!("header lacks {k}"));
    let grid = Grid::new(
        dim.ok_or_else(|| missing("dim"))?,
        n.ok_or_else(|| missing("n"))?,
        box_length.ok_or_else(|| missing("box_length"))?,
    )?;
    let count = count.ok_or_else(|| missing("count"))?;
    if count != grid.len() {
        return Err(Error::Snapshot(format!(
            "count {count} does not match the grid ({} modes)",
            grid.len()
        )));
    }
    let mut bytes = vec![0u8; 16 * count];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Snapshot("truncated coefficient block".into()))?;
    let coeffs = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let field = SpectralField::from_coeffs(grid, coeffs, reality.ok_or_else(|| missing("reality"))?)?;
    Ok(Some((name.ok_or_else(|| missing("name"))?, field)))
}

pub fn read_fields(path: impl AsRef<Path>) -> Result<Vec<(String, SpectralField)>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    while let Some(rec) = read_record(&mut r)? {
        out.push(rec);
    }
    if out.is_empty() {
        return Err(Error::Snapshot("file holds no records".into()));
    }
    Ok(out)
}

/// Looks up a field by name in a list read from a snapshot.
pub fn take_field(fields: &[(String, SpectralField)], name: &str) -> Result<SpectralField> {
    fields
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, f)| f.clone())
        .ok_or_else(|| Error::Snapshot(format!("snapshot lacks field {name:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_field, SpectrumProfile};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let g = Grid::new(2, 16, 0.1 + 0.2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SpectrumProfile::quarter_nyquist(&g);
        let a = random_field(&g, &mut rng, &p, Reality::Real, 1.0);
        let b = random_field(&g, &mut rng, &p, Reality::Complex, 2.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        write_fields(&path, &[("a", &a), ("phi", &b)]).unwrap();
        let back = read_fields(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, "a");
        assert_eq!(back[0].1, a);
        assert_eq!(back[1].1, b);
        assert_eq!(back[1].1.grid().box_length(), 0.1 + 0.2);
    }

    #[test]
    fn rejects_corrupt_input() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let mut buf = Vec::new();
        write_record(&mut buf, "f", &SpectralField::constant(g, 1.0)).unwrap();
        let truncated = &buf[..buf.len() - 3];
        assert!(read_record(&mut &truncated[..]).is_err());
        let text = String::from_utf8_lossy(&buf[..60]).replace("D2", "D9");
        assert!(read_record(&mut text.as_bytes()).is_err());
        assert!(read_record(&mut &b"nonsense\n"[..]).is_err());
        assert!(write_record(&mut Vec::new(), "two words", &SpectralField::constant(g, 1.0)).is_err());
    }
}
