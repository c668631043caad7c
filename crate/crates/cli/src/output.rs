//! Artifact serialisation: JSON with every float written as `{:.16e}`
//! (17 significant digits, exact round trip), CSV with split `_re/_im` columns.

use crate::config::JobConfig;
use serde::Serialize;
use serde_json::ser::Formatter;
use sha2::{Digest, Sha256};
use std::io::{self, Write};

pub const TOOL: &str = "lame-spectra";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Compact layout (the trait defaults). serde_json routes NaN and infinities
/// to `write_null`; reports skip absent fields, so any `null` is rejected.
struct FixedFormatter;

impl FixedFormatter {
    fn float<W: ?Sized + Write>(w: &mut W, v: f64) -> io::Result<()> {
        if !v.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("non-finite value {v} in output")));
        }
        write!(w, "{v:.16e}")
    }
}

impl Formatter for FixedFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        Self::float(w, v)
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        Self::float(w, v as f64)
    }
    fn write_null<W: ?Sized + Write>(&mut self, _: &mut W) -> io::Result<()> {
        Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite value in output"))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFormatter);
    value.serialize(&mut ser).map_err(io::Error::other)?;
    Ok(buf)
}

/// SHA-256 of the canonical JSON of `config`, ignoring the output path.
pub fn config_hash(config: &JobConfig) -> io::Result<String> {
    let mut c = config.clone();
    c.out = None;
    Ok(hex::encode(Sha256::digest(to_json(&c)?)))
}

#[derive(Serialize)]
pub struct Provenance<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_hash: &'a str,
}

#[derive(Serialize)]
struct Artifact<'a, R: Serialize> {
    provenance: Provenance<'a>,
    config: &'a JobConfig,
    result: &'a R,
}

pub fn json_artifact<R: Serialize>(config: &JobConfig, result: &R) -> io::Result<Vec<u8>> {
    let hash = config_hash(config)?;
    let art = Artifact {
        provenance: Provenance { tool: TOOL, version: VERSION, command: config.command.name(), config_hash: &hash },
        config,
        result,
    };
    let mut out = to_json(&art)?;
    out.push(b'\n');
    Ok(out)
}

/// One polyline vertex of a traced arc.
pub struct ArcRow {
    pub j: u8,
    pub arc_id: usize,
    pub point_index: usize,
    pub t: [f64; 2],
}

/// `#` provenance lines, then the mandatory header and one row per vertex.
pub fn csv_artifact(config: &JobConfig, rows: &[ArcRow]) -> io::Result<Vec<u8>> {
    let hash = config_hash(config)?;
    let mut buf = Vec::new();
    writeln!(buf, "# {TOOL} {VERSION}")?;
    writeln!(buf, "# command={} config_hash={hash}", config.command.name())?;
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["j", "arc_id", "point_index", "T_re", "T_im"])?;
        for r in rows {
            for v in r.t {
                if !v.is_finite() {
                    return Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite arc vertex"));
                }
            }
            w.write_record([
                r.j.to_string(),
                r.arc_id.to_string(),
                r.point_index.to_string(),
                format!("{:.16e}", r.t[0]),
                format!("{:.16e}", r.t[1]),
            ])?;
        }
        w.flush()?;
    }
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for v in [0.1f64, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = String::from_utf8(to_json(&v).unwrap()).unwrap();
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(to_json(&[1.0, f64::NAN]).is_err());
        assert!(to_json(&f64::INFINITY).is_err());
    }
}
