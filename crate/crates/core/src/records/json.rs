use serde::Serialize;
use serde_json::ser::Formatter;
use std::io;

/// Compact JSON with every float written at six decimals and negative
/// zero normalized.
struct Fixed6;

impl Formatter for Fixed6 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        let s = format!("{v:.6}");
        w.write_all(if s == "-0.000000" { b"0.000000" } else { s.as_bytes() })
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Serializes through a `serde_json::Value`, whose maps keep keys sorted.
pub(crate) fn to_canonical_bytes<T: Serialize>(value: &T) -> serde_json::Result<Vec<u8>> {
    let v = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed6);
    v.serialize(&mut ser)?;
    Ok(out)
}
