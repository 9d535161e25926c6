//! Number formatting shared by every CSV and JSON writer: 17 significant
//! digits, so values round-trip exactly.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

/// `{:.16e}`, with `nan`/`inf` spelled out.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Pretty JSON formatter writing every float with 17 significant digits.
/// Non-finite floats become `null`.
pub struct PreciseFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
}

impl Default for PreciseFormatter {
    fn default() -> Self {
        Self {
            inner: serde_json::ser::PrettyFormatter::with_indent(b"  "),
        }
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, writer: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.inner.$name(writer $(, $arg)*)
        })*
    };
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

/// Serializes `value` with [`PreciseFormatter`].
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, PreciseFormatter::default());
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

/// Writes `columns` as a CSV table with a header row and LF line endings.
pub fn write_columns(mut out: impl Write, headers: &[&str], columns: &[&[f64]]) -> io::Result<()> {
    assert_eq!(headers.len(), columns.len(), "one header per column");
    let rows = columns.iter().map(|c| c.len()).max().unwrap_or(0);
    writeln!(out, "{}", headers.join(","))?;
    for i in 0..rows {
        let row: Vec<String> = columns
            .iter()
            .map(|c| c.get(i).map(|v| fmt_f64(*v)).unwrap_or_default())
            .collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(-2.0), "-2.0000000000000000e0");
        let back: f64 = fmt_f64(std::f64::consts::PI).parse().unwrap();
        assert_eq!(back, std::f64::consts::PI);
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn json_floats_round_trip() {
        #[derive(Serialize)]
        struct R {
            a: f64,
            b: Vec<f64>,
            c: Option<f64>,
            name: &'static str,
        }
        let s = to_json_string(&R {
            a: 1.0 / 3.0,
            b: vec![1e-300, 2.5],
            c: Some(f64::NAN),
            name: "x",
        })
        .unwrap();
        assert!(s.contains("3.3333333333333331e-1"));
        assert!(s.contains("null"));
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["a"].as_f64().unwrap(), 1.0 / 3.0);
        assert_eq!(v["b"][0].as_f64().unwrap(), 1e-300);
    }

    #[test]
    fn csv_columns() {
        let mut buf = Vec::new();
        write_columns(&mut buf, &["t", "v"], &[&[0.0, 1.0], &[2.0]]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "t,v\n0.0000000000000000e0,2.0000000000000000e0\n1.0000000000000000e0,\n");
    }
}
