//! Deterministic text output: 17-significant-digit floats, field CSV and
//! JSON with a fixed float format, and write-then-rename file output.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use crate::field::{FieldValue, GridSpec, ScalarField, VectorField};

/// Formats with 17 significant digits; non-finite values become `nan`/`inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// serde_json formatter writing every float with 17 significant digits.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format!("{value:.16e}").as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Pretty-printed JSON with the fixed float format. Non-finite floats are
/// written as `null`.
pub fn to_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    // Pretty layout with the custom float writer: serialize once to a Value
    // tree, then re-emit with indentation handled here.
    let tree = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&tree, 0, &mut out);
    out.push('\n');
    Ok(out)
}

fn write_value(v: &serde_json::Value, indent: usize, out: &mut String) {
    use serde_json::Value;
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let mut buf = Vec::new();
                let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
                n.as_f64().unwrap_or(f64::NAN).serialize(&mut ser).expect("in-memory write");
                out.push_str(std::str::from_utf8(&buf).expect("ascii"));
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(item, indent + 1, out);
                if k + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("string key"));
                out.push_str(": ");
                write_value(item, indent + 1, out);
                if k + 1 < map.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Writes `contents` to a temporary sibling file and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Builder for the node-per-row field CSV: `x,y` then one column per
/// component of every added field.
pub struct FieldCsv<'a> {
    grid: &'a GridSpec,
    header: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl<'a> FieldCsv<'a> {
    pub fn new(grid: &'a GridSpec) -> Self {
        Self {
            grid,
            header: vec!["x".into(), "y".into()],
            columns: Vec::new(),
        }
    }

    fn push_values<T: FieldValue>(&mut self, name: &str, values: &[T]) {
        assert_eq!(values.len(), self.grid.len(), "field does not match csv grid");
        let width = T::COMPONENTS.len();
        let mut cols = vec![Vec::with_capacity(values.len()); width];
        let mut buf = Vec::with_capacity(width);
        for v in values {
            buf.clear();
            v.push_components(&mut buf);
            for (c, x) in cols.iter_mut().zip(buf.iter()) {
                c.push(*x);
            }
        }
        for (suffix, col) in T::COMPONENTS.iter().zip(cols) {
            self.header.push(format!("{name}{suffix}"));
            self.columns.push(col);
        }
    }

    pub fn scalar<T: FieldValue>(mut self, name: &str, f: &ScalarField<T>) -> Self {
        self.push_values(name, &f.values);
        self
    }

    pub fn vector<T: FieldValue>(mut self, name: &str, v: &VectorField<T>) -> Self {
        self.push_values(&format!("{name}_x"), &v.comps[0]);
        self.push_values(&format!("{name}_y"), &v.comps[1]);
        self
    }

    pub fn finish(self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for n in 0..self.grid.len() {
            let p = self.grid.point(n);
            let mut row = vec![format_f64(p[0]), format_f64(p[1])];
            row.extend(self.columns.iter().map(|c| format_f64(c[n])));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn float_format_has_17_significant_digits_and_round_trips() {
        let s = format_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        for x in [1.0 / 3.0, -2.5e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(f64::NAN), "nan");
    }

    #[test]
    fn json_uses_fixed_float_format() {
        #[derive(Serialize)]
        struct S {
            a: f64,
            b: Vec<f64>,
            n: usize,
            bad: f64,
        }
        let s = to_json(&S { a: 0.5, b: vec![1.0, -2.0], n: 3, bad: f64::NAN }).unwrap();
        assert!(s.contains("\"a\": 5.0000000000000000e-1"));
        assert!(s.contains("\"n\": 3"));
        assert!(s.contains("\"bad\": null"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["b"][1].as_f64(), Some(-2.0));
    }

    #[test]
    fn field_csv_layout() {
        let g = GridSpec::spanning(3, 3, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let f = ScalarField::sample(&g, |p| Complex64::new(p[0], p[1]));
        let v = VectorField::sample(&g, |p| [p[0], 2.0]);
        let csv = FieldCsv::new(&g).scalar("phi", &f).vector("a", &v).finish();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "x,y,phi_re,phi_im,a_x,a_y");
        assert_eq!(csv.lines().count(), 10);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = std::env::temp_dir().join(format!("qab-io-{}", std::process::id()));
        let path = dir.join("out.txt");
        write_atomic(&path, "one").unwrap();
        write_atomic(&path, "two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        let leftovers = fs::read_dir(&dir).unwrap().count();
        assert_eq!(leftovers, 1);
        fs::remove_dir_all(dir).unwrap();
    }
}
