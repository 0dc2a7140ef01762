//! Rendering helpers shared by the CLI: aligned text tables, CSV encoding,
//! and crash-safe file output.

use std::borrow::Cow;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Write `contents` to `path` so that the destination is either untouched
/// or complete: the bytes land in a sibling temporary file which is then
/// renamed into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = sibling_tmp(path);
    if let Err(e) = fs::write(&tmp, contents) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

fn sibling_tmp(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Quote a CSV field when it contains a delimiter, quote, or line break;
/// embedded quotes are doubled.
pub fn csv_field(field: &str) -> Cow<'_, str> {
    if field.contains([',', '"', '\n', '\r']) {
        Cow::Owned(format!("\"{}\"", field.replace('"', "\"\"")))
    } else {
        Cow::Borrowed(field)
    }
}

/// Join fields into one comma-separated record terminated by a line feed.
pub fn csv_record(fields: &[String]) -> String {
    let mut out = String::new();
    for (i, field) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&csv_field(field));
    }
    out.push('\n');
    out
}

/// Shortest decimal representation that round-trips the value.
pub fn fmt_full(v: f64) -> String {
    format!("{v}")
}

/// Fixed six-decimal representation for human-facing tables.
pub fn fmt_fixed(v: f64) -> String {
    format!("{v:.6}")
}

/// Column-aligned monospace table.
pub struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(headers: I) -> Self {
        Table {
            headers: headers.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>, I: IntoIterator<Item = S>>(&mut self, cells: I) {
        let row: Vec<String> = cells.into_iter().map(Into::into).collect();
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let columns = self
            .rows
            .iter()
            .map(Vec::len)
            .chain(std::iter::once(self.headers.len()))
            .max()
            .unwrap_or(0);
        let mut widths = vec![0usize; columns];
        for row in std::iter::once(&self.headers).chain(&self.rows) {
            for (i, cell) in row.iter().enumerate() {
                widths[i] = widths[i].max(cell.chars().count());
            }
        }
        let mut out = String::new();
        let emit = |row: &[String], out: &mut String| {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push_str("  ");
                }
                out.push_str(cell);
                if i + 1 < row.len() {
                    for _ in cell.chars().count()..widths[i] {
                        out.push(' ');
                    }
                }
            }
            out.push('\n');
        };
        emit(&self.headers, &mut out);
        let rule: usize = widths.iter().sum::<usize>() + 2 * widths.len().saturating_sub(1);
        out.push_str(&"-".repeat(rule));
        out.push('\n');
        for row in &self.rows {
            emit(row, &mut out);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_fields_pass_through() {
        assert_eq!(csv_field("abc"), "abc");
        assert_eq!(csv_field("1.25e-3"), "1.25e-3");
        assert_eq!(csv_field(""), "");
    }

    #[test]
    fn special_fields_are_quoted() {
        assert_eq!(csv_field("a,b"), "\"a,b\"");
        assert_eq!(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
        assert_eq!(csv_field("line\nbreak"), "\"line\nbreak\"");
    }

    #[test]
    fn records_use_line_feeds() {
        let record = csv_record(&["alpha".into(), "1".into(), "x,y".into()]);
        assert_eq!(record, "alpha,1,\"x,y\"\n");
        assert!(!record.contains('\r'));
    }

    #[test]
    fn float_formats() {
        assert_eq!(fmt_full(0.1), "0.1");
        assert_eq!(fmt_full(std::f64::consts::PI), "3.141592653589793");
        assert_eq!(fmt_fixed(std::f64::consts::PI), "3.141593");
        assert_eq!(fmt_fixed(2.0), "2.000000");
        // shortest representation still round-trips
        let v = 0.347_523_947_503_935_4_f64;
        assert_eq!(fmt_full(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn table_renders_aligned_columns() {
        let mut t = Table::new(["n", "lambda", "note"]);
        t.push_row(["1", "0.347524", "ok"]);
        t.push_row(["10", "3.020644", "x"]);
        let text = t.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "n   lambda    note");
        assert_eq!(lines[1], "------------------");
        assert_eq!(lines[2], "1   0.347524  ok");
        assert_eq!(lines[3], "10  3.020644  x");
    }

    #[test]
    fn table_tolerates_ragged_rows() {
        let mut t = Table::new(["a", "b"]);
        t.push_row(["1"]);
        t.push_row(["2", "3", "4"]);
        let text = t.render();
        assert!(text.lines().count() == 4);
    }

    #[test]
    fn atomic_write_creates_and_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        write_atomic(&path, "first\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "first\n");
        write_atomic(&path, "second\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "second\n");
        // no stray temporary left behind
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, vec![std::ffi::OsString::from("out.csv")]);
    }

    #[test]
    fn atomic_write_missing_parent_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("no-such-dir").join("out.csv");
        assert!(write_atomic(&path, "data").is_err());
        assert!(!path.exists());
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 0);
    }
}
