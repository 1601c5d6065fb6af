//! CSV and JSON output helpers. Floats are written with 17 significant
//! digits so that they parse back to the same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table with a header row.
#[derive(Debug, Clone, Default)]
pub struct Table {
    header: Vec<String>,
    body: String,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_owned()).collect(),
            body: String::new(),
        }
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    /// Appends a row whose first column is an integer index.
    pub fn push_indexed(&mut self, index: usize, values: &[f64]) {
        debug_assert_eq!(values.len() + 1, self.header.len());
        let _ = write!(self.body, "{index}");
        for &v in values {
            let _ = write!(self.body, ",{}", fmt_f64(v));
        }
        self.body.push('\n');
    }

    pub fn push(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.header.len());
        let row: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.body.push_str(&row.join(","));
        self.body.push('\n');
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }

    /// Writes to `path`, or to `out` when no path is given.
    pub fn write_to(&self, path: Option<&Path>, out: &mut dyn Write) -> io::Result<()> {
        match path {
            Some(p) => fs::write(p, self.render()),
            None => out.write_all(self.render().as_bytes()),
        }
    }
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable value")
}

/// Pretty JSON followed by a newline, to `path` or `out`.
pub fn write_json<T: Serialize + ?Sized>(
    value: &T,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> io::Result<()> {
    let text = to_json(value) + "\n";
    match path {
        Some(p) => fs::write(p, text),
        None => out.write_all(text.as_bytes()),
    }
}
