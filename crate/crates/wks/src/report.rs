//! Output assembly: a comment header echoing the tool version, the command
//! and the resolved configuration, optional `#` summary lines, then CSV.

use crate::config::Settings;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Report {
    command: String,
    notes: Vec<String>,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(command: &str, columns: &[&'static str]) -> Self {
        Self { command: command.to_string(), notes: Vec::new(), columns: columns.to_vec(), rows: Vec::new() }
    }

    /// Adds a human-readable summary line.
    pub fn note(&mut self, line: impl Into<String>) {
        self.notes.push(line.into());
    }

    pub fn row(&mut self, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    pub fn render(&self, settings: &Settings) -> String {
        let mut out = header(&self.command, settings);
        for n in &self.notes {
            out.push_str("# ");
            out.push_str(n);
            out.push('\n');
        }
        out.push_str(&csv_table(&self.columns, &self.rows));
        out
    }
}

pub fn header(command: &str, settings: &Settings) -> String {
    let mut out = format!("# wks {VERSION}\n# command: {command}\n");
    for (k, v) in settings.echo() {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out
}

pub fn csv_table(columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn flag(b: bool) -> String {
    b.to_string()
}
