//! Report tables and their three renderings: an aligned text table, CSV,
//! and JSON lines (`rows`). Rendering is a pure function of the report, so
//! equal inputs give byte-identical output.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Rows,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Sums and scalar results, in display order.
    pub summary: Vec<(String, String)>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Report { title: title.into(), columns: columns.iter().map(|c| c.to_string()).collect(), ..Default::default() }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        assert_eq!(cells.len(), self.columns.len(), "row width");
        self.rows.push(cells);
    }

    pub fn sum(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.summary.push((key.into(), value.into()));
    }

    pub fn note(&mut self, text: impl Into<String>) {
        let t = text.into();
        if !self.notes.contains(&t) {
            self.notes.push(t);
        }
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            Format::Csv => self.csv(),
            Format::Rows => self.json_lines(),
        }
    }

    fn text(&self) -> String {
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        if !self.columns.is_empty() && !self.rows.is_empty() {
            let widths: Vec<usize> = (0..self.columns.len())
                .map(|i| self.rows.iter().map(|r| r[i].chars().count()).chain([self.columns[i].chars().count()]).max().unwrap_or(0))
                .collect();
            let line = |cells: &[String]| {
                let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                padded.join("  ").trim_end().to_string()
            };
            let _ = writeln!(out, "{}", line(&self.columns));
            let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
            for r in &self.rows {
                let _ = writeln!(out, "{}", line(r));
            }
        }
        let kw = self.summary.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        for (k, v) in &self.summary {
            let _ = writeln!(out, "{k:<kw$}  {v}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        out
    }

    fn csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        for (k, v) in &self.summary {
            w.write_record([format!("#{k}"), v.clone()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells")
    }

    fn json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let obj: Map<String, Value> =
                self.columns.iter().zip(r).map(|(c, v)| (c.clone(), Value::String(v.clone()))).collect();
            let _ = writeln!(out, "{}", Value::Object(obj));
        }
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let _ = writeln!(out, "{}", json!({ "title": self.title, "summary": summary, "notes": self.notes }));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let mut r = Report::new("h_{0,2}", &["place", "value"]);
        r.row(vec!["2".into(), "1.386".into()]);
        r.row(vec!["inf".into(), "1.386".into()]);
        r.sum("total", "2.772");
        r.note("d = 0 counted as 0");
        r
    }

    #[test]
    fn text_aligns_columns() {
        let t = sample().render(Format::Text);
        assert!(t.contains("place  value\n-----  -----\n2      1.386\ninf    1.386\n"), "{t}");
        assert!(t.ends_with("total  2.772\nnote: d = 0 counted as 0\n"));
    }

    #[test]
    fn csv_and_rows() {
        let c = sample().render(Format::Csv);
        assert_eq!(c, "place,value\n2,1.386\ninf,1.386\n#total,2.772\n");
        let j = sample().render(Format::Rows);
        let last: Value = serde_json::from_str(j.lines().last().unwrap()).unwrap();
        assert_eq!(last["summary"]["total"], "2.772");
        assert_eq!(j.lines().count(), 3);
    }
}
