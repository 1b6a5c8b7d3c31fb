//! Plain-text and delimited rendering of result tables.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Align {
    Left,
    Right,
}

/// A rectangular table of pre-formatted cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub caption: Option<String>,
    pub headers: Vec<String>,
    pub align: Vec<Align>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str], align: &[Align]) -> Self {
        assert_eq!(headers.len(), align.len());
        Table {
            caption: None,
            headers: headers.iter().map(|h| h.to_string()).collect(),
            align: align.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn with_caption(mut self, caption: &str) -> Self {
        self.caption = Some(caption.to_string());
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// Pandoc "simple table" layout: every column is one character wider
    /// than its widest cell and columns are separated by two spaces.
    pub fn to_text(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                let cells = self.rows.iter().map(|r| r[c].chars().count());
                cells.chain([self.headers[c].chars().count()]).max().unwrap_or(0) + 1
            })
            .collect();
        let line = |cells: &[String]| -> String {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .zip(&self.align)
                .map(|((cell, &w), a)| match a {
                    Align::Left => format!("{cell:<w$}"),
                    Align::Right => format!("{cell:>w$}"),
                })
                .collect();
            parts.join("  ").trim_end().to_string()
        };

        let mut out = String::new();
        if let Some(c) = &self.caption {
            let _ = writeln!(out, "Table: {c}\n");
        }
        let _ = writeln!(out, "{}", line(&self.headers));
        let dashes: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", dashes.join("  "));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }

    /// Delimiter-separated values with a header row; fields containing the
    /// delimiter or quotes are quoted.
    pub fn to_delimited(&self, delimiter: u8) -> String {
        let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
        // writing to a Vec cannot fail
        w.write_record(&self.headers).expect("in-memory csv");
        for row in &self.rows {
            w.write_record(row).expect("in-memory csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 input")
    }
}

/// Fixed-decimal display value.
pub fn fixed(x: f64, decimals: usize) -> String {
    if x.is_nan() {
        return "NA".into();
    }
    let s = format!("{x:.decimals$}");
    // avoid "-0.00"
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Machine-output value with 12 significant digits.
pub fn sig12(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NA".into()
        } else if x > 0.0 {
            "Inf".into()
        } else {
            "-Inf".into()
        };
    }
    let s = format!("{x:.11e}");
    let v: f64 = s.parse().unwrap_or(x);
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pandoc_layout() {
        let mut t = Table::new(&["Parameter", "Mean", "Median"], &[Align::Left, Align::Right, Align::Right]);
        t.push(vec!["lambda[Freschetta]".into(), "0.22".into(), "0.25".into()]);
        t.push(vec!["lambda[aKroger]".into(), "-0.35".into(), "-0.32".into()]);
        let text = t.to_text();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Parameter              Mean   Median");
        assert_eq!(lines[1], "-------------------  ------  -------");
        assert_eq!(lines[2], "lambda[Freschetta]     0.22     0.25");
    }

    #[test]
    fn delimited_quotes_fields() {
        let mut t = Table::new(&["a", "b"], &[Align::Left, Align::Left]);
        t.push(vec!["x,y".into(), "1".into()]);
        assert_eq!(t.to_delimited(b','), "a,b\n\"x,y\",1\n");
    }

    #[test]
    fn number_formats() {
        assert_eq!(fixed(-0.001, 2), "0.00");
        assert_eq!(fixed(1.005, 1), "1.0");
        assert_eq!(sig12(0.1 + 0.2), "0.3");
        assert_eq!(sig12(f64::NAN), "NA");
        assert_eq!(sig12(-123456.7890123456), "-123456.789012");
    }
}
