//! Human (tabular) and machine (JSON lines) output.
//!
//! Commands emit records: a kind plus ordered fields. Machine output
//! writes one JSON object per record with `record` first and the fields
//! in emission order. Human output groups consecutive records of the same
//! kind: a lone record prints as `name: value` lines, a group as a table.

use std::io::Write;

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

pub type Fields = Vec<(&'static str, Value)>;

pub struct Out {
    format: Format,
    pending: Vec<(String, Fields)>,
}

impl Out {
    pub fn new(format: Format) -> Self {
        Self {
            format,
            pending: Vec::new(),
        }
    }

    pub fn machine(&self) -> bool {
        self.format == Format::Machine
    }

    pub fn record(&mut self, kind: &str, fields: Fields) {
        self.pending.push((kind.to_string(), fields));
    }

    pub fn flush(&mut self) {
        let stdout = std::io::stdout();
        let mut w = stdout.lock();
        let text = match self.format {
            Format::Machine => machine_lines(&self.pending),
            Format::Human => human_text(&self.pending),
        };
        // a closed pipe is not worth a panic
        let _ = w.write_all(text.as_bytes());
        let _ = w.flush();
        self.pending.clear();
    }
}

fn machine_lines(records: &[(String, Fields)]) -> String {
    let mut s = String::new();
    for (kind, fields) in records {
        s.push_str("{\"record\":");
        s.push_str(&Value::from(kind.as_str()).to_string());
        for (k, v) in fields {
            s.push(',');
            s.push_str(&Value::from(*k).to_string());
            s.push(':');
            s.push_str(&v.to_string());
        }
        s.push_str("}\n");
    }
    s
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn label(k: &str) -> String {
    k.replace('_', " ")
}

fn human_text(records: &[(String, Fields)]) -> String {
    let mut s = String::new();
    let mut i = 0;
    while i < records.len() {
        let kind = &records[i].0;
        let mut j = i + 1;
        while j < records.len() && &records[j].0 == kind {
            j += 1;
        }
        let group = &records[i..j];
        if group.len() == 1 {
            for (k, v) in &group[0].1 {
                s.push_str(&format!("{}: {}\n", label(k), plain(v)));
            }
        } else {
            let header: Vec<String> = group[0].1.iter().map(|(k, _)| label(k)).collect();
            let rows: Vec<Vec<String>> = group.iter().map(|(_, f)| f.iter().map(|(_, v)| plain(v)).collect()).collect();
            let mut widths: Vec<usize> = header.iter().map(String::len).collect();
            for row in &rows {
                for (c, cell) in row.iter().enumerate() {
                    if c < widths.len() {
                        widths[c] = widths[c].max(cell.len());
                    }
                }
            }
            let line = |cells: &[String]| {
                let mut l = cells
                    .iter()
                    .enumerate()
                    .map(|(c, x)| format!("{:<w$}", x, w = widths.get(c).copied().unwrap_or(0)))
                    .collect::<Vec<_>>()
                    .join("  ");
                l.truncate(l.trim_end().len());
                l.push('\n');
                l
            };
            s.push_str(&line(&header));
            for row in &rows {
                s.push_str(&line(row));
            }
        }
        i = j;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn formats() {
        let recs = vec![
            ("match".to_string(), vec![("obj_id", json!(1)), ("distance", json!(0.5))]),
            ("match".to_string(), vec![("obj_id", json!(22)), ("distance", json!(0.25))]),
            ("summary".to_string(), vec![("oracle_match", json!("3/3"))]),
        ];
        assert_eq!(
            machine_lines(&recs[..1]),
            "{\"record\":\"match\",\"obj_id\":1,\"distance\":0.5}\n"
        );
        assert_eq!(
            human_text(&recs),
            "obj id  distance\n1       0.5\n22      0.25\noracle match: 3/3\n"
        );
    }
}
