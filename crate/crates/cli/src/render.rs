use serde_json::{json, Value};

/// CSV table preceded by a `#` metadata line.
pub struct Table {
    meta: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(meta: &Meta, header: &[&str]) -> Self {
        Table {
            meta: meta.line(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        self.rows.push(fields);
    }

    pub fn render(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        let body = String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8");
        format!("{}\n{body}", self.meta)
    }
}

/// Run metadata echoed in every output.
pub struct Meta {
    pub command: &'static str,
    pub seed: u64,
    pub sequence: String,
}

impl Meta {
    fn line(&self) -> String {
        format!(
            "# command={} seed={} sequence={}",
            self.command,
            self.seed,
            self.sequence.replace('\n', " ")
        )
    }

    /// `body` preceded by the metadata line.
    pub fn csv(&self, body: String) -> String {
        format!("{}\n{body}", self.line())
    }

    /// JSON document `{"command", "seed", "sequence", "result"}`.
    pub fn json(&self, result: Value) -> String {
        let doc = json!({
            "command": self.command,
            "seed": self.seed,
            "sequence": self.sequence,
            "result": result,
        });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable value");
        s.push('\n');
        s
    }
}
