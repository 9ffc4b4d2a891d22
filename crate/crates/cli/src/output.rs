use std::io::Write;

use clap::ValueEnum;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Collects a report; text lines or one JSON object per record.
pub struct Report {
    format: Format,
    out: String,
}

impl Report {
    pub fn new(format: Format) -> Self {
        Report {
            format,
            out: String::new(),
        }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    /// Adds a record: `text` in text mode, `json` otherwise.
    pub fn record(&mut self, text: impl AsRef<str>, json: Value) {
        match self.format {
            Format::Text => {
                self.out.push_str(text.as_ref());
                if !text.as_ref().ends_with('\n') {
                    self.out.push('\n');
                }
            }
            Format::Json => {
                self.out.push_str(&json.to_string());
                self.out.push('\n');
            }
        }
    }

    pub fn into_string(self) -> String {
        self.out
    }

    pub fn print(self) -> std::io::Result<()> {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(self.out.as_bytes())?;
        stdout.flush()
    }
}

/// Twelve decimals, `inf` for infinity.
pub fn fixed(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x:.12}")
    }
}

/// The value printed by [`fixed`], as a JSON number; `"inf"` for infinity.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        serde_json::json!(fixed(x).parse::<f64>().expect("formatted float"))
    } else {
        Value::String("inf".into())
    }
}
