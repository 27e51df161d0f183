use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::Value;

use crate::args::OutputArgs;
use crate::CliError;

/// Number formatting shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Numbers {
    pub decimals: usize,
    pub raw: bool,
}

impl Numbers {
    pub fn new(out: &OutputArgs) -> Self {
        Self {
            decimals: out.decimals,
            raw: out.raw,
        }
    }

    pub fn text(&self, v: f64) -> String {
        if v.is_nan() {
            "nan".into()
        } else if v.is_infinite() {
            if v > 0.0 { "inf" } else { "-inf" }.into()
        } else if self.raw {
            format!("{v:.16e}")
        } else {
            format!("{v:.prec$}", prec = self.decimals)
        }
    }

    pub fn opt_text(&self, v: Option<f64>) -> String {
        v.map(|v| self.text(v)).unwrap_or_default()
    }

    /// Finite values as JSON numbers, extended values as their CSV tokens.
    pub fn json(&self, v: f64) -> Value {
        if v.is_finite() {
            let v = if self.raw {
                v
            } else {
                qubvp::convergence::round_to(v, self.decimals)
            };
            Value::from(v)
        } else {
            Value::from(self.text(v))
        }
    }

    pub fn opt_json(&self, v: Option<f64>) -> Value {
        v.map_or(Value::Null, |v| self.json(v))
    }
}

pub fn sink(out: &OutputArgs) -> Result<Box<dyn Write>, CliError> {
    Ok(match &out.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_csv(w: &mut dyn Write, rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut csv = csv::WriterBuilder::new().flexible(true).from_writer(w);
    for row in rows {
        csv.write_record(row).map_err(|e| CliError::Io(e.into()))?;
    }
    csv.flush()?;
    Ok(())
}

pub fn write_json(w: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Io(e.into()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}
