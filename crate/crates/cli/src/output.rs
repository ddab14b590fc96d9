//! Number formatting and CSV/JSON rendering.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use oxy_fbp_core::Trajectory;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits and prints the shortest decimal that parses back
/// to the rounded value; very small or large magnitudes use exponent notation.
pub fn fmt12(v: f64) -> String {
    let r = round12(v);
    if r != 0.0 && !(1e-5..1e15).contains(&r.abs()) {
        format!("{r:e}")
    } else {
        r.to_string()
    }
}

pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("scientific notation always parses")
}

/// Comma-separated text with a mandatory header and `\n` line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let fields: Vec<S> = fields.into_iter().collect();
        let line: Vec<&str> = fields.iter().map(AsRef::as_ref).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        self.row(values.iter().map(|&v| fmt12(v)));
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

#[derive(Debug, Serialize)]
pub struct SampleDoc {
    pub t: f64,
    pub s: f64,
    pub a: f64,
}

#[derive(Debug, Serialize)]
pub struct SolveDoc {
    pub method: &'static str,
    pub termination: &'static str,
    pub samples: Vec<SampleDoc>,
}

impl SolveDoc {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self {
            method: traj.method.name(),
            termination: traj.termination.name(),
            samples: traj
                .samples
                .iter()
                .map(|st| SampleDoc {
                    t: round12(st.t),
                    s: round12(st.s),
                    a: round12(st.a),
                })
                .collect(),
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut text =
        serde_json::to_string_pretty(doc).expect("documents contain only finite numbers");
    text.push('\n');
    text
}

/// Writes to `path`, or to standard output when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
