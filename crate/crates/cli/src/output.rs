use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use serde_json::{json, Value};

/// Shortest of fixed or exponent notation with `digits` significant digits
/// and trailing zeros removed, like C's `%.{digits}g`.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| fmt_sig(v, 9))
}

/// Destination for a command's main output.
pub struct Sink {
    pub path: Option<PathBuf>,
}

impl Sink {
    /// Writes `body` to the output file, or stdout when none was given.
    pub fn write(&self, body: &str) -> anyhow::Result<()> {
        match &self.path {
            Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body.as_bytes()).context("writing stdout")?;
                out.flush().context("writing stdout")
            }
        }
    }

    /// Run metadata: a `<out>.meta.json` sidecar next to file output, or one
    /// JSON line on stderr.
    pub fn write_meta(&self, meta: &Value) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(meta).expect("metadata serializes");
        match &self.path {
            Some(p) => {
                let side = sidecar(p, "meta.json");
                std::fs::write(&side, text + "\n").with_context(|| format!("writing {}", side.display()))
            }
            None => {
                eprintln!("{}", serde_json::to_string(meta).expect("metadata serializes"));
                Ok(())
            }
        }
    }

    pub fn svg_path(&self) -> Option<PathBuf> {
        self.path.as_deref().map(|p| p.with_extension("svg"))
    }
}

fn sidecar(p: &Path, suffix: &str) -> PathBuf {
    let mut name = p.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(suffix);
    p.with_file_name(name)
}

pub fn base_meta(command: &str, hash: &str, seed: u64) -> Value {
    json!({
        "command": command,
        "config_hash": hash,
        "seed": seed,
        "version": env!("CARGO_PKG_VERSION"),
    })
}
