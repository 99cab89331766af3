//! Deterministic text rendering of sweep results.
//!
//! Numbers print as the shortest round-trip decimal, capped at 12
//! significant digits: short enough to keep rows stable across runs and
//! platforms, long enough that re-parsing recovers the value to ~5e-12
//! relative.

use crate::bounds::BoundRow;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    pub fn parse(text: &str) -> Result<Units> {
        match text {
            "nats" => Ok(Units::Nats),
            "bits" => Ok(Units::Bits),
            other => Err(Error::Domain(format!(
                "unknown units {other:?}, expected \"nats\" or \"bits\""
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }

    /// Multiplier applied to a first-power information quantity; raise it to
    /// the j-th power for j-th order moments.
    pub fn scale(&self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn from_nats(&self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

fn sig_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or(s);
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    digits.trim_start_matches('0').len()
}

/// Shortest round-trip decimal with at most 12 significant digits. Values
/// needing more are rounded to 12 first; the reprint of the rounded value
/// can never need more digits than the 12-digit form that produced it.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let shortest = x.to_string();
    if sig_digits(&shortest) <= 12 {
        return shortest;
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float reparses");
    rounded.to_string()
}

/// CSV table of sweep rows, LF line endings, empty cells for absent values.
/// Same rows and units produce byte-identical output.
pub fn sweep_csv(rows: &[BoundRow], units: Units) -> String {
    use std::fmt::Write;
    let mut out = String::from("n,shannon,normal,edgeworth,qbound,exact\n");
    for row in rows {
        let full = |v: f64| format_sig12(units.from_nats(v));
        let opt = |v: Option<f64>| v.map(|x| format_sig12(units.from_nats(x))).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            row.n,
            full(row.shannon),
            full(row.normal),
            opt(row.edgeworth),
            opt(row.q_bound),
            opt(row.exact),
        )
        .expect("writing to String cannot fail");
    }
    out
}
