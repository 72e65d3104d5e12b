//! Textual form of Orlicz functions.
//!
//! ```text
//! power:p=<real>[,c=<real>]
//! pl:[[t0,v0],[t1,v1],...][;tail=<real>][;bound=<real>]
//! ```
//!
//! The `tail` and `bound` suffixes are optional; without them a piecewise-linear
//! function extends past its last breakpoint with the final segment slope.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::function::{OrliczFunction, PiecewiseLinear, Tail};
use crate::error::{Error, Result};

fn parse_real(key: &str, s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: cannot parse '{s}' as a real number")))
}

fn parse_power(body: &str) -> Result<OrliczFunction> {
    let mut p = None;
    let mut c = 1.0;
    for part in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
        match key.trim() {
            "p" => p = Some(parse_real("p", value)?),
            "c" => c = parse_real("c", value)?,
            other => return Err(Error::Parse(format!("unknown power parameter '{other}'"))),
        }
    }
    let p = p.ok_or_else(|| Error::Parse("power function needs p=<real>".into()))?;
    OrliczFunction::power(p, c)
}

fn parse_pl(body: &str) -> Result<OrliczFunction> {
    let mut parts = body.split(';');
    let list = parts.next().unwrap_or_default();
    let pairs: Vec<[f64; 2]> =
        serde_json::from_str(list.trim()).map_err(|e| Error::Parse(format!("breakpoint list '{list}': {e}")))?;
    let mut tail = None;
    let mut bound = None;
    for part in parts.map(str::trim).filter(|s| !s.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}'")))?;
        match key.trim() {
            "tail" => tail = Some(parse_real("tail", value)?),
            "bound" => bound = Some(parse_real("bound", value)?),
            other => return Err(Error::Parse(format!("unknown pl option '{other}'"))),
        }
    }
    let knots = pairs.into_iter().map(|[t, v]| (t, v)).collect();
    OrliczFunction::piecewise_linear(knots, tail, bound)
}

impl FromStr for OrliczFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("missing '<kind>:' prefix in '{s}'")))?;
        match kind.trim() {
            "power" => parse_power(body),
            "pl" => parse_pl(body),
            other => Err(Error::Parse(format!("unknown Orlicz function kind '{other}'"))),
        }
    }
}

fn write_pl(f: &mut fmt::Formatter<'_>, pl: &PiecewiseLinear) -> fmt::Result {
    f.write_str("pl:[")?;
    for (i, (t, v)) in pl.knots().iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "[{t:?},{v:?}]")?;
    }
    f.write_str("]")?;
    match pl.tail() {
        Tail::Slope(s) => {
            let slopes = pl.segment_slopes();
            if slopes.last().is_none_or(|&last| last != s) {
                write!(f, ";tail={s:?}")?;
            }
        }
        Tail::Wall => {
            let bound = pl.knots().last().expect("non-empty").0;
            write!(f, ";bound={bound:?}")?;
        }
    }
    Ok(())
}

impl fmt::Display for OrliczFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrliczFunction::Power { p, c } if *c == 1.0 => write!(f, "power:p={p:?}"),
            OrliczFunction::Power { p, c } => write!(f, "power:p={p:?},c={c:?}"),
            OrliczFunction::PiecewiseLinear(pl) => write_pl(f, pl),
        }
    }
}

impl Serialize for OrliczFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for OrliczFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
