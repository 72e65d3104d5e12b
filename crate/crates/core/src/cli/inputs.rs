use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;

use crate::error::{invalid, Error, Result};
use crate::orlicz::OrliczFunction;
use crate::spaces::{RealVector, WeightSequence};

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| invalid(format!("reading {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| invalid(format!("writing {}: {e}", path.display())))
}

/// Inline JSON, or `@path` to a JSON file.
fn json_arg<T: DeserializeOwned>(arg: &str, what: &str) -> Result<T> {
    let text = match arg.strip_prefix('@') {
        Some(path) => read_file(Path::new(path))?,
        None => arg.to_string(),
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn vector(arg: &str) -> Result<RealVector> {
    json_arg(arg, "vector")
}

pub fn vectors(arg: &str) -> Result<Vec<RealVector>> {
    json_arg(arg, "sample")
}

pub fn matrix(arg: &str) -> Result<Vec<Vec<f64>>> {
    json_arg(arg, "matrix")
}

pub fn orlicz(arg: &str) -> Result<OrliczFunction> {
    arg.parse()
}

/// JSON, `@path`, `ones` or `decay:<alpha>`; the named forms need `n`.
pub fn weights(arg: &str, n: Option<usize>) -> Result<WeightSequence> {
    let named = |n: Option<usize>| n.ok_or_else(|| invalid(format!("weights `{arg}` need --n")));
    let w = if arg == "ones" {
        WeightSequence::constant(named(n)?)?
    } else if let Some(alpha) = arg.strip_prefix("decay:") {
        let alpha: f64 = alpha
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad decay exponent in `{arg}`")))?;
        WeightSequence::power_decay(named(n)?, alpha)?
    } else {
        json_arg(arg, "weights")?
    };
    if let Some(n) = n {
        if w.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.len(),
            });
        }
    }
    Ok(w)
}

/// `count` vectors with i.i.d. uniform entries in `[−1, 1]`, from a dedicated stream of `seed`.
pub fn random_vectors(n: usize, count: usize, seed: u64) -> Result<Vec<RealVector>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    (0..count)
        .map(|_| RealVector::new((0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()))
        .collect()
}
