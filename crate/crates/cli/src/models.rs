//! Named models and model files.

use std::path::Path;

use plantedcsp::{ClauseDistribution, Error, Predicate, Result, Source};

/// Names accepted wherever a model is expected. `K` and `ETA` are numbers.
pub const BUILTIN: &[&str] = &[
    "planted-sat:K",
    "quiet-4sat",
    "nae3",
    "xor:K",
    "noisy-parity:ETA",
    "goldreich-parity:K",
    "uniform:K",
];

pub fn builtin(name: &str) -> Result<Source> {
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => (h, Some(a)),
        None => (name, None),
    };
    let int = |default: Option<usize>| -> Result<usize> {
        match arg {
            Some(a) => a
                .parse()
                .map_err(|_| Error::Config(format!("bad parameter in model `{name}`"))),
            None => default.ok_or_else(|| Error::Config(format!("model `{name}` needs `:K`"))),
        }
    };
    Ok(match head {
        "planted-sat" => ClauseDistribution::planted_sat(int(Some(3))?)?.into(),
        "quiet-4sat" => ClauseDistribution::quiet_4sat().into(),
        "nae3" => ClauseDistribution::nae3().into(),
        "xor" => ClauseDistribution::xor(int(Some(3))?)?.into(),
        "uniform" => ClauseDistribution::uniform(int(None)?)?.into(),
        "goldreich-parity" => Predicate::parity(int(Some(3))?)?.into(),
        "noisy-parity" => {
            let eta = arg
                .unwrap_or("0.5")
                .parse()
                .map_err(|_| Error::Config(format!("bad noise rate in `{name}`")))?;
            ClauseDistribution::noisy_parity(eta)?.into()
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown model `{name}`; known: {}",
                BUILTIN.join(", ")
            )))
        }
    })
}

/// A builtin name, or a path to a JSON model file.
pub fn load(spec: &str) -> Result<Source> {
    let path = Path::new(spec);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        Source::from_json(&std::fs::read_to_string(path)?)
    } else {
        builtin(spec)
    }
}
