//! Experiment configuration as flat `key = value` lines.
//!
//! `#` starts a comment, lists are comma separated. Required keys:
//! `h_list`, `n_subjects_list`, `n_obs_list`, `horizon`, `mu0`, `sigma20`,
//! `replications`. Optional: `k` (2), `filter` (`diff2`), `base_seed` (0),
//! `estimate_hurst` (false), `sampler` (`exact`).

use std::collections::BTreeMap;

use mixfbm_core::{ExperimentConfig, Hurst, SamplerKind, VariationFilter};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{}{key}: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: String,
    pub message: String,
}

const REQUIRED: [&str; 7] = [
    "h_list",
    "n_subjects_list",
    "n_obs_list",
    "horizon",
    "mu0",
    "sigma20",
    "replications",
];
const OPTIONAL: [&str; 5] = ["k", "filter", "base_seed", "estimate_hurst", "sampler"];

/// `diff2`, `diff3`, or comma-separated coefficients.
pub fn parse_filter(text: &str) -> Result<VariationFilter, String> {
    match text.trim() {
        "diff2" => Ok(VariationFilter::diff2()),
        "diff3" => Ok(VariationFilter::diff3()),
        other => {
            let coeffs = parse_list::<f64>(other)
                .map_err(|_| format!("unknown filter `{other}` (expected diff2, diff3 or comma-separated coefficients)"))?;
            VariationFilter::new(coeffs).map_err(|e| e.to_string())
        }
    }
}

pub fn parse_sampler(text: &str) -> Result<SamplerKind, String> {
    match text.trim() {
        "exact" => Ok(SamplerKind::Exact),
        "circulant" => Ok(SamplerKind::Circulant),
        other => Err(format!("unknown sampler `{other}` (expected exact or circulant)")),
    }
}

pub fn sampler_name(kind: SamplerKind) -> &'static str {
    match kind {
        SamplerKind::Exact => "exact",
        SamplerKind::Circulant => "circulant",
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>, String> {
    let items: Result<Vec<T>, _> = text.split(',').map(|s| s.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(format!("invalid list `{text}`")),
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |key: &str, message: String| ConfigError {
            line: Some(line_no),
            key: key.to_string(),
            message,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(line, "expected `key = value`".into()));
        };
        let (key, value) = (key.trim(), value.trim());
        if !REQUIRED.contains(&key) && !OPTIONAL.contains(&key) {
            return Err(err(key, "unknown key".into()));
        }
        if value.is_empty() {
            return Err(err(key, "missing value".into()));
        }
        if let Some((first, _)) = entries.get(key) {
            return Err(err(key, format!("duplicate key (first set on line {first})")));
        }
        entries.insert(key.to_string(), (line_no, value.to_string()));
    }

    for key in REQUIRED {
        if !entries.contains_key(key) {
            return Err(ConfigError {
                line: None,
                key: key.into(),
                message: "required key is missing".into(),
            });
        }
    }

    let field = |key: &str| entries.get(key).map(|(l, v)| (*l, v.as_str()));
    let fail = |key: &str, message: String| ConfigError {
        line: entries.get(key).map(|(l, _)| *l),
        key: key.into(),
        message,
    };
    let list = |key: &str| -> Result<Vec<String>, ConfigError> {
        let (_, v) = field(key).expect("checked");
        parse_list::<String>(v).map_err(|m| fail(key, m))
    };
    let real = |key: &str| -> Result<f64, ConfigError> {
        let (_, v) = field(key).expect("checked");
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| fail(key, format!("invalid number `{v}`")))
    };
    let counts = |key: &str| -> Result<Vec<usize>, ConfigError> {
        list(key)?
            .iter()
            .map(|s| match s.parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(fail(key, format!("invalid positive integer `{s}`"))),
            })
            .collect()
    };

    let h_list = list("h_list")?
        .iter()
        .map(|s| {
            let h = s.parse::<f64>().map_err(|_| fail("h_list", format!("invalid number `{s}`")))?;
            Hurst::new(h).map_err(|e| fail("h_list", e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let replications = match field("replications").expect("checked").1.parse::<usize>() {
        Ok(r) if r > 0 => r,
        _ => return Err(fail("replications", "must be a positive integer".into())),
    };
    let horizon = real("horizon")?;
    if horizon <= 0.0 {
        return Err(fail("horizon", "must be positive".into()));
    }
    let sigma20 = real("sigma20")?;
    if sigma20 < 0.0 {
        return Err(fail("sigma20", "must be non-negative".into()));
    }

    let mut cfg = ExperimentConfig {
        h_list,
        n_subjects_list: counts("n_subjects_list")?,
        n_obs_list: counts("n_obs_list")?,
        horizon,
        mu0: real("mu0")?,
        sigma20,
        replications,
        ..ExperimentConfig::reference()
    };
    if field("k").is_some() {
        cfg.k = real("k")?;
        if cfg.k <= 0.0 {
            return Err(fail("k", "must be positive".into()));
        }
    }
    if let Some((_, v)) = field("filter") {
        cfg.filter = parse_filter(v).map_err(|m| fail("filter", m))?;
    }
    if let Some((_, v)) = field("base_seed") {
        cfg.base_seed = v.parse().map_err(|_| fail("base_seed", format!("invalid seed `{v}`")))?;
    }
    if let Some((_, v)) = field("estimate_hurst") {
        cfg.estimate_hurst = v.parse().map_err(|_| fail("estimate_hurst", format!("expected true or false, found `{v}`")))?;
    }
    if let Some((_, v)) = field("sampler") {
        cfg.sampler = parse_sampler(v).map_err(|m| fail("sampler", m))?;
    }
    cfg.validate().map_err(|e| fail("config", e.to_string()))?;
    Ok(cfg)
}
