//! Merged configuration: built-in defaults, then the config file, then flags.
//!
//! Config files are flat `key = value` lines; `#` starts a comment. Every key is
//! the long flag name with `_` for `-`, and both routes go through [`Settings::set`]
//! so they accept exactly the same values.

use std::fmt;
use std::path::{Path, PathBuf};

use qka_core::adversary::{AttackDescriptor, AttackKind, CollusionStrategy};
use qka_core::analysis::{ExperimentPlan, Sweep, SweepParam, DEFAULT_CONFIDENCE};
use qka_core::protocol::{HopId, Participant, ProtocolParams, TrojanCountermeasures};
use qka_core::qcore::{random_unitary, zero_disturbance_unitary, Matrix4};
use qka_core::rng::substream;
use qka_core::{QkaError, Unitary};

use crate::error::CliError;

pub const SEED_ENV: &str = "QKA_SEED";
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
        })
    }
}

/// Every configurable value; `None` means "not given, use the default".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub m: Option<usize>,
    pub l: Option<usize>,
    pub decoys: Option<usize>,
    pub qber_threshold: Option<f64>,
    pub check_sample_size: Option<usize>,
    pub flip_prob: Option<f64>,
    pub wavelength_filter: Option<bool>,
    pub photon_number_splitter: Option<bool>,
    pub attack: Option<AttackKind>,
    pub hops: Option<Vec<HopId>>,
    pub eve_unitary: Option<Unitary>,
    pub colluders: Option<[Participant; 2]>,
    pub strategy: Option<CollusionStrategy>,
    pub resend_distribution: Option<[f64; 4]>,
    pub trials: Option<usize>,
    pub sweep: Option<SweepParam>,
    pub sweep_values: Option<Vec<f64>>,
    pub confidence: Option<f64>,
}

/// Config keys in flag order.
pub const KEYS: [&str; 22] = [
    "seed",
    "workers",
    "out",
    "format",
    "m",
    "l",
    "decoys",
    "qber_threshold",
    "check_sample_size",
    "flip_prob",
    "wavelength_filter",
    "photon_number_splitter",
    "attack",
    "hops",
    "eve_unitary",
    "colluders",
    "strategy",
    "resend_distribution",
    "trials",
    "sweep",
    "sweep_values",
    "confidence",
];

fn number<T: std::str::FromStr>(value: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    value.parse::<T>().map_err(|e| format!("'{value}' is not valid: {e}"))
}

fn boolean(value: &str) -> Result<bool, String> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("'{value}' is not a boolean (true/false)")),
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn core<T>(r: qka_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn hops(value: &str) -> Result<Vec<HopId>, String> {
    if value.eq_ignore_ascii_case("all") {
        return Ok(HopId::all().collect());
    }
    let mut hops = list(value).map(|h| core(h.parse())).collect::<Result<Vec<HopId>, _>>()?;
    if hops.is_empty() {
        return Err("expected hop ids such as A1,B3 or 'all'".into());
    }
    hops.sort_unstable();
    hops.dedup();
    Ok(hops)
}

fn colluders(value: &str) -> Result<[Participant; 2], String> {
    let parts = list(value).map(|p| core(p.parse())).collect::<Result<Vec<Participant>, _>>()?;
    match parts[..] {
        [a, b] => Ok([a, b]),
        _ => Err(format!("expected two participants such as A,C, got '{value}'")),
    }
}

fn numbers(value: &str) -> Result<Vec<f64>, String> {
    list(value).map(number::<f64>).collect()
}

fn resend(value: &str) -> Result<[f64; 4], String> {
    numbers(value)?
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 4 weights for 0,1,+,-, got {}", v.len()))
}

/// `identity`, `cnot`, `random:SEED`, `zero-disturbance:SEED`, or 32 numbers
/// giving the 16 entries row by row as `re,im` pairs.
pub fn eve_unitary(value: &str) -> Result<Unitary, String> {
    let lower = value.trim().to_ascii_lowercase();
    let seeded = |prefix: &str| -> Option<Result<u64, String>> { lower.strip_prefix(prefix).map(|s| number(s.trim())) };
    let unitary = if lower == "identity" {
        Unitary::identity()
    } else if lower == "cnot" {
        Unitary::cnot()
    } else if let Some(seed) = seeded("random:") {
        random_unitary(&mut substream(seed?, &[0x0E7E]))
    } else if let Some(seed) = seeded("zero-disturbance:") {
        zero_disturbance_unitary(&mut substream(seed?, &[0x0E7E]))
    } else {
        let v = numbers(value)?;
        if v.len() != 32 {
            return Err(format!(
                "expected identity, cnot, random:SEED, zero-disturbance:SEED or 32 numbers, got '{value}'"
            ));
        }
        let mut m = Matrix4::identity();
        for (k, pair) in v.chunks(2).enumerate() {
            m.0[k / 4][k % 4] = qka_core::qcore::Complex::new(pair[0], pair[1]);
        }
        m
    };
    core(unitary.ensure_unitary())?;
    Ok(unitary)
}

/// `1,2,4`, or an inclusive integer range `1..12`.
fn sweep_values(value: &str) -> Result<Vec<f64>, String> {
    if let Some((a, b)) = value.split_once("..") {
        let (a, b): (i64, i64) = (number(a.trim())?, number(b.trim())?);
        if a > b {
            return Err(format!("empty range '{value}'"));
        }
        return Ok((a..=b).map(|x| x as f64).collect());
    }
    let v = numbers(value)?;
    if v.is_empty() {
        return Err("expected a list such as 1,2,4 or a range such as 1..12".into());
    }
    Ok(v)
}

impl Settings {
    /// Parses `value` for `key` (underscore spelling). Errors name neither key nor
    /// source; callers add that context.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value.trim();
        match key {
            "seed" => self.seed = Some(number(v)?),
            "workers" => self.workers = Some(number(v)?),
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => {
                self.format = Some(match v.to_ascii_lowercase().as_str() {
                    "json" => Format::Json,
                    "csv" => Format::Csv,
                    _ => return Err(format!("'{v}' is not json or csv")),
                })
            }
            "m" => self.m = Some(number(v)?),
            "l" => self.l = Some(number(v)?),
            "decoys" => self.decoys = Some(number(v)?),
            "qber_threshold" => self.qber_threshold = Some(number(v)?),
            "check_sample_size" => self.check_sample_size = Some(number(v)?),
            "flip_prob" => self.flip_prob = Some(number(v)?),
            "wavelength_filter" => self.wavelength_filter = Some(boolean(v)?),
            "photon_number_splitter" => self.photon_number_splitter = Some(boolean(v)?),
            "attack" => {
                self.attack = if v.eq_ignore_ascii_case("none") { None } else { Some(core(v.parse())?) }
            }
            "hops" => self.hops = Some(hops(v)?),
            "eve_unitary" => self.eve_unitary = Some(eve_unitary(v)?),
            "colluders" => self.colluders = Some(colluders(v)?),
            "strategy" => self.strategy = Some(core(v.parse())?),
            "resend_distribution" => self.resend_distribution = Some(resend(v)?),
            "trials" => self.trials = Some(number(v)?),
            "sweep" => self.sweep = Some(core(v.parse())?),
            "sweep_values" => self.sweep_values = Some(sweep_values(v)?),
            "confidence" => self.confidence = Some(number(v)?),
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Reads a config file; later flags are layered on top with [`Settings::set`].
    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Settings::parse_config(&text, &path.display().to_string())
    }

    pub fn parse_config(text: &str, file: &str) -> Result<Settings, CliError> {
        let mut settings = Settings::default();
        let mut seen: Vec<String> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |key: &str, message: String| CliError::Config {
                file: file.to_string(),
                line,
                key: key.to_string(),
                message,
            };
            let Some((key, value)) = content.split_once('=') else {
                return Err(err(content, "expected 'key = value'".into()));
            };
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(err(key, format!("unknown key '{key}'")));
            }
            if seen.iter().any(|k| k == key) {
                return Err(err(key, "key given twice".into()));
            }
            seen.push(key.to_string());
            settings.set(key, value).map_err(|m| err(key, m))?;
        }
        Ok(settings)
    }

    /// Fills the seed from the environment when neither flag nor file set it.
    pub fn seed_from_env(&mut self, env: Option<String>) -> Result<(), CliError> {
        if self.seed.is_some() {
            return Ok(());
        }
        if let Some(v) = env {
            let seed = number(v.trim()).map_err(|message| CliError::Env { var: SEED_ENV, message })?;
            self.seed = Some(seed);
        }
        Ok(())
    }

    pub fn params(&self) -> Result<ProtocolParams, CliError> {
        let d = ProtocolParams::default();
        let params = ProtocolParams {
            m: self.m.unwrap_or(d.m),
            l: self.l.unwrap_or(d.l),
            decoy_count: self.decoys.unwrap_or(d.decoy_count),
            qber_threshold: self.qber_threshold.unwrap_or(d.qber_threshold),
            check_sample_size: self.check_sample_size.or(d.check_sample_size),
            seed: self.seed.unwrap_or(d.seed),
            channel_flip_prob: self.flip_prob.unwrap_or(d.channel_flip_prob),
            trojan_countermeasures: TrojanCountermeasures {
                wavelength_filter: self.wavelength_filter.unwrap_or(false),
                photon_number_splitter: self.photon_number_splitter.unwrap_or(false),
            },
        };
        params.validate().map_err(CliError::Invalid)?;
        Ok(params)
    }

    pub fn attack(&self) -> Result<Option<AttackDescriptor>, CliError> {
        let invalid = |m: String| CliError::Invalid(QkaError::RejectedInput(m));
        let Some(kind) = self.attack else {
            let stray = [
                ("hops", self.hops.is_some()),
                ("eve_unitary", self.eve_unitary.is_some()),
                ("colluders", self.colluders.is_some()),
                ("strategy", self.strategy.is_some()),
                ("resend_distribution", self.resend_distribution.is_some()),
            ];
            if let Some((key, _)) = stray.iter().find(|(_, set)| *set) {
                return Err(invalid(format!("{key} is set but no attack is selected")));
            }
            return Ok(None);
        };
        let hops = self.hops.clone().unwrap_or_default();
        let descriptor = match kind {
            AttackKind::InsideCollusion => {
                let colluders = self
                    .colluders
                    .ok_or_else(|| invalid("inside-collusion needs colluders, e.g. A,C".into()))?;
                AttackDescriptor {
                    target_hops: hops,
                    ..AttackDescriptor::inside_collusion(colluders, self.strategy.unwrap_or_default())
                }
            }
            _ => {
                if hops.is_empty() {
                    return Err(invalid(format!("{kind} needs target hops, e.g. A1 or all")));
                }
                AttackDescriptor {
                    kind,
                    target_hops: hops,
                    eve_unitary: match kind {
                        AttackKind::EntangleMeasure => Some(self.eve_unitary.unwrap_or_else(Unitary::cnot)),
                        _ => self.eve_unitary,
                    },
                    colluders: self.colluders,
                    strategy: self.strategy,
                    resend_distribution: self.resend_distribution,
                }
            }
        };
        descriptor.validate().map_err(CliError::Invalid)?;
        Ok(Some(descriptor))
    }

    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let sweep = match (self.sweep, &self.sweep_values) {
            (Some(param), Some(values)) => Some(Sweep { param, values: values.clone() }),
            (None, None) => None,
            (Some(p), None) => {
                return Err(CliError::Invalid(QkaError::RejectedInput(format!("sweep over {p} needs sweep_values"))))
            }
            (None, Some(_)) => {
                return Err(CliError::Invalid(QkaError::RejectedInput("sweep_values given without sweep".into())))
            }
        };
        let plan = ExperimentPlan {
            base_params: self.params()?,
            attack: self.attack()?,
            trials: self.trials.unwrap_or(DEFAULT_TRIALS),
            sweep,
            confidence: self.confidence.unwrap_or(DEFAULT_CONFIDENCE),
        };
        plan.validate().map_err(CliError::Invalid)?;
        Ok(plan)
    }
}
