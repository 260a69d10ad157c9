use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Simulate the three-party Bell-state key agreement, attack it, and measure it.
#[derive(Debug, Parser)]
#[command(name = "qka", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Flat `key = value` config file; keys are the flag names with `_` for `-`
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed [env: QKA_SEED] [default: 0]
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<String>,

    /// Worker threads for experiments; 0 uses every core [default: 0]
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<String>,

    /// Write output here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<String>,

    /// Output format, json or csv [default: csv for sweep, json otherwise]
    #[arg(long, global = true, value_name = "FORMAT")]
    pub format: Option<String>,

    /// Bell pairs per ring [default: 8]
    #[arg(long, global = true, value_name = "N")]
    pub m: Option<String>,

    /// Single photons inserted per ring [default: 2]
    #[arg(long, global = true, value_name = "N")]
    pub l: Option<String>,

    /// Decoy photons per hop [default: 16]
    #[arg(long, global = true, value_name = "N")]
    pub decoys: Option<String>,

    /// Abort when a hop's decoy error rate exceeds this [default: 0.1]
    #[arg(long, global = true, value_name = "RATE")]
    pub qber_threshold: Option<String>,

    /// Final-key bits compared in the last check [default: 10% of the key, rounded up]
    #[arg(long, global = true, value_name = "N")]
    pub check_sample_size: Option<String>,

    /// Depolarizing channel noise as a per-photon decoy error rate, at most 2/3 [default: 0]
    #[arg(long, global = true, value_name = "P")]
    pub flip_prob: Option<String>,

    /// Wavelength filters installed [default: false]
    #[arg(long, global = true, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub wavelength_filter: Option<String>,

    /// Photon-number splitters installed [default: false]
    #[arg(long, global = true, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    pub photon_number_splitter: Option<String>,

    /// intercept-resend, measure-resend, entangle-measure, trojan, inside-collusion or none [default: none]
    #[arg(long, global = true, value_name = "KIND")]
    pub attack: Option<String>,

    /// Attacked hops, e.g. A1,B3, or all (ring letter, then leg 1-3) [default: none]
    #[arg(long, global = true, value_name = "HOPS")]
    pub hops: Option<String>,

    /// identity, cnot, random:SEED, zero-disturbance:SEED, or 32 numbers (rows of re,im) [default: cnot]
    #[arg(long, global = true, value_name = "U")]
    pub eve_unitary: Option<String>,

    /// Colluding pair for inside-collusion, e.g. A,C [default: none]
    #[arg(long, global = true, value_name = "X,Y")]
    pub colluders: Option<String>,

    /// naive-align or random-pairing [default: random-pairing]
    #[arg(long, global = true, value_name = "STRATEGY")]
    pub strategy: Option<String>,

    /// Intercept-resend weights over 0,1,+,- [default: 0.25,0.25,0.25,0.25]
    #[arg(long, global = true, value_name = "W,W,W,W")]
    pub resend_distribution: Option<String>,

    /// Trials per sweep point [default: 1000]
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<String>,

    /// Swept parameter: decoy_count, m, l, flip_prob or qber_threshold [default: none]
    #[arg(long, global = true, value_name = "PARAM")]
    pub sweep: Option<String>,

    /// Sweep values, e.g. 1,2,4 or 1..12 [default: none]
    #[arg(long, global = true, value_name = "VALUES")]
    pub sweep_values: Option<String>,

    /// z-multiplier of the detection-rate interval [default: 3]
    #[arg(long, global = true, value_name = "Z")]
    pub confidence: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Execute one protocol run and print its record as JSON
    Run,
    /// Run a Monte Carlo experiment, optionally over a parameter sweep
    Sweep,
    /// Print the PAPER and EXACT efficiency of the configured parameters
    Efficiency,
}

impl Cli {
    /// Flags given on the command line, as (config key, value) pairs in key order.
    pub fn overrides(&self) -> Vec<(&'static str, &str)> {
        let pairs: [(&'static str, &Option<String>); 22] = [
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("out", &self.out),
            ("format", &self.format),
            ("m", &self.m),
            ("l", &self.l),
            ("decoys", &self.decoys),
            ("qber_threshold", &self.qber_threshold),
            ("check_sample_size", &self.check_sample_size),
            ("flip_prob", &self.flip_prob),
            ("wavelength_filter", &self.wavelength_filter),
            ("photon_number_splitter", &self.photon_number_splitter),
            ("attack", &self.attack),
            ("hops", &self.hops),
            ("eve_unitary", &self.eve_unitary),
            ("colluders", &self.colluders),
            ("strategy", &self.strategy),
            ("resend_distribution", &self.resend_distribution),
            ("trials", &self.trials),
            ("sweep", &self.sweep),
            ("sweep_values", &self.sweep_values),
            ("confidence", &self.confidence),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::settings::KEYS;
    use clap::CommandFactory;

    #[test]
    fn every_config_key_has_a_flag() {
        let cmd = Cli::command();
        for key in KEYS {
            let flag = key.replace('_', "-");
            let arg = cmd
                .get_arguments()
                .find(|a| a.get_long() == Some(flag.as_str()))
                .unwrap_or_else(|| panic!("no --{flag}"));
            let help = arg.get_help().map(|h| h.to_string()).unwrap_or_default();
            assert!(help.contains("default") || key == "out", "--{flag} help lacks a default");
        }
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_after_subcommand() {
        let cli = Cli::try_parse_from(["qka", "run", "--m", "4", "--wavelength-filter"]).unwrap();
        assert_eq!(cli.command, Command::Run);
        assert_eq!(cli.overrides(), vec![("m", "4"), ("wavelength_filter", "true")]);
    }
}
