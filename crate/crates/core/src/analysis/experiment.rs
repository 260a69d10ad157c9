use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{AttackDescriptor, AttackKind, TrojanVerdict};
use crate::analysis::efficiency::{efficiency, Convention};
use crate::analysis::formulas::analytic_abort_probability;
use crate::error::{QkaError, Result};
use crate::protocol::{run_protocol, AbortStage, HopId, ProtocolParams, RunRecord};
use crate::rng::derive_seed;

pub const DEFAULT_CONFIDENCE: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    DecoyCount,
    M,
    L,
    FlipProb,
    QberThreshold,
}

impl SweepParam {
    fn is_integral(self) -> bool {
        matches!(self, SweepParam::DecoyCount | SweepParam::M | SweepParam::L)
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(self, base: &ProtocolParams, value: f64) -> Result<ProtocolParams> {
        if !value.is_finite() || (self.is_integral() && (value < 0.0 || value.fract() != 0.0)) {
            return Err(QkaError::rejected(format!("{value} is not a valid value for sweep parameter {self}")));
        }
        let mut p = base.clone();
        match self {
            SweepParam::DecoyCount => p.decoy_count = value as usize,
            SweepParam::M => p.m = value as usize,
            SweepParam::L => p.l = value as usize,
            SweepParam::FlipProb => p.channel_flip_prob = value,
            SweepParam::QberThreshold => p.qber_threshold = value,
        }
        p.validate()
            .map_err(|e| QkaError::rejected(format!("sweep {self} = {value}: {e}")))?;
        Ok(p)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::DecoyCount => "decoy_count",
            SweepParam::M => "m",
            SweepParam::L => "l",
            SweepParam::FlipProb => "flip_prob",
            SweepParam::QberThreshold => "qber_threshold",
        })
    }
}

impl FromStr for SweepParam {
    type Err = QkaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "decoy_count" | "decoys" | "kn" => Ok(SweepParam::DecoyCount),
            "m" => Ok(SweepParam::M),
            "l" => Ok(SweepParam::L),
            "flip_prob" | "channel_flip_prob" => Ok(SweepParam::FlipProb),
            "qber_threshold" => Ok(SweepParam::QberThreshold),
            _ => Err(QkaError::rejected(format!("unknown sweep parameter '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub base_params: ProtocolParams,
    pub attack: Option<AttackDescriptor>,
    pub trials: usize,
    pub sweep: Option<Sweep>,
    /// z-multiplier of the normal-approximation interval.
    pub confidence: f64,
}

impl ExperimentPlan {
    pub fn new(base_params: ProtocolParams, attack: Option<AttackDescriptor>, trials: usize) -> Self {
        ExperimentPlan { base_params, attack, trials, sweep: None, confidence: DEFAULT_CONFIDENCE }
    }

    pub fn with_sweep(mut self, param: SweepParam, values: Vec<f64>) -> Self {
        self.sweep = Some(Sweep { param, values });
        self
    }

    /// Parameter sets per sweep point, with their sweep values.
    pub fn points(&self) -> Result<Vec<(Option<f64>, ProtocolParams)>> {
        match &self.sweep {
            None => {
                self.base_params.validate()?;
                Ok(vec![(None, self.base_params.clone())])
            }
            Some(s) => s
                .values
                .iter()
                .map(|&v| Ok((Some(v), s.param.apply(&self.base_params, v)?)))
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(QkaError::rejected("trials must satisfy trials >= 1"));
        }
        if !(self.confidence.is_finite() && self.confidence > 0.0) {
            return Err(QkaError::rejected(format!("confidence {} must be positive", self.confidence)));
        }
        if self.sweep.as_ref().is_some_and(|s| s.values.is_empty()) {
            return Err(QkaError::rejected("sweep needs at least one value"));
        }
        if let Some(a) = &self.attack {
            a.validate()?;
        }
        self.points().map(|_| ())
    }
}

/// Seed of trial `trial` at sweep point `point`.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    derive_seed(master, &[point as u64, trial as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopStats {
    pub hop: HopId,
    /// Trials in which this hop's decoys were checked.
    pub checked: usize,
    pub decoys: usize,
    pub errors: usize,
    /// Pooled `errors / decoys`; `None` if no decoy was checked.
    pub mean_error_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageSummary {
    /// Trials in which the adversary produced a key guess.
    pub guesses: usize,
    pub mean_bits_correct_beyond_chance: Option<f64>,
    /// Collusion trials that located every inserted photon.
    pub positions_recovered: usize,
    pub positions_recovered_rate: Option<f64>,
    pub trojan: Option<TrojanVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub sweep_value: Option<f64>,
    pub trials: usize,
    /// Trials aborted by a decoy check.
    pub detections: usize,
    pub detection_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub analytic: Option<f64>,
    /// Pooled decoy error rate over every checked hop.
    pub mean_qber: Option<f64>,
    pub hops: Vec<HopStats>,
    /// Trials ending with three identical derived keys.
    pub key_agreement_rate: f64,
    /// Trials that passed every decoy check but failed the sampled key comparison.
    pub key_check_failure_rate: f64,
    pub mean_final_key_length: Option<f64>,
    pub eta_paper: f64,
    pub eta_exact: f64,
    /// Trials whose transmission count differs from the EXACT efficiency `q`.
    pub conservation_violations: usize,
    pub eve: Option<LeakageSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub plan: ExperimentPlan,
    pub total_trials: usize,
    pub points: Vec<PointResult>,
}

// Normal-approximation binomial interval, clamped to [0, 1].
fn interval(rate: f64, trials: usize, z: f64) -> (f64, f64) {
    let half = z * (rate * (1.0 - rate) / trials as f64).sqrt();
    ((rate - half).max(0.0), (rate + half).min(1.0))
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn summarize(
    sweep_value: Option<f64>,
    params: &ProtocolParams,
    plan: &ExperimentPlan,
    records: &[RunRecord],
) -> PointResult {
    let trials = records.len();
    let detections = records.iter().filter(|r| r.aborted_at_decoy_check()).count();
    let detection_rate = detections as f64 / trials as f64;
    let (ci_low, ci_high) = interval(detection_rate, trials, plan.confidence);

    let hops: Vec<HopStats> = HopId::all()
        .map(|hop| {
            let mut s = HopStats { hop, checked: 0, decoys: 0, errors: 0, mean_error_rate: None };
            for r in records {
                let h = r.hop(hop);
                if h.error_rate.is_some() {
                    s.checked += 1;
                    s.decoys += h.decoys;
                    s.errors += h.errors;
                }
            }
            s.mean_error_rate = ratio(s.errors, s.decoys).or((s.checked > 0).then_some(0.0));
            s
        })
        .collect();
    let all_decoys: usize = hops.iter().map(|h| h.decoys).sum();
    let all_errors: usize = hops.iter().map(|h| h.errors).sum();
    let any_checked = hops.iter().any(|h| h.checked > 0);
    let mean_qber = ratio(all_errors, all_decoys).or(any_checked.then_some(0.0));

    let agreed = records.iter().filter(|r| r.agreed_key().is_some()).count();
    let key_failures = records
        .iter()
        .filter(|r| r.abort_stage == Some(AbortStage::KeyCheck))
        .count();
    let keyed: Vec<usize> = records
        .iter()
        .filter_map(|r| r.derived_keys.first().map(|k| k.bits.len()))
        .collect();
    let mean_final_key_length = ratio(keyed.iter().sum(), keyed.len());

    let exact = efficiency(params, Convention::Exact);
    let conservation_violations = records
        .iter()
        .filter(|r| !r.aborted_at_decoy_check() && r.transmissions as u64 != exact.q)
        .count();

    let analytic = plan
        .attack
        .as_ref()
        .filter(|a| matches!(a.kind, AttackKind::InterceptResend | AttackKind::MeasureResend))
        .and_then(|a| analytic_abort_probability(params, a).ok());

    let eve = plan.attack.as_ref().map(|_| {
        let guesses: Vec<f64> = records
            .iter()
            .filter_map(|r| r.eve.as_ref()?.bits_correct_beyond_chance)
            .collect();
        let collusions: Vec<bool> = records
            .iter()
            .filter_map(|r| r.eve.as_ref()?.collusion.as_ref().map(|c| c.positions_recovered))
            .collect();
        let recovered = collusions.iter().filter(|&&b| b).count();
        LeakageSummary {
            guesses: guesses.len(),
            mean_bits_correct_beyond_chance: (!guesses.is_empty())
                .then(|| guesses.iter().sum::<f64>() / guesses.len() as f64),
            positions_recovered: recovered,
            positions_recovered_rate: ratio(recovered, collusions.len()),
            trojan: records.iter().find_map(|r| r.eve.as_ref()?.trojan),
        }
    });

    PointResult {
        sweep_value,
        trials,
        detections,
        detection_rate,
        ci_low,
        ci_high,
        analytic,
        mean_qber,
        hops,
        key_agreement_rate: agreed as f64 / trials as f64,
        key_check_failure_rate: key_failures as f64 / trials as f64,
        mean_final_key_length,
        eta_paper: efficiency(params, Convention::Paper).eta_f64(),
        eta_exact: exact.eta_f64(),
        conservation_violations,
        eve,
    }
}

/// Runs every trial of every sweep point on `workers` threads (0 = rayon default).
///
/// Trial seeds depend only on the master seed and the (point, trial) indices and
/// results are aggregated in index order, so the output does not depend on
/// `workers` or on scheduling.
pub fn run_experiment(plan: &ExperimentPlan, workers: usize) -> Result<ExperimentResult> {
    plan.validate()?;
    let points = plan.points()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| QkaError::internal(format!("cannot start worker pool: {e}")))?;
    let master = plan.base_params.seed;
    let attack = plan.attack.as_ref();
    let results = pool.install(|| {
        points
            .iter()
            .enumerate()
            .map(|(idx, (value, params))| {
                let records = (0..plan.trials)
                    .into_par_iter()
                    .map(|t| {
                        let p = ProtocolParams { seed: trial_seed(master, idx, t), ..params.clone() };
                        run_protocol(&p, attack)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(summarize(*value, params, plan, &records))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(ExperimentResult {
        plan: plan.clone(),
        total_trials: plan.trials * points.len(),
        points: results,
    })
}

pub const CSV_HEADER: [&str; 10] = [
    "sweep_value",
    "trials",
    "detection_rate",
    "ci_low",
    "ci_high",
    "analytic",
    "mean_qber",
    "key_agreement_rate",
    "eta_paper",
    "eta_exact",
];

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per sweep point; absent values are empty cells.
pub fn write_csv<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let io = |e: csv::Error| QkaError::internal(format!("csv output failed: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for p in &result.points {
        w.write_record([
            cell(p.sweep_value),
            p.trials.to_string(),
            p.detection_rate.to_string(),
            p.ci_low.to_string(),
            p.ci_high.to_string(),
            cell(p.analytic),
            cell(p.mean_qber),
            p.key_agreement_rate.to_string(),
            p.eta_paper.to_string(),
            p.eta_exact.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| QkaError::internal(format!("csv output failed: {e}")))
}
