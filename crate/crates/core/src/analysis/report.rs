use serde::{Deserialize, Serialize};

use crate::analysis::experiment::ExperimentResult;
use crate::protocol::HopId;

/// Upper end of the channel-noise band.
pub const NOISE_CEILING: f64 = 0.089;
/// Least error rate an outside or inside attack introduces.
pub const ATTACK_FLOOR: f64 = 0.25;
/// Sampling slack applied to both band edges.
pub const BAND_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QberBand {
    NoiseBand,
    InBetween,
    AttackRange,
}

impl QberBand {
    pub fn classify(rate: f64) -> Self {
        if rate <= NOISE_CEILING + BAND_TOLERANCE {
            QberBand::NoiseBand
        } else if rate >= ATTACK_FLOOR - BAND_TOLERANCE {
            QberBand::AttackRange
        } else {
            QberBand::InBetween
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QberRow {
    pub sweep_value: Option<f64>,
    pub hop: HopId,
    pub mean_error_rate: f64,
    pub band: QberBand,
}

/// Flags every checked hop of every sweep point by its mean decoy error rate.
pub fn qber_report(result: &ExperimentResult) -> Vec<QberRow> {
    result
        .points
        .iter()
        .flat_map(|p| {
            p.hops.iter().filter_map(move |h| {
                let rate = h.mean_error_rate?;
                Some(QberRow { sweep_value: p.sweep_value, hop: h.hop, mean_error_rate: rate, band: QberBand::classify(rate) })
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::AttackDescriptor;
    use crate::analysis::experiment::{run_experiment, ExperimentPlan};
    use crate::protocol::ProtocolParams;

    #[test]
    fn band_edges() {
        assert_eq!(QberBand::classify(0.0), QberBand::NoiseBand);
        assert_eq!(QberBand::classify(0.098), QberBand::NoiseBand);
        assert_eq!(QberBand::classify(0.15), QberBand::InBetween);
        assert_eq!(QberBand::classify(0.24), QberBand::AttackRange);
    }

    #[test]
    fn noise_only_stays_in_band() {
        let params = ProtocolParams { channel_flip_prob: 0.05, decoy_count: 40, seed: 2, ..Default::default() };
        let result = run_experiment(&ExperimentPlan::new(params, None, 100), 0).unwrap();
        let rows = qber_report(&result);
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.band == QberBand::NoiseBand), "{rows:?}");
    }

    #[test]
    fn measure_resend_hop_is_flagged() {
        let hop: HopId = "B1".parse().unwrap();
        let params = ProtocolParams { decoy_count: 40, seed: 6, ..Default::default() };
        let plan = ExperimentPlan::new(params, Some(AttackDescriptor::measure_resend(&[hop])), 2000);
        let rows = qber_report(&run_experiment(&plan, 0).unwrap());
        for r in rows {
            let expected = if r.hop == hop { QberBand::AttackRange } else { QberBand::NoiseBand };
            assert_eq!(r.band, expected, "{r:?}");
        }
    }
}
