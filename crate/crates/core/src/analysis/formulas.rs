use crate::adversary::{AttackDescriptor, AttackKind};
use crate::error::{QkaError, Result};
use crate::protocol::ProtocolParams;

/// Probability that one decoy fails its check under a resend attack.
///
/// Intercept-resend gives 1/2 whatever Eve resends: averaged over the two decoys
/// of a basis, `|0⟩` and `|1⟩` (or `|+⟩` and `|−⟩`) mismatch with complementary weights.
pub fn per_decoy_error(kind: AttackKind) -> Result<f64> {
    match kind {
        AttackKind::InterceptResend => Ok(0.5),
        AttackKind::MeasureResend => Ok(0.25),
        other => Err(QkaError::UndefinedFormula(format!(
            "no closed-form detection probability for {other}; use Monte Carlo"
        ))),
    }
}

/// `1 − (1/2)^kn` for intercept-resend, `1 − (3/4)^kn` for measure-resend.
pub fn analytic_detection(kind: AttackKind, kn: usize) -> Result<f64> {
    let pass = 1.0 - per_decoy_error(kind)?;
    Ok(1.0 - pass.powi(kn as i32))
}

// P(Binomial(trials, p) <= k)
fn binomial_cdf(trials: usize, p: f64, k: usize) -> f64 {
    if k >= trials {
        return 1.0;
    }
    let q = 1.0 - p;
    let mut term = q.powi(trials as i32);
    let mut sum = term;
    for i in 0..k {
        term *= (trials - i) as f64 / (i + 1) as f64 * p / q;
        sum += term;
    }
    sum.min(1.0)
}

/// Abort probability of a noiseless run under a resend attack on the descriptor's hops.
///
/// A hop aborts when its error rate exceeds `qber_threshold`; hops fail
/// independently. At threshold 0 with one hop this is [`analytic_detection`].
pub fn analytic_abort_probability(params: &ProtocolParams, attack: &AttackDescriptor) -> Result<f64> {
    if params.channel_flip_prob != 0.0 {
        return Err(QkaError::UndefinedFormula("closed form assumes a noiseless channel".into()));
    }
    let p = per_decoy_error(attack.kind)?;
    let kn = params.decoy_count;
    // Largest error count the check tolerates, compared exactly as the check does.
    let tolerated = (0..=kn)
        .take_while(|&e| kn == 0 || e as f64 / kn as f64 <= params.qber_threshold)
        .last()
        .unwrap_or(0);
    let pass = binomial_cdf(kn, p, tolerated);
    Ok(1.0 - pass.powi(attack.target_hops.len() as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::HopId;

    #[test]
    fn detection_examples() {
        assert_eq!(analytic_detection(AttackKind::InterceptResend, 0).unwrap(), 0.0);
        assert_eq!(analytic_detection(AttackKind::InterceptResend, 10).unwrap(), 0.9990234375);
        assert_eq!(analytic_detection(AttackKind::MeasureResend, 4).unwrap(), 0.68359375);
        assert!(matches!(
            analytic_detection(AttackKind::EntangleMeasure, 4),
            Err(QkaError::UndefinedFormula(_))
        ));
    }

    #[test]
    fn detection_is_monotone_in_kn() {
        for kind in [AttackKind::InterceptResend, AttackKind::MeasureResend] {
            let curve: Vec<f64> = (0..=12).map(|k| analytic_detection(kind, k).unwrap()).collect();
            assert!(curve.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn zero_threshold_matches_closed_form() {
        let hop = HopId::new(crate::protocol::Participant::Alice, 1).unwrap();
        for kn in 0..=12 {
            let params = ProtocolParams { decoy_count: kn, qber_threshold: 0.0, ..Default::default() };
            for attack in [AttackDescriptor::intercept_resend(&[hop]), AttackDescriptor::measure_resend(&[hop])] {
                let a = analytic_abort_probability(&params, &attack).unwrap();
                let b = analytic_detection(attack.kind, kn).unwrap();
                assert!((a - b).abs() < 1e-12, "{kn}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn binomial_cdf_by_enumeration() {
        // Brute force over all 2^8 error patterns.
        let (n, p) = (8usize, 0.3f64);
        for k in 0..=n {
            let brute: f64 = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize <= k)
                .map(|m| p.powi(m.count_ones() as i32) * (1.0 - p).powi((n as u32 - m.count_ones()) as i32))
                .sum();
            assert!((binomial_cdf(n, p, k) - brute).abs() < 1e-12);
        }
    }

    #[test]
    fn default_threshold_tolerates_one_in_ten() {
        let hop = HopId::new(crate::protocol::Participant::Bob, 2).unwrap();
        let params = ProtocolParams { decoy_count: 10, ..Default::default() };
        let a = analytic_abort_probability(&params, &AttackDescriptor::intercept_resend(&[hop])).unwrap();
        assert!((a - (1.0 - 11.0 / 1024.0)).abs() < 1e-12);
        let noisy = ProtocolParams { channel_flip_prob: 0.02, ..params };
        assert!(analytic_abort_probability(&noisy, &AttackDescriptor::intercept_resend(&[hop])).is_err());
    }
}
