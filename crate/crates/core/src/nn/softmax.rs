//! Masked, temperature-scaled softmax and categorical sampling.

use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::math::{exp, ln};

/// Log-probabilities of `softmax(logits / temperature)` restricted to entries
/// where `allowed(i)` holds. Disallowed entries get `-inf`.
pub fn log_softmax_masked(
    logits: &[f64],
    temperature: f64,
    allowed: impl Fn(usize) -> bool,
) -> Vec<f64> {
    let mut max = f64::NEG_INFINITY;
    for (i, &l) in logits.iter().enumerate() {
        if allowed(i) && l / temperature > max {
            max = l / temperature;
        }
    }
    let mut sum = 0.0;
    for (i, &l) in logits.iter().enumerate() {
        if allowed(i) {
            sum += exp(l / temperature - max);
        }
    }
    let log_z = max + ln(sum);
    logits
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            if allowed(i) {
                l / temperature - log_z
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Gradient of `log p[target]` w.r.t. the raw logits, scaled by `coeff` and
/// accumulated into `dlogits`.
pub fn log_prob_grad_acc(
    log_probs: &[f64],
    target: usize,
    temperature: f64,
    coeff: f64,
    dlogits: &mut [f64],
) {
    let s = coeff / temperature;
    for (i, (d, &lp)) in dlogits.iter_mut().zip(log_probs).enumerate() {
        let p = if lp == f64::NEG_INFINITY { 0.0 } else { exp(lp) };
        let onehot = if i == target { 1.0 } else { 0.0 };
        *d += s * (onehot - p);
    }
}

/// Draws an index from a distribution given as log-probabilities.
pub fn sample_log_probs<R: Rng + ?Sized>(log_probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &lp) in log_probs.iter().enumerate() {
        if lp == f64::NEG_INFINITY {
            continue;
        }
        acc += exp(lp);
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Index of the largest allowed logit (first on ties).
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best
}

pub fn probs(log_probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; log_probs.len()];
    for (o, &lp) in out.iter_mut().zip(log_probs) {
        *o = if lp == f64::NEG_INFINITY { 0.0 } else { exp(lp) };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn two_word_categorical_frequency() {
        let logits = [ln(0.75), ln(0.25)];
        let lp = log_softmax_masked(&logits, 1.0, |_| true);
        let mut r = rng::stream(7, 0);
        let n = 100_000;
        let hits = (0..n).filter(|_| sample_log_probs(&lp, &mut r) == 0).count();
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.75).abs() < 0.01, "freq {freq}");
    }

    #[test]
    fn masked_entries_get_no_mass_and_rest_renormalizes() {
        let logits = [0.3, 2.0, -1.0, 0.7];
        let lp = log_softmax_masked(&logits, 0.7, |i| i != 1);
        assert_eq!(lp[1], f64::NEG_INFINITY);
        let total: f64 = probs(&lp).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn temperature_keeps_argmax() {
        let logits = [0.1, -0.4, 1.3, 1.29, 0.0];
        for t in [0.05, 0.6, 1.0, 3.0] {
            let lp = log_softmax_masked(&logits, t, |_| true);
            assert_eq!(argmax(&lp), 2);
        }
    }

    #[test]
    fn near_zero_temperature_is_argmax_decoding() {
        let logits = [0.1, -0.4, 1.3, 1.2, 0.0];
        let lp = log_softmax_masked(&logits, 1e-6, |_| true);
        let mut r = rng::stream(1, 1);
        for _ in 0..1000 {
            assert_eq!(sample_log_probs(&lp, &mut r), 2);
        }
    }

    #[test]
    fn grad_matches_finite_difference() {
        let logits = [0.2, -0.5, 1.1, 0.4];
        let t = 0.8;
        let target = 2;
        let mask = |i: usize| i != 3;
        let mut d = [0.0; 4];
        let lp = log_softmax_masked(&logits, t, mask);
        log_prob_grad_acc(&lp, target, t, 1.0, &mut d);
        for k in 0..4 {
            let eps = 1e-6;
            let mut up = logits;
            up[k] += eps;
            let mut dn = logits;
            dn[k] -= eps;
            let fd = (log_softmax_masked(&up, t, mask)[target]
                - log_softmax_masked(&dn, t, mask)[target])
                / (2.0 * eps);
            assert!((fd - d[k]).abs() < 1e-8, "k={k} fd={fd} an={}", d[k]);
        }
    }
}
