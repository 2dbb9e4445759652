use super::Algorithm;

/// Scored outcome of one Monte-Carlo trial for one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub ris_elements: usize,
    pub algorithm: Algorithm,
    pub snr_db: f64,
    /// Ground-truth angles, ascending.
    pub truth: Vec<f64>,
    /// Detected angles, ascending.
    pub detected: Vec<f64>,
    /// Absolute angle error of each truth angle; `+inf` when unmatched.
    pub errors: Vec<f64>,
    pub grid_step: f64,
}

impl TrialResult {
    pub fn new(
        ris_elements: usize,
        algorithm: Algorithm,
        snr_db: f64,
        truth: Vec<f64>,
        detected: Vec<f64>,
        grid_step: f64,
    ) -> Self {
        let errors = match_angles(&truth, &detected)
            .into_iter()
            .zip(&truth)
            .map(|(m, t)| m.map_or(f64::INFINITY, |j| (detected[j] - t).abs()))
            .collect();
        Self {
            ris_elements,
            algorithm,
            snr_db,
            truth,
            detected,
            errors,
            grid_step,
        }
    }

    pub fn k(&self) -> usize {
        self.truth.len()
    }

    pub fn k_hat(&self) -> usize {
        self.detected.len()
    }

    pub fn correct_enumeration(&self) -> bool {
        self.k_hat() == self.k()
    }

    /// Correct count and every error within half a grid step.
    pub fn resolved(&self) -> bool {
        let tol = 0.5 * self.grid_step + 1e-9;
        self.correct_enumeration() && self.errors.iter().all(|&e| e <= tol)
    }
}

/// Greedy nearest-angle assignment. Returns, for each truth angle, the index
/// of its detected partner. Closest pairs are committed first; ties go to the
/// smaller detected angle, then the smaller truth angle.
pub fn match_angles(truth: &[f64], detected: &[f64]) -> Vec<Option<usize>> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(truth.len() * detected.len());
    for (i, t) in truth.iter().enumerate() {
        for (j, d) in detected.iter().enumerate() {
            pairs.push(((d - t).abs(), i, j));
        }
    }
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0)
            .then(detected[a.2].total_cmp(&detected[b.2]))
            .then(truth[a.1].total_cmp(&truth[b.1]))
    });
    let mut out = vec![None; truth.len()];
    let mut used = vec![false; detected.len()];
    for (_, i, j) in pairs {
        if out[i].is_none() && !used[j] {
            out[i] = Some(j);
            used[j] = true;
        }
    }
    out
}

/// Mean squared angle error (deg^2) over the correctly enumerated trials
/// only, with the number of trials it was computed from. `NaN` when no
/// trial counted the targets correctly.
pub fn mse(results: &[TrialResult]) -> (f64, usize) {
    let good: Vec<&TrialResult> = results.iter().filter(|r| r.correct_enumeration()).collect();
    let (mut acc, mut n) = (0.0, 0usize);
    for r in &good {
        for e in &r.errors {
            acc += e * e;
            n += 1;
        }
    }
    if n == 0 {
        (f64::NAN, good.len())
    } else {
        (acc / n as f64, good.len())
    }
}

/// Fraction of trials with `K_hat = K`.
pub fn detection_probability(results: &[TrialResult]) -> f64 {
    fraction(results, TrialResult::correct_enumeration)
}

/// Percentage of trials that resolve every target to its grid cell.
pub fn success_resolve_percentage(results: &[TrialResult]) -> f64 {
    100.0 * fraction(results, TrialResult::resolved)
}

/// Empirical `P(|error| < e)` over all targets of all trials, for each level
/// in `levels`. Missed targets count as infinite error.
pub fn error_cdf(results: &[TrialResult], levels: &[f64]) -> Vec<f64> {
    let errors: Vec<f64> = results.iter().flat_map(|r| r.errors.iter().copied()).collect();
    levels
        .iter()
        .map(|&e| {
            if errors.is_empty() {
                f64::NAN
            } else {
                errors.iter().filter(|&&x| x < e).count() as f64 / errors.len() as f64
            }
        })
        .collect()
}

fn fraction(results: &[TrialResult], pred: impl Fn(&TrialResult) -> bool) -> f64 {
    if results.is_empty() {
        return f64::NAN;
    }
    results.iter().filter(|r| pred(r)).count() as f64 / results.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial(truth: &[f64], detected: &[f64]) -> TrialResult {
        TrialResult::new(16, Algorithm::Batch, 0.0, truth.to_vec(), detected.to_vec(), 0.5)
    }

    #[test]
    fn greedy_matching() {
        assert_eq!(match_angles(&[20.0, 30.0], &[21.0, 29.0]), vec![Some(0), Some(1)]);
        // 25 is closer to 24 than 20 is, so 20 is left with 40
        assert_eq!(match_angles(&[20.0, 25.0], &[24.0, 40.0]), vec![Some(1), Some(0)]);
        // equidistant detections: the smaller angle wins
        assert_eq!(match_angles(&[10.0], &[12.0, 8.0]), vec![Some(1)]);
        assert_eq!(match_angles(&[10.0, 20.0], &[15.0]), vec![Some(0), None]);
    }

    #[test]
    fn mse_uses_correct_counts_only() {
        let r = vec![trial(&[20.0, 30.0], &[21.0, 30.0]), trial(&[20.0, 30.0], &[20.0])];
        let (v, n) = mse(&r);
        assert_eq!(n, 1);
        assert!((v - 0.5).abs() < 1e-12);
        let (v, n) = mse(&[trial(&[20.0], &[])]);
        assert!(v.is_nan());
        assert_eq!(n, 0);
    }

    #[test]
    fn pd_and_srp() {
        let r = vec![
            trial(&[20.0, 30.0], &[20.0, 30.5]),
            trial(&[20.0, 30.0], &[20.0, 31.0]),
            trial(&[20.0, 30.0], &[20.0]),
            trial(&[20.0, 30.0], &[20.0, 30.0]),
        ];
        assert!((detection_probability(&r) - 0.75).abs() < 1e-12);
        // half a grid step (0.25 deg) is the acceptance radius
        assert!((success_resolve_percentage(&r) - 25.0).abs() < 1e-12);
        assert!(detection_probability(&[]).is_nan());
    }

    #[test]
    fn cdf_strict_and_missed() {
        let r = vec![trial(&[20.0, 30.0], &[21.0])];
        assert_eq!(error_cdf(&r, &[1.0, 1.5, 1e9]), vec![0.0, 0.5, 0.5]);
    }

    proptest! {
        #[test]
        fn matching_is_injective(
            truth in prop::collection::vec(-90.0f64..90.0, 0..8),
            det in prop::collection::vec(-90.0f64..90.0, 0..8),
        ) {
            let m = match_angles(&truth, &det);
            let used: Vec<usize> = m.iter().flatten().copied().collect();
            let mut dedup = used.clone();
            dedup.sort();
            dedup.dedup();
            prop_assert_eq!(used.len(), dedup.len());
            prop_assert_eq!(used.len(), truth.len().min(det.len()));
        }

        #[test]
        fn cdf_is_monotone(errs in prop::collection::vec(0.0f64..50.0, 1..10)) {
            let truth: Vec<f64> = (0..errs.len()).map(|i| -80.0 + 20.0 * i as f64).collect();
            let r = trial(&truth, &truth.iter().zip(&errs).map(|(t, e)| t + e.min(9.0)).collect::<Vec<_>>());
            let c = error_cdf(&[r], &[0.1, 1.0, 5.0, 10.0]);
            prop_assert!(c.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
