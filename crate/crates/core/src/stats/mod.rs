//! Numerical kernels: log binomial coefficients, the hypergeometric upper
//! tail, the TF-IDF comparison score and seeded storyset sampling.

mod sampling;

pub use sampling::{sample_indices, sample_storyset};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `log_choose` result for an impossible selection (`r < 0` or `r > n`).
pub const IMPOSSIBLE: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("InvalidParams: {0}")]
    InvalidParams(String),
    #[error("UndefinedForAbsentTheme: TF-IDF needs K >= 1")]
    UndefinedForAbsentTheme,
    #[error("SampleTooLarge: cannot draw {requested} of {available} stories")]
    SampleTooLarge { requested: usize, available: usize },
}

impl StatsError {
    pub fn code(&self) -> &'static str {
        match self {
            StatsError::InvalidParams(_) => "InvalidParams",
            StatsError::UndefinedForAbsentTheme => "UndefinedForAbsentTheme",
            StatsError::SampleTooLarge { .. } => "SampleTooLarge",
        }
    }
}

/// Counts for one theme in a test-versus-background comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HypergeomParams {
    /// Test stories featuring the theme (`k`).
    pub test_hits: u64,
    /// Size of the test storyset (`n`).
    pub test_size: u64,
    /// Background stories featuring the theme (`K`).
    pub background_hits: u64,
    /// Size of the background storyset (`N`).
    pub background_size: u64,
}

impl HypergeomParams {
    /// Builds and validates `(k, n, K, N)`.
    pub fn new(k: u64, n: u64, big_k: u64, big_n: u64) -> Result<Self, StatsError> {
        let p = HypergeomParams {
            test_hits: k,
            test_size: n,
            background_hits: big_k,
            background_size: big_n,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let (k, n, big_k, big_n) = self.tuple();
        if big_n == 0 || k > n || n > big_n || k > big_k || big_k > big_n {
            return Err(StatsError::InvalidParams(format!(
                "need k <= n <= N, k <= K <= N and N >= 1; got k={k} n={n} K={big_k} N={big_n}"
            )));
        }
        Ok(())
    }

    pub fn tuple(&self) -> (u64, u64, u64, u64) {
        (
            self.test_hits,
            self.test_size,
            self.background_hits,
            self.background_size,
        )
    }

    /// Smallest `k` with nonzero probability: `max(0, n + K - N)`.
    pub fn support_floor(&self) -> u64 {
        (self.test_size + self.background_hits).saturating_sub(self.background_size)
    }
}

/// Probability in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PValue(f64);

impl PValue {
    pub const ONE: PValue = PValue(1.0);

    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            return PValue::ONE;
        }
        PValue(value.clamp(f64::MIN_POSITIVE, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

// Tail-correction coefficients of Stirling's series for ln x!.
const STIRLING: [f64; 5] = [1.0 / 12.0, 1.0 / 360.0, 1.0 / 1260.0, 1.0 / 1680.0, 1.0 / 1188.0];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln x! - (x + 1/2) ln x + x - ln sqrt(2 pi)`, accurate for `x >= 17`.
fn stirling_error(x: f64) -> f64 {
    let x2 = x * x;
    (STIRLING[0] - (STIRLING[1] - (STIRLING[2] - (STIRLING[3] - STIRLING[4] / x2) / x2) / x2) / x2) / x
}

/// Below this `min(r, n - r)` the coefficient is summed term by term.
const DIRECT_TERMS: u64 = 16;

/// Natural log of the binomial coefficient `C(n, r)`.
///
/// Returns [`IMPOSSIBLE`] when `r` is outside `0..=n`. Small `min(r, n-r)`
/// uses the product form; otherwise Stirling's series with the entropy term
/// split into two positive parts, which avoids cancellation between the
/// three `ln x!` terms.
pub fn log_choose(n: u64, r: i64) -> f64 {
    if r < 0 || r as u64 > n {
        return IMPOSSIBLE;
    }
    let r = r as u64;
    let small = r.min(n - r);
    if small == 0 {
        return 0.0;
    }
    if small <= DIRECT_TERMS {
        return (0..small).map(|i| ((n - i) as f64 / (i + 1) as f64).ln()).sum();
    }
    let nf = n as f64;
    let kf = small as f64;
    let rest = (n - small) as f64;
    let entropy = kf * (nf / kf).ln() - rest * (-kf / nf).ln_1p();
    let spread = 0.5 * (nf / (kf * rest)).ln() - HALF_LN_2PI;
    entropy + spread + stirling_error(nf) - stirling_error(kf) - stirling_error(rest)
}

/// Compensated (Neumaier) summation.
#[derive(Default)]
struct Accumulator {
    sum: f64,
    carry: f64,
}

impl Accumulator {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Probability of at least `k` featuring stories in a random test storyset of
/// size `n` drawn without replacement from `N` stories of which `K` feature
/// the theme.
pub fn hypergeom_pvalue(params: &HypergeomParams) -> Result<PValue, StatsError> {
    params.validate()?;
    let (k, n, big_k, big_n) = params.tuple();
    if k <= params.support_floor() {
        return Ok(PValue::ONE);
    }
    let log_total = log_choose(big_n, n as i64);
    let mut acc = Accumulator::default();
    for i in k..=n.min(big_k) {
        let log_term = log_choose(big_k, i as i64) + log_choose(big_n - big_k, (n - i) as i64) - log_total;
        acc.add(log_term.exp());
    }
    Ok(PValue::new(acc.total()))
}

/// TF-IDF score `(k/n) * ln(N/K)`.
pub fn tfidf_score(params: &HypergeomParams) -> Result<f64, StatsError> {
    params.validate()?;
    let (k, n, big_k, big_n) = params.tuple();
    if big_k == 0 {
        return Err(StatsError::UndefinedForAbsentTheme);
    }
    if k == 0 || big_k == big_n {
        return Ok(0.0);
    }
    Ok(k as f64 / n as f64 * (big_n as f64 / big_k as f64).ln())
}

/// Arithmetic mean and sample standard deviation (`n - 1` denominator).
/// The deviation is `None` with fewer than two values.
pub fn mean_sd(values: &[f64]) -> (f64, Option<f64>) {
    if values.is_empty() {
        return (0.0, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (mean, Some((ss / (n - 1.0)).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: u64, n: u64, big_k: u64, big_n: u64) -> f64 {
        hypergeom_pvalue(&HypergeomParams::new(k, n, big_k, big_n).unwrap())
            .unwrap()
            .value()
    }

    #[test]
    fn log_choose_small_cases() {
        assert_eq!(log_choose(5, 0), 0.0);
        assert_eq!(log_choose(5, 5), 0.0);
        assert!((log_choose(5, 2) - 10f64.ln()).abs() < 1e-15);
        assert_eq!(log_choose(5, 7), IMPOSSIBLE);
        assert_eq!(log_choose(5, -1), IMPOSSIBLE);
        assert_eq!(log_choose(0, 0), 0.0);
    }

    // Reference values computed with 40-digit arithmetic (mpmath).
    #[allow(clippy::excessive_precision, clippy::approx_constant)]
    const LOG_CHOOSE_REFERENCE: [(u64, i64, f64); 23] = [
        (5, 2, 2.302585092994045684),
        (10, 3, 4.7874917427820459942),
        (52, 5, 14.77062192297037073),
        (100, 50, 66.783841652017426009),
        (170, 85, 115.03985954426609907),
        (171, 3, 13.615601239247940078),
        (280, 80, 164.57260836300109093),
        (102, 8, 26.113684003745293413),
        (1000, 1, 6.9077552789821370521),
        (1000, 17, 83.790012065586577251),
        (1000, 500, 689.46726156785118008),
        (123456, 61728, 85567.090709782817731),
        (1000000, 1, 13.815510557964274104),
        (1000000, 2, 26.937872935368102898),
        (1000000, 16, 190.37618882072770806),
        (1000000, 17, 201.35847003450776472),
        (1000000, 18, 212.28359183443137249),
        (1000000, 500000, 693140.04701306368255),
        (1000000, 999999, 13.815510557964274104),
        (1000000, 123457, 373749.98450648405421),
        (34, 17, 21.570680641923901036),
        (33, 17, 20.877533461363955726),
        (64, 32, 42.052280570411124179),
    ];

    #[test]
    fn log_choose_relative_error() {
        for (n, r, expected) in LOG_CHOOSE_REFERENCE {
            let got = log_choose(n, r);
            let rel = ((got - expected) / expected).abs();
            assert!(rel <= 1e-12, "C({n},{r}): got {got}, want {expected}, rel {rel:e}");
        }
    }

    #[test]
    fn log_choose_matches_exact_integers() {
        for n in 0u64..=60 {
            let mut c: u128 = 1;
            for r in 0..=n {
                let got = log_choose(n, r as i64);
                let want = (c as f64).ln();
                assert!((got - want).abs() <= 1e-12 * want.max(1.0), "C({n},{r})");
                c = c * (n - r) as u128 / (r + 1) as u128;
            }
        }
    }

    #[test]
    fn pvalue_examples() {
        assert!((p(4, 8, 7, 102) - 0.0005).abs() <= 5e-5);
        assert!((p(2, 8, 2, 102) - 0.0054).abs() <= 5e-5);
        assert_eq!(p(0, 8, 7, 102), 1.0);
        assert!((p(2, 3, 3, 6) - 0.5).abs() < 1e-15);
        assert!((p(3, 3, 3, 6) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn pvalue_rejects_invalid_params() {
        for (k, n, big_k, big_n) in [
            (3, 2, 5, 10),
            (1, 2, 0, 10),
            (0, 11, 5, 10),
            (0, 0, 0, 0),
            (0, 2, 11, 10),
        ] {
            let params = HypergeomParams {
                test_hits: k,
                test_size: n,
                background_hits: big_k,
                background_size: big_n,
            };
            assert_eq!(hypergeom_pvalue(&params).unwrap_err().code(), "InvalidParams");
        }
    }

    #[test]
    fn support_floor_is_certain() {
        // n + K - N = 5, so at least five hits are guaranteed
        assert_eq!(p(5, 8, 7, 10), 1.0);
        assert_eq!(p(3, 8, 7, 10), 1.0);
        assert!(p(6, 8, 7, 10) < 1.0);
    }

    #[test]
    fn extreme_tails_stay_positive_and_finite() {
        let tiny = p(5000, 5000, 5000, 100_000);
        assert!(tiny > 0.0 && tiny.is_finite());
        let big = p(1, 50_000, 50_000, 100_000);
        assert!(big <= 1.0 && big > 0.99);
    }

    #[test]
    fn tfidf_cases() {
        let score = |k, n, big_k, big_n| tfidf_score(&HypergeomParams::new(k, n, big_k, big_n).unwrap());
        assert!((score(5, 8, 5, 102).unwrap() - 0.625 * 20.4f64.ln()).abs() < 1e-15);
        assert!((score(5, 8, 5, 102).unwrap() - 1.8847).abs() < 1e-4);
        assert_eq!(score(3, 8, 102, 102).unwrap(), 0.0);
        assert_eq!(score(0, 8, 5, 102).unwrap(), 0.0);
        assert_eq!(score(0, 8, 0, 102).unwrap_err(), StatsError::UndefinedForAbsentTheme);
    }

    #[test]
    fn mean_sd_sample_denominator() {
        let (m, sd) = mean_sd(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((sd.unwrap() - (32.0f64 / 7.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_sd(&[3.0]), (3.0, None));
    }
}
