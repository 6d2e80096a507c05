//! Enrichment analyses over a whole ontology.

use std::cmp::Ordering;
use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, CorpusError, CountOptions, LevelSet, Storyset};
use crate::ontology::{Domain, ThemeOntology};
use crate::stats::{self, mean_sd, HypergeomParams, PValue, StatsError};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hypergeometric,
    Tfidf,
    #[default]
    Both,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hypergeometric" => Ok(Method::Hypergeometric),
            "tfidf" => Ok(Method::Tfidf),
            "both" => Ok(Method::Both),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnrichmentQuery {
    pub test: Storyset,
    pub background: Storyset,
    pub alpha: f64,
    pub levels: LevelSet,
    pub include_latent: bool,
    pub method: Method,
    pub top: Option<usize>,
    pub min_k: u64,
}

impl EnrichmentQuery {
    pub fn new(test: Storyset, background: Storyset) -> Self {
        EnrichmentQuery {
            test,
            background,
            alpha: DEFAULT_ALPHA,
            levels: LevelSet::BOTH,
            include_latent: true,
            method: Method::Both,
            top: None,
            min_k: 1,
        }
    }

    pub fn count_options(&self) -> CountOptions {
        CountOptions {
            levels: self.levels,
            include_latent: self.include_latent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrichmentResult {
    pub rank: usize,
    pub theme: String,
    pub domain: Domain,
    pub k: u64,
    #[serde(rename = "K")]
    pub big_k: u64,
    pub n: u64,
    #[serde(rename = "N")]
    pub big_n: u64,
    pub p_value: PValue,
    pub tfidf: f64,
    pub significant: bool,
}

impl EnrichmentResult {
    pub fn params(&self) -> HypergeomParams {
        HypergeomParams {
            test_hits: self.k,
            test_size: self.n,
            background_hits: self.big_k,
            background_size: self.big_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("EmptyTestSet: test storyset `{0}` has no stories")]
    EmptyTestSet(String),
    #[error("TestNotSubsetOfBackground: {count} stories of `{test}` are missing from `{background}`")]
    TestNotSubsetOfBackground {
        test: String,
        background: String,
        count: usize,
    },
    #[error("InvalidQuery: {0}")]
    InvalidQuery(String),
    #[error("InsufficientResults: cannot take the top {needed} of {available} results")]
    InsufficientResults { needed: usize, available: usize },
    #[error("EmptyResults: no results to summarize")]
    EmptyResults,
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl EngineError {
    pub fn code(&self) -> &'static str {
        match self {
            EngineError::EmptyTestSet(_) => "EmptyTestSet",
            EngineError::TestNotSubsetOfBackground { .. } => "TestNotSubsetOfBackground",
            EngineError::InvalidQuery(_) => "InvalidQuery",
            EngineError::InsufficientResults { .. } => "InsufficientResults",
            EngineError::EmptyResults => "EmptyResults",
            EngineError::Corpus(e) => e.code(),
            EngineError::Stats(e) => e.code(),
        }
    }
}

fn check_alpha(alpha: f64) -> Result<(), EngineError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(EngineError::InvalidQuery(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

/// Significance ordering: p ascending, then k descending, then name.
pub fn by_significance(a: &EnrichmentResult, b: &EnrichmentResult) -> Ordering {
    a.p_value
        .value()
        .total_cmp(&b.p_value.value())
        .then_with(|| b.k.cmp(&a.k))
        .then_with(|| a.theme.cmp(&b.theme))
}

/// TF-IDF ordering: score descending, then name.
pub fn by_tfidf(a: &EnrichmentResult, b: &EnrichmentResult) -> Ordering {
    b.tfidf.total_cmp(&a.tfidf).then_with(|| a.theme.cmp(&b.theme))
}

/// Tests every non-root theme present in the background at least `min_k`
/// times. P-values are reported raw; no multiple-comparison correction.
pub fn enrich(
    corpus: &Corpus,
    ontology: &ThemeOntology,
    query: &EnrichmentQuery,
) -> Result<Vec<EnrichmentResult>, EngineError> {
    check_alpha(query.alpha)?;
    if query.min_k < 1 {
        return Err(EngineError::InvalidQuery("min_K must be at least 1".into()));
    }
    if query.test.is_empty() {
        return Err(EngineError::EmptyTestSet(query.test.name().to_string()));
    }
    let test = corpus.resolve(&query.test)?;
    let background = corpus.resolve(&query.background)?;
    let in_background: HashSet<usize> = background.iter().copied().collect();
    let missing = test.iter().filter(|t| !in_background.contains(t)).count();
    if missing > 0 {
        return Err(EngineError::TestNotSubsetOfBackground {
            test: query.test.name().to_string(),
            background: query.background.name().to_string(),
            count: missing,
        });
    }

    let opts = query.count_options();
    let test_counts = corpus.count_all(&test, opts);
    let background_counts = corpus.count_all(&background, opts);
    let n = test.len() as u64;
    let big_n = background.len() as u64;
    let root = ontology.root();

    let candidates: Vec<_> = ontology
        .ids()
        .filter(|&id| id != root && background_counts[id.index()] as u64 >= query.min_k)
        .collect();
    log::debug!(
        "testing {} themes: n={} N={} ({} vs {})",
        candidates.len(),
        n,
        big_n,
        query.test.name(),
        query.background.name()
    );
    let mut results = candidates
        .par_iter()
        .map(|&id| {
            let params = HypergeomParams::new(
                test_counts[id.index()] as u64,
                n,
                background_counts[id.index()] as u64,
                big_n,
            )?;
            let p_value = stats::hypergeom_pvalue(&params)?;
            let theme = ontology.theme(id);
            Ok(EnrichmentResult {
                rank: 0,
                theme: theme.name.clone(),
                domain: theme.domain,
                k: params.test_hits,
                big_k: params.background_hits,
                n,
                big_n,
                p_value,
                tfidf: stats::tfidf_score(&params)?,
                significant: p_value.value() < query.alpha,
            })
        })
        .collect::<Result<Vec<_>, StatsError>>()?;

    match query.method {
        Method::Tfidf => results.sort_by(by_tfidf),
        Method::Hypergeometric | Method::Both => results.sort_by(by_significance),
    }
    for (i, r) in results.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    if let Some(top) = query.top {
        results.truncate(top);
    }
    Ok(results)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NegativeControlReport {
    pub background: String,
    pub trials: usize,
    pub n: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Significant-theme count of each trial, in draw order.
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Sample deviation; reported as 0 when undefined (a single trial).
    pub sd: f64,
    pub sd_defined: bool,
}

impl NegativeControlReport {
    /// `(significant count, number of trials)` pairs for every observed count.
    pub fn histogram(&self) -> Vec<(usize, usize)> {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        let mut bins = vec![0usize; max + 1];
        for &c in &self.counts {
            bins[c] += 1;
        }
        bins.into_iter().enumerate().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativeControl {
    pub background: Storyset,
    pub n: usize,
    pub trials: usize,
    pub alpha: f64,
    pub seed: u64,
    pub options: CountOptions,
}

/// Repeats the enrichment test on `trials` random test storysets drawn from
/// the background. Draw `i` (1-based) uses stream `i` of the seeded
/// generator, so the report depends only on the inputs.
pub fn negative_control(
    corpus: &Corpus,
    ontology: &ThemeOntology,
    control: &NegativeControl,
) -> Result<NegativeControlReport, EngineError> {
    check_alpha(control.alpha)?;
    if control.trials == 0 {
        return Err(EngineError::InvalidQuery("trials must be at least 1".into()));
    }
    if control.n == 0 || control.n > control.background.len() {
        return Err(StatsError::SampleTooLarge {
            requested: control.n,
            available: control.background.len(),
        }
        .into());
    }
    corpus.resolve(&control.background)?;
    log::debug!(
        "negative control: {} trials of n={} seed={}",
        control.trials,
        control.n,
        control.seed
    );
    let counts = (1..=control.trials as u64)
        .into_par_iter()
        .map(|draw| {
            let test = stats::sample_storyset(&control.background, control.n, control.seed, draw)?;
            let mut query = EnrichmentQuery::new(test, control.background.clone());
            query.alpha = control.alpha;
            query.levels = control.options.levels;
            query.include_latent = control.options.include_latent;
            query.method = Method::Hypergeometric;
            let results = enrich(corpus, ontology, &query)?;
            Ok(results.iter().filter(|r| r.significant).count())
        })
        .collect::<Result<Vec<usize>, EngineError>>()?;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let (mean, sd) = mean_sd(&values);
    Ok(NegativeControlReport {
        background: control.background.name().to_string(),
        trials: control.trials,
        n: control.n,
        alpha: control.alpha,
        seed: control.seed,
        counts,
        mean,
        sd: sd.unwrap_or(0.0),
        sd_defined: sd.is_some(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScorePair {
    pub theme: String,
    pub domain: Domain,
    pub p_value: f64,
    pub tfidf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodOverlap {
    pub top_m: usize,
    pub shared: usize,
    pub jaccard: f64,
    /// Top `m` by p-value, in significance order.
    pub top_by_p: Vec<String>,
    /// Top `m` by TF-IDF, in score order.
    pub top_by_tfidf: Vec<String>,
    pub pairs: Vec<ScorePair>,
}

/// Overlap between the top `m` themes by p-value and by TF-IDF.
pub fn compare_methods(results: &[EnrichmentResult], top_m: usize) -> Result<MethodOverlap, EngineError> {
    if top_m == 0 || top_m > results.len() {
        return Err(EngineError::InsufficientResults {
            needed: top_m,
            available: results.len(),
        });
    }
    let top = |cmp: fn(&EnrichmentResult, &EnrichmentResult) -> Ordering| -> Vec<String> {
        let mut sorted: Vec<&EnrichmentResult> = results.iter().collect();
        sorted.sort_by(|a, b| cmp(a, b));
        sorted.into_iter().take(top_m).map(|r| r.theme.clone()).collect()
    };
    let top_by_p = top(by_significance);
    let top_by_tfidf = top(by_tfidf);
    let p_set: HashSet<&String> = top_by_p.iter().collect();
    let shared = top_by_tfidf.iter().filter(|t| p_set.contains(t)).count();
    let pairs = results
        .iter()
        .map(|r| ScorePair {
            theme: r.theme.clone(),
            domain: r.domain,
            p_value: r.p_value.value(),
            tfidf: r.tfidf,
        })
        .collect();
    Ok(MethodOverlap {
        top_m,
        shared,
        jaccard: shared as f64 / (2 * top_m - shared) as f64,
        top_by_p,
        top_by_tfidf,
        pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainShare {
    pub domain: Domain,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantileBin {
    /// 1-based, most significant first.
    pub quantile: usize,
    pub themes: usize,
    pub shares: Vec<DomainShare>,
}

/// Splits results into `bins` rank-based p-value groups and reports the
/// share of each domain in every group. Themes tied on p-value across a
/// boundary all go to the lower (more significant) group.
pub fn domain_distribution(results: &[EnrichmentResult], bins: usize) -> Result<Vec<QuantileBin>, EngineError> {
    if results.is_empty() {
        return Err(EngineError::EmptyResults);
    }
    if bins == 0 {
        return Err(EngineError::InvalidQuery("need at least one quantile".into()));
    }
    let mut sorted: Vec<&EnrichmentResult> = results.iter().collect();
    sorted.sort_by(|a, b| by_significance(a, b));
    let m = sorted.len();
    let mut counts = vec![[0usize; 4]; bins];
    let mut prev: Option<(f64, usize)> = None;
    for (i, r) in sorted.iter().enumerate() {
        let p = r.p_value.value();
        let bin = match prev {
            Some((prev_p, prev_bin)) if prev_p == p => prev_bin,
            _ => i * bins / m,
        };
        prev = Some((p, bin));
        if let Some(slot) = Domain::ALL.iter().position(|&d| d == r.domain) {
            counts[bin][slot] += 1;
        }
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let total: usize = c.iter().sum();
            QuantileBin {
                quantile: i + 1,
                themes: total,
                shares: Domain::ALL
                    .iter()
                    .zip(c)
                    .map(|(&domain, count)| DomainShare {
                        domain,
                        percent: if total == 0 {
                            0.0
                        } else {
                            100.0 * count as f64 / total as f64
                        },
                    })
                    .collect(),
            }
        })
        .collect())
}
