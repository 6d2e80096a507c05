//! Theme enrichment analysis.
//!
//! Decides whether themes from a hierarchical theme ontology are
//! over-represented in a test storyset relative to a background storyset,
//! using the hypergeometric upper tail probability with TF-IDF as a
//! comparison score.
//!
//! ```
//! use themex_core::stats::{hypergeom_pvalue, HypergeomParams};
//!
//! // 4 of 8 test stories feature the theme, 7 of 102 background stories do
//! let p = hypergeom_pvalue(&HypergeomParams::new(4, 8, 7, 102).unwrap()).unwrap();
//! assert!((p.value() - 0.0005).abs() < 5e-5);
//! ```

pub mod corpus;
pub mod engine;
pub mod ontology;
pub mod report;
pub mod stats;
mod tsv;

pub use corpus::{
    expand_latent, load_corpus, load_storysets, render_storysets, Corpus, CorpusError, CountOptions, Level, LevelSet,
    Story, Storyset, ThemeProfile,
};
pub use engine::{
    compare_methods, domain_distribution, enrich, negative_control, EngineError, EnrichmentQuery, EnrichmentResult,
    Method, MethodOverlap, NegativeControl, NegativeControlReport,
};
pub use ontology::{
    parse_ontology, validate_ontology, Domain, OntologyError, OntologyStats, SubtreeNode, Theme, ThemeId,
    ThemeOntology, ROOT_THEME,
};
pub use stats::{hypergeom_pvalue, log_choose, tfidf_score, HypergeomParams, PValue, StatsError};
pub use tsv::MalformedRow;
