#![allow(dead_code)]

use std::path::PathBuf;

use themex_core::{load_corpus, load_storysets, parse_ontology, Corpus, Storyset, ThemeOntology};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn read(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap()
}

pub struct Startrek {
    pub ontology: ThemeOntology,
    pub corpus: Corpus,
    pub sets: Vec<Storyset>,
}

impl Startrek {
    pub fn load() -> Self {
        let ontology = parse_ontology(&read("startrek/themes.tsv")).unwrap();
        let corpus = load_corpus(
            &read("startrek/stories.tsv"),
            &read("startrek/annotations.tsv"),
            &ontology,
        )
        .unwrap();
        let sets = load_storysets(&read("startrek/storysets.tsv"), &corpus).unwrap();
        Startrek { ontology, corpus, sets }
    }

    pub fn set(&self, name: &str) -> Storyset {
        self.sets.iter().find(|s| s.name() == name).unwrap().clone()
    }
}

/// Top 20 of the Klingon TOS/TAS analysis: theme, k, K, printed p-value
/// (`None` for the "below 0.0001" row).
pub const KLINGON_TOS_TAS: [(&str, u64, u64, Option<f64>); 20] = [
    ("über-belligerent alien", 5, 5, None),
    ("diplomatic negotiating", 4, 7, Some(0.0005)),
    ("culturally distinguished life form", 6, 20, Some(0.0006)),
    ("man vs. beast", 3, 5, Some(0.0030)),
    ("diplomacy", 5, 19, Some(0.0053)),
    ("conflict over a shared resource", 2, 2, Some(0.0054)),
    ("atrocities of war", 2, 2, Some(0.0054)),
    ("tribble", 2, 2, Some(0.0054)),
    ("pacifism", 3, 7, Some(0.0098)),
    ("military tactics", 3, 7, Some(0.0098)),
    ("war", 5, 22, Some(0.0110)),
    ("transnational social issue", 6, 32, Some(0.0111)),
    ("the art of war", 5, 23, Some(0.0136)),
    ("miscellaneous life form", 3, 8, Some(0.0150)),
    ("imperialistic society", 3, 8, Some(0.0150)),
    ("conflict of moral codes", 2, 3, Some(0.0157)),
    ("cross cultural understanding", 4, 16, Some(0.0198)),
    ("humility", 3, 9, Some(0.0217)),
    ("patience", 3, 10, Some(0.0297)),
    ("temperance", 2, 4, Some(0.0301)),
];
