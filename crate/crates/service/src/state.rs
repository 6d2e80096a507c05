use std::path::PathBuf;
use std::sync::RwLock;

use themex_core::corpus::render_storysets;
use themex_core::{Corpus, Storyset, ThemeOntology};

use crate::error::ApiError;

/// Data shared by all requests. Only the storyset registry changes after
/// startup.
#[derive(Debug)]
pub struct AppState {
    pub ontology: ThemeOntology,
    pub corpus: Corpus,
    storysets: RwLock<Vec<Storyset>>,
    persist: Option<PathBuf>,
}

impl AppState {
    pub fn new(ontology: ThemeOntology, corpus: Corpus, storysets: Vec<Storyset>) -> Self {
        AppState {
            ontology,
            corpus,
            storysets: RwLock::new(storysets),
            persist: None,
        }
    }

    /// Rewrite this STORYSETS file after every successful create.
    pub fn persist_to(mut self, path: impl Into<PathBuf>) -> Self {
        self.persist = Some(path.into());
        self
    }

    pub fn storysets(&self) -> Vec<Storyset> {
        self.storysets.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn storyset(&self, name: &str) -> Result<Storyset, ApiError> {
        self.storysets
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| ApiError::bad_request("UnknownStoryset", format!("no storyset named `{name}`")))
    }

    pub fn add_storyset(&self, set: Storyset) -> Result<(), ApiError> {
        let mut sets = self.storysets.write().unwrap_or_else(|e| e.into_inner());
        if sets.iter().any(|s| s.name() == set.name()) {
            return Err(ApiError::new(
                axum::http::StatusCode::CONFLICT,
                "StorysetExists",
                format!("storyset `{}` already exists", set.name()),
            ));
        }
        sets.push(set);
        if let Some(path) = &self.persist {
            if let Err(e) = write_atomically(path, &render_storysets(sets.iter())) {
                sets.pop();
                return Err(ApiError::new(
                    axum::http::StatusCode::INTERNAL_SERVER_ERROR,
                    "PersistFailed",
                    format!("could not write {}: {e}", path.display()),
                ));
            }
        }
        Ok(())
    }
}

fn write_atomically(path: &std::path::Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tsv.tmp");
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}
