//! Stories, their theme annotations and named storysets.
//!
//! Each story's profile is resolved once at load time: the annotated
//! (observed) themes plus the latent themes implied by the hierarchy.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ontology::{ThemeId, ThemeOntology};
use crate::stats::mean_sd;
use crate::tsv::{read_rows, MalformedRow};

pub(crate) const STORIES_HEADER: [&str; 3] = ["id", "title", "collections"];
pub(crate) const ANNOTATIONS_HEADER: [&str; 3] = ["story_id", "theme", "level"];
pub(crate) const STORYSETS_HEADER: [&str; 2] = ["storyset", "story_id"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Central,
    Peripheral,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Central => "central",
            Level::Peripheral => "peripheral",
        }
    }

    /// Central dominates peripheral.
    pub fn strongest(self, other: Level) -> Level {
        if self == Level::Central || other == Level::Central {
            Level::Central
        } else {
            Level::Peripheral
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "central" => Ok(Level::Central),
            "peripheral" => Ok(Level::Peripheral),
            other => Err(format!("unknown level `{other}`")),
        }
    }
}

/// Which annotation levels take part in counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Level>", into = "Vec<Level>")]
pub struct LevelSet {
    central: bool,
    peripheral: bool,
}

impl LevelSet {
    pub const BOTH: LevelSet = LevelSet {
        central: true,
        peripheral: true,
    };

    pub fn only(level: Level) -> LevelSet {
        LevelSet {
            central: level == Level::Central,
            peripheral: level == Level::Peripheral,
        }
    }

    pub fn contains(self, level: Level) -> bool {
        match level {
            Level::Central => self.central,
            Level::Peripheral => self.peripheral,
        }
    }

    pub fn levels(self) -> Vec<Level> {
        [Level::Central, Level::Peripheral]
            .into_iter()
            .filter(|&l| self.contains(l))
            .collect()
    }
}

impl Default for LevelSet {
    fn default() -> Self {
        LevelSet::BOTH
    }
}

impl TryFrom<Vec<Level>> for LevelSet {
    type Error = String;

    fn try_from(levels: Vec<Level>) -> Result<Self, Self::Error> {
        if levels.is_empty() {
            return Err("at least one level is required".into());
        }
        Ok(LevelSet {
            central: levels.contains(&Level::Central),
            peripheral: levels.contains(&Level::Peripheral),
        })
    }
}

impl From<LevelSet> for Vec<Level> {
    fn from(set: LevelSet) -> Self {
        set.levels()
    }
}

impl FromStr for LevelSet {
    type Err = String;

    /// Comma separated, e.g. `central,peripheral`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let levels = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Level>, _>>()?;
        LevelSet::try_from(levels)
    }
}

impl fmt::Display for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.levels().into_iter().map(Level::as_str).collect();
        f.write_str(&names.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountOptions {
    pub levels: LevelSet,
    pub include_latent: bool,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            levels: LevelSet::BOTH,
            include_latent: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Story {
    pub id: String,
    pub title: String,
    pub collections: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub story_id: String,
    pub theme: String,
    pub level: Level,
}

/// Observed and latent themes of one story, each sorted by theme id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThemeProfile {
    pub observed: Vec<(ThemeId, Level)>,
    pub latent: Vec<(ThemeId, Level)>,
}

impl ThemeProfile {
    fn new(observed: BTreeMap<ThemeId, Level>, ontology: &ThemeOntology) -> Self {
        let latent = latent_ids(&observed, ontology);
        ThemeProfile {
            observed: observed.into_iter().collect(),
            latent: latent.into_iter().collect(),
        }
    }

    /// Level at which the theme is featured, if it is.
    pub fn level_of(&self, theme: ThemeId, include_latent: bool) -> Option<Level> {
        let find = |list: &[(ThemeId, Level)]| list.binary_search_by_key(&theme, |&(t, _)| t).ok().map(|i| list[i].1);
        find(&self.observed).or_else(|| if include_latent { find(&self.latent) } else { None })
    }

    fn featured(&self, opts: CountOptions) -> impl Iterator<Item = ThemeId> + '_ {
        let latent: &[(ThemeId, Level)] = if opts.include_latent { &self.latent } else { &[] };
        self.observed
            .iter()
            .chain(latent)
            .filter(move |(_, l)| opts.levels.contains(*l))
            .map(|&(t, _)| t)
    }
}

fn latent_ids(observed: &BTreeMap<ThemeId, Level>, ontology: &ThemeOntology) -> BTreeMap<ThemeId, Level> {
    let root = ontology.root();
    let mut latent: BTreeMap<ThemeId, Level> = BTreeMap::new();
    for (&theme, &level) in observed {
        for ancestor in ontology.ancestor_ids(theme) {
            if ancestor == root || observed.contains_key(&ancestor) {
                continue;
            }
            latent
                .entry(ancestor)
                .and_modify(|l| *l = l.strongest(level))
                .or_insert(level);
        }
    }
    latent
}

/// Latent themes implied by a set of observed themes: every proper ancestor
/// except the root and the observed themes themselves, at the strongest
/// level among the observed descendants that imply it.
pub fn expand_latent(
    observed: &BTreeMap<String, Level>,
    ontology: &ThemeOntology,
) -> Result<BTreeMap<String, Level>, CorpusError> {
    let ids = observed
        .iter()
        .map(|(name, &level)| {
            ontology
                .id(name)
                .map(|id| (id, level))
                .map_err(|_| CorpusError::UnknownTheme {
                    theme: name.clone(),
                    line: None,
                })
        })
        .collect::<Result<BTreeMap<ThemeId, Level>, _>>()?;
    Ok(latent_ids(&ids, ontology)
        .into_iter()
        .map(|(id, level)| (ontology.name(id).to_string(), level))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("UnknownTheme: `{theme}`{}", at_line(*.line))]
    UnknownTheme { theme: String, line: Option<usize> },
    #[error("UnknownStory: `{id}`{}", at_line(*.line))]
    UnknownStory { id: String, line: Option<usize> },
    #[error("DuplicateStory: `{id}` (line {line})")]
    DuplicateStory { id: String, line: usize },
    #[error("UnknownStoryset: `{0}`")]
    UnknownStoryset(String),
    #[error("InvalidStoryset: {0}")]
    InvalidStoryset(String),
    #[error("MalformedRow: {0}")]
    MalformedRow(#[from] MalformedRow),
}

fn at_line(line: Option<usize>) -> String {
    line.map(|l| format!(" (line {l})")).unwrap_or_default()
}

impl CorpusError {
    pub fn code(&self) -> &'static str {
        match self {
            CorpusError::UnknownTheme { .. } => "UnknownTheme",
            CorpusError::UnknownStory { .. } => "UnknownStory",
            CorpusError::DuplicateStory { .. } => "DuplicateStory",
            CorpusError::UnknownStoryset(_) => "UnknownStoryset",
            CorpusError::InvalidStoryset(_) => "InvalidStoryset",
            CorpusError::MalformedRow(_) => "MalformedRow",
        }
    }
}

/// Named, duplicate-free, ordered list of story ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Storyset {
    name: String,
    ids: Vec<String>,
}

impl Storyset {
    /// Keeps the first occurrence of repeated ids.
    pub fn new(name: impl Into<String>, ids: impl IntoIterator<Item = String>) -> Self {
        let mut seen = HashSet::new();
        let ids = ids.into_iter().filter(|id| seen.insert(id.clone())).collect();
        Storyset { name: name.into(), ids }
    }

    pub(crate) fn from_sorted_unique(name: impl Into<String>, ids: Vec<String>) -> Self {
        Storyset { name: name.into(), ids }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn id_set(&self) -> BTreeSet<&str> {
        self.ids.iter().map(String::as_str).collect()
    }

    pub fn is_subset_of(&self, other: &Storyset) -> bool {
        let theirs = other.id_set();
        self.ids.iter().all(|id| theirs.contains(id.as_str()))
    }

    fn combine(name: impl Into<String>, ids: BTreeSet<&str>) -> Storyset {
        Storyset::from_sorted_unique(name, ids.into_iter().map(str::to_string).collect())
    }

    pub fn union(&self, other: &Storyset, name: impl Into<String>) -> Storyset {
        Storyset::combine(name, self.id_set().union(&other.id_set()).copied().collect())
    }

    pub fn intersect(&self, other: &Storyset, name: impl Into<String>) -> Storyset {
        Storyset::combine(name, self.id_set().intersection(&other.id_set()).copied().collect())
    }

    pub fn difference(&self, other: &Storyset, name: impl Into<String>) -> Storyset {
        Storyset::combine(name, self.id_set().difference(&other.id_set()).copied().collect())
    }
}

/// Mean number of themes per story at each level, with sample deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSummary {
    pub stories: usize,
    pub central_mean: f64,
    pub central_sd: f64,
    pub peripheral_mean: f64,
    pub peripheral_sd: f64,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    stories: Vec<Story>,
    by_id: HashMap<String, usize>,
    profiles: Vec<ThemeProfile>,
    theme_slots: usize,
}

/// Loads STORIES and ANNOTATIONS TSV documents against `ontology`.
pub fn load_corpus(stories: &str, annotations: &str, ontology: &ThemeOntology) -> Result<Corpus, CorpusError> {
    let mut list: Vec<Story> = Vec::new();
    let mut by_id: HashMap<String, usize> = HashMap::new();
    for row in read_rows(stories, &STORIES_HEADER)? {
        let id = row.fields[0].trim();
        if id.is_empty() {
            return Err(MalformedRow {
                line: row.line,
                reason: "empty story id".into(),
            }
            .into());
        }
        if by_id.contains_key(id) {
            return Err(CorpusError::DuplicateStory {
                id: id.to_string(),
                line: row.line,
            });
        }
        by_id.insert(id.to_string(), list.len());
        list.push(Story {
            id: id.to_string(),
            title: row.fields[1].trim().to_string(),
            collections: row.fields[2]
                .split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(str::to_string)
                .collect(),
        });
    }

    let mut observed: Vec<BTreeMap<ThemeId, Level>> = vec![BTreeMap::new(); list.len()];
    for row in read_rows(annotations, &ANNOTATIONS_HEADER)? {
        let story_id = row.fields[0].trim();
        let &story = by_id.get(story_id).ok_or_else(|| CorpusError::UnknownStory {
            id: story_id.to_string(),
            line: Some(row.line),
        })?;
        let theme = row.fields[1].trim();
        let theme_id = ontology.id(theme).map_err(|_| CorpusError::UnknownTheme {
            theme: theme.to_string(),
            line: Some(row.line),
        })?;
        let level: Level = row.fields[2]
            .parse()
            .map_err(|reason| MalformedRow { line: row.line, reason })?;
        observed[story]
            .entry(theme_id)
            .and_modify(|l| *l = l.strongest(level))
            .or_insert(level);
    }

    let profiles = observed
        .into_iter()
        .map(|obs| ThemeProfile::new(obs, ontology))
        .collect();
    Ok(Corpus {
        stories: list,
        by_id,
        profiles,
        theme_slots: ontology.len(),
    })
}

impl Corpus {
    pub fn len(&self) -> usize {
        self.stories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stories.is_empty()
    }

    pub fn stories(&self) -> &[Story] {
        &self.stories
    }

    pub fn story(&self, id: &str) -> Option<&Story> {
        self.by_id.get(id).map(|&i| &self.stories[i])
    }

    pub fn profile(&self, id: &str) -> Option<&ThemeProfile> {
        self.by_id.get(id).map(|&i| &self.profiles[i])
    }

    fn index_of(&self, id: &str) -> Result<usize, CorpusError> {
        self.by_id.get(id).copied().ok_or_else(|| CorpusError::UnknownStory {
            id: id.to_string(),
            line: None,
        })
    }

    /// Story indices of every member, failing on ids missing from the corpus.
    pub fn resolve(&self, set: &Storyset) -> Result<Vec<usize>, CorpusError> {
        set.ids().iter().map(|id| self.index_of(id)).collect()
    }

    /// Validated storyset; repeated ids keep their first position.
    pub fn make_storyset(&self, name: &str, ids: impl IntoIterator<Item = String>) -> Result<Storyset, CorpusError> {
        if name.trim().is_empty() {
            return Err(CorpusError::InvalidStoryset("storyset name must not be empty".into()));
        }
        let set = Storyset::new(name.trim(), ids);
        self.resolve(&set)?;
        Ok(set)
    }

    /// Stories carrying `tag`, in corpus order.
    pub fn from_collection_tag(&self, name: &str, tag: &str) -> Storyset {
        Storyset::from_sorted_unique(
            name,
            self.stories
                .iter()
                .filter(|s| s.collections.contains(tag))
                .map(|s| s.id.clone())
                .collect(),
        )
    }

    /// Per-theme story counts (indexed by [`ThemeId`]) over the given members.
    pub fn count_all(&self, members: &[usize], opts: CountOptions) -> Vec<u32> {
        let mut counts = vec![0u32; self.theme_slots];
        for &m in members {
            for theme in self.profiles[m].featured(opts) {
                counts[theme.index()] += 1;
            }
        }
        counts
    }

    /// Number of distinct stories in `set` featuring `theme`.
    pub fn theme_count(
        &self,
        ontology: &ThemeOntology,
        set: &Storyset,
        theme: &str,
        opts: CountOptions,
    ) -> Result<usize, CorpusError> {
        let id = ontology.id(theme).map_err(|_| CorpusError::UnknownTheme {
            theme: theme.to_string(),
            line: None,
        })?;
        let members = self.resolve(set)?;
        Ok(members
            .into_iter()
            .filter(|&m| {
                self.profiles[m]
                    .level_of(id, opts.include_latent)
                    .is_some_and(|l| opts.levels.contains(l))
            })
            .count())
    }

    /// Themes per story at each level over `set`.
    pub fn level_summary(&self, set: &Storyset, include_latent: bool) -> Result<LevelSummary, CorpusError> {
        let members = self.resolve(set)?;
        let per_level = |level: Level| -> Vec<f64> {
            members
                .iter()
                .map(|&m| {
                    let opts = CountOptions {
                        levels: LevelSet::only(level),
                        include_latent,
                    };
                    self.profiles[m].featured(opts).count() as f64
                })
                .collect()
        };
        let (central_mean, central_sd) = mean_sd(&per_level(Level::Central));
        let (peripheral_mean, peripheral_sd) = mean_sd(&per_level(Level::Peripheral));
        Ok(LevelSummary {
            stories: members.len(),
            central_mean,
            central_sd: central_sd.unwrap_or(0.0),
            peripheral_mean,
            peripheral_sd: peripheral_sd.unwrap_or(0.0),
        })
    }
}

/// Parses STORYSETS TSV membership rows, in order of first appearance.
pub fn load_storysets(source: &str, corpus: &Corpus) -> Result<Vec<Storyset>, CorpusError> {
    let mut order: Vec<String> = Vec::new();
    let mut members: HashMap<String, Vec<String>> = HashMap::new();
    for row in read_rows(source, &STORYSETS_HEADER)? {
        let name = row.fields[0].trim();
        let id = row.fields[1].trim();
        if name.is_empty() {
            return Err(MalformedRow {
                line: row.line,
                reason: "empty storyset name".into(),
            }
            .into());
        }
        if corpus.story(id).is_none() {
            return Err(CorpusError::UnknownStory {
                id: id.to_string(),
                line: Some(row.line),
            });
        }
        if !members.contains_key(name) {
            order.push(name.to_string());
        }
        members.entry(name.to_string()).or_default().push(id.to_string());
    }
    Ok(order
        .into_iter()
        .map(|name| {
            let ids = members.remove(&name).unwrap_or_default();
            Storyset::new(name, ids)
        })
        .collect())
}

pub fn render_storysets<'a>(sets: impl IntoIterator<Item = &'a Storyset>) -> String {
    let mut out = STORYSETS_HEADER.join("\t");
    out.push('\n');
    for set in sets {
        for id in set.ids() {
            out.push_str(&format!("{}\t{}\n", set.name(), id));
        }
    }
    out
}
