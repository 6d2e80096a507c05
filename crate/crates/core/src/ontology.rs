//! The theme ontology: a single-rooted forest of themes split into four domains.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tsv::{read_rows, MalformedRow};

/// Name of the abstract theme every domain hangs from.
pub const ROOT_THEME: &str = "literary thematic entity";

pub(crate) const THEMES_HEADER: [&str; 4] = ["theme", "parent", "domain", "definition"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Domain {
    #[serde(rename = "the human condition")]
    HumanCondition,
    #[serde(rename = "society")]
    Society,
    #[serde(rename = "the pursuit of knowledge")]
    PursuitOfKnowledge,
    #[serde(rename = "alternate reality")]
    AlternateReality,
    #[serde(rename = "root")]
    Root,
}

impl Domain {
    /// The four domains proper, in display order.
    pub const ALL: [Domain; 4] = [
        Domain::HumanCondition,
        Domain::Society,
        Domain::PursuitOfKnowledge,
        Domain::AlternateReality,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Domain::HumanCondition => "the human condition",
            Domain::Society => "society",
            Domain::PursuitOfKnowledge => "the pursuit of knowledge",
            Domain::AlternateReality => "alternate reality",
            Domain::Root => "root",
        }
    }

    /// Color code used when plotting themes by domain.
    pub fn color(self) -> &'static str {
        match self {
            Domain::HumanCondition => "red",
            Domain::Society => "green",
            Domain::PursuitOfKnowledge => "blue",
            Domain::AlternateReality => "yellow",
            Domain::Root => "gray",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "the human condition" => Ok(Domain::HumanCondition),
            "society" => Ok(Domain::Society),
            "the pursuit of knowledge" => Ok(Domain::PursuitOfKnowledge),
            "alternate reality" => Ok(Domain::AlternateReality),
            "root" => Ok(Domain::Root),
            other => Err(format!("unknown domain `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theme {
    pub name: String,
    pub parent: Option<String>,
    pub domain: Domain,
    pub definition: String,
}

/// Dense index of a theme inside one [`ThemeOntology`]. Ids follow the
/// lexicographic order of theme names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ThemeId(u32);

impl ThemeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OntologyError {
    #[error("DuplicateTheme: `{name}` (line {line})")]
    DuplicateTheme { name: String, line: usize },
    #[error("UnknownParent: `{name}` has parent `{parent}` which is not defined")]
    UnknownParent { name: String, parent: String },
    #[error("CycleDetected: {}", cycle_text(.path))]
    CycleDetected { path: Vec<String> },
    #[error("MultipleRoots: {}", .names.join(", "))]
    MultipleRoots { names: Vec<String> },
    #[error("MissingRoot: no theme without a parent")]
    MissingRoot,
    #[error("DomainMismatch: `{name}` declares domain `{declared}` but belongs to `{expected}`")]
    DomainMismatch {
        name: String,
        declared: Domain,
        expected: Domain,
    },
    #[error("UnknownTheme: `{0}`")]
    UnknownTheme(String),
    #[error("MalformedRow: {0}")]
    MalformedRow(#[from] MalformedRow),
}

fn cycle_text(path: &[String]) -> String {
    let mut parts: Vec<&str> = path.iter().map(String::as_str).collect();
    if let Some(first) = path.first() {
        parts.push(first);
    }
    parts.join(" -> ")
}

impl OntologyError {
    /// Machine readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            OntologyError::DuplicateTheme { .. } => "DuplicateTheme",
            OntologyError::UnknownParent { .. } => "UnknownParent",
            OntologyError::CycleDetected { .. } => "CycleDetected",
            OntologyError::MultipleRoots { .. } => "MultipleRoots",
            OntologyError::MissingRoot => "MissingRoot",
            OntologyError::DomainMismatch { .. } => "DomainMismatch",
            OntologyError::UnknownTheme(_) => "UnknownTheme",
            OntologyError::MalformedRow(_) => "MalformedRow",
        }
    }
}

/// Validated, immutable theme hierarchy.
#[derive(Debug, Clone)]
pub struct ThemeOntology {
    themes: Vec<Theme>,
    parents: Vec<Option<ThemeId>>,
    children: Vec<Vec<ThemeId>>,
    by_name: HashMap<String, ThemeId>,
    root: ThemeId,
    warnings: Vec<String>,
}

impl PartialEq for ThemeOntology {
    fn eq(&self, other: &Self) -> bool {
        self.themes == other.themes
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DomainStats {
    pub domain: Domain,
    pub theme_count: usize,
    pub leaf_count: usize,
    /// Edges on the longest path from the domain root down to a leaf.
    pub height: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OntologyStats {
    pub domains: Vec<DomainStats>,
}

impl OntologyStats {
    pub fn domain(&self, domain: Domain) -> Option<&DomainStats> {
        self.domains.iter().find(|d| d.domain == domain)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubtreeNode {
    pub name: String,
    pub domain: Domain,
    pub definition: String,
    /// Number of children not shown because of the depth limit.
    pub hidden_children: usize,
    pub children: Vec<SubtreeNode>,
}

impl SubtreeNode {
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(SubtreeNode::node_count).sum::<usize>()
    }

    /// Text rendering in the style of `tree(1)`.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.name);
        if self.hidden_children > 0 {
            out.push_str(&format!(" (+{})", self.hidden_children));
        }
        out.push('\n');
        self.render_children("", &mut out);
        out
    }

    fn render_children(&self, prefix: &str, out: &mut String) {
        let last = self.children.len().saturating_sub(1);
        for (i, child) in self.children.iter().enumerate() {
            let (branch, cont) = if i == last {
                ("└── ", "    ")
            } else {
                ("├── ", "│   ")
            };
            out.push_str(prefix);
            out.push_str(branch);
            out.push_str(&child.name);
            if child.hidden_children > 0 {
                out.push_str(&format!(" (+{})", child.hidden_children));
            }
            out.push('\n');
            child.render_children(&format!("{prefix}{cont}"), out);
        }
    }
}

/// Parses and validates a THEMES TSV document, stopping at the first defect.
pub fn parse_ontology(source: &str) -> Result<ThemeOntology, OntologyError> {
    match check(source) {
        Ok(ontology) => Ok(ontology),
        Err(mut defects) => Err(defects.swap_remove(0)),
    }
}

/// Every defect found in a THEMES TSV document; empty when it is valid.
pub fn validate_ontology(source: &str) -> Vec<OntologyError> {
    check(source).err().unwrap_or_default()
}

#[derive(Clone, Copy, PartialEq)]
enum Walk {
    Unseen,
    OnPath,
    Rooted,
    Broken,
}

fn check(source: &str) -> Result<ThemeOntology, Vec<OntologyError>> {
    let rows = read_rows(source, &THEMES_HEADER).map_err(|e| vec![e.into()])?;
    let mut defects = Vec::new();

    let mut themes: Vec<Theme> = Vec::with_capacity(rows.len());
    let mut seen: HashMap<String, usize> = HashMap::new();
    for row in &rows {
        let name = row.fields[0].trim();
        if name.is_empty() {
            return Err(vec![MalformedRow {
                line: row.line,
                reason: "empty theme name".into(),
            }
            .into()]);
        }
        let parent = row.fields[1].trim();
        let domain = row.fields[2]
            .parse::<Domain>()
            .map_err(|reason| vec![OntologyError::from(MalformedRow { line: row.line, reason })])?;
        if seen.contains_key(name) {
            defects.push(OntologyError::DuplicateTheme {
                name: name.to_string(),
                line: row.line,
            });
            continue;
        }
        seen.insert(name.to_string(), themes.len());
        themes.push(Theme {
            name: name.to_string(),
            parent: (!parent.is_empty()).then(|| parent.to_string()),
            domain,
            definition: row.fields[3].trim().to_string(),
        });
    }

    themes.sort_by(|a, b| a.name.cmp(&b.name));
    let by_name: HashMap<String, ThemeId> = themes
        .iter()
        .enumerate()
        .map(|(i, t)| (t.name.clone(), ThemeId(i as u32)))
        .collect();

    // Themes with an undefined parent are reported once and then ignored by
    // the structural checks below.
    let mut parents: Vec<Option<ThemeId>> = vec![None; themes.len()];
    let mut detached = vec![false; themes.len()];
    for (i, theme) in themes.iter().enumerate() {
        if let Some(parent) = &theme.parent {
            match by_name.get(parent) {
                Some(&p) => parents[i] = Some(p),
                None => {
                    detached[i] = true;
                    defects.push(OntologyError::UnknownParent {
                        name: theme.name.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }
    }

    let mut state = vec![Walk::Unseen; themes.len()];
    for start in 0..themes.len() {
        if state[start] != Walk::Unseen {
            continue;
        }
        let mut path = Vec::new();
        let mut cur = start;
        let outcome = loop {
            match state[cur] {
                Walk::Rooted => break Walk::Rooted,
                Walk::Broken => break Walk::Broken,
                Walk::OnPath => {
                    let from = path.iter().position(|&p| p == cur).unwrap();
                    let mut cycle: Vec<usize> = path[from..].to_vec();
                    let min_at = (0..cycle.len()).min_by_key(|&i| &themes[cycle[i]].name).unwrap();
                    cycle.rotate_left(min_at);
                    defects.push(OntologyError::CycleDetected {
                        path: cycle.iter().map(|&i| themes[i].name.clone()).collect(),
                    });
                    break Walk::Broken;
                }
                Walk::Unseen => {
                    state[cur] = Walk::OnPath;
                    path.push(cur);
                    if detached[cur] {
                        break Walk::Broken;
                    }
                    match parents[cur] {
                        Some(p) => cur = p.index(),
                        None => break Walk::Rooted,
                    }
                }
            }
        };
        for p in path {
            state[p] = outcome;
        }
    }

    let roots: Vec<usize> = (0..themes.len()).filter(|&i| themes[i].parent.is_none()).collect();
    match roots.len() {
        0 => defects.push(OntologyError::MissingRoot),
        1 => {}
        _ => defects.push(OntologyError::MultipleRoots {
            names: roots.iter().map(|&i| themes[i].name.clone()).collect(),
        }),
    }
    if !defects.is_empty() {
        return Err(defects);
    }
    let root = ThemeId(roots[0] as u32);

    let mut children: Vec<Vec<ThemeId>> = vec![Vec::new(); themes.len()];
    for (i, parent) in parents.iter().enumerate() {
        if let Some(p) = parent {
            children[p.index()].push(ThemeId(i as u32));
        }
    }

    let root_theme = &themes[root.index()];
    if root_theme.domain != Domain::Root {
        defects.push(OntologyError::DomainMismatch {
            name: root_theme.name.clone(),
            declared: root_theme.domain,
            expected: Domain::Root,
        });
    }
    for &top in &children[root.index()] {
        let expected = themes[top.index()].domain;
        let mut stack = vec![top];
        while let Some(id) = stack.pop() {
            let theme = &themes[id.index()];
            if theme.domain != expected || theme.domain == Domain::Root {
                defects.push(OntologyError::DomainMismatch {
                    name: theme.name.clone(),
                    declared: theme.domain,
                    expected,
                });
            }
            stack.extend(children[id.index()].iter().copied());
        }
    }
    if !defects.is_empty() {
        defects.sort_by_key(|d| match d {
            OntologyError::DomainMismatch { name, .. } => name.clone(),
            _ => String::new(),
        });
        return Err(defects);
    }

    let warnings = themes
        .iter()
        .enumerate()
        .filter(|&(i, t)| i != root.index() && t.definition.is_empty())
        .map(|(_, t)| format!("theme `{}` has no definition", t.name))
        .collect();

    Ok(ThemeOntology {
        themes,
        parents,
        children,
        by_name,
        root,
        warnings,
    })
}

impl ThemeOntology {
    pub fn len(&self) -> usize {
        self.themes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.themes.is_empty()
    }

    pub fn root(&self) -> ThemeId {
        self.root
    }

    /// Non-fatal findings from loading, such as missing definitions.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn id(&self, name: &str) -> Result<ThemeId, OntologyError> {
        self.by_name
            .get(name)
            .copied()
            .ok_or_else(|| OntologyError::UnknownTheme(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&Theme> {
        self.by_name.get(name).map(|id| &self.themes[id.index()])
    }

    pub fn theme(&self, id: ThemeId) -> &Theme {
        &self.themes[id.index()]
    }

    pub fn name(&self, id: ThemeId) -> &str {
        &self.themes[id.index()].name
    }

    pub fn parent_id(&self, id: ThemeId) -> Option<ThemeId> {
        self.parents[id.index()]
    }

    pub fn children_ids(&self, id: ThemeId) -> &[ThemeId] {
        &self.children[id.index()]
    }

    /// All themes in lexicographic order.
    pub fn themes(&self) -> impl Iterator<Item = &Theme> {
        self.themes.iter()
    }

    pub fn ids(&self) -> impl Iterator<Item = ThemeId> {
        (0..self.themes.len() as u32).map(ThemeId)
    }

    /// Proper ancestors, nearest first, ending at the root.
    pub fn ancestor_ids(&self, id: ThemeId) -> impl Iterator<Item = ThemeId> + '_ {
        std::iter::successors(self.parents[id.index()], move |p| self.parents[p.index()])
    }

    pub fn ancestors(&self, name: &str) -> Result<Vec<&str>, OntologyError> {
        let id = self.id(name)?;
        Ok(self.ancestor_ids(id).map(|a| self.name(a)).collect())
    }

    pub fn descendant_ids(&self, id: ThemeId) -> Vec<ThemeId> {
        let mut out = Vec::new();
        let mut stack: Vec<ThemeId> = self.children[id.index()].iter().rev().copied().collect();
        while let Some(next) = stack.pop() {
            out.push(next);
            stack.extend(self.children[next.index()].iter().rev().copied());
        }
        out
    }

    pub fn descendants(&self, name: &str) -> Result<BTreeSet<&str>, OntologyError> {
        let id = self.id(name)?;
        Ok(self.descendant_ids(id).into_iter().map(|d| self.name(d)).collect())
    }

    /// `name` and its descendants down to `max_depth` levels (0 = the theme alone).
    pub fn subtree(&self, name: &str, max_depth: Option<usize>) -> Result<SubtreeNode, OntologyError> {
        let id = self.id(name)?;
        Ok(self.build_subtree(id, max_depth))
    }

    fn build_subtree(&self, id: ThemeId, remaining: Option<usize>) -> SubtreeNode {
        let theme = self.theme(id);
        let kids = &self.children[id.index()];
        let (children, hidden_children) = match remaining {
            Some(0) => (Vec::new(), kids.len()),
            _ => (
                kids.iter()
                    .map(|&c| self.build_subtree(c, remaining.map(|d| d - 1)))
                    .collect(),
                0,
            ),
        };
        SubtreeNode {
            name: theme.name.clone(),
            domain: theme.domain,
            definition: theme.definition.clone(),
            hidden_children,
            children,
        }
    }

    pub fn stats(&self) -> OntologyStats {
        let mut domains: Vec<DomainStats> = Domain::ALL
            .iter()
            .map(|&domain| DomainStats {
                domain,
                theme_count: 0,
                leaf_count: 0,
                height: 0,
            })
            .collect();
        for &top in &self.children[self.root.index()] {
            let slot = Domain::ALL
                .iter()
                .position(|&d| d == self.theme(top).domain)
                .expect("top-level themes carry a proper domain");
            let mut stack = vec![(top, 0usize)];
            while let Some((id, depth)) = stack.pop() {
                let entry = &mut domains[slot];
                entry.theme_count += 1;
                let kids = &self.children[id.index()];
                if kids.is_empty() {
                    entry.leaf_count += 1;
                    entry.height = entry.height.max(depth);
                }
                stack.extend(kids.iter().map(|&c| (c, depth + 1)));
            }
        }
        OntologyStats { domains }
    }

    /// Serializes back to THEMES TSV, parents before children.
    pub fn render(&self) -> String {
        let mut out = THEMES_HEADER.join("\t");
        out.push('\n');
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            let t = self.theme(id);
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                t.name,
                t.parent.as_deref().unwrap_or(""),
                t.domain.label(),
                t.definition
            ));
            stack.extend(self.children[id.index()].iter().rev().copied());
        }
        out
    }
}
