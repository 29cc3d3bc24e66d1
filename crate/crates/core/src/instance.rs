//! Set systems of 2- and 3-element sets, their text/JSON formats and
//! random generators.
//!
//! Elements are interned into dense [`ElementId`]s in first-appearance order.
//! Every constructor goes through [`InstanceBuilder`], so parsing the
//! serialized form of an instance reproduces it exactly.

use std::collections::{HashMap, HashSet};
use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstanceError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("malformed json: {0}")]
    Json(String),
    #[error("set {index} has {size} elements; only 2 or 3 are allowed")]
    Cardinality { index: usize, size: usize },
    #[error("set {index} contains element `{element}` more than once")]
    RepeatedElement { index: usize, element: String },
    #[error("set {index} duplicates set {first}")]
    DuplicateSet { index: usize, first: usize },
    #[error("cannot draw {requested} distinct sets; only {available} exist")]
    TooManySets { requested: usize, available: u128 },
    #[error("invalid generator arguments: {0}")]
    BadArguments(String),
    #[error("element `{element}` occurs in more than one part")]
    PartsOverlap { element: String },
}

/// Dense index of a universe element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a set within its instance; doubles as the conflict-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SetId(pub u32);

impl SetId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for SetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackSet {
    pub id: SetId,
    elements: Vec<ElementId>,
}

impl PackSet {
    pub fn elements(&self) -> &[ElementId] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Cardinality minus one, so 1 for pairs and 2 for triples.
    pub fn weight(&self) -> u32 {
        self.elements.len() as u32 - 1
    }

    pub fn intersects(&self, other: &PackSet) -> bool {
        self.elements.iter().any(|e| other.elements.contains(e))
    }

    fn key(&self) -> Vec<ElementId> {
        let mut key = self.elements.clone();
        key.sort_unstable();
        key
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Instance {
    sets: Vec<PackSet>,
    labels: Vec<String>,
}

impl Instance {
    pub fn sets(&self) -> &[PackSet] {
        &self.sets
    }

    pub fn set(&self, id: SetId) -> &PackSet {
        &self.sets[id.index()]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn universe_size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, element: ElementId) -> &str {
        &self.labels[element.index()]
    }

    pub fn weight(&self, id: SetId) -> u32 {
        self.sets[id.index()].weight()
    }

    /// Total weight of a collection of set ids.
    pub fn weight_of<'a>(&self, ids: impl IntoIterator<Item = &'a SetId>) -> u32 {
        ids.into_iter().map(|&id| self.weight(id)).sum()
    }

    /// Element labels of a set, in stored order.
    pub fn set_labels(&self, id: SetId) -> Vec<&str> {
        self.set(id).elements.iter().map(|&e| self.label(e)).collect()
    }

    /// Whether the given sets are pairwise disjoint.
    pub fn is_disjoint_family(&self, ids: &[SetId]) -> bool {
        let mut seen = HashSet::new();
        ids.iter()
            .flat_map(|&id| self.set(id).elements.iter())
            .all(|&e| seen.insert(e))
    }

    pub fn builder() -> InstanceBuilder {
        InstanceBuilder::default()
    }

    /// Rebuilds a builder holding this instance, for extension.
    pub fn to_builder(&self) -> InstanceBuilder {
        let mut b = InstanceBuilder {
            labels: self.labels.clone(),
            ..InstanceBuilder::default()
        };
        for (i, l) in self.labels.iter().enumerate() {
            b.intern.insert(l.clone(), ElementId(i as u32));
        }
        for s in &self.sets {
            b.seen.insert(s.key(), s.id.index());
            b.sets.push(s.clone());
        }
        b
    }

    pub fn parse(input: &str, format: Format) -> Result<Instance, InstanceError> {
        match format {
            Format::Text => parse_text(input),
            Format::Json => parse_json(input),
        }
    }

    pub fn serialize(&self, format: Format) -> String {
        match format {
            Format::Text => {
                let mut out = String::new();
                for s in &self.sets {
                    let line: Vec<&str> = s.elements.iter().map(|&e| self.label(e)).collect();
                    out.push_str(&line.join(" "));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let sets: Vec<Vec<&str>> = self
                    .sets
                    .iter()
                    .map(|s| s.elements.iter().map(|&e| self.label(e)).collect())
                    .collect();
                serde_json::json!({ "sets": sets }).to_string()
            }
        }
    }
}

/// Incremental, validating construction of an [`Instance`].
#[derive(Debug, Default, Clone)]
pub struct InstanceBuilder {
    sets: Vec<PackSet>,
    labels: Vec<String>,
    intern: HashMap<String, ElementId>,
    seen: HashMap<Vec<ElementId>, usize>,
}

impl InstanceBuilder {
    fn intern(&mut self, token: &str) -> ElementId {
        if let Some(&id) = self.intern.get(token) {
            return id;
        }
        let id = ElementId(self.labels.len() as u32);
        self.labels.push(token.to_owned());
        self.intern.insert(token.to_owned(), id);
        id
    }

    /// Whether a set with exactly these element tokens is already present.
    pub fn contains<S: AsRef<str>>(&self, tokens: &[S]) -> bool {
        let mut key = Vec::with_capacity(tokens.len());
        for t in tokens {
            match self.intern.get(t.as_ref()) {
                Some(&id) => key.push(id),
                None => return false,
            }
        }
        key.sort_unstable();
        self.seen.contains_key(&key)
    }

    pub fn add_set<S: AsRef<str>>(&mut self, tokens: &[S]) -> Result<SetId, InstanceError> {
        let index = self.sets.len();
        if !(2..=3).contains(&tokens.len()) {
            return Err(InstanceError::Cardinality {
                index,
                size: tokens.len(),
            });
        }
        for (i, t) in tokens.iter().enumerate() {
            if tokens[..i].iter().any(|u| u.as_ref() == t.as_ref()) {
                return Err(InstanceError::RepeatedElement {
                    index,
                    element: t.as_ref().to_owned(),
                });
            }
        }
        // Interning happens only after validation so a rejected set leaves no trace.
        let snapshot = self.labels.len();
        let elements: Vec<ElementId> = tokens.iter().map(|t| self.intern(t.as_ref())).collect();
        let mut key = elements.clone();
        key.sort_unstable();
        if let Some(&first) = self.seen.get(&key) {
            for l in self.labels.drain(snapshot..) {
                self.intern.remove(&l);
            }
            return Err(InstanceError::DuplicateSet { index, first });
        }
        self.seen.insert(key, index);
        let id = SetId(index as u32);
        self.sets.push(PackSet { id, elements });
        Ok(id)
    }

    pub fn build(self) -> Instance {
        Instance {
            sets: self.sets,
            labels: self.labels,
        }
    }
}

fn parse_text(input: &str) -> Result<Instance, InstanceError> {
    let mut b = Instance::builder();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        b.add_set(&tokens).map_err(|e| match e {
            InstanceError::Cardinality { .. }
            | InstanceError::RepeatedElement { .. }
            | InstanceError::DuplicateSet { .. } => InstanceError::Syntax {
                line: lineno + 1,
                message: e.to_string(),
            },
            other => other,
        })?;
    }
    Ok(b.build())
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Token {
    Str(String),
    Int(i64),
}

impl Token {
    fn into_string(self) -> String {
        match self {
            Token::Str(s) => s,
            Token::Int(i) => i.to_string(),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonInstance {
    sets: Vec<Vec<Token>>,
}

fn parse_json(input: &str) -> Result<Instance, InstanceError> {
    let raw: JsonInstance =
        serde_json::from_str(input).map_err(|e| InstanceError::Json(e.to_string()))?;
    let mut b = Instance::builder();
    for set in raw.sets {
        let tokens: Vec<String> = set.into_iter().map(Token::into_string).collect();
        b.add_set(&tokens)?;
    }
    Ok(b.build())
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Draws `m` distinct sets over `universe_n` elements; each is a triple with
/// probability `p3`, otherwise a pair. Elements are labelled by their number.
pub fn generate_random(
    universe_n: usize,
    m: usize,
    p3: f64,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if universe_n < 3 || m == 0 || !(0.0..=1.0).contains(&p3) {
        return Err(InstanceError::BadArguments(format!(
            "need universe_n >= 3, m >= 1, 0 <= p3 <= 1 (got {universe_n}, {m}, {p3})"
        )));
    }
    let pairs = binomial(universe_n as u128, 2);
    let triples = binomial(universe_n as u128, 3);
    let available = if p3 >= 1.0 {
        triples
    } else if p3 <= 0.0 {
        pairs
    } else {
        pairs + triples
    };
    if m as u128 > available {
        return Err(InstanceError::TooManySets {
            requested: m,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(m);
    let mut seen = HashSet::new();
    let (mut n_pairs, mut n_triples) = (0u128, 0u128);
    while chosen.len() < m {
        let mut size = if rng.gen_bool(p3) { 3 } else { 2 };
        // Fall back to the other size once one kind is exhausted.
        if size == 3 && n_triples == triples {
            size = 2;
        } else if size == 2 && n_pairs == pairs {
            size = 3;
        }
        let mut elems = sample(&mut rng, universe_n, size).into_vec();
        elems.sort_unstable();
        if seen.insert(elems.clone()) {
            if size == 3 {
                n_triples += 1;
            } else {
                n_pairs += 1;
            }
            chosen.push(elems);
        }
    }
    let mut b = Instance::builder();
    for set in chosen {
        let tokens: Vec<String> = set.iter().map(|e| e.to_string()).collect();
        b.add_set(&tokens)?;
    }
    Ok(b.build())
}

/// Interprets 3-dimensional matching triples `(x, y, z)` as 3-sets.
///
/// The three coordinate positions are the parts; a token may appear in only
/// one of them.
pub fn embed_3dm<S: AsRef<str>>(triples: &[[S; 3]]) -> Result<Instance, InstanceError> {
    let mut part_of: HashMap<&str, usize> = HashMap::new();
    for (index, triple) in triples.iter().enumerate() {
        let [x, y, z] = triple.each_ref().map(|t| t.as_ref());
        if x == y || x == z || y == z {
            let element = if x == y || x == z { x } else { y };
            return Err(InstanceError::RepeatedElement {
                index,
                element: element.to_owned(),
            });
        }
        for (part, token) in triple.iter().enumerate() {
            let token = token.as_ref();
            match part_of.get(token) {
                Some(&p) if p != part => {
                    return Err(InstanceError::PartsOverlap {
                        element: token.to_owned(),
                    })
                }
                _ => {
                    part_of.insert(token, part);
                }
            }
        }
    }
    let mut b = Instance::builder();
    for triple in triples {
        b.add_set(triple)?;
    }
    Ok(b.build())
}

/// Random 3DM instance: `m` distinct triples over parts of size `part_size`.
pub fn generate_3dm(part_size: usize, m: usize, seed: u64) -> Result<Instance, InstanceError> {
    let available = (part_size as u128).pow(3);
    if part_size == 0 || m as u128 > available {
        return Err(InstanceError::TooManySets {
            requested: m,
            available,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut triples = Vec::with_capacity(m);
    while triples.len() < m {
        let t = (
            rng.gen_range(0..part_size),
            rng.gen_range(0..part_size),
            rng.gen_range(0..part_size),
        );
        if seen.insert(t) {
            triples.push([format!("x{}", t.0), format!("y{}", t.1), format!("z{}", t.2)]);
        }
    }
    embed_3dm(&triples)
}
