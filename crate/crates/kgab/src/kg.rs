//! Interned triple store with bidirectional adjacency and removal views.
//!
//! A [`Kg`] is immutable once built: entity and relation labels are interned
//! into dense ids, triples keep their first-appearance (canonical) order, and
//! forward/backward adjacency lists are indexed by entity id. Ablation never
//! copies the graph; a [`KgView`] overlays a set of removed triple ids on a
//! shared base, so many views over one base can coexist and be handed to
//! parallel workers.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense entity identifier, valid within one [`Kg`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u32);

/// Dense relation identifier, valid within one [`Kg`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationId(pub u32);

/// Dense triple identifier; canonical order is ascending id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TripleId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl TripleId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for TripleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// One directed, labeled edge of the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
    pub id: TripleId,
}

/// Traversal orientation of a step relative to the stored triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dir {
    /// head -> tail, as stored.
    Fwd,
    /// tail -> head, against the stored orientation.
    Bwd,
}

/// One incident edge as seen from an entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborStep {
    pub relation: RelationId,
    pub entity: EntityId,
    pub dir: Dir,
    pub triple: TripleId,
}

/// Which adjacency lists to consult.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
    Both,
}

#[derive(Debug, Default, Clone)]
struct Interner {
    labels: Vec<String>,
    index: HashMap<String, u32>,
}

impl Interner {
    fn intern(&mut self, label: &str) -> u32 {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as u32;
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    fn get(&self, label: &str) -> Option<u32> {
        self.index.get(label).copied()
    }

    fn label(&self, id: u32) -> &str {
        &self.labels[id as usize]
    }

    fn len(&self) -> usize {
        self.labels.len()
    }
}

/// Immutable, fully indexed knowledge graph.
#[derive(Debug, Clone)]
pub struct Kg {
    entities: Interner,
    relations: Interner,
    triples: Vec<Triple>,
    by_key: HashMap<(u32, u32, u32), TripleId>,
    adj_fwd: Vec<Vec<(RelationId, EntityId, TripleId)>>,
    adj_bwd: Vec<Vec<(RelationId, EntityId, TripleId)>>,
}

fn validate_label(raw: &str, line: usize, field: &str) -> Result<String> {
    let label = raw.trim();
    if label.is_empty() {
        return Err(Error::parse(line, format!("empty {field} label")));
    }
    if label.contains('\t') || label.contains('\n') {
        return Err(Error::parse(
            line,
            format!("{field} label contains a tab or newline"),
        ));
    }
    Ok(label.to_owned())
}

impl Kg {
    /// Builds a graph from `(head, relation, tail)` label triples.
    ///
    /// Duplicates are dropped (set semantics); interning and triple ids follow
    /// first-appearance order, which fixes the canonical iteration order used
    /// by seeded sampling. Labels are trimmed and must be non-empty; the line
    /// number reported in errors is the 1-based position in the input.
    pub fn build<I, S>(input: I) -> Result<Kg>
    where
        I: IntoIterator<Item = (S, S, S)>,
        S: AsRef<str>,
    {
        let mut kg = Kg {
            entities: Interner::default(),
            relations: Interner::default(),
            triples: Vec::new(),
            by_key: HashMap::new(),
            adj_fwd: Vec::new(),
            adj_bwd: Vec::new(),
        };
        for (line0, (h, r, t)) in input.into_iter().enumerate() {
            let line = line0 + 1;
            let h = validate_label(h.as_ref(), line, "head")?;
            let r = validate_label(r.as_ref(), line, "relation")?;
            let t = validate_label(t.as_ref(), line, "tail")?;
            kg.insert(&h, &r, &t);
        }
        Ok(kg)
    }

    fn insert(&mut self, head: &str, relation: &str, tail: &str) {
        let h = self.entities.intern(head);
        let r = self.relations.intern(relation);
        let t = self.entities.intern(tail);
        if self.by_key.contains_key(&(h, r, t)) {
            return;
        }
        let id = TripleId(self.triples.len() as u32);
        self.by_key.insert((h, r, t), id);
        let triple = Triple {
            head: EntityId(h),
            relation: RelationId(r),
            tail: EntityId(t),
            id,
        };
        self.triples.push(triple);
        let need = self.entities.len();
        if self.adj_fwd.len() < need {
            self.adj_fwd.resize_with(need, Vec::new);
            self.adj_bwd.resize_with(need, Vec::new);
        }
        // Appending in build order keeps every adjacency list sorted by triple id.
        self.adj_fwd[h as usize].push((RelationId(r), EntityId(t), id));
        self.adj_bwd[t as usize].push((RelationId(r), EntityId(h), id));
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    /// Triples in canonical (ascending id) order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple(&self, id: TripleId) -> Result<&Triple> {
        self.triples
            .get(id.index())
            .ok_or_else(|| Error::lookup(format!("triple id {id} out of range")))
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.entities.get(label).map(EntityId)
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relations.get(label).map(RelationId)
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        self.entities.label(id.0)
    }

    /// Like [`Kg::entity_label`] but fails with a lookup error on foreign ids.
    pub fn entity_label_checked(&self, id: EntityId) -> Result<&str> {
        self.check_entity(id)?;
        Ok(self.entities.label(id.0))
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        self.relations.label(id.0)
    }

    /// Looks a triple up by its labels.
    pub fn triple_by_labels(&self, head: &str, relation: &str, tail: &str) -> Option<&Triple> {
        let h = self.entities.get(head)?;
        let r = self.relations.get(relation)?;
        let t = self.entities.get(tail)?;
        self.by_key.get(&(h, r, t)).map(|id| &self.triples[id.index()])
    }

    /// The unmasked view (nothing removed).
    pub fn view(&self) -> KgView<'_> {
        KgView {
            base: self,
            removed: Arc::new(HashSet::new()),
        }
    }

    /// Overlays a removal mask. Fails with a consistency error if any id is
    /// not a triple of this graph. The base is never mutated.
    pub fn apply_mask<I>(&self, removed: I) -> Result<KgView<'_>>
    where
        I: IntoIterator<Item = TripleId>,
    {
        let mut set = HashSet::new();
        for id in removed {
            if id.index() >= self.triples.len() {
                return Err(Error::consistency(format!(
                    "mask references foreign triple id {id} (graph has {} triples)",
                    self.triples.len()
                )));
            }
            set.insert(id);
        }
        Ok(KgView {
            base: self,
            removed: Arc::new(set),
        })
    }

    fn check_entity(&self, entity: EntityId) -> Result<()> {
        if entity.index() >= self.entities.len() {
            return Err(Error::lookup(format!("unknown entity id {entity}")));
        }
        Ok(())
    }
}

/// A `Kg` with a removal mask overlaid. Cheap to clone; safe to share.
#[derive(Debug, Clone)]
pub struct KgView<'a> {
    base: &'a Kg,
    removed: Arc<HashSet<TripleId>>,
}

impl<'a> KgView<'a> {
    pub fn base(&self) -> &'a Kg {
        self.base
    }

    pub fn contains(&self, id: TripleId) -> bool {
        id.index() < self.base.triples.len() && !self.removed.contains(&id)
    }

    pub fn removed_count(&self) -> usize {
        self.removed.len()
    }

    /// Surviving triple count.
    pub fn triple_count(&self) -> usize {
        self.base.triples.len() - self.removed.len()
    }

    /// Surviving triples in canonical order.
    pub fn triples(&self) -> impl Iterator<Item = &'a Triple> + '_ {
        self.base
            .triples
            .iter()
            .filter(move |t| !self.removed.contains(&t.id))
    }

    /// Non-removed incident triples of `entity` in the requested direction(s),
    /// in canonical triple-id order. For `Both`, a forward and a backward step
    /// over the same triple (self-loops) sort fwd before bwd.
    pub fn neighbors(&self, entity: EntityId, direction: Direction) -> Result<Vec<NeighborStep>> {
        self.base.check_entity(entity)?;
        let adj_fwd = &self.base.adj_fwd;
        let adj_bwd = &self.base.adj_bwd;
        let idx = entity.index();
        let mut out = Vec::new();
        // Entities can exist without any incident triple (interned from a tail
        // slot only before adjacency resize); guard the index.
        let fwd = adj_fwd.get(idx).map(Vec::as_slice).unwrap_or(&[]);
        let bwd = adj_bwd.get(idx).map(Vec::as_slice).unwrap_or(&[]);
        match direction {
            Direction::Forward => {
                for &(r, e, t) in fwd {
                    if !self.removed.contains(&t) {
                        out.push(NeighborStep {
                            relation: r,
                            entity: e,
                            dir: Dir::Fwd,
                            triple: t,
                        });
                    }
                }
            }
            Direction::Backward => {
                for &(r, e, t) in bwd {
                    if !self.removed.contains(&t) {
                        out.push(NeighborStep {
                            relation: r,
                            entity: e,
                            dir: Dir::Bwd,
                            triple: t,
                        });
                    }
                }
            }
            Direction::Both => {
                let mut fi = 0;
                let mut bi = 0;
                while fi < fwd.len() || bi < bwd.len() {
                    let take_fwd = match (fwd.get(fi), bwd.get(bi)) {
                        (Some(f), Some(b)) => f.2 <= b.2,
                        (Some(_), None) => true,
                        (None, _) => false,
                    };
                    let (r, e, t, dir) = if take_fwd {
                        let (r, e, t) = fwd[fi];
                        fi += 1;
                        (r, e, t, Dir::Fwd)
                    } else {
                        let (r, e, t) = bwd[bi];
                        bi += 1;
                        (r, e, t, Dir::Bwd)
                    };
                    if !self.removed.contains(&t) {
                        out.push(NeighborStep {
                            relation: r,
                            entity: e,
                            dir,
                            triple: t,
                        });
                    }
                }
            }
        }
        Ok(out)
    }

    /// FNV-1a checksum over surviving triple ids in canonical order; two views
    /// hash equal iff they expose the same triples of the same base.
    pub fn content_checksum(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in self.base.triples.iter() {
            if !self.removed.contains(&t.id) {
                for b in t.id.0.to_le_bytes() {
                    h ^= u64::from(b);
                    h = h.wrapping_mul(0x0000_0100_0000_01b3);
                }
            }
        }
        format!("{h:016x}")
    }
}

/// Reads a triple file: one `head<TAB>relation<TAB>tail` per line, UTF-8,
/// `#`-prefixed comment lines and blank lines skipped.
pub fn load_kg(path: impl AsRef<Path>) -> Result<Kg> {
    let content = std::fs::read_to_string(path)?;
    parse_triple_text(&content)
}

/// Parses triple-file text. Line numbers in errors refer to the file,
/// counting comments and blanks.
pub fn parse_triple_text(content: &str) -> Result<Kg> {
    let mut rows: Vec<(usize, &str, &str, &str)> = Vec::new();
    for (line0, raw) in content.lines().enumerate() {
        let line = line0 + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let mut fields = raw.split('\t');
        match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(h), Some(r), Some(t), None) => rows.push((line, h, r, t)),
            _ => {
                return Err(Error::parse(
                    line,
                    "expected exactly 3 tab-separated fields".to_string(),
                ))
            }
        }
    }
    let mut kg = Kg {
        entities: Interner::default(),
        relations: Interner::default(),
        triples: Vec::new(),
        by_key: HashMap::new(),
        adj_fwd: Vec::new(),
        adj_bwd: Vec::new(),
    };
    for (line, h, r, t) in rows {
        let h = validate_label(h, line, "head")?;
        let r = validate_label(r, line, "relation")?;
        let t = validate_label(t, line, "tail")?;
        kg.insert(&h, &r, &t);
    }
    Ok(kg)
}

/// Serializes a graph back to the triple file format, canonical order.
pub fn kg_to_text(kg: &Kg) -> String {
    let mut out = String::new();
    for t in kg.triples() {
        out.push_str(kg.entity_label(t.head));
        out.push('\t');
        out.push_str(kg.relation_label(t.relation));
        out.push('\t');
        out.push_str(kg.entity_label(t.tail));
        out.push('\n');
    }
    out
}

/// Writes the triple file for `kg` at `path`.
pub fn write_kg(kg: &Kg, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, kg_to_text(kg))?;
    Ok(())
}
