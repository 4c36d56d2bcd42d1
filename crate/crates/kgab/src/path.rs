//! Reasoning paths: shortest-path search, bounded enumeration, and grounding.
//!
//! A [`ReasoningPath`] is an alternating entity/relation chain anchored at a
//! start entity; each step records which triple it used and in which
//! orientation. All search here is plain breadth-first search over a
//! [`KgView`], restricted to simple paths (no repeated entity).
//!
//! `enumerate_paths` doubles as the brute-force oracle for the two smarter
//! operations: `shortest_paths` must equal its minimal-length filter and
//! `ground_relation_path` its relation-sequence filter.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{Dir, Direction, EntityId, Kg, KgView, RelationId, TripleId};

/// Hard ceiling for exhaustive path enumeration.
pub const ENUMERATION_HOP_GUARD: usize = 6;

/// Whether traversal may walk triples against their stored orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMode {
    ForwardOnly,
    /// Follow triples both ways, recording reversed steps with a `bwd` flag.
    /// The default: answer paths frequently need inverse edges.
    #[default]
    Bidirectional,
}

impl DirectionMode {
    fn direction(self) -> Direction {
        match self {
            DirectionMode::ForwardOnly => Direction::Forward,
            DirectionMode::Bidirectional => Direction::Both,
        }
    }
}

/// One hop of a reasoning path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathStep {
    pub relation: RelationId,
    pub dir: Dir,
    /// Entity reached by this step.
    pub entity: EntityId,
    pub triple: TripleId,
}

/// A simple entity/relation chain; length is the number of steps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReasoningPath {
    start: EntityId,
    steps: Vec<PathStep>,
}

impl ReasoningPath {
    pub(crate) fn zero(start: EntityId) -> Self {
        ReasoningPath {
            start,
            steps: Vec::new(),
        }
    }

    pub(crate) fn extended(&self, step: PathStep) -> Self {
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.extend_from_slice(&self.steps);
        steps.push(step);
        ReasoningPath {
            start: self.start,
            steps,
        }
    }

    pub fn start(&self) -> EntityId {
        self.start
    }

    pub fn steps(&self) -> &[PathStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Entity the path ends at (the start for zero-length paths).
    pub fn end(&self) -> EntityId {
        self.steps.last().map(|s| s.entity).unwrap_or(self.start)
    }

    /// All entities on the path, start first.
    pub fn entities(&self) -> impl Iterator<Item = EntityId> + '_ {
        std::iter::once(self.start).chain(self.steps.iter().map(|s| s.entity))
    }

    pub fn contains_entity(&self, entity: EntityId) -> bool {
        self.entities().any(|e| e == entity)
    }

    /// Relation sequence of the steps, in order.
    pub fn relations(&self) -> Vec<RelationId> {
        self.steps.iter().map(|s| s.relation).collect()
    }

    pub fn triple_ids(&self) -> Vec<TripleId> {
        self.steps.iter().map(|s| s.triple).collect()
    }

    /// Checks the chaining invariant against a concrete view: every step's
    /// triple must survive in the view and match the recorded orientation.
    pub fn verify(&self, view: &KgView<'_>) -> Result<()> {
        let kg = view.base();
        let mut at = self.start;
        kg.entity_label_checked(at)?;
        for step in &self.steps {
            if !view.contains(step.triple) {
                return Err(Error::consistency(format!(
                    "path step uses triple {} absent from the view",
                    step.triple
                )));
            }
            let triple = kg.triple(step.triple)?;
            let (src, dst) = match step.dir {
                Dir::Fwd => (triple.head, triple.tail),
                Dir::Bwd => (triple.tail, triple.head),
            };
            if src != at || dst != step.entity || triple.relation != step.relation {
                return Err(Error::consistency(format!(
                    "path step over triple {} does not chain",
                    step.triple
                )));
            }
            at = step.entity;
        }
        Ok(())
    }

    /// Text form: `e0 --[r1]--> e1`, with `<--[r]--` for backward steps.
    pub fn render(&self, kg: &Kg) -> String {
        let mut out = String::new();
        out.push_str(kg.entity_label(self.start));
        for step in &self.steps {
            let rel = kg.relation_label(step.relation);
            match step.dir {
                Dir::Fwd => {
                    out.push_str(" --[");
                    out.push_str(rel);
                    out.push_str("]--> ");
                }
                Dir::Bwd => {
                    out.push_str(" <--[");
                    out.push_str(rel);
                    out.push_str("]-- ");
                }
            }
            out.push_str(kg.entity_label(step.entity));
        }
        out
    }

    /// Canonical ordering key: length, then start, then stepwise triple/flag.
    pub fn sort_key(&self) -> (usize, u32, Vec<(u32, u8)>) {
        (
            self.steps.len(),
            self.start.0,
            self.steps
                .iter()
                .map(|s| (s.triple.0, if s.dir == Dir::Fwd { 0 } else { 1 }))
                .collect(),
        )
    }
}

fn sort_canonical(paths: &mut Vec<ReasoningPath>) {
    paths.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    paths.dedup();
}

/// All reasoning paths of globally minimal length `L* <= max_hops` from
/// `source` to any entity in `targets`; empty when nothing is reachable.
///
/// `source` being a target yields exactly the zero-length path (`L* = 0`).
/// Shortest paths are necessarily simple, so no repeated-entity filtering is
/// required beyond the BFS itself.
pub fn shortest_paths(
    view: &KgView<'_>,
    source: EntityId,
    targets: &HashSet<EntityId>,
    max_hops: usize,
    mode: DirectionMode,
) -> Result<Vec<ReasoningPath>> {
    let kg = view.base();
    kg.entity_label_checked(source)?;
    if targets.is_empty() {
        return Err(Error::input("shortest_paths requires a non-empty target set"));
    }
    for &t in targets {
        kg.entity_label_checked(t)?;
    }
    if max_hops == 0 {
        return Err(Error::config("max_hops must be at least 1"));
    }
    if targets.contains(&source) {
        return Ok(vec![ReasoningPath::zero(source)]);
    }

    // Level-synchronous BFS collecting every shortest predecessor edge.
    let mut dist: HashMap<EntityId, usize> = HashMap::new();
    let mut preds: HashMap<EntityId, Vec<(EntityId, PathStep)>> = HashMap::new();
    dist.insert(source, 0);
    let mut frontier = vec![source];
    let mut hit_level: Option<usize> = None;

    for depth in 0..max_hops {
        if hit_level.is_some() || frontier.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &u in &frontier {
            for step in view.neighbors(u, mode.direction())? {
                let v = step.entity;
                let path_step = PathStep {
                    relation: step.relation,
                    dir: step.dir,
                    entity: v,
                    triple: step.triple,
                };
                match dist.get(&v) {
                    Some(&d) if d == depth + 1 => {
                        preds.get_mut(&v).expect("pred entry").push((u, path_step));
                    }
                    Some(_) => {}
                    None => {
                        dist.insert(v, depth + 1);
                        preds.insert(v, vec![(u, path_step)]);
                        next.push(v);
                        if targets.contains(&v) {
                            hit_level = Some(depth + 1);
                        }
                    }
                }
            }
        }
        frontier = next;
    }

    let Some(level) = hit_level else {
        return Ok(Vec::new());
    };

    // Expand the predecessor DAG into concrete paths, one target at a time.
    let mut memo: HashMap<EntityId, Vec<ReasoningPath>> = HashMap::new();
    memo.insert(source, vec![ReasoningPath::zero(source)]);
    let mut out = Vec::new();
    let mut hit_targets: Vec<EntityId> = targets
        .iter()
        .copied()
        .filter(|t| dist.get(t) == Some(&level))
        .collect();
    hit_targets.sort();
    for t in hit_targets {
        out.extend(paths_into(t, &preds, &mut memo));
    }
    sort_canonical(&mut out);
    Ok(out)
}

fn paths_into(
    v: EntityId,
    preds: &HashMap<EntityId, Vec<(EntityId, PathStep)>>,
    memo: &mut HashMap<EntityId, Vec<ReasoningPath>>,
) -> Vec<ReasoningPath> {
    if let Some(cached) = memo.get(&v) {
        return cached.clone();
    }
    let mut acc = Vec::new();
    for (u, step) in preds.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
        for prefix in paths_into(*u, preds, memo) {
            acc.push(prefix.extended(*step));
        }
    }
    memo.insert(v, acc.clone());
    acc
}

/// Shortest paths from any of several sources: the globally minimal length
/// across all sources wins, and every path of that length is returned.
pub fn shortest_paths_multi(
    view: &KgView<'_>,
    sources: &[EntityId],
    targets: &HashSet<EntityId>,
    max_hops: usize,
    mode: DirectionMode,
) -> Result<Vec<ReasoningPath>> {
    let mut best: Option<(usize, Vec<ReasoningPath>)> = None;
    let mut seen_sources = HashSet::new();
    for &s in sources {
        if !seen_sources.insert(s) {
            continue;
        }
        let paths = shortest_paths(view, s, targets, max_hops, mode)?;
        let Some(len) = paths.first().map(|p| p.len()) else {
            continue;
        };
        best = match best.take() {
            Some((l, mut acc)) if l == len => {
                acc.extend(paths);
                Some((l, acc))
            }
            Some((l, acc)) if l < len => Some((l, acc)),
            _ => Some((len, paths)),
        };
    }
    let mut out = best.map(|(_, p)| p).unwrap_or_default();
    sort_canonical(&mut out);
    Ok(out)
}

/// Lazily yields every simple path of length `1..=max_hops` from `source`,
/// in breadth-then-canonical order. Brute force by construction; guarded at
/// [`ENUMERATION_HOP_GUARD`] hops.
pub fn enumerate_paths<'a>(
    view: &KgView<'a>,
    source: EntityId,
    max_hops: usize,
    mode: DirectionMode,
) -> Result<PathEnumerator<'a>> {
    view.base().entity_label_checked(source)?;
    if max_hops == 0 {
        return Err(Error::config("max_hops must be at least 1"));
    }
    if max_hops > ENUMERATION_HOP_GUARD {
        return Err(Error::config(format!(
            "enumerate_paths is capped at {ENUMERATION_HOP_GUARD} hops, got {max_hops}"
        )));
    }
    let mut enumerator = PathEnumerator {
        view: view.clone(),
        mode,
        max_hops,
        queue: VecDeque::new(),
    };
    enumerator.push_extensions(&ReasoningPath::zero(source))?;
    Ok(enumerator)
}

/// Iterator state for [`enumerate_paths`]. A plain BFS queue: popping a path
/// enqueues its one-hop extensions, which preserves breadth-then-canonical
/// order as long as extensions are generated in neighbor order.
#[derive(Debug)]
pub struct PathEnumerator<'a> {
    view: KgView<'a>,
    mode: DirectionMode,
    max_hops: usize,
    queue: VecDeque<ReasoningPath>,
}

impl PathEnumerator<'_> {
    fn push_extensions(&mut self, path: &ReasoningPath) -> Result<()> {
        for step in self.view.neighbors(path.end(), self.mode.direction())? {
            if path.contains_entity(step.entity) {
                continue;
            }
            self.queue.push_back(path.extended(PathStep {
                relation: step.relation,
                dir: step.dir,
                entity: step.entity,
                triple: step.triple,
            }));
        }
        Ok(())
    }
}

impl Iterator for PathEnumerator<'_> {
    type Item = ReasoningPath;

    fn next(&mut self) -> Option<ReasoningPath> {
        let path = self.queue.pop_front()?;
        if path.len() < self.max_hops {
            // Neighbor lookups cannot fail here: every path end is a valid id.
            self.push_extensions(&path).expect("valid path end");
        }
        Some(path)
    }
}

/// Every simple path starting at `source` whose relation sequence equals
/// `relations` in order. An empty sequence grounds to the zero-length path;
/// an unmatched plan grounds to the empty set.
pub fn ground_relation_path(
    view: &KgView<'_>,
    source: EntityId,
    relations: &[RelationId],
    mode: DirectionMode,
) -> Result<Vec<ReasoningPath>> {
    let kg = view.base();
    kg.entity_label_checked(source)?;
    for &r in relations {
        if r.index() >= kg.relation_count() {
            return Err(Error::lookup(format!("unknown relation id r{}", r.0)));
        }
    }
    let mut layer = vec![ReasoningPath::zero(source)];
    for &rel in relations {
        let mut next = Vec::new();
        for path in &layer {
            for step in view.neighbors(path.end(), mode.direction())? {
                if step.relation != rel || path.contains_entity(step.entity) {
                    continue;
                }
                next.push(path.extended(PathStep {
                    relation: step.relation,
                    dir: step.dir,
                    entity: step.entity,
                    triple: step.triple,
                }));
            }
        }
        layer = next;
        if layer.is_empty() {
            break;
        }
    }
    sort_canonical(&mut layer);
    Ok(layer)
}
