//! Pseudo link diagrams as 4-valent combinatorial maps with winding tags.
//!
//! Slots 0..3 run counterclockwise around a crossing; a strand passes straight
//! through slots `(0,2)` or `(1,3)`. Each edge carries signed intersection
//! counts against the surface's cut curves (none on the plane, one cut ray on
//! the annulus, a meridian and a longitude on the torus).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type CrossingId = u32;
pub type EdgeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Plane,
    Annulus,
    Torus,
}

impl Surface {
    pub fn arity(self) -> usize {
        match self {
            Surface::Plane => 0,
            Surface::Annulus => 1,
            Surface::Torus => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Surface::Plane => "plane",
            Surface::Annulus => "annulus",
            Surface::Torus => "torus",
        }
    }
}

impl fmt::Display for Surface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    /// `over` is the strand on top: 0 for slots (0,2), 1 for slots (1,3).
    Classical { over: u8 },
    Pre,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Crossing {
    pub id: CrossingId,
    pub kind: Kind,
}

impl Crossing {
    pub fn is_pre(&self) -> bool {
        self.kind == Kind::Pre
    }

    pub fn over(&self) -> Option<u8> {
        match self.kind {
            Kind::Classical { over } => Some(over),
            Kind::Pre => None,
        }
    }
}

/// One end of an edge: a slot at a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct End {
    pub crossing: CrossingId,
    pub slot: u8,
}

impl End {
    pub fn new(crossing: CrossingId, slot: u8) -> Self {
        End { crossing, slot: slot & 3 }
    }

    /// The slot across the crossing on the same strand.
    pub fn opposite(self) -> End {
        End::new(self.crossing, self.slot + 2)
    }

    pub fn rotate(self, by: i32) -> End {
        End::new(self.crossing, (self.slot as i32 + by).rem_euclid(4) as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: End,
    pub head: End,
    pub tags: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeLoop {
    pub tags: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub surface: Surface,
    pub crossings: BTreeMap<CrossingId, Crossing>,
    pub edges: BTreeMap<EdgeId, Edge>,
    pub free_loops: Vec<FreeLoop>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown component {0}")]
    UnknownComponent(usize),
    #[error("unknown crossing {0}")]
    UnknownCrossing(CrossingId),
    #[error("invalid diagram: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// A single broken invariant reported by [`Diagram::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    UnknownCrossing { edge: EdgeId, crossing: CrossingId },
    SlotOutOfRange { edge: EdgeId, slot: u8 },
    TailIsHead { edge: EdgeId },
    SlotUnused { crossing: CrossingId, slot: u8 },
    SlotReused { crossing: CrossingId, slot: u8, edges: Vec<EdgeId> },
    Orientation { crossing: CrossingId, strand: u8 },
    EdgeTagArity { edge: EdgeId, len: usize },
    LoopTagArity { index: usize, len: usize },
    OverFlag { crossing: CrossingId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "diagram has no edges and no free loops"),
            Violation::UnknownCrossing { edge, crossing } => {
                write!(f, "edge {edge} references unknown crossing {crossing}")
            }
            Violation::SlotOutOfRange { edge, slot } => write!(f, "edge {edge} uses slot {slot}"),
            Violation::TailIsHead { edge } => write!(f, "edge {edge} has tail equal to head"),
            Violation::SlotUnused { crossing, slot } => {
                write!(f, "slot {slot} of crossing {crossing} has no edge end")
            }
            Violation::SlotReused { crossing, slot, edges } => {
                write!(f, "slot {slot} of crossing {crossing} used by edges {edges:?}")
            }
            Violation::Orientation { crossing, strand } => write!(
                f,
                "strand ({},{}) at crossing {crossing} is not oriented through",
                strand,
                strand + 2
            ),
            Violation::EdgeTagArity { edge, len } => write!(f, "edge {edge} has {len} tags"),
            Violation::LoopTagArity { index, len } => write!(f, "free loop {index} has {len} tags"),
            Violation::OverFlag { crossing } => write!(f, "crossing {crossing} has a bad over flag"),
        }
    }
}

/// A link component: a cyclic run of edges, or a single free loop.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Component {
    Edges(Vec<EdgeId>),
    Loop(usize),
}

pub fn add_tags(acc: &mut [i64], tags: &[i64], sign: i64) {
    for (a, t) in acc.iter_mut().zip(tags) {
        *a += sign * t;
    }
}

pub fn neg_tags(tags: &[i64]) -> Vec<i64> {
    tags.iter().map(|t| -t).collect()
}

/// Slot pairing used when a crossing is removed: `pairs[k] = (a, b)` joins
/// slot `a` with slot `b`.
pub type Pairing = [(u8, u8); 2];

impl Diagram {
    pub fn new(surface: Surface) -> Self {
        Diagram { surface, crossings: BTreeMap::new(), edges: BTreeMap::new(), free_loops: Vec::new() }
    }

    pub fn zero_tags(&self) -> Vec<i64> {
        vec![0; self.surface.arity()]
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn pre_count(&self) -> usize {
        self.crossings.values().filter(|c| c.is_pre()).count()
    }

    pub fn next_crossing_id(&self) -> CrossingId {
        self.crossings.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn next_edge_id(&self) -> EdgeId {
        self.edges.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn add_crossing(&mut self, id: CrossingId, kind: Kind) {
        self.crossings.insert(id, Crossing { id, kind });
    }

    pub fn add_edge(&mut self, id: EdgeId, tail: End, head: End, tags: Vec<i64>) {
        self.edges.insert(id, Edge { id, tail, head, tags });
    }

    pub fn crossing(&self, id: CrossingId) -> Result<&Crossing, DiagramError> {
        self.crossings.get(&id).ok_or(DiagramError::UnknownCrossing(id))
    }

    /// Map from each edge end to `(edge id, end is the tail)`.
    pub fn end_map(&self) -> HashMap<End, (EdgeId, bool)> {
        let mut m = HashMap::with_capacity(self.edges.len() * 2);
        for e in self.edges.values() {
            m.insert(e.tail, (e.id, true));
            m.insert(e.head, (e.id, false));
        }
        m
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let arity = self.surface.arity();
        if self.edges.is_empty() && self.free_loops.is_empty() {
            out.push(Violation::Empty);
        }
        for c in self.crossings.values() {
            if let Kind::Classical { over } = c.kind {
                if over > 1 {
                    out.push(Violation::OverFlag { crossing: c.id });
                }
            }
        }
        let mut uses: BTreeMap<End, Vec<(EdgeId, bool)>> = BTreeMap::new();
        for e in self.edges.values() {
            if e.tags.len() != arity {
                out.push(Violation::EdgeTagArity { edge: e.id, len: e.tags.len() });
            }
            if e.tail == e.head {
                out.push(Violation::TailIsHead { edge: e.id });
            }
            for (end, is_tail) in [(e.tail, true), (e.head, false)] {
                if end.slot > 3 {
                    out.push(Violation::SlotOutOfRange { edge: e.id, slot: end.slot });
                } else if !self.crossings.contains_key(&end.crossing) {
                    out.push(Violation::UnknownCrossing { edge: e.id, crossing: end.crossing });
                } else {
                    uses.entry(end).or_default().push((e.id, is_tail));
                }
            }
        }
        for (i, l) in self.free_loops.iter().enumerate() {
            if l.tags.len() != arity {
                out.push(Violation::LoopTagArity { index: i, len: l.tags.len() });
            }
        }
        for c in self.crossings.keys() {
            for slot in 0..4u8 {
                let end = End::new(*c, slot);
                match uses.get(&end) {
                    None => out.push(Violation::SlotUnused { crossing: *c, slot }),
                    Some(v) if v.len() > 1 => out.push(Violation::SlotReused {
                        crossing: *c,
                        slot,
                        edges: v.iter().map(|u| u.0).collect(),
                    }),
                    _ => {}
                }
            }
            for strand in 0..2u8 {
                let a = uses.get(&End::new(*c, strand));
                let b = uses.get(&End::new(*c, strand + 2));
                if let (Some(a), Some(b)) = (a, b) {
                    if a.len() == 1 && b.len() == 1 && a[0].1 == b[0].1 {
                        out.push(Violation::Orientation { crossing: *c, strand });
                    }
                }
            }
        }
        out
    }

    pub fn validated(self) -> Result<Self, DiagramError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(DiagramError::Invalid(v))
        }
    }

    /// Outgoing slot of strand `strand` (0 or 1) at crossing `c`.
    pub fn out_slot(&self, ends: &HashMap<End, (EdgeId, bool)>, c: CrossingId, strand: u8) -> u8 {
        let s = strand & 1;
        match ends.get(&End::new(c, s)) {
            Some((_, true)) => s,
            _ => s + 2,
        }
    }

    /// +1 or −1 for a classical crossing, 0 for a precrossing.
    pub fn sign(&self, ends: &HashMap<End, (EdgeId, bool)>, c: &Crossing) -> i64 {
        match c.kind {
            Kind::Pre => 0,
            Kind::Classical { over } => {
                let o = self.out_slot(ends, c.id, over);
                let u = self.out_slot(ends, c.id, over ^ 1);
                if u == (o + 1) & 3 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn writhe(&self) -> i64 {
        let ends = self.end_map();
        self.crossings.values().map(|c| self.sign(&ends, c)).sum()
    }

    /// Components ordered by least edge id, then free loops in order.
    pub fn components(&self) -> Vec<Component> {
        let ends = self.end_map();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.edges.keys() {
            if seen.contains(&start) {
                continue;
            }
            let mut run = Vec::new();
            let mut e = start;
            loop {
                seen.insert(e);
                run.push(e);
                let next = self.edges[&e].head.opposite();
                match ends.get(&next) {
                    Some(&(n, _)) if !seen.contains(&n) => e = n,
                    _ => break,
                }
            }
            out.push(Component::Edges(run));
        }
        out.extend((0..self.free_loops.len()).map(Component::Loop));
        out
    }

    pub fn reverse_component(&self, index: usize) -> Result<Diagram, DiagramError> {
        let comps = self.components();
        let comp = comps.get(index).ok_or(DiagramError::UnknownComponent(index))?;
        let mut d = self.clone();
        match comp {
            Component::Edges(ids) => {
                for id in ids {
                    let e = d.edges.get_mut(id).expect("component edge");
                    std::mem::swap(&mut e.tail, &mut e.head);
                    e.tags = neg_tags(&e.tags);
                }
            }
            Component::Loop(i) => {
                let l = &mut d.free_loops[*i];
                l.tags = neg_tags(&l.tags);
            }
        }
        Ok(d)
    }

    pub fn forget_tags(&self) -> Diagram {
        self.project(Surface::Plane, |_| Vec::new())
    }

    /// Same map on another surface, with tags rewritten by `f`.
    pub fn project<F: Fn(&[i64]) -> Vec<i64>>(&self, surface: Surface, f: F) -> Diagram {
        let mut d = self.clone();
        d.surface = surface;
        for e in d.edges.values_mut() {
            e.tags = f(&e.tags);
        }
        for l in d.free_loops.iter_mut() {
            l.tags = f(&l.tags);
        }
        d
    }

    /// Face boundary walks. Each entry is a dart: the edge end a walk leaves
    /// through. From dart `(c,s)` the walk follows the edge to `(c',s')` and
    /// leaves next through `(c', s'−1)`, keeping the face on its left.
    pub fn faces(&self) -> Vec<Vec<End>> {
        let ends = self.end_map();
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        let mut darts: Vec<End> = ends.keys().copied().collect();
        darts.sort();
        for start in darts {
            if seen.contains(&start) {
                continue;
            }
            let mut face = Vec::new();
            let mut d = start;
            while seen.insert(d) {
                face.push(d);
                d = self.across(&ends, d).rotate(-1);
            }
            out.push(face);
        }
        out
    }

    /// The other end of the edge at `end`.
    pub fn across(&self, ends: &HashMap<End, (EdgeId, bool)>, end: End) -> End {
        let (id, is_tail) = ends[&end];
        let e = &self.edges[&id];
        if is_tail {
            e.head
        } else {
            e.tail
        }
    }

    /// Tags of the edge at `end`, signed for traversal away from `end`.
    pub fn walk_tags(&self, ends: &HashMap<End, (EdgeId, bool)>, end: End) -> Vec<i64> {
        let (id, is_tail) = ends[&end];
        let e = &self.edges[&id];
        if is_tail {
            e.tags.clone()
        } else {
            neg_tags(&e.tags)
        }
    }

    /// Removes the given crossings, joining slots as each pairing says.
    ///
    /// Runs of edges through removed crossings are merged into one edge that
    /// keeps the least id among them; closed runs become free loops. Each
    /// component touching a kept crossing is then re-oriented coherently,
    /// following its least-id edge.
    pub fn splice(&self, removals: &BTreeMap<CrossingId, Pairing>) -> Diagram {
        let ends = self.end_map();
        let partner = |end: End| -> Option<End> {
            let p = removals.get(&end.crossing)?;
            for &(a, b) in p {
                if end.slot == a {
                    return Some(End::new(end.crossing, b));
                }
                if end.slot == b {
                    return Some(End::new(end.crossing, a));
                }
            }
            unreachable!("pairing covers all slots")
        };
        let arity = self.surface.arity();
        let mut out = Diagram::new(self.surface);
        for c in self.crossings.values() {
            if !removals.contains_key(&c.id) {
                out.crossings.insert(c.id, c.clone());
            }
        }
        let mut used: BTreeSet<EdgeId> = BTreeSet::new();
        // Walks away from `from` until reaching a kept crossing or closing up.
        let walk = |from: End, used: &mut BTreeSet<EdgeId>| -> (EdgeId, Vec<i64>, Option<End>) {
            let mut tags = vec![0; arity];
            let mut min_id = EdgeId::MAX;
            let mut cur = from;
            loop {
                let (id, is_tail) = ends[&cur];
                if !used.insert(id) {
                    return (min_id, tags, None);
                }
                min_id = min_id.min(id);
                add_tags(&mut tags, &self.edges[&id].tags, if is_tail { 1 } else { -1 });
                let far = self.across(&ends, cur);
                match partner(far) {
                    None => return (min_id, tags, Some(far)),
                    Some(p) => cur = p,
                }
            }
        };
        let mut starts: Vec<(End, bool)> = Vec::new();
        for e in self.edges.values() {
            if !removals.contains_key(&e.tail.crossing) {
                starts.push((e.tail, true));
            }
        }
        for e in self.edges.values() {
            if !removals.contains_key(&e.head.crossing) {
                starts.push((e.head, false));
            }
        }
        for (start, from_tail) in starts {
            if used.contains(&ends[&start].0) {
                continue;
            }
            let (id, tags, end) = walk(start, &mut used);
            let end = end.expect("open run ends at a kept crossing");
            if from_tail {
                out.add_edge(id, start, end, tags);
            } else {
                out.add_edge(id, end, start, neg_tags(&tags));
            }
        }
        // Remaining edges lie on closed runs through removed crossings only.
        let rest: Vec<EdgeId> = self.edges.keys().filter(|id| !used.contains(id)).copied().collect();
        for id in rest {
            if used.contains(&id) {
                continue;
            }
            let start = self.edges[&id].tail;
            let (_, tags, end) = walk(start, &mut used);
            debug_assert!(end.is_none());
            out.free_loops.push(FreeLoop { tags });
        }
        out.free_loops.extend(self.free_loops.iter().cloned());
        out.reorient();
        out
    }

    /// Makes every edge component coherently oriented, following the
    /// direction of its least-id edge.
    pub fn reorient(&mut self) {
        let ends = self.end_map();
        let mut seen = BTreeSet::new();
        let ids: Vec<EdgeId> = self.edges.keys().copied().collect();
        let mut flips = Vec::new();
        for start in ids {
            if seen.contains(&start) {
                continue;
            }
            // walk forward from `start`'s head; `at` is the end we arrive at
            seen.insert(start);
            let mut at = self.edges[&start].head;
            loop {
                let next = at.opposite();
                let (id, is_tail) = ends[&next];
                if !seen.insert(id) {
                    break;
                }
                let e = &self.edges[&id];
                if is_tail {
                    at = e.head;
                } else {
                    flips.push(id);
                    at = e.tail;
                }
            }
        }
        for id in flips {
            let e = self.edges.get_mut(&id).expect("edge");
            std::mem::swap(&mut e.tail, &mut e.head);
            e.tags = neg_tags(&e.tags);
        }
    }

    /// Serialized form with crossing and edge ids renumbered densely in
    /// ascending order, for comparisons that ignore id gaps.
    pub fn canonical_json(&self) -> String {
        let cmap: HashMap<CrossingId, CrossingId> =
            self.crossings.keys().enumerate().map(|(i, c)| (*c, i as CrossingId)).collect();
        let mut d = Diagram::new(self.surface);
        for c in self.crossings.values() {
            d.add_crossing(cmap[&c.id], c.kind);
        }
        for (i, e) in self.edges.values().enumerate() {
            let re = |x: End| End::new(cmap[&x.crossing], x.slot);
            d.add_edge(i as EdgeId, re(e.tail), re(e.head), e.tags.clone());
        }
        let mut loops = self.free_loops.clone();
        loops.sort_by(|a, b| a.tags.cmp(&b.tags));
        d.free_loops = loops;
        d.to_json_string()
    }

    pub fn to_document(&self) -> DiagramDoc {
        DiagramDoc {
            surface: self.surface,
            crossings: self
                .crossings
                .values()
                .map(|c| CrossingDoc {
                    id: c.id,
                    kind: if c.is_pre() { KindDoc::Pre } else { KindDoc::Classical },
                    over: c.over(),
                })
                .collect(),
            edges: self
                .edges
                .values()
                .map(|e| EdgeDoc {
                    id: e.id,
                    tail: [e.tail.crossing, e.tail.slot as u32],
                    head: [e.head.crossing, e.head.slot as u32],
                    tags: e.tags.clone(),
                })
                .collect(),
            free_loops: self.free_loops.iter().map(|l| LoopDoc { tags: l.tags.clone() }).collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_document()).expect("diagram serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_document()).expect("diagram serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("diagram serializes")
    }

    pub fn from_document(doc: DiagramDoc) -> Result<Diagram, DiagramError> {
        let schema = |m: String| Err(DiagramError::Schema(m));
        let arity = doc.surface.arity();
        let mut d = Diagram::new(doc.surface);
        for c in doc.crossings {
            let kind = match (c.kind, c.over) {
                (KindDoc::Classical, Some(o)) if o <= 1 => Kind::Classical { over: o },
                (KindDoc::Classical, _) => {
                    return schema(format!("crossing {}: classical needs over 0 or 1", c.id))
                }
                (KindDoc::Pre, None) => Kind::Pre,
                (KindDoc::Pre, Some(_)) => {
                    return schema(format!("crossing {}: precrossing has an over field", c.id))
                }
            };
            if d.crossings.contains_key(&c.id) {
                return schema(format!("duplicate crossing id {}", c.id));
            }
            d.add_crossing(c.id, kind);
        }
        let mut slots = BTreeSet::new();
        for e in doc.edges {
            if e.tags.len() != arity {
                return schema(format!("edge {}: {} tags on a {} surface", e.id, e.tags.len(), doc.surface));
            }
            if d.edges.contains_key(&e.id) {
                return schema(format!("duplicate edge id {}", e.id));
            }
            let mut conv = |p: [u32; 2]| -> Result<End, DiagramError> {
                if p[1] > 3 {
                    return Err(DiagramError::Schema(format!("edge {}: slot {} out of range", e.id, p[1])));
                }
                if !d.crossings.contains_key(&p[0]) {
                    return Err(DiagramError::Schema(format!("edge {}: unknown crossing {}", e.id, p[0])));
                }
                let end = End::new(p[0], p[1] as u8);
                if !slots.insert(end) {
                    return Err(DiagramError::Schema(format!(
                        "slot {} of crossing {} referenced twice",
                        p[1], p[0]
                    )));
                }
                Ok(end)
            };
            let tail = conv(e.tail)?;
            let head = conv(e.head)?;
            d.add_edge(e.id, tail, head, e.tags);
        }
        for (i, l) in doc.free_loops.into_iter().enumerate() {
            if l.tags.len() != arity {
                return schema(format!("free loop {i}: {} tags on a {} surface", l.tags.len(), doc.surface));
            }
            d.free_loops.push(FreeLoop { tags: l.tags });
        }
        Ok(d)
    }

    pub fn from_json_value(v: serde_json::Value) -> Result<Diagram, DiagramError> {
        let doc: DiagramDoc = serde_json::from_value(v).map_err(|e| DiagramError::Schema(e.to_string()))?;
        Diagram::from_document(doc)
    }
}

/// Parses a diagram document. Validation is separate.
pub fn parse_diagram(text: &str) -> Result<Diagram, DiagramError> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| DiagramError::Syntax(e.to_string()))?;
    Diagram::from_json_value(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindDoc {
    Classical,
    Pre,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossingDoc {
    pub id: CrossingId,
    pub kind: KindDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub over: Option<u8>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: EdgeId,
    pub tail: [u32; 2],
    pub head: [u32; 2],
    pub tags: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopDoc {
    pub tags: Vec<i64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagramDoc {
    pub surface: Surface,
    pub crossings: Vec<CrossingDoc>,
    pub edges: Vec<EdgeDoc>,
    #[serde(default)]
    pub free_loops: Vec<LoopDoc>,
}
