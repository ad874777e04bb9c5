//! O-mixed and H-mixed planar representations of annular and toroidal
//! diagrams.
//!
//! Every unit of edge tag becomes a clasp: the fixed component hooks the
//! moving edge through two mixed crossings, first under it and then over it.
//! Each loop's class is its linking with the fixed components, read off the
//! mixed crossings where the moving strand is over.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bracket::{bracket, normalize, BracketError, Variant};
use crate::diagram::{CrossingId, Diagram, DiagramDoc, DiagramError, EdgeId, End, FreeLoop, Kind, Surface};
use crate::moves::Frozen;
use crate::poly::Poly;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MixedKind {
    O,
    H,
}

impl MixedKind {
    pub fn surface(self) -> Surface {
        match self {
            MixedKind::O => Surface::Annulus,
            MixedKind::H => Surface::Torus,
        }
    }

    fn fixed_count(self) -> usize {
        self.surface().arity()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MixedError {
    #[error("cannot convert a {surface} diagram to an {kind:?}-mixed diagram")]
    Surface { kind: MixedKind, surface: Surface },
    #[error("variant {variant} does not apply to an {kind:?}-mixed diagram")]
    Variant { kind: MixedKind, variant: Variant },
    #[error("invalid mixed diagram: {0}")]
    Invalid(String),
    #[error("{0}")]
    Diagram(#[from] DiagramError),
    #[error("{0}")]
    Bracket(#[from] BracketError),
}

/// A planar diagram containing fixed components. `fixed[j]` is the least edge
/// id of fixed component j, or `None` for a crossing-free fixed unknot, which
/// is not stored in `base`. For H, component 0 is `m` and 1 is `l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedDiagram {
    pub kind: MixedKind,
    pub base: Diagram,
    pub fixed: Vec<Option<EdgeId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marks {
    pub m: Option<EdgeId>,
    pub l: Option<EdgeId>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixedDoc {
    #[serde(flatten)]
    pub diagram: DiagramDoc,
    pub kind: MixedKind,
    pub fixed_components: Vec<Option<EdgeId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marks: Option<Marks>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Moving,
    /// Between a moving strand and fixed component j.
    Mixed(usize),
    Fixed,
}

struct Clasp {
    first: CrossingId,
    second: CrossingId,
    sign: i64,
}

/// Moving part, clasps per fixed component, and the next free ids.
type Threaded = (Diagram, Vec<Vec<Clasp>>, CrossingId, EdgeId);

/// Builds the moving part with clasps cut into every tagged edge and loop.
fn thread(d: &Diagram, kind: MixedKind) -> Result<Threaded, MixedError> {
    if d.surface != kind.surface() {
        return Err(MixedError::Surface { kind, surface: d.surface });
    }
    let mut base = Diagram::new(Surface::Plane);
    for c in d.crossings.values() {
        base.add_crossing(c.id, c.kind);
    }
    let mut next_c = d.next_crossing_id();
    let mut next_e = d.next_edge_id();
    let mut clasps: Vec<Vec<Clasp>> = (0..kind.fixed_count()).map(|_| Vec::new()).collect();
    // Lays clasps along a run from `tail` to `head`; returns the pieces' ends.
    let mut lay = |tags: &[i64], clasps: &mut Vec<Vec<Clasp>>| -> Vec<(End, End)> {
        let mut stops = Vec::new();
        for (j, &t) in tags.iter().enumerate() {
            for _ in 0..t.unsigned_abs() {
                let (a, b) = (next_c, next_c + 1);
                next_c += 2;
                clasps[j].push(Clasp { first: a, second: b, sign: t.signum() });
                stops.push(a);
                stops.push(b);
            }
        }
        let mut pieces = Vec::new();
        let mut from: Option<End> = None;
        for c in stops {
            pieces.push((from.unwrap_or(End::new(u32::MAX, 0)), End::new(c, 2)));
            from = Some(End::new(c, 0));
        }
        pieces.push((from.unwrap_or(End::new(u32::MAX, 0)), End::new(u32::MAX, 0)));
        pieces
    };
    for e in d.edges.values() {
        let pieces = lay(&e.tags, &mut clasps);
        let last = pieces.len() - 1;
        for (k, (mut a, mut b)) in pieces.into_iter().enumerate() {
            if k == 0 {
                a = e.tail;
            }
            if k == last {
                b = e.head;
            }
            let id = if k == 0 {
                e.id
            } else {
                next_e += 1;
                next_e - 1
            };
            base.add_edge(id, a, b, Vec::new());
        }
    }
    for l in &d.free_loops {
        if l.tags.iter().all(|&t| t == 0) {
            base.free_loops.push(FreeLoop { tags: Vec::new() });
            continue;
        }
        let mut pieces = lay(&l.tags, &mut clasps);
        // close up: the first piece starts where the last one ends
        let (last_from, _) = pieces.pop().expect("at least one clasp");
        pieces[0].0 = last_from;
        for (a, b) in pieces {
            base.add_edge(next_e, a, b, Vec::new());
            next_e += 1;
        }
    }
    for cs in &clasps {
        for c in cs {
            base.add_crossing(c.first, Kind::Classical { over: 0 });
            base.add_crossing(c.second, Kind::Classical { over: 1 });
        }
    }
    Ok((base, clasps, next_c, next_e))
}

/// Fixed strand slots (in, out) at the two crossings of a clasp.
fn clasp_slots(sign: i64) -> [(u8, u8); 2] {
    if sign > 0 {
        [(3, 1), (1, 3)]
    } else {
        [(1, 3), (3, 1)]
    }
}

/// Chains the fixed strand through `clasps`, from `start` to `end`.
fn route(base: &mut Diagram, clasps: &[Clasp], start: End, end: End, next_e: &mut EdgeId) -> EdgeId {
    let mut from = start;
    let mut first = None;
    let mut push = |base: &mut Diagram, a: End, b: End| {
        base.add_edge(*next_e, a, b, Vec::new());
        first.get_or_insert(*next_e);
        *next_e += 1;
    };
    for c in clasps {
        let [(i1, o1), (i2, o2)] = clasp_slots(c.sign);
        push(base, from, End::new(c.first, i1));
        push(base, End::new(c.first, o1), End::new(c.second, i2));
        from = End::new(c.second, o2);
    }
    push(base, from, end);
    first.expect("route has an edge")
}

pub fn annular_to_o_mixed(d: &Diagram) -> Result<MixedDiagram, MixedError> {
    let (mut base, clasps, _, mut next_e) = thread(d, MixedKind::O)?;
    let cs = &clasps[0];
    let fixed = if cs.is_empty() {
        None
    } else {
        // a closed route: the last clasp's exit runs back into the first
        let [(i1, _), _] = clasp_slots(cs[0].sign);
        let [_, (_, o2)] = clasp_slots(cs[cs.len() - 1].sign);
        let first = next_e;
        base.add_edge(first, End::new(cs[cs.len() - 1].second, o2), End::new(cs[0].first, i1), Vec::new());
        next_e += 1;
        for (k, c) in cs.iter().enumerate() {
            let [(_, o1), (i2, o2)] = clasp_slots(c.sign);
            base.add_edge(next_e, End::new(c.first, o1), End::new(c.second, i2), Vec::new());
            next_e += 1;
            if let Some(n) = cs.get(k + 1) {
                let [(i1, _), _] = clasp_slots(n.sign);
                base.add_edge(next_e, End::new(c.second, o2), End::new(n.first, i1), Vec::new());
                next_e += 1;
            }
        }
        Some(first)
    };
    Ok(MixedDiagram { kind: MixedKind::O, base, fixed: vec![fixed] })
}

pub fn toroidal_to_h_mixed(d: &Diagram) -> Result<MixedDiagram, MixedError> {
    let (mut base, clasps, next_c, mut next_e) = thread(d, MixedKind::H)?;
    // Hopf link as the closed 2-braid sigma_1^2: m enters f0 at 2, l at 3
    let (f0, f1) = (next_c, next_c + 1);
    base.add_crossing(f0, Kind::Classical { over: 0 });
    base.add_crossing(f1, Kind::Classical { over: 0 });
    let m_start = next_e;
    base.add_edge(next_e, End::new(f0, 0), End::new(f1, 3), Vec::new());
    next_e += 1;
    route(&mut base, &clasps[0], End::new(f1, 1), End::new(f0, 2), &mut next_e);
    let l_start = next_e;
    base.add_edge(next_e, End::new(f0, 1), End::new(f1, 2), Vec::new());
    next_e += 1;
    route(&mut base, &clasps[1], End::new(f1, 0), End::new(f0, 3), &mut next_e);
    Ok(MixedDiagram { kind: MixedKind::H, base, fixed: vec![Some(m_start), Some(l_start)] })
}

impl MixedDiagram {
    /// Edge ids of each fixed component.
    fn fixed_edges(&self) -> Vec<BTreeSet<EdgeId>> {
        let ends = self.base.end_map();
        self.fixed
            .iter()
            .map(|f| {
                let mut set = BTreeSet::new();
                if let Some(start) = *f {
                    let mut e = start;
                    while self.base.edges.contains_key(&e) && set.insert(e) {
                        let next = self.base.edges[&e].head.opposite();
                        match ends.get(&next) {
                            Some(&(n, _)) => e = n,
                            None => break,
                        }
                    }
                }
                set
            })
            .collect()
    }

    fn roles(&self) -> Result<BTreeMap<CrossingId, Role>, MixedError> {
        let fixed = self.fixed_edges();
        let owner: HashMap<EdgeId, usize> =
            fixed.iter().enumerate().flat_map(|(j, s)| s.iter().map(move |&e| (e, j))).collect();
        let ends = self.base.end_map();
        let mut out = BTreeMap::new();
        for c in self.base.crossings.values() {
            let slots: Vec<Option<usize>> =
                (0..4).map(|s| ends.get(&End::new(c.id, s)).and_then(|(e, _)| owner.get(e).copied())).collect();
            let n = slots.iter().filter(|s| s.is_some()).count();
            let role = match n {
                0 => Role::Moving,
                4 => Role::Fixed,
                2 => {
                    let fs: Vec<usize> = (0..4).filter(|&s| slots[s].is_some()).collect();
                    if fs[0] % 2 != fs[1] % 2 {
                        return Err(MixedError::Invalid(format!("crossing {} has a fixed corner", c.id)));
                    }
                    Role::Mixed(slots[fs[0]].expect("fixed slot"))
                }
                _ => return Err(MixedError::Invalid(format!("crossing {} is half fixed", c.id))),
            };
            if role != Role::Moving && c.is_pre() {
                return Err(MixedError::Invalid(format!("precrossing {} touches a fixed component", c.id)));
            }
            out.insert(c.id, role);
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), MixedError> {
        self.base.clone().validated()?;
        if self.fixed.len() != self.kind.fixed_count() {
            return Err(MixedError::Invalid(format!("{:?}-mixed needs {} fixed components", self.kind, self.kind.fixed_count())));
        }
        if let Some(e) = self.fixed.iter().flatten().find(|e| !self.base.edges.contains_key(e)) {
            return Err(MixedError::Invalid(format!("fixed component edge {e} does not exist")));
        }
        let roles = self.roles()?;
        if self.kind == MixedKind::H {
            let sets = self.fixed_edges();
            if self.fixed.iter().any(Option::is_none) || sets[0].intersection(&sets[1]).next().is_some() {
                return Err(MixedError::Invalid("m and l must be distinct components with crossings".into()));
            }
            let fixed_crossings = roles.values().filter(|r| **r == Role::Fixed).count();
            if fixed_crossings != 2 {
                return Err(MixedError::Invalid("the Hopf link must be a closed 2-braid with two crossings".into()));
            }
        }
        Ok(())
    }

    /// Crossings and edges a walk on `base` must not touch.
    pub fn frozen(&self) -> Frozen {
        let roles = self.roles().unwrap_or_default();
        Frozen {
            crossings: roles.iter().filter(|(_, r)| **r != Role::Moving).map(|(c, _)| *c).collect(),
            edges: self.fixed_edges().into_iter().flatten().collect(),
        }
    }

    /// Drops the fixed part, turning linking with it into edge tags on the
    /// annulus (O) or torus (H).
    pub fn absorb(&self) -> Result<Diagram, MixedError> {
        let roles = self.roles()?;
        let base = &self.base;
        let ends = base.end_map();
        let fixed: BTreeSet<EdgeId> = self.fixed_edges().into_iter().flatten().collect();
        let arity = self.kind.fixed_count();
        let mut out = Diagram::new(self.kind.surface());
        for (id, role) in &roles {
            if *role == Role::Moving {
                out.add_crossing(*id, base.crossings[id].kind);
            }
        }
        let mut used = BTreeSet::new();
        // Follows a moving run forward from edge `start` to a moving crossing.
        let run = |start: EdgeId, used: &mut BTreeSet<EdgeId>| -> (EdgeId, Vec<i64>, Option<End>) {
            let mut tags = vec![0; arity];
            let mut min_id = start;
            let mut e = start;
            loop {
                used.insert(e);
                min_id = min_id.min(e);
                let head = base.edges[&e].head;
                match roles[&head.crossing] {
                    Role::Mixed(j) => {
                        let c = &base.crossings[&head.crossing];
                        if c.over() == Some(head.slot % 2) {
                            tags[j] += base.sign(&ends, c);
                        }
                        let next = ends[&head.opposite()].0;
                        if used.contains(&next) {
                            return (min_id, tags, None);
                        }
                        e = next;
                    }
                    _ => return (min_id, tags, Some(head)),
                }
            }
        };
        for e in base.edges.values() {
            if fixed.contains(&e.id) || used.contains(&e.id) || roles[&e.tail.crossing] != Role::Moving {
                continue;
            }
            let (id, tags, head) = run(e.id, &mut used);
            out.add_edge(id, e.tail, head.expect("run ends at a moving crossing"), tags);
        }
        for e in base.edges.values() {
            if fixed.contains(&e.id) || used.contains(&e.id) {
                continue;
            }
            let (_, tags, head) = run(e.id, &mut used);
            debug_assert!(head.is_none());
            out.free_loops.push(FreeLoop { tags });
        }
        for _ in &base.free_loops {
            out.free_loops.push(FreeLoop { tags: vec![0; arity] });
        }
        Ok(out)
    }

    pub fn to_document(&self) -> MixedDoc {
        MixedDoc {
            diagram: self.base.to_document(),
            kind: self.kind,
            fixed_components: self.fixed.clone(),
            marks: (self.kind == MixedKind::H).then(|| Marks { m: self.fixed[0], l: self.fixed[1] }),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }

    pub fn from_document(doc: MixedDoc) -> Result<MixedDiagram, MixedError> {
        let m = MixedDiagram { kind: doc.kind, base: Diagram::from_document(doc.diagram)?, fixed: doc.fixed_components };
        m.validate()?;
        Ok(m)
    }

    pub fn parse(text: &str) -> Result<MixedDiagram, MixedError> {
        let doc: MixedDoc = serde_json::from_str(text).map_err(|e| DiagramError::Syntax(e.to_string()))?;
        MixedDiagram::from_document(doc)
    }
}

pub fn o_mixed_bracket(m: &MixedDiagram, universal: bool) -> Result<Poly, MixedError> {
    let variant = if universal { Variant::AnnularUniversal } else { Variant::Annular };
    mixed_bracket(m, variant)
}

pub fn h_mixed_bracket(m: &MixedDiagram, variant: Variant) -> Result<Poly, MixedError> {
    mixed_bracket(m, variant)
}

/// State sum over the moving crossings; `variant` must live on the surface
/// the fixed part stands for.
pub fn mixed_bracket(m: &MixedDiagram, variant: Variant) -> Result<Poly, MixedError> {
    if variant.surface() != m.kind.surface() {
        return Err(MixedError::Variant { kind: m.kind, variant });
    }
    Ok(bracket(&m.absorb()?, variant)?)
}

/// Writhe of the moving part; mixed and fixed crossings do not count.
pub fn mixed_writhe(m: &MixedDiagram) -> Result<i64, MixedError> {
    let roles = m.roles()?;
    let ends = m.base.end_map();
    Ok(m.base
        .crossings
        .values()
        .filter(|c| roles[&c.id] == Role::Moving)
        .map(|c| m.base.sign(&ends, c))
        .sum())
}

pub fn normalized_mixed_bracket(m: &MixedDiagram, variant: Variant) -> Result<Poly, MixedError> {
    Ok(normalize(&mixed_bracket(m, variant)?, mixed_writhe(m)?)?)
}
