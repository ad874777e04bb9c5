//! Reidemeister-type rewrites on combinatorial maps and seeded random walks.
//!
//! Reductions and the involutive moves (R3, PR2, PR3) only fire on faces whose
//! boundary tags sum to zero, i.e. discs. Before an R3/PR3 the tags around the
//! triangle are pushed off with a crossing potential, which leaves the class
//! of every closed curve unchanged.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagram::{add_tags, neg_tags, CrossingId, Diagram, EdgeId, End, Kind, Pairing};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "R1+")]
    R1Pos,
    #[serde(rename = "R1-")]
    R1Neg,
    PR1,
    R2,
    PR2,
    R3,
    PR3,
}

impl MoveKind {
    pub const ALL: [MoveKind; 7] =
        [MoveKind::R1Pos, MoveKind::R1Neg, MoveKind::PR1, MoveKind::R2, MoveKind::PR2, MoveKind::R3, MoveKind::PR3];

    /// Moves that are their own inverse; they only have one direction.
    pub fn involutive(self) -> bool {
        matches!(self, MoveKind::PR2 | MoveKind::R3 | MoveKind::PR3)
    }

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::R1Pos => "R1+",
            MoveKind::R1Neg => "R1-",
            MoveKind::PR1 => "PR1",
            MoveKind::R2 => "R2",
            MoveKind::PR2 => "PR2",
            MoveKind::R3 => "R3",
            MoveKind::PR3 => "PR3",
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MoveKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MoveKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown move {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Expand,
    Reduce,
}

/// Where a move applies.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "at", rename_all = "snake_case")]
pub enum Location {
    /// Kink on an edge, in the face to its left or right.
    Edge { edge: EdgeId, left: bool },
    /// Kink on a crossing-free loop.
    Loop { index: usize, left: bool },
    /// Kink at `crossing` whose monogon is bounded by `edge`.
    Kink { crossing: CrossingId, edge: EdgeId },
    /// Finger from the side leaving `from` across the side leaving `to`; both
    /// darts lie on one face walk. `over = 1` puts the finger on top.
    Poke { from: [u32; 2], to: [u32; 2], over: u8 },
    /// A bigon face walk.
    Bigon { darts: [[u32; 2]; 2] },
    /// A triangle face walk.
    Triangle { darts: [[u32; 2]; 3] },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveSite {
    pub kind: MoveKind,
    pub direction: Direction,
    pub location: Location,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MoveError {
    #[error("stale site: {0}")]
    Stale(String),
}

fn pack(e: End) -> [u32; 2] {
    [e.crossing, e.slot as u32]
}

fn unpack(p: [u32; 2]) -> End {
    End::new(p[0], p[1] as u8)
}

/// Crossings and edges a walk must leave alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Frozen {
    pub crossings: BTreeSet<CrossingId>,
    pub edges: BTreeSet<EdgeId>,
}

struct Ctx<'a> {
    d: &'a Diagram,
    ends: HashMap<End, (EdgeId, bool)>,
    faces: Vec<Vec<End>>,
}

impl<'a> Ctx<'a> {
    fn new(d: &'a Diagram) -> Self {
        Ctx { d, ends: d.end_map(), faces: d.faces() }
    }

    fn edge_at(&self, dart: End) -> EdgeId {
        self.ends[&dart].0
    }

    fn face_sum(&self, face: &[End]) -> Vec<i64> {
        let mut acc = self.d.zero_tags();
        for &dart in face {
            add_tags(&mut acc, &self.d.walk_tags(&self.ends, dart), 1);
        }
        acc
    }

    fn is_disc(&self, face: &[End]) -> bool {
        self.face_sum(face).iter().all(|&t| t == 0)
    }

    /// Whether the strand through `end` is the over strand there.
    fn is_over(&self, end: End) -> Option<bool> {
        self.d.crossings[&end.crossing].over().map(|o| o == end.slot % 2)
    }
}

/// Over flag giving a left (slot 2 → 1) or right (slot 2 → 3) kink the
/// requested sign.
fn kink_over(left: bool, positive: bool) -> u8 {
    u8::from(left != positive)
}

pub fn find_sites(d: &Diagram, kind: MoveKind, direction: Direction) -> Vec<MoveSite> {
    let ctx = Ctx::new(d);
    let direction = if kind.involutive() { Direction::Expand } else { direction };
    let site = |location| MoveSite { kind, direction, location };
    let mut out = Vec::new();
    match (kind, direction) {
        (MoveKind::R1Pos | MoveKind::R1Neg | MoveKind::PR1, Direction::Expand) => {
            for &edge in d.edges.keys() {
                for left in [true, false] {
                    out.push(site(Location::Edge { edge, left }));
                }
            }
            for index in 0..d.free_loops.len() {
                for left in [true, false] {
                    out.push(site(Location::Loop { index, left }));
                }
            }
        }
        (MoveKind::R1Pos | MoveKind::R1Neg | MoveKind::PR1, Direction::Reduce) => {
            let ends = &ctx.ends;
            for face in ctx.faces.iter().filter(|f| f.len() == 1) {
                let dart = face[0];
                let edge = ctx.edge_at(dart);
                let e = &d.edges[&edge];
                if e.tags.iter().any(|&t| t != 0) {
                    continue;
                }
                let c = &d.crossings[&dart.crossing];
                let ok = match (kind, c.kind) {
                    (MoveKind::PR1, Kind::Pre) => true,
                    (MoveKind::R1Pos, Kind::Classical { .. }) => d.sign(ends, c) == 1,
                    (MoveKind::R1Neg, Kind::Classical { .. }) => d.sign(ends, c) == -1,
                    _ => false,
                };
                if ok {
                    out.push(site(Location::Kink { crossing: c.id, edge }));
                }
            }
        }
        (MoveKind::R2, Direction::Expand) => {
            for face in &ctx.faces {
                for (i, &di) in face.iter().enumerate() {
                    for (j, &dj) in face.iter().enumerate() {
                        if i == j || ctx.edge_at(di) == ctx.edge_at(dj) {
                            continue;
                        }
                        for over in 0..2 {
                            out.push(site(Location::Poke { from: pack(di), to: pack(dj), over }));
                        }
                    }
                }
            }
        }
        (MoveKind::R2 | MoveKind::PR2, _) => {
            for face in ctx.faces.iter().filter(|f| f.len() == 2) {
                let (x, y) = (face[0], face[1]);
                if x.crossing == y.crossing || !ctx.is_disc(face) {
                    continue;
                }
                let (cx, cy) = (&d.crossings[&x.crossing], &d.crossings[&y.crossing]);
                let ok = match kind {
                    MoveKind::R2 => {
                        // the strand along the side leaving x: over at both ends or under at both
                        let far = d.across(&ctx.ends, x);
                        !cx.is_pre() && !cy.is_pre() && ctx.is_over(x) == ctx.is_over(far)
                    }
                    _ => cx.is_pre() != cy.is_pre(),
                };
                if ok {
                    out.push(site(Location::Bigon { darts: [pack(x), pack(y)] }));
                }
            }
        }
        (MoveKind::R3 | MoveKind::PR3, _) => {
            for face in ctx.faces.iter().filter(|f| f.len() == 3) {
                let cs: Vec<CrossingId> = face.iter().map(|e| e.crossing).collect();
                if cs[0] == cs[1] || cs[1] == cs[2] || cs[0] == cs[2] || !ctx.is_disc(face) {
                    continue;
                }
                let pres: Vec<usize> = (0..3).filter(|&k| d.crossings[&cs[k]].is_pre()).collect();
                // side k runs from face[k] to the far end at corner k+1
                let flat = |k: usize| -> Option<bool> {
                    let a = ctx.is_over(face[k])?;
                    let b = ctx.is_over(d.across(&ctx.ends, face[k]))?;
                    Some(a == b)
                };
                let ok = match (kind, pres.as_slice()) {
                    (MoveKind::R3, []) => (0..3).any(|k| flat(k) == Some(true)),
                    // the side opposite the precrossing corner
                    (MoveKind::PR3, [p]) => flat((p + 1) % 3) == Some(true),
                    _ => false,
                };
                if ok {
                    out.push(site(Location::Triangle { darts: [pack(face[0]), pack(face[1]), pack(face[2])] }));
                }
            }
        }
    }
    out
}

fn site_touches(d: &Diagram, site: &MoveSite, frozen: &Frozen) -> bool {
    if frozen.crossings.is_empty() && frozen.edges.is_empty() {
        return false;
    }
    let ends = d.end_map();
    let edge_at = |p: [u32; 2]| ends[&unpack(p)].0;
    match &site.location {
        Location::Edge { edge, .. } => frozen.edges.contains(edge),
        Location::Loop { .. } => false,
        Location::Kink { crossing, edge } => frozen.crossings.contains(crossing) || frozen.edges.contains(edge),
        Location::Poke { from, to, .. } => {
            // the finger runs along the face boundary between the two sides
            let faces = d.faces();
            let face = faces.iter().find(|f| f.contains(&unpack(*from))).expect("face");
            frozen.edges.contains(&edge_at(*from))
                || frozen.edges.contains(&edge_at(*to))
                || face.iter().any(|e| frozen.crossings.contains(&e.crossing) || frozen.edges.contains(&ends[e].0))
        }
        Location::Bigon { darts } => darts.iter().any(|p| frozen.crossings.contains(&p[0])),
        Location::Triangle { darts } => darts.iter().any(|p| frozen.crossings.contains(&p[0])),
    }
}

pub fn apply_move(d: &Diagram, site: &MoveSite) -> Result<Diagram, MoveError> {
    if !find_sites(d, site.kind, site.direction).contains(site) {
        return Err(MoveError::Stale(serde_json::to_string(site).expect("site serializes")));
    }
    Ok(match (&site.location, site.kind) {
        (Location::Edge { edge, left }, k) => kink_edge(d, *edge, *left, kink_kind(k, *left)),
        (Location::Loop { index, left }, k) => kink_loop(d, *index, *left, kink_kind(k, *left)),
        (Location::Kink { crossing, .. }, _) => pass_through(d, &[*crossing]),
        (Location::Poke { from, to, over }, _) => poke(d, unpack(*from), unpack(*to), *over),
        (Location::Bigon { darts }, MoveKind::R2) => pass_through(d, &[darts[0][0], darts[1][0]]),
        (Location::Bigon { darts }, _) => flip_bigon(d, unpack(darts[0]), unpack(darts[1])),
        (Location::Triangle { darts }, _) => triangle(d, [unpack(darts[0]), unpack(darts[1]), unpack(darts[2])]),
    })
}

fn kink_kind(k: MoveKind, left: bool) -> Kind {
    match k {
        MoveKind::PR1 => Kind::Pre,
        MoveKind::R1Pos => Kind::Classical { over: kink_over(left, true) },
        _ => Kind::Classical { over: kink_over(left, false) },
    }
}

fn kink_edge(d: &Diagram, edge: EdgeId, left: bool, kind: Kind) -> Diagram {
    let mut out = d.clone();
    let e = d.edges[&edge].clone();
    let c = d.next_crossing_id();
    let (n1, n2) = (d.next_edge_id(), d.next_edge_id() + 1);
    out.add_crossing(c, kind);
    let z = d.zero_tags();
    out.add_edge(edge, e.tail, End::new(c, 0), z.clone());
    let exit = if left { 3 } else { 1 };
    out.add_edge(n1, End::new(c, 2), End::new(c, 4 - exit), z);
    out.add_edge(n2, End::new(c, exit), e.head, e.tags);
    out
}

fn kink_loop(d: &Diagram, index: usize, left: bool, kind: Kind) -> Diagram {
    let mut out = d.clone();
    let l = out.free_loops.remove(index);
    let c = d.next_crossing_id();
    let n = d.next_edge_id();
    out.add_crossing(c, kind);
    let exit = if left { 3 } else { 1 };
    out.add_edge(n, End::new(c, 2), End::new(c, 4 - exit), d.zero_tags());
    out.add_edge(n + 1, End::new(c, exit), End::new(c, 0), l.tags);
    out
}

/// Removes crossings, letting both strands run straight through.
fn pass_through(d: &Diagram, crossings: &[CrossingId]) -> Diagram {
    let straight: Pairing = [(0, 2), (1, 3)];
    let removals: BTreeMap<CrossingId, Pairing> = crossings.iter().map(|c| (*c, straight)).collect();
    d.splice(&removals)
}

fn poke(d: &Diagram, from: End, to: End, over: u8) -> Diagram {
    let ctx = Ctx::new(d);
    let face = ctx.faces.iter().find(|f| f.contains(&from)).expect("face of site");
    let i = face.iter().position(|&x| x == from).expect("from");
    let j = face.iter().position(|&x| x == to).expect("to");
    let m = face.len();
    let w = |k: usize| d.walk_tags(&ctx.ends, face[k % m]);
    let mut t = d.zero_tags();
    let mut k = i;
    while k % m != j {
        add_tags(&mut t, &w(k), 1);
        k += 1;
    }
    let (e1, fwd1) = ctx.ends[&from];
    let (e2, fwd2) = ctx.ends[&to];
    let (s1, f1_end) = (from, d.across(&ctx.ends, from));
    let (s2, f2_end) = (to, d.across(&ctx.ends, to));
    let x = d.next_crossing_id();
    let y = x + 1;
    let base = d.next_edge_id();
    let mut out = d.clone();
    out.edges.remove(&e1);
    out.edges.remove(&e2);
    out.add_crossing(x, Kind::Classical { over });
    out.add_crossing(y, Kind::Classical { over });
    let z = d.zero_tags();
    let mut rest = w(i);
    add_tags(&mut rest, &t, -1);
    let finger = [
        (e1, s1, End::new(y, 1), t.clone()),
        (base, End::new(y, 3), End::new(x, 3), z.clone()),
        (base + 1, End::new(x, 1), f1_end, rest),
    ];
    let crossed = [
        (e2, s2, End::new(x, 2), z.clone()),
        (base + 2, End::new(x, 0), End::new(y, 2), z),
        (base + 3, End::new(y, 0), f2_end, w(j)),
    ];
    for (chain, fwd) in [(finger, fwd1), (crossed, fwd2)] {
        for (id, a, b, tags) in chain {
            if fwd {
                out.add_edge(id, a, b, tags);
            } else {
                out.add_edge(id, b, a, neg_tags(&tags));
            }
        }
    }
    out
}

/// Slot pair `{a, a+1}` (cyclically) is joined by the A-smoothing of a
/// crossing with this over flag iff `a` is even and over is 1, or `a` is odd
/// and over is 0.
fn low_slot(a: u8, b: u8) -> u8 {
    if (a + 1) & 3 == b {
        a
    } else {
        b
    }
}

fn flip_bigon(d: &Diagram, x: End, y: End) -> Diagram {
    let ends = d.end_map();
    // bigon darts at each corner: the one leaving and the one arriving
    let at_x = (x.slot, d.across(&ends, y).slot);
    let at_y = (y.slot, d.across(&ends, x).slot);
    let (cx, cy) = (&d.crossings[&x.crossing], &d.crossings[&y.crossing]);
    let (classical, pre, pc, pp) = if cx.is_pre() { (cy, cx, at_y, at_x) } else { (cx, cy, at_x, at_y) };
    let over = classical.over().expect("classical corner");
    let joins = (low_slot(pc.0, pc.1).is_multiple_of(2)) == (over == 1);
    let even = low_slot(pp.0, pp.1).is_multiple_of(2);
    let new_over = u8::from(even == joins);
    let mut out = d.clone();
    out.add_crossing(pre.id, Kind::Classical { over: new_over });
    out.add_crossing(classical.id, Kind::Pre);
    out
}

fn triangle(d: &Diagram, darts: [End; 3]) -> Diagram {
    let ends = d.end_map();
    let corners = [darts[0].crossing, darts[1].crossing, darts[2].crossing];
    let t0 = d.walk_tags(&ends, darts[0]);
    let t1 = d.walk_tags(&ends, darts[1]);
    let mut phi: HashMap<CrossingId, Vec<i64>> = HashMap::new();
    phi.insert(corners[0], d.zero_tags());
    phi.insert(corners[1], neg_tags(&t0));
    let mut p2 = neg_tags(&t0);
    add_tags(&mut p2, &t1, -1);
    phi.insert(corners[2], p2);
    let mut out = d.clone();
    for e in out.edges.values_mut() {
        if let Some(p) = phi.get(&e.head.crossing) {
            add_tags(&mut e.tags, p, 1);
        }
        if let Some(p) = phi.get(&e.tail.crossing) {
            add_tags(&mut e.tags, p, -1);
        }
    }
    let mut remap: HashMap<End, End> = HashMap::new();
    let mut sides = Vec::new();
    for &dart in &darts {
        let (id, fwd) = ends[&dart];
        let far = d.across(&ends, dart);
        let (va, wb) = (dart, far);
        remap.insert(va.opposite(), wb);
        remap.insert(wb.opposite(), va);
        sides.push((id, fwd, va, wb));
    }
    let side_ids: BTreeSet<EdgeId> = sides.iter().map(|s| s.0).collect();
    for e in out.edges.values_mut() {
        if side_ids.contains(&e.id) {
            continue;
        }
        if let Some(&n) = remap.get(&e.tail) {
            e.tail = n;
        }
        if let Some(&n) = remap.get(&e.head) {
            e.head = n;
        }
    }
    for (id, fwd, va, wb) in sides {
        let (a, b) = (va.opposite(), wb.opposite());
        let z = d.zero_tags();
        if fwd {
            out.add_edge(id, b, a, z);
        } else {
            out.add_edge(id, a, b, z);
        }
    }
    out
}

/// The allowed set for regular-isotopy walks.
pub fn regular_moves() -> Vec<(MoveKind, Direction)> {
    vec![
        (MoveKind::R2, Direction::Expand),
        (MoveKind::R2, Direction::Reduce),
        (MoveKind::PR2, Direction::Expand),
        (MoveKind::R3, Direction::Expand),
        (MoveKind::PR3, Direction::Expand),
    ]
}

/// Regular moves plus both kinks.
pub fn full_moves() -> Vec<(MoveKind, Direction)> {
    let mut v = regular_moves();
    for k in [MoveKind::R1Pos, MoveKind::R1Neg, MoveKind::PR1] {
        v.push((k, Direction::Expand));
        v.push((k, Direction::Reduce));
    }
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Walk {
    pub diagram: Diagram,
    pub trace: Vec<MoveSite>,
    /// Set when a step found no applicable site and the walk stopped early.
    pub stuck: bool,
}

impl Walk {
    pub fn trace_json(&self) -> serde_json::Value {
        serde_json::to_value(&self.trace).expect("trace serializes")
    }
}

/// All sites of the allowed kinds, in a fixed order.
pub fn gather_sites(d: &Diagram, allowed: &[(MoveKind, Direction)], frozen: &Frozen) -> Vec<MoveSite> {
    let mut keys: BTreeSet<(MoveKind, Direction)> = BTreeSet::new();
    for &(k, dir) in allowed {
        keys.insert((k, if k.involutive() { Direction::Expand } else { dir }));
    }
    keys.into_iter()
        .flat_map(|(k, dir)| find_sites(d, k, dir))
        .filter(|s| !site_touches(d, s, frozen))
        .collect()
}

pub fn random_walk(d: &Diagram, seed: u64, steps: usize, allowed: &[(MoveKind, Direction)]) -> Walk {
    random_walk_frozen(d, seed, steps, allowed, &Frozen::default())
}

pub fn random_walk_frozen(
    d: &Diagram,
    seed: u64,
    steps: usize,
    allowed: &[(MoveKind, Direction)],
    frozen: &Frozen,
) -> Walk {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cur = d.clone();
    let mut trace = Vec::new();
    for _ in 0..steps {
        let sites = gather_sites(&cur, allowed, frozen);
        if sites.is_empty() {
            return Walk { diagram: cur, trace, stuck: true };
        }
        let site = sites[rng.gen_range(0..sites.len())].clone();
        cur = apply_move(&cur, &site).expect("gathered site applies");
        trace.push(site);
    }
    Walk { diagram: cur, trace, stuck: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::{FreeLoop, Surface};

    fn unknot(surface: Surface, tags: Vec<i64>) -> Diagram {
        let mut d = Diagram::new(surface);
        d.free_loops.push(FreeLoop { tags });
        d
    }

    #[test]
    fn kink_round_trip() {
        let d = unknot(Surface::Plane, vec![]);
        for kind in [MoveKind::R1Pos, MoveKind::R1Neg, MoveKind::PR1] {
            for site in find_sites(&d, kind, Direction::Expand) {
                let k = apply_move(&d, &site).unwrap();
                assert!(k.validate().is_empty());
                let w = match kind {
                    MoveKind::R1Pos => 1,
                    MoveKind::R1Neg => -1,
                    _ => 0,
                };
                assert_eq!(k.writhe(), w, "{site:?}");
                let back = find_sites(&k, kind, Direction::Reduce);
                assert_eq!(back.len(), 2, "figure eight has two monogons");
                assert_eq!(apply_move(&k, &back[0]).unwrap().canonical_json(), d.canonical_json());
            }
        }
    }

    #[test]
    fn kink_on_edge_round_trip() {
        let d = unknot(Surface::Torus, vec![1, 2]);
        let site = &find_sites(&d, MoveKind::R1Pos, Direction::Expand)[0];
        let k = apply_move(&d, site).unwrap();
        for site in find_sites(&k, MoveKind::R1Neg, Direction::Expand) {
            let kk = apply_move(&k, &site).unwrap();
            assert!(kk.validate().is_empty());
            assert_eq!(kk.writhe(), 0);
            let red = find_sites(&kk, MoveKind::R1Neg, Direction::Reduce);
            assert_eq!(red.len(), 1);
            assert_eq!(apply_move(&kk, &red[0]).unwrap(), k);
        }
    }

    #[test]
    fn stale_site() {
        let d = unknot(Surface::Plane, vec![]);
        let site = MoveSite {
            kind: MoveKind::R2,
            direction: Direction::Reduce,
            location: Location::Bigon { darts: [[0, 0], [1, 1]] },
        };
        assert!(matches!(apply_move(&d, &site), Err(MoveError::Stale(_))));
        assert!(find_sites(&d, MoveKind::R3, Direction::Expand).is_empty());
    }

    #[test]
    fn walk_deterministic() {
        let d = unknot(Surface::Annulus, vec![1]);
        let a = random_walk(&d, 7, 6, &full_moves());
        let b = random_walk(&d, 7, 6, &full_moves());
        assert_eq!(a, b);
        assert_eq!(random_walk(&d, 7, 0, &full_moves()).diagram, d);
        let r1 = random_walk(&d, 3, 3, &[(MoveKind::R1Pos, Direction::Expand)]);
        assert_eq!(r1.diagram.crossing_count(), 3);
    }
}
