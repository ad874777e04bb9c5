//! State sums for the planar, annular and toroidal pseudo brackets.
//!
//! Two evaluators share one compiled form of the diagram: [`Engine::Enumerate`]
//! walks all `2^n` states (in parallel chunks), [`Engine::Contract`] sweeps the
//! crossings one at a time keeping only the connectivity of the boundary.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::BuildHasherDefault;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use crate::diagram::{
    CrossingId, Diagram, DiagramError, End, Kind, Pairing, Surface,
};
use crate::poly::{canonical_pq, is_canonical_pq, Monomial, Poly, PolyError, Var};

type DetMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

pub const DEFAULT_MAX_CROSSINGS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    Planar,
    Annular,
    AnnularUniversal,
    Toroidal,
    ToroidalUniversal,
    ToroidalReduced,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::Planar,
        Variant::Annular,
        Variant::AnnularUniversal,
        Variant::Toroidal,
        Variant::ToroidalUniversal,
        Variant::ToroidalReduced,
    ];

    pub fn surface(self) -> Surface {
        match self {
            Variant::Planar => Surface::Plane,
            Variant::Annular | Variant::AnnularUniversal => Surface::Annulus,
            _ => Surface::Torus,
        }
    }

    /// The plain variant for a surface.
    pub fn plain(surface: Surface) -> Variant {
        match surface {
            Surface::Plane => Variant::Planar,
            Surface::Annulus => Variant::Annular,
            Surface::Torus => Variant::Toroidal,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Planar => "planar",
            Variant::Annular => "annular",
            Variant::AnnularUniversal => "annular-universal",
            Variant::Toroidal => "toroidal",
            Variant::ToroidalUniversal => "toroidal-universal",
            Variant::ToroidalReduced => "toroidal-reduced",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s || v.name().replace('-', "_") == s)
            .ok_or_else(|| format!("unknown variant {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LoopClass {
    Null,
    AnnularEssential,
    TorusEssential(i64, i64),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BracketError {
    #[error("variant {variant} needs a {} diagram, got {surface}", .variant.surface())]
    VariantMismatch { variant: Variant, surface: Surface },
    #[error("{count} crossings exceeds the cap of {cap}")]
    TooManyCrossings { count: usize, cap: usize },
    #[error("state loop winds {0} times around the annulus; embedded loops wind 0 or ±1")]
    NonEmbeddedLoop(i64),
    #[error("state loop has non-primitive torus class ({0},{1})")]
    NonPrimitiveLoop(i64, i64),
    #[error("state mixes essential classes {0:?} and {1:?}")]
    MixedClasses(LoopClass, LoopClass),
    #[error("essential loop in a planar state")]
    EssentialOnPlane,
    #[error("crossing {crossing} is not {expected}")]
    WrongKind { crossing: CrossingId, expected: &'static str },
    #[error("torus class ({p},{q}) with k = {k} is not canonical")]
    BadClass { p: i64, q: i64, k: u32 },
    #[error("{0}")]
    Diagram(#[from] DiagramError),
    #[error("{0}")]
    Poly(#[from] PolyError),
}

pub fn classify_loop(tags: &[i64], surface: Surface) -> Result<LoopClass, BracketError> {
    match surface {
        Surface::Plane => Ok(LoopClass::Null),
        Surface::Annulus => match tags[0] {
            0 => Ok(LoopClass::Null),
            1 | -1 => Ok(LoopClass::AnnularEssential),
            w => Err(BracketError::NonEmbeddedLoop(w)),
        },
        Surface::Torus => {
            let (p, q) = (tags[0], tags[1]);
            if p == 0 && q == 0 {
                return Ok(LoopClass::Null);
            }
            if p.gcd(&q) != 1 {
                return Err(BracketError::NonPrimitiveLoop(p, q));
            }
            let (p, q) = canonical_pq(p, q);
            Ok(LoopClass::TorusEssential(p, q))
        }
    }
}

/// A smoothing choice at one crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoothing {
    A,
    B,
    V,
    H,
}

/// Slot pairing realizing `choice` at crossing `c`, read off the current
/// orientation.
pub fn pairing(d: &Diagram, c: CrossingId, choice: Smoothing) -> Result<Pairing, BracketError> {
    let ends = d.end_map();
    let x = d.crossing(c)?;
    let incoming = |strand: u8| -> u8 { (d.out_slot(&ends, c, strand) + 2) & 3 };
    match (x.kind, choice) {
        (Kind::Classical { over }, Smoothing::A | Smoothing::B) => {
            let i = incoming(over ^ 1);
            Ok(if choice == Smoothing::A {
                [(i, (i + 1) & 3), ((i + 2) & 3, (i + 3) & 3)]
            } else {
                [(i, (i + 3) & 3), ((i + 2) & 3, (i + 1) & 3)]
            })
        }
        (Kind::Pre, Smoothing::V | Smoothing::H) => {
            let (i0, i1) = (incoming(0), incoming(1));
            let (o0, o1) = ((i0 + 2) & 3, (i1 + 2) & 3);
            Ok(if choice == Smoothing::V { [(i0, o1), (i1, o0)] } else { [(i0, i1), (o0, o1)] })
        }
        (Kind::Classical { .. }, _) => Err(BracketError::WrongKind { crossing: c, expected: "a precrossing" }),
        (Kind::Pre, _) => Err(BracketError::WrongKind { crossing: c, expected: "classical" }),
    }
}

pub fn smooth_classical(d: &Diagram, c: CrossingId, choice: Smoothing) -> Result<Diagram, BracketError> {
    if !matches!(choice, Smoothing::A | Smoothing::B) {
        return Err(BracketError::WrongKind { crossing: c, expected: "a precrossing" });
    }
    let p = pairing(d, c, choice)?;
    Ok(d.splice(&BTreeMap::from([(c, p)])))
}

pub fn smooth_precrossing(d: &Diagram, c: CrossingId, choice: Smoothing) -> Result<Diagram, BracketError> {
    if !matches!(choice, Smoothing::V | Smoothing::H) {
        return Err(BracketError::WrongKind { crossing: c, expected: "classical" });
    }
    let p = pairing(d, c, choice)?;
    Ok(d.splice(&BTreeMap::from([(c, p)])))
}

/// Exponent data of one state, before it is turned into a monomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct StateCounts {
    /// `#A − #B`
    pub ab: i32,
    pub v: u32,
    pub h: u32,
    pub nulls: u32,
    pub class: Option<LoopClass>,
    pub essential: u32,
}

impl StateCounts {
    fn add_loop(&mut self, class: LoopClass) -> Result<(), BracketError> {
        match class {
            LoopClass::Null => self.nulls += 1,
            c => {
                match self.class {
                    Some(prev) if prev != c => return Err(BracketError::MixedClasses(prev, c)),
                    _ => self.class = Some(c),
                }
                self.essential += 1;
            }
        }
        Ok(())
    }
}

/// The factor `W` for `k` essential loops of class `class`.
fn essential_factor(class: Option<LoopClass>, k: u32, variant: Variant) -> Result<Monomial, BracketError> {
    let Some(class) = class else { return Ok(Monomial::one()) };
    let k = k as i64;
    Ok(match (variant, class) {
        (Variant::Annular, LoopClass::AnnularEssential) => Monomial::var(Var::S, k),
        (Variant::AnnularUniversal, LoopClass::AnnularEssential) => Monomial::var(Var::Sk(k as u32), 1),
        (Variant::Toroidal, LoopClass::TorusEssential(p, q)) => Monomial::var(Var::Spq(p, q), k),
        (Variant::ToroidalUniversal, LoopClass::TorusEssential(p, q)) => {
            Monomial::var(Var::Spqk(p, q, k as u32), 1)
        }
        (Variant::ToroidalReduced, LoopClass::TorusEssential(p, q)) => {
            Monomial::from_pairs([(Var::X, k * p), (Var::Y, k * q)])
        }
        _ => return Err(BracketError::EssentialOnPlane),
    })
}

/// Value of one state: `A^(a−b) V^v H^h d^(n − [k=0]) W`.
pub fn state_value(counts: &StateCounts, variant: Variant) -> Result<Poly, BracketError> {
    let mono = Monomial::from_pairs([
        (Var::A, counts.ab as i64),
        (Var::V, counts.v as i64),
        (Var::H, counts.h as i64),
    ])
    .mul(&essential_factor(counts.class, counts.essential, variant)?);
    let dn = counts.nulls as i64 - i64::from(counts.essential == 0);
    Ok(Poly::d().checked_pow(dn)?.mul_monomial(&mono))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    /// Enumerate for small diagrams, contract otherwise.
    Auto,
    Enumerate,
    Contract,
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(Engine::Auto),
            "enumerate" => Ok(Engine::Enumerate),
            "contract" => Ok(Engine::Contract),
            _ => Err(format!("unknown engine {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub max_crossings: usize,
    /// Worker count; `None` uses the global rayon pool.
    pub threads: Option<usize>,
    pub engine: Engine,
    /// Contraction order override (crossing ids), for order-independence tests.
    pub order: Option<Vec<CrossingId>>,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_crossings: DEFAULT_MAX_CROSSINGS, threads: None, engine: Engine::Auto, order: None }
    }
}

impl Options {
    pub fn with_cap(cap: usize) -> Self {
        Options { max_crossings: cap, ..Options::default() }
    }
}

pub fn bracket(d: &Diagram, variant: Variant) -> Result<Poly, BracketError> {
    bracket_with(d, variant, &Options::default())
}

pub fn bracket_with(d: &Diagram, variant: Variant, opts: &Options) -> Result<Poly, BracketError> {
    if variant.surface() != d.surface {
        return Err(BracketError::VariantMismatch { variant, surface: d.surface });
    }
    let v = d.validate();
    if !v.is_empty() {
        return Err(DiagramError::Invalid(v).into());
    }
    let n = d.crossing_count();
    if n > opts.max_crossings {
        return Err(BracketError::TooManyCrossings { count: n, cap: opts.max_crossings });
    }
    let compiled = Compiled::new(d)?;
    let run = || -> Result<DetMap<StateCounts, u128>, BracketError> {
        match opts.engine {
            Engine::Enumerate => compiled.enumerate(),
            Engine::Contract => compiled.contract(opts.order.as_deref()),
            Engine::Auto if n <= 12 => compiled.enumerate(),
            Engine::Auto => compiled.contract(opts.order.as_deref()),
        }
    };
    let counts = match opts.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .expect("thread pool")
            .install(run)?,
        None => run()?,
    };
    assemble(counts, variant)
}

fn assemble(counts: DetMap<StateCounts, u128>, variant: Variant) -> Result<Poly, BracketError> {
    let mut sorted: Vec<(StateCounts, u128)> = counts.into_iter().collect();
    sorted.sort();
    let mut dpow: Vec<Poly> = vec![Poly::one()];
    let mut out = Poly::zero();
    for (c, mult) in sorted {
        let mono = Monomial::from_pairs([(Var::A, c.ab as i64), (Var::V, c.v as i64), (Var::H, c.h as i64)])
            .mul(&essential_factor(c.class, c.essential, variant)?);
        let dn = c.nulls as i64 - i64::from(c.essential == 0);
        if dn < 0 {
            return Err(PolyError::NegativePower(dn).into());
        }
        while dpow.len() <= dn as usize {
            let next = &dpow[dpow.len() - 1] * &Poly::d();
            dpow.push(next);
        }
        out += dpow[dn as usize].mul_monomial(&mono).scale(&BigInt::from(mult));
    }
    Ok(out)
}

/// `(−A^−3)^w · bracket|_{H = 1 − V d}`.
pub fn normalize(bracket: &Poly, writhe: i64) -> Result<Poly, BracketError> {
    let h = &Poly::one() - &(&Poly::var(Var::V) * &Poly::d());
    let sub = bracket.substitute(Var::H, &h)?;
    let sign = if writhe % 2 == 0 { 1 } else { -1 };
    Ok(sub.mul_monomial(&Monomial::var(Var::A, -3 * writhe)).scale(&BigInt::from(sign)))
}

pub fn normalized_bracket(d: &Diagram, variant: Variant) -> Result<Poly, BracketError> {
    normalized_bracket_with(d, variant, &Options::default())
}

pub fn normalized_bracket_with(d: &Diagram, variant: Variant, opts: &Options) -> Result<Poly, BracketError> {
    normalize(&bracket_with(d, variant, opts)?, d.writhe())
}

type Tags = [i64; 2];

/// Index-based form of a diagram for the state sums.
struct Compiled {
    surface: Surface,
    ids: Vec<CrossingId>,
    pre: Vec<bool>,
    /// `partner[choice][dart]`: the dart joined to `dart` by the smoothing.
    partner: [Vec<u32>; 2],
    dart_edge: Vec<u32>,
    dart_is_tail: Vec<bool>,
    edge_ends: Vec<[u32; 2]>,
    edge_tags: Vec<Tags>,
    base: StateCounts,
}

fn to_tags(v: &[i64]) -> Tags {
    let mut t = [0; 2];
    t[..v.len()].copy_from_slice(v);
    t
}

fn neg(t: Tags) -> Tags {
    [-t[0], -t[1]]
}

fn plus(a: Tags, b: Tags) -> Tags {
    [a[0] + b[0], a[1] + b[1]]
}

impl Compiled {
    fn new(d: &Diagram) -> Result<Self, BracketError> {
        // precrossings first, ascending id
        let mut ids: Vec<CrossingId> = d.crossings.values().filter(|c| c.is_pre()).map(|c| c.id).collect();
        ids.extend(d.crossings.values().filter(|c| !c.is_pre()).map(|c| c.id));
        let index: HashMap<CrossingId, u32> = ids.iter().enumerate().map(|(i, c)| (*c, i as u32)).collect();
        let pre: Vec<bool> = ids.iter().map(|c| d.crossings[c].is_pre()).collect();
        let n = ids.len();
        let mut partner = [vec![0u32; 4 * n], vec![0u32; 4 * n]];
        for (i, &c) in ids.iter().enumerate() {
            let choices = if pre[i] { [Smoothing::V, Smoothing::H] } else { [Smoothing::A, Smoothing::B] };
            for (k, ch) in choices.into_iter().enumerate() {
                for (a, b) in pairing(d, c, ch)? {
                    partner[k][4 * i + a as usize] = (4 * i + b as usize) as u32;
                    partner[k][4 * i + b as usize] = (4 * i + a as usize) as u32;
                }
            }
        }
        let dart = |e: End| index[&e.crossing] * 4 + e.slot as u32;
        let mut dart_edge = vec![0u32; 4 * n];
        let mut dart_is_tail = vec![false; 4 * n];
        let mut edge_ends = Vec::new();
        let mut edge_tags = Vec::new();
        for (k, e) in d.edges.values().enumerate() {
            let (t, h) = (dart(e.tail), dart(e.head));
            dart_edge[t as usize] = k as u32;
            dart_edge[h as usize] = k as u32;
            dart_is_tail[t as usize] = true;
            edge_ends.push([t, h]);
            edge_tags.push(to_tags(&e.tags));
        }
        let mut base = StateCounts::default();
        for l in &d.free_loops {
            base.add_loop(classify_loop(&l.tags, d.surface)?)?;
        }
        Ok(Compiled { surface: d.surface, ids, pre, partner, dart_edge, dart_is_tail, edge_ends, edge_tags, base })
    }

    fn classify(&self, t: Tags) -> Result<LoopClass, BracketError> {
        classify_loop(&t[..self.surface.arity()], self.surface)
    }

    fn choice_counts(&self, counts: &mut StateCounts, crossing: usize, choice: usize) {
        match (self.pre[crossing], choice) {
            (true, 0) => counts.v += 1,
            (true, _) => counts.h += 1,
            (false, 0) => counts.ab += 1,
            (false, _) => counts.ab -= 1,
        }
    }

    fn state(&self, mask: u64, seen: &mut [bool]) -> Result<StateCounts, BracketError> {
        let mut counts = self.base;
        for i in 0..self.ids.len() {
            self.choice_counts(&mut counts, i, ((mask >> i) & 1) as usize);
        }
        seen.iter_mut().for_each(|s| *s = false);
        for start in 0..self.edge_ends.len() {
            if seen[start] {
                continue;
            }
            let mut tags = [0; 2];
            let mut e = start;
            let mut forward = true;
            loop {
                seen[e] = true;
                let t = self.edge_tags[e];
                tags = plus(tags, if forward { t } else { neg(t) });
                let arrive = self.edge_ends[e][usize::from(forward)];
                let c = arrive as usize / 4;
                let next = self.partner[((mask >> c) & 1) as usize][arrive as usize] as usize;
                e = self.dart_edge[next] as usize;
                forward = self.dart_is_tail[next];
                if seen[e] {
                    break;
                }
            }
            counts.add_loop(self.classify(tags)?)?;
        }
        Ok(counts)
    }

    fn enumerate(&self) -> Result<DetMap<StateCounts, u128>, BracketError> {
        let n = self.ids.len();
        assert!(n < 63, "enumeration beyond 62 crossings");
        let total: u64 = 1 << n;
        let chunk: u64 = 1 << 12;
        let chunks = total.div_ceil(chunk);
        let parts: Vec<Result<DetMap<StateCounts, u128>, BracketError>> = (0..chunks)
            .into_par_iter()
            .map(|ci| {
                let mut map = DetMap::default();
                let mut seen = vec![false; self.edge_ends.len()];
                for mask in ci * chunk..((ci + 1) * chunk).min(total) {
                    *map.entry(self.state(mask, &mut seen)?).or_insert(0) += 1;
                }
                Ok(map)
            })
            .collect();
        let mut out = DetMap::default();
        for part in parts {
            for (k, v) in part? {
                *out.entry(k).or_insert(0) += v;
            }
        }
        Ok(out)
    }

    /// Order in which the sweep absorbs crossings: each step takes the
    /// crossing with the most edges into the absorbed region.
    fn greedy_order(&self) -> Vec<usize> {
        let n = self.ids.len();
        let mut done = vec![false; n];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let best = (0..n)
                .filter(|&c| !done[c])
                .max_by_key(|&c| {
                    let links = (0..4)
                        .filter(|s| {
                            let dart = 4 * c + s;
                            let e = self.dart_edge[dart] as usize;
                            let far = self.edge_ends[e][usize::from(self.dart_is_tail[dart])] as usize / 4;
                            done[far]
                        })
                        .count();
                    (links, std::cmp::Reverse(c))
                })
                .expect("crossing left");
            done[best] = true;
            order.push(best);
        }
        order
    }

    fn far(&self, dart: u32) -> (u32, Tags) {
        let e = self.dart_edge[dart as usize] as usize;
        let tail = self.dart_is_tail[dart as usize];
        let t = self.edge_tags[e];
        (self.edge_ends[e][usize::from(tail)], if tail { t } else { neg(t) })
    }

    fn contract(&self, order: Option<&[CrossingId]>) -> Result<DetMap<StateCounts, u128>, BracketError> {
        let n = self.ids.len();
        let order: Vec<usize> = match order {
            Some(o) => {
                let pos: HashMap<CrossingId, usize> = self.ids.iter().enumerate().map(|(i, c)| (*c, i)).collect();
                o.iter().map(|c| pos[c]).collect()
            }
            None => self.greedy_order(),
        };
        assert_eq!(order.len(), n);
        let mut done = vec![false; n];
        let mut states: Vec<(Frontier, u128)> = vec![(Frontier { paths: Vec::new(), counts: self.base }, 1)];
        for &c in &order {
            const CHUNK: usize = 256;
            let parts: Vec<Result<Vec<(Frontier, u128)>, BracketError>> = states
                .par_chunks(CHUNK)
                .map(|chunk| {
                    let mut out = Vec::with_capacity(chunk.len() * 2);
                    for (f, mult) in chunk {
                        for choice in 0..2 {
                            out.push((self.absorb(f, c, choice, &done)?, *mult));
                        }
                    }
                    Ok(out)
                })
                .collect();
            let mut merged: DetMap<Frontier, u128> = DetMap::default();
            let mut order_kept: Vec<Frontier> = Vec::new();
            for part in parts {
                for (f, m) in part? {
                    match merged.get_mut(&f) {
                        Some(x) => *x += m,
                        None => {
                            order_kept.push(f.clone());
                            merged.insert(f, m);
                        }
                    }
                }
            }
            states = order_kept
                .into_iter()
                .map(|f| {
                    let m = merged[&f];
                    (f, m)
                })
                .collect();
            done[c] = true;
        }
        let mut out = DetMap::default();
        for (f, m) in states {
            debug_assert!(f.paths.is_empty());
            *out.entry(f.counts).or_insert(0) += m;
        }
        Ok(out)
    }

    /// Absorbs crossing `c` with the given choice into a frontier state.
    fn absorb(&self, f: &Frontier, c: usize, choice: usize, done: &[bool]) -> Result<Frontier, BracketError> {
        let mut counts = f.counts;
        self.choice_counts(&mut counts, c, choice);
        let at_c = |dart: u32| dart as usize / 4 == c;
        let lookup = |dart: u32| -> Option<(u32, Tags)> {
            f.paths.iter().find_map(|&(a, b, t)| {
                if a == dart {
                    Some((b, t))
                } else if b == dart {
                    Some((a, neg(t)))
                } else {
                    None
                }
            })
        };
        let partner = &self.partner[choice];
        let mut visited = [false; 4];
        // From slot dart `x` at c, cross c and run until a terminal or back to `stop`.
        let inside = |mut x: u32, mut acc: Tags, stop: Option<u32>, visited: &mut [bool; 4]| -> (Option<u32>, Tags) {
            loop {
                let y = partner[x as usize];
                visited[(x % 4) as usize] = true;
                visited[(y % 4) as usize] = true;
                let (far, t) = self.far(y);
                let (next, t) = if at_c(far) {
                    (far, t)
                } else if done[far as usize / 4] {
                    let (p, t) = lookup(y).expect("port on a path");
                    if !at_c(p) {
                        return (Some(p), plus(acc, t));
                    }
                    (p, t)
                } else {
                    return (Some(far), plus(acc, t));
                };
                acc = plus(acc, t);
                if Some(next) == stop {
                    return (None, acc);
                }
                x = next;
            }
        };
        let mut paths: Vec<(u32, u32, Tags)> = Vec::new();
        // paths untouched by c
        for &(a, b, t) in &f.paths {
            if !at_c(a) && !at_c(b) {
                paths.push((a, b, t));
            }
        }
        // old paths with one end at c, then fresh edges to unabsorbed crossings
        let mut starts: Vec<(u32, u32, Tags)> = Vec::new();
        for &(a, b, t) in &f.paths {
            match (at_c(a), at_c(b)) {
                (true, false) => starts.push((b, a, neg(t))),
                (false, true) => starts.push((a, b, t)),
                _ => {}
            }
        }
        for s in 0..4u32 {
            let dart = 4 * c as u32 + s;
            let (far, t) = self.far(dart);
            if !at_c(far) && !done[far as usize / 4] {
                starts.push((far, dart, neg(t)));
            }
        }
        let mut ended: Vec<u32> = Vec::new();
        for (term, entry, t) in starts {
            if ended.contains(&term) {
                continue;
            }
            let (end, acc) = inside(entry, t, None, &mut visited);
            let end = end.expect("open path ends at a terminal");
            ended.push(term);
            ended.push(end);
            paths.push(if term < end { (term, end, acc) } else { (end, term, neg(acc)) });
        }
        for s in 0..4u32 {
            if visited[s as usize] {
                continue;
            }
            let x = 4 * c as u32 + s;
            let (end, acc) = inside(x, [0, 0], Some(x), &mut visited);
            debug_assert!(end.is_none());
            counts.add_loop(self.classify(acc)?)?;
        }
        paths.sort_unstable();
        Ok(Frontier { paths, counts })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Frontier {
    /// Arcs through the absorbed region between boundary darts, `a < b`,
    /// tags summed from `a` to `b`.
    paths: Vec<(u32, u32, Tags)>,
    counts: StateCounts,
}

/// The closed `kq`-braid `(σ1⋯σ_{kq−1})^{kp}` on the annulus (or its planar
/// image), realizing `k` parallel copies of the `(p,q)` torus curve.
pub fn torus_class_diagram(p: i64, q: i64, k: u32, target: Surface) -> Result<Diagram, BracketError> {
    if k == 0 || !is_canonical_pq(p, q) || target == Surface::Torus {
        return Err(BracketError::BadClass { p, q, k });
    }
    let mut d = Diagram::new(Surface::Annulus);
    if q == 0 {
        for _ in 0..k {
            d.free_loops.push(crate::diagram::FreeLoop { tags: vec![0] });
        }
        return Ok(if target == Surface::Plane { d.forget_tags() } else { d });
    }
    let strands = (k as i64 * q) as usize;
    let rounds = (k as i64 * p).unsigned_abs();
    let over = if p > 0 { 0 } else { 1 };
    let mut first: Vec<Option<End>> = vec![None; strands];
    let mut pending: Vec<Option<End>> = vec![None; strands];
    let mut next_edge = 0;
    let mut next_crossing = 0;
    let mut link = |d: &mut Diagram, from: Option<End>, to: End, first: &mut Option<End>| match from {
        Some(t) => {
            d.add_edge(next_edge, t, to, vec![0]);
            next_edge += 1;
        }
        None => *first = Some(to),
    };
    if strands > 1 {
        for _ in 0..rounds {
            for i in 1..strands {
                let c = next_crossing;
                next_crossing += 1;
                d.add_crossing(c, Kind::Classical { over });
                // slots: 0 NE, 1 NW, 2 SW, 3 SE; the braid runs upward
                let (l, r) = (i - 1, i);
                // `first[j]` is where the strand starting at the bottom of
                // position j meets its first crossing
                link(&mut d, pending[l], End::new(c, 2), &mut first[l]);
                link(&mut d, pending[r], End::new(c, 3), &mut first[r]);
                // strand entering at the left leaves at the right, and vice versa
                pending[r] = Some(End::new(c, 0));
                pending[l] = Some(End::new(c, 1));
            }
        }
    }
    for j in 0..strands {
        match (pending[j], first[j]) {
            (Some(t), Some(h)) => {
                d.add_edge(next_edge, t, h, vec![1]);
                next_edge += 1;
            }
            _ => d.free_loops.push(crate::diagram::FreeLoop { tags: vec![1] }),
        }
    }
    Ok(if target == Surface::Plane { d.forget_tags() } else { d })
}

fn check_vars(p: &Poly, allowed: impl Fn(Var) -> bool) -> Result<(), BracketError> {
    for v in p.vars() {
        if !allowed(v) {
            return Err(PolyError::UnexpectedVariable(v.to_string()).into());
        }
    }
    Ok(())
}

/// `s^k ↦ d^(k−1)`.
pub fn specialize_annular_to_planar(p: &Poly) -> Result<Poly, BracketError> {
    check_vars(p, |v| matches!(v, Var::A | Var::V | Var::H | Var::S))?;
    Ok(p.map_monomials(|m| {
        let k = m.exp(Var::S);
        let rest = Poly::term(1, m.without(Var::S));
        Ok(if k == 0 { rest } else { &rest * &Poly::d().checked_pow(k - 1)? })
    })?)
}

/// Maps toroidal class variables into the annulus or plane.
pub fn specialize_toroidal(p: &Poly, target: Surface) -> Result<Poly, BracketError> {
    check_vars(p, |v| matches!(v, Var::A | Var::V | Var::H | Var::Spq(..)))?;
    let mut cache: HashMap<(i64, i64, u32), Poly> = HashMap::new();
    let mut image = |pp: i64, qq: i64, k: u32| -> Result<Poly, BracketError> {
        if let Some(x) = cache.get(&(pp, qq, k)) {
            return Ok(x.clone());
        }
        let v = match (target, pp, qq) {
            (Surface::Annulus, 0, 1) => Poly::term(1, Monomial::var(Var::S, k as i64)),
            (Surface::Annulus, 1, 0) | (Surface::Plane, 1, 0) | (Surface::Plane, 0, 1) => Poly::d_pow(k - 1),
            (Surface::Annulus | Surface::Plane, _, _) => {
                let d = torus_class_diagram(pp, qq, k, target)?;
                bracket_with(&d, Variant::plain(target), &Options::with_cap(usize::MAX))?
            }
            (Surface::Torus, ..) => return Err(BracketError::BadClass { p: pp, q: qq, k }),
        };
        cache.insert((pp, qq, k), v.clone());
        Ok(v)
    };
    let mut out = Poly::zero();
    for (m, c) in p.terms() {
        let mut term = Poly::term(c.clone(), Monomial::one());
        for (v, e) in m.vars() {
            let f = match v {
                Var::Spq(pp, qq) => image(pp, qq, e as u32)?,
                _ => Poly::term(1, Monomial::var(v, e)),
            };
            term = &term * &f;
        }
        out += term;
    }
    Ok(out)
}

/// `s_k ↦ s^k`, `s_{p,q,k} ↦ s_{p,q}^k`.
pub fn universal_to_plain(p: &Poly) -> Poly {
    p.map_monomials(|m| {
        Ok(Poly::term(
            1,
            Monomial::from_pairs(m.vars().map(|(v, e)| match v {
                Var::Sk(k) => (Var::S, k as i64 * e),
                Var::Spqk(a, b, k) => (Var::Spq(a, b), k as i64 * e),
                _ => (v, e),
            })),
        ))
    })
    .expect("monomial rewrite")
}

/// `s_{p,q} ↦ x^p y^q`.
pub fn toroidal_to_reduced(p: &Poly) -> Poly {
    p.map_monomials(|m| {
        let mut pairs = Vec::new();
        for (v, e) in m.vars() {
            match v {
                Var::Spq(a, b) => {
                    pairs.push((Var::X, a * e));
                    pairs.push((Var::Y, b * e));
                }
                _ => pairs.push((v, e)),
            }
        }
        Ok(Poly::term(1, Monomial::from_pairs(pairs)))
    })
    .expect("monomial rewrite")
}

/// Torus diagram viewed in the annulus: only the second tag survives.
pub fn torus_to_annulus(d: &Diagram) -> Diagram {
    d.project(Surface::Annulus, |t| vec![t[1]])
}
