//! Independent oracles: state sums evaluated by direct loop tracing, without
//! the engines, splicing or the library's pairing rules.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use pseudo_bracket::diagram::{Diagram, End, Kind, Surface};
use pseudo_bracket::poly::{Poly, Var};

pub type Pairing = [(u8, u8); 2];

fn head_at(d: &Diagram) -> HashMap<End, bool> {
    let mut m = HashMap::new();
    for e in d.edges.values() {
        m.insert(e.tail, false);
        m.insert(e.head, true);
    }
    m
}

/// Smoothing pairs at crossing `c`. Classical: `a = true` for A. Precrossing:
/// `a = true` for V, the coherent one.
pub fn oracle_pairing(d: &Diagram, c: u32, a: bool) -> Pairing {
    let heads = head_at(d);
    let is_in = |s: u8| heads[&End::new(c, s)];
    match d.crossings[&c].kind {
        Kind::Classical { over } => {
            let under = [over ^ 1, (over ^ 1) + 2];
            let i = if is_in(under[0]) { under[0] } else { under[1] };
            if a {
                [(i, (i + 1) % 4), ((i + 2) % 4, (i + 3) % 4)]
            } else {
                [(i, (i + 3) % 4), ((i + 1) % 4, (i + 2) % 4)]
            }
        }
        Kind::Pre => {
            let i0 = if is_in(0) { 0 } else { 2 };
            let i1 = if is_in(1) { 1 } else { 3 };
            if a {
                [(i0, (i1 + 2) % 4), (i1, (i0 + 2) % 4)]
            } else {
                [(i0, i1), ((i0 + 2) % 4, (i1 + 2) % 4)]
            }
        }
    }
}

/// Tag sums of the loops of a full state, each traced in some direction.
pub fn state_loops(d: &Diagram, pairs: &BTreeMap<u32, Pairing>) -> Vec<Vec<i64>> {
    let mut at: HashMap<End, u32> = HashMap::new();
    for e in d.edges.values() {
        at.insert(e.tail, e.id);
        at.insert(e.head, e.id);
    }
    let partner = |x: End| -> End {
        for &(a, b) in &pairs[&x.crossing] {
            if a == x.slot {
                return End::new(x.crossing, b);
            }
            if b == x.slot {
                return End::new(x.crossing, a);
            }
        }
        unreachable!()
    };
    let arity = d.surface.arity();
    let mut seen = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for e in d.edges.values() {
        if seen.contains(&e.id) {
            continue;
        }
        let mut tags = vec![0i64; arity];
        let mut id = e.id;
        let mut from = e.tail;
        while seen.insert(id) {
            let edge = &d.edges[&id];
            let (sign, to) = if edge.tail == from { (1, edge.head) } else { (-1, edge.tail) };
            for (t, e) in tags.iter_mut().zip(&edge.tags) {
                *t += sign * e;
            }
            from = partner(to);
            id = at[&from];
        }
        out.push(tags);
    }
    out.extend(d.free_loops.iter().map(|l| l.tags.clone()));
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Value of a state of loops: one factor of d per null loop beyond the first
/// (or beyond none, when essential loops are present).
pub fn loops_value(loops: &[Vec<i64>], surface: Surface) -> Option<Poly> {
    let mut nulls = 0u32;
    let mut ess: Vec<Var> = Vec::new();
    for t in loops {
        match surface {
            Surface::Plane => nulls += 1,
            Surface::Annulus => match t[0].abs() {
                0 => nulls += 1,
                1 => ess.push(Var::S),
                _ => return None,
            },
            Surface::Torus => {
                if t[0] == 0 && t[1] == 0 {
                    nulls += 1;
                } else {
                    if gcd(t[0], t[1]) != 1 {
                        return None;
                    }
                    let (p, q) = if t[1] < 0 || (t[1] == 0 && t[0] < 0) { (-t[0], -t[1]) } else { (t[0], t[1]) };
                    ess.push(Var::Spq(p, q));
                }
            }
        }
    }
    if ess.windows(2).any(|w| w[0] != w[1]) {
        return None;
    }
    let mut v = Poly::one();
    let extra = if ess.is_empty() { nulls.saturating_sub(1) } else { nulls };
    for _ in 0..extra {
        v = &v * &Poly::d();
    }
    for x in ess {
        v = &v * &Poly::var(x);
    }
    Some(v)
}

/// Brute-force state sum over all 2^n smoothings.
pub fn brute_bracket(d: &Diagram) -> Option<Poly> {
    let ids: Vec<u32> = d.crossings.keys().copied().collect();
    let mut total = Poly::zero();
    for mask in 0u64..(1 << ids.len()) {
        let mut pairs = BTreeMap::new();
        let mut term = Poly::one();
        for (k, &c) in ids.iter().enumerate() {
            let a = mask >> k & 1 == 0;
            pairs.insert(c, oracle_pairing(d, c, a));
            let f = match (d.crossings[&c].kind, a) {
                (Kind::Pre, true) => Poly::var(Var::V),
                (Kind::Pre, false) => Poly::var(Var::H),
                (_, true) => Poly::a_pow(1),
                (_, false) => Poly::a_pow(-1),
            };
            term = &term * &f;
        }
        total = &total + &(&term * &loops_value(&state_loops(d, &pairs), d.surface)?);
    }
    Some(total)
}

/// Skein recursion in a given crossing order. Pairings are read off the
/// input diagram and applied one crossing at a time.
pub fn skein_bracket(d: &Diagram, order: &[u32]) -> Option<Poly> {
    fn go(d: &Diagram, order: &[u32], fixed: &mut BTreeMap<u32, Pairing>) -> Option<Poly> {
        let Some((&c, rest)) = order.split_first() else {
            return loops_value(&state_loops(d, fixed), d.surface);
        };
        let mut total = Poly::zero();
        for a in [true, false] {
            fixed.insert(c, oracle_pairing(d, c, a));
            let f = match (d.crossings[&c].kind, a) {
                (Kind::Pre, true) => Poly::var(Var::V),
                (Kind::Pre, false) => Poly::var(Var::H),
                (_, true) => Poly::a_pow(1),
                (_, false) => Poly::a_pow(-1),
            };
            total = &total + &(&f * &go(d, rest, fixed)?);
        }
        fixed.remove(&c);
        Some(total)
    }
    go(d, order, &mut BTreeMap::new())
}

/// (−A⁻³)^w · p with H ↦ 1 − V·d.
pub fn oracle_normalize(p: &Poly, writhe: i64) -> Poly {
    let h = &Poly::one() - &(&Poly::var(Var::V) * &Poly::d());
    let p = p.substitute(Var::H, &h).expect("substitution");
    let sign = if writhe % 2 == 0 { Poly::one() } else { -Poly::one() };
    &(&sign * &Poly::a_pow(-3 * writhe)) * &p
}
