//! Ribbon graphs in the corner model.
//!
//! Each edge `e` owns four corners `(e,0)…(e,3)`. Two perfect matchings on
//! them record how the ribbon meets the vertex disks (`attach`) and where its
//! free sides run (`side`); a global fixed-point-free involution (`arcs`)
//! joins corners along vertex boundaries. Vertex circles are the cycles of
//! `attach ∪ arcs`, boundary components the cycles of `side ∪ arcs`.
//! Partial duality swaps `attach` and `side` on an edge and nothing else.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::f2sympl::IndexSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RibbonError {
    #[error("edge label {label} out of range 1..={edges}")]
    LabelOutOfRange { label: usize, edges: usize },
    #[error("edge label {label} occurs {count} times, expected exactly 2")]
    LabelMultiplicity { label: usize, count: usize },
    #[error("vertex {vertex} has no half-edges")]
    EmptyVertex { vertex: usize },
    #[error("edge {edge}: attach and side matchings must be distinct perfect matchings")]
    InvalidMatching { edge: usize },
    #[error("arc matching is not a fixed-point-free involution on {corners} corners")]
    InvalidArcs { corners: usize },
    #[error("arc {arc} out of range (graph has {count} arcs)")]
    ArcOutOfRange { arc: usize, count: usize },
    #[error("arc {arc} closes a single half-edge; a move needs two distinct half-edges")]
    DegenerateArc { arc: usize },
    #[error("edge {edge} is not an endpoint of arc {arc}")]
    FixedNotOnArc { edge: usize, arc: usize },
    #[error("expected a one-vertex ribbon graph, found {vertices} vertices")]
    NotOneVertex { vertices: usize },
}

/// Corner `(edge, slot)` with a 1-based edge label and `slot ∈ 0..4`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Corner(usize);

impl Corner {
    pub fn new(edge: usize, slot: usize) -> Self {
        assert!(edge >= 1 && slot < 4);
        Corner(4 * (edge - 1) + slot)
    }

    pub fn edge(self) -> usize {
        self.0 / 4 + 1
    }

    pub fn slot(self) -> usize {
        self.0 % 4
    }

    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Debug for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Corner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.edge(), self.slot())
    }
}

/// A perfect matching on the four corners of one edge, named by the partner
/// of slot 0. The partner of slot `k` is `k ^ m`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Matching(u8);

impl Matching {
    /// `{0,1}, {2,3}`
    pub const PAIRS_01_23: Matching = Matching(1);
    /// `{0,2}, {1,3}`
    pub const PAIRS_02_13: Matching = Matching(2);
    /// `{0,3}, {1,2}`
    pub const PAIRS_03_12: Matching = Matching(3);

    pub fn partner_slot(self, slot: usize) -> usize {
        slot ^ self.0 as usize
    }

    /// The matching distinct from both `self` and `other` (which must differ).
    pub fn third(self, other: Matching) -> Matching {
        debug_assert_ne!(self, other);
        Matching(self.0 ^ other.0)
    }

    pub fn contains(self, a: usize, b: usize) -> bool {
        self.partner_slot(a) == b
    }
}

/// Cyclic vertex words over edge labels plus a twist bit per edge.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RotationSystem {
    edges: usize,
    words: Vec<Vec<usize>>,
    twisted: Vec<bool>,
}

impl RotationSystem {
    /// Every label in `1..=edges` must occur exactly twice across `words`.
    pub fn new(edges: usize, words: Vec<Vec<usize>>, twisted: &[usize]) -> Result<Self, RibbonError> {
        let mut counts = vec![0usize; edges];
        for (v, w) in words.iter().enumerate() {
            if w.is_empty() {
                return Err(RibbonError::EmptyVertex { vertex: v + 1 });
            }
            for &l in w {
                if l == 0 || l > edges {
                    return Err(RibbonError::LabelOutOfRange { label: l, edges });
                }
                counts[l - 1] += 1;
            }
        }
        if let Some((l, &count)) = counts.iter().enumerate().find(|(_, &c)| c != 2) {
            return Err(RibbonError::LabelMultiplicity { label: l + 1, count });
        }
        let mut twist = vec![false; edges];
        for &t in twisted {
            if t == 0 || t > edges {
                return Err(RibbonError::LabelOutOfRange { label: t, edges });
            }
            twist[t - 1] = true;
        }
        Ok(RotationSystem { edges, words, twisted: twist })
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn words(&self) -> &[Vec<usize>] {
        &self.words
    }

    pub fn is_twisted(&self, label: usize) -> bool {
        self.twisted[label - 1]
    }

    /// Twisted edge labels in increasing order.
    pub fn twisted(&self) -> Vec<usize> {
        (1..=self.edges).filter(|&l| self.twisted[l - 1]).collect()
    }

    /// Reverses vertex `vertex` (1-based) and toggles the twist of every
    /// non-loop edge at it; describes the same ribbon graph.
    pub fn flip_vertex(&self, vertex: usize) -> RotationSystem {
        let mut out = self.clone();
        out.words[vertex - 1].reverse();
        let here = &self.words[vertex - 1];
        for &l in here {
            if here.iter().filter(|&&m| m == l).count() == 1 {
                out.twisted[l - 1] = !out.twisted[l - 1];
            }
        }
        out
    }

    /// Random rotation system: the `2n` half-edges are shuffled, cut into a
    /// random number of nonempty vertices, and each edge gets a random twist.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, edges: usize) -> RotationSystem {
        let mut slots: Vec<usize> = (1..=edges).flat_map(|l| [l, l]).collect();
        slots.shuffle(rng);
        let mut words = Vec::new();
        if edges > 0 {
            let vertices = rng.random_range(1..=2 * edges);
            let mut cuts: Vec<usize> = (1..2 * edges).collect();
            cuts.shuffle(rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(vertices - 1).collect();
            cuts.sort_unstable();
            let mut start = 0;
            for c in cuts.into_iter().chain([2 * edges]) {
                words.push(slots[start..c].to_vec());
                start = c;
            }
        }
        let twisted = (0..edges).map(|_| rng.random::<bool>()).collect();
        RotationSystem { edges, words, twisted }
    }
}

impl fmt::Debug for RotationSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RotationSystem {{ edges: {}, words: {:?}, twisted: {:?} }}", self.edges, self.words, self.twisted())
    }
}

/// A ribbon graph with labelled edges, stored as its corner model.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RibbonGraph {
    attach: Vec<Matching>,
    side: Vec<Matching>,
    arcs: Vec<usize>,
}

/// A vertex circle traversed in a fixed direction: `corners[2k]` enters the
/// `k`-th attach segment and `corners[2k + 1]` leaves it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexCircle {
    pub corners: Vec<Corner>,
}

impl VertexCircle {
    pub fn degree(&self) -> usize {
        self.corners.len() / 2
    }

    pub fn labels(&self) -> Vec<usize> {
        self.corners.iter().step_by(2).map(|c| c.edge()).collect()
    }
}

impl RibbonGraph {
    /// Builds a graph from raw corner data; `arcs[c]` is the arc partner of corner index `c`.
    pub fn from_parts(attach: Vec<Matching>, side: Vec<Matching>, arcs: Vec<usize>) -> Result<Self, RibbonError> {
        let n = attach.len();
        if side.len() != n {
            return Err(RibbonError::InvalidMatching { edge: n.min(side.len()) + 1 });
        }
        for e in 0..n {
            if !(1..=3).contains(&attach[e].0) || !(1..=3).contains(&side[e].0) || attach[e] == side[e] {
                return Err(RibbonError::InvalidMatching { edge: e + 1 });
            }
        }
        let corners = 4 * n;
        if arcs.len() != corners || arcs.iter().enumerate().any(|(c, &d)| d >= corners || d == c || arcs[d] != c) {
            return Err(RibbonError::InvalidArcs { corners });
        }
        Ok(RibbonGraph { attach, side, arcs })
    }

    pub fn from_rotation(rs: &RotationSystem) -> RibbonGraph {
        let n = rs.edges;
        let mut seen = vec![false; n];
        let mut arcs = vec![usize::MAX; 4 * n];
        for word in &rs.words {
            // (prev, next) corners of each occurrence in reading order
            let occ: Vec<(usize, usize)> = word
                .iter()
                .map(|&l| {
                    let base = 4 * (l - 1);
                    if seen[l - 1] {
                        (base + 2, base + 3)
                    } else {
                        seen[l - 1] = true;
                        (base, base + 1)
                    }
                })
                .collect();
            for k in 0..occ.len() {
                let next = occ[k].1;
                let prev = occ[(k + 1) % occ.len()].0;
                arcs[next] = prev;
                arcs[prev] = next;
            }
        }
        let attach = vec![Matching::PAIRS_01_23; n];
        let side = rs.twisted.iter().map(|&t| if t { Matching::PAIRS_02_13 } else { Matching::PAIRS_03_12 }).collect();
        RibbonGraph { attach, side, arcs }
    }

    /// One-vertex graph from a word in which each label appears twice.
    pub fn chord_diagram(word: &[usize], twisted: &[usize]) -> Result<RibbonGraph, RibbonError> {
        let edges = word.iter().copied().max().unwrap_or(0);
        let words = if word.is_empty() { vec![] } else { vec![word.to_vec()] };
        Ok(Self::from_rotation(&RotationSystem::new(edges, words, twisted)?))
    }

    pub fn edge_count(&self) -> usize {
        self.attach.len()
    }

    pub fn attach_matching(&self, edge: usize) -> Matching {
        self.attach[edge - 1]
    }

    pub fn side_matching(&self, edge: usize) -> Matching {
        self.side[edge - 1]
    }

    fn partner(c: usize, m: Matching) -> usize {
        c & !3 | (c & 3) ^ m.0 as usize
    }

    pub fn attach_partner(&self, c: Corner) -> Corner {
        Corner(Self::partner(c.0, self.attach[c.0 / 4]))
    }

    pub fn side_partner(&self, c: Corner) -> Corner {
        Corner(Self::partner(c.0, self.side[c.0 / 4]))
    }

    pub fn arc_partner(&self, c: Corner) -> Corner {
        Corner(self.arcs[c.0])
    }

    /// Arcs as `(smaller, larger)` corner pairs, sorted; an arc's id is its index here.
    pub fn arcs(&self) -> Vec<(Corner, Corner)> {
        (0..self.arcs.len()).filter(|&c| c < self.arcs[c]).map(|c| (Corner(c), Corner(self.arcs[c]))).collect()
    }

    /// Id of the arc ending at `corner`.
    pub fn arc_id(&self, corner: Corner) -> usize {
        let low = corner.0.min(self.arcs[corner.0]);
        (0..low).filter(|&c| c < self.arcs[c]).count()
    }

    fn arc(&self, id: usize) -> Result<(usize, usize), RibbonError> {
        let arcs = self.arcs();
        arcs.get(id)
            .map(|&(a, b)| (a.0, b.0))
            .ok_or(RibbonError::ArcOutOfRange { arc: id, count: arcs.len() })
    }

    fn count_cycles(&self, m: &[Matching]) -> usize {
        let mut seen = vec![false; self.arcs.len()];
        let mut cycles = 0;
        for start in 0..self.arcs.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut c = start;
            while !seen[c] {
                seen[c] = true;
                c = self.arcs[Self::partner(c, m[c / 4])];
            }
        }
        cycles
    }

    /// Number of vertex disks: half the cycle count of `arcs ∘ attach`.
    pub fn vertex_count(&self) -> usize {
        let cycles = self.count_cycles(&self.attach);
        debug_assert!(cycles.is_multiple_of(2));
        cycles / 2
    }

    /// Number of boundary components: half the cycle count of `arcs ∘ side`.
    pub fn boundary_count(&self) -> usize {
        let cycles = self.count_cycles(&self.side);
        debug_assert!(cycles.is_multiple_of(2));
        cycles / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64
    }

    /// Vertex circles, each starting at its smallest corner (which enters the
    /// first segment), ordered by that corner.
    pub fn vertex_circles(&self) -> Vec<VertexCircle> {
        let mut seen = vec![false; self.arcs.len()];
        let mut circles = Vec::new();
        for start in 0..self.arcs.len() {
            if seen[start] {
                continue;
            }
            let mut corners = Vec::new();
            let mut c = start;
            loop {
                let out = Self::partner(c, self.attach[c / 4]);
                seen[c] = true;
                seen[out] = true;
                corners.push(Corner(c));
                corners.push(Corner(out));
                c = self.arcs[out];
                if c == start {
                    break;
                }
            }
            circles.push(VertexCircle { corners });
        }
        circles
    }

    /// Multiset of vertex degrees, sorted.
    pub fn degree_sequence(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.vertex_circles().iter().map(VertexCircle::degree).collect();
        d.sort_unstable();
        d
    }

    /// Whether edge `e` is twisted when each circle is read in the direction
    /// given by `forward[circle]` (true = the canonical direction).
    fn twisted_under(&self, e: usize, place: &[(usize, bool)], forward: &[bool]) -> bool {
        let base = 4 * e;
        let a = self.attach[e];
        // the two attach segments of e
        let s1 = (base, Self::partner(base, a));
        let other = (0..4).map(|k| base + k).find(|&c| c != s1.0 && c != s1.1).unwrap();
        let s2 = (other, Self::partner(other, a));
        let entering = |(x, y): (usize, usize)| {
            let (circle, x_enters) = place[x];
            if x_enters == forward[circle] {
                (x, y)
            } else {
                (y, x)
            }
        };
        let (in1, _) = entering(s1);
        let (_, out2) = entering(s2);
        Self::partner(in1, self.side[e]) != out2
    }

    /// For each corner: its circle and whether it enters a segment in the
    /// canonical traversal.
    fn corner_places(&self, circles: &[VertexCircle]) -> Vec<(usize, bool)> {
        let mut place = vec![(0, false); self.arcs.len()];
        for (k, circle) in circles.iter().enumerate() {
            for (pos, c) in circle.corners.iter().enumerate() {
                place[c.0] = (k, pos % 2 == 0);
            }
        }
        place
    }

    /// Chooses circle directions making as many edges untwisted as possible:
    /// breadth-first from the lowest circle of each component. Returns the
    /// directions and whether every edge came out untwisted.
    fn orient(&self, circles: &[VertexCircle], place: &[(usize, bool)]) -> (Vec<bool>, bool) {
        let k = circles.len();
        // edges between circles with their twist under canonical directions
        let canonical = vec![true; k];
        let mut adjacency: Vec<Vec<(usize, bool)>> = vec![Vec::new(); k];
        let mut orientable = true;
        for e in 0..self.edge_count() {
            let u = place[4 * e].0;
            let other = (1..4).map(|s| 4 * e + s).find(|&c| c != Self::partner(4 * e, self.attach[e])).unwrap();
            let v = place[other].0;
            let twist = self.twisted_under(e, place, &canonical);
            if u == v {
                orientable &= !twist;
            } else {
                adjacency[u].push((v, twist));
                adjacency[v].push((u, twist));
            }
        }
        let mut forward: Vec<Option<bool>> = vec![None; k];
        for root in 0..k {
            if forward[root].is_some() {
                continue;
            }
            forward[root] = Some(true);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let du = forward[u].unwrap();
                for &(v, twist) in &adjacency[u] {
                    // untwisted iff d_u xor d_v == twist (flipping either side toggles)
                    let want = du ^ twist;
                    match forward[v] {
                        None => {
                            forward[v] = Some(want);
                            queue.push_back(v);
                        }
                        Some(dv) => orientable &= dv == want,
                    }
                }
            }
        }
        (forward.into_iter().map(Option::unwrap).collect(), orientable)
    }

    pub fn is_orientable(&self) -> bool {
        let circles = self.vertex_circles();
        let place = self.corner_places(&circles);
        self.orient(&circles, &place).1
    }

    /// Partial dual along `edges`: swaps attach and side on each of them.
    pub fn partial_dual(&self, edges: IndexSet) -> RibbonGraph {
        let mut out = self.clone();
        for e in edges.iter().filter(|&e| e <= self.edge_count()) {
            std::mem::swap(&mut out.attach[e - 1], &mut out.side[e - 1]);
        }
        out
    }

    /// Endpoints `(x, x', y, y')` of a move at arc `id`: `x`,`y` on the arc,
    /// primes their attach partners.
    fn move_corners(&self, id: usize) -> Result<(usize, usize, usize, usize), RibbonError> {
        let (x, y) = self.arc(id)?;
        let xp = Self::partner(x, self.attach[x / 4]);
        if xp == y {
            return Err(RibbonError::DegenerateArc { arc: id });
        }
        let yp = Self::partner(y, self.attach[y / 4]);
        Ok((x, xp, y, yp))
    }

    /// First Vassiliev move at arc `id`: the two attach segments adjacent
    /// across the arc trade places on their vertex circle, each keeping its
    /// direction. The marked arc ends up between them again.
    pub fn vassiliev1(&self, id: usize) -> Result<RibbonGraph, RibbonError> {
        let (x, xp, y, yp) = self.move_corners(id)?;
        let mut out = self.clone();
        let p = self.arcs[xp];
        if p == yp {
            // the circle holds just these two segments; swapping is a rotation
            return Ok(out);
        }
        let q = self.arcs[yp];
        for (a, b) in [(p, y), (yp, xp), (x, q)] {
            out.arcs[a] = b;
            out.arcs[b] = a;
        }
        Ok(out)
    }

    /// Id, in the result of [`Self::vassiliev1`], of the marked arc.
    pub fn vassiliev1_marked_arc(&self, id: usize) -> Result<usize, RibbonError> {
        let (_, xp, _, _) = self.move_corners(id)?;
        Ok(self.vassiliev1(id)?.arc_id(Corner(xp)))
    }

    fn check_fixed(&self, id: usize, fixed: usize) -> Result<(), RibbonError> {
        let (x, y) = self.arc(id)?;
        if x / 4 + 1 != fixed && y / 4 + 1 != fixed {
            return Err(RibbonError::FixedNotOnArc { edge: fixed, arc: id });
        }
        Ok(())
    }

    /// Second Vassiliev move at arc `id` with fixed edge `fixed`:
    /// `μ_fixed ∘ v₁ ∘ μ_fixed`. Arcs survive partial duals, so `id` names the
    /// same arc throughout.
    pub fn vassiliev2(&self, id: usize, fixed: usize) -> Result<RibbonGraph, RibbonError> {
        self.check_fixed(id, fixed)?;
        let dual = IndexSet::from_indices([fixed]);
        Ok(self.partial_dual(dual).vassiliev1(id)?.partial_dual(dual))
    }

    /// Id, in the result of [`Self::vassiliev2`], of the marked arc.
    pub fn vassiliev2_marked_arc(&self, id: usize, fixed: usize) -> Result<usize, RibbonError> {
        self.check_fixed(id, fixed)?;
        self.partial_dual(IndexSet::from_indices([fixed])).vassiliev1_marked_arc(id)
    }

    /// The two edges at the ends of arc `id`.
    pub fn arc_edges(&self, id: usize) -> Result<(usize, usize), RibbonError> {
        let (x, y) = self.arc(id)?;
        Ok((x / 4 + 1, y / 4 + 1))
    }

    /// Connected components as sorted edge-label lists, ordered by smallest label.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.edge_count();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![];
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(e) = stack.pop() {
                members.push(e + 1);
                for k in 0..4 {
                    let f = self.arcs[4 * e + k] / 4;
                    if comp[f] == usize::MAX {
                        comp[f] = id;
                        stack.push(f);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// The subgraph on `edges` (closed under arcs), renumbered increasingly.
    pub fn restrict(&self, edges: &[usize]) -> RibbonGraph {
        let mut new_label = vec![usize::MAX; self.edge_count()];
        for (k, &e) in edges.iter().enumerate() {
            new_label[e - 1] = k;
        }
        let relabel = |c: usize| 4 * new_label[c / 4] + c % 4;
        let mut arcs = vec![0; 4 * edges.len()];
        for &e in edges {
            for k in 0..4 {
                let c = 4 * (e - 1) + k;
                assert!(new_label[self.arcs[c] / 4] != usize::MAX, "edge set is not closed under arcs");
                arcs[relabel(c)] = relabel(self.arcs[c]);
            }
        }
        RibbonGraph {
            attach: edges.iter().map(|&e| self.attach[e - 1]).collect(),
            side: edges.iter().map(|&e| self.side[e - 1]).collect(),
            arcs,
        }
    }

    /// Isomorphism fixing every edge label: corners may be relabelled within
    /// each edge as long as all three matchings are respected.
    pub fn equivalent(&self, other: &RibbonGraph) -> bool {
        let n = self.edge_count();
        if n != other.edge_count() {
            return false;
        }
        // A relabelling of edge e is a fixed linear bijection sending self's
        // matchings to other's, followed by `slot -> slot ^ g[e]`. The arcs
        // determine every g[e] in a component once the root's is chosen.
        let Some(base) = (0..n).map(|e| slot_bijection(self.attach[e], self.side[e], other.attach[e], other.side[e])).collect::<Option<Vec<_>>>()
        else {
            return false;
        };
        let map_slot = |e: usize, g: usize, slot: usize| base[e][slot] ^ g;
        let mut assigned: Vec<Option<usize>> = vec![None; n];
        for comp in self.components() {
            let root = comp[0] - 1;
            let mut ok = false;
            for g0 in 0..4 {
                let mut trial = assigned.clone();
                trial[root] = Some(g0);
                let mut stack = vec![root];
                let mut consistent = true;
                'walk: while let Some(e) = stack.pop() {
                    let g = trial[e].unwrap();
                    for k in 0..4 {
                        let c = 4 * e + k;
                        let image = 4 * e + map_slot(e, g, k);
                        let d = self.arcs[c];
                        let target = other.arcs[image];
                        let (f, fslot) = (d / 4, d % 4);
                        if target / 4 != f {
                            consistent = false;
                            break 'walk;
                        }
                        // g_f must send base[f][fslot] to target % 4
                        let needed = base[f][fslot] ^ (target % 4);
                        match trial[f] {
                            None => {
                                trial[f] = Some(needed);
                                stack.push(f);
                            }
                            Some(h) if h == needed => {}
                            Some(_) => {
                                consistent = false;
                                break 'walk;
                            }
                        }
                    }
                }
                if consistent {
                    assigned = trial;
                    ok = true;
                    break;
                }
            }
            if !ok {
                return false;
            }
        }
        true
    }

    /// A rotation system describing this graph (up to corner relabelling).
    ///
    /// Graphs built by [`Self::from_rotation`] come back as words that rebuild
    /// the identical corner model.
    pub fn to_rotation(&self) -> RotationSystem {
        let n = self.edge_count();
        let circles = self.vertex_circles();
        let place = self.corner_places(&circles);
        let plan = self.reading_plan_exact(&circles).unwrap_or_else(|| self.reading_plan_oriented(&circles, &place));

        let mut words = Vec::with_capacity(plan.len());
        // entering corner of the first-read and second-read segment of each edge
        let mut first: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut twisted = vec![false; n];
        for segments in &plan {
            let mut word = Vec::with_capacity(segments.len());
            for &(cin, cout) in segments {
                let e = cin / 4;
                word.push(e + 1);
                match first[e] {
                    None => first[e] = Some((cin, cout)),
                    Some((in1, _)) => twisted[e] = Self::partner(in1, self.side[e]) != cout,
                }
            }
            words.push(word);
        }
        RotationSystem { edges: n, words, twisted }
    }

    /// Reading plan reproducing the corner labels exactly, if this graph has
    /// the shape `from_rotation` produces.
    fn reading_plan_exact(&self, circles: &[VertexCircle]) -> Option<Vec<Vec<(usize, usize)>>> {
        if self.attach.iter().any(|&a| a != Matching::PAIRS_01_23) {
            return None;
        }
        let mut plans = Vec::with_capacity(circles.len());
        for circle in circles {
            let cs: Vec<usize> = circle.corners.iter().map(|c| c.0).collect();
            let mut segments: Vec<(usize, usize)> = cs.chunks(2).map(|p| (p[0], p[1])).collect();
            if segments.iter().all(|&(i, _)| i % 2 == 1) {
                segments.reverse();
                segments.iter_mut().for_each(|s| *s = (s.1, s.0));
            } else if !segments.iter().all(|&(i, _)| i % 2 == 0) {
                return None;
            }
            let len = segments.len();
            let start = (0..len).find(|&s| {
                let mut seen_second = BTreeSet::new();
                for k in 0..len {
                    let (cin, _) = segments[(s + k) % len];
                    if cin % 4 == 2 {
                        seen_second.insert(cin / 4);
                    } else if seen_second.contains(&(cin / 4)) {
                        return false;
                    }
                }
                true
            })?;
            segments.rotate_left(start);
            plans.push(segments);
        }
        // circle holding an edge's first segment precedes the one holding its second
        let k = plans.len();
        let mut circle_of = vec![(0, 0); self.edge_count()];
        for (ci, segs) in plans.iter().enumerate() {
            for &(cin, _) in segs {
                if cin % 4 == 0 {
                    circle_of[cin / 4].0 = ci;
                } else {
                    circle_of[cin / 4].1 = ci;
                }
            }
        }
        let mut indegree = vec![0usize; k];
        let mut after: Vec<Vec<usize>> = vec![Vec::new(); k];
        for &(a, b) in &circle_of {
            if a != b {
                after[a].push(b);
                indegree[b] += 1;
            }
        }
        let mut ready: BTreeSet<usize> = (0..k).filter(|&c| indegree[c] == 0).collect();
        let mut order = Vec::with_capacity(k);
        while let Some(c) = ready.pop_first() {
            order.push(c);
            for &d in &after[c] {
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        if order.len() != k {
            return None;
        }
        let mut plans: Vec<Option<Vec<(usize, usize)>>> = plans.into_iter().map(Some).collect();
        Some(order.into_iter().map(|c| plans[c].take().unwrap()).collect())
    }

    /// Reading plan with circle directions chosen to untwist as many edges as possible.
    fn reading_plan_oriented(&self, circles: &[VertexCircle], place: &[(usize, bool)]) -> Vec<Vec<(usize, usize)>> {
        let (forward, _) = self.orient(circles, place);
        circles
            .iter()
            .zip(forward)
            .map(|(circle, fwd)| {
                let cs: Vec<usize> = circle.corners.iter().map(|c| c.0).collect();
                let mut segments: Vec<(usize, usize)> = cs.chunks(2).map(|p| (p[0], p[1])).collect();
                if !fwd {
                    // same circle read backwards, still starting at the smallest corner's segment
                    segments.reverse();
                    segments.iter_mut().for_each(|s| *s = (s.1, s.0));
                    segments.rotate_right(1);
                }
                segments
            })
            .collect()
    }
}

/// Slot bijection `σ` with `σ(a) = b`, `σ(s) = t` as matchings, normalised so
/// that `σ(0) = 0`; `None` if the pairs are incompatible.
fn slot_bijection(a: Matching, s: Matching, b: Matching, t: Matching) -> Option<[usize; 4]> {
    // σ(k) = sigma[k]; need sigma[k ^ a] = sigma[k] ^ b and sigma[k ^ s] = sigma[k] ^ t
    let mut sigma = [usize::MAX; 4];
    sigma[0] = 0;
    sigma[a.0 as usize] = b.0 as usize;
    sigma[s.0 as usize] = t.0 as usize;
    sigma[(a.0 ^ s.0) as usize] = (b.0 ^ t.0) as usize;
    let valid = b != t && {
        let mut seen = [false; 4];
        sigma.iter().all(|&v| v < 4 && !std::mem::replace(&mut seen[v], true))
    };
    valid.then_some(sigma)
}

impl fmt::Debug for RibbonGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RibbonGraph")
            .field("attach", &self.attach.iter().map(|m| m.0).collect::<Vec<_>>())
            .field("side", &self.side.iter().map(|m| m.0).collect::<Vec<_>>())
            .field("arcs", &self.arcs())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn rotation(edges: usize, words: &[&[usize]], twisted: &[usize]) -> RotationSystem {
        RotationSystem::new(edges, words.iter().map(|w| w.to_vec()).collect(), twisted).unwrap()
    }

    fn graph(edges: usize, words: &[&[usize]], twisted: &[usize]) -> RibbonGraph {
        RibbonGraph::from_rotation(&rotation(edges, words, twisted))
    }

    fn chord(word: &[usize], twisted: &[usize]) -> RibbonGraph {
        RibbonGraph::chord_diagram(word, twisted).unwrap()
    }

    fn counts(g: &RibbonGraph) -> (usize, usize, i64, bool) {
        (g.vertex_count(), g.boundary_count(), g.euler_characteristic(), g.is_orientable())
    }

    /// Boundary components by the signed face-tracing walk on darts.
    fn faces_oracle(rs: &RotationSystem) -> usize {
        let darts: Vec<(usize, usize)> =
            rs.words().iter().enumerate().flat_map(|(v, w)| (0..w.len()).map(move |k| (v, k))).collect();
        let index = |v: usize, k: usize| darts.iter().position(|&d| d == (v, k)).unwrap();
        let other = |v: usize, k: usize| {
            let l = rs.words()[v][k];
            darts.iter().copied().find(|&(u, j)| (u, j) != (v, k) && rs.words()[u][j] == l).unwrap()
        };
        let m = darts.len();
        let mut seen = vec![false; 2 * m];
        let mut orbits = 0;
        for start in 0..2 * m {
            if seen[start] {
                continue;
            }
            orbits += 1;
            let mut s = start;
            while !seen[s] {
                seen[s] = true;
                let (v, k) = darts[s % m];
                let forward = s < m;
                let (u, j) = other(v, k);
                let forward = forward ^ rs.is_twisted(rs.words()[v][k]);
                let len = rs.words()[u].len();
                let j = if forward { (j + 1) % len } else { (j + len - 1) % len };
                s = index(u, j) + if forward { 0 } else { m };
            }
        }
        orbits / 2
    }

    /// Orientable iff some set of vertex flips untwists every edge.
    fn orientable_oracle(rs: &RotationSystem) -> bool {
        let k = rs.words().len();
        (0..1u32 << k).any(|flips| {
            let mut r = rs.clone();
            for v in 0..k {
                if flips >> v & 1 == 1 {
                    r = r.flip_vertex(v + 1);
                }
            }
            r.twisted().is_empty()
        })
    }

    #[test]
    fn count_examples() {
        assert_eq!(counts(&graph(1, &[&[1], &[1]], &[])), (2, 1, 1, true));
        assert_eq!(counts(&chord(&[1, 2, 1, 2], &[])), (1, 1, -1, true));
        assert_eq!(counts(&chord(&[1, 1], &[])), (1, 2, 0, true));
        let mobius = chord(&[1, 1], &[1]);
        assert_eq!(mobius.boundary_count(), 1);
        assert!(!mobius.is_orientable());
    }

    #[test]
    fn rejects_bad_rotations() {
        assert_eq!(
            RotationSystem::new(2, vec![vec![1, 2, 1]], &[]),
            Err(RibbonError::LabelMultiplicity { label: 2, count: 1 })
        );
        assert_eq!(
            RotationSystem::new(1, vec![vec![1, 3]], &[]),
            Err(RibbonError::LabelOutOfRange { label: 3, edges: 1 })
        );
        assert_eq!(RotationSystem::new(1, vec![vec![1, 1], vec![]], &[]), Err(RibbonError::EmptyVertex { vertex: 2 }));
    }

    #[test]
    fn from_parts_validates() {
        let m = Matching::PAIRS_01_23;
        assert!(RibbonGraph::from_parts(vec![m], vec![m], vec![1, 0, 3, 2]).is_err());
        assert!(RibbonGraph::from_parts(vec![m], vec![Matching::PAIRS_03_12], vec![1, 0, 3, 3]).is_err());
        let g = RibbonGraph::from_parts(vec![m], vec![Matching::PAIRS_03_12], vec![3, 2, 1, 0]).unwrap();
        assert_eq!(g, chord(&[1, 1], &[]));
    }

    #[test]
    fn partial_dual_examples() {
        let annulus = chord(&[1, 1], &[]);
        let dual = annulus.partial_dual(IndexSet::from_indices([1]));
        assert_eq!(dual.vertex_count(), 2);
        assert!(dual.equivalent(&graph(1, &[&[1], &[1]], &[])));
        let mobius = chord(&[1, 1], &[1]);
        let dual = mobius.partial_dual(IndexSet::from_indices([1]));
        assert_eq!(dual.vertex_count(), 1);
        assert!(dual.equivalent(&mobius));
        let one = IndexSet::from_indices([1]);
        assert_eq!(annulus.partial_dual(one).partial_dual(one), annulus);
    }

    #[test]
    fn vassiliev1_examples() {
        let g = chord(&[1, 2, 1, 2], &[]);
        let middle = g.arc_id(Corner::new(1, 2));
        assert_eq!(g.arc_edges(middle).unwrap(), (1, 2));
        let moved = g.vassiliev1(middle).unwrap();
        assert_eq!(moved, chord(&[1, 1, 2, 2], &[]));
        let back = moved.vassiliev1(g.vassiliev1_marked_arc(middle).unwrap()).unwrap();
        assert_eq!(back, g);

        let h = chord(&[1, 1, 2, 2], &[]);
        let between = h.arc_id(Corner::new(1, 3));
        assert_eq!(h.arc_edges(between).unwrap(), (1, 2));
        assert_eq!(h.vassiliev1(between).unwrap(), g);
    }

    #[test]
    fn vassiliev_rejects_single_half_edge() {
        let g = graph(2, &[&[1], &[1, 2, 2]], &[]);
        let lone = g.arc_id(Corner::new(1, 1));
        assert_eq!(g.vassiliev1(lone), Err(RibbonError::DegenerateArc { arc: lone }));
        assert!(matches!(g.vassiliev1(99), Err(RibbonError::ArcOutOfRange { arc: 99, .. })));
        let g = chord(&[1, 2, 1, 2], &[]);
        let outer = g.arc_id(Corner::new(1, 0));
        assert_eq!(g.vassiliev2(outer, 1), Ok(g.vassiliev2(outer, 1).unwrap()));
        let middle = g.arc_id(Corner::new(1, 2));
        assert_eq!(g.vassiliev2(middle, 3), Err(RibbonError::FixedNotOnArc { edge: 3, arc: middle }));
    }

    #[test]
    fn vassiliev2_hand_example() {
        // Traced by hand: the dual of the twisted chord 1 is a second vertex
        // circle; sliding chord 2's end across it and dualising back leaves
        // one vertex with word (1 1 2 2) and both chords twisted.
        let g = chord(&[1, 2, 1, 2], &[1]);
        let middle = g.arc_id(Corner::new(1, 2));
        let moved = g.vassiliev2(middle, 1).unwrap();
        let c = |e, k| Corner::new(e, k).index();
        let mut arcs = vec![0; 8];
        for (a, b) in [(c(2, 1), c(2, 3)), (c(2, 0), c(1, 0)), (c(1, 2), c(1, 1)), (c(1, 3), c(2, 2))] {
            arcs[a] = b;
            arcs[b] = a;
        }
        let expected = RibbonGraph::from_parts(
            vec![Matching::PAIRS_01_23; 2],
            vec![Matching::PAIRS_02_13, Matching::PAIRS_03_12],
            arcs,
        )
        .unwrap();
        assert_eq!(moved, expected);
        assert!(moved.equivalent(&chord(&[1, 1, 2, 2], &[1, 2])));
        let marked = g.vassiliev2_marked_arc(middle, 1).unwrap();
        assert_eq!(moved.vassiliev2(marked, 1).unwrap(), g);
    }

    #[test]
    fn rotation_round_trip_examples() {
        for rs in [
            rotation(2, &[&[2, 1, 2, 1]], &[2]),
            rotation(3, &[&[3], &[1, 3, 2], &[2, 1]], &[1]),
            rotation(2, &[&[2], &[1, 1], &[2]], &[1, 2]),
            rotation(0, &[], &[]),
        ] {
            let g = RibbonGraph::from_rotation(&rs);
            assert_eq!(RibbonGraph::from_rotation(&g.to_rotation()), g, "{rs:?}");
        }
    }

    #[test]
    fn equivalence_detects_differences() {
        let a = chord(&[1, 2, 1, 2], &[]);
        let b = chord(&[1, 1, 2, 2], &[]);
        assert!(!a.equivalent(&b));
        assert!(!a.equivalent(&chord(&[1, 2, 1, 2], &[2])));
        assert!(a.equivalent(&chord(&[2, 1, 2, 1], &[])));
        assert!(a.equivalent(&a.partial_dual(IndexSet::from_indices([1, 2])).partial_dual(IndexSet::from_indices([1, 2]))));
    }

    #[test]
    fn components_and_restriction() {
        let g = graph(3, &[&[2, 2], &[1, 3], &[3, 1]], &[2]);
        assert_eq!(g.components(), vec![vec![1, 3], vec![2]]);
        assert!(g.restrict(&[2]).equivalent(&chord(&[1, 1], &[1])));
        assert!(g.restrict(&[1, 3]).equivalent(&graph(2, &[&[1, 2], &[2, 1]], &[])));
    }

    fn random_graph(rng: &mut ChaCha8Rng, max_edges: usize) -> (RotationSystem, RibbonGraph) {
        let n = rng.random_range(1..=max_edges);
        let rs = RotationSystem::random(rng, n);
        let g = RibbonGraph::from_rotation(&rs);
        (rs, g)
    }

    #[test]
    fn counts_match_face_tracing_and_flip_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..400 {
            let (rs, g) = random_graph(&mut rng, 5);
            assert_eq!(g.vertex_count(), rs.words().len());
            assert_eq!(g.boundary_count(), faces_oracle(&rs), "{rs:?}");
            assert_eq!(g.is_orientable(), orientable_oracle(&rs), "{rs:?}");
        }
    }

    #[test]
    fn serialization_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..400 {
            let (rs, g) = random_graph(&mut rng, 7);
            assert_eq!(RibbonGraph::from_rotation(&g.to_rotation()), g, "{rs:?}");
            let dual = g.partial_dual(IndexSet::from_mask(rng.random::<u64>() & ((1 << g.edge_count()) - 1)));
            let back = RibbonGraph::from_rotation(&dual.to_rotation());
            assert!(back.equivalent(&dual), "{rs:?}");
            assert_eq!(counts(&back), counts(&dual));
        }
    }

    #[test]
    fn vertex_flip_is_relabelling() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let (rs, g) = random_graph(&mut rng, 6);
            let v = rng.random_range(1..=rs.words().len());
            let h = RibbonGraph::from_rotation(&rs.flip_vertex(v));
            assert!(g.equivalent(&h) && h.equivalent(&g), "{rs:?} flip {v}");
            assert_eq!(counts(&g), counts(&h));
        }
    }

    #[test]
    fn moves_are_involutions_and_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut checked = 0;
        while checked < 400 {
            let (_, g) = random_graph(&mut rng, 6);
            let id = rng.random_range(0..2 * g.edge_count());
            let Ok(v1) = g.vassiliev1(id) else { continue };
            let (a, b) = g.arc_edges(id).unwrap();
            let fixed = if rng.random() { a } else { b };
            let Ok(v2) = g.vassiliev2(id, fixed) else { continue };
            let m1 = g.vassiliev1_marked_arc(id).unwrap();
            let m2 = g.vassiliev2_marked_arc(id, fixed).unwrap();
            assert_eq!(v1.vassiliev1(m1).unwrap(), g);
            assert_eq!(v2.vassiliev2(m2, fixed).unwrap(), g);
            assert_eq!(v1.edge_count(), g.edge_count());
            assert_eq!(v1.degree_sequence(), g.degree_sequence());
            // sliding along a non-loop edge carries the end to the other vertex
            let loop_edge = g.vertex_circles().iter().any(|c| c.labels().iter().filter(|&&l| l == fixed).count() == 2);
            if loop_edge {
                assert_eq!(v2.degree_sequence(), g.degree_sequence());
            }
            assert_eq!(v2.degree_sequence().iter().sum::<usize>(), 2 * g.edge_count());
            let (va, vb) = (counts(&v2), counts(&g));
            assert_eq!(va, vb);
            let both = v1.vassiliev2(m1, fixed).unwrap();
            let other = v2.vassiliev1(m2).unwrap();
            assert!(both.equivalent(&other), "{g:?} arc {id} fixed {fixed}");
            checked += 1;
        }
    }

    #[test]
    fn cycle_counts_are_even() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..200 {
            let (_, g) = random_graph(&mut rng, 8);
            let dual = g.partial_dual(IndexSet::from_mask(rng.random::<u64>() & ((1 << g.edge_count()) - 1)));
            assert_eq!(dual.count_cycles(&dual.attach) % 2, 0);
            assert_eq!(dual.count_cycles(&dual.side) % 2, 0);
        }
    }

    proptest! {
        #[test]
        fn partial_duals_form_a_group(seed in any::<u64>(), a in 0u64..256, b in 0u64..256) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (_, g) = random_graph(&mut rng, 8);
            let mask = (1u64 << g.edge_count()) - 1;
            let (x, y) = (IndexSet::from_mask(a & mask), IndexSet::from_mask(b & mask));
            prop_assert_eq!(g.partial_dual(x).partial_dual(y), g.partial_dual(x.symmetric_difference(y)));
            prop_assert_eq!(g.partial_dual(x).partial_dual(y), g.partial_dual(y).partial_dual(x));
            prop_assert_eq!(g.partial_dual(x).partial_dual(x), g);
        }
    }
}
