//! The homology map φ_G and intersection matrices.
//!
//! Cycles of the punctured surface are read off the 4-valent graph Γ whose
//! vertices are the edges of `G` and whose edges are the arcs. A cycle of Γ
//! enters and leaves edge `e` through 0, 2 or 4 of its corners; two corners
//! contribute according to which matching pairs them.

use std::collections::VecDeque;

use thiserror::Error;

use crate::f2sympl::{Lagrangian, Subspace, SympVector, SymplecticError, MAX_GRADE};
use crate::matrixops::FramedGraphMatrix;
use crate::ribbon::{Corner, RibbonGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HomomapError {
    #[error("expected a one-vertex ribbon graph, found {vertices} vertices")]
    NotOneVertex { vertices: usize },
    #[error("ribbon graph has {edges} edges; at most {max} supported")]
    TooManyEdges { edges: usize, max: usize },
    #[error("combinatorial and homological intersection matrices disagree")]
    Inconsistent,
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
}

/// How a cycle passes an edge through two of its corners.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionClass {
    /// Through one attach segment: crosses the co-core, contributes `f_e`.
    AttachPair,
    /// Along one side of the ribbon: crosses the core, contributes `e_e`.
    SidePair,
    /// Diagonally across the ribbon: contributes `e_e + f_e`.
    DiagonalPair,
}

impl TransitionClass {
    pub fn classify(g: &RibbonGraph, a: Corner, b: Corner) -> TransitionClass {
        assert!(a.edge() == b.edge() && a != b);
        if g.attach_partner(a) == b {
            TransitionClass::AttachPair
        } else if g.side_partner(a) == b {
            TransitionClass::SidePair
        } else {
            TransitionClass::DiagonalPair
        }
    }

    /// `(e bit, f bit)` of the contribution.
    pub fn bits(self) -> (bool, bool) {
        match self {
            TransitionClass::AttachPair => (false, true),
            TransitionClass::SidePair => (true, false),
            TransitionClass::DiagonalPair => (true, true),
        }
    }
}

fn check_size(g: &RibbonGraph) -> Result<usize, HomomapError> {
    let n = g.edge_count();
    if n > MAX_GRADE {
        return Err(HomomapError::TooManyEdges { edges: n, max: MAX_GRADE });
    }
    Ok(n)
}

/// φ of a Γ-cycle given as a set of arc ids (each used once).
pub fn cycle_image(g: &RibbonGraph, arcs: &[usize]) -> Result<SympVector, HomomapError> {
    let n = check_size(g)?;
    let all = g.arcs();
    let mut covered = vec![0u8; n];
    for &id in arcs {
        let (x, y) = all[id];
        covered[x.edge() - 1] ^= 1 << x.slot();
        covered[y.edge() - 1] ^= 1 << y.slot();
    }
    let (mut e, mut f) = (0u64, 0u64);
    for (k, &mask) in covered.iter().enumerate() {
        match mask.count_ones() {
            0 | 4 => {}
            2 => {
                let a = mask.trailing_zeros() as usize;
                let b = 7 - mask.leading_zeros() as usize;
                let (de, df) = TransitionClass::classify(g, Corner::new(k + 1, a), Corner::new(k + 1, b)).bits();
                e |= (de as u64) << k;
                f |= (df as u64) << k;
            }
            _ => panic!("arc set {arcs:?} is not a cycle of the corner graph"),
        }
    }
    Ok(SympVector::from_parts(n, e, f)?)
}

/// Fundamental cycles of Γ for a breadth-first spanning forest rooted at the
/// lowest edge of each component, arcs taken in id order.
pub fn fundamental_cycles(g: &RibbonGraph) -> Vec<Vec<usize>> {
    let n = g.edge_count();
    let arcs = g.arcs();
    let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(x, y)) in arcs.iter().enumerate() {
        let (u, v) = (x.edge() - 1, y.edge() - 1);
        adjacency[u].push((id, v));
        if u != v {
            adjacency[v].push((id, u));
        }
    }
    // parent arc and depth for every Γ-vertex
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut in_tree = vec![false; arcs.len()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(id, v) in &adjacency[u] {
                if depth[v] == usize::MAX {
                    depth[v] = depth[u] + 1;
                    parent[v] = Some((id, u));
                    in_tree[id] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    let mut cycles = Vec::new();
    for (id, &(x, y)) in arcs.iter().enumerate() {
        if in_tree[id] {
            continue;
        }
        let mut cycle = vec![id];
        let (mut u, mut v) = (x.edge() - 1, y.edge() - 1);
        while u != v {
            if depth[u] < depth[v] {
                std::mem::swap(&mut u, &mut v);
            }
            let (arc, up) = parent[u].expect("non-root vertex has a parent");
            cycle.push(arc);
            u = up;
        }
        cycles.push(cycle);
    }
    cycles
}

/// The image of φ_G, computed without assuming it is Lagrangian.
pub fn phi_image(g: &RibbonGraph) -> Result<Subspace, HomomapError> {
    let n = check_size(g)?;
    let images = fundamental_cycles(g)
        .iter()
        .map(|c| cycle_image(g, c))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(crate::f2sympl::span(n, &images)?)
}

/// The L-space of `G`.
pub fn lspace(g: &RibbonGraph) -> Result<Lagrangian, HomomapError> {
    Ok(Lagrangian::new(phi_image(g)?)?)
}

/// Intersection matrix of a one-vertex graph from its word: interleaving
/// chords are adjacent, twisted chords are framed.
pub fn intersection_matrix_combinatorial(g: &RibbonGraph) -> Result<FramedGraphMatrix, HomomapError> {
    let vertices = g.vertex_count();
    if vertices != 1 && g.edge_count() > 0 {
        return Err(HomomapError::NotOneVertex { vertices });
    }
    let n = check_size(g)?;
    let rs = g.to_rotation();
    let word: &[usize] = rs.words().first().map(Vec::as_slice).unwrap_or(&[]);
    let mut ends = vec![(usize::MAX, 0); n];
    for (pos, &l) in word.iter().enumerate() {
        let slot = &mut ends[l - 1];
        if slot.0 == usize::MAX {
            slot.0 = pos;
        } else {
            slot.1 = pos;
        }
    }
    let mut rows = vec![0u64; n];
    for i in 0..n {
        if rs.is_twisted(i + 1) {
            rows[i] |= 1 << i;
        }
        for j in 0..n {
            let (a, b) = ends[i];
            let inside = |p: usize| a < p && p < b;
            if i != j && inside(ends[j].0) != inside(ends[j].1) {
                rows[i] |= 1 << j;
            }
        }
    }
    Ok(FramedGraphMatrix::from_row_masks(n, rows).expect("interleaving is symmetric"))
}

/// Intersection matrix read off the L-space, `L = rowspan(Id | A)`.
pub fn intersection_matrix_homological(g: &RibbonGraph) -> Result<FramedGraphMatrix, HomomapError> {
    let vertices = g.vertex_count();
    if vertices != 1 && g.edge_count() > 0 {
        return Err(HomomapError::NotOneVertex { vertices });
    }
    Ok(lspace(g)?.to_matrix()?)
}

/// Intersection matrix of a framed chord diagram; both computations must agree.
pub fn intersection_matrix(g: &RibbonGraph) -> Result<FramedGraphMatrix, HomomapError> {
    let combinatorial = intersection_matrix_combinatorial(g)?;
    if intersection_matrix_homological(g)? != combinatorial {
        return Err(HomomapError::Inconsistent);
    }
    Ok(combinatorial)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::f2sympl::{mu_map, v1_map, v2_map, IndexSet};
    use crate::ribbon::RotationSystem;

    fn chord(word: &[usize], twisted: &[usize]) -> RibbonGraph {
        RibbonGraph::chord_diagram(word, twisted).unwrap()
    }

    fn graph(edges: usize, words: &[&[usize]], twisted: &[usize]) -> RibbonGraph {
        let words = words.iter().map(|w| w.to_vec()).collect();
        RibbonGraph::from_rotation(&RotationSystem::new(edges, words, twisted).unwrap())
    }

    fn rows(g: &RibbonGraph) -> Vec<String> {
        lspace(g).unwrap().basis().map(|v| v.to_string()).collect()
    }

    #[test]
    fn lspace_examples() {
        assert_eq!(rows(&chord(&[1, 1], &[])), ["1|0"]);
        assert_eq!(rows(&chord(&[1, 1], &[1])), ["1|1"]);
        assert_eq!(rows(&chord(&[1, 2, 1, 2], &[])), ["10|01", "01|10"]);
        assert_eq!(rows(&graph(1, &[&[1], &[1]], &[])), ["0|1"]);
    }

    #[test]
    fn intersection_examples() {
        let m = |w: &[usize], t: &[usize]| intersection_matrix(&chord(w, t)).unwrap().to_string();
        assert_eq!(m(&[1, 2, 1, 2], &[]), FramedGraphMatrix::from_rows(&[&[0, 1], &[1, 0]]).unwrap().to_string());
        assert_eq!(m(&[1, 1, 2, 2], &[]), FramedGraphMatrix::zero(2).unwrap().to_string());
        assert_eq!(m(&[1, 2, 1, 2], &[1]), FramedGraphMatrix::from_rows(&[&[1, 1], &[1, 0]]).unwrap().to_string());
        let dumbbell = graph(1, &[&[1], &[1]], &[]);
        assert_eq!(intersection_matrix(&dumbbell), Err(HomomapError::NotOneVertex { vertices: 2 }));
    }

    #[test]
    fn kernel_is_one_dimensional_per_component() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let n = 1 + (rand::Rng::random_range(&mut rng, 0..6));
            let g = RibbonGraph::from_rotation(&RotationSystem::random(&mut rng, n));
            let cycles = fundamental_cycles(&g);
            let components = g.components().len();
            assert_eq!(cycles.len(), n + components);
            assert_eq!(phi_image(&g).unwrap().dim(), n);
            let all: Vec<usize> = (0..2 * n).collect();
            assert!(cycle_image(&g, &all).unwrap().is_zero());
        }
    }

    #[test]
    fn complementary_corner_pairs_agree() {
        // the two corner pairs of one matching give the same contribution
        let g = chord(&[1, 2, 1, 2], &[1]);
        for e in 1..=2 {
            for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)] {
                let p = TransitionClass::classify(&g, Corner::new(e, a), Corner::new(e, b));
                let q = TransitionClass::classify(&g, Corner::new(e, c), Corner::new(e, d));
                assert_eq!(p, q);
            }
        }
    }

    #[test]
    fn commuting_squares_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let n = 1 + rand::Rng::random_range(&mut rng, 0..5);
            let g = RibbonGraph::from_rotation(&RotationSystem::random(&mut rng, n));
            let l = lspace(&g).unwrap();
            let i = 1 + rand::Rng::random_range(&mut rng, 0..n);
            let dual = lspace(&g.partial_dual(IndexSet::from_indices([i]))).unwrap();
            assert_eq!(dual, mu_map(n, i).unwrap().apply(&l).unwrap());
            let id = rand::Rng::random_range(&mut rng, 0..2 * n);
            let (a, b) = g.arc_edges(id).unwrap();
            if let Ok(moved) = g.vassiliev1(id) {
                if a != b {
                    assert_eq!(lspace(&moved).unwrap(), v1_map(n, a, b).unwrap().apply(&l).unwrap(), "{g:?} arc {id}");
                } else {
                    assert_eq!(lspace(&moved).unwrap(), l);
                }
                if a != b {
                    let moved2 = g.vassiliev2(id, a).unwrap();
                    assert_eq!(lspace(&moved2).unwrap(), v2_map(n, a, b).unwrap().apply(&l).unwrap());
                }
            }
        }
    }

    #[test]
    fn vertex_flip_keeps_lspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = 1 + rand::Rng::random_range(&mut rng, 0..6);
            let rs = RotationSystem::random(&mut rng, n);
            let v = 1 + rand::Rng::random_range(&mut rng, 0..rs.words().len());
            let g = RibbonGraph::from_rotation(&rs);
            let h = RibbonGraph::from_rotation(&rs.flip_vertex(v));
            assert!(g.equivalent(&h));
            assert_eq!(lspace(&g).unwrap(), lspace(&h).unwrap());
        }
    }
}
