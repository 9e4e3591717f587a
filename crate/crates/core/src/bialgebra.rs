//! The bialgebra of permutation orbits of Lagrangians and its four-term quotient.
//!
//! Grade `n` has one basis element per `S_n`-orbit of Lagrangians in
//! `F₂^{2n}`, where `S_n` permutes the indices of `e_i` and `f_i` together.
//! The product is the direct sum and the coproduct sums the symplectic
//! reductions over all splittings of the index set. The quotient `K` kills
//! the ideal generated by the four-elements `L − v₁L − v₂L + v₁v₂L`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::f2sympl::{
    lagrangian_count, lagrangians_with_bound, permute_bits, reduced_basis, v1_map, v2_map, IndexSet, Lagrangian,
    Subspace, SymplecticError,
};
use crate::homomap::{lspace, HomomapError};
use crate::ribbon::{RibbonGraph, RotationSystem};

/// Largest grade [`canonicalize`] accepts by default.
pub const DEFAULT_CANONICAL_BOUND: usize = 8;

/// Largest grade the dimension pipeline enumerates by default.
pub const DEFAULT_DIMENSION_BOUND: usize = 5;

/// The two primes used for exact rank; both below `2^31` so products fit in `u64`.
pub const RANK_PRIMES: [u64; 2] = [2_147_483_647, 1_000_000_007];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BialgebraError {
    #[error("grade {grade} exceeds the bound {bound}")]
    BoundExceeded { grade: usize, bound: usize },
    #[error("index {index} out of range 1..={grade}")]
    IndexOutOfRange { index: usize, grade: usize },
    #[error("four-element indices must differ, got ({index}, {index})")]
    RepeatedIndex { index: usize },
    #[error("rank disagreement: {first} mod {p} but {second} mod {q}")]
    RankDisagreement { first: usize, p: u64, second: usize, q: u64 },
    #[error("grade {grade}: {direct} orbits by canonicalization but {burnside} by Burnside")]
    OrbitCountMismatch { grade: usize, direct: usize, burnside: usize },
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
    #[error(transparent)]
    Homomap(#[from] HomomapError),
}

/// An `S_n`-orbit of Lagrangians, stored as the minimal reduced basis over
/// the permutations that sort the per-index invariants.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrbitClass {
    grade: usize,
    rows: Vec<u64>,
}

impl OrbitClass {
    /// The class of the zero Lagrangian in grade 0.
    pub fn unit() -> Self {
        OrbitClass { grade: 0, rows: Vec::new() }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    /// The canonical representative.
    pub fn representative(&self) -> Lagrangian {
        Lagrangian::from_subspace_unchecked(Subspace::from_reduced(self.grade, self.rows.clone()))
    }
}

impl fmt::Debug for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.representative().basis().map(|v| v.to_string()).collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Per-index data that any relabelling carries along: the reduction to the
/// index alone and the multiset of ordered reductions to pairs through it.
fn index_invariants(l: &Lagrangian) -> Vec<(Vec<u64>, Vec<Vec<u64>>)> {
    let n = l.grade();
    (1..=n)
        .map(|i| {
            let single = l.reduce(IndexSet::from_indices([i])).expect("index in range").row_bits().to_vec();
            let mut pairs: Vec<Vec<u64>> = (1..=n)
                .filter(|&j| j != i)
                .map(|j| {
                    let r = l.reduce(IndexSet::from_indices([i, j])).expect("indices in range");
                    let r = if i < j { r } else { r.permute(&[1, 0]) };
                    r.row_bits().to_vec()
                })
                .collect();
            pairs.sort_unstable();
            (single, pairs)
        })
        .collect()
}

pub fn canonicalize(l: &Lagrangian) -> Result<OrbitClass, BialgebraError> {
    canonicalize_with_bound(l, DEFAULT_CANONICAL_BOUND)
}

/// Minimal reduced basis over the permutations that sort the index
/// invariants. Those permutations move any two members of an orbit onto the
/// same set of images, so the minimum is an orbit invariant.
pub fn canonicalize_with_bound(l: &Lagrangian, bound: usize) -> Result<OrbitClass, BialgebraError> {
    let n = l.grade();
    if n > bound {
        return Err(BialgebraError::BoundExceeded { grade: n, bound });
    }
    let invariants = index_invariants(l);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| invariants[a].cmp(&invariants[b]));
    // block[p] = first sorted position sharing position p's invariant
    let mut block_start = vec![0; n];
    for p in 1..n {
        block_start[p] = if invariants[order[p]] == invariants[order[p - 1]] { block_start[p - 1] } else { p };
    }
    let mut best: Option<Vec<u64>> = None;
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(l, &order, &block_start, 0, &mut perm, &mut used, &mut best);
    Ok(OrbitClass { grade: n, rows: best.unwrap_or_default() })
}

/// Fills sorted position `pos` with an unused member of its block.
fn search(
    l: &Lagrangian,
    order: &[usize],
    block_start: &[usize],
    pos: usize,
    perm: &mut [usize],
    used: &mut [bool],
    best: &mut Option<Vec<u64>>,
) {
    let n = order.len();
    if pos == n {
        let rows = reduced_basis(l.row_bits().iter().map(|&b| permute_bits(n, b, perm)));
        if best.as_ref().is_none_or(|b| rows < *b) {
            *best = Some(rows);
        }
        return;
    }
    let start = block_start[pos];
    let end = (pos..n).find(|&p| p + 1 == n || block_start[p + 1] != start).unwrap() + 1;
    for k in start..end {
        let index = order[k];
        if used[index] {
            continue;
        }
        used[index] = true;
        perm[index] = pos;
        search(l, order, block_start, pos + 1, perm, used, best);
        used[index] = false;
    }
}

/// Canonical class by brute force over all `n!` permutations; a test oracle.
pub fn canonicalize_exhaustive(l: &Lagrangian) -> OrbitClass {
    let n = l.grade();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best: Option<Vec<u64>> = None;
    loop {
        let rows = reduced_basis(l.row_bits().iter().map(|&b| permute_bits(n, b, &perm)));
        if best.as_ref().is_none_or(|b| rows < *b) {
            best = Some(rows);
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    OrbitClass { grade: n, rows: best.unwrap_or_default() }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// `[L₁]·[L₂] = [L₁ ⊕ L₂]`.
pub fn product(x: &OrbitClass, y: &OrbitClass) -> Result<OrbitClass, BialgebraError> {
    canonicalize(&x.representative().direct_sum(&y.representative())?)
}

/// Formal sums of tensors of classes.
pub type Tensor2 = BTreeMap<(OrbitClass, OrbitClass), i64>;
pub type Tensor3 = BTreeMap<(OrbitClass, OrbitClass, OrbitClass), i64>;

/// `Σ_I [L|_I] ⊗ [L|_{N∖I}]` over all subsets `I`.
pub fn coproduct(x: &OrbitClass) -> Result<Tensor2, BialgebraError> {
    let l = x.representative();
    let n = x.grade;
    let mut out = Tensor2::new();
    for subset in IndexSet::all_subsets(n) {
        let left = canonicalize(&l.reduce(subset)?)?;
        let right = canonicalize(&l.reduce(subset.complement(n))?)?;
        *out.entry((left, right)).or_insert(0) += 1;
    }
    Ok(out)
}

/// `(Δ ⊗ id) Δ`.
pub fn coproduct_left(x: &OrbitClass) -> Result<Tensor3, BialgebraError> {
    let mut out = Tensor3::new();
    for ((a, b), c) in coproduct(x)? {
        for ((a1, a2), d) in coproduct(&a)? {
            *out.entry((a1, a2, b.clone())).or_insert(0) += c * d;
        }
    }
    Ok(out)
}

/// `(id ⊗ Δ) Δ`.
pub fn coproduct_right(x: &OrbitClass) -> Result<Tensor3, BialgebraError> {
    let mut out = Tensor3::new();
    for ((a, b), c) in coproduct(x)? {
        for ((b1, b2), d) in coproduct(&b)? {
            *out.entry((a.clone(), b1, b2)).or_insert(0) += c * d;
        }
    }
    Ok(out)
}

/// `Σ [L|_{I₁}] ⊗ [L|_{I₂}] ⊗ [L|_{I₃}]` over ordered tripartitions.
pub fn tripartition_sum(x: &OrbitClass) -> Result<Tensor3, BialgebraError> {
    let l = x.representative();
    let n = x.grade;
    let mut out = Tensor3::new();
    for first in IndexSet::all_subsets(n) {
        let rest = first.complement(n);
        for second in IndexSet::all_subsets(n).filter(|s| s.is_subset(rest)) {
            let third = IndexSet::from_mask(rest.mask() & !second.mask());
            let key = (
                canonicalize(&l.reduce(first)?)?,
                canonicalize(&l.reduce(second)?)?,
                canonicalize(&l.reduce(third)?)?,
            );
            *out.entry(key).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// Componentwise product `(a⊗b)(c⊗d) = ac ⊗ bd`.
pub fn tensor_product(x: &Tensor2, y: &Tensor2) -> Result<Tensor2, BialgebraError> {
    let mut out = Tensor2::new();
    for ((a, b), c) in x {
        for ((p, q), d) in y {
            *out.entry((product(a, p)?, product(b, q)?)).or_insert(0) += c * d;
        }
    }
    Ok(out)
}

/// A finite integer combination of classes of one grade.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinComb {
    grade: usize,
    terms: BTreeMap<OrbitClass, i64>,
}

impl LinComb {
    pub fn zero(grade: usize) -> Self {
        LinComb { grade, terms: BTreeMap::new() }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn add_term(&mut self, class: OrbitClass, coefficient: i64) {
        assert_eq!(class.grade, self.grade, "mixed grades in a linear combination");
        let c = self.terms.entry(class).or_insert(0);
        *c += coefficient;
        if *c == 0 {
            self.terms.retain(|_, c| *c != 0);
        }
    }

    pub fn coefficient(&self, class: &OrbitClass) -> i64 {
        self.terms.get(class).copied().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OrbitClass, i64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.is_empty()
    }

    /// `self · b`, extended linearly.
    pub fn times(&self, b: &OrbitClass) -> Result<LinComb, BialgebraError> {
        let mut out = LinComb::zero(self.grade + b.grade);
        for (class, c) in self.terms() {
            out.add_term(product(class, b)?, c);
        }
        Ok(out)
    }
}

impl fmt::Debug for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (class, c)) in self.terms().enumerate() {
            let sign = if c < 0 { "-" } else if k > 0 { "+" } else { "" };
            let sep = if k > 0 { " " } else { "" };
            let gap = if k > 0 { " " } else { "" };
            match c.abs() {
                1 => write!(f, "{sep}{sign}{gap}{class}")?,
                a => write!(f, "{sep}{sign}{gap}{a}{class}")?,
            }
        }
        Ok(())
    }
}

/// `[L] − [v₁L] − [v₂L] + [v₁v₂L]` for the ordered pair `(i, j)`.
pub fn four_element(l: &Lagrangian, i: usize, j: usize) -> Result<LinComb, BialgebraError> {
    let n = l.grade();
    for index in [i, j] {
        if index == 0 || index > n {
            return Err(BialgebraError::IndexOutOfRange { index, grade: n });
        }
    }
    if i == j {
        return Err(BialgebraError::RepeatedIndex { index: i });
    }
    let v1 = v1_map(n, i, j)?;
    let v2 = v2_map(n, i, j)?;
    let moved = v2.apply(l)?;
    let mut out = LinComb::zero(n);
    out.add_term(canonicalize(l)?, 1);
    out.add_term(canonicalize(&v1.apply(l)?)?, -1);
    out.add_term(canonicalize(&moved)?, -1);
    out.add_term(canonicalize(&v1.apply(&moved)?)?, 1);
    Ok(out)
}

/// Every orbit class of `grade`, sorted.
pub fn orbit_classes(grade: usize) -> Result<Vec<OrbitClass>, BialgebraError> {
    orbit_classes_with_bound(grade, DEFAULT_DIMENSION_BOUND.max(6))
}

pub fn orbit_classes_with_bound(grade: usize, bound: usize) -> Result<Vec<OrbitClass>, BialgebraError> {
    let all: Vec<Lagrangian> = lagrangians_with_bound(grade, bound)?.collect();
    let classes: BTreeSet<OrbitClass> =
        all.par_iter().map(canonicalize).collect::<Result<Vec<_>, _>>()?.into_iter().collect();
    Ok(classes.into_iter().collect())
}

/// `|LGr(n)/S_n|` by direct canonicalization.
pub fn grade_dimension(grade: usize) -> Result<usize, BialgebraError> {
    Ok(orbit_classes(grade)?.len())
}

/// Partitions of `n` in decreasing-part order.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            go(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Orbit count by Burnside's lemma: `(1/n!) Σ_π |Fix(π)|`, summed by cycle type.
pub fn burnside_orbit_count(grade: usize) -> Result<usize, BialgebraError> {
    let all: Vec<Lagrangian> = lagrangians_with_bound(grade, DEFAULT_DIMENSION_BOUND.max(6))?.collect();
    let mut total: u128 = 0;
    for shape in partitions(grade) {
        // a permutation with this cycle type: consecutive cycles
        let mut perm = Vec::with_capacity(grade);
        let mut start = 0;
        for &len in &shape {
            perm.extend((0..len).map(|k| start + (k + 1) % len));
            start += len;
        }
        let mut multiplicity: HashMap<usize, usize> = HashMap::new();
        for &len in &shape {
            *multiplicity.entry(len).or_insert(0) += 1;
        }
        let centralizer: u128 =
            multiplicity.iter().map(|(&len, &m)| (len as u128).pow(m as u32) * factorial(m)).product();
        let class_size = factorial(grade) / centralizer;
        let fixed = all.par_iter().filter(|l| l.permute(&perm) == **l).count() as u128;
        total += class_size * fixed;
    }
    assert_eq!(total % factorial(grade), 0, "Burnside sum is not divisible by n!");
    Ok((total / factorial(grade)) as usize)
}

/// Sparse integer row over a fixed column indexing.
type Row = Vec<(usize, i64)>;

fn normalize(mut row: Row) -> Option<Row> {
    row.retain(|&(_, c)| c != 0);
    row.sort_unstable();
    let first = row.first()?.1;
    if first < 0 {
        row.iter_mut().for_each(|t| t.1 = -t.1);
    }
    Some(row)
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let (mut base, mut exp, mut acc) = (a % p, p - 2, 1u64);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Rank over `F_p` by incremental elimination against sparse pivot rows.
pub fn rank_mod(rows: &[Row], columns: usize, p: u64) -> usize {
    let mut pivots: Vec<Option<Vec<(usize, u64)>>> = vec![None; columns];
    let mut rank = 0;
    let mut dense = vec![0u64; columns];
    for row in rows {
        if rank == columns {
            break;
        }
        for &(c, v) in row {
            dense[c] = v.rem_euclid(p as i64) as u64;
        }
        let mut lead = row.iter().map(|t| t.0).min();
        while let Some(c) = lead {
            let f = dense[c];
            if f == 0 {
                lead = (c + 1..columns).find(|&k| dense[k] != 0);
                continue;
            }
            match &pivots[c] {
                Some(pivot) => {
                    for &(k, v) in pivot {
                        dense[k] = (dense[k] + p - f * v % p) % p;
                    }
                    lead = (c + 1..columns).find(|&k| dense[k] != 0);
                }
                None => {
                    let inv = inverse_mod(f, p);
                    let stored: Vec<(usize, u64)> =
                        (c..columns).filter(|&k| dense[k] != 0).map(|k| (k, dense[k] * inv % p)).collect();
                    pivots[c] = Some(stored);
                    rank += 1;
                    break;
                }
            }
        }
        dense.iter_mut().for_each(|d| *d = 0);
    }
    rank
}

/// Rank over the rationals, certified by agreement modulo two primes.
pub fn exact_rank(rows: &[Row], columns: usize) -> Result<usize, BialgebraError> {
    let [p, q] = RANK_PRIMES;
    let (first, second) = rayon::join(|| rank_mod(rows, columns, p), || rank_mod(rows, columns, q));
    if first != second {
        return Err(BialgebraError::RankDisagreement { first, p, second, q });
    }
    Ok(first)
}

/// One row of the grade table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionReport {
    pub grade: usize,
    pub lagrangians: u128,
    pub orbits: usize,
    pub orbits_burnside: usize,
    pub relation_rank: usize,
    pub dim_k: usize,
}

/// Which index pairs generate four-term relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSet {
    /// Every ordered pair `(i, j)` with `i != j`.
    All,
    /// Only `(i, i+1)` and `(i+1, i)` on the canonical representative.
    Neighbouring,
}

impl PairSet {
    fn pairs(self, k: usize) -> Vec<(usize, usize)> {
        match self {
            PairSet::All => (1..=k).flat_map(|i| (1..=k).filter(move |&j| j != i).map(move |j| (i, j))).collect(),
            PairSet::Neighbouring => (1..k).flat_map(|i| [(i, i + 1), (i + 1, i)]).collect(),
        }
    }
}

/// The relation rows spanning the grade-`n` part of the four-term ideal,
/// deduplicated, indexed against `basis`.
pub fn relation_rows(grade: usize, classes: &[Vec<OrbitClass>]) -> Result<Vec<Row>, BialgebraError> {
    relation_rows_with(grade, classes, PairSet::All)
}

/// [`relation_rows`] with the generating pairs restricted to `pairs`.
pub fn relation_rows_with(grade: usize, classes: &[Vec<OrbitClass>], pairs: PairSet) -> Result<Vec<Row>, BialgebraError> {
    let index: HashMap<&OrbitClass, usize> = classes[grade].iter().enumerate().map(|(k, c)| (c, k)).collect();
    let mut rows = BTreeSet::new();
    for k in 2..=grade {
        let generators: Vec<LinComb> = classes[k]
            .par_iter()
            .map(|class| {
                let l = class.representative();
                pairs.pairs(k).into_iter().map(|(i, j)| four_element(&l, i, j)).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .flatten()
            .filter(|f| !f.is_zero())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let produced: Vec<Option<Row>> = generators
            .par_iter()
            .flat_map_iter(|f| classes[grade - k].iter().map(move |b| (f, b)))
            .map(|(f, b)| {
                let combination = f.times(b)?;
                Ok(normalize(combination.terms().map(|(c, v)| (index[c], v)).collect()))
            })
            .collect::<Result<Vec<_>, BialgebraError>>()?;
        rows.extend(produced.into_iter().flatten());
    }
    Ok(rows.into_iter().collect())
}

impl PartialOrd for LinComb {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for LinComb {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.grade, &self.terms).cmp(&(other.grade, &other.terms))
    }
}

/// Classes of every grade up to `max`, index = grade.
pub fn classes_up_to(max: usize) -> Result<Vec<Vec<OrbitClass>>, BialgebraError> {
    (0..=max).map(orbit_classes).collect()
}

/// `dim K_n = #orbits − rank(R_n)` for one grade, with its Burnside check.
pub fn dimension_report(grade: usize, classes: &[Vec<OrbitClass>]) -> Result<DimensionReport, BialgebraError> {
    let orbits = classes[grade].len();
    let orbits_burnside = burnside_orbit_count(grade)?;
    if orbits != orbits_burnside {
        return Err(BialgebraError::OrbitCountMismatch { grade, direct: orbits, burnside: orbits_burnside });
    }
    let rows = relation_rows(grade, classes)?;
    let relation_rank = exact_rank(&rows, orbits)?;
    Ok(DimensionReport {
        grade,
        lagrangians: lagrangian_count(grade),
        orbits,
        orbits_burnside,
        relation_rank,
        dim_k: orbits - relation_rank,
    })
}

/// Relation rank of grade `n` when only neighbouring pairs generate.
pub fn neighbouring_rank(grade: usize, classes: &[Vec<OrbitClass>]) -> Result<usize, BialgebraError> {
    exact_rank(&relation_rows_with(grade, classes, PairSet::Neighbouring)?, classes[grade].len())
}

/// `dim K_n` alone.
pub fn dim_k(grade: usize) -> Result<usize, BialgebraError> {
    if grade > DEFAULT_DIMENSION_BOUND {
        return Err(BialgebraError::BoundExceeded { grade, bound: DEFAULT_DIMENSION_BOUND });
    }
    Ok(dimension_report(grade, &classes_up_to(grade)?)?.dim_k)
}

/// How much of `K_n` the L-spaces of sampled ribbon graphs span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealizedReport {
    pub grade: usize,
    pub samples: usize,
    pub distinct_classes: usize,
    pub realized_rank: usize,
    pub dim_k: usize,
}

/// Samples random ribbon graphs with `grade` edges and measures the span of
/// their classes in `K_n`. Evidence only: a shortfall may be sampling.
pub fn realized_rank(
    grade: usize,
    samples: usize,
    seed: u64,
    classes: &[Vec<OrbitClass>],
) -> Result<RealizedReport, BialgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut realized = BTreeSet::new();
    for _ in 0..samples {
        let g = RibbonGraph::from_rotation(&RotationSystem::random(&mut rng, grade));
        realized.insert(canonicalize(&lspace(&g)?)?);
    }
    let index: HashMap<&OrbitClass, usize> = classes[grade].iter().enumerate().map(|(k, c)| (c, k)).collect();
    let relations = relation_rows(grade, classes)?;
    let columns = classes[grade].len();
    let base = exact_rank(&relations, columns)?;
    let mut rows = relations;
    rows.extend(realized.iter().map(|c| vec![(index[c], 1)]));
    let total = exact_rank(&rows, columns)?;
    Ok(RealizedReport {
        grade,
        samples,
        distinct_classes: realized.len(),
        realized_rank: total - base,
        dim_k: columns - base,
    })
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};

    use super::*;
    use crate::f2sympl::lagrangians;

    fn lag(rows: &[&str]) -> Lagrangian {
        Lagrangian::from_rows(rows).unwrap()
    }

    fn class(rows: &[&str]) -> OrbitClass {
        canonicalize(&lag(rows)).unwrap()
    }

    #[test]
    fn neighbouring_pairs_reach_full_rank() {
        let classes = classes_up_to(4).unwrap();
        for grade in 2..=4 {
            let all = relation_rows(grade, &classes).unwrap();
            let some = relation_rows_with(grade, &classes, PairSet::Neighbouring).unwrap();
            assert!(some.len() <= all.len());
            let n = classes[grade].len();
            assert_eq!(exact_rank(&some, n).unwrap(), exact_rank(&all, n).unwrap(), "grade {grade}");
        }
    }

    #[test]
    fn canonical_examples() {
        let swap_symmetric = lag(&["10|01", "01|10"]);
        assert_eq!(canonicalize(&swap_symmetric).unwrap().representative(), swap_symmetric);
        assert_eq!(class(&["10|00", "00|01"]), class(&["01|00", "00|10"]));
        assert_eq!(grade_dimension(1).unwrap(), 3);
        assert_eq!(grade_dimension(0).unwrap(), 1);
        assert!(matches!(
            canonicalize_with_bound(&lag(&["10|00", "01|00"]), 1),
            Err(BialgebraError::BoundExceeded { grade: 2, bound: 1 })
        ));
    }

    #[test]
    fn pruned_and_exhaustive_forms_give_the_same_orbits() {
        for n in 0..=4 {
            let mut pairing: HashMap<OrbitClass, OrbitClass> = HashMap::new();
            let mut reverse: HashMap<OrbitClass, OrbitClass> = HashMap::new();
            for l in lagrangians(n).unwrap() {
                let (pruned, full) = (canonicalize(&l).unwrap(), canonicalize_exhaustive(&l));
                assert_eq!(pairing.entry(pruned.clone()).or_insert_with(|| full.clone()), &full, "{l:?}");
                assert_eq!(reverse.entry(full).or_insert_with(|| pruned.clone()), &pruned, "{l:?}");
            }
        }
    }

    #[test]
    fn canonical_form_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let n = rng.random_range(1..=7);
            let g = RibbonGraph::from_rotation(&RotationSystem::random(&mut rng, n));
            let l = lspace(&g).unwrap();
            let mut perm: Vec<usize> = (0..n).collect();
            rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
            assert_eq!(canonicalize(&l).unwrap(), canonicalize(&l.permute(&perm)).unwrap());
        }
    }

    #[test]
    fn product_examples() {
        let e = class(&["1|0"]);
        let f = class(&["0|1"]);
        assert_eq!(product(&e, &e).unwrap(), class(&["10|00", "01|00"]));
        assert_eq!(product(&e, &OrbitClass::unit()).unwrap(), e);
        assert_eq!(product(&e, &f).unwrap(), product(&f, &e).unwrap());
    }

    #[test]
    fn coproduct_examples() {
        let e = class(&["1|0"]);
        let expected: Tensor2 = [((OrbitClass::unit(), e.clone()), 1), ((e.clone(), OrbitClass::unit()), 1)].into();
        assert_eq!(coproduct(&e).unwrap(), expected);
        let x = class(&["10|01", "01|10"]);
        let reduced = x.representative().reduce(IndexSet::from_indices([1])).unwrap();
        assert_eq!(canonicalize(&reduced).unwrap(), e);
        assert_eq!(coproduct(&x).unwrap()[&(e.clone(), e)], 2);
    }

    #[test]
    fn four_element_examples() {
        assert!(four_element(&lag(&["10|00", "01|00"]), 1, 2).unwrap().is_zero());
        let l = lag(&["10|10", "01|00"]);
        let f = four_element(&l, 1, 2).unwrap();
        let mut expected = LinComb::zero(2);
        expected.add_term(class(&["10|10", "01|00"]), 1);
        expected.add_term(class(&["10|11", "01|10"]), -1);
        expected.add_term(class(&["10|11", "11|00"]), -1);
        expected.add_term(class(&["10|10", "11|11"]), 1);
        assert_eq!(f, expected);
        assert_eq!(four_element(&l, 1, 1), Err(BialgebraError::RepeatedIndex { index: 1 }));
        assert!(matches!(four_element(&l, 1, 3), Err(BialgebraError::IndexOutOfRange { index: 3, grade: 2 })));
    }

    #[test]
    fn four_elements_are_well_defined_on_orbits() {
        for l in lagrangians(3).unwrap() {
            let perm = [2, 0, 1];
            let moved = l.permute(&perm);
            for i in 1..=3 {
                for j in (1..=3).filter(|&j| j != i) {
                    let a = four_element(&l, i, j).unwrap();
                    let b = four_element(&moved, perm[i - 1] + 1, perm[j - 1] + 1).unwrap();
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn burnside_agrees_with_direct_count() {
        for n in 0..=4 {
            assert_eq!(burnside_orbit_count(n).unwrap(), grade_dimension(n).unwrap(), "grade {n}");
        }
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(dim_k(0).unwrap(), 1);
        assert_eq!(dim_k(1).unwrap(), 3);
        let classes = classes_up_to(2).unwrap();
        let report = dimension_report(2, &classes).unwrap();
        assert_eq!(report.lagrangians, 15);
        assert_eq!(report.orbits, report.orbits_burnside);
        assert_eq!(report.dim_k + report.relation_rank, report.orbits);
    }

    #[test]
    fn dimension_is_independent_of_representatives() {
        // recompute with every representative replaced by a permuted copy
        let classes = classes_up_to(3).unwrap();
        let base = dimension_report(3, &classes).unwrap();
        let mut shuffled = classes.clone();
        shuffled[3].reverse();
        shuffled[2].reverse();
        assert_eq!(dimension_report(3, &shuffled).unwrap().dim_k, base.dim_k);
    }

    #[test]
    fn rank_mod_matches_small_cases() {
        let rows = vec![vec![(0, 1), (1, -1)], vec![(1, 1), (2, -1)], vec![(0, 1), (2, -1)]];
        assert_eq!(exact_rank(&rows, 3).unwrap(), 2);
        let rows = vec![vec![(0, 2)], vec![(1, 3)], vec![(0, 1), (1, 1), (2, 1)]];
        assert_eq!(exact_rank(&rows, 3).unwrap(), 3);
        assert_eq!(exact_rank(&[], 4).unwrap(), 0);
    }

    #[test]
    fn bialgebra_axioms_grade_two() {
        let classes = classes_up_to(2).unwrap();
        for x in classes.iter().flatten() {
            let left = coproduct_left(x).unwrap();
            assert_eq!(left, coproduct_right(x).unwrap());
            assert_eq!(left, tripartition_sum(x).unwrap());
            let flipped: Tensor2 = coproduct(x).unwrap().into_iter().map(|((a, b), c)| ((b, a), c)).collect();
            assert_eq!(flipped, coproduct(x).unwrap());
        }
        for x in classes.iter().flatten() {
            for y in classes.iter().flatten() {
                let lhs = coproduct(&product(x, y).unwrap()).unwrap();
                let rhs = tensor_product(&coproduct(x).unwrap(), &coproduct(y).unwrap()).unwrap();
                assert_eq!(lhs, rhs, "{x} · {y}");
            }
        }
    }

    #[test]
    fn realized_span_is_bounded_by_dimension() {
        let classes = classes_up_to(2).unwrap();
        let report = realized_rank(2, 50, 3, &classes).unwrap();
        assert!(report.realized_rank <= report.dim_k);
        assert!(report.distinct_classes >= 1);
    }

    #[test]
    fn partitions_and_factorials() {
        assert_eq!(partitions(4).len(), 5);
        assert_eq!(partitions(0), vec![Vec::<usize>::new()]);
        assert_eq!(factorial(5), 120);
        assert_eq!(inverse_mod(3, 7), 5);
    }
}
