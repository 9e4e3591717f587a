//! Linear algebra over GF(2) in the standard symplectic space.
//!
//! A vector of grade `n` lives in `F₂^{2n}` with basis `e₁…e_n, f₁…f_n`
//! and form `(e_i, f_j) = δ_ij`. Vectors are packed into a `u64`: column
//! `c < n` is `e_{c+1}` at bit `c`, column `n + c` is `f_{c+1}` at bit
//! `n + c`. The pivot of a nonzero vector is its lowest set bit, so the
//! column order used for echelon forms is `e₁…e_n, f₁…f_n`.

use std::fmt;

use thiserror::Error;

use crate::matrixops::FramedGraphMatrix;

/// Largest grade a packed vector can hold.
pub const MAX_GRADE: usize = 32;

/// Default largest grade accepted by [`lagrangians`].
pub const DEFAULT_ENUMERATION_BOUND: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymplecticError {
    #[error("grade mismatch: {left} vs {right}")]
    GradeMismatch { left: usize, right: usize },
    #[error("grade {grade} exceeds the supported maximum {max}")]
    GradeTooLarge { grade: usize, max: usize },
    #[error("index {index} out of range for grade {grade}")]
    IndexOutOfRange { index: usize, grade: usize },
    #[error("indices must be distinct, got {index} twice")]
    RepeatedIndex { index: usize },
    #[error("subspace is not Lagrangian")]
    NotLagrangian,
    #[error("Lagrangian is not transverse to the f-block")]
    NotTransverse,
    #[error("linear map does not preserve the symplectic form")]
    NotSymplectic,
    #[error("enumeration of grade {grade} exceeds the configured bound {bound}")]
    BoundExceeded { grade: usize, bound: usize },
}

fn check_grade(grade: usize) -> Result<(), SymplecticError> {
    if grade > MAX_GRADE {
        Err(SymplecticError::GradeTooLarge { grade, max: MAX_GRADE })
    } else {
        Ok(())
    }
}

fn check_index(index: usize, grade: usize) -> Result<(), SymplecticError> {
    if index == 0 || index > grade {
        Err(SymplecticError::IndexOutOfRange { index, grade })
    } else {
        Ok(())
    }
}

#[inline]
fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

#[inline]
fn pivot(bits: u64) -> u32 {
    bits.trailing_zeros()
}

/// Form of two packed vectors of grade `n`.
#[inline]
pub(crate) fn form_bits(n: usize, u: u64, v: u64) -> bool {
    let m = low_mask(n);
    let (ue, uf) = (u & m, u >> n);
    let (ve, vf) = (v & m, v >> n);
    ((ue & vf) ^ (uf & ve)).count_ones() & 1 == 1
}

/// Adds `v` to a reduced row-echelon basis kept sorted by pivot.
/// Returns false when `v` was already in the span.
pub(crate) fn insert_reduced(rows: &mut Vec<u64>, mut v: u64) -> bool {
    for &r in rows.iter() {
        if v >> pivot(r) & 1 == 1 {
            v ^= r;
        }
    }
    if v == 0 {
        return false;
    }
    let p = pivot(v);
    for r in rows.iter_mut() {
        if *r >> p & 1 == 1 {
            *r ^= v;
        }
    }
    let at = rows.partition_point(|&r| pivot(r) < p);
    rows.insert(at, v);
    true
}

pub(crate) fn reduced_basis(vectors: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut rows = Vec::new();
    for v in vectors {
        insert_reduced(&mut rows, v);
    }
    rows
}

/// A set of indices in `1..=64`, stored as a mask (bit `i - 1` for index `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_mask(mask: u64) -> Self {
        IndexSet(mask)
    }

    /// `{1, …, n}`.
    pub fn full(n: usize) -> Self {
        IndexSet(low_mask(n))
    }

    /// Panics on index 0 or an index above 64.
    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        let mut mask = 0u64;
        for i in indices {
            assert!((1..=64).contains(&i), "index {i} outside 1..=64");
            mask |= 1 << (i - 1);
        }
        IndexSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=64).contains(&i) && self.0 >> (i - 1) & 1 == 1
    }

    /// Largest index, or 0 for the empty set.
    pub fn max(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn complement(self, n: usize) -> Self {
        IndexSet(!self.0 & low_mask(n))
    }

    pub fn symmetric_difference(self, other: Self) -> Self {
        IndexSet(self.0 ^ other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Indices in increasing order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i + 1)
            }
        })
    }

    /// All subsets of `{1, …, n}` in mask order.
    pub fn all_subsets(n: usize) -> impl Iterator<Item = IndexSet> {
        assert!(n < 64);
        (0..1u64 << n).map(IndexSet)
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        IndexSet::from_indices(iter)
    }
}

/// A vector of `F₂^{2n}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SympVector {
    grade: u8,
    bits: u64,
}

impl SympVector {
    pub fn zero(grade: usize) -> Result<Self, SymplecticError> {
        check_grade(grade)?;
        Ok(SympVector { grade: grade as u8, bits: 0 })
    }

    /// Builds a vector from its e- and f-coordinate masks (bit `i - 1` for index `i`).
    pub fn from_parts(grade: usize, e: u64, f: u64) -> Result<Self, SymplecticError> {
        check_grade(grade)?;
        let m = low_mask(grade);
        if e & !m != 0 || f & !m != 0 {
            return Err(SymplecticError::IndexOutOfRange {
                index: 64 - (e | f).leading_zeros() as usize,
                grade,
            });
        }
        Ok(SympVector { grade: grade as u8, bits: e | f << grade })
    }

    pub fn e(grade: usize, i: usize) -> Result<Self, SymplecticError> {
        check_index(i, grade)?;
        Self::from_parts(grade, 1 << (i - 1), 0)
    }

    pub fn f(grade: usize, i: usize) -> Result<Self, SymplecticError> {
        check_index(i, grade)?;
        Self::from_parts(grade, 0, 1 << (i - 1))
    }

    pub(crate) fn from_bits(grade: usize, bits: u64) -> Self {
        debug_assert!(grade <= MAX_GRADE && bits & !low_mask(2 * grade) == 0);
        SympVector { grade: grade as u8, bits }
    }

    pub fn grade(&self) -> usize {
        self.grade as usize
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn e_part(&self) -> u64 {
        self.bits & low_mask(self.grade())
    }

    pub fn f_part(&self) -> u64 {
        self.bits >> self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn add(&self, other: &SympVector) -> Result<SympVector, SymplecticError> {
        same_grade(self.grade(), other.grade())?;
        Ok(SympVector { grade: self.grade, bits: self.bits ^ other.bits })
    }
}

impl fmt::Debug for SympVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SympVector({self})")
    }
}

/// `e-block|f-block`, one character per index, e.g. `10|01` for `e₁ + f₂`.
impl fmt::Display for SympVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.grade();
        let bit = |c: usize| if self.bits >> c & 1 == 1 { '1' } else { '0' };
        let e: String = (0..n).map(bit).collect();
        let fs: String = (n..2 * n).map(bit).collect();
        write!(f, "{e}|{fs}")
    }
}

fn same_grade(left: usize, right: usize) -> Result<(), SymplecticError> {
    if left != right {
        Err(SymplecticError::GradeMismatch { left, right })
    } else {
        Ok(())
    }
}

/// The symplectic form `Σ_i (u.e_i v.f_i + u.f_i v.e_i)`.
pub fn form(u: &SympVector, v: &SympVector) -> Result<bool, SymplecticError> {
    same_grade(u.grade(), v.grade())?;
    Ok(form_bits(u.grade(), u.bits, v.bits))
}

/// A subspace of `F₂^{2n}` stored by its reduced row-echelon basis.
///
/// The basis is unique, so structural equality is equality of subspaces.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    grade: usize,
    rows: Vec<u64>,
}

impl Subspace {
    pub fn zero(grade: usize) -> Result<Self, SymplecticError> {
        check_grade(grade)?;
        Ok(Subspace { grade, rows: Vec::new() })
    }

    pub(crate) fn from_reduced(grade: usize, rows: Vec<u64>) -> Self {
        Subspace { grade, rows }
    }

    pub(crate) fn from_bits(grade: usize, vectors: impl IntoIterator<Item = u64>) -> Self {
        Subspace { grade, rows: reduced_basis(vectors) }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> impl Iterator<Item = SympVector> + '_ {
        self.rows.iter().map(|&b| SympVector::from_bits(self.grade, b))
    }

    pub fn contains(&self, v: &SympVector) -> bool {
        if v.grade() != self.grade {
            return false;
        }
        let mut bits = v.bits;
        for &r in &self.rows {
            if bits >> pivot(r) & 1 == 1 {
                bits ^= r;
            }
        }
        bits == 0
    }

    pub fn is_isotropic(&self) -> bool {
        self.rows.iter().enumerate().all(|(a, &u)| {
            self.rows[a + 1..].iter().all(|&v| !form_bits(self.grade, u, v))
        })
    }

    pub fn is_lagrangian(&self) -> bool {
        self.dim() == self.grade && self.is_isotropic()
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.basis().map(|v| v.to_string())).finish()
    }
}

/// Linear span of `vectors`, all of the given grade.
pub fn span(grade: usize, vectors: &[SympVector]) -> Result<Subspace, SymplecticError> {
    check_grade(grade)?;
    for v in vectors {
        same_grade(grade, v.grade())?;
    }
    Ok(Subspace::from_bits(grade, vectors.iter().map(|v| v.bits)))
}

pub fn is_lagrangian(subspace: &Subspace) -> bool {
    subspace.is_lagrangian()
}

/// An `n`-dimensional isotropic subspace of `F₂^{2n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lagrangian(Subspace);

impl Lagrangian {
    pub fn new(subspace: Subspace) -> Result<Self, SymplecticError> {
        if subspace.is_lagrangian() {
            Ok(Lagrangian(subspace))
        } else {
            Err(SymplecticError::NotLagrangian)
        }
    }

    pub fn from_vectors(grade: usize, vectors: &[SympVector]) -> Result<Self, SymplecticError> {
        Self::new(span(grade, vectors)?)
    }

    /// Parses rows written as `e-block|f-block`, e.g. `["10|01", "01|10"]`.
    pub fn from_rows(rows: &[&str]) -> Result<Self, SymplecticError> {
        let grade = rows.first().map_or(0, |r| r.split('|').next().unwrap_or("").len());
        check_grade(grade)?;
        let mut bits = Vec::with_capacity(rows.len());
        for r in rows {
            let (e, f) = r.split_once('|').ok_or(SymplecticError::NotLagrangian)?;
            if e.len() != grade || f.len() != grade {
                return Err(SymplecticError::GradeMismatch { left: grade, right: e.len().max(f.len()) });
            }
            let mut v = 0u64;
            for (c, ch) in e.chars().chain(f.chars()).enumerate() {
                match ch {
                    '1' => v |= 1 << c,
                    '0' => {}
                    _ => return Err(SymplecticError::NotLagrangian),
                }
            }
            bits.push(v);
        }
        Self::new(Subspace::from_bits(grade, bits))
    }

    pub(crate) fn from_subspace_unchecked(subspace: Subspace) -> Self {
        debug_assert!(subspace.is_lagrangian());
        Lagrangian(subspace)
    }

    /// The zero space of the zero-dimensional symplectic space.
    pub fn unit() -> Self {
        Lagrangian(Subspace { grade: 0, rows: Vec::new() })
    }

    /// Row span of `(Id | A)`.
    pub fn graph_of(matrix: &FramedGraphMatrix) -> Result<Self, SymplecticError> {
        let n = matrix.size();
        check_grade(n)?;
        let rows = (0..n).map(|i| 1u64 << i | matrix.row_mask(i) << n);
        Ok(Lagrangian(Subspace::from_bits(n, rows)))
    }

    pub fn grade(&self) -> usize {
        self.0.grade
    }

    pub fn subspace(&self) -> &Subspace {
        &self.0
    }

    pub fn basis(&self) -> impl Iterator<Item = SympVector> + '_ {
        self.0.basis()
    }

    pub(crate) fn row_bits(&self) -> &[u64] {
        &self.0.rows
    }

    pub fn contains(&self, v: &SympVector) -> bool {
        self.0.contains(v)
    }

    /// `self ⊕ other`, with `other`'s indices shifted past `self`'s.
    pub fn direct_sum(&self, other: &Lagrangian) -> Result<Lagrangian, SymplecticError> {
        let (m, k) = (self.grade(), other.grade());
        check_grade(m + k)?;
        let n = m + k;
        let lift_left = |b: u64| (b & low_mask(m)) | (b >> m) << n;
        let lift_right = |b: u64| (b & low_mask(k)) << m | (b >> k) << (n + m);
        let rows = self.0.rows.iter().map(|&b| lift_left(b)).chain(other.0.rows.iter().map(|&b| lift_right(b)));
        Ok(Lagrangian(Subspace::from_bits(n, rows)))
    }

    /// Symplectic reduction `L|_I`: intersect with `W_I = E_I ⊕ F_N`,
    /// drop `f_j` for `j ∉ I`, and renumber `I` increasingly.
    pub fn reduce(&self, subset: IndexSet) -> Result<Lagrangian, SymplecticError> {
        let n = self.grade();
        if subset.max() > n {
            return Err(SymplecticError::IndexOutOfRange { index: subset.max(), grade: n });
        }
        let outside = subset.complement(n).mask();
        // Eliminate every e_j with j outside I; rows used as eliminators leave.
        let mut rows = self.0.rows.clone();
        for j in 0..n {
            if outside >> j & 1 == 0 {
                continue;
            }
            if let Some(at) = rows.iter().position(|r| r >> j & 1 == 1) {
                let r = rows.swap_remove(at);
                for other in rows.iter_mut() {
                    if *other >> j & 1 == 1 {
                        *other ^= r;
                    }
                }
            }
        }
        let kept: Vec<usize> = subset.iter().map(|i| i - 1).collect();
        let k = kept.len();
        let project = |b: u64| {
            kept.iter().enumerate().fold(0u64, |acc, (new, &old)| {
                acc | (b >> old & 1) << new | (b >> (n + old) & 1) << (k + new)
            })
        };
        let reduced = Subspace::from_bits(k, rows.into_iter().map(project));
        assert!(reduced.is_lagrangian(), "symplectic reduction produced a non-Lagrangian subspace");
        Ok(Lagrangian(reduced))
    }

    /// True iff `L ∩ span{f₁…f_n} = 0`, i.e. the basis has the shape `(Id | A)`.
    pub fn is_transverse_to_f(&self) -> bool {
        let n = self.grade();
        self.0.rows.iter().all(|&r| (pivot(r) as usize) < n)
    }

    /// The symmetric `A` with `L = rowspan(Id | A)`.
    pub fn to_matrix(&self) -> Result<FramedGraphMatrix, SymplecticError> {
        if !self.is_transverse_to_f() {
            return Err(SymplecticError::NotTransverse);
        }
        let n = self.grade();
        let rows = self.0.rows.iter().map(|&r| r >> n).collect();
        Ok(FramedGraphMatrix::from_row_masks(n, rows).expect("the f-block of a transverse Lagrangian is symmetric"))
    }

    /// Image under simultaneous relabelling `e_i ↦ e_{π(i)}`, `f_i ↦ f_{π(i)}`,
    /// with `perm[i - 1] = π(i) - 1`.
    pub fn permute(&self, perm: &[usize]) -> Lagrangian {
        let n = self.grade();
        assert_eq!(perm.len(), n);
        let rows = self.0.rows.iter().map(|&b| permute_bits(n, b, perm));
        Lagrangian(Subspace::from_bits(n, rows))
    }
}

pub(crate) fn permute_bits(n: usize, b: u64, perm: &[usize]) -> u64 {
    let mut out = 0u64;
    for (i, &p) in perm.iter().enumerate() {
        out |= (b >> i & 1) << p | (b >> (n + i) & 1) << (n + p);
    }
    out
}

impl fmt::Debug for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lagrangian{:?}", self.0)
    }
}

/// `lspace n=<n>` followed by one `e|f` row per basis vector in pivot order.
impl fmt::Display for Lagrangian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lspace n={}", self.grade())?;
        for v in self.basis() {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

pub fn direct_sum(left: &Lagrangian, right: &Lagrangian) -> Result<Lagrangian, SymplecticError> {
    left.direct_sum(right)
}

pub fn reduce(lagrangian: &Lagrangian, subset: IndexSet) -> Result<Lagrangian, SymplecticError> {
    lagrangian.reduce(subset)
}

/// A linear map of `F₂^{2n}` preserving the form, stored by the images of
/// the basis columns `e₁…e_n, f₁…f_n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Symplectomorphism {
    grade: usize,
    images: Vec<u64>,
}

impl Symplectomorphism {
    pub fn identity(grade: usize) -> Result<Self, SymplecticError> {
        check_grade(grade)?;
        Ok(Symplectomorphism { grade, images: (0..2 * grade).map(|c| 1u64 << c).collect() })
    }

    /// Builds a map from the images of `e₁…e_n` followed by `f₁…f_n`.
    pub fn from_images(grade: usize, images: &[SympVector]) -> Result<Self, SymplecticError> {
        check_grade(grade)?;
        if images.len() != 2 * grade {
            return Err(SymplecticError::GradeMismatch { left: 2 * grade, right: images.len() });
        }
        for v in images {
            same_grade(grade, v.grade())?;
        }
        let map = Symplectomorphism { grade, images: images.iter().map(|v| v.bits).collect() };
        if map.preserves_form() {
            Ok(map)
        } else {
            Err(SymplecticError::NotSymplectic)
        }
    }

    fn preserves_form(&self) -> bool {
        let n = self.grade;
        (0..2 * n).all(|a| {
            (a + 1..2 * n).all(|b| form_bits(n, self.images[a], self.images[b]) == form_bits(n, 1 << a, 1 << b))
        })
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn image(&self, v: &SympVector) -> Result<SympVector, SymplecticError> {
        same_grade(self.grade, v.grade())?;
        Ok(SympVector::from_bits(self.grade, self.image_bits(v.bits)))
    }

    #[inline]
    fn image_bits(&self, mut bits: u64) -> u64 {
        let mut out = 0u64;
        while bits != 0 {
            let c = bits.trailing_zeros() as usize;
            out ^= self.images[c];
            bits &= bits - 1;
        }
        out
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Symplectomorphism) -> Result<Symplectomorphism, SymplecticError> {
        same_grade(self.grade, other.grade)?;
        Ok(Symplectomorphism {
            grade: self.grade,
            images: other.images.iter().map(|&b| self.image_bits(b)).collect(),
        })
    }

    pub fn is_involution(&self) -> bool {
        self.images.iter().enumerate().all(|(c, &b)| self.image_bits(b) == 1 << c)
    }

    pub fn apply(&self, lagrangian: &Lagrangian) -> Result<Lagrangian, SymplecticError> {
        same_grade(self.grade, lagrangian.grade())?;
        let image = Subspace::from_bits(self.grade, lagrangian.row_bits().iter().map(|&b| self.image_bits(b)));
        assert!(image.is_lagrangian(), "symplectomorphism image is not Lagrangian");
        Ok(Lagrangian(image))
    }
}

impl fmt::Debug for Symplectomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cols: Vec<String> = self.images.iter().map(|&b| SympVector::from_bits(self.grade, b).to_string()).collect();
        write!(f, "Symplectomorphism{cols:?}")
    }
}

fn check_pair(grade: usize, i: usize, j: usize) -> Result<(), SymplecticError> {
    check_index(i, grade)?;
    check_index(j, grade)?;
    if i == j {
        return Err(SymplecticError::RepeatedIndex { index: i });
    }
    Ok(())
}

/// Partial dual on L-spaces: swaps `e_i ↔ f_i`.
pub fn mu_map(grade: usize, i: usize) -> Result<Symplectomorphism, SymplecticError> {
    check_index(i, grade)?;
    let mut map = Symplectomorphism::identity(grade)?;
    map.images.swap(i - 1, grade + i - 1);
    Ok(map)
}

/// First Vassiliev move on L-spaces: `e_i ↦ e_i + f_j`, `e_j ↦ e_j + f_i`.
pub fn v1_map(grade: usize, i: usize, j: usize) -> Result<Symplectomorphism, SymplecticError> {
    check_pair(grade, i, j)?;
    let mut map = Symplectomorphism::identity(grade)?;
    map.images[i - 1] |= 1 << (grade + j - 1);
    map.images[j - 1] |= 1 << (grade + i - 1);
    Ok(map)
}

/// Second Vassiliev move with fixed chord `i` and moving chord `j`:
/// `mu(i) ∘ v1(i, j) ∘ mu(i)`, i.e. `f_i ↦ f_i + f_j`, `e_j ↦ e_j + e_i`.
pub fn v2_map(grade: usize, i: usize, j: usize) -> Result<Symplectomorphism, SymplecticError> {
    let mu = mu_map(grade, i)?;
    mu.compose(&v1_map(grade, i, j)?)?.compose(&mu)
}

/// Simultaneous index permutation as a symplectomorphism (`perm` 0-based).
pub fn permutation_map(grade: usize, perm: &[usize]) -> Result<Symplectomorphism, SymplecticError> {
    check_grade(grade)?;
    if perm.len() != grade {
        return Err(SymplecticError::GradeMismatch { left: grade, right: perm.len() });
    }
    let mut seen = 0u64;
    for &p in perm {
        if p >= grade || seen >> p & 1 == 1 {
            return Err(SymplecticError::IndexOutOfRange { index: p + 1, grade });
        }
        seen |= 1 << p;
    }
    Ok(Symplectomorphism { grade, images: (0..2 * grade).map(|c| permute_bits(grade, 1 << c, perm)).collect() })
}

pub fn apply(map: &Symplectomorphism, lagrangian: &Lagrangian) -> Result<Lagrangian, SymplecticError> {
    map.apply(lagrangian)
}

/// `∏_{i=1}^{n} (2^i + 1)`, the number of Lagrangians of grade `n`.
pub fn lagrangian_count(grade: usize) -> u128 {
    (1..=grade as u32).map(|i| (1u128 << i) + 1).product()
}

/// All subspaces of `F₂^n` as reduced row-echelon bases (pivot = lowest bit).
pub(crate) fn subspaces_of(n: usize) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    for pivots in 0..1u64 << n {
        let cols: Vec<usize> = IndexSet(pivots).iter().map(|i| i - 1).collect();
        // Free slots: (row, column) with column > the row's pivot and not a pivot.
        let slots: Vec<(usize, usize)> = cols
            .iter()
            .enumerate()
            .flat_map(|(r, &p)| (p + 1..n).filter(move |c| pivots >> c & 1 == 0).map(move |c| (r, c)))
            .collect();
        for fill in 0..1u64 << slots.len() {
            let mut rows: Vec<u64> = cols.iter().map(|&p| 1u64 << p).collect();
            for (s, &(r, c)) in slots.iter().enumerate() {
                if fill >> s & 1 == 1 {
                    rows[r] |= 1 << c;
                }
            }
            out.push(rows);
        }
    }
    out
}

/// Iterator over every Lagrangian of a grade, each exactly once.
///
/// A Lagrangian `L` is determined by the projection `P` of `L` to the e-block
/// together with a symmetric bilinear form on `P`; `L ∩ F` is the annihilator
/// of `P`. Iterating pairs `(P, S)` visits each `L` once with no deduplication.
pub struct Lagrangians {
    grade: usize,
    subspaces: std::vec::IntoIter<Vec<u64>>,
    current: Option<Pending>,
}

struct Pending {
    rows: Vec<u64>,
    annihilator: Vec<u64>,
    slots: Vec<(usize, usize)>,
    next: u64,
    end: u64,
}

impl Pending {
    fn new(n: usize, rows: Vec<u64>) -> Self {
        let k = rows.len();
        let pivots: u64 = rows.iter().map(|&r| 1u64 << pivot(r)).fold(0, |a, b| a | b);
        let annihilator = (0..n)
            .filter(|c| pivots >> c & 1 == 0)
            .map(|c| {
                rows.iter().fold(1u64 << c, |acc, &r| if r >> c & 1 == 1 { acc | 1 << pivot(r) } else { acc })
            })
            .collect();
        let slots: Vec<(usize, usize)> = (0..k).flat_map(|a| (a..k).map(move |b| (a, b))).collect();
        let end = 1u64 << slots.len();
        Pending { rows, annihilator, slots, next: 0, end }
    }

    fn build(&self, n: usize, fill: u64) -> Lagrangian {
        let mut lifts = self.rows.clone();
        for (s, &(a, b)) in self.slots.iter().enumerate() {
            if fill >> s & 1 == 1 {
                lifts[a] |= 1 << (n + pivot(self.rows[b]) as usize);
                if a != b {
                    lifts[b] |= 1 << (n + pivot(self.rows[a]) as usize);
                }
            }
        }
        let rows = lifts.into_iter().chain(self.annihilator.iter().map(|&y| y << n));
        Lagrangian::from_subspace_unchecked(Subspace::from_bits(n, rows))
    }
}

impl Iterator for Lagrangians {
    type Item = Lagrangian;

    fn next(&mut self) -> Option<Lagrangian> {
        loop {
            if let Some(p) = &mut self.current {
                if p.next < p.end {
                    let fill = p.next;
                    p.next += 1;
                    return Some(p.build(self.grade, fill));
                }
            }
            let rows = self.subspaces.next()?;
            self.current = Some(Pending::new(self.grade, rows));
        }
    }
}

/// Every Lagrangian of `grade`, in a fixed order; bounded by [`DEFAULT_ENUMERATION_BOUND`].
pub fn lagrangians(grade: usize) -> Result<Lagrangians, SymplecticError> {
    lagrangians_with_bound(grade, DEFAULT_ENUMERATION_BOUND)
}

pub fn lagrangians_with_bound(grade: usize, bound: usize) -> Result<Lagrangians, SymplecticError> {
    if grade > bound {
        return Err(SymplecticError::BoundExceeded { grade, bound });
    }
    check_grade(grade)?;
    Ok(Lagrangians { grade, subspaces: subspaces_of(grade).into_iter(), current: None })
}
