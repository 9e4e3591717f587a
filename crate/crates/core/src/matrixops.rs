//! Matrix calculus on framed graphs over GF(2).
//!
//! A framed graph on `n` vertices is a symmetric 0/1 matrix whose diagonal
//! holds the framings (1 = odd vertex). Vertices are numbered from 1.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::f2sympl::{IndexSet, Lagrangian, SymplecticError};

/// Largest matrix the packed row representation supports.
pub const MAX_SIZE: usize = 64;

/// Default largest graph accepted by [`interlace_polynomial`].
pub const DEFAULT_INTERLACE_BOUND: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix size {size} exceeds the supported maximum {max}")]
    TooLarge { size: usize, max: usize },
    #[error("vertex {index} out of range for a graph on {size} vertices")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("matrix is not symmetric")]
    NotSymmetric,
    #[error("principal minor on {subset:?} is singular (Cohn-Lempel criterion fails)")]
    Singular { subset: Vec<usize> },
    #[error("local complementation needs an odd vertex, {vertex} is even")]
    EvenVertex { vertex: usize },
    #[error("pivot needs an edge between two even vertices, got ({a}, {b})")]
    PivotPrecondition { a: usize, b: usize },
    #[error("interlace polynomial of {size} vertices exceeds the configured bound {bound}")]
    BoundExceeded { size: usize, bound: usize },
    #[error(transparent)]
    Symplectic(#[from] SymplecticError),
}

/// Symmetric `n × n` matrix over GF(2), diagonal = framings.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FramedGraphMatrix {
    size: usize,
    rows: Vec<u64>,
}

impl FramedGraphMatrix {
    pub fn zero(size: usize) -> Result<Self, MatrixError> {
        check_size(size)?;
        Ok(FramedGraphMatrix { size, rows: vec![0; size] })
    }

    /// Rows as bit masks, bit `j` of `rows[i]` being entry `(i + 1, j + 1)`.
    pub fn from_row_masks(size: usize, rows: Vec<u64>) -> Result<Self, MatrixError> {
        check_size(size)?;
        if rows.len() != size || rows.iter().any(|&r| r & !mask(size) != 0) {
            return Err(MatrixError::IndexOutOfRange { index: rows.len().max(size + 1), size });
        }
        let m = FramedGraphMatrix { size, rows };
        if m.is_symmetric() {
            Ok(m)
        } else {
            Err(MatrixError::NotSymmetric)
        }
    }

    /// Dense constructor from 0/1 rows.
    pub fn from_rows(rows: &[&[u8]]) -> Result<Self, MatrixError> {
        let size = rows.len();
        let masks = rows
            .iter()
            .map(|r| r.iter().enumerate().fold(0u64, |acc, (j, &x)| acc | u64::from(x & 1) << j))
            .collect();
        if rows.iter().any(|r| r.len() != size) {
            return Err(MatrixError::IndexOutOfRange { index: size + 1, size });
        }
        Self::from_row_masks(size, masks)
    }

    /// Framed graph with odd vertices `frames` and undirected `edges`.
    pub fn from_graph(size: usize, frames: IndexSet, edges: &[(usize, usize)]) -> Result<Self, MatrixError> {
        let mut m = Self::zero(size)?;
        for i in frames.iter() {
            m.check_index(i)?;
            m.rows[i - 1] |= 1 << (i - 1);
        }
        for &(i, j) in edges {
            m.check_index(i)?;
            m.check_index(j)?;
            m.rows[i - 1] ^= 1 << (j - 1);
            m.rows[j - 1] ^= 1 << (i - 1);
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Entry `(i, j)`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i >= 1 && i <= self.size && j >= 1 && j <= self.size);
        self.rows[i - 1] >> (j - 1) & 1 == 1
    }

    pub(crate) fn row_mask(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..self.size).all(|j| (self.rows[i] >> j & 1) == (self.rows[j] >> i & 1)))
    }

    /// Odd vertices.
    pub fn framing(&self) -> IndexSet {
        IndexSet::from_mask((0..self.size).filter(|&i| self.rows[i] >> i & 1 == 1).fold(0, |a, i| a | 1 << i))
    }

    /// Off-diagonal edges `(i, j)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.size)
            .flat_map(|i| (i + 1..self.size).filter(move |&j| self.rows[i] >> j & 1 == 1).map(move |j| (i + 1, j + 1)))
            .collect()
    }

    fn check_index(&self, i: usize) -> Result<(), MatrixError> {
        if i == 0 || i > self.size {
            Err(MatrixError::IndexOutOfRange { index: i, size: self.size })
        } else {
            Ok(())
        }
    }

    fn check_subset(&self, subset: IndexSet) -> Result<(), MatrixError> {
        if subset.max() > self.size {
            Err(MatrixError::IndexOutOfRange { index: subset.max(), size: self.size })
        } else {
            Ok(())
        }
    }

    /// Principal submatrix on `subset`, renumbered increasingly.
    pub fn principal(&self, subset: IndexSet) -> Result<Self, MatrixError> {
        self.check_subset(subset)?;
        let idx: Vec<usize> = subset.iter().map(|i| i - 1).collect();
        Ok(FramedGraphMatrix { size: idx.len(), rows: idx.iter().map(|&i| gather(self.rows[i], &idx)).collect() })
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        rank_of(self.rows.iter().copied())
    }

    /// Block-diagonal sum, `other` renumbered after `self`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self, MatrixError> {
        let size = self.size + other.size;
        check_size(size)?;
        let rows = self.rows.iter().copied().chain(other.rows.iter().map(|&r| r << self.size)).collect();
        Ok(FramedGraphMatrix { size, rows })
    }

    /// Exchanges the labels `a` and `b`.
    pub fn swap_labels(&self, a: usize, b: usize) -> Result<Self, MatrixError> {
        self.check_index(a)?;
        self.check_index(b)?;
        let mut perm: Vec<usize> = (0..self.size).collect();
        perm.swap(a - 1, b - 1);
        Ok(self.permute(&perm))
    }

    /// Relabels vertex `i` as `perm[i]` (0-based).
    pub fn permute(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.size);
        let mut rows = vec![0u64; self.size];
        for i in 0..self.size {
            for j in 0..self.size {
                rows[perm[i]] |= (self.rows[i] >> j & 1) << perm[j];
            }
        }
        FramedGraphMatrix { size: self.size, rows }
    }
}

impl fmt::Debug for FramedGraphMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FramedGraphMatrix[")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.size {
                write!(f, "{}", r >> j & 1)?;
            }
        }
        write!(f, "]")
    }
}

/// One row per line, entries separated by spaces.
impl fmt::Display for FramedGraphMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let line: Vec<String> = (0..self.size).map(|j| (r >> j & 1).to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

fn check_size(size: usize) -> Result<(), MatrixError> {
    if size > MAX_SIZE {
        Err(MatrixError::TooLarge { size, max: MAX_SIZE })
    } else {
        Ok(())
    }
}

fn mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Compresses the bits of `row` at positions `idx` into the low bits.
fn gather(row: u64, idx: &[usize]) -> u64 {
    idx.iter().enumerate().fold(0, |acc, (k, &i)| acc | (row >> i & 1) << k)
}

fn rank_of(rows: impl Iterator<Item = u64>) -> usize {
    let mut basis = [0u64; 64];
    let mut rank = 0;
    for mut v in rows {
        while v != 0 {
            let top = 63 - v.leading_zeros() as usize;
            if basis[top] == 0 {
                basis[top] = v;
                rank += 1;
                break;
            }
            v ^= basis[top];
        }
    }
    rank
}

/// Inverse of a `k × k` matrix given as row masks, or `None` when singular.
fn invert(rows: &[u64]) -> Option<Vec<u64>> {
    let k = rows.len();
    let mut work: Vec<(u64, u64)> = rows.iter().enumerate().map(|(i, &r)| (r, 1u64 << i)).collect();
    for col in 0..k {
        let at = (col..k).find(|&r| work[r].0 >> col & 1 == 1)?;
        work.swap(col, at);
        let (pr, pi) = work[col];
        for (r, row) in work.iter_mut().enumerate() {
            if r != col && row.0 >> col & 1 == 1 {
                row.0 ^= pr;
                row.1 ^= pi;
            }
        }
    }
    Some(work.into_iter().map(|(_, inv)| inv).collect())
}

/// Product of row-mask matrices `x` (p × q) and `y` (q × r).
fn multiply(x: &[u64], y: &[u64]) -> Vec<u64> {
    x.iter()
        .map(|&row| {
            let mut acc = 0u64;
            let mut bits = row;
            while bits != 0 {
                acc ^= y[bits.trailing_zeros() as usize];
                bits &= bits - 1;
            }
            acc
        })
        .collect()
}

fn transpose(x: &[u64], cols: usize) -> Vec<u64> {
    (0..cols).map(|c| x.iter().enumerate().fold(0u64, |acc, (r, &row)| acc | (row >> c & 1) << r)).collect()
}

/// Whether the principal minor on `subset` is invertible; for the
/// intersection matrix of a chord diagram this decides whether the partial
/// dual along `subset` still has one vertex.
pub fn cohn_lempel(matrix: &FramedGraphMatrix, subset: IndexSet) -> Result<bool, MatrixError> {
    let h = matrix.principal(subset)?;
    Ok(h.rank() == h.size())
}

/// Intersection matrix after the partial dual along `subset`.
///
/// With `I` the complement of `J = subset`, `A = M_II`, `B = M_IJ`,
/// `H = M_JJ`, the result has blocks `A + B H⁻¹ Bᵀ`, `B H⁻¹`, `H⁻¹ Bᵀ`, `H⁻¹`.
pub fn partial_dual_matrix(matrix: &FramedGraphMatrix, subset: IndexSet) -> Result<FramedGraphMatrix, MatrixError> {
    matrix.check_subset(subset)?;
    let n = matrix.size;
    let j_idx: Vec<usize> = subset.iter().map(|i| i - 1).collect();
    let i_idx: Vec<usize> = subset.complement(n).iter().map(|i| i - 1).collect();
    let h: Vec<u64> = j_idx.iter().map(|&r| gather(matrix.rows[r], &j_idx)).collect();
    let h_inv = invert(&h).ok_or_else(|| MatrixError::Singular { subset: subset.iter().collect() })?;
    let a: Vec<u64> = i_idx.iter().map(|&r| gather(matrix.rows[r], &i_idx)).collect();
    let b: Vec<u64> = i_idx.iter().map(|&r| gather(matrix.rows[r], &j_idx)).collect();
    let b_h_inv = multiply(&b, &h_inv);
    let correction = multiply(&b_h_inv, &transpose(&b, j_idx.len()));
    let h_inv_bt = multiply(&h_inv, &transpose(&b, j_idx.len()));

    let mut rows = vec![0u64; n];
    let scatter = |bits: u64, idx: &[usize]| idx.iter().enumerate().fold(0u64, |acc, (k, &c)| acc | (bits >> k & 1) << c);
    for (p, &r) in i_idx.iter().enumerate() {
        rows[r] = scatter(a[p] ^ correction[p], &i_idx) | scatter(b_h_inv[p], &j_idx);
    }
    for (q, &r) in j_idx.iter().enumerate() {
        rows[r] = scatter(h_inv_bt[q], &i_idx) | scatter(h_inv[q], &j_idx);
    }
    let result = FramedGraphMatrix { size: n, rows };
    assert!(result.is_symmetric(), "partial dual matrix lost symmetry");
    Ok(result)
}

/// Local complementation at an odd vertex: adds `v vᵀ` to the block away
/// from `vertex`, where `v` is its adjacency column.
pub fn local_complement(matrix: &FramedGraphMatrix, vertex: usize) -> Result<FramedGraphMatrix, MatrixError> {
    matrix.check_index(vertex)?;
    let a = vertex - 1;
    if matrix.rows[a] >> a & 1 == 0 {
        return Err(MatrixError::EvenVertex { vertex });
    }
    let v = matrix.rows[a] & !(1 << a);
    let rows = (0..matrix.size).map(|i| if v >> i & 1 == 1 { matrix.rows[i] ^ v } else { matrix.rows[i] }).collect();
    Ok(FramedGraphMatrix { size: matrix.size, rows })
}

fn check_pivot(matrix: &FramedGraphMatrix, a: usize, b: usize) -> Result<(), MatrixError> {
    matrix.check_index(a)?;
    matrix.check_index(b)?;
    if a == b || matrix.get(a, a) || matrix.get(b, b) || !matrix.get(a, b) {
        return Err(MatrixError::PivotPrecondition { a, b });
    }
    Ok(())
}

/// Pivot on the edge `ab` between even vertices: the double partial dual
/// followed by exchanging the labels `a` and `b`. Away from `{a, b}` this adds
/// `v_a v_bᵀ + v_b v_aᵀ`.
pub fn pivot(matrix: &FramedGraphMatrix, a: usize, b: usize) -> Result<FramedGraphMatrix, MatrixError> {
    check_pivot(matrix, a, b)?;
    let (ia, ib) = (a - 1, b - 1);
    let keep = !(1u64 << ia | 1u64 << ib);
    let va = matrix.rows[ia] & keep;
    let vb = matrix.rows[ib] & keep;
    let rows = (0..matrix.size)
        .map(|i| {
            if i == ia || i == ib {
                return matrix.rows[i];
            }
            let mut r = matrix.rows[i];
            if va >> i & 1 == 1 {
                r ^= vb;
            }
            if vb >> i & 1 == 1 {
                r ^= va;
            }
            r
        })
        .collect();
    Ok(FramedGraphMatrix { size: matrix.size, rows })
}

/// The double partial dual on `{a, b}` without the label exchange.
pub fn pivot_without_relabel(matrix: &FramedGraphMatrix, a: usize, b: usize) -> Result<FramedGraphMatrix, MatrixError> {
    check_pivot(matrix, a, b)?;
    partial_dual_matrix(matrix, IndexSet::from_indices([a, b]))
}

/// Row span of `(Id | M)`.
pub fn graph_to_lspace(matrix: &FramedGraphMatrix) -> Result<Lagrangian, MatrixError> {
    Ok(Lagrangian::graph_of(matrix)?)
}

/// Integer polynomial in `x` and `y`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<(u32, u32), i64>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: i64) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn monomial(c: i64, x_degree: u32, y_degree: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(c, x_degree, y_degree);
        p
    }

    fn add_term(&mut self, c: i64, dx: u32, dy: u32) {
        if c == 0 {
            return;
        }
        let slot = self.terms.entry((dx, dy)).or_insert(0);
        *slot += c;
        if *slot == 0 {
            self.terms.remove(&(dx, dy));
        }
    }

    pub fn coefficient(&self, x_degree: u32, y_degree: u32) -> i64 {
        self.terms.get(&(x_degree, y_degree)).copied().unwrap_or(0)
    }

    /// Nonzero terms `((x-degree, y-degree), coefficient)` in increasing degree order.
    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), i64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(dx, dy), &c) in &other.terms {
            out.add_term(c, dx, dy);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(ax, ay), &a) in &self.terms {
            for (&(bx, by), &b) in &other.terms {
                out.add_term(a * b, ax + bx, ay + by);
            }
        }
        out
    }

    /// Evaluates at integer `(x, y)`.
    pub fn eval(&self, x: i64, y: i64) -> i64 {
        self.terms.iter().map(|(&(dx, dy), &c)| c * x.pow(dx) * y.pow(dy)).sum()
    }
}

impl fmt::Debug for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Monomials by descending (x-degree, y-degree), e.g. `x^2 - 2x + 2y`.
impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (&(dx, dy), &c)) in self.terms.iter().rev().enumerate() {
            let sign = match (k, c < 0) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            let power = |v: &str, d: u32| match d {
                0 => String::new(),
                1 => v.to_string(),
                _ => format!("{v}^{d}"),
            };
            let monomial = power("x", dx) + &power("y", dy);
            let magnitude = c.unsigned_abs();
            if magnitude == 1 && !monomial.is_empty() {
                write!(f, "{sign}{monomial}")?;
            } else {
                write!(f, "{sign}{magnitude}{monomial}")?;
            }
        }
        Ok(())
    }
}

fn binomial_row(r: usize) -> Vec<i64> {
    let mut row = vec![1i64];
    for _ in 0..r {
        let mut next = vec![1i64; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// `Σ_S (x-1)^{rank M[S]} (y-1)^{nullity M[S]}` over all vertex subsets,
/// bounded by [`DEFAULT_INTERLACE_BOUND`].
pub fn interlace_polynomial(matrix: &FramedGraphMatrix) -> Result<BivariatePolynomial, MatrixError> {
    interlace_polynomial_with_bound(matrix, DEFAULT_INTERLACE_BOUND)
}

pub fn interlace_polynomial_with_bound(matrix: &FramedGraphMatrix, bound: usize) -> Result<BivariatePolynomial, MatrixError> {
    let n = matrix.size;
    if n > bound || n >= 63 {
        return Err(MatrixError::BoundExceeded { size: n, bound });
    }
    // counts[r * (n + 1) + k]: subsets with rank r and nullity k.
    let tally = |lo: u64, hi: u64| {
        let mut counts = vec![0u64; (n + 1) * (n + 1)];
        for s in lo..hi {
            let size = s.count_ones() as usize;
            let mut bits = s;
            let rank = rank_of(std::iter::from_fn(|| {
                if bits == 0 {
                    return None;
                }
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(matrix.rows[i] & s)
            }));
            counts[rank * (n + 1) + (size - rank)] += 1;
        }
        counts
    };
    let total = 1u64 << n;
    let chunk = 1u64 << n.saturating_sub(6);
    let counts = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| tally(c * chunk, ((c + 1) * chunk).min(total)))
        .reduce(
            || vec![0u64; (n + 1) * (n + 1)],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut poly = BivariatePolynomial::zero();
    for r in 0..=n {
        let br = binomial_row(r);
        for k in 0..=n - r {
            let count = counts[r * (n + 1) + k] as i64;
            if count == 0 {
                continue;
            }
            let bk = binomial_row(k);
            for (a, &ca) in br.iter().enumerate() {
                for (b, &cb) in bk.iter().enumerate() {
                    let sign = if (r - a + k - b) % 2 == 0 { 1 } else { -1 };
                    poly.add_term(sign * count * ca * cb, a as u32, b as u32);
                }
            }
        }
    }
    Ok(poly)
}
