//! Command-line front end: file formats, commands and the seeded check suite.
//!
//! Exit codes: 0 success, 2 unreadable or malformed input, 3 a precondition
//! of the requested operation fails, 4 an internal consistency check fails.

use std::fmt::Write as _;
use std::io::{self, Read, Write};

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bialgebra::{self, BialgebraError};
use crate::f2sympl::{self, lagrangians, mu_map, v1_map, v2_map, IndexSet, SymplecticError};
use crate::homomap::{self, HomomapError};
use crate::matrixops::{self, FramedGraphMatrix, MatrixError};
use crate::ribbon::{RibbonError, RibbonGraph, RotationSystem};

pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

/// Seed used by `check` when none is given; the golden transcript uses it.
pub const DEFAULT_CHECK_SEED: u64 = 20_240_601;
pub const DEFAULT_CHECK_COUNT: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    Parse(String),
    Precondition(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Precondition(m) => write!(f, "precondition failed: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<RibbonError> for CliError {
    fn from(e: RibbonError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<SymplecticError> for CliError {
    fn from(e: SymplecticError) -> Self {
        match e {
            SymplecticError::BoundExceeded { .. } | SymplecticError::GradeTooLarge { .. } => {
                CliError::Precondition(e.to_string())
            }
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<HomomapError> for CliError {
    fn from(e: HomomapError) -> Self {
        match e {
            HomomapError::NotOneVertex { .. } | HomomapError::TooManyEdges { .. } => {
                CliError::Precondition(e.to_string())
            }
            HomomapError::Symplectic(s) => s.into(),
            HomomapError::Inconsistent => CliError::Internal(e.to_string()),
        }
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::Symplectic(s) => s.into(),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<BialgebraError> for CliError {
    fn from(e: BialgebraError) -> Self {
        match e {
            BialgebraError::BoundExceeded { .. }
            | BialgebraError::IndexOutOfRange { .. }
            | BialgebraError::RepeatedIndex { .. } => CliError::Precondition(e.to_string()),
            BialgebraError::Symplectic(s) => s.into(),
            BialgebraError::Homomap(h) => h.into(),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// A syntax error with its 1-based line number.
fn syntax(line: usize, message: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("line {line}: {message}"))
}

/// Non-empty, comment-stripped lines with their numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let line = line.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        (!words.is_empty()).then_some((k + 1, words))
    })
}

fn numbers(line: usize, words: &[&str]) -> Result<Vec<usize>, CliError> {
    words.iter().map(|w| w.parse::<usize>().map_err(|_| syntax(line, format!("expected a number, found {w:?}")))).collect()
}

fn single_number(line: usize, keyword: &str, words: &[&str]) -> Result<usize, CliError> {
    match numbers(line, words)?.as_slice() {
        [n] => Ok(*n),
        _ => Err(syntax(line, format!("{keyword} takes exactly one number"))),
    }
}

/// Parses a ribbon file into a rotation system.
pub fn parse_ribbon(text: &str) -> Result<RotationSystem, CliError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, w)) if w == ["ribbon"] => {}
        Some((line, _)) => return Err(syntax(line, "expected header \"ribbon\"")),
        None => return Err(CliError::Parse("empty file".into())),
    }
    let mut edges = None;
    let mut twisted = Vec::new();
    let mut words = Vec::new();
    for (line, w) in lines {
        match w[0] {
            "edges" if edges.is_some() => return Err(syntax(line, "duplicate edges line")),
            "edges" => edges = Some(single_number(line, "edges", &w[1..])?),
            "twist" => twisted.extend(numbers(line, &w[1..])?),
            "vertex" if w.len() == 1 => return Err(syntax(line, "vertex without half-edges")),
            "vertex" => words.push((line, numbers(line, &w[1..])?)),
            other => return Err(syntax(line, format!("unknown keyword {other:?}"))),
        }
    }
    let edges = edges.ok_or_else(|| CliError::Parse("missing edges line".into()))?;
    if let Some(&t) = twisted.iter().find(|&&t| t == 0 || t > edges) {
        return Err(CliError::Parse(format!("twisted label {t} out of range 1..={edges}")));
    }
    for (line, word) in &words {
        if let Some(&l) = word.iter().find(|&&l| l == 0 || l > edges) {
            return Err(syntax(*line, format!("label {l} out of range 1..={edges}")));
        }
    }
    RotationSystem::new(edges, words.into_iter().map(|(_, w)| w).collect(), &twisted)
        .map_err(|e| CliError::Parse(e.to_string()))
}

/// Ribbon file text for a rotation system.
pub fn format_ribbon(rs: &RotationSystem) -> String {
    let mut out = format!("ribbon\nedges {}\n", rs.edges());
    let twisted = rs.twisted();
    if !twisted.is_empty() {
        let _ = writeln!(out, "twist {}", join(&twisted));
    }
    for word in rs.words() {
        let _ = writeln!(out, "vertex {}", join(word));
    }
    out
}

fn join(labels: &[usize]) -> String {
    labels.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Parses a graph file into a framed adjacency matrix.
pub fn parse_graph(text: &str) -> Result<FramedGraphMatrix, CliError> {
    let mut lines = content_lines(text);
    match lines.next() {
        Some((_, w)) if w == ["graph"] => {}
        Some((line, _)) => return Err(syntax(line, "expected header \"graph\"")),
        None => return Err(CliError::Parse("empty file".into())),
    }
    let mut size = None;
    let mut frames = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (line, w) in lines {
        match w[0] {
            "vertices" if size.is_some() => return Err(syntax(line, "duplicate vertices line")),
            "vertices" => {
                let n = single_number(line, "vertices", &w[1..])?;
                if n > matrixops::MAX_SIZE {
                    return Err(syntax(line, format!("at most {} vertices supported", matrixops::MAX_SIZE)));
                }
                size = Some(n);
            }
            "frame" => frames.extend(numbers(line, &w[1..])?.into_iter().map(|v| (line, v))),
            "edge" => {
                let ends = numbers(line, &w[1..])?;
                let [i, j] = ends[..] else { return Err(syntax(line, "edge takes two vertices")) };
                let n = size.ok_or_else(|| syntax(line, "edge before vertices line"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(syntax(line, format!("edge {i} {j} out of range 1..={n}")));
                }
                if i == j {
                    return Err(syntax(line, "loops are written as frame entries"));
                }
                if edges.iter().any(|&(a, b)| (a, b) == (i.min(j), i.max(j))) {
                    return Err(syntax(line, format!("repeated edge {i} {j}")));
                }
                edges.push((i.min(j), i.max(j)));
            }
            other => return Err(syntax(line, format!("unknown keyword {other:?}"))),
        }
    }
    let n = size.ok_or_else(|| CliError::Parse("missing vertices line".into()))?;
    if let Some(&(line, v)) = frames.iter().find(|&&(_, v)| v == 0 || v > n) {
        return Err(syntax(line, format!("framed vertex {v} out of range 1..={n}")));
    }
    let frames = IndexSet::from_indices(frames.into_iter().map(|(_, v)| v));
    FramedGraphMatrix::from_graph(n, frames, &edges).map_err(|e| CliError::Parse(e.to_string()))
}

#[derive(Parser, Debug)]
#[command(name = "lspace", version, about = "Lagrangian L-spaces of ribbon graphs over GF(2)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Counts, orientability and the arc table of a ribbon file.
    Info { path: String },
    /// The L-space as rows `e-block|f-block`.
    Lspace { path: String },
    /// Partial dual along the listed edges, as a ribbon file.
    Dual { path: String, edges: Vec<usize> },
    /// A Vassiliev move at an arc, as a ribbon file.
    Vmove {
        path: String,
        #[arg(long, value_enum)]
        kind: MoveKind,
        #[arg(long)]
        arc: usize,
        /// Edge held fixed by the second move.
        #[arg(long)]
        fixed: Option<usize>,
    },
    /// Intersection matrix of a one-vertex ribbon file.
    Intmatrix { path: String },
    /// Interlace polynomial of a graph file.
    Interlace { path: String },
    /// Number of Lagrangians of a grade, or of their orbits.
    Lgr {
        grade: usize,
        #[arg(long)]
        orbits: bool,
    },
    /// Table of orbit counts and four-term quotient dimensions.
    Dims {
        #[arg(long, default_value_t = 4)]
        max: usize,
        #[arg(long)]
        threads: Option<usize>,
        /// Also sample this many ribbon graphs per grade and report their span.
        #[arg(long)]
        realized: Option<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also report the relation rank generated by neighbouring pairs only.
        #[arg(long)]
        neighbouring: bool,
    },
    /// Seeded randomized invariant checks.
    Check {
        #[arg(long, default_value_t = DEFAULT_CHECK_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CHECK_COUNT)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MoveKind {
    V1,
    V2,
}

fn read_input(path: &str) -> Result<String, CliError> {
    let mut text = String::new();
    let result = if path == "-" {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    result.map_err(|e| CliError::Parse(format!("{path}: {e}")))?;
    Ok(text)
}

fn load_ribbon(path: &str) -> Result<RibbonGraph, CliError> {
    Ok(RibbonGraph::from_rotation(&parse_ribbon(&read_input(path)?)?))
}

pub fn cmd_info(g: &RibbonGraph) -> String {
    let mut out = format!("edges {}\n", g.edge_count());
    let orientable = if g.is_orientable() { "orientable" } else { "non-orientable" };
    let _ = writeln!(
        out,
        "vertices {}, boundary {}, chi {}, {orientable}",
        g.vertex_count(),
        g.boundary_count(),
        g.euler_characteristic()
    );
    out.push_str("arcs\n");
    for (id, (x, y)) in g.arcs().iter().enumerate() {
        let _ = writeln!(out, "  {id}: {x} -- {y}  edges {} {}", x.edge(), y.edge());
    }
    out
}

pub fn cmd_lspace(g: &RibbonGraph) -> Result<String, CliError> {
    Ok(homomap::lspace(g)?.to_string())
}

pub fn cmd_dual(g: &RibbonGraph, edges: &[usize]) -> Result<String, CliError> {
    let n = g.edge_count();
    if let Some(&e) = edges.iter().find(|&&e| e == 0 || e > n) {
        return Err(RibbonError::LabelOutOfRange { label: e, edges: n }.into());
    }
    Ok(format_ribbon(&g.partial_dual(IndexSet::from_indices(edges.iter().copied())).to_rotation()))
}

pub fn cmd_vmove(g: &RibbonGraph, kind: MoveKind, arc: usize, fixed: Option<usize>) -> Result<String, CliError> {
    let moved = match (kind, fixed) {
        (MoveKind::V1, _) => g.vassiliev1(arc)?,
        (MoveKind::V2, Some(fixed)) => g.vassiliev2(arc, fixed)?,
        (MoveKind::V2, None) => return Err(CliError::Precondition("the second move needs --fixed <edge>".into())),
    };
    Ok(format_ribbon(&moved.to_rotation()))
}

pub fn cmd_intmatrix(g: &RibbonGraph) -> Result<String, CliError> {
    Ok(homomap::intersection_matrix(g)?.to_string())
}

pub fn cmd_interlace(m: &FramedGraphMatrix) -> Result<String, CliError> {
    Ok(format!("{}\n", matrixops::interlace_polynomial(m)?))
}

pub fn cmd_lgr(grade: usize, orbits: bool) -> Result<String, CliError> {
    let count = if orbits { bialgebra::grade_dimension(grade)? } else { lagrangians(grade)?.count() };
    Ok(format!("{count}\n"))
}

pub fn cmd_dims(max: usize, realized: Option<usize>, seed: u64, neighbouring: bool) -> Result<String, CliError> {
    if max > bialgebra::DEFAULT_DIMENSION_BOUND {
        return Err(BialgebraError::BoundExceeded { grade: max, bound: bialgebra::DEFAULT_DIMENSION_BOUND }.into());
    }
    let classes = bialgebra::classes_up_to(max)?;
    let mut out = String::from("grade lagrangians orbits burnside relation_rank dim_k\n");
    for grade in 0..=max {
        let r = bialgebra::dimension_report(grade, &classes)?;
        let _ = writeln!(
            out,
            "{} {} {} {} {} {}",
            r.grade, r.lagrangians, r.orbits, r.orbits_burnside, r.relation_rank, r.dim_k
        );
    }
    if let Some(samples) = realized {
        out.push_str("grade samples distinct_classes realized_rank dim_k\n");
        for grade in 1..=max {
            let r = bialgebra::realized_rank(grade, samples, seed, &classes)?;
            let _ = writeln!(out, "{} {} {} {} {}", r.grade, r.samples, r.distinct_classes, r.realized_rank, r.dim_k);
        }
    }
    if neighbouring {
        out.push_str("grade all_pairs_rank neighbouring_rank\n");
        for grade in 2..=max {
            let all = bialgebra::exact_rank(&bialgebra::relation_rows(grade, &classes)?, classes[grade].len())?;
            let _ = writeln!(out, "{grade} {all} {}", bialgebra::neighbouring_rank(grade, &classes)?);
        }
    }
    Ok(out)
}

/// Seeded random ribbon graph with 1 to `max_edges` edges.
fn random_graph(rng: &mut ChaCha8Rng, max_edges: usize) -> RibbonGraph {
    let n = rng.random_range(1..=max_edges);
    RibbonGraph::from_rotation(&RotationSystem::random(rng, n))
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> IndexSet {
    IndexSet::from_mask(rng.random::<u64>() & ((1u64 << n) - 1))
}

/// A failed check: which suite, which case, and text reproducing it.
fn violation(suite: &str, case: usize, g: &RibbonGraph, detail: impl std::fmt::Display) -> CliError {
    CliError::Internal(format!(
        "suite {suite} case {case}: {detail}\nreproducer:\n{}",
        format_ribbon(&g.to_rotation())
    ))
}

/// Runs every invariant suite on `count` seeded random inputs each. Reports
/// per-suite aggregates so the transcript pins actual computed values.
pub fn cmd_check(seed: u64, count: usize) -> Result<String, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = format!("check seed={seed} count={count}\n");

    // Lagrangian theorem
    let (mut edges, mut orientable, mut vertices) = (0, 0, 0);
    for case in 0..count {
        let g = random_graph(&mut rng, 8);
        let image = homomap::phi_image(&g)?;
        if image.dim() != g.edge_count() || !image.is_isotropic() {
            return Err(violation("lagrangian", case, &g, format!("image has dimension {}", image.dim())));
        }
        edges += g.edge_count();
        vertices += g.vertex_count();
        orientable += g.is_orientable() as usize;
    }
    let _ = writeln!(out, "lagrangian: {count} graphs, {edges} edges, {vertices} vertices, {orientable} orientable, ok");

    // commuting squares for duals and both moves
    let (mut duals, mut first, mut second) = (0, 0, 0);
    for case in 0..count {
        let g = random_graph(&mut rng, 8);
        let n = g.edge_count();
        let l = homomap::lspace(&g)?;
        let i = rng.random_range(1..=n);
        if homomap::lspace(&g.partial_dual(IndexSet::from_indices([i])))? != mu_map(n, i)?.apply(&l)? {
            return Err(violation("squares", case, &g, format!("partial dual at edge {i}")));
        }
        duals += 1;
        let arc = rng.random_range(0..2 * n);
        let (a, b) = g.arc_edges(arc)?;
        if a == b {
            continue;
        }
        let Ok(moved) = g.vassiliev1(arc) else { continue };
        if homomap::lspace(&moved)? != v1_map(n, a, b)?.apply(&l)? {
            return Err(violation("squares", case, &g, format!("first move at arc {arc}")));
        }
        first += 1;
        let (fixed, other) = if rng.random() { (a, b) } else { (b, a) };
        let moved = g.vassiliev2(arc, fixed)?;
        if homomap::lspace(&moved)? != v2_map(n, fixed, other)?.apply(&l)? {
            return Err(violation("squares", case, &g, format!("second move at arc {arc} fixing {fixed}")));
        }
        let counts = |h: &RibbonGraph| (h.vertex_count(), h.boundary_count(), h.is_orientable());
        if counts(&moved) != counts(&g) {
            return Err(violation("squares", case, &g, format!("second move at arc {arc} changed the surface")));
        }
        second += 1;
    }
    let _ = writeln!(out, "squares: {duals} duals, {first} first moves, {second} second moves, ok");

    // partial duals form a group and serialization round-trips
    let mut boundary = 0;
    for case in 0..count {
        let g = random_graph(&mut rng, 8);
        let n = g.edge_count();
        let (x, y) = (random_subset(&mut rng, n), random_subset(&mut rng, n));
        let d = g.partial_dual(x);
        if d.partial_dual(y) != g.partial_dual(x.symmetric_difference(y)) || d.partial_dual(x) != g {
            return Err(violation("duals", case, &g, format!("subsets {:#b} {:#b}", x.mask(), y.mask())));
        }
        let text = format_ribbon(&g.to_rotation());
        if RibbonGraph::from_rotation(&parse_ribbon(&text)?) != g {
            return Err(violation("duals", case, &g, "parse after serialize changed the graph"));
        }
        let back = RibbonGraph::from_rotation(&parse_ribbon(&format_ribbon(&d.to_rotation()))?);
        if !back.equivalent(&d) {
            return Err(violation("duals", case, &g, format!("dual along {:#b} did not round-trip", x.mask())));
        }
        boundary += d.boundary_count();
    }
    let _ = writeln!(out, "duals: {count} graphs, {boundary} boundary components after dualising, ok");

    // symplectic reduction
    let mut restricted = 0;
    for _ in 0..count {
        let n = rng.random_range(1..=4);
        let k = rng.random_range(0..f2sympl::lagrangian_count(n) as usize);
        let l = lagrangians(n)?.nth(k).expect("index below the count");
        let outer = random_subset(&mut rng, n);
        let reduced = l.reduce(outer)?;
        let inner = random_subset(&mut rng, outer.len());
        // inner indexes positions inside outer
        let positions: Vec<usize> = outer.iter().collect();
        let direct = IndexSet::from_indices(inner.iter().map(|p| positions[p - 1]));
        if reduced.reduce(inner)? != l.reduce(direct)? {
            return Err(CliError::Internal(format!("suite reduction: nested restriction differs for {l:?}")));
        }
        restricted += reduced.grade();
    }
    let _ = writeln!(out, "reduction: {count} lagrangians, {restricted} kept indices, ok");

    // matrix calculus
    let (mut complements, mut pivots, mut degree) = (0, 0, 0);
    for _ in 0..count {
        let n = rng.random_range(1..=6);
        let m = random_matrix(&mut rng, n);
        let a = rng.random_range(1..=n);
        if m.get(a, a) {
            let single = matrixops::partial_dual_matrix(&m, IndexSet::from_indices([a]))?;
            if matrixops::local_complement(&m, a)? != single {
                return Err(CliError::Internal(format!("suite matrices: local complement at {a} of\n{m}")));
            }
            complements += 1;
        }
        let b = rng.random_range(1..=n);
        if a != b && !m.get(a, a) && !m.get(b, b) && m.get(a, b) {
            let dual = matrixops::partial_dual_matrix(&m, IndexSet::from_indices([a, b]))?.swap_labels(a, b)?;
            if matrixops::pivot(&m, a, b)? != dual {
                return Err(CliError::Internal(format!("suite matrices: pivot at {a} {b} of\n{m}")));
            }
            pivots += 1;
        }
        let k = rng.random_range(1..=4);
        let other = random_matrix(&mut rng, k);
        let q = matrixops::interlace_polynomial(&m.direct_sum(&other)?)?;
        let product = matrixops::interlace_polynomial(&m)?.mul(&matrixops::interlace_polynomial(&other)?);
        if q != product {
            return Err(CliError::Internal(format!("suite matrices: interlace not multiplicative for\n{m}\nand\n{other}")));
        }
        degree += q.terms().map(|((x, y), _)| x + y).max().unwrap_or(0);
    }
    let _ = writeln!(out, "matrices: {complements} local complements, {pivots} pivots, degree total {degree}, ok");
    out.push_str("check passed\n");
    Ok(out)
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> FramedGraphMatrix {
    let mut rows = vec![0u64; n];
    for i in 0..n {
        for j in i..n {
            if rng.random() {
                rows[i] |= 1 << j;
                rows[j] |= 1 << i;
            }
        }
    }
    FramedGraphMatrix::from_row_masks(n, rows).expect("built symmetric")
}

fn execute(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Info { path } => Ok(cmd_info(&load_ribbon(&path)?)),
        Command::Lspace { path } => cmd_lspace(&load_ribbon(&path)?),
        Command::Dual { path, edges } => cmd_dual(&load_ribbon(&path)?, &edges),
        Command::Vmove { path, kind, arc, fixed } => cmd_vmove(&load_ribbon(&path)?, kind, arc, fixed),
        Command::Intmatrix { path } => cmd_intmatrix(&load_ribbon(&path)?),
        Command::Interlace { path } => cmd_interlace(&parse_graph(&read_input(&path)?)?),
        Command::Lgr { grade, orbits } => cmd_lgr(grade, orbits),
        Command::Dims { max, threads, realized, seed, neighbouring } => match threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Internal(e.to_string()))?
                .install(|| cmd_dims(max, realized, seed, neighbouring)),
            None => cmd_dims(max, realized, seed, neighbouring),
        },
        Command::Check { seed, count } => cmd_check(seed, count),
    }
}

/// Runs the tool on `args` (program name first), returning the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { 0 };
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    match execute(cli) {
        Ok(text) => match out.write_all(text.as_bytes()) {
            Ok(()) => 0,
            Err(e) => {
                let _ = writeln!(err, "{e}");
                EXIT_INTERNAL
            }
        },
        Err(e) => {
            let _ = writeln!(err, "lspace: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("lspace").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    fn graph(text: &str) -> RibbonGraph {
        RibbonGraph::from_rotation(&parse_ribbon(text).unwrap())
    }

    const ANNULUS: &str = "ribbon\nedges 1\nvertex 1 1\n";
    const MOBIUS: &str = "ribbon\nedges 1\ntwist 1\nvertex 1 1\n";
    const TORUS: &str = "ribbon\n# one-holed torus\nedges 2\nvertex 1 2 1 2  # interleaved\n";
    const DUMBBELL: &str = "ribbon\nedges 1\nvertex 1\nvertex 1\n";

    #[test]
    fn info_reports() {
        assert!(cmd_info(&graph(ANNULUS)).contains("vertices 1, boundary 2, chi 0, orientable"));
        assert!(cmd_info(&graph(MOBIUS)).contains("boundary 1, chi 0, non-orientable"));
        assert!(cmd_info(&graph(TORUS)).contains("boundary 1, chi -1, orientable"));
        assert!(cmd_info(&graph(TORUS)).contains("  1: (1,1) -- (2,0)  edges 1 2"));
    }

    #[test]
    fn lspace_output() {
        assert_eq!(cmd_lspace(&graph(TORUS)).unwrap(), "lspace n=2\n10|01\n01|10\n");
        assert_eq!(cmd_lspace(&graph(ANNULUS)).unwrap(), "lspace n=1\n1|0\n");
        assert_eq!(cmd_lspace(&graph(DUMBBELL)).unwrap(), "lspace n=1\n0|1\n");
    }

    #[test]
    fn dual_and_moves_write_ribbon_files() {
        assert_eq!(cmd_dual(&graph(ANNULUS), &[1]).unwrap(), "ribbon\nedges 1\nvertex 1\nvertex 1\n");
        assert!(matches!(cmd_dual(&graph(ANNULUS), &[2]), Err(CliError::Precondition(_))));
        let middle = graph(TORUS).arc_id(crate::ribbon::Corner::new(1, 2));
        assert_eq!(
            cmd_vmove(&graph(TORUS), MoveKind::V1, middle, None).unwrap(),
            "ribbon\nedges 2\nvertex 1 1 2 2\n"
        );
        assert!(matches!(cmd_vmove(&graph(TORUS), MoveKind::V2, middle, None), Err(CliError::Precondition(_))));
        assert!(matches!(cmd_vmove(&graph(TORUS), MoveKind::V1, 17, None), Err(CliError::Precondition(_))));
    }

    #[test]
    fn matrix_commands() {
        assert_eq!(cmd_intmatrix(&graph(TORUS)).unwrap(), "0 1\n1 0\n");
        let e = cmd_intmatrix(&graph(DUMBBELL)).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_PRECONDITION);
        assert!(e.to_string().contains("found 2 vertices"));
        let m = parse_graph("graph\nvertices 2\nedge 1 2\n").unwrap();
        assert_eq!(cmd_interlace(&m).unwrap(), "x^2 - 2x + 2y\n");
        assert_eq!(cmd_lgr(2, false).unwrap(), "15\n");
        assert_eq!(cmd_lgr(1, true).unwrap(), "3\n");
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = |text: &str| match parse_ribbon(text) {
            Err(CliError::Parse(m)) => m,
            other => panic!("expected a parse error, got {other:?}"),
        };
        assert!(bad("ribon\n").contains("line 1"));
        assert!(bad("ribbon\nedges 2\nvertex 1 2 1\n").contains("label 2 occurs 1 times"));
        assert!(bad("ribbon\nedges 1\nvertex 1 x\n").contains("line 3"));
        assert!(bad("ribbon\nedges 1\nvertex\nvertex 1 1\n").contains("line 3"));
        assert!(bad("ribbon\nvertex 1 1\n").contains("missing edges"));
        assert!(bad("").contains("empty"));
        let graph_bad = |text: &str| parse_graph(text).unwrap_err().to_string();
        assert!(graph_bad("graph\nvertices 2\nedge 1 2\nedge 2 1\n").contains("line 4: repeated edge"));
        assert!(graph_bad("graph\nvertices 2\nedge 1 1\n").contains("line 3"));
        assert!(graph_bad("graph\nvertices 2\nedge 1 3\n").contains("out of range"));
    }

    #[test]
    fn format_round_trip() {
        let text = "ribbon\nedges 3\ntwist 1 3\nvertex 3 1\nvertex 2 3 2 1\n";
        assert_eq!(format_ribbon(&parse_ribbon(text).unwrap()), text);
        let g = graph(text);
        assert_eq!(graph(&format_ribbon(&g.to_rotation())), g);
    }

    #[test]
    fn exit_codes() {
        let dir = std::env::temp_dir().join(format!("lspace-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.join(name);
            std::fs::write(&p, text).unwrap();
            p.to_string_lossy().into_owned()
        };
        let torus = write("torus.ribbon", TORUS);
        let broken = write("broken.ribbon", "ribbon\nedges 1\nvertex 1 2\n");
        let dumbbell = write("dumbbell.ribbon", DUMBBELL);
        assert_eq!(run_capture(&["lspace", &torus]), (0, "lspace n=2\n10|01\n01|10\n".into(), String::new()));
        assert_eq!(run_capture(&["lspace", &broken]).0, EXIT_PARSE);
        assert_eq!(run_capture(&["intmatrix", &dumbbell]).0, EXIT_PRECONDITION);
        assert_eq!(run_capture(&["lspace", "/nonexistent/file"]).0, EXIT_PARSE);
        assert_eq!(run_capture(&["frobnicate"]).0, EXIT_PARSE);
        assert_eq!(run_capture(&["lgr", "9"]).0, EXIT_PRECONDITION);
        assert_eq!(run_capture(&["--help"]).0, 0);
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn dims_is_thread_count_independent() {
        let one = run_capture(&["dims", "--max", "3", "--threads", "1"]);
        let four = run_capture(&["dims", "--max", "3", "--threads", "4"]);
        assert_eq!(one.0, 0);
        assert_eq!(one, four);
        assert!(one.1.starts_with("grade lagrangians orbits burnside relation_rank dim_k\n0 1 1 1 0 1\n1 3 3 3 0 3\n"));
    }

    #[test]
    fn check_is_deterministic() {
        let a = cmd_check(7, 30).unwrap();
        assert_eq!(a, cmd_check(7, 30).unwrap());
        assert!(a.ends_with("check passed\n"));
    }
}
