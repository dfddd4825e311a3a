//! Explicit configurations: the unit sphere of a nondegenerate quadratic
//! form on `F^4` with its null-direction lines, the Heisenberg group in
//! `GF(p^2)^3`, random direction-separated families, and the audits run on
//! them (containment, Wolff-axiom maxima, direction histograms).

use std::collections::{BTreeMap, HashMap};

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::PointSet;
use crate::error::{Error, Result};
use crate::ff::FieldSpec;
use crate::geom::{Flat, Line, Space, Subspace, Vector};
use crate::quadric::QuadraticForm;
use crate::rng::Rng;

/// A point set together with a family of lines.
#[derive(Clone, Debug, Serialize)]
pub struct Configuration {
    #[serde(skip)]
    space: Space,
    points: PointSet,
    lines: Vec<Line>,
    label: String,
}

impl Configuration {
    pub fn new(space: Space, points: PointSet, lines: Vec<Line>, label: impl Into<String>) -> Result<Self> {
        if points.universe() != space.num_points() {
            return Err(Error::Usage("point set universe does not match the space".into()));
        }
        if lines.iter().any(|l| l.dim() != space.n()) {
            return Err(Error::Usage("line dimension does not match the space".into()));
        }
        Ok(Configuration { space, points, lines, label: label.into() })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of lines with at least one point outside the point set.
    pub fn containment_violations(&self) -> usize {
        self.lines
            .par_iter()
            .filter(|l| self.space.line_keys(l).iter().any(|&k| !self.points.contains(k)))
            .count()
    }

    pub fn with_lines(&self, lines: Vec<Line>, label: impl Into<String>) -> Configuration {
        Configuration { space: self.space, points: self.points.clone(), lines, label: label.into() }
    }
}

/// The unit sphere `P = {Q(x) = 1}` and the lines `{x + tv}` with
/// `Q(x) = 1`, `<x, v> = 0`, `Q(v) = 0`, plus how often each line was
/// generated.
#[derive(Clone, Debug)]
pub struct SphereExample {
    pub config: Configuration,
    pub form: QuadraticForm,
    /// Number of generating pairs `(x, v)` per line, aligned with `config.lines()`.
    pub generating_pairs: Vec<u64>,
    pub null_directions: usize,
}

impl SphereExample {
    pub fn total_pairs(&self) -> u64 {
        self.generating_pairs.iter().sum()
    }
}

pub fn build_sphere_example(space: &Space, form: &QuadraticForm) -> Result<SphereExample> {
    if space.n() != 4 || form.dim() != 4 {
        return Err(Error::Usage("the sphere example lives in F^4".into()));
    }
    if form.field() != space.field() {
        return Err(Error::Usage("form and space use different fields".into()));
    }
    if !form.is_nondegenerate() {
        return Err(Error::Usage(format!("the sphere example needs a nondegenerate form, rank is {}", form.rank())));
    }
    if space.q() > crate::geom::MAX_Q_DIM4 {
        return Err(Error::Resource(format!("sphere example requires q <= {}", crate::geom::MAX_Q_DIM4)));
    }
    let one = space.field().one();
    let points = PointSet::from_keys(
        space.num_points(),
        (0..space.num_points() as u32).filter(|&k| form.eval(space.point_at(k).coords()) == one),
    );

    let nulls = form.null_vectors()?;
    let q = space.q();
    let per_direction: Vec<Vec<Line>> = nulls
        .par_iter()
        .map(|v| {
            let vv = space.vector(v).expect("null vector has length 4");
            let basis: Vec<Vector> = form.perp(v).iter().map(|b| space.vector(b).unwrap()).collect();
            let mut found = Vec::new();
            for idx in 0..q.pow(basis.len() as u32) {
                let mut rem = idx;
                let mut x = [0u32; 4];
                for b in &basis {
                    x = space.vaxpy(&x, rem % q, b);
                    rem /= q;
                }
                if form.eval(&x) == one {
                    found.push(space.canonical_line(&x, &vv));
                }
            }
            found
        })
        .collect();

    let mut all: Vec<Line> = per_direction.into_iter().flatten().collect();
    all.sort_unstable();
    let mut lines = Vec::new();
    let mut pairs = Vec::new();
    for l in all {
        if lines.last() == Some(&l) {
            *pairs.last_mut().unwrap() += 1;
        } else {
            lines.push(l);
            pairs.push(1);
        }
    }
    let label = format!("sphere {} diag{:?}", space.field(), form.alphas());
    Ok(SphereExample {
        config: Configuration::new(*space, points, lines, label)?,
        form: form.clone(),
        generating_pairs: pairs,
        null_directions: nulls.len(),
    })
}

/// `{(z1, z2, z3) : Im(z3) = Im(z1 conj(z2))}` in `GF(p^2)^3`.
pub fn heisenberg_points(field: &FieldSpec) -> Result<(Space, PointSet)> {
    if field.degree() != 2 {
        return Err(Error::Usage("the Heisenberg group needs a quadratic extension".into()));
    }
    let space = Space::new(*field, 3)?;
    let q = field.q();
    let mut points = PointSet::new(space.num_points());
    for z1 in 0..q {
        for z2 in 0..q {
            let target = field.imaginary(field.mul(z1, field.frobenius(z2)));
            for z3 in 0..q {
                if field.imaginary(z3) == target {
                    points.insert(space.key_of(&[z1, z2, z3, 0]));
                }
            }
        }
    }
    Ok((space, points))
}

/// The Heisenberg configuration with its line family recovered by a full
/// scan of `Gr(F^3, 1)`.
pub fn build_heisenberg(field: &FieldSpec) -> Result<Configuration> {
    let (space, points) = heisenberg_points(field)?;
    let lines = lines_contained(&space, &points)?;
    Configuration::new(space, points, lines, format!("heisenberg {field}"))
}

/// Every line of `F^n` all of whose points lie in `points`, in canonical order.
pub fn lines_contained(space: &Space, points: &PointSet) -> Result<Vec<Line>> {
    if points.universe() != space.num_points() {
        return Err(Error::Usage("point set universe does not match the space".into()));
    }
    let lines = space.enumerate_lines()?;
    let q = space.q();
    Ok((0..lines.len())
        .into_par_iter()
        .map(|i| lines.get(i))
        .filter(|l| (0..q).all(|t| points.contains(space.key_of(&space.line_point(l, t)))))
        .collect())
}

/// For every `k`-flat containing at least one line of the family, the number
/// of family lines it contains. Works subspace by subspace: a line lies in a
/// translate of `W` iff its direction lies in `W`, and the translate is
/// identified by reducing the line's base modulo `W`.
pub fn flat_line_counts(space: &Space, lines: &[Line], k: usize) -> Result<BTreeMap<Flat, u32>> {
    let subs = space.subspaces(k)?;
    let per_sub: Vec<Vec<(Flat, u32)>> = subs
        .par_iter()
        .map(|w| {
            let mut counts: HashMap<Vector, u32> = HashMap::new();
            for l in lines {
                if space.subspace_contains(w, l.raw_direction()) {
                    *counts.entry(space.reduce(w, l.base().raw())).or_default() += 1;
                }
            }
            let mut v: Vec<(Flat, u32)> = counts
                .into_iter()
                .map(|(base, c)| (space.flat_in(w, &base), c))
                .collect();
            v.sort_unstable();
            v
        })
        .collect();
    Ok(per_sub.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WolffAudit {
    pub k: usize,
    pub max_lines: u32,
    /// Canonically least flat attaining the maximum.
    pub argmax: Option<Flat>,
    /// `max_lines / q^{k-1}`.
    pub ratio: f64,
}

pub fn wolff_audit(space: &Space, lines: &[Line], k: usize) -> Result<WolffAudit> {
    if !(2..=3).contains(&k) || k >= space.n() {
        return Err(Error::Usage(format!("Wolff audit needs 2 <= k < n, got k = {k}")));
    }
    let counts = flat_line_counts(space, lines, k)?;
    let mut best: Option<(&Flat, u32)> = None;
    for (f, &c) in &counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((f, c));
        }
    }
    let max_lines = best.map_or(0, |(_, c)| c);
    Ok(WolffAudit {
        k,
        max_lines,
        argmax: best.map(|(f, _)| *f),
        ratio: max_lines as f64 / (space.q() as f64).powi(k as i32 - 1),
    })
}

/// Lines of the family contained in one flat.
pub fn lines_in_flat(space: &Space, lines: &[Line], flat: &Flat) -> usize {
    lines.iter().filter(|l| space.flat_contains_line(flat, l)).count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionAudit {
    pub all_distinct: bool,
    pub histogram: BTreeMap<Vector, u32>,
}

impl DirectionAudit {
    /// Whether every projective direction of the space occurs.
    pub fn covers_all(&self, space: &Space) -> bool {
        self.histogram.len() as u64 == space.num_directions()
    }

    pub fn max_multiplicity(&self) -> u32 {
        self.histogram.values().copied().max().unwrap_or(0)
    }
}

/// A family points in different directions iff no two lines share a
/// canonical direction (which covers both the parallel and identical cases).
pub fn direction_audit(lines: &[Line]) -> DirectionAudit {
    let mut histogram = BTreeMap::new();
    for l in lines {
        *histogram.entry(*l.raw_direction()).or_insert(0u32) += 1;
    }
    let all_distinct = histogram.values().all(|&c| c == 1);
    DirectionAudit { all_distinct, histogram }
}

pub fn random_vector(space: &Space, rng: &mut Rng) -> Vector {
    let mut v = [0u32; 4];
    for c in v[..space.n()].iter_mut() {
        *c = rng.random_range(0..space.q());
    }
    v
}

/// `count` lines in distinct, uniformly chosen directions with uniformly
/// random bases, together with the union of their points.
pub fn random_direction_separated(space: &Space, count: usize, rng: &mut Rng, label: &str) -> Result<Configuration> {
    let mut dirs = space.directions();
    if count > dirs.len() {
        return Err(Error::Usage(format!("only {} directions available, asked for {count}", dirs.len())));
    }
    // Partial Fisher-Yates.
    for i in 0..count {
        let j = rng.random_range(i..dirs.len());
        dirs.swap(i, j);
    }
    let mut lines: Vec<Line> = dirs[..count]
        .iter()
        .map(|d| space.canonical_line(&random_vector(space, rng), d))
        .collect();
    lines.sort_unstable();
    let mut points = PointSet::new(space.num_points());
    for l in &lines {
        for k in space.line_keys(l) {
            points.insert(k);
        }
    }
    Configuration::new(*space, points, lines, label)
}

/// One random line in every direction: a random Besicovitch set.
pub fn random_besicovitch(space: &Space, rng: &mut Rng) -> Result<Configuration> {
    let count = space.num_directions() as usize;
    random_direction_separated(space, count, rng, &format!("random besicovitch {}^{}", space.field(), space.n()))
}

/// Every line contained in a flat of dimension 2 or 3, in canonical order.
pub fn lines_of_flat(space: &Space, flat: &Flat) -> Result<Vec<Line>> {
    let sub = flat.direction_space();
    let inner = Space::new(*space.field(), flat.dim())?;
    let mut out = Vec::new();
    for l in inner.enumerate_lines()?.iter() {
        let base = space.flat_point(flat, &l.base().coords()[..flat.dim()]);
        let dir = combine(space, &sub, l.direction());
        out.push(space.canonical_line(&base, &dir));
    }
    out.sort_unstable();
    Ok(out)
}

fn combine(space: &Space, sub: &Subspace, coeffs: &[u32]) -> Vector {
    sub.rows().iter().zip(coeffs).fold([0; 4], |acc, (row, &c)| space.vaxpy(&acc, c, row))
}

/// All `k`-flats of `F^n` lying inside `flat`.
pub fn flats_of_flat(space: &Space, flat: &Flat, k: usize) -> Result<Vec<Flat>> {
    if k >= flat.dim() {
        return Err(Error::Usage(format!("no proper {k}-flats inside a {}-flat", flat.dim())));
    }
    let inner = Space::new(*space.field(), flat.dim())?;
    let sub = flat.direction_space();
    let mut out = Vec::new();
    for g in inner.enumerate_flats(k)?.iter() {
        let base = space.flat_point(flat, &g.base().coords()[..flat.dim()]);
        let dirs: Vec<Vector> = g.directions().iter().map(|d| combine(space, &sub, &d[..flat.dim()])).collect();
        out.push(space.flat_from_raw(&base, &dirs)?);
    }
    out.sort_unstable();
    Ok(out)
}
