//! Frames, their transversal families and reguli.
//!
//! A frame is three distinct, mutually skew lines together with the 3-flat
//! that contains them. Its transversals are the lines meeting all three;
//! their union is the regulus, a quadric surface in the 3-flat. A
//! transversal meets the 3-flat in at least three points, hence lies in it,
//! so transversals are found by scanning the `q^2 (q^2 + q + 1)` lines of the
//! 3-flat instead of all of `Gr(F^4, 1)`.

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::PointSet;
use crate::construct::{direction_audit, flats_of_flat, lines_of_flat};
use crate::error::{Error, Result};
use crate::geom::{Flat, Line, Space, Vector};
use crate::linalg;
use crate::rng::Rng;

/// Field size above which full-Grassmannian transversal-variety scans are refused.
pub const MAX_Q_VARIETY: u32 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Frame {
    pub lines: [Line; 3],
    pub lambda: Flat,
}

pub fn make_frame(space: &Space, l1: Line, l2: Line, l3: Line) -> Result<Frame> {
    let lines = [l1, l2, l3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if !space.skew(&lines[i], &lines[j])? {
            return Err(Error::Degenerate(format!("frame lines {} and {} are not skew", i + 1, j + 1)));
        }
    }
    let lambda = space.span3(&l1, &l2)?;
    if !space.flat_contains_line(&lambda, &l3) {
        return Err(Error::NotInCommonThreeSpace(format!("{l3} is not inside span3({l1}, {l2})")));
    }
    Ok(Frame { lines, lambda })
}

/// The model frame: lines `{(x, y_i, x y_i, 0)}` for the given distinct `y_i`.
pub fn model_frame(space: &Space, ys: [u32; 3]) -> Result<Frame> {
    let [a, b, c] = ys.map(|y| model_line(space, y));
    make_frame(space, a?, b?, c?)
}

fn model_line(space: &Space, y: u32) -> Result<Line> {
    let mut base = vec![0u32; space.n()];
    let mut dir = vec![0u32; space.n()];
    if space.n() < 3 {
        return Err(Error::Usage("model lines need n >= 3".into()));
    }
    base[1] = y;
    dir[0] = 1;
    dir[2] = y;
    space.line_from(&space.point(&base)?, &dir)
}

/// The model lines `{(x, y_i, x y_i)}` of `F^3` (or the first three
/// coordinates of a larger space).
pub fn model_lines(space: &Space, ys: [u32; 3]) -> Result<[Line; 3]> {
    let [a, b, c] = ys.map(|y| model_line(space, y));
    Ok([a?, b?, c?])
}

pub fn translate_line(space: &Space, l: &Line, shift: &Vector) -> Line {
    space.canonical_line(&space.vadd(l.base().raw(), shift), l.raw_direction())
}

pub fn translate_frame(space: &Space, f: &Frame, shift: &Vector) -> Result<Frame> {
    let [a, b, c] = f.lines.map(|l| translate_line(space, &l, shift));
    make_frame(space, a, b, c)
}

/// Three distinct mutually skew lines drawn uniformly from the lines of `lambda`.
pub fn random_frame(space: &Space, lambda: &Flat, rng: &mut Rng) -> Result<Frame> {
    if lambda.dim() != 3 {
        return Err(Error::Usage("frames live in 3-flats".into()));
    }
    let lines = lines_of_flat(space, lambda)?;
    loop {
        let a = lines[rng.random_range(0..lines.len())];
        let b = lines[rng.random_range(0..lines.len())];
        let c = lines[rng.random_range(0..lines.len())];
        if let Ok(f) = make_frame(space, a, b, c) {
            return Ok(f);
        }
    }
}

fn meets_all(space: &Space, l: &Line, frame: &Frame) -> bool {
    frame.lines.iter().all(|m| space.intersects(l, m))
}

/// `L(f)` by scanning the lines of `lambda(f)`.
pub fn transversals(space: &Space, frame: &Frame) -> Result<Vec<Line>> {
    let candidates = lines_of_flat(space, &frame.lambda)?;
    Ok(candidates.into_par_iter().filter(|l| meets_all(space, l, frame)).collect())
}

/// `L(f)` by scanning all of `Gr(F^n, 1)`; the slow cross-check.
pub fn transversals_full_scan(space: &Space, frame: &Frame) -> Result<Vec<Line>> {
    let all = space.enumerate_lines()?;
    Ok((0..all.len()).into_par_iter().map(|i| all.get(i)).filter(|l| meets_all(space, l, frame)).collect())
}

#[derive(Clone, Debug)]
pub struct Regulus {
    pub frame: Frame,
    pub transversals: Vec<Line>,
    pub points: PointSet,
}

impl Regulus {
    pub fn new(space: &Space, frame: Frame) -> Result<Self> {
        let transversals = transversals(space, &frame)?;
        let mut points = PointSet::new(space.num_points());
        for l in &transversals {
            for k in space.line_keys(l) {
                points.insert(k);
            }
        }
        Ok(Regulus { frame, transversals, points })
    }

    pub fn meets(&self, space: &Space, l: &Line) -> bool {
        (0..space.q()).any(|t| self.points.contains(space.key_of(&space.line_point(l, t))))
    }

    /// `sum |l| - |r(f)|` over the transversals: zero iff they are disjoint.
    pub fn overlap_excess(&self, space: &Space) -> u64 {
        self.transversals.len() as u64 * space.q() as u64 - self.points.len() as u64
    }
}

/// Degree-at-most-2 monomials in the intrinsic coordinates `(x, y, z)` of
/// the 3-flat, in the order used for coefficient vectors.
pub const MONOMIALS: [&str; 10] = ["1", "x", "y", "z", "x^2", "xy", "xz", "y^2", "yz", "z^2"];

fn monomials(space: &Space, t: [u32; 3]) -> [u32; 10] {
    let f = space.field();
    let [x, y, z] = t;
    [1, x, y, z, f.mul(x, x), f.mul(x, y), f.mul(x, z), f.mul(y, y), f.mul(y, z), f.mul(z, z)]
}

/// A quadratic polynomial on a 3-flat, coefficients in [`MONOMIALS`] order,
/// scaled so the first nonzero coefficient is 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FittedQuadric {
    pub flat: Flat,
    pub coefficients: [u32; 10],
    /// Dimension of the space of quadrics vanishing on the regulus.
    pub solution_dim: usize,
}

impl FittedQuadric {
    pub fn eval_at(&self, space: &Space, x: &Vector) -> Option<u32> {
        let t = space.flat_coordinates(&self.flat, x)?;
        let m = monomials(space, t);
        Some(linalg::dot(space.field(), &self.coefficients, &m))
    }

    /// Whether the two coefficient vectors are nonzero scalar multiples.
    pub fn proportional_to(&self, space: &Space, other: &[u32; 10]) -> bool {
        let f = space.field();
        let Some(i) = other.iter().position(|&c| c != 0) else {
            return false;
        };
        if self.coefficients[i] == 0 {
            return false;
        }
        let scale = f.div(self.coefficients[i], other[i]).unwrap();
        self.coefficients.iter().zip(other).all(|(&a, &b)| a == f.mul(scale, b))
    }
}

/// Solves for the quadrics on `lambda(f)` vanishing on `r(f)`. Among
/// several independent solutions the lexicographically least null-space
/// basis vector is returned.
pub fn fit_quadric(space: &Space, reg: &Regulus) -> Result<FittedQuadric> {
    let flat = reg.frame.lambda;
    let rows: Vec<Vec<u32>> = reg
        .points
        .iter()
        .map(|k| {
            let t = space.flat_coordinates(&flat, &space.vector_at(k)).expect("regulus lies in its 3-flat");
            monomials(space, t).to_vec()
        })
        .collect();
    let basis = linalg::null_space(space.field(), &rows, 10);
    let best = basis
        .iter()
        .min()
        .ok_or_else(|| Error::Internal("no nonzero quadric vanishes on the regulus".into()))?;
    let f = space.field();
    let lead = best.iter().copied().find(|&c| c != 0).unwrap();
    let inv = f.inv(lead).unwrap();
    let mut coefficients = [0u32; 10];
    for (c, &b) in coefficients.iter_mut().zip(best) {
        *c = f.mul(inv, b);
    }
    Ok(FittedQuadric { flat, coefficients, solution_dim: basis.len() })
}

/// Quadric audit: vanishing on `r(f)`, not vanishing somewhere else in the
/// 3-flat, and the largest intersection of `r(f)` with a 2-flat of the 3-flat.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuadricAudit {
    pub vanishes_on_regulus: bool,
    pub nonvanishing_witness: Option<Vec<u32>>,
    pub max_plane_intersection: usize,
}

pub fn audit_quadric(space: &Space, reg: &Regulus, quadric: &FittedQuadric) -> Result<QuadricAudit> {
    let vanishes_on_regulus = reg.points.iter().all(|k| quadric.eval_at(space, &space.vector_at(k)) == Some(0));
    let nonvanishing_witness = space
        .flat_keys(&reg.frame.lambda)
        .into_iter()
        .filter(|&k| !reg.points.contains(k))
        .find(|&k| quadric.eval_at(space, &space.vector_at(k)) != Some(0))
        .map(|k| space.point_at(k).coords().to_vec());
    let max_plane_intersection = flats_of_flat(space, &reg.frame.lambda, 2)?
        .par_iter()
        .map(|pl| space.flat_keys(pl).iter().filter(|&&k| reg.points.contains(k)).count())
        .max()
        .unwrap_or(0);
    Ok(QuadricAudit { vanishes_on_regulus, nonvanishing_witness, max_plane_intersection })
}

/// Lines of a direction-separated family in `F^3` meeting three mutually
/// skew lines.
pub fn three_line_count(space: &Space, skew: &[Line; 3], family: &[Line]) -> Result<usize> {
    if space.n() != 3 {
        return Err(Error::Usage("the three-line count lives in F^3".into()));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if !space.skew(&skew[i], &skew[j])? {
            return Err(Error::Degenerate(format!("lines {} and {} are not skew", i + 1, j + 1)));
        }
    }
    if !direction_audit(family).all_distinct {
        return Err(Error::Precondition("family does not point in different directions".into()));
    }
    Ok(family.iter().filter(|l| skew.iter().all(|m| space.intersects(l, m))).count())
}

fn check_parallel_disjoint(regs: &[&Regulus; 3]) -> Result<()> {
    let sub = regs[0].frame.lambda.direction_space();
    for (i, r) in regs.iter().enumerate() {
        if r.frame.lambda.direction_space() != sub {
            return Err(Error::Precondition(format!("3-flat {} is not parallel to the first", i + 1)));
        }
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        if regs[i].frame.lambda == regs[j].frame.lambda {
            return Err(Error::Precondition(format!("3-flats {} and {} coincide", i + 1, j + 1)));
        }
    }
    Ok(())
}

/// Lines of `family` meeting all three reguli, which must sit in parallel,
/// pairwise distinct 3-flats.
pub fn three_regulus_count(space: &Space, regs: [&Regulus; 3], family: &[Line]) -> Result<usize> {
    check_parallel_disjoint(&regs)?;
    Ok(family.par_iter().filter(|l| regs.iter().all(|r| r.meets(space, l))).count())
}

/// `|W|`, the number of lines of `F^n` meeting all three reguli, by a full
/// scan of the Grassmannian.
pub fn transversal_variety_count(space: &Space, regs: [&Regulus; 3]) -> Result<u64> {
    check_parallel_disjoint(&regs)?;
    if space.q() > MAX_Q_VARIETY {
        return Err(Error::Resource(format!("transversal variety scans require q <= {MAX_Q_VARIETY}")));
    }
    let all = space.enumerate_lines()?;
    Ok((0..all.len())
        .into_par_iter()
        .filter(|&i| {
            let l = all.get(i);
            regs.iter().all(|r| r.meets(space, &l))
        })
        .count() as u64)
}
