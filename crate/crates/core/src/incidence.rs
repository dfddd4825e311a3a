//! Incidence counting and the combinatorial machinery built on it: the
//! popularity argument, pair/triple counting for a bipartite relation,
//! incidence bound checks, plate numbers, the iterated refinement pipeline,
//! the H-shaped harvest counts and a seeded Monte Carlo probe.
//!
//! Weights and incidence totals are integers, and every threshold of the
//! form `w >= X / (c |B|)` is evaluated as `c |B| w >= X` so no rounding
//! ever enters the pass/fail logic.

use std::collections::BTreeMap;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::PointSet;
use crate::construct::{direction_audit, flat_line_counts, wolff_audit};
use crate::error::{Error, Result};
use crate::geom::{Flat, Line, Space};
use crate::rng;

/// Largest family accepted by [`h_harvest`].
pub const HARVEST_MAX_LINES: usize = 4000;
/// Largest field for which [`h_harvest`] runs.
pub const HARVEST_MAX_Q: u32 = 5;
/// Largest field for which the plate number of a family in `F^4` is computed.
pub const PLATE_MAX_Q_DIM4: u32 = 7;

#[derive(Clone, Debug, Serialize)]
pub struct IncidenceStructure {
    pub points: PointSet,
    pub lines: Vec<Line>,
    /// `mu[key]`: lines of the family through the point; zero off `points`.
    #[serde(skip)]
    pub mu: Vec<u32>,
    /// `|l ∩ P|` for each line, in family order.
    pub line_counts: Vec<u32>,
    pub total: u64,
}

impl IncidenceStructure {
    pub fn new(space: &Space, points: &PointSet, lines: &[Line]) -> Result<Self> {
        if points.universe() != space.num_points() {
            return Err(Error::Usage("point set universe does not match the space".into()));
        }
        let keys: Vec<Vec<u32>> = lines
            .par_iter()
            .map(|l| space.line_keys(l).into_iter().filter(|&k| points.contains(k)).collect())
            .collect();
        let mut mu = vec![0u32; space.num_points()];
        for ks in &keys {
            for &k in ks {
                mu[k as usize] += 1;
            }
        }
        let line_counts: Vec<u32> = keys.iter().map(|ks| ks.len() as u32).collect();
        let total = line_counts.iter().map(|&c| c as u64).sum();
        Ok(IncidenceStructure { points: points.clone(), lines: lines.to_vec(), mu, line_counts, total })
    }

    pub fn multiplicity(&self, key: u32) -> u32 {
        self.mu[key as usize]
    }

    /// `sum_p mu(p) == sum_l |l ∩ P| == |I|`.
    pub fn double_counting_holds(&self) -> bool {
        let by_points: u64 = self.points.iter().map(|k| self.mu[k as usize] as u64).sum();
        let off_points = self.mu.iter().enumerate().any(|(k, &m)| m > 0 && !self.points.contains(k as u32));
        by_points == self.total && !off_points
    }
}

/// Result of one popularity step.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Popular {
    /// Indices of retained items, ascending.
    pub kept: Vec<usize>,
    pub kept_weight: u64,
    /// The `X` the threshold `X / (2|B|)` was computed from.
    pub x: u64,
}

impl Popular {
    /// `kept_weight >= X / 2`.
    pub fn retains_half(&self) -> bool {
        2 * self.kept_weight >= self.x
    }
}

/// Keeps the items whose weight is at least `X / (2|B|)`. When the weights
/// sum to at least `X`, the kept weight is at least `X / 2`.
pub fn popularity_refine(weights: &[u64], x: u64) -> Popular {
    let b = weights.len() as u128;
    let kept: Vec<usize> = (0..weights.len()).filter(|&i| 2 * b * weights[i] as u128 >= x as u128).collect();
    let kept_weight = kept.iter().map(|&i| weights[i]).sum();
    Popular { kept, kept_weight, x }
}

/// A relation between `A = 0..a_size` and `B = 0..related.len()`: `related[b]`
/// lists the elements of `A` related to `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub a_size: usize,
    pub related: Vec<Vec<usize>>,
}

impl Relation {
    pub fn new(a_size: usize, mut related: Vec<Vec<usize>>) -> Result<Self> {
        for r in &mut related {
            r.sort_unstable();
            r.dedup();
            if r.last().is_some_and(|&a| a >= a_size) {
                return Err(Error::Usage("related element outside A".into()));
            }
        }
        Ok(Relation { a_size, related })
    }

    pub fn complete(a_size: usize, b_size: usize) -> Self {
        Relation { a_size, related: vec![(0..a_size).collect(); b_size] }
    }

    /// Each pair related independently with probability `density`.
    pub fn random(a_size: usize, b_size: usize, density: f64, rng: &mut rng::Rng) -> Self {
        let related = (0..b_size).map(|_| (0..a_size).filter(|_| rng.random_bool(density)).collect()).collect();
        Relation { a_size, related }
    }

    pub fn b_size(&self) -> usize {
        self.related.len()
    }

    /// `X`, the number of related pairs.
    pub fn incidences(&self) -> u64 {
        self.related.iter().map(|r| r.len() as u64).sum()
    }

    pub fn relates(&self, a: usize, b: usize) -> bool {
        self.related[b].binary_search(&a).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CzCount {
    pub x: u64,
    pub b_size: usize,
    pub count: u64,
    pub bound: f64,
    /// `count >= bound`, or `None` when the bound is outside its proven range.
    pub holds: Option<bool>,
}

fn check_cz(rel: &Relation) -> Result<u64> {
    let x = rel.incidences();
    if x < 2 * rel.b_size() as u64 {
        return Err(Error::Precondition(format!("X = {x} < 2|B| = {}", 2 * rel.b_size())));
    }
    Ok(x)
}

/// `|{(a, a', b): a != a', a ~ b, a' ~ b}|`, checked against `X^2 / (4|B|)`.
pub fn cz_pairs(rel: &Relation) -> Result<CzCount> {
    let x = check_cz(rel)?;
    let count = rel.related.iter().map(|r| {
        let m = r.len() as u64;
        m * m.saturating_sub(1)
    });
    let count = count.sum();
    let b = rel.b_size() as f64;
    let bound = (x as f64).powi(2) / (4.0 * b);
    // 4|B| count >= X^2, exactly.
    let holds = 4 * rel.b_size() as u128 * count as u128 >= (x as u128).pow(2);
    Ok(CzCount { x, b_size: rel.b_size(), count, bound, holds: Some(holds) })
}

/// Ordered triples of distinct elements of `A` related to a common `b`,
/// checked against `X^3 / (16|B|^2)`. The bound is only asserted once
/// `X >= 3|B|`: for `2|B| <= X < 3|B|` it can fail (take every `b` related
/// to exactly two elements).
pub fn cz_triples(rel: &Relation) -> Result<CzCount> {
    let x = check_cz(rel)?;
    let count = rel
        .related
        .iter()
        .map(|r| {
            let m = r.len() as u64;
            m * m.saturating_sub(1) * m.saturating_sub(2)
        })
        .sum();
    let b = rel.b_size() as u128;
    let bound = (x as f64).powi(3) / (16.0 * (b as f64).powi(2));
    let holds = (x as u128 >= 3 * b).then(|| 16 * b * b * count as u128 >= (x as u128).pow(3));
    Ok(CzCount { x, b_size: rel.b_size(), count, bound, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub incidences: u64,
    pub bound: f64,
    pub ratio: f64,
}

/// `|I|` against `|P|^{1/2} |L| + |P|`.
pub fn easy_bound_check(space: &Space, points: &PointSet, lines: &[Line]) -> Result<BoundCheck> {
    let inc = IncidenceStructure::new(space, points, lines)?.total;
    let p = points.len() as f64;
    let bound = p.sqrt() * lines.len() as f64 + p;
    Ok(BoundCheck { incidences: inc, bound, ratio: ratio(inc, bound) })
}

/// `|I|` against `|P|^{1/2} |L|^{3/4} q^{1/4} + |P| + |L|` for a family
/// pointing in different directions.
pub fn wip_bound_check(space: &Space, points: &PointSet, lines: &[Line]) -> Result<BoundCheck> {
    if !direction_audit(lines).all_distinct {
        return Err(Error::Precondition("lines do not point in different directions".into()));
    }
    let inc = IncidenceStructure::new(space, points, lines)?.total;
    let (p, l, q) = (points.len() as f64, lines.len() as f64, space.q() as f64);
    let bound = p.sqrt() * l.powf(0.75) * q.powf(0.25) + p + l;
    Ok(BoundCheck { incidences: inc, bound, ratio: ratio(inc, bound) })
}

fn ratio(value: u64, bound: f64) -> f64 {
    if bound > 0.0 {
        value as f64 / bound
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlateNumber {
    pub value: u32,
    pub argmax: Option<Flat>,
}

/// The largest number of family lines inside one 2-flat.
pub fn plate_number(space: &Space, lines: &[Line]) -> Result<PlateNumber> {
    if space.n() == 4 && space.q() > PLATE_MAX_Q_DIM4 {
        return Err(Error::Resource(format!("plate numbers in F^4 require q <= {PLATE_MAX_Q_DIM4}")));
    }
    if space.n() == 2 {
        // the only 2-flat is the plane itself
        return Ok(PlateNumber { value: lines.len() as u32, argmax: None });
    }
    let a = wolff_audit(space, lines, 2)?;
    Ok(PlateNumber { value: a.max_lines, argmax: a.argmax })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stage {
    pub points: usize,
    pub lines: usize,
    pub incidences: u64,
    pub plate_number: u32,
    /// Largest number of the stage's lines inside one 3-flat (`None` when `n < 4`).
    pub max_lines_per_3flat: Option<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    /// Index `j` of the chosen class `2^j <= mu_0 < 2^{j+1}`.
    pub dyadic_class: u32,
    /// `alpha = q / 2^j` as (numerator, denominator).
    pub alpha: (u64, u64),
    pub depth: usize,
    /// Incidences of `P_0 x L_0` before the dyadic restriction.
    pub initial_incidences: u64,
    pub stages: Vec<Stage>,
    /// `P_1 = P^{(N)}`.
    pub final_points: PointSet,
    /// `L_1 = L^{(N-1)}`.
    pub final_lines: Vec<Line>,
    /// `L^{(N)}`, the last line refinement.
    pub last_lines: Vec<Line>,
    pub stage_invariant: bool,
    pub monotone: bool,
    pub class_membership: bool,
}

impl RefinementReport {
    pub fn alpha(&self) -> f64 {
        self.alpha.0 as f64 / self.alpha.1 as f64
    }
}

fn dyadic_index(m: u32) -> u32 {
    31 - m.leading_zeros()
}

/// Dyadic pigeonhole on `mu_0` followed by `depth` alternating line/point
/// popularity stages.
pub fn refine_pipeline(space: &Space, p0: &PointSet, l0: &[Line], depth: usize) -> Result<RefinementReport> {
    if p0.is_empty() || l0.is_empty() {
        return Err(Error::Usage("refinement needs nonempty points and lines".into()));
    }
    if depth == 0 {
        return Err(Error::Usage("refinement depth must be at least 1".into()));
    }
    let inc0 = IncidenceStructure::new(space, p0, l0)?;
    // class with the largest mass, ties to the larger class
    let mut mass: BTreeMap<u32, u64> = BTreeMap::new();
    for k in p0.iter() {
        let m = inc0.multiplicity(k);
        if m > 0 {
            *mass.entry(dyadic_index(m)).or_default() += m as u64;
        }
    }
    let (&class, _) = mass
        .iter()
        .max_by_key(|&(&j, &s)| (s, j))
        .ok_or_else(|| Error::Degenerate("no point of P_0 lies on a line of L_0".into()))?;
    let in_class = |m: u32| m > 0 && dyadic_index(m) == class;
    let mut points = PointSet::from_keys(space.num_points(), p0.iter().filter(|&k| in_class(inc0.multiplicity(k))));
    let mut lines = l0.to_vec();
    let mut history_p = vec![points.clone()];
    let mut history_l = vec![lines.clone()];
    let mut stages = Vec::with_capacity(depth + 1);
    let mut stage_invariant = true;
    let mut prev_incidences = None;

    for k in 0..=depth {
        let inc = IncidenceStructure::new(space, &points, &lines)?;
        stages.push(Stage {
            points: points.len(),
            lines: lines.len(),
            incidences: inc.total,
            plate_number: plate_number(space, &lines)?.value,
            max_lines_per_3flat: if space.n() >= 4 { Some(wolff_audit(space, &lines, 3)?.max_lines) } else { None },
        });
        if let Some(prev) = prev_incidences {
            stage_invariant &= 4 * inc.total >= prev;
        }
        prev_incidences = Some(inc.total);
        if k == depth {
            break;
        }
        // lines rich in the current points
        let x = inc.total;
        let w: Vec<u64> = inc.line_counts.iter().map(|&c| c as u64).collect();
        let kept_lines: Vec<Line> = popularity_refine(&w, x).kept.into_iter().map(|i| lines[i]).collect();
        // points rich in the kept lines, threshold |I| / (4|P|)
        let next = IncidenceStructure::new(space, &points, &kept_lines)?;
        let np = points.len() as u128;
        let kept_points = PointSet::from_keys(
            space.num_points(),
            points.iter().filter(|&key| 4 * np * next.multiplicity(key) as u128 >= x as u128),
        );
        points = kept_points;
        lines = kept_lines;
        history_p.push(points.clone());
        history_l.push(lines.clone());
    }

    let monotone = history_p.windows(2).all(|w| w[1].is_subset(&w[0]))
        && history_l.windows(2).all(|w| is_sublist(&w[1], &w[0]))
        && history_p[0].is_subset(p0);
    let class_membership = points.iter().all(|k| in_class(inc0.multiplicity(k)));
    Ok(RefinementReport {
        dyadic_class: class,
        alpha: (space.q() as u64, 1u64 << class),
        depth,
        initial_incidences: inc0.total,
        stages,
        final_points: points,
        final_lines: history_l[depth - 1].clone(),
        last_lines: lines,
        stage_invariant,
        monotone,
        class_membership,
    })
}

/// Whether `sub` is a subsequence of `full` (both in family order).
fn is_sublist(sub: &[Line], full: &[Line]) -> bool {
    let mut it = full.iter();
    sub.iter().all(|l| it.any(|m| m == l))
}

/// H-shaped configuration counts over a point set `P_2` and family `L_2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct HCount {
    pub h0: u64,
    pub h1: u64,
    /// Ordered skew pairs `(l_1, l_2)`.
    pub s0: u64,
    /// Skew pairs with `|C| >= |H_1| / (2|S_0|)`.
    pub s1: u64,
    pub sum_c: u64,
    pub sum_c_s1: u64,
    /// `sum |C^(3)|` over `S_1`.
    pub sum_c3: u64,
}

impl HCount {
    pub fn identity_holds(&self) -> bool {
        self.sum_c == self.h1
    }
}

struct Harvester<'a> {
    space: &'a Space,
    points: &'a PointSet,
    lines: &'a [Line],
    /// Family lines through each point of `P_2`.
    through: Vec<Vec<u32>>,
}

impl<'a> Harvester<'a> {
    fn new(space: &'a Space, points: &'a PointSet, lines: &'a [Line]) -> Result<Self> {
        if space.q() > HARVEST_MAX_Q {
            return Err(Error::Resource(format!("harvest requires q <= {HARVEST_MAX_Q}")));
        }
        if lines.len() > HARVEST_MAX_LINES {
            return Err(Error::Resource(format!("harvest requires at most {HARVEST_MAX_LINES} lines")));
        }
        if points.universe() != space.num_points() {
            return Err(Error::Usage("point set universe does not match the space".into()));
        }
        let mut through = vec![Vec::new(); space.num_points()];
        for (i, l) in lines.iter().enumerate() {
            for k in space.line_keys(l) {
                if points.contains(k) {
                    through[k as usize].push(i as u32);
                }
            }
        }
        Ok(Harvester { space, points, lines, through })
    }

    fn point_keys(&self, l: usize) -> Vec<u32> {
        self.space.line_keys(&self.lines[l]).into_iter().filter(|&k| self.points.contains(k)).collect()
    }

    /// `C(l_1, l_2)` for skew `l_1, l_2`, each entry with its two meeting points.
    fn connecting(&self, i1: usize, i2: usize) -> Vec<(usize, u32, u32)> {
        let l2 = &self.lines[i2];
        let mut out = Vec::new();
        for k1 in self.point_keys(i1) {
            for &l in &self.through[k1 as usize] {
                let l = l as usize;
                if l == i1 || l == i2 {
                    continue;
                }
                if let Some(x) = self.space.meet(&self.lines[l], l2) {
                    let k2 = self.space.key_of(&x);
                    if self.points.contains(k2) {
                        out.push((l, k1, k2));
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn h0(&self) -> u64 {
        (0..self.lines.len())
            .into_par_iter()
            .map(|l| {
                let ms: Vec<u64> = self.point_keys(l).iter().map(|&k| self.through[k as usize].len() as u64 - 1).collect();
                let s: u64 = ms.iter().sum();
                let sq: u64 = ms.iter().map(|m| m * m).sum();
                s * s - sq
            })
            .sum()
    }

    fn count(&self) -> HCount {
        let n = self.lines.len();
        // per ordered skew pair: |C| and |C^(3)|
        let per_pair: Vec<(u64, u64)> = (0..n)
            .into_par_iter()
            .flat_map_iter(|i| {
                (0..n)
                    .filter(move |&j| i != j && self.space.skew(&self.lines[i], &self.lines[j]).unwrap_or(false))
                    .map(move |j| {
                        let c = self.connecting(i, j);
                        (c.len() as u64, c3_count(&c))
                    })
            })
            .collect();
        let s0 = per_pair.len() as u64;
        let sum_c: u64 = per_pair.iter().map(|p| p.0).sum();
        let h1 = self.h1();
        let popular = |c: u64| 2 * s0 as u128 * c as u128 >= h1 as u128;
        let s1_pairs = per_pair.iter().filter(|p| popular(p.0));
        let (s1, sum_c_s1, sum_c3) = s1_pairs.fold((0, 0, 0), |(a, b, c), p| (a + 1, b + p.0, c + p.1));
        HCount { h0: self.h0(), h1, s0, s1, sum_c, sum_c_s1, sum_c3 }
    }

    /// `|H_1|` counted directly from H-shapes, independently of the pair loop.
    fn h1(&self) -> u64 {
        (0..self.lines.len())
            .into_par_iter()
            .map(|l| {
                let pts = self.point_keys(l);
                let mut total = 0u64;
                for &p1 in &pts {
                    for &p2 in &pts {
                        if p1 == p2 {
                            continue;
                        }
                        for &a in &self.through[p1 as usize] {
                            for &b in &self.through[p2 as usize] {
                                let (a, b) = (a as usize, b as usize);
                                if a != l && b != l && self.space.skew(&self.lines[a], &self.lines[b]).unwrap_or(false) {
                                    total += 1;
                                }
                            }
                        }
                    }
                }
                total
            })
            .sum()
    }
}

/// Ordered triples of connecting lines whose six meeting points are distinct.
fn c3_count(c: &[(usize, u32, u32)]) -> u64 {
    let mut total = 0;
    for x in c {
        for y in c {
            if x.1 == y.1 || x.2 == y.2 {
                continue;
            }
            for z in c {
                if z.1 != x.1 && z.1 != y.1 && z.2 != x.2 && z.2 != y.2 {
                    total += 1;
                }
            }
        }
    }
    total
}

pub fn h_harvest(space: &Space, points: &PointSet, lines: &[Line]) -> Result<HCount> {
    Ok(Harvester::new(space, points, lines)?.count())
}

/// Lines of the family other than `l1, l2` meeting `l1` and `l2` at points
/// of `points`. `l1` and `l2` must be skew.
pub fn connecting_set(space: &Space, l1: &Line, l2: &Line, points: &PointSet, lines: &[Line]) -> Result<Vec<Line>> {
    if !space.skew(l1, l2)? {
        return Err(Error::Degenerate("connecting sets are defined for skew lines".into()));
    }
    let in_p = |x: Option<crate::geom::Vector>| x.is_some_and(|x| points.contains(space.key_of(&x)));
    Ok(lines
        .iter()
        .filter(|l| *l != l1 && *l != l2 && in_p(space.meet(l, l1)) && in_p(space.meet(l, l2)))
        .copied()
        .collect())
}

/// Direct enumeration of H_0, H_1, S_0 and every connecting set without any
/// indexing. Quintic in the family size, so only for small families.
pub fn h_harvest_reference(space: &Space, points: &PointSet, lines: &[Line]) -> Result<HCount> {
    let n = lines.len();
    let pts: Vec<Vec<u32>> =
        lines.iter().map(|l| space.line_keys(l).into_iter().filter(|&k| points.contains(k)).collect()).collect();
    let on = |k: u32, l: usize| pts[l].contains(&k);
    let mut out = HCount::default();
    for l in 0..n {
        for &p1 in &pts[l] {
            for &p2 in &pts[l] {
                if p1 == p2 {
                    continue;
                }
                for l1 in (0..n).filter(|&a| a != l && on(p1, a)) {
                    for l2 in (0..n).filter(|&b| b != l && on(p2, b)) {
                        out.h0 += 1;
                        if space.skew(&lines[l1], &lines[l2])? {
                            out.h1 += 1;
                        }
                    }
                }
            }
        }
    }
    let mut sets = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && space.skew(&lines[i], &lines[j])? {
                sets.push(connecting_set(space, &lines[i], &lines[j], points, lines)?.into_iter().map(|l| {
                    let a = space.key_of(&space.meet(&l, &lines[i]).unwrap());
                    let b = space.key_of(&space.meet(&l, &lines[j]).unwrap());
                    (a, b)
                }).collect::<Vec<_>>());
            }
        }
    }
    out.s0 = sets.len() as u64;
    out.sum_c = sets.iter().map(|c| c.len() as u64).sum();
    for c in &sets {
        if 2 * out.s0 * c.len() as u64 >= out.h1 {
            out.s1 += 1;
            out.sum_c_s1 += c.len() as u64;
            for x in c {
                for y in c {
                    for z in c {
                        let firsts = [x.0, y.0, z.0];
                        let seconds = [x.1, y.1, z.1];
                        let distinct = |v: [u32; 3]| v[0] != v[1] && v[0] != v[2] && v[1] != v[2];
                        if distinct(firsts) && distinct(seconds) {
                            out.sum_c3 += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeStats {
    pub samples: usize,
    pub seed: u64,
    /// Fraction of sampled pairs of distinct family lines that meet.
    pub meet_frequency: f64,
    /// Mean family lines in a sampled 3-flat (`None` when `n < 4`).
    pub mean_lines_per_3flat: Option<f64>,
    /// Mean family lines in a sampled direction.
    pub mean_lines_per_direction: f64,
}

/// Seeded Monte Carlo estimates. Each statistic draws from its own stream
/// derived from `seed`, so the record depends only on `(lines, samples, seed)`.
pub fn mc_probe(space: &Space, lines: &[Line], samples: usize, seed: u64) -> Result<ProbeStats> {
    let samples = samples.max(1);
    let meet_frequency = if lines.len() < 2 {
        0.0
    } else {
        let mut r = rng::derived(seed, "probe/pairs");
        let mut hits = 0usize;
        for _ in 0..samples {
            let i = r.random_range(0..lines.len());
            let mut j = r.random_range(0..lines.len() - 1);
            if j >= i {
                j += 1;
            }
            if space.intersects(&lines[i], &lines[j]) {
                hits += 1;
            }
        }
        hits as f64 / samples as f64
    };
    let mean_lines_per_3flat = if space.n() >= 4 {
        let counts = flat_line_counts(space, lines, 3)?;
        let flats = space.enumerate_flats(3)?;
        let mut r = rng::derived(seed, "probe/flats");
        let total: u64 = (0..samples)
            .map(|_| counts.get(&flats.get(r.random_range(0..flats.len()))).copied().unwrap_or(0) as u64)
            .sum();
        Some(total as f64 / samples as f64)
    } else {
        None
    };
    let hist = direction_audit(lines).histogram;
    let dirs = space.directions();
    let mut r = rng::derived(seed, "probe/directions");
    let total: u64 =
        (0..samples).map(|_| hist.get(&dirs[r.random_range(0..dirs.len())]).copied().unwrap_or(0) as u64).sum();
    Ok(ProbeStats {
        samples,
        seed,
        meet_frequency,
        mean_lines_per_3flat,
        mean_lines_per_direction: total as f64 / samples as f64,
    })
}

/// Exact probability that two distinct family lines, drawn uniformly, meet.
pub fn meet_probability_exact(space: &Space, lines: &[Line]) -> f64 {
    let n = lines.len();
    if n < 2 {
        return 0.0;
    }
    let hits: u64 = (0..n)
        .into_par_iter()
        .map(|i| (0..n).filter(|&j| j != i && space.intersects(&lines[i], &lines[j])).count() as u64)
        .sum();
    hits as f64 / (n as f64 * (n - 1) as f64)
}
