//! The registered experiments. Each one returns its report entries in a
//! fixed order; the heavy kernels underneath parallelise internally but
//! reduce deterministically, so entries do not depend on the pool width.

use rand::seq::index;
use rand::Rng as _;
use serde_json::{json, Value};

use ffkakeya::bitset::PointSet;
use ffkakeya::construct::{
    build_heisenberg, build_sphere_example, direction_audit, lines_contained, random_besicovitch,
    random_direction_separated, wolff_audit, SphereExample,
};
use ffkakeya::incidence::{
    cz_pairs, cz_triples, easy_bound_check, h_harvest, h_harvest_reference, mc_probe, meet_probability_exact,
    plate_number, popularity_refine, refine_pipeline, wip_bound_check, Relation,
};
use ffkakeya::reguli::{
    audit_quadric, fit_quadric, model_frame, model_lines, random_frame, three_line_count, transversal_variety_count,
    transversals_full_scan, translate_frame, Frame, Regulus,
};
use ffkakeya::{rng, Error, FieldSpec, Line, QuadraticForm, Result, Space};

use crate::report::{Entry, Recorder};
use crate::FrameChoice;

/// Monte Carlo samples drawn by the probe experiment.
pub const PROBE_SAMPLES: usize = 100_000;
/// Seeded instances in the bipartite counting suite.
pub const CZ_INSTANCES: usize = 20;
/// Largest `q` at which the sphere family is cross-checked by a full line scan.
pub const SPHERE_SCAN_MAX_Q: u32 = 7;
/// Largest `q` at which the 3-flat maximum of the sphere family is asserted.
pub const SPHERE_WOLFF_MAX_Q: u32 = 5;
pub const HARVEST_SUBFAMILY: usize = 200;
pub const HARVEST_REFERENCE: usize = 30;

/// Parameters shared by the experiments.
#[derive(Clone, Debug)]
pub struct Params {
    pub field: FieldSpec,
    pub form: Option<Vec<u32>>,
    pub frame: FrameChoice,
    pub n_refine: usize,
    pub seed: u64,
}

fn q3(q: u32) -> f64 {
    (q as f64).powi(3)
}

/// A non-square of the field.
fn non_square(field: &FieldSpec) -> u32 {
    let q = field.q();
    let minus_one = field.neg(1);
    (2..q).find(|&x| field.pow(x, ((q - 1) / 2) as u64) == minus_one).expect("odd fields have non-squares")
}

fn diag_form(field: &FieldSpec, entries: &[u32]) -> Result<QuadraticForm> {
    QuadraticForm::diagonal(*field, entries)
}

pub fn gauss(p: &Params) -> Result<Vec<Entry>> {
    let f = FieldSpec::prime(p.field.p())?;
    let q = f.q();
    let mut r = Recorder::new("gauss", q);
    let s0 = f.gauss_sum(0)?;
    r.check("gauss_sum_zero", "exact", json!({"p": q, "y": 0}), json!({"re": s0.re, "im": s0.im}), s0.re == q as f64 && s0.im == 0.0);
    for y in 1..q {
        let s = f.gauss_sum(y)?;
        let dev = (s.norm_sqr() - q as f64).abs();
        r.check(
            "gauss_sum_modulus",
            "abs(|S(y)|^2 - p) < 1e-6",
            json!({"p": q, "y": y}),
            json!({"re": s.re, "im": s.im, "abs2": s.norm_sqr()}),
            dev < 1e-6,
        );
    }
    Ok(r.entries)
}

/// All diagonal forms with entries in `{1, s}` of length `n`.
fn unit_forms(field: &FieldSpec, n: usize) -> Vec<Vec<u32>> {
    let s = non_square(field);
    (0..1u32 << n).map(|mask| (0..n).map(|i| if mask >> i & 1 == 1 { s } else { 1 }).collect()).collect()
}

pub fn levelset(p: &Params) -> Result<Vec<Entry>> {
    let f = p.field;
    let q = f.q();
    let mut r = Recorder::new("levelset", q);
    let forms = match &p.form {
        Some(form) => vec![form.clone()],
        None => [3, 4].iter().flat_map(|&n| unit_forms(&f, n)).collect(),
    };
    for entries in forms {
        let form = diag_form(&f, &entries)?;
        let n = form.dim() as u32;
        let hist = form.level_set_histogram()?;
        let main = (q as i64).pow(n - 1);
        let max_dev = hist.iter().map(|&c| (c as i64 - main).unsigned_abs()).max().unwrap_or(0);
        // |count - q^{n-1}| < q^{n/2}  <=>  dev^2 < q^n
        let pass = hist.iter().all(|&c| ((c as i64 - main).pow(2) as u128) < (q as u128).pow(n));
        let inputs = json!({"q": q, "form": entries, "rank": form.rank()});
        let bound = (q as f64).powf(n as f64 / 2.0);
        let outputs = json!({"histogram": hist, "max_deviation": max_dev});
        if form.rank() >= 3 {
            r.check_measure("levelset_bound", "|count - q^(n-1)| < q^(n/2)", inputs.clone(), outputs, max_dev as f64, bound, pass);
        } else {
            r.measure("levelset_bound", inputs.clone(), outputs, max_dev as f64, bound);
        }
        if f.is_prime_field() {
            let mut max_err = 0.0f64;
            for (v, &c) in hist.iter().enumerate() {
                let est = form.gauss_estimate(v as u32)?;
                max_err = max_err.max((est.re - c as f64).abs()).max(est.im.abs());
            }
            r.check_measure("gauss_identity", "abs error < 1e-4", inputs, json!({"max_error": max_err}), max_err, 1e-4, max_err < 1e-4);
        }
    }
    Ok(r.entries)
}

fn sphere_form(p: &Params) -> Vec<u32> {
    p.form.clone().unwrap_or_else(|| vec![1, 1, 1, 1])
}

fn build_sphere(field: &FieldSpec, entries: &[u32]) -> Result<(Space, SphereExample)> {
    if entries.len() != 4 {
        return Err(Error::Usage("the sphere example needs a form on F^4".into()));
    }
    let space = Space::new(*field, 4)?;
    let form = diag_form(field, entries)?;
    let ex = build_sphere_example(&space, &form)?;
    Ok((space, ex))
}

pub fn sphere(p: &Params) -> Result<Vec<Entry>> {
    sphere_with(&p.field, &sphere_form(p))
}

pub fn sphere_with(field: &FieldSpec, entries: &[u32]) -> Result<Vec<Entry>> {
    let q = field.q();
    let mut r = Recorder::new("sphere", q);
    let (space, ex) = build_sphere(field, entries)?;
    let cfg = &ex.config;
    let (np, nl) = (cfg.points().len(), cfg.lines().len());
    let inputs = json!({"q": q, "form": entries});
    r.note(
        "sphere_build",
        inputs.clone(),
        json!({"points": np, "lines": nl, "null_directions": ex.null_directions, "generating_pairs": ex.total_pairs()}),
    );
    r.check("containment", "violations == 0", inputs.clone(), json!({"value": cfg.containment_violations()}), cfg.containment_violations() == 0);
    let within = |x: usize| (x as f64) >= q3(q) / 8.0 && (x as f64) <= 8.0 * q3(q);
    r.check_measure("sphere_points", "q^3/8 <= |P| <= 8q^3", inputs.clone(), json!({"value": np}), np as f64, q3(q), within(np));
    r.check_measure("sphere_lines", "q^3/8 <= |L| <= 8q^3", inputs.clone(), json!({"value": nl}), nl as f64, q3(q), within(nl));
    let per_line = (q * (q - 1)) as u64;
    r.check(
        "generating_pairs",
        "every line has q(q-1) generating pairs",
        inputs.clone(),
        json!({"value": per_line}),
        ex.generating_pairs.iter().all(|&c| c == per_line),
    );
    if q <= SPHERE_SCAN_MAX_Q {
        let scanned = lines_contained(&space, cfg.points())?;
        r.check(
            "generator_vs_scan",
            "equal canonical sets",
            inputs.clone(),
            json!({"generated": nl, "scanned": scanned.len()}),
            scanned == cfg.lines(),
        );
    }
    let w3 = wolff_audit(&space, cfg.lines(), 3)?;
    let w3_out = json!({"value": w3.max_lines, "argmax": w3.argmax});
    if q <= SPHERE_WOLFF_MAX_Q {
        r.check_measure("wolff_3flat", "max lines per 3-flat <= 10q", inputs.clone(), w3_out, w3.max_lines as f64, 10.0 * q as f64, w3.max_lines <= 10 * q);
    } else {
        r.measure("wolff_3flat", inputs.clone(), w3_out, w3.max_lines as f64, 10.0 * q as f64);
    }
    let w2 = wolff_audit(&space, cfg.lines(), 2)?;
    r.measure("wolff_2flat", inputs.clone(), json!({"value": w2.max_lines}), w2.max_lines as f64, q as f64);
    let da = direction_audit(cfg.lines());
    r.check(
        "direction_audit",
        "all_distinct == false",
        inputs.clone(),
        json!({"all_distinct": da.all_distinct, "directions": da.histogram.len(), "max_multiplicity": da.max_multiplicity()}),
        !da.all_distinct,
    );
    let e = easy_bound_check(&space, cfg.points(), cfg.lines())?;
    r.check_measure("easy_bound", "ratio <= 8", inputs, json!({"value": e.incidences}), e.incidences as f64, e.bound, e.ratio <= 8.0);
    Ok(r.entries)
}

pub fn heisenberg(p: &Params) -> Result<Vec<Entry>> {
    let pr = p.field.p();
    let field = FieldSpec::quadratic(pr)?;
    let q = field.q();
    let mut r = Recorder::new("heisenberg", q);
    let cfg = build_heisenberg(&field)?;
    let space = *cfg.space();
    let inputs = json!({"p": pr, "q": q});
    let np = cfg.points().len();
    r.check("heisenberg_points", "|P| == p^5", inputs.clone(), json!({"value": np}), np as u64 == (pr as u64).pow(5));
    r.note("heisenberg_lines", inputs.clone(), json!({"value": cfg.lines().len()}));
    r.check("containment", "violations == 0", inputs.clone(), json!({"value": cfg.containment_violations()}), cfg.containment_violations() == 0);
    let w2 = wolff_audit(&space, cfg.lines(), 2)?;
    r.measure("wolff_2flat", inputs.clone(), json!({"value": w2.max_lines}), w2.max_lines as f64, q as f64);
    let da = direction_audit(cfg.lines());
    r.note(
        "direction_audit",
        inputs.clone(),
        json!({"all_distinct": da.all_distinct, "directions": da.histogram.len(), "max_multiplicity": da.max_multiplicity()}),
    );
    let e = easy_bound_check(&space, cfg.points(), cfg.lines())?;
    r.check_measure("easy_bound", "ratio <= 8", inputs, json!({"value": e.incidences}), e.incidences as f64, e.bound, e.ratio <= 8.0);
    Ok(r.entries)
}

/// The 3-flat `{x_4 = c}`.
fn slice(space: &Space, c: u32) -> Result<ffkakeya::Flat> {
    space.flat_from(&space.point(&[0, 0, 0, c])?, &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]])
}

fn frame_for(space: &Space, choice: FrameChoice, seed: u64, label: &str) -> Result<Frame> {
    match choice {
        FrameChoice::Model => model_frame(space, [0, 1, 2]),
        FrameChoice::Random => random_frame(space, &slice(space, 0)?, &mut rng::derived(seed, label)),
    }
}

pub fn regulus(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let space = Space::new(p.field, 4)?;
    let mut r = Recorder::new("regulus", q);
    let frame = frame_for(&space, p.frame, p.seed, "regulus/frame")?;
    let model = p.frame == FrameChoice::Model;
    let inputs = json!({"q": q, "frame": p.frame.name(), "seed": p.seed, "lines": frame.lines});
    let reg = Regulus::new(&space, frame)?;
    let nt = reg.transversals.len();
    if model {
        r.check("transversals", "|L(f)| == q", inputs.clone(), json!({"value": nt}), nt as u32 == q);
        r.check("regulus_points", "|r(f)| == q^2", inputs.clone(), json!({"value": reg.points.len()}), reg.points.len() as u64 == (q as u64).pow(2));
    } else {
        r.measure("transversals", inputs.clone(), json!({"value": nt}), nt as f64, (q + 1) as f64);
        r.note("regulus_points", inputs.clone(), json!({"value": reg.points.len()}));
    }
    r.check("transversals_disjoint", "overlap == 0", inputs.clone(), json!({"value": reg.overlap_excess(&space)}), reg.overlap_excess(&space) == 0);
    let full = transversals_full_scan(&space, &frame)?;
    r.check("transversals_full_scan", "equal to 3-flat restricted scan", inputs.clone(), json!({"value": full.len()}), full == reg.transversals);
    let quad = fit_quadric(&space, &reg)?;
    let audit = audit_quadric(&space, &reg, &quad)?;
    let outs = json!({"coefficients": quad.coefficients, "solution_dim": quad.solution_dim});
    r.check("quadric_vanishes", "vanishes on r(f)", inputs.clone(), outs.clone(), audit.vanishes_on_regulus);
    r.check("quadric_nontrivial", "nonzero somewhere on the 3-flat", inputs.clone(), json!({"witness": audit.nonvanishing_witness}), audit.nonvanishing_witness.is_some());
    if model {
        let mut z_minus_xy = [0u32; 10];
        z_minus_xy[3] = 1;
        z_minus_xy[5] = p.field.neg(1);
        r.check("quadric_model", "proportional to z - xy", inputs.clone(), outs, quad.proportional_to(&space, &z_minus_xy));
    }
    let mp = audit.max_plane_intersection;
    r.check_measure("quadric_planes", "max |r(f) cap plane| <= 2q", inputs, json!({"value": mp}), mp as f64, 2.0 * q as f64, mp <= 2 * q as usize);
    r.entries.extend(variety_entries(&space, "regulus", p.frame, p.seed, 1)?);
    Ok(r.entries)
}

/// `2q^3 - q^2`, the count for model frames translated to `x_4 = 0, 1, 2`.
pub fn model_variety_count(q: u32) -> u64 {
    2 * (q as u64).pow(3) - (q as u64).pow(2)
}

fn variety_entries(space: &Space, experiment: &str, choice: FrameChoice, seed: u64, trials: usize) -> Result<Vec<Entry>> {
    let q = space.q();
    let mut r = Recorder::new(experiment, q);
    match choice {
        FrameChoice::Model => {
            let f0 = model_frame(space, [0, 1, 2])?;
            let regs: Vec<Regulus> =
                (0..3).map(|c| Regulus::new(space, translate_frame(space, &f0, &[0, 0, 0, c])?)).collect::<Result<_>>()?;
            let w = transversal_variety_count(space, [&regs[0], &regs[1], &regs[2]])?;
            let inputs = json!({"q": q, "frame": "model", "translates": [0, 1, 2]});
            r.check("variety_model", "|W| == 2q^3 - q^2", inputs.clone(), json!({"value": w}), w == model_variety_count(q));
            r.check_measure("variety_bound", "|W| <= 8q^3", inputs, json!({"value": w}), w as f64, q3(q), w as f64 <= 8.0 * q3(q));
        }
        FrameChoice::Random => {
            for t in 0..trials {
                let regs: Vec<Regulus> = (0..3)
                    .map(|c| {
                        let mut g = rng::derived(seed, &format!("variety/{t}/{c}"));
                        Regulus::new(space, random_frame(space, &slice(space, c)?, &mut g)?)
                    })
                    .collect::<Result<_>>()?;
                let w = transversal_variety_count(space, [&regs[0], &regs[1], &regs[2]])?;
                let sizes: Vec<usize> = regs.iter().map(|g| g.points.len()).collect();
                let inputs = json!({"q": q, "frame": "random", "seed": seed, "trial": t});
                r.check_measure("variety_bound", "|W| <= 8q^3", inputs, json!({"value": w, "regulus_points": sizes}), w as f64, q3(q), w as f64 <= 8.0 * q3(q));
            }
        }
    }
    Ok(r.entries)
}

pub fn threereg(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let space = Space::new(p.field, 4)?;
    let mut entries = variety_entries(&space, "threereg", p.frame, p.seed, 3)?;
    let mut r = Recorder::new("threereg", q);
    // the three-line count in F^3 against a random Besicovitch family
    let s3 = Space::new(p.field, 3)?;
    let skew = model_lines(&s3, [0, 1, 2])?;
    let fam = random_besicovitch(&s3, &mut rng::derived(p.seed, "threereg/family"))?;
    let c = three_line_count(&s3, &skew, fam.lines())?;
    r.check_measure(
        "three_line_count",
        "count <= q + 1",
        json!({"q": q, "seed": p.seed, "family": fam.lines().len()}),
        json!({"value": c}),
        c as f64,
        (q + 1) as f64,
        c as u32 <= q + 1,
    );
    entries.extend(r.entries);
    Ok(entries)
}

/// `(pairs, triples)` by enumerating `A x A x B` and `A x A x A x B`.
fn cz_brute(rel: &Relation) -> (u64, u64) {
    let mut pairs = 0;
    let mut triples = 0;
    for b in 0..rel.b_size() {
        for a in 0..rel.a_size {
            for a2 in 0..rel.a_size {
                if a != a2 && rel.relates(a, b) && rel.relates(a2, b) {
                    pairs += 1;
                    triples += (0..rel.a_size).filter(|&a3| a3 != a && a3 != a2 && rel.relates(a3, b)).count() as u64;
                }
            }
        }
    }
    (pairs, triples)
}

/// A seeded relation with `|A|, |B| <= 50` and `X >= 2|B|`.
pub fn cz_instance(seed: u64, i: usize) -> Relation {
    let mut g = rng::derived(seed, &format!("cz/{i}"));
    loop {
        let a = g.random_range(3..=50);
        let b = g.random_range(1..=50);
        let density = g.random_range(0.1..0.7);
        let rel = Relation::random(a, b, density, &mut g);
        if rel.incidences() >= 2 * rel.b_size() as u64 {
            return rel;
        }
    }
}

pub fn inequalities(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let mut r = Recorder::new("inequalities", q);
    for i in 0..CZ_INSTANCES {
        let rel = cz_instance(p.seed, i);
        let (bp, bt) = cz_brute(&rel);
        let pairs = cz_pairs(&rel)?;
        let triples = cz_triples(&rel)?;
        let inputs = json!({"seed": p.seed, "instance": i, "a": rel.a_size, "b": rel.b_size(), "x": pairs.x});
        r.check("cz_pairs_exact", "equals brute force", inputs.clone(), json!({"value": pairs.count, "brute": bp}), pairs.count == bp);
        r.check("cz_triples_exact", "equals brute force", inputs.clone(), json!({"value": triples.count, "brute": bt}), triples.count == bt);
        r.check_measure("cz_pairs_bound", "pairs >= X^2/(4|B|)", inputs.clone(), json!({"value": pairs.count}), pairs.count as f64, pairs.bound, pairs.holds == Some(true));
        match triples.holds {
            Some(h) => r.check_measure("cz_triples_bound", "triples >= X^3/(16|B|^2) when X >= 3|B|", inputs, json!({"value": triples.count}), triples.count as f64, triples.bound, h),
            None => r.measure("cz_triples_bound", inputs, json!({"value": triples.count}), triples.count as f64, triples.bound),
        }
    }
    for i in 0..10 {
        let mut g = rng::derived(p.seed, &format!("popularity/{i}"));
        let w: Vec<u64> = (0..100).map(|_| if g.random_bool(0.3) { g.random_range(0..1000) } else { 0 }).collect();
        let x: u64 = w.iter().sum();
        let pop = popularity_refine(&w, x);
        r.check_measure(
            "popularity",
            "kept weight >= X/2",
            json!({"seed": p.seed, "instance": i, "b": 100, "x": x}),
            json!({"value": pop.kept_weight, "kept": pop.kept.len()}),
            pop.kept_weight as f64,
            x as f64 / 2.0,
            pop.retains_half(),
        );
    }
    let s3 = Space::new(p.field, 3)?;
    let s4 = Space::new(p.field, 4)?;
    let mut families: Vec<(String, Space, PointSet, Vec<Line>)> = Vec::new();
    let bes3 = random_besicovitch(&s3, &mut rng::derived(p.seed, "ineq/bes3"))?;
    families.push(("random besicovitch F^3".into(), s3, bes3.points().clone(), bes3.lines().to_vec()));
    let sep3 = random_direction_separated(&s3, (q * q) as usize, &mut rng::derived(p.seed, "ineq/sep3"), "sep3")?;
    families.push(("q^2 separated lines F^3".into(), s3, sep3.points().clone(), sep3.lines().to_vec()));
    let sep4 = random_direction_separated(&s4, (q * q * q) as usize, &mut rng::derived(p.seed, "ineq/sep4"), "sep4")?;
    families.push(("q^3 separated lines F^4".into(), s4, sep4.points().clone(), sep4.lines().to_vec()));
    let all3: Vec<Line> = s3.enumerate_lines()?.iter().collect();
    families.push(("all lines F^3".into(), s3, PointSet::full(s3.num_points()), all3));
    let (sp, ex) = build_sphere(&p.field, &[1, 1, 1, 1])?;
    families.push(("sphere diag(1,1,1,1)".into(), sp, ex.config.points().clone(), ex.config.lines().to_vec()));
    for (name, space, pts, lines) in &families {
        let inputs = json!({"q": q, "family": name, "seed": p.seed, "lines": lines.len(), "points": pts.len()});
        let e = easy_bound_check(space, pts, lines)?;
        r.check_measure("easy_bound", "ratio <= 8", inputs.clone(), json!({"value": e.incidences}), e.incidences as f64, e.bound, e.ratio <= 8.0);
        if direction_audit(lines).all_distinct {
            let w = wip_bound_check(space, pts, lines)?;
            r.measure("wip_bound", inputs.clone(), json!({"value": w.incidences}), w.incidences as f64, w.bound);
            let exact = w.incidences == q as u64 * lines.len() as u64;
            r.check("wip_containment", "|I| == q|L|", inputs.clone(), json!({"value": w.incidences}), exact);
            let pn = plate_number(space, lines)?;
            r.check_measure("plate_number", "<= q + 1", inputs, json!({"value": pn.value, "argmax": pn.argmax}), pn.value as f64, (q + 1) as f64, pn.value <= q + 1);
        }
    }
    Ok(r.entries)
}

pub fn refine(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let mut r = Recorder::new("refine", q);
    let form = sphere_form(p);
    let (space, ex) = build_sphere(&p.field, &form)?;
    let bes = random_besicovitch(&space, &mut rng::derived(p.seed, "refine/family"))?;
    let cases = [
        (format!("sphere {form:?}"), ex.config.points().clone(), ex.config.lines().to_vec()),
        ("random besicovitch F^4".to_string(), bes.points().clone(), bes.lines().to_vec()),
    ];
    for (name, pts, lines) in cases {
        let rep = refine_pipeline(&space, &pts, &lines, p.n_refine)?;
        let inputs = json!({"q": q, "family": name, "n": p.n_refine, "seed": p.seed});
        let stages: Vec<Value> = rep.stages.iter().map(|s| json!(s)).collect();
        r.check("refine_stage_invariant", "|I(k+1)| >= |I(k)|/4", inputs.clone(), json!({"stages": stages}), rep.stage_invariant);
        r.check("refine_monotone", "P(k+1) in P(k), L(k+1) in L(k)", inputs.clone(), json!({"final_points": rep.final_points.len(), "final_lines": rep.final_lines.len()}), rep.monotone);
        r.check("refine_dyadic_class", "surviving mu_0 in chosen class", inputs.clone(), json!({"class": rep.dyadic_class}), rep.class_membership);
        let window = (q as f64).powf(1.0 / 16.0);
        r.measure("refine_alpha", inputs.clone(), json!({"alpha": rep.alpha, "window": "1 <= alpha <= |F|^(1/16)"}), rep.alpha(), window);
        let decay = 0.25f64.powi(p.n_refine as i32);
        let first = rep.stages[0].incidences as f64;
        let last = rep.stages.last().unwrap().incidences as f64;
        r.measure("refine_retention", inputs.clone(), json!({"value": last, "initial": first, "4^-N": decay}), last, first * decay);
        for (k, st) in rep.stages.iter().enumerate() {
            let si = json!({"q": q, "family": name, "stage": k});
            r.measure("plate_number", si.clone(), json!({"value": st.plate_number}), st.plate_number as f64, q as f64);
            if let Some(m) = st.max_lines_per_3flat {
                r.measure("max_lines_per_3flat", si, json!({"value": m}), m as f64, q as f64);
            }
        }
    }
    Ok(r.entries)
}

fn sample_lines(lines: &[Line], amount: usize, seed: u64, label: &str) -> Vec<Line> {
    let amount = amount.min(lines.len());
    let mut idx = index::sample(&mut rng::derived(seed, label), lines.len(), amount).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| lines[i]).collect()
}

pub fn harvest(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let mut r = Recorder::new("harvest", q);
    let form = sphere_form(p);
    let (space, ex) = build_sphere(&p.field, &form)?;
    let pts = ex.config.points();
    let sub = sample_lines(ex.config.lines(), HARVEST_SUBFAMILY, p.seed, "harvest/sub");
    let h = h_harvest(&space, pts, &sub)?;
    let inputs = json!({"q": q, "form": form, "seed": p.seed, "lines": sub.len()});
    r.check("harvest_identity", "sum_S0 |C| == |H1|", inputs.clone(), json!(h), h.identity_holds());
    r.check("harvest_nesting", "|H1| <= |H0| and |S1| <= |S0|", inputs.clone(), json!({"h0": h.h0, "h1": h.h1, "s0": h.s0, "s1": h.s1}), h.h1 <= h.h0 && h.s1 <= h.s0);
    let small = sample_lines(&sub, HARVEST_REFERENCE, p.seed, "harvest/reference");
    let fast = h_harvest(&space, pts, &small)?;
    let slow = h_harvest_reference(&space, pts, &small)?;
    r.check(
        "harvest_reference",
        "indexed counts equal direct enumeration",
        json!({"q": q, "seed": p.seed, "lines": small.len()}),
        json!({"indexed": fast, "reference": slow}),
        fast == slow,
    );
    Ok(r.entries)
}

pub fn probe(p: &Params) -> Result<Vec<Entry>> {
    let q = p.field.q();
    let mut r = Recorder::new("probe", q);
    let space = Space::new(p.field, 4)?;
    let all: Vec<Line> = space.enumerate_lines()?.iter().collect();
    let (_, ex) = build_sphere(&p.field, &[1, 1, 1, 1])?;
    let parallel: Vec<Line> =
        (0..q * q).map(|k| space.canonical_line(&[0, k / q, k % q, 0], &[1, 0, 0, 0])).collect();
    let families = [("all lines", all), ("sphere diag(1,1,1,1)", ex.config.lines().to_vec()), ("q^2 parallel lines", parallel)];
    for (name, lines) in families {
        let st = mc_probe(&space, &lines, PROBE_SAMPLES, p.seed)?;
        let inputs = json!({"q": q, "family": name, "samples": PROBE_SAMPLES, "seed": p.seed});
        r.measure("probe_meet_frequency", inputs.clone(), json!(st), st.meet_frequency, 1.0 / q as f64);
        if let Some(m) = st.mean_lines_per_3flat {
            r.measure("probe_lines_per_3flat", inputs.clone(), json!({"value": m}), m, q as f64);
        }
        r.measure("probe_lines_per_direction", inputs.clone(), json!({"value": st.mean_lines_per_direction}), st.mean_lines_per_direction, 1.0);
        if q == 3 && lines.len() > 1 {
            let exact = meet_probability_exact(&space, &lines);
            r.measure("probe_meet_exact", inputs, json!({"value": exact}), st.meet_frequency, exact);
        }
    }
    Ok(r.entries)
}

/// The full sweep behind the acceptance criteria.
pub fn all(p: &Params) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    let at = |pr: u32| -> Result<Params> { Ok(Params { field: FieldSpec::prime(pr)?, form: None, ..p.clone() }) };
    for pr in [3, 5, 7, 11, 13] {
        out.extend(gauss(&at(pr)?)?);
        out.extend(levelset(&at(pr)?)?);
    }
    for pr in [3, 5, 7, 11] {
        let f = FieldSpec::prime(pr)?;
        out.extend(sphere_with(&f, &[1, 1, 1, 1])?);
        out.extend(sphere_with(&f, &[1, 1, 1, non_square(&f)])?);
    }
    for pr in [3, 5] {
        out.extend(heisenberg(&at(pr)?)?);
    }
    for pr in [3, 5, 7] {
        out.extend(regulus(&Params { frame: FrameChoice::Model, ..at(pr)? })?);
    }
    out.extend(regulus(&Params { frame: FrameChoice::Random, ..at(3)? })?);
    for pr in [3, 5] {
        out.extend(threereg(&Params { frame: FrameChoice::Model, ..at(pr)? })?);
    }
    out.extend(threereg(&Params { frame: FrameChoice::Random, ..at(3)? })?);
    out.extend(inequalities(&at(3)?)?);
    out.extend(inequalities(&at(5)?)?);
    out.extend(refine(&at(5)?)?);
    out.extend(harvest(&at(3)?)?);
    out.extend(probe(&at(3)?)?);
    Ok(out)
}
