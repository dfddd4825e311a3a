//! Acceptance suite: one pass/fail line per criterion. Every oracle here is
//! written against first principles (own modular arithmetic, brute-force
//! enumeration, analytical counts) and compared with the engine's answer.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::Rng as _;
use serde_json::Value;

use ffkakeya::construct::{
    build_sphere_example, direction_audit, heisenberg_points, random_besicovitch, random_direction_separated,
    wolff_audit,
};
use ffkakeya::incidence::{
    cz_pairs, cz_triples, easy_bound_check, h_harvest, plate_number, popularity_refine, refine_pipeline, HCount, Relation,
};
use ffkakeya::reguli::{
    fit_quadric, model_frame, random_frame, transversal_variety_count, transversals_full_scan, translate_frame, Regulus,
};
use ffkakeya::{rng, FieldSpec, Flat, Line, PointSet, QuadraticForm, Space};

// Tolerances and limits, pinned.
const GAUSS_MODULUS_TOL: f64 = 1e-6;
const GAUSS_ORACLE_TOL: f64 = 1e-9;
const GAUSS_IDENTITY_TOL: f64 = 1e-4;
const CARDINALITY_FACTOR: f64 = 8.0;
const WOLFF_FACTOR: u32 = 10;
const EASY_BOUND_RATIO: f64 = 8.0;
const VARIETY_FACTOR: u64 = 8;
const CZ_INSTANCES: usize = 20;
const CZ_MAX_SIZE: usize = 50;
const HARVEST_SUBFAMILY: usize = 200;
const HARVEST_REFERENCE: usize = 30;
const SEED: u64 = 42;
const SUITE_LIMIT: Duration = Duration::from_secs(600);

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut acc, mut b) = (1 % m, b % m);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    acc
}

fn own_non_residue(p: u32) -> u32 {
    (2..p).find(|&s| pow_mod(s as u64, ((p - 1) / 2) as u64, p as u64) == (p - 1) as u64).unwrap()
}

fn eval_diag(d: &[u32], x: &[u32], p: u32) -> u32 {
    (d.iter().zip(x).map(|(&a, &b)| a as u64 * b as u64 * b as u64).sum::<u64>() % p as u64) as u32
}

/// Every vector of `F_p^n`, as coordinate lists.
fn all_vectors(p: u32, n: usize) -> impl Iterator<Item = Vec<u32>> {
    (0..(p as u64).pow(n as u32)).map(move |mut k| {
        let mut v = vec![0u32; n];
        for c in v.iter_mut().rev() {
            *c = (k % p as u64) as u32;
            k /= p as u64;
        }
        v
    })
}

fn key_set(space: &Space, l: &Line) -> HashSet<u32> {
    space.line_keys(l).into_iter().collect()
}

fn c1_gauss() -> Outcome {
    let mut checked = 0;
    for p in [3u32, 5, 7, 11, 13] {
        let f = FieldSpec::prime(p).map_err(|e| e.to_string())?;
        for y in 0..p {
            let (mut re, mut im) = (0.0f64, 0.0f64);
            for x in 0..p {
                let k = (y as u64 * x as u64 * x as u64 % p as u64) as f64;
                re += (TAU * k / p as f64).cos();
                im += (TAU * k / p as f64).sin();
            }
            let s = f.gauss_sum(y).map_err(|e| e.to_string())?;
            ensure((s.re - re).abs() < GAUSS_ORACLE_TOL && (s.im - im).abs() < GAUSS_ORACLE_TOL, || {
                format!("S({y}) over F_{p} disagrees with the direct sum")
            })?;
            if y == 0 {
                ensure(s.re == p as f64 && s.im == 0.0, || format!("S(0) != {p} exactly"))?;
            } else {
                ensure((s.norm_sqr() - p as f64).abs() < GAUSS_MODULUS_TOL, || format!("||S({y})|^2 - {p}| too large"))?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} Gauss sums checked"))
}

fn c2_level_sets() -> Outcome {
    let mut forms_checked = 0;
    let mut worst = 0.0f64;
    for p in [3u32, 5, 7, 11, 13] {
        let s = own_non_residue(p);
        let f = FieldSpec::prime(p).map_err(|e| e.to_string())?;
        for n in [3usize, 4] {
            for mask in 0..1u32 << n {
                let d: Vec<u32> = (0..n).map(|i| if mask >> i & 1 == 1 { s } else { 1 }).collect();
                let mut own = vec![0u64; p as usize];
                for x in all_vectors(p, n) {
                    own[eval_diag(&d, &x, p) as usize] += 1;
                }
                let form = QuadraticForm::diagonal(f, &d).map_err(|e| e.to_string())?;
                ensure(form.rank() >= 3, || format!("form {d:?} has rank < 3"))?;
                let hist = form.level_set_histogram().map_err(|e| e.to_string())?;
                ensure(hist == own, || format!("level sets of {d:?} over F_{p} disagree with enumeration"))?;
                let main = (p as i64).pow(n as u32 - 1);
                for (v, &c) in own.iter().enumerate() {
                    let dev = c as i64 - main;
                    ensure(((dev * dev) as u128) < (p as u128).pow(n as u32), || {
                        format!("|count - q^(n-1)| >= q^(n/2) for {d:?}, v = {v}, q = {p}")
                    })?;
                    let est = form.gauss_estimate(v as u32).map_err(|e| e.to_string())?;
                    let err = (est.re - c as f64).abs().max(est.im.abs());
                    worst = worst.max(err);
                    ensure(err < GAUSS_IDENTITY_TOL, || format!("Gauss identity off by {err} at {d:?}, v = {v}"))?;
                }
                forms_checked += 1;
            }
        }
    }
    Ok(format!("{forms_checked} forms, all targets; worst Gauss-identity error {worst:.2e}"))
}

fn sphere(space: &Space, d: &[u32]) -> Result<(PointSet, Vec<Line>), String> {
    let form = QuadraticForm::diagonal(*space.field(), d).map_err(|e| e.to_string())?;
    let ex = build_sphere_example(space, &form).map_err(|e| e.to_string())?;
    Ok((ex.config.points().clone(), ex.config.lines().to_vec()))
}

fn c3_sphere() -> Outcome {
    let mut notes = Vec::new();
    for p in [3u32, 5, 7, 11] {
        let s = own_non_residue(p);
        let space = Space::new(FieldSpec::prime(p).unwrap(), 4).unwrap();
        let q3 = (p as f64).powi(3);
        for d in [vec![1, 1, 1, 1], vec![1, 1, 1, s]] {
            let (pts, lines) = sphere(&space, &d)?;
            // own point set
            let own: BTreeSet<u32> = all_vectors(p, 4)
                .filter(|x| eval_diag(&d, x, p) == 1)
                .map(|x| space.key_of(&[x[0], x[1], x[2], x[3]]))
                .collect();
            ensure(pts.iter().collect::<BTreeSet<_>>() == own, || format!("sphere points differ for {d:?}, q = {p}"))?;
            if p == 3 && d == [1, 1, 1, 1] {
                ensure(own.len() == 24, || format!("|P| = {} at q = 3", own.len()))?;
            }
            // containment checked with own evaluation
            for l in &lines {
                for t in 0..p {
                    let x = space.line_point(l, t);
                    ensure(eval_diag(&d, &x, p) == 1, || format!("line {l} leaves the sphere"))?;
                }
            }
            for (what, size) in [("|P|", pts.len()), ("|L|", lines.len())] {
                let x = size as f64;
                ensure(x >= q3 / CARDINALITY_FACTOR && x <= CARDINALITY_FACTOR * q3, || {
                    format!("{what} = {size} outside [q^3/8, 8q^3] at q = {p}")
                })?;
            }
            let mut dirs = BTreeMap::new();
            for l in &lines {
                *dirs.entry(l.direction().to_vec()).or_insert(0) += 1;
            }
            ensure(dirs.values().any(|&c| c > 1), || "sphere family unexpectedly direction-separated".into())?;
            ensure(!direction_audit(&lines).all_distinct, || "direction_audit reports all-distinct".into())?;
            if p <= 5 {
                // scan route: every line through two sphere points that stays on the sphere
                let pv: Vec<u32> = own.iter().copied().collect();
                let mut scanned = BTreeSet::new();
                for (i, &a) in pv.iter().enumerate() {
                    for &b in &pv[i + 1..] {
                        let l = space.line_through(&space.point_at(a), &space.point_at(b)).unwrap();
                        if space.line_keys(&l).iter().all(|k| own.contains(k)) {
                            scanned.insert(l);
                        }
                    }
                }
                let generated: BTreeSet<Line> = lines.iter().copied().collect();
                ensure(scanned == generated && generated.len() == lines.len(), || {
                    format!("generated and scanned families differ at q = {p}, {d:?}")
                })?;
                // Wolff audit by scanning every 3-flat
                let flats = space.enumerate_flats(3).unwrap();
                let max = flats.iter().map(|f| lines.iter().filter(|l| space.flat_contains_line(&f, l)).count()).max().unwrap();
                ensure(max as u32 <= WOLFF_FACTOR * p, || format!("{max} lines in a 3-flat at q = {p}"))?;
                let lib = wolff_audit(&space, &lines, 3).unwrap();
                ensure(lib.max_lines as usize == max, || "Wolff audit disagrees with the flat scan".into())?;
                if p == 5 {
                    notes.push(format!("q=5 {d:?}: |P|={} |L|={} max/3-flat={max}", pts.len(), lines.len()));
                }
            }
        }
    }
    Ok(format!("4 fields x 2 forms; {}", notes.join("; ")))
}

fn c4_heisenberg() -> Outcome {
    for p in [3u32, 5] {
        let f = FieldSpec::quadratic(p).unwrap();
        let (space, pts) = heisenberg_points(&f).map_err(|e| e.to_string())?;
        let q = p * p;
        let (re, im) = (|c: u32| c % p, |c: u32| c / p);
        let mut own = 0u64;
        for key in 0..q * q * q {
            let v = space.vector_at(key);
            let (z1, z2, z3) = (v[0], v[1], v[2]);
            // Im(z1 conj z2) for z = a + b t, conj z = a - b t
            let target = (im(z1) * re(z2) + p * p - (re(z1) * im(z2)) % p) % p;
            let member = im(z3) == target;
            own += member as u64;
            ensure(pts.contains(key) == member, || format!("membership differs at {v:?} over GF({p}^2)"))?;
        }
        ensure(own == (p as u64).pow(5) && pts.len() as u64 == own, || format!("|P| = {} != {p}^5", pts.len()))?;
    }
    Ok("|P| = p^5 at p = 3, 5".into())
}

fn c5_reguli() -> Outcome {
    for p in [3u32, 5, 7] {
        let space = Space::new(FieldSpec::prime(p).unwrap(), 4).unwrap();
        let frame = model_frame(&space, [0, 1, 2]).map_err(|e| e.to_string())?;
        let reg = Regulus::new(&space, frame).map_err(|e| e.to_string())?;
        let expected: BTreeSet<Line> =
            (0..p).map(|a| space.canonical_line(&[a, 0, 0, 0], &[0, 1, a, 0])).collect();
        ensure(reg.transversals.len() == p as usize, || format!("|L(f)| = {} at q = {p}", reg.transversals.len()))?;
        ensure(reg.transversals.iter().copied().collect::<BTreeSet<_>>() == expected, || "wrong transversals".into())?;
        let frame_keys: Vec<HashSet<u32>> = frame.lines.iter().map(|l| key_set(&space, l)).collect();
        let own_full: BTreeSet<Line> = space
            .enumerate_lines()
            .unwrap()
            .iter()
            .filter(|l| {
                let ks = key_set(&space, l);
                frame_keys.iter().all(|f| !f.is_disjoint(&ks))
            })
            .collect();
        ensure(own_full == expected, || "own full scan of Gr(F^4,1) disagrees".into())?;
        let lib_full = transversals_full_scan(&space, &frame).map_err(|e| e.to_string())?;
        ensure(lib_full == reg.transversals, || "full scan and 3-flat scan disagree".into())?;
        let own_r: BTreeSet<u32> =
            (0..p).flat_map(|x| (0..p).map(move |y| (x, y))).map(|(x, y)| space.key_of(&[x, y, x * y % p, 0])).collect();
        ensure(reg.points.iter().collect::<BTreeSet<_>>() == own_r, || "r(f) is not {z = xy}".into())?;
        ensure(own_r.len() == (p * p) as usize, || "|r(f)| != q^2".into())?;
        let quad = fit_quadric(&space, &reg).map_err(|e| e.to_string())?;
        let c = quad.coefficients;
        let lead = c[3];
        let mut want = [0u32; 10];
        want[3] = lead;
        want[5] = (p - lead) % p;
        ensure(lead != 0 && c == want, || format!("quadric {c:?} not proportional to z - xy"))?;
        // monomials 1, x, y, z, x^2, xy, xz, y^2, yz, z^2 in the slice x4 = 0
        for &k in &own_r {
            let v = space.vector_at(k);
            let (x, y, z) = (v[0] as u64, v[1] as u64, v[2] as u64);
            let m = [1, x, y, z, x * x, x * y, x * z, y * y, y * z, z * z];
            let val = m.iter().zip(&c).map(|(a, &b)| a * b as u64).sum::<u64>() % p as u64;
            ensure(val == 0, || format!("fitted quadric nonzero at {v:?}"))?;
        }
    }
    Ok("model frames at q = 3, 5, 7".into())
}

/// Lines `(a, b, c, 0) + t (dx, dy, dz, 1)` with `(a + k dx)(b + k dy) = c + k dz`
/// for `k = 0, 1, 2`. Lines with no `x_4` component stay in one slice and
/// never meet all three.
fn analytic_variety(p: u64) -> u64 {
    let mut count = 0;
    for a in 0..p {
        for b in 0..p {
            let c = a * b % p;
            for dx in 0..p {
                for dy in 0..p {
                    let dz = ((a + dx) * (b + dy) % p + p - c) % p;
                    if (a + 2 * dx) * (b + 2 * dy) % p == (c + 2 * dz) % p {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

fn slice(space: &Space, c: u32) -> Flat {
    space
        .flat_from(&space.point(&[0, 0, 0, c]).unwrap(), &[vec![1, 0, 0, 0], vec![0, 1, 0, 0], vec![0, 0, 1, 0]])
        .unwrap()
}

fn brute_variety(space: &Space, regs: &[Regulus]) -> u64 {
    space
        .enumerate_lines()
        .unwrap()
        .iter()
        .filter(|l| {
            let ks = space.line_keys(l);
            regs.iter().all(|r| ks.iter().any(|&k| r.points.contains(k)))
        })
        .count() as u64
}

fn c6_variety() -> Outcome {
    let mut notes = Vec::new();
    for p in [3u32, 5] {
        let space = Space::new(FieldSpec::prime(p).unwrap(), 4).unwrap();
        let f0 = model_frame(&space, [0, 1, 2]).unwrap();
        let regs: Vec<Regulus> = (0..3)
            .map(|c| Regulus::new(&space, translate_frame(&space, &f0, &[0, 0, 0, c]).unwrap()).unwrap())
            .collect();
        let w = transversal_variety_count(&space, [&regs[0], &regs[1], &regs[2]]).map_err(|e| e.to_string())?;
        let oracle = analytic_variety(p as u64);
        let formula = 2 * (p as u64).pow(3) - (p as u64).pow(2);
        ensure(w == formula && oracle == formula, || format!("W = {w}, oracle {oracle}, 2q^3 - q^2 = {formula}"))?;
        notes.push(format!("q={p}: W={w}"));
    }
    let space = Space::new(FieldSpec::prime(3).unwrap(), 4).unwrap();
    let mut random = Vec::new();
    for t in 0..3 {
        let regs: Vec<Regulus> = (0..3)
            .map(|c| {
                let mut g = rng::derived(SEED, &format!("acceptance/variety/{t}/{c}"));
                Regulus::new(&space, random_frame(&space, &slice(&space, c), &mut g).unwrap()).unwrap()
            })
            .collect();
        let w = transversal_variety_count(&space, [&regs[0], &regs[1], &regs[2]]).map_err(|e| e.to_string())?;
        ensure(w == brute_variety(&space, &regs), || "random-triple count disagrees with brute force".into())?;
        ensure(w <= VARIETY_FACTOR * 27, || format!("W = {w} > 8q^3"))?;
        random.push(w);
    }
    Ok(format!("{}; random q=3 triples W = {random:?}", notes.join(", ")))
}

fn random_relation(g: &mut rng::Rng) -> Relation {
    loop {
        let a = g.random_range(3..=CZ_MAX_SIZE);
        let b = g.random_range(1..=CZ_MAX_SIZE);
        let density = g.random_range(0.1..0.7);
        let related: Vec<Vec<usize>> = (0..b).map(|_| (0..a).filter(|_| g.random_bool(density)).collect()).collect();
        let x: usize = related.iter().map(|r| r.len()).sum();
        if x >= 2 * b {
            return Relation::new(a, related).unwrap();
        }
    }
}

fn own_incidences(space: &Space, pts: &PointSet, lines: &[Line]) -> u64 {
    lines.iter().map(|l| space.line_keys(l).iter().filter(|&&k| pts.contains(k)).count() as u64).sum()
}

fn own_plate_number(space: &Space, lines: &[Line]) -> usize {
    let planes = space.enumerate_flats(2).unwrap();
    planes.iter().map(|pl| lines.iter().filter(|l| space.flat_contains_line(&pl, l)).count()).max().unwrap_or(0)
}

fn c7_inequalities() -> Outcome {
    let mut g = rng::derived(SEED, "acceptance/cz");
    for i in 0..CZ_INSTANCES {
        let rel = random_relation(&mut g);
        let rel_of = |a: usize, b: usize| rel.related[b].contains(&a);
        let (mut pairs, mut triples) = (0u64, 0u64);
        for b in 0..rel.b_size() {
            for a in 0..rel.a_size {
                for a2 in 0..rel.a_size {
                    if a != a2 && rel_of(a, b) && rel_of(a2, b) {
                        pairs += 1;
                        for a3 in 0..rel.a_size {
                            if a3 != a && a3 != a2 && rel_of(a3, b) {
                                triples += 1;
                            }
                        }
                    }
                }
            }
        }
        let lp = cz_pairs(&rel).map_err(|e| e.to_string())?;
        let lt = cz_triples(&rel).map_err(|e| e.to_string())?;
        ensure(lp.count == pairs && lt.count == triples, || format!("cz instance {i}: engine disagrees with brute force"))?;
    }
    // easy bound over every family generated below, plate numbers over the separated ones
    let mut families: Vec<(String, Space, PointSet, Vec<Line>, bool)> = Vec::new();
    for p in [3u32, 5] {
        let f = FieldSpec::prime(p).unwrap();
        for n in [3usize, 4] {
            let space = Space::new(f, n).unwrap();
            for (j, count) in [p as usize * p as usize, space.num_directions() as usize].into_iter().enumerate() {
                let mut r = rng::derived(SEED, &format!("acceptance/sep/{p}/{n}/{j}"));
                let cfg = random_direction_separated(&space, count, &mut r, "sep").unwrap();
                families.push((format!("separated q={p} n={n} |L|={count}"), space, cfg.points().clone(), cfg.lines().to_vec(), true));
            }
        }
        let s4 = Space::new(f, 4).unwrap();
        let (pts, lines) = sphere(&s4, &[1, 1, 1, 1])?;
        families.push((format!("sphere q={p}"), s4, pts, lines, false));
    }
    let s3 = Space::new(FieldSpec::prime(3).unwrap(), 3).unwrap();
    families.push(("all lines F_3^3".into(), s3, PointSet::full(27), s3.enumerate_lines().unwrap().iter().collect(), false));
    let (hs, hp) = heisenberg_points(&FieldSpec::quadratic(3).unwrap()).unwrap();
    let hl = ffkakeya::construct::lines_contained(&hs, &hp).unwrap();
    families.push(("heisenberg p=3".into(), hs, hp, hl, false));
    let mut worst: f64 = 0.0;
    let mut plates = Vec::new();
    for (name, space, pts, lines, separated) in &families {
        let inc = own_incidences(space, pts, lines);
        let bound = (pts.len() as f64).sqrt() * lines.len() as f64 + pts.len() as f64;
        let ratio = inc as f64 / bound;
        worst = worst.max(ratio);
        let lib = easy_bound_check(space, pts, lines).map_err(|e| e.to_string())?;
        ensure(lib.incidences == inc, || format!("{name}: engine |I| = {} != {inc}", lib.incidences))?;
        ensure(ratio <= EASY_BOUND_RATIO, || format!("{name}: easy-bound ratio {ratio} > 8"))?;
        if *separated {
            let q = space.q();
            let pn = plate_number(space, lines).map_err(|e| e.to_string())?.value;
            ensure(pn <= q + 1, || format!("{name}: plate number {pn} > q + 1"))?;
            if q == 3 || space.n() == 3 {
                let own = own_plate_number(space, lines);
                ensure(own == pn as usize, || format!("{name}: plate number {pn} != scan {own}"))?;
            }
            plates.push(pn);
        }
    }
    let mut gw = rng::derived(SEED, "acceptance/popularity");
    for i in 0..50 {
        let len = gw.random_range(1..=200);
        let w: Vec<u64> = (0..len).map(|_| if gw.random_bool(0.4) { gw.random_range(0..5000) } else { 0 }).collect();
        let x: u64 = w.iter().sum();
        let r = popularity_refine(&w, x);
        let kept: u64 = r.kept.iter().map(|&k| w[k]).sum();
        ensure(2 * kept >= x, || format!("popularity instance {i}: kept {kept} < X/2 = {}", x as f64 / 2.0))?;
        for (k, &wk) in w.iter().enumerate() {
            let popular = 2 * len as u64 * wk >= x;
            ensure(r.kept.contains(&k) == popular, || format!("popularity instance {i}: threshold misapplied"))?;
        }
    }
    Ok(format!("{CZ_INSTANCES} cz instances; worst easy-bound ratio {worst:.3}; plate numbers {plates:?}"))
}

struct OwnStage {
    points: BTreeSet<u32>,
    lines: Vec<Line>,
    incidences: u64,
}

fn own_pipeline(space: &Space, p0: &PointSet, l0: &[Line], depth: usize) -> (u32, Vec<OwnStage>, BTreeMap<u32, u32>) {
    let mut mu0: BTreeMap<u32, u32> = BTreeMap::new();
    for l in l0 {
        for k in space.line_keys(l) {
            if p0.contains(k) {
                *mu0.entry(k).or_default() += 1;
            }
        }
    }
    let class_of = |m: u32| 31 - m.leading_zeros();
    let mut mass: BTreeMap<u32, u64> = BTreeMap::new();
    for &m in mu0.values() {
        *mass.entry(class_of(m)).or_default() += m as u64;
    }
    let best = mass.iter().map(|(&j, &s)| (s, j)).max().unwrap().1;
    let mut pts: BTreeSet<u32> = mu0.iter().filter(|(_, &m)| class_of(m) == best).map(|(&k, _)| k).collect();
    let mut lines = l0.to_vec();
    let count = |pts: &BTreeSet<u32>, l: &Line| space.line_keys(l).iter().filter(|k| pts.contains(k)).count() as u64;
    let mut stages = Vec::new();
    for k in 0..=depth {
        let inc: u64 = lines.iter().map(|l| count(&pts, l)).sum();
        stages.push(OwnStage { points: pts.clone(), lines: lines.clone(), incidences: inc });
        if k == depth {
            break;
        }
        let nl = lines.len() as u64;
        let kept: Vec<Line> = lines.iter().copied().filter(|l| 2 * nl * count(&pts, l) >= inc).collect();
        let np = pts.len() as u64;
        let next: BTreeSet<u32> = pts
            .iter()
            .copied()
            .filter(|&p| 4 * np * kept.iter().filter(|l| space.line_keys(l).contains(&p)).count() as u64 >= inc)
            .collect();
        pts = next;
        lines = kept;
    }
    (best, stages, mu0)
}

fn c8_pipeline() -> Outcome {
    let space = Space::new(FieldSpec::prime(5).unwrap(), 4).unwrap();
    let (sp, sl) = sphere(&space, &[1, 1, 1, 1])?;
    let bes = random_besicovitch(&space, &mut rng::derived(SEED, "acceptance/refine")).unwrap();
    let mut notes = Vec::new();
    for (name, p0, l0) in [("sphere", sp, sl), ("random direction-separated", bes.points().clone(), bes.lines().to_vec())] {
        let depth = 3;
        let rep = refine_pipeline(&space, &p0, &l0, depth).map_err(|e| e.to_string())?;
        let (class, own, mu0) = own_pipeline(&space, &p0, &l0, depth);
        ensure(rep.dyadic_class == class, || format!("{name}: dyadic class {} != {class}", rep.dyadic_class))?;
        for (k, (a, b)) in rep.stages.iter().zip(&own).enumerate() {
            ensure(a.points == b.points.len() && a.lines == b.lines.len() && a.incidences == b.incidences, || {
                format!("{name}: stage {k} differs from recomputation")
            })?;
        }
        for k in 0..depth {
            ensure(4 * own[k + 1].incidences >= own[k].incidences, || format!("{name}: |I| dropped by more than 4 at stage {k}"))?;
            ensure(own[k + 1].points.is_subset(&own[k].points), || format!("{name}: P not nested at stage {k}"))?;
            let prev: HashSet<&Line> = own[k].lines.iter().collect();
            ensure(own[k + 1].lines.iter().all(|l| prev.contains(l)), || format!("{name}: L not nested at stage {k}"))?;
        }
        ensure(own[0].points.iter().all(|&k| p0.contains(k)), || format!("{name}: P^(0) not inside P_0"))?;
        let final_pts: BTreeSet<u32> = rep.final_points.iter().collect();
        ensure(final_pts == own[depth].points, || format!("{name}: P_1 differs"))?;
        ensure(rep.final_lines == own[depth - 1].lines, || format!("{name}: L_1 differs"))?;
        let lo = 1u32 << class;
        ensure(final_pts.iter().all(|k| (lo..2 * lo).contains(&mu0[k])), || format!("{name}: survivor outside dyadic class"))?;
        let plates: Vec<u32> = rep.stages.iter().map(|s| s.plate_number).collect();
        let maxima: Vec<u32> = rep.stages.iter().filter_map(|s| s.max_lines_per_3flat).collect();
        notes.push(format!(
            "{name}: |I| {:?}, plate numbers {plates:?}, 3-flat maxima {maxima:?}, alpha {}",
            own.iter().map(|s| s.incidences).collect::<Vec<_>>(),
            rep.alpha()
        ));
    }
    Ok(notes.join("; "))
}

fn own_harvest(space: &Space, pts: &PointSet, lines: &[Line]) -> HCount {
    let n = lines.len();
    let keys: Vec<HashSet<u32>> = lines.iter().map(|l| key_set(space, l).into_iter().filter(|&k| pts.contains(k)).collect()).collect();
    let all_keys: Vec<HashSet<u32>> = lines.iter().map(|l| key_set(space, l)).collect();
    let skew = |i: usize, j: usize| lines[i].direction() != lines[j].direction() && all_keys[i].is_disjoint(&all_keys[j]);
    let common = |i: usize, j: usize| all_keys[i].intersection(&all_keys[j]).copied().find(|k| pts.contains(*k));
    let mut h = HCount::default();
    for l in 0..n {
        for l1 in (0..n).filter(|&x| x != l) {
            for l2 in (0..n).filter(|&x| x != l) {
                for &p1 in keys[l].intersection(&keys[l1]) {
                    for &p2 in keys[l].intersection(&keys[l2]) {
                        if p1 != p2 {
                            h.h0 += 1;
                            h.h1 += skew(l1, l2) as u64;
                        }
                    }
                }
            }
        }
    }
    let mut sets: Vec<Vec<(u32, u32)>> = Vec::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i && skew(i, j)) {
            let c: Vec<(u32, u32)> = (0..n)
                .filter(|&l| l != i && l != j)
                .filter_map(|l| Some((common(l, i)?, common(l, j)?)))
                .collect();
            sets.push(c);
        }
    }
    h.s0 = sets.len() as u64;
    h.sum_c = sets.iter().map(|c| c.len() as u64).sum();
    for c in sets.iter().filter(|c| 2 * h.s0 * c.len() as u64 >= h.h1) {
        h.s1 += 1;
        h.sum_c_s1 += c.len() as u64;
        for a in c {
            for b in c {
                for d in c {
                    let firsts: HashSet<u32> = [a.0, b.0, d.0].into_iter().collect();
                    let seconds: HashSet<u32> = [a.1, b.1, d.1].into_iter().collect();
                    h.sum_c3 += (firsts.len() == 3 && seconds.len() == 3) as u64;
                }
            }
        }
    }
    h
}

fn c9_harvest() -> Outcome {
    let space = Space::new(FieldSpec::prime(3).unwrap(), 4).unwrap();
    let (pts, lines) = sphere(&space, &[1, 1, 1, 1])?;
    let pick = |from: &[Line], amount: usize, label: &str| -> Vec<Line> {
        let amount = amount.min(from.len());
        let mut idx = index::sample(&mut rng::derived(SEED, label), from.len(), amount).into_vec();
        idx.sort_unstable();
        idx.into_iter().map(|i| from[i]).collect()
    };
    let sub = pick(&lines, HARVEST_SUBFAMILY, "acceptance/harvest/sub");
    let h = h_harvest(&space, &pts, &sub).map_err(|e| e.to_string())?;
    ensure(h.sum_c == h.h1, || format!("sum |C| = {} != |H1| = {}", h.sum_c, h.h1))?;
    let small = pick(&sub, HARVEST_REFERENCE, "acceptance/harvest/ref");
    let fast = h_harvest(&space, &pts, &small).map_err(|e| e.to_string())?;
    let slow = own_harvest(&space, &pts, &small);
    ensure(fast == slow, || format!("engine {fast:?} != reference {slow:?}"))?;
    Ok(format!("{} lines: {h:?}; 30-line reference matches", sub.len()))
}

fn run_all(jobs: &str) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_ffkakeya"))
        .args(["--experiment", "all", "--seed", "42", "--jobs", jobs])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn strip_timestamp(report: &str) -> String {
    report.lines().filter(|l| !l.trim_start().starts_with("\"timestamp\"")).collect::<Vec<_>>().join("\n")
}

fn c10_determinism() -> Outcome {
    let a = run_all("8")?;
    let b = run_all("8")?;
    ensure(strip_timestamp(&a) == strip_timestamp(&b), || "two runs differ beyond the timestamp".into())?;
    let c = run_all("1")?;
    let (va, vc): (Value, Value) =
        (serde_json::from_str(&a).map_err(|e| e.to_string())?, serde_json::from_str(&c).map_err(|e| e.to_string())?);
    ensure(va["results"] == vc["results"] && va["summary"] == vc["summary"], || "--jobs 1 and --jobs 8 differ".into())?;
    Ok(format!("{} results identical across runs and pool widths", va["results"].as_array().map_or(0, |r| r.len())))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (1, "Gauss sums", 1, c1_gauss),
        (2, "level-set bound and Gauss identity", 30, c2_level_sets),
        (3, "sphere example", 120, c3_sphere),
        (4, "Heisenberg example", 30, c4_heisenberg),
        (5, "model reguli", 60, c5_reguli),
        (6, "three-regulus variety", 120, c6_variety),
        (7, "pair/triple counts, easy bound, popularity, plate numbers", 60, c7_inequalities),
        (8, "refinement pipeline", 120, c8_pipeline),
        (9, "H harvest", 120, c9_harvest),
        (10, "determinism", 600, c10_determinism),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        let (ok, detail) = match outcome {
            Ok(d) if secs < limit as f64 => (true, d),
            Ok(d) => (false, format!("{d}; runtime over limit")),
            Err(e) => (false, e),
        };
        failed += !ok as u32;
        println!("criterion {id:>2} {}: {name} ({secs:.2}s, limit {limit}s): {detail}", if ok { "PASS" } else { "FAIL" });
    }
    let total = start.elapsed();
    let within = total < SUITE_LIMIT;
    failed += !within as u32;
    println!(
        "suite {}: {:.1}s total (limit {}s); {} of 10 criteria passed",
        if within && failed == 0 { "PASS" } else { "FAIL" },
        total.as_secs_f64(),
        SUITE_LIMIT.as_secs(),
        10 - failed.min(10)
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
