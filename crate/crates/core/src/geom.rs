//! Canonical affine flats of `F^n`, `n` in {2, 3, 4}.
//!
//! Canonical forms make value equality coincide with point-set equality:
//!
//! * a [`Line`] stores its direction scaled so the first nonzero coordinate
//!   (the pivot) is 1, and its base is the lexicographically least point of
//!   the line, which is the unique point whose pivot coordinate is 0;
//! * a [`Flat`] stores its direction space as a reduced row echelon matrix
//!   and its base with every pivot coordinate zeroed.
//!
//! Points are keyed by the big-endian mixed-radix encoding
//! `key(x) = x_0 q^{n-1} + x_1 q^{n-2} + ... + x_{n-1}` of their element
//! codes, so key order is lexicographic order. Lines and flats enumerate in
//! lexicographic order of (canonical direction data, canonical base), which
//! is also their derived `Ord`.

use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ff::FieldSpec;
use crate::linalg;

pub const MAX_DIM: usize = 4;

/// Coordinates of a point or vector; entries past the ambient dimension are 0.
pub type Vector = [u32; MAX_DIM];

/// Hard cap on the number of lines an enumeration may produce.
pub const MAX_LINES: u64 = 6_000_000;

/// Largest field size for which `F^4` may be enumerated.
pub const MAX_Q_DIM4: u32 = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    n: u8,
    coords: Vector,
}

impl Point {
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords[..self.n as usize]
    }

    pub fn raw(&self) -> &Vector {
        &self.coords
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Line {
    n: u8,
    dir: Vector,
    base: Vector,
}

impl Line {
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn direction(&self) -> &[u32] {
        &self.dir[..self.n as usize]
    }

    pub fn raw_direction(&self) -> &Vector {
        &self.dir
    }

    pub fn base(&self) -> Point {
        Point { n: self.n, coords: self.base }
    }

    /// Index of the first nonzero direction coordinate.
    pub fn pivot(&self) -> usize {
        self.dir.iter().position(|&c| c != 0).expect("canonical direction is nonzero")
    }
}

impl Serialize for Line {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Line", 2)?;
        s.serialize_field("base", self.base().coords())?;
        s.serialize_field("dirs", &[self.direction()])?;
        s.end()
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} + t{:?}", self.base().coords(), self.direction())
    }
}

/// An affine subspace of dimension `k` (1 to 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flat {
    n: u8,
    k: u8,
    dirs: [Vector; 3],
    base: Vector,
}

impl Flat {
    pub fn dim(&self) -> usize {
        self.k as usize
    }

    pub fn ambient_dim(&self) -> usize {
        self.n as usize
    }

    /// Reduced row echelon basis of the direction space.
    pub fn directions(&self) -> &[Vector] {
        &self.dirs[..self.k as usize]
    }

    pub fn base(&self) -> Point {
        Point { n: self.n, coords: self.base }
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.directions()
            .iter()
            .map(|d| d.iter().position(|&c| c != 0).expect("rref row is nonzero"))
            .collect()
    }

    /// The linear part, i.e. the translate through the origin.
    pub fn direction_space(&self) -> Subspace {
        Subspace { n: self.n, k: self.k, rows: self.dirs }
    }
}

impl Serialize for Flat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Flat", 2)?;
        s.serialize_field("base", self.base().coords())?;
        let dirs: Vec<&[u32]> = self.directions().iter().map(|d| &d[..self.n as usize]).collect();
        s.serialize_field("dirs", &dirs)?;
        s.end()
    }
}

/// A linear subspace in reduced row echelon form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: u8,
    k: u8,
    rows: [Vector; 3],
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.k as usize
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows[..self.k as usize]
    }

    fn pivots(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows().iter().map(|r| r.iter().position(|&c| c != 0).unwrap())
    }
}

/// The ambient affine space `F^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    field: FieldSpec,
    n: usize,
    num_points: u32,
}

impl Space {
    pub fn new(field: FieldSpec, n: usize) -> Result<Self> {
        if !(2..=MAX_DIM).contains(&n) {
            return Err(Error::Usage(format!("ambient dimension must be 2, 3 or 4, got {n}")));
        }
        let num_points = (field.q() as u64).pow(n as u32);
        if num_points > 1 << 26 {
            return Err(Error::Resource(format!("{field}^{n} has too many points to key")));
        }
        Ok(Space { field, n, num_points: num_points as u32 })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn num_points(&self) -> usize {
        self.num_points as usize
    }

    fn zero(&self) -> Vector {
        [0; MAX_DIM]
    }

    pub fn point(&self, coords: &[u32]) -> Result<Point> {
        Ok(Point { n: self.n as u8, coords: self.vector(coords)? })
    }

    /// Validates and pads a coordinate slice.
    pub fn vector(&self, coords: &[u32]) -> Result<Vector> {
        if coords.len() != self.n {
            return Err(Error::Usage(format!(
                "expected {} coordinates, got {}",
                self.n,
                coords.len()
            )));
        }
        let q = self.q();
        if let Some(&c) = coords.iter().find(|&&c| c >= q) {
            return Err(Error::Usage(format!("coordinate {c} is not a code of {}", self.field)));
        }
        let mut v = self.zero();
        v[..self.n].copy_from_slice(coords);
        Ok(v)
    }

    pub fn point_from_raw(&self, coords: Vector) -> Point {
        Point { n: self.n as u8, coords }
    }

    #[inline]
    pub fn key(&self, p: &Point) -> u32 {
        self.key_of(&p.coords)
    }

    #[inline]
    pub fn key_of(&self, v: &Vector) -> u32 {
        let q = self.q();
        v[..self.n].iter().fold(0, |acc, &c| acc * q + c)
    }

    pub fn point_at(&self, key: u32) -> Point {
        self.point_from_raw(self.vector_at(key))
    }

    pub fn vector_at(&self, mut key: u32) -> Vector {
        let q = self.q();
        let mut v = self.zero();
        for i in (0..self.n).rev() {
            v[i] = key % q;
            key /= q;
        }
        v
    }

    #[inline]
    pub fn vadd(&self, a: &Vector, b: &Vector) -> Vector {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = self.field.add(a[i], b[i]);
        }
        out
    }

    #[inline]
    pub fn vsub(&self, a: &Vector, b: &Vector) -> Vector {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = self.field.sub(a[i], b[i]);
        }
        out
    }

    #[inline]
    pub fn vscale(&self, c: u32, a: &Vector) -> Vector {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = self.field.mul(c, a[i]);
        }
        out
    }

    /// `a + c b`.
    #[inline]
    pub fn vaxpy(&self, a: &Vector, c: u32, b: &Vector) -> Vector {
        let mut out = self.zero();
        for i in 0..self.n {
            out[i] = self.field.add(a[i], self.field.mul(c, b[i]));
        }
        out
    }

    pub fn is_zero(&self, v: &Vector) -> bool {
        v[..self.n].iter().all(|&c| c == 0)
    }

    fn rows(&self, vs: &[&Vector]) -> Vec<Vec<u32>> {
        vs.iter().map(|v| v[..self.n].to_vec()).collect()
    }

    pub fn rank_of(&self, vs: &[&Vector]) -> usize {
        linalg::rank(&self.field, &self.rows(vs), self.n)
    }

    /// Scales `dir` so its first nonzero coordinate is 1.
    pub fn normalize_direction(&self, dir: &Vector) -> Option<Vector> {
        let lead = dir[..self.n].iter().copied().find(|&c| c != 0)?;
        Some(self.vscale(self.field.inv(lead).unwrap(), dir))
    }

    /// Canonical line through `base` with nonzero direction `dir`.
    pub fn canonical_line(&self, base: &Vector, dir: &Vector) -> Line {
        let dir = self.normalize_direction(dir).expect("direction must be nonzero");
        let j = dir.iter().position(|&c| c != 0).unwrap();
        let base = self.vaxpy(base, self.field.neg(base[j]), &dir);
        Line { n: self.n as u8, dir, base }
    }

    fn check_point(&self, p: &Point) -> Result<()> {
        if p.dim() != self.n {
            return Err(Error::Usage(format!("point of dimension {} in F^{}", p.dim(), self.n)));
        }
        Ok(())
    }

    fn check_line(&self, l: &Line) -> Result<()> {
        if l.dim() != self.n {
            return Err(Error::Usage(format!("line of dimension {} in F^{}", l.dim(), self.n)));
        }
        Ok(())
    }

    pub fn line_from(&self, base: &Point, dir: &[u32]) -> Result<Line> {
        self.check_point(base)?;
        let dir = self.vector(dir)?;
        if self.is_zero(&dir) {
            return Err(Error::Degenerate("line direction is zero".into()));
        }
        Ok(self.canonical_line(&base.coords, &dir))
    }

    pub fn line_through(&self, a: &Point, b: &Point) -> Result<Line> {
        self.check_point(a)?;
        self.check_point(b)?;
        if a == b {
            return Err(Error::Degenerate("a line needs two distinct points".into()));
        }
        Ok(self.canonical_line(&a.coords, &self.vsub(&b.coords, &a.coords)))
    }

    /// The point `base + t dir`.
    #[inline]
    pub fn line_point(&self, l: &Line, t: u32) -> Vector {
        self.vaxpy(&l.base, t, &l.dir)
    }

    #[inline]
    pub fn line_contains_vec(&self, l: &Line, x: &Vector) -> bool {
        let j = l.pivot();
        let t = self.field.sub(x[j], l.base[j]);
        self.line_point(l, t) == *x
    }

    pub fn incident(&self, p: &Point, l: &Line) -> Result<bool> {
        self.check_point(p)?;
        self.check_line(l)?;
        Ok(self.line_contains_vec(l, &p.coords))
    }

    /// Keys of the `q` points of `l`, ordered by the parameter `t`.
    pub fn line_keys(&self, l: &Line) -> Vec<u32> {
        (0..self.q()).map(|t| self.key_of(&self.line_point(l, t))).collect()
    }

    pub fn line_points(&self, l: &Line) -> impl Iterator<Item = Point> + '_ {
        let l = *l;
        (0..self.q()).map(move |t| self.point_from_raw(self.line_point(&l, t)))
    }

    fn check_pair(&self, a: &Line, b: &Line) -> Result<()> {
        self.check_line(a)?;
        self.check_line(b)
    }

    /// Translates of each other but not identical.
    pub fn parallel(&self, a: &Line, b: &Line) -> Result<bool> {
        self.check_pair(a, b)?;
        Ok(a.dir == b.dir && a.base != b.base)
    }

    pub fn coplanar(&self, a: &Line, b: &Line) -> Result<bool> {
        self.check_pair(a, b)?;
        Ok(self.coplanar_unchecked(a, b))
    }

    #[inline]
    pub fn coplanar_unchecked(&self, a: &Line, b: &Line) -> bool {
        let diff = self.vsub(&b.base, &a.base);
        self.rank_of(&[&a.dir, &b.dir, &diff]) <= 2
    }

    pub fn skew(&self, a: &Line, b: &Line) -> Result<bool> {
        Ok(!self.coplanar(a, b)?)
    }

    /// The unique common point of two distinct lines, if any.
    pub fn meet(&self, a: &Line, b: &Line) -> Option<Vector> {
        if a == b || a.dir == b.dir {
            return None;
        }
        // Solve t a.dir - s b.dir = b.base - a.base.
        let f = &self.field;
        let rows: Vec<Vec<u32>> = (0..self.n)
            .map(|i| vec![a.dir[i], f.neg(b.dir[i]), f.sub(b.base[i], a.base[i])])
            .collect();
        let ech = linalg::rref(f, &rows, 3);
        if ech.pivots.contains(&2) {
            return None;
        }
        // Directions differ, so columns 0 and 1 are both pivots.
        let t = ech.rows[0][2];
        Some(self.line_point(a, t))
    }

    /// Whether the lines share at least one point.
    pub fn intersects(&self, a: &Line, b: &Line) -> bool {
        a == b || self.meet(a, b).is_some()
    }

    /// The unique 3-flat containing two skew lines.
    pub fn span3(&self, a: &Line, b: &Line) -> Result<Flat> {
        if !self.skew(a, b)? {
            return Err(Error::Degenerate("span3 needs skew lines".into()));
        }
        let diff = self.vsub(&b.base, &a.base);
        self.flat_from_raw(&a.base, &[a.dir, b.dir, diff])
    }

    /// The 2-flat spanned by two distinct coplanar lines.
    pub fn span2(&self, a: &Line, b: &Line) -> Result<Flat> {
        self.check_pair(a, b)?;
        if a == b || !self.coplanar_unchecked(a, b) {
            return Err(Error::Degenerate("span2 needs distinct coplanar lines".into()));
        }
        let third = if a.dir == b.dir { self.vsub(&b.base, &a.base) } else { b.dir };
        self.flat_from_raw(&a.base, &[a.dir, third])
    }

    pub fn flat_from(&self, base: &Point, dirs: &[Vec<u32>]) -> Result<Flat> {
        self.check_point(base)?;
        let dirs = dirs.iter().map(|d| self.vector(d)).collect::<Result<Vec<_>>>()?;
        self.flat_from_raw(&base.coords, &dirs)
    }

    /// Canonical flat through `base` spanned by independent `dirs`.
    pub fn flat_from_raw(&self, base: &Vector, dirs: &[Vector]) -> Result<Flat> {
        let k = dirs.len();
        if k == 0 || k > 3 || k > self.n {
            return Err(Error::Usage(format!("cannot build a {k}-flat in F^{}", self.n)));
        }
        let ech = linalg::rref(&self.field, &self.rows(&dirs.iter().collect::<Vec<_>>()), self.n);
        if ech.rank() != k {
            return Err(Error::Degenerate(format!(
                "{k} direction vectors have rank {}",
                ech.rank()
            )));
        }
        let mut rows = [[0u32; MAX_DIM]; 3];
        for (r, row) in rows.iter_mut().zip(&ech.rows) {
            r[..self.n].copy_from_slice(row);
        }
        let sub = Subspace { n: self.n as u8, k: k as u8, rows };
        Ok(self.flat_in(&sub, base))
    }

    /// Canonical translate of `sub` through `base`.
    pub fn flat_in(&self, sub: &Subspace, base: &Vector) -> Flat {
        Flat { n: self.n as u8, k: sub.k, dirs: sub.rows, base: self.reduce(sub, base) }
    }

    /// Zeroes the pivot coordinates of `v` by subtracting rows of `sub`.
    pub fn reduce(&self, sub: &Subspace, v: &Vector) -> Vector {
        let mut out = *v;
        for (row, p) in sub.rows().iter().zip(sub.pivots()) {
            out = self.vaxpy(&out, self.field.neg(out[p]), row);
        }
        out
    }

    pub fn subspace_contains(&self, sub: &Subspace, v: &Vector) -> bool {
        self.is_zero(&self.reduce(sub, v))
    }

    pub fn flat_contains_vec(&self, f: &Flat, x: &Vector) -> bool {
        self.reduce(&f.direction_space(), x) == f.base
    }

    pub fn flat_contains_point(&self, f: &Flat, p: &Point) -> bool {
        self.flat_contains_vec(f, &p.coords)
    }

    pub fn flat_contains_line(&self, f: &Flat, l: &Line) -> bool {
        let sub = f.direction_space();
        self.subspace_contains(&sub, &l.dir) && self.reduce(&sub, &l.base) == f.base
    }

    /// `base + sum t_i d_i`.
    pub fn flat_point(&self, f: &Flat, params: &[u32]) -> Vector {
        f.directions().iter().zip(params).fold(f.base, |acc, (d, &t)| self.vaxpy(&acc, t, d))
    }

    /// Intrinsic coordinates of a point of `f`: its pivot coordinates minus the base's.
    pub fn flat_coordinates(&self, f: &Flat, x: &Vector) -> Option<[u32; 3]> {
        if !self.flat_contains_vec(f, x) {
            return None;
        }
        let mut out = [0u32; 3];
        for (slot, p) in out.iter_mut().zip(f.pivots()) {
            *slot = self.field.sub(x[p], f.base[p]);
        }
        Some(out)
    }

    pub fn flat_keys(&self, f: &Flat) -> Vec<u32> {
        let k = f.dim();
        let q = self.q();
        let total = q.pow(k as u32);
        (0..total)
            .map(|mut idx| {
                let mut params = [0u32; 3];
                for slot in params[..k].iter_mut().rev() {
                    *slot = idx % q;
                    idx /= q;
                }
                self.key_of(&self.flat_point(f, &params[..k]))
            })
            .collect()
    }

    /// Projective directions as canonical vectors, in lexicographic order.
    pub fn directions(&self) -> Vec<Vector> {
        (0..self.num_points)
            .map(|k| self.vector_at(k))
            .filter(|v| v[..self.n].iter().find(|&&c| c != 0) == Some(&1))
            .collect()
    }

    pub fn num_directions(&self) -> u64 {
        let q = self.q() as u64;
        (q.pow(self.n as u32) - 1) / (q - 1)
    }

    pub fn num_lines(&self) -> u64 {
        self.num_directions() * (self.q() as u64).pow(self.n as u32 - 1)
    }

    fn check_caps(&self) -> Result<()> {
        if self.n == 4 && self.q() > MAX_Q_DIM4 {
            return Err(Error::Resource(format!(
                "enumeration in F^4 requires q <= {MAX_Q_DIM4}, got q = {}",
                self.q()
            )));
        }
        if self.num_lines() > MAX_LINES {
            return Err(Error::Resource(format!(
                "{} lines exceeds the cap of {MAX_LINES}",
                self.num_lines()
            )));
        }
        Ok(())
    }

    /// Every line of `F^n` exactly once, in canonical order.
    pub fn enumerate_lines(&self) -> Result<LineEnumeration> {
        self.check_caps()?;
        Ok(LineEnumeration {
            space: *self,
            dirs: self.directions(),
            per_dir: self.q().pow(self.n as u32 - 1),
        })
    }

    /// All `k`-dimensional linear subspaces in reduced row echelon form, sorted.
    pub fn subspaces(&self, k: usize) -> Result<Vec<Subspace>> {
        if k == 0 || k > 3 || k > self.n {
            return Err(Error::Usage(format!("no {k}-subspaces enumerated in F^{}", self.n)));
        }
        self.check_caps()?;
        let q = self.q();
        let n = self.n;
        let mut out = Vec::new();
        // Pivot sets as increasing k-subsets of 0..n.
        let mut pivots: Vec<usize> = (0..k).collect();
        loop {
            // Free slots: (row, col) with col > pivot[row] and col not a pivot.
            let slots: Vec<(usize, usize)> = (0..k)
                .flat_map(|r| {
                    let pv = &pivots;
                    ((pv[r] + 1)..n).filter(move |c| !pv.contains(c)).map(move |c| (r, c))
                })
                .collect();
            let combos = (q as u64).pow(slots.len() as u32);
            for mut idx in 0..combos {
                let mut rows = [[0u32; MAX_DIM]; 3];
                for (r, &pc) in pivots.iter().enumerate() {
                    rows[r][pc] = 1;
                }
                for &(r, c) in slots.iter().rev() {
                    rows[r][c] = (idx % q as u64) as u32;
                    idx /= q as u64;
                }
                out.push(Subspace { n: n as u8, k: k as u8, rows });
            }
            // Next k-subset.
            let Some(i) = (0..k).rev().find(|&i| pivots[i] < n - k + i) else {
                break;
            };
            pivots[i] += 1;
            for j in i + 1..k {
                pivots[j] = pivots[j - 1] + 1;
            }
        }
        out.sort();
        Ok(out)
    }

    /// Every `k`-flat exactly once, in canonical order.
    pub fn enumerate_flats(&self, k: usize) -> Result<FlatEnumeration> {
        let subs = self.subspaces(k)?;
        Ok(FlatEnumeration { space: *self, subs, per_sub: self.q().pow((self.n - k) as u32) })
    }
}

/// Random-access enumeration of `Gr(F^n, 1)`; index ranges can be handed to
/// independent workers.
#[derive(Clone, Debug)]
pub struct LineEnumeration {
    space: Space,
    dirs: Vec<Vector>,
    per_dir: u32,
}

impl LineEnumeration {
    pub fn len(&self) -> usize {
        self.dirs.len() * self.per_dir as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn directions(&self) -> &[Vector] {
        &self.dirs
    }

    pub fn get(&self, index: usize) -> Line {
        let sp = &self.space;
        let dir = self.dirs[index / self.per_dir as usize];
        let mut r = (index % self.per_dir as usize) as u32;
        let j = dir.iter().position(|&c| c != 0).unwrap();
        let q = sp.q();
        let mut base = [0u32; MAX_DIM];
        for i in (0..sp.n).rev() {
            if i == j {
                continue;
            }
            base[i] = r % q;
            r /= q;
        }
        Line { n: sp.n as u8, dir, base }
    }

    pub fn iter(&self) -> impl Iterator<Item = Line> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}

#[derive(Clone, Debug)]
pub struct FlatEnumeration {
    space: Space,
    subs: Vec<Subspace>,
    per_sub: u32,
}

impl FlatEnumeration {
    pub fn len(&self) -> usize {
        self.subs.len() * self.per_sub as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subs
    }

    pub fn get(&self, index: usize) -> Flat {
        let sp = &self.space;
        let sub = self.subs[index / self.per_sub as usize];
        let mut r = (index % self.per_sub as usize) as u32;
        let pivots: Vec<usize> = sub.pivots().collect();
        let q = sp.q();
        let mut base = [0u32; MAX_DIM];
        for i in (0..sp.n).rev() {
            if pivots.contains(&i) {
                continue;
            }
            base[i] = r % q;
            r /= q;
        }
        Flat { n: sp.n as u8, k: sub.k, dirs: sub.rows, base }
    }

    pub fn iter(&self) -> impl Iterator<Item = Flat> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }
}
