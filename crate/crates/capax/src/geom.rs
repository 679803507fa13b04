//! Exact rational 2D convex geometry.
//!
//! Polygons are stored in a canonical form: counterclockwise vertex order,
//! lexicographically smallest vertex first, no three consecutive collinear
//! vertices. Degenerate polygons (a single point, a segment) are first-class
//! values; small optimisers in the capacity problems are frequently segments.

use crate::error::{Error, Result};
use crate::rat::{is_integer, rat_ceil, rat_floor, rat_gcd, Rat};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;

/// A point of the rational plane. Also used for displacement vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPoint {
    pub x: Rat,
    pub y: Rat,
}

/// Alias used where a value is a displacement rather than a location.
pub type RatVec = RatPoint;

impl RatPoint {
    pub fn new(x: Rat, y: Rat) -> Self {
        RatPoint { x, y }
    }

    pub fn from_ints(x: i64, y: i64) -> Self {
        RatPoint::new(crate::rat::rat_i(x), crate::rat::rat_i(y))
    }

    pub fn is_lattice(&self) -> bool {
        is_integer(&self.x) && is_integer(&self.y)
    }

    pub fn add(&self, other: &RatPoint) -> RatPoint {
        RatPoint::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &RatPoint) -> RatPoint {
        RatPoint::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn scale(&self, q: &Rat) -> RatPoint {
        RatPoint::new(&self.x * q, &self.y * q)
    }

    pub fn neg(&self) -> RatPoint {
        RatPoint::new(-self.x.clone(), -self.y.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// 2D cross product `self.x * other.y - self.y * other.x`.
    pub fn cross(&self, other: &RatPoint) -> Rat {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn dot(&self, other: &RatPoint) -> Rat {
        &self.x * &other.x + &self.y * &other.y
    }

    fn lex_cmp(&self, other: &RatPoint) -> Ordering {
        self.x.cmp(&other.x).then_with(|| self.y.cmp(&other.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Degeneracy {
    Point,
    Segment,
    Full,
}

/// Convex polygon with exact rational vertices, possibly degenerate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatPolygon {
    vertices: Vec<RatPoint>,
}

/// Orientation of the turn `a -> b -> c`: positive for counterclockwise.
fn orient(a: &RatPoint, b: &RatPoint, c: &RatPoint) -> Rat {
    b.sub(a).cross(&c.sub(a))
}

/// Convex hull of a non-empty point set, in canonical form.
pub fn hull(points: &[RatPoint]) -> Result<RatPolygon> {
    if points.is_empty() {
        return Err(Error::EmptyInput("hull of no points"));
    }
    let mut pts: Vec<RatPoint> = points.to_vec();
    pts.sort_by(|a, b| a.lex_cmp(b));
    pts.dedup();
    if pts.len() == 1 {
        return Ok(RatPolygon { vertices: pts });
    }
    // Monotone chain with strict turns, so collinear interior points drop out.
    let build = |iter: &mut dyn Iterator<Item = &RatPoint>| -> Vec<RatPoint> {
        let mut chain: Vec<RatPoint> = Vec::new();
        for p in iter {
            while chain.len() >= 2
                && orient(&chain[chain.len() - 2], &chain[chain.len() - 1], p) <= Rat::zero()
            {
                chain.pop();
            }
            chain.push(p.clone());
        }
        chain
    };
    let lower = build(&mut pts.iter());
    let upper = build(&mut pts.iter().rev());
    if lower.len() == 2 && upper.len() == 2 {
        // All points collinear: keep the two extremes.
        return Ok(RatPolygon { vertices: lower });
    }
    let mut verts = lower;
    verts.pop();
    let upper_len = upper.len();
    verts.extend(upper.into_iter().take(upper_len - 1));
    Ok(RatPolygon { vertices: verts })
}

impl RatPolygon {
    pub fn point(p: RatPoint) -> RatPolygon {
        RatPolygon { vertices: vec![p] }
    }

    /// Vertices in canonical order (counterclockwise, lexicographic minimum first).
    pub fn vertices(&self) -> &[RatPoint] {
        &self.vertices
    }

    pub fn degeneracy(&self) -> Degeneracy {
        match self.vertices.len() {
            1 => Degeneracy::Point,
            2 => Degeneracy::Segment,
            _ => Degeneracy::Full,
        }
    }

    pub fn is_lattice(&self) -> bool {
        self.vertices.iter().all(|p| p.is_lattice())
    }

    /// Counterclockwise edge vectors. A segment yields both orientations, a
    /// point none, so perimeter-style sums stay meaningful on degenerate input.
    pub fn edges_ccw(&self) -> Vec<RatVec> {
        match self.degeneracy() {
            Degeneracy::Point => vec![],
            Degeneracy::Segment => {
                let d = self.vertices[1].sub(&self.vertices[0]);
                vec![d.neg(), d]
            }
            Degeneracy::Full => {
                let n = self.vertices.len();
                (0..n)
                    .map(|i| self.vertices[(i + 1) % n].sub(&self.vertices[i]))
                    .collect()
            }
        }
    }

    /// Clockwise edge vectors (negations of the counterclockwise ones).
    pub fn edges_cw(&self) -> Vec<RatVec> {
        self.edges_ccw().into_iter().map(|e| e.neg()).collect()
    }

    pub fn translate(&self, t: &RatVec) -> RatPolygon {
        RatPolygon {
            vertices: self.vertices.iter().map(|p| p.add(t)).collect(),
        }
    }

    /// Dilation by a positive rational factor.
    pub fn dilate(&self, q: &Rat) -> RatPolygon {
        assert!(q.is_positive(), "dilation factor must be positive");
        RatPolygon {
            vertices: self.vertices.iter().map(|p| p.scale(q)).collect(),
        }
    }

    /// Image under the integer-linear map with columns `(m00, m10), (m01, m11)`
    /// followed by re-canonicalisation.
    pub fn map_linear(&self, m00: &Rat, m01: &Rat, m10: &Rat, m11: &Rat) -> RatPolygon {
        let pts: Vec<RatPoint> = self
            .vertices
            .iter()
            .map(|p| RatPoint::new(m00 * &p.x + m01 * &p.y, m10 * &p.x + m11 * &p.y))
            .collect();
        hull(&pts).expect("nonempty")
    }

    pub fn contains(&self, p: &RatPoint) -> bool {
        match self.degeneracy() {
            Degeneracy::Point => *p == self.vertices[0],
            Degeneracy::Segment => {
                let d = self.vertices[1].sub(&self.vertices[0]);
                let r = p.sub(&self.vertices[0]);
                if !d.cross(&r).is_zero() {
                    return false;
                }
                let t = d.dot(&r);
                !t.is_negative() && t <= d.dot(&d)
            }
            Degeneracy::Full => {
                let n = self.vertices.len();
                (0..n).all(|i| {
                    !orient(&self.vertices[i], &self.vertices[(i + 1) % n], p).is_negative()
                })
            }
        }
    }

    pub fn x_range(&self) -> (Rat, Rat) {
        let mut min = self.vertices[0].x.clone();
        let mut max = min.clone();
        for v in &self.vertices[1..] {
            if v.x < min {
                min = v.x.clone();
            }
            if v.x > max {
                max = v.x.clone();
            }
        }
        (min, max)
    }

    pub fn y_range(&self) -> (Rat, Rat) {
        let mut min = self.vertices[0].y.clone();
        let mut max = min.clone();
        for v in &self.vertices[1..] {
            if v.y < min {
                min = v.y.clone();
            }
            if v.y > max {
                max = v.y.clone();
            }
        }
        (min, max)
    }
}

/// Shoelace area; zero for degenerate polygons.
pub fn area(p: &RatPolygon) -> Rat {
    if p.degeneracy() != Degeneracy::Full {
        return Rat::zero();
    }
    let vs = p.vertices();
    let n = vs.len();
    let mut twice = Rat::zero();
    for i in 0..n {
        twice += vs[i].cross(&vs[(i + 1) % n]);
    }
    twice / crate::rat::rat_i(2)
}

/// The vertical extent of the polygon over the line `x = x0`, if they meet.
fn column_span(p: &RatPolygon, x0: &Rat) -> Option<(Rat, Rat)> {
    let vs = p.vertices();
    let n = vs.len();
    let mut lo: Option<Rat> = None;
    let mut hi: Option<Rat> = None;
    let mut note = |y: Rat| {
        if lo.as_ref().map_or(true, |l| y < *l) {
            lo = Some(y.clone());
        }
        if hi.as_ref().map_or(true, |h| y > *h) {
            hi = Some(y);
        }
    };
    if n == 1 {
        if vs[0].x == *x0 {
            note(vs[0].y.clone());
        }
    } else {
        let pairs: Vec<(usize, usize)> = if n == 2 {
            vec![(0, 1)]
        } else {
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        };
        for (i, j) in pairs {
            let (a, b) = (&vs[i], &vs[j]);
            let (xa, xb) = (&a.x, &b.x);
            if xa == xb {
                if xa == x0 {
                    note(a.y.clone());
                    note(b.y.clone());
                }
                continue;
            }
            let (lo_x, hi_x) = if xa < xb { (xa, xb) } else { (xb, xa) };
            if x0 < lo_x || x0 > hi_x {
                continue;
            }
            let t = (x0 - xa) / (xb - xa);
            note(&a.y + t * (&b.y - &a.y));
        }
    }
    match (lo, hi) {
        (Some(l), Some(h)) => Some((l, h)),
        _ => None,
    }
}

/// Number of integer points in the closed region, by a column scan over the
/// bounding box. Agrees with Pick's theorem on lattice polygons (see
/// [`lattice_count_pick`]); the scan is the primary route because it also
/// covers rational vertices.
pub fn lattice_count(p: &RatPolygon) -> BigInt {
    let (xmin, xmax) = p.x_range();
    let mut count = BigInt::zero();
    let mut x = rat_ceil(&xmin);
    let xstop = rat_floor(&xmax);
    while x <= xstop {
        let xq = Rat::from_integer(x.clone());
        if let Some((ylo, yhi)) = column_span(p, &xq) {
            let lo = rat_ceil(&ylo);
            let hi = rat_floor(&yhi);
            if hi >= lo {
                count += hi - lo + 1;
            }
        }
        x += 1;
    }
    count
}

/// Pick's theorem count `A + B/2 + 1` for polygons with integer vertices.
pub fn lattice_count_pick(p: &RatPolygon) -> Result<BigInt> {
    if !p.is_lattice() {
        return Err(Error::InvalidArgument(
            "Pick's theorem requires integer vertices".into(),
        ));
    }
    match p.degeneracy() {
        Degeneracy::Point => Ok(BigInt::from(1)),
        Degeneracy::Segment => {
            let len = lattice_length(&p.vertices()[1].sub(&p.vertices()[0]));
            Ok(len.to_integer() + 1)
        }
        Degeneracy::Full => {
            let a = area(p);
            let b = lattice_perimeter(p);
            let count = a + b / crate::rat::rat_i(2) + Rat::from_integer(BigInt::from(1));
            debug_assert!(is_integer(&count));
            Ok(count.to_integer())
        }
    }
}

/// Exact Minkowski sum: the hull of pairwise vertex sums.
pub fn minkowski_sum(p: &RatPolygon, q: &RatPolygon) -> RatPolygon {
    let mut sums = Vec::with_capacity(p.vertices().len() * q.vertices().len());
    for a in p.vertices() {
        for b in q.vertices() {
            sums.push(a.add(b));
        }
    }
    hull(&sums).expect("nonempty")
}

/// Mixed volume `area(P+Q) - area(P) - area(Q)`. Symmetric and nonnegative;
/// `mv(P, P) = 2 area(P)`.
pub fn mixed_volume(p: &RatPolygon, q: &RatPolygon) -> Rat {
    area(&minkowski_sum(p, q)) - area(p) - area(q)
}

/// Lattice (affine) length: the `t >= 0` with `v = t * (primitive integer vector)`.
pub fn lattice_length(v: &RatVec) -> Rat {
    if v.is_zero() {
        return Rat::zero();
    }
    rat_gcd(&v.x, &v.y)
}

/// The primitive integer vector with the direction of nonzero `v`, plus the
/// lattice length, so `v = len * prim`.
pub fn primitive_direction(v: &RatVec) -> Option<((BigInt, BigInt), Rat)> {
    if v.is_zero() {
        return None;
    }
    let len = lattice_length(v);
    let px = (&v.x / &len).to_integer();
    let py = (&v.y / &len).to_integer();
    Some(((px, py), len))
}

/// Support pairing of `omega` against an edge vector: the maximum of `v x p`
/// over `p` in `omega`. With `omega` in the first quadrant containing the
/// origin the value is nonnegative, and vanishes exactly for up-left
/// directions.
pub fn omega_length(omega: &RatPolygon, v: &RatVec) -> Result<Rat> {
    if v.is_zero() {
        return Err(Error::InvalidArgument("omega_length of zero vector".into()));
    }
    Ok(omega
        .vertices()
        .iter()
        .map(|p| v.cross(p))
        .max()
        .expect("nonempty polygon"))
}

/// Sum of [`omega_length`] over the clockwise edges of `lambda`; equals
/// `mixed_volume(lambda, omega)`. The clockwise convention is what makes the
/// identity hold, because for a clockwise edge `v` the rotated vector is the
/// outward normal times the edge's lattice length.
pub fn omega_perimeter(omega: &RatPolygon, lambda: &RatPolygon) -> Rat {
    lambda
        .edges_cw()
        .iter()
        .map(|e| omega_length(omega, e).expect("edges are nonzero"))
        .sum()
}

/// Sum of lattice lengths over the boundary edges. For a segment both
/// orientations contribute, matching the clockwise-edge convention above.
pub fn lattice_perimeter(p: &RatPolygon) -> Rat {
    p.edges_ccw().iter().map(lattice_length).sum()
}

/// Integer points of the polygon, column by column.
pub fn lattice_points(p: &RatPolygon) -> Vec<(BigInt, BigInt)> {
    let (xmin, xmax) = p.x_range();
    let mut out = Vec::new();
    let mut x = rat_ceil(&xmin);
    let xstop = rat_floor(&xmax);
    while x <= xstop {
        let xq = Rat::from_integer(x.clone());
        if let Some((ylo, yhi)) = column_span(p, &xq) {
            let mut y = rat_ceil(&ylo);
            let ystop = rat_floor(&yhi);
            while y <= ystop {
                out.push((x.clone(), y.clone()));
                y += 1;
            }
        }
        x += 1;
    }
    out
}

/// Detect `p = q * p0` with `p0` a lattice polygon whose edge lattice lengths
/// have gcd 1 and, when the polygon is a point or segment, minimal integer
/// data. Returns `(q, p0)`. The scale is unique for full-dimensional polygons
/// anchored anywhere, because dilation is measured from the vertex structure
/// (edge vectors), not from the origin: we factor the edge multiset and then
/// re-anchor `p0` at the image of the original lexicographic-minimum vertex
/// divided by `q`, which is only guaranteed to be a lattice point when `p`'s
/// vertices are `q` times lattice points. Callers wanting the toric-domain
/// notion should pass polygons with a vertex at the origin.
pub fn primitive_scale(p: &RatPolygon) -> Option<(Rat, RatPolygon)> {
    match p.degeneracy() {
        Degeneracy::Point => None,
        _ => {
            let lens: Vec<Rat> = p
                .edges_ccw()
                .iter()
                .map(lattice_length)
                .collect();
            let q = crate::rat::rat_gcd_all(lens.iter())?;
            if q.is_zero() {
                return None;
            }
            let inv = Rat::from_integer(BigInt::from(1)) / &q;
            let scaled = p.dilate(&inv);
            if scaled.is_lattice() {
                Some((q, scaled))
            } else {
                None
            }
        }
    }
}

/// Counterclockwise angular order on nonzero integer directions, starting at
/// `(1, 0)`. Exact: splits into half-planes, then compares by cross product.
pub fn ccw_dir_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    fn half(d: (i64, i64)) -> u8 {
        if d.1 > 0 || (d.1 == 0 && d.0 > 0) {
            0
        } else {
            1
        }
    }
    let (ha, hb) = (half(a), half(b));
    if ha != hb {
        return ha.cmp(&hb);
    }
    let cross = (a.0 as i128) * (b.1 as i128) - (a.1 as i128) * (b.0 as i128);
    cross.cmp(&0).reverse()
}
