//! Toric surfaces: fans, torus-invariant divisors, section counts, exact
//! intersection numbers, and the nef-divisor capacity solver.
//!
//! A complete fan in the plane is a counterclockwise list of primitive rays;
//! a torus-invariant divisor is a support vector with one rational
//! coefficient per ray, and its polytope is the exact intersection of the
//! half-planes `<m, u_ray> >= -a_ray`. The polarisation is the divisor whose
//! polytope is the moment polygon of the domain that induced the fan.

use crate::domains::ConvexToricDomain;
use crate::ech::{CapacitySequence, Source};
use crate::error::{Error, Result};
use crate::geom::{
    area, ccw_dir_cmp, hull, lattice_count, lattice_length, mixed_volume, RatPoint, RatPolygon,
};
use crate::rat::{is_integer, rat_i, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// Complete fan plus polarisation support vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricSurfaceData {
    rays: Vec<(i64, i64)>,
    polarisation: Vec<Rat>,
}

/// Torus-invariant divisor as a support vector over the fan's rays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricDivisor {
    pub support: Vec<Rat>,
}

impl ToricDivisor {
    pub fn zero(n: usize) -> ToricDivisor {
        ToricDivisor {
            support: vec![Rat::zero(); n],
        }
    }

    pub fn from_ints(vals: &[i64]) -> ToricDivisor {
        ToricDivisor {
            support: vals.iter().map(|v| rat_i(*v)).collect(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.support.iter().all(is_integer)
    }

    /// Coefficient-wise round-down.
    pub fn floor(&self) -> ToricDivisor {
        ToricDivisor {
            support: self
                .support
                .iter()
                .map(|a| Rat::from_integer(crate::rat::rat_floor(a)))
                .collect(),
        }
    }

    pub fn add(&self, other: &ToricDivisor) -> ToricDivisor {
        ToricDivisor {
            support: self
                .support
                .iter()
                .zip(&other.support)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, q: &Rat) -> ToricDivisor {
        ToricDivisor {
            support: self.support.iter().map(|a| a * q).collect(),
        }
    }
}

impl ToricSurfaceData {
    /// Validate rays (primitive, strictly counterclockwise, positively
    /// spanning) and the polarisation (nef with a two-dimensional polytope).
    pub fn new(rays: Vec<(i64, i64)>, polarisation: Vec<Rat>) -> Result<ToricSurfaceData> {
        if rays.len() < 3 {
            return Err(Error::InvalidSurface("a complete fan needs >= 3 rays".into()));
        }
        if rays.len() != polarisation.len() {
            return Err(Error::InvalidSurface(
                "polarisation length must match ray count".into(),
            ));
        }
        for &(x, y) in &rays {
            if (x, y) == (0, 0) || x.unsigned_abs().gcd(&y.unsigned_abs()) != 1 {
                return Err(Error::InvalidSurface(format!(
                    "ray ({}, {}) is not primitive",
                    x, y
                )));
            }
        }
        let mut sorted = rays.clone();
        sorted.sort_by(|a, b| ccw_dir_cmp(*a, *b));
        sorted.dedup();
        if sorted.len() != rays.len() {
            return Err(Error::InvalidSurface("rays must be pairwise distinct".into()));
        }
        // Positive spanning: consecutive angular gaps below half a turn.
        let n = sorted.len();
        for i in 0..n {
            let a = sorted[i];
            let b = sorted[(i + 1) % n];
            let cross = (a.0 as i128) * (b.1 as i128) - (a.1 as i128) * (b.0 as i128);
            let opposite = a.0 == -b.0 && a.1 == -b.1;
            if cross <= 0 && !opposite {
                return Err(Error::InvalidSurface(
                    "rays do not positively span the plane".into(),
                ));
            }
        }
        // Store in canonical counterclockwise order, carrying supports along.
        let mut paired: Vec<((i64, i64), Rat)> =
            rays.into_iter().zip(polarisation.into_iter()).collect();
        paired.sort_by(|a, b| ccw_dir_cmp(a.0, b.0));
        let (rays, polarisation): (Vec<_>, Vec<_>) = paired.into_iter().unzip();
        let surface = ToricSurfaceData { rays, polarisation };
        let pol = surface.polarisation_divisor();
        let poly = polytope_of(&pol, &surface).ok_or_else(|| {
            Error::InvalidSurface("polarisation polytope is empty".into())
        })?;
        if poly.degeneracy() != crate::geom::Degeneracy::Full {
            return Err(Error::InvalidSurface(
                "polarisation polytope must be two-dimensional".into(),
            ));
        }
        if !is_nef(&pol, &surface) {
            return Err(Error::InvalidSurface("polarisation must be nef".into()));
        }
        Ok(surface)
    }

    /// Inner normal fan of a rational-sloped convex toric domain, with the
    /// polarisation recovering the domain as its polytope.
    pub fn normal_fan(omega: &ConvexToricDomain) -> Result<ToricSurfaceData> {
        let poly = omega.polygon();
        let verts = poly.vertices();
        let n = verts.len();
        let mut rays = Vec::with_capacity(n);
        let mut support = Vec::with_capacity(n);
        for i in 0..n {
            let a = &verts[i];
            let b = &verts[(i + 1) % n];
            let e = b.sub(a);
            // Inner normal of a counterclockwise edge: rotate left.
            let inner = RatPoint::new(-e.y.clone(), e.x.clone());
            let ((px, py), _) =
                crate::geom::primitive_direction(&inner).expect("edge is nonzero");
            let (ux, uy) = (
                px.to_i64().ok_or_else(|| Error::InvalidSurface("ray overflow".into()))?,
                py.to_i64().ok_or_else(|| Error::InvalidSurface("ray overflow".into()))?,
            );
            rays.push((ux, uy));
            support.push(-(RatPoint::from_ints(ux, uy).dot(a)));
        }
        ToricSurfaceData::new(rays, support)
    }

    pub fn rays(&self) -> &[(i64, i64)] {
        &self.rays
    }

    pub fn polarisation(&self) -> &[Rat] {
        &self.polarisation
    }

    pub fn polarisation_divisor(&self) -> ToricDivisor {
        ToricDivisor {
            support: self.polarisation.clone(),
        }
    }

    /// The canonical class `K = -sum of the prime invariant divisors`.
    pub fn canonical_divisor(&self) -> ToricDivisor {
        ToricDivisor {
            support: vec![-rat_i(1); self.rays.len()],
        }
    }

    /// Moment polygon of the polarisation.
    pub fn omega_polygon(&self) -> RatPolygon {
        polytope_of(&self.polarisation_divisor(), self).expect("validated nonempty")
    }

    /// Lattice length of the polygon edge with inner normal `rays[i]`; zero
    /// when the polarisation's polygon has no such edge. These are the
    /// intersection numbers of the prime invariant divisors with the
    /// polarisation, so `D . A = sum a_i * edge_length_i`.
    pub fn edge_lengths(&self) -> Vec<Rat> {
        edge_lengths_of(&self.omega_polygon(), &self.rays)
    }

    /// True when every pair of adjacent rays is a lattice basis.
    pub fn is_smooth(&self) -> bool {
        let n = self.rays.len();
        (0..n).all(|i| {
            let a = self.rays[i];
            let b = self.rays[(i + 1) % n];
            (a.0 as i128) * (b.1 as i128) - (a.1 as i128) * (b.0 as i128) == 1
        })
    }

    /// Fan refinement: keep the polarisation's polytope, add `extra` rays.
    /// The new supports evaluate the support function of the polarisation, so
    /// the refined surface pulls the polarisation back.
    pub fn refine(&self, extra: &[(i64, i64)]) -> Result<ToricSurfaceData> {
        let omega = self.omega_polygon();
        let mut rays = self.rays.clone();
        let mut support = self.polarisation.clone();
        for &(x, y) in extra {
            if rays.contains(&(x, y)) {
                continue;
            }
            let g = x.unsigned_abs().gcd(&y.unsigned_abs());
            if g != 1 {
                return Err(Error::InvalidSurface(format!(
                    "extra ray ({}, {}) is not primitive",
                    x, y
                )));
            }
            rays.push((x, y));
            support.push(support_level(&omega, (x, y)));
        }
        ToricSurfaceData::new(rays, support)
    }
}

/// `-min over the polygon of <m, u>`: the support coefficient making the
/// half-plane at `u` touch the polygon.
fn support_level(poly: &RatPolygon, u: (i64, i64)) -> Rat {
    let udir = RatPoint::from_ints(u.0, u.1);
    -poly
        .vertices()
        .iter()
        .map(|m| m.dot(&udir))
        .min()
        .expect("nonempty polygon")
}

fn edge_lengths_of(omega: &RatPolygon, rays: &[(i64, i64)]) -> Vec<Rat> {
    let verts = omega.vertices();
    let n = verts.len();
    let mut out = vec![Rat::zero(); rays.len()];
    for i in 0..n {
        let a = &verts[i];
        let b = &verts[(i + 1) % n];
        let e = b.sub(a);
        let inner = RatPoint::new(-e.y.clone(), e.x.clone());
        if let Some(((px, py), _)) = crate::geom::primitive_direction(&inner) {
            let key = (px.to_i64().unwrap(), py.to_i64().unwrap());
            if let Some(idx) = rays.iter().position(|r| *r == key) {
                out[idx] = lattice_length(&e);
            }
        }
    }
    out
}

/// Exact intersection of the half-planes `<m, u_i> >= level_i`. `None` when
/// empty. The constraint normals must positively span, so every nonempty
/// region is bounded and is the hull of the feasible pairwise line
/// intersections.
pub fn halfplane_region(constraints: &[((i64, i64), Rat)]) -> Option<RatPolygon> {
    let n = constraints.len();
    let mut pts: Vec<RatPoint> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (u1, b1) = (&constraints[i].0, &constraints[i].1);
            let (u2, b2) = (&constraints[j].0, &constraints[j].1);
            let det = (u1.0 as i128) * (u2.1 as i128) - (u1.1 as i128) * (u2.0 as i128);
            if det == 0 {
                continue;
            }
            // Solve <m, u1> = b1, <m, u2> = b2.
            let det = Rat::from_integer(BigInt::from(det));
            let x = (b1 * rat_i(u2.1) - b2 * rat_i(u1.1)) / &det;
            let yv = (rat_i(u1.0) * b2 - rat_i(u2.0) * b1) / &det;
            let p = RatPoint::new(x, yv);
            let feasible = constraints.iter().all(|(u, b)| {
                p.dot(&RatPoint::from_ints(u.0, u.1)) >= *b
            });
            if feasible {
                pts.push(p);
            }
        }
    }
    if pts.is_empty() {
        return None;
    }
    Some(hull(&pts).expect("nonempty"))
}

/// The polytope `{m : <m, u_i> >= -a_i}` of a divisor; `None` when empty.
pub fn polytope_of(d: &ToricDivisor, y: &ToricSurfaceData) -> Option<RatPolygon> {
    let constraints: Vec<((i64, i64), Rat)> = y
        .rays
        .iter()
        .zip(&d.support)
        .map(|(&u, a)| (u, -a))
        .collect();
    halfplane_region(&constraints)
}

/// Nef test: the polytope must touch every half-plane boundary.
pub fn is_nef(d: &ToricDivisor, y: &ToricSurfaceData) -> bool {
    let poly = match polytope_of(d, y) {
        Some(p) => p,
        None => return false,
    };
    y.rays.iter().enumerate().all(|(i, &u)| {
        let udir = RatPoint::from_ints(u.0, u.1);
        let min = poly
            .vertices()
            .iter()
            .map(|m| m.dot(&udir))
            .min()
            .expect("nonempty");
        min == -&d.support[i]
    })
}

/// Number of lattice points of the divisor's half-plane region: the
/// dimension of its space of global sections, nef or not. Zero for an empty
/// region.
pub fn section_count(d: &ToricDivisor, y: &ToricSurfaceData) -> BigInt {
    match polytope_of(d, y) {
        Some(p) => lattice_count(&p),
        None => BigInt::zero(),
    }
}

/// Tighten slack half-planes of an integral divisor, one integer level at a
/// time, until every hyperplane meets the region. The region's lattice points
/// never change (each tightening removes a sliver below the next integer
/// level of a primitive functional), and the result is the nef divisor of the
/// final polytope.
pub fn nef_repair(d: &ToricDivisor, y: &ToricSurfaceData) -> Result<ToricDivisor> {
    if !d.is_integral() {
        return Err(Error::InvalidDivisor("nef repair expects an integral divisor".into()));
    }
    let mut cur = d.clone();
    for _ in 0..256 {
        let poly = polytope_of(&cur, y).ok_or_else(|| {
            Error::InvalidDivisor("cannot repair a divisor with empty region".into())
        })?;
        let mut changed = false;
        for (i, &u) in y.rays.iter().enumerate() {
            let udir = RatPoint::from_ints(u.0, u.1);
            let min = poly
                .vertices()
                .iter()
                .map(|m| m.dot(&udir))
                .min()
                .expect("nonempty");
            if min > -&cur.support[i] {
                // Raise the level to the smallest integer >= min.
                cur.support[i] = Rat::from_integer(-crate::rat::rat_ceil(&min));
                changed = true;
            }
        }
        if !changed {
            return Ok(cur);
        }
    }
    Err(Error::ResourceLimit("nef repair did not stabilise".into()))
}

/// Sections of a nef divisor. Rational divisors are rounded down per
/// coefficient; if the round-down stops being nef its slack hyperplanes are
/// repaired first, which provably preserves the count.
pub fn h0(d: &ToricDivisor, y: &ToricSurfaceData) -> Result<BigInt> {
    if d.is_integral() {
        if !is_nef(d, y) {
            return Err(Error::InvalidDivisor(
                "h0 is only provided for nef integral divisors".into(),
            ));
        }
        return Ok(section_count(d, y));
    }
    if !is_nef(d, y) {
        return Err(Error::InvalidDivisor(
            "h0 of a rational divisor requires the divisor itself to be nef".into(),
        ));
    }
    let fl = d.floor();
    if polytope_of(&fl, y).is_none() {
        return Ok(BigInt::zero());
    }
    let repaired = if is_nef(&fl, y) { fl } else { nef_repair(&fl, y)? };
    let count = section_count(&repaired, y);
    debug_assert_eq!(count, section_count(&d.floor(), y));
    Ok(count)
}

/// `D . A` against the polarisation: linear in the support coefficients with
/// the polygon's edge lattice lengths as weights.
pub fn dot_polarisation(d: &ToricDivisor, y: &ToricSurfaceData) -> Rat {
    let lens = y.edge_lengths();
    d.support
        .iter()
        .zip(lens.iter())
        .map(|(a, l)| a * l)
        .sum()
}

/// Exact intersection number. Nef divisors pair through mixed volume of
/// their polytopes; one nef factor suffices via linearity in the other
/// argument; otherwise both are shifted nef by multiples of the polarisation
/// and expanded bilinearly.
pub fn intersect(d: &ToricDivisor, e: &ToricDivisor, y: &ToricSurfaceData) -> Result<Rat> {
    if is_nef(d, y) && is_nef(e, y) {
        let pd = polytope_of(d, y).expect("nef implies nonempty");
        let pe = polytope_of(e, y).expect("nef implies nonempty");
        return Ok(mixed_volume(&pd, &pe));
    }
    if is_nef(d, y) {
        return Ok(linear_pair_with_nef(d, e, y));
    }
    if is_nef(e, y) {
        return Ok(linear_pair_with_nef(e, d, y));
    }
    let a = y.polarisation_divisor();
    let md = nef_shift(d, &a, y)?;
    let me = nef_shift(e, &a, y)?;
    // (D + md A) . (E + me A) - me (D + md A) . A - md A . (E + me A)
    //   + md me A^2
    let dd = d.add(&a.scale(&rat_i(md)));
    let ee = e.add(&a.scale(&rat_i(me)));
    let big = intersect(&dd, &ee, y)?;
    let t1 = intersect(&dd, &a, y)? * rat_i(me);
    let t2 = intersect(&a, &ee, y)? * rat_i(md);
    let t3 = intersect(&a, &a, y)? * rat_i(md) * rat_i(me);
    Ok(big - t1 - t2 + t3)
}

/// `D . E` with `D` nef: sum over rays of `e_i` times the lattice length of
/// the `P(D)` edge at that ray.
fn linear_pair_with_nef(d: &ToricDivisor, e: &ToricDivisor, y: &ToricSurfaceData) -> Rat {
    let pd = polytope_of(d, y).expect("nef implies nonempty");
    let lens = edge_lengths_of(&pd, &y.rays);
    e.support
        .iter()
        .zip(lens.iter())
        .map(|(a, l)| a * l)
        .sum()
}

fn nef_shift(d: &ToricDivisor, a: &ToricDivisor, y: &ToricSurfaceData) -> Result<i64> {
    for m in 0..=64 {
        if is_nef(&d.add(&a.scale(&rat_i(m))), y) {
            return Ok(m);
        }
    }
    Err(Error::InvalidDivisor(
        "nef-difference decomposition failed: polarisation multiples never dominate".into(),
    ))
}

/// Pullback along a fan refinement: extend the support vector by evaluating
/// the support function of the (nef) divisor at each new ray. The polytope is
/// unchanged.
pub fn pullback(
    d: &ToricDivisor,
    y: &ToricSurfaceData,
    y_refined: &ToricSurfaceData,
) -> Result<ToricDivisor> {
    if !is_nef(d, y) {
        return Err(Error::InvalidDivisor("pullback is defined for nef divisors".into()));
    }
    for r in &y.rays {
        if !y_refined.rays.contains(r) {
            return Err(Error::InvalidSurface(
                "refined fan must contain every original ray".into(),
            ));
        }
    }
    let poly = polytope_of(d, y).expect("nef implies nonempty");
    let support = y_refined
        .rays
        .iter()
        .map(|&u| match y.rays.iter().position(|r| *r == u) {
            Some(i) => d.support[i].clone(),
            None => support_level(&poly, u),
        })
        .collect();
    let out = ToricDivisor { support };
    debug_assert_eq!(
        polytope_of(&out, y_refined).map(|p| p.vertices().to_vec()),
        Some(poly.vertices().to_vec())
    );
    Ok(out)
}

/// Options for the nef-divisor search.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub node_cap: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_cap: 50_000_000,
        }
    }
}

/// Internal: positions of the rays (1,0) and (0,1), used to pin down the
/// translation freedom of support vectors.
fn axis_ray_indices(y: &ToricSurfaceData) -> Result<(usize, usize)> {
    let i = y.rays.iter().position(|r| *r == (1, 0));
    let j = y.rays.iter().position(|r| *r == (0, 1));
    match (i, j) {
        (Some(i), Some(j)) => Ok((i, j)),
        _ => Err(Error::InvalidSurface(
            "capacity solver requires the fan to contain the rays (1,0) and (0,1)".into(),
        )),
    }
}

struct ToricSweep {
    /// Pareto set of (value, sections) over nef divisors, with witnesses.
    found: Vec<(Rat, BigInt, ToricDivisor)>,
    budget: Rat,
    target: BigInt,
}

impl ToricSweep {
    fn offer(&mut self, value: Rat, count: BigInt, witness: ToricDivisor) {
        if count >= self.target && value < self.budget {
            self.budget = value.clone();
        }
        let dominated = self
            .found
            .iter()
            .any(|(v, c, _)| *v <= value && *c >= count);
        if !dominated {
            self.found.push((value, count, witness));
        }
    }
}

/// Enumerate nef divisors with `D . A <= budget`, normalised so the polytope
/// touches both coordinate axes, and record their section counts.
///
/// The recursion assigns one support coefficient per free ray. At each node
/// the region cut out by the constraints so far (plus a bounding box implied
/// by the budget) pins the current ray's coefficient to the exact interval in
/// which its half-plane both meets the region and can still touch it; a
/// linear lower bound on the objective prunes the ascending loop.
///
/// Coefficient enumeration is denominator-scaled: `denom = 1` walks integral
/// divisors, `denom = 2` walks half-integer ones with floor-based counts.
#[allow(clippy::too_many_arguments)]
fn enumerate_supports(
    y: &ToricSurfaceData,
    free_rays: &[usize],
    idx: usize,
    support: &mut Vec<Rat>,
    lens: &[Rat],
    sweep: &mut ToricSweep,
    denom: i64,
    base_constraints: &[((i64, i64), Rat)],
    nodes: &mut u64,
    node_cap: u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes > node_cap {
        return Err(Error::ResourceLimit(format!(
            "divisor enumeration exceeded {} nodes (raise --max-nodes)",
            node_cap
        )));
    }
    if idx == free_rays.len() {
        let d = ToricDivisor {
            support: support.clone(),
        };
        if !is_nef(&d, y) {
            return Ok(());
        }
        let count = if denom == 1 {
            section_count(&d, y)
        } else {
            section_count(&d.floor(), y)
        };
        let value = dot_polarisation(&d, y);
        sweep.offer(value, count, d);
        return Ok(());
    }
    // Region cut out by the box, the normalised axis constraints, and the
    // rays assigned so far.
    let mut constraints: Vec<((i64, i64), Rat)> = base_constraints.to_vec();
    for &r in &free_rays[..idx] {
        constraints.push((y.rays[r], -support[r].clone()));
    }
    let region = match halfplane_region(&constraints) {
        Some(r) => r,
        None => return Ok(()),
    };
    let ray = free_rays[idx];
    let u = y.rays[ray];
    let udir = RatPoint::from_ints(u.0, u.1);
    let pairings: Vec<Rat> = region.vertices().iter().map(|m| m.dot(&udir)).collect();
    let min_r = pairings.iter().min().cloned().expect("nonempty");
    let max_r = pairings.iter().max().cloned().expect("nonempty");
    // The final polytope sits inside `region`: the half-plane level -a must
    // reach the region (-a <= max), and if -a < min it stays slack in every
    // subset, so the constraint could never touch and the divisor is not nef.
    // Together: -a in [min, max].
    let denom_rat = rat_i(denom);
    let lo = crate::rat::rat_ceil(&(-&max_r * &denom_rat))
        .to_i64()
        .ok_or_else(|| Error::ResourceLimit("support window overflow".into()))?;
    let hi = crate::rat::rat_floor(&(-&min_r * &denom_rat))
        .to_i64()
        .ok_or_else(|| Error::ResourceLimit("support window overflow".into()))?;
    // Objective lower bound: contributions of assigned rays, the cheapest
    // admissible level for each unassigned weighted ray, and the current one.
    let mut future_lb = Rat::zero();
    for &r in &free_rays[idx + 1..] {
        if lens[r].is_zero() {
            continue;
        }
        let rdir = RatPoint::from_ints(y.rays[r].0, y.rays[r].1);
        let mx = region
            .vertices()
            .iter()
            .map(|m| m.dot(&rdir))
            .max()
            .expect("nonempty");
        future_lb += -mx * &lens[r];
    }
    let mut assigned_lb = Rat::zero();
    for (i, l) in lens.iter().enumerate() {
        if l.is_zero() || free_rays[idx..].contains(&i) {
            continue;
        }
        assigned_lb += &support[i] * l;
    }
    for num in lo..=hi {
        support[ray] = Rat::new(BigInt::from(num), BigInt::from(denom));
        let lb = &assigned_lb + &support[ray] * &lens[ray] + &future_lb;
        if lb > sweep.budget {
            if !lens[ray].is_zero() {
                break;
            }
            continue;
        }
        enumerate_supports(
            y,
            free_rays,
            idx + 1,
            support,
            lens,
            sweep,
            denom,
            base_constraints,
            nodes,
            node_cap,
        )?;
    }
    support[ray] = Rat::zero();
    Ok(())
}

fn run_toric_sweep(
    y: &ToricSurfaceData,
    k_max: usize,
    denom: i64,
    opts: SolveOptions,
) -> Result<Vec<(Rat, BigInt, ToricDivisor)>> {
    let (ix, iy) = axis_ray_indices(y)?;
    let n = y.rays.len();
    let lens = y.edge_lengths();
    let target = BigInt::from(k_max as i64 + 1);
    // Seed: integral multiples of the polarisation (scaled integral first).
    let a = y.polarisation_divisor();
    let denom_lcm = a
        .support
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let step = Rat::from_integer(denom_lcm);
    let mut sweep = ToricSweep {
        found: vec![(Rat::zero(), BigInt::one(), ToricDivisor::zero(n))],
        budget: Rat::zero(),
        target: target.clone(),
    };
    let a_sq = dot_polarisation(&a, y);
    for t in 1..=(4 * (k_max as i64) + 4) {
        let d = a.scale(&(rat_i(t) * &step));
        let count = section_count(&d, y);
        let value = &a_sq * rat_i(t) * &step;
        let enough = count >= target;
        sweep.budget = value.clone();
        sweep.offer(value, count, d);
        if enough {
            break;
        }
    }
    // Bounding box: width and height of any polytope with `D . A <= budget`
    // are capped by the budget over the domain extents.
    let omega = y.omega_polygon();
    let (x_max, y_max) = (omega.x_range().1, omega.y_range().1);
    let w = (&sweep.budget / &y_max)
        .floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::ResourceLimit("toric search box too large".into()))?;
    let h = (&sweep.budget / &x_max)
        .floor()
        .to_integer()
        .to_i64()
        .ok_or_else(|| Error::ResourceLimit("toric search box too large".into()))?;
    let free_rays: Vec<usize> = (0..n).filter(|&i| i != ix && i != iy).collect();
    let mut nodes = 0u64;
    // Axis coefficient residues: zero for integral divisors, every residue
    // combination for the half-integer walk.
    let axis_offsets: &[(i64, i64)] = if denom == 1 {
        &[(0, 0)]
    } else {
        &[(0, 0), (1, 0), (0, 1), (1, 1)]
    };
    for &(sx, sy) in axis_offsets {
        let mut support = vec![Rat::zero(); n];
        support[ix] = Rat::new(BigInt::from(sx), BigInt::from(denom));
        support[iy] = Rat::new(BigInt::from(sy), BigInt::from(denom));
        let base_constraints: Vec<((i64, i64), Rat)> = vec![
            ((1, 0), -support[ix].clone()),
            ((0, 1), -support[iy].clone()),
            ((-1, 0), -rat_i(w) - rat_i(1)),
            ((0, -1), -rat_i(h) - rat_i(1)),
        ];
        enumerate_supports(
            y,
            &free_rays,
            0,
            &mut support,
            &lens,
            &mut sweep,
            denom,
            &base_constraints,
            &mut nodes,
            opts.node_cap,
        )?;
    }
    Ok(sweep.found)
}

/// Algebraic capacities over nef integral divisors, `k = 0..=k_max`.
pub fn alg_capacities_toric(
    y: &ToricSurfaceData,
    k_max: usize,
    opts: SolveOptions,
) -> Result<CapacitySequence> {
    let found = run_toric_sweep(y, k_max, 1, opts)?;
    let mut values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let need = BigInt::from(k as i64 + 1);
        let best = found
            .iter()
            .filter(|(_, c, _)| *c >= need)
            .map(|(v, _, _)| v)
            .min()
            .ok_or_else(|| Error::Internal("no feasible divisor found".into()))?;
        values.push(best.clone());
    }
    CapacitySequence::new(values, Source::AlgToric)
}

/// Single capacity with a witness divisor.
pub fn alg_capacity_toric(
    y: &ToricSurfaceData,
    k: usize,
    opts: SolveOptions,
) -> Result<(Rat, ToricDivisor)> {
    let found = run_toric_sweep(y, k, 1, opts)?;
    let need = BigInt::from(k as i64 + 1);
    found
        .into_iter()
        .filter(|(_, c, _)| *c >= need)
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(v, _, d)| (v, d))
        .ok_or_else(|| Error::Internal("no feasible divisor found".into()))
}

/// The rational-coefficient variant: half-integer supports with floor-based
/// section counts. Equals the integral optimum for `k > 0`.
pub fn alg_capacities_toric_halfint(
    y: &ToricSurfaceData,
    k_max: usize,
    opts: SolveOptions,
) -> Result<CapacitySequence> {
    let found = run_toric_sweep(y, k_max, 2, opts)?;
    let mut values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let need = BigInt::from(k as i64 + 1);
        let best = found
            .iter()
            .filter(|(_, c, _)| *c >= need)
            .map(|(v, _, _)| v)
            .min()
            .ok_or_else(|| Error::Internal("no feasible divisor found".into()))?;
        values.push(best.clone());
    }
    CapacitySequence::new(values, Source::AlgToric)
}

/// Self-intersection `A . A = 2 area(Omega)` of the polarisation.
pub fn polarisation_self_intersection(y: &ToricSurfaceData) -> Rat {
    area(&y.omega_polygon()) * rat_i(2)
}

/// Intersection lattice of a smooth complete fan, with conversions between
/// support vectors and class coordinates. The basis consists of the classes
/// of the prime invariant divisors away from one unimodular ray pair; the
/// effective generators are the classes of all prime invariant divisors, in
/// ray order.
pub struct FanLattice {
    pub lattice: crate::surfaces::SurfaceLattice,
    basis_rays: Vec<usize>,
    dropped: (usize, usize),
    rays: Vec<(i64, i64)>,
}

impl FanLattice {
    /// Build the lattice of a smooth fan. Errors on singular fans.
    pub fn new(y: &ToricSurfaceData) -> Result<FanLattice> {
        if !y.is_smooth() {
            return Err(Error::InvalidSurface(
                "the intersection lattice bridge needs a smooth fan".into(),
            ));
        }
        let n = y.rays.len();
        let (ix, iy) = axis_ray_indices(y)?;
        let basis_rays: Vec<usize> = (0..n).filter(|&i| i != ix && i != iy).collect();
        let rank = n - 2;
        if rank == 0 {
            return Err(Error::InvalidSurface(
                "fan has Picard rank zero; no lattice to build".into(),
            ));
        }
        // Self-intersections from the smooth-fan relation
        // u_{i-1} + u_{i+1} = b_i u_i with D_i^2 = -b_i.
        let self_int = |i: usize| -> Result<i64> {
            let prev = y.rays[(i + n - 1) % n];
            let next = y.rays[(i + 1) % n];
            let u = y.rays[i];
            let sx = prev.0 + next.0;
            let sy = prev.1 + next.1;
            let b = if u.0 != 0 { sx / u.0 } else { sy / u.1 };
            if (u.0 * b, u.1 * b) != (sx, sy) {
                return Err(Error::InvalidSurface("fan relation failed; fan not smooth".into()));
            }
            Ok(-b)
        };
        let prime_dot = |i: usize, j: usize| -> Result<i64> {
            if i == j {
                return self_int(i);
            }
            let adjacent = (i + 1) % n == j || (j + 1) % n == i;
            Ok(if adjacent { 1 } else { 0 })
        };
        // Gram matrix of the basis classes by the toric intersection rules.
        let mut gram = vec![vec![0i64; rank]; rank];
        for (bi, &i) in basis_rays.iter().enumerate() {
            for (bj, &j) in basis_rays.iter().enumerate() {
                gram[bi][bj] = prime_dot(i, j)?;
            }
        }
        // K = class of minus the sum of all prime divisors.
        let k_support = ToricDivisor {
            support: vec![-rat_i(1); n],
        };
        let k_coords = class_coords_raw(&y.rays, &basis_rays, (ix, iy), &k_support)?;
        let k_class: Vec<i64> = k_coords
            .iter()
            .map(|c| c.to_integer().to_i64().unwrap())
            .collect();
        // Effective generators: class of each prime divisor.
        let mut eff = Vec::with_capacity(n);
        for r in 0..n {
            let mut support = vec![Rat::zero(); n];
            support[r] = rat_i(1);
            let coords =
                class_coords_raw(&y.rays, &basis_rays, (ix, iy), &ToricDivisor { support })?;
            eff.push(
                coords
                    .iter()
                    .map(|c| c.to_integer().to_i64().unwrap())
                    .collect::<Vec<i64>>(),
            );
        }
        let labels: Vec<String> = basis_rays
            .iter()
            .map(|&i| format!("D({},{})", y.rays[i].0, y.rays[i].1))
            .collect();
        let lattice =
            crate::surfaces::SurfaceLattice::new(gram, k_class, 1, eff, None, Some(labels))?;
        Ok(FanLattice {
            lattice,
            basis_rays,
            dropped: (ix, iy),
            rays: y.rays.clone(),
        })
    }

    /// Class of a toric divisor in the bridge basis.
    pub fn class_of(&self, d: &ToricDivisor) -> Result<crate::surfaces::DivisorClass> {
        Ok(crate::surfaces::DivisorClass {
            coords: class_coords_raw(&self.rays, &self.basis_rays, self.dropped, d)?,
        })
    }

    /// A support-vector representative of a class: coefficients on the basis
    /// rays, zero on the dropped pair.
    pub fn divisor_of(&self, c: &crate::surfaces::DivisorClass) -> ToricDivisor {
        let mut support = vec![Rat::zero(); self.rays.len()];
        for (bi, &r) in self.basis_rays.iter().enumerate() {
            support[r] = c.coords[bi].clone();
        }
        ToricDivisor { support }
    }

    /// The ray index whose prime divisor gives the `i`th effective generator.
    pub fn generator_ray(&self, i: usize) -> usize {
        i
    }
}

/// Coordinates of the class of a support vector: translate by the character
/// `m` killing the two dropped coefficients, read off the rest.
fn class_coords_raw(
    rays: &[(i64, i64)],
    basis_rays: &[usize],
    dropped: (usize, usize),
    d: &ToricDivisor,
) -> Result<Vec<Rat>> {
    let (ix, iy) = dropped;
    let (up, uq) = (rays[ix], rays[iy]);
    let det = up.0 * uq.1 - up.1 * uq.0;
    if det.abs() != 1 {
        return Err(Error::Internal("dropped ray pair is not unimodular".into()));
    }
    // Solve <m, up> = -a_p, <m, uq> = -a_q.
    let (bp, bq) = (-&d.support[ix], -&d.support[iy]);
    let det_r = rat_i(det);
    let mx = (&bp * rat_i(uq.1) - &bq * rat_i(up.1)) / &det_r;
    let my = (rat_i(up.0) * &bq - rat_i(uq.0) * &bp) / &det_r;
    Ok(basis_rays
        .iter()
        .map(|&r| {
            let u = rays[r];
            &d.support[r] + &mx * rat_i(u.0) + &my * rat_i(u.1)
        })
        .collect())
}

/// Isoparametric closure on a smooth toric surface, tracking section counts:
/// each transform step must preserve the number of global sections of a
/// support-vector representative.
pub fn iso_closure_with_sections(
    y: &ToricSurfaceData,
    d: &ToricDivisor,
    max_iter: usize,
) -> Result<(crate::surfaces::IsoClosure, Vec<BigInt>)> {
    let bridge = FanLattice::new(y)?;
    let class = bridge.class_of(d)?;
    let closure = crate::surfaces::iso_transform_closure(&bridge.lattice, &class, max_iter)?;
    // Replay the steps on support vectors: subtracting the class of a prime
    // divisor subtracts its unit support vector.
    let mut counts = vec![section_count(d, y)];
    let mut support = d.clone();
    for step in &closure.steps {
        let delta = step.before.sub(&step.after);
        // delta is a nonnegative combination of effective generators; match
        // it ray by ray through the bridge.
        let mut rep = bridge.divisor_of(&delta);
        // divisor_of gives one representative; translate so the difference
        // acts on supports: any representative of the same class has the
        // same section count after subtraction.
        rep = normalise_class_rep(&bridge, &delta, rep)?;
        support = ToricDivisor {
            support: support
                .support
                .iter()
                .zip(&rep.support)
                .map(|(a, b)| a - b)
                .collect(),
        };
        counts.push(section_count(&support, y));
    }
    Ok((closure, counts))
}

fn normalise_class_rep(
    bridge: &FanLattice,
    class: &crate::surfaces::DivisorClass,
    rep: ToricDivisor,
) -> Result<ToricDivisor> {
    debug_assert_eq!(bridge.class_of(&rep)?, *class);
    Ok(rep)
}

/// `K . A`, using that `-K` is the sum of the prime invariant divisors, so
/// `-K . A` is the full lattice perimeter of the moment polygon.
pub fn canonical_dot_polarisation(y: &ToricSurfaceData) -> Rat {
    dot_polarisation(&y.canonical_divisor(), y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::parse_domain;
    use crate::geom::lattice_perimeter;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    fn ball() -> ConvexToricDomain {
        parse_domain(&[pt(0, 1), pt(1, 0)]).unwrap()
    }

    fn p2() -> ToricSurfaceData {
        ToricSurfaceData::normal_fan(&ball()).unwrap()
    }

    #[test]
    fn normal_fans() {
        let y = p2();
        assert_eq!(y.rays(), &[(1, 0), (0, 1), (-1, -1)]);
        assert_eq!(y.polarisation(), &[rat_i(0), rat_i(0), rat_i(1)]);

        let square = parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap();
        let ys = ToricSurfaceData::normal_fan(&square).unwrap();
        assert_eq!(ys.rays(), &[(1, 0), (0, 1), (-1, 0), (0, -1)]);

        let tri = parse_domain(&[pt(0, 1), pt(2, 0)]).unwrap();
        let yt = ToricSurfaceData::normal_fan(&tri).unwrap();
        assert_eq!(yt.rays(), &[(1, 0), (0, 1), (-1, -2)]);
    }

    #[test]
    fn polytope_round_trip() {
        let y = p2();
        let a = y.polarisation_divisor();
        let p = polytope_of(&a, &y).unwrap();
        assert_eq!(p.vertices(), ball().polygon().vertices());

        let zero = ToricDivisor::zero(3);
        let p0 = polytope_of(&zero, &y).unwrap();
        assert_eq!(p0.degeneracy(), crate::geom::Degeneracy::Point);
        assert_eq!(p0.vertices()[0], pt(0, 0));

        // Empty region: x >= 1, y >= 1, x + y <= 1.
        let bad = ToricDivisor::from_ints(&[-1, -1, 1]);
        assert!(polytope_of(&bad, &y).is_none());
    }

    #[test]
    fn nef_checks() {
        let y = p2();
        assert!(is_nef(&y.polarisation_divisor(), &y));
        assert!(is_nef(&ToricDivisor::zero(3), &y));

        // Blown-up fan, polarised by a corner-cut triangle (trapezoid with an
        // edge against each ray).
        let f1 = ToricSurfaceData::new(
            vec![(1, 0), (1, 1), (0, 1), (-1, -1)],
            vec![rat_i(0), -rat_i(1), rat_i(0), rat_i(2)],
        )
        .unwrap();
        // A slack hyperplane: the exceptional ray's half-plane misses the
        // triangle x + y <= 1.
        let d = ToricDivisor::from_ints(&[0, 1, 0, 1]);
        assert!(!is_nef(&d, &f1));
        let repaired = nef_repair(&d, &f1).unwrap();
        assert!(is_nef(&repaired, &f1));
        assert_eq!(repaired, ToricDivisor::from_ints(&[0, 0, 0, 1]));
        assert_eq!(section_count(&d, &f1), section_count(&repaired, &f1));
    }

    #[test]
    fn h0_examples() {
        let y = p2();
        // dH has the d-fold simplex: (d+1)(d+2)/2 sections.
        let d2 = ToricDivisor::from_ints(&[0, 0, 2]);
        assert_eq!(h0(&d2, &y).unwrap(), BigInt::from(6));
        assert_eq!(h0(&ToricDivisor::zero(3), &y).unwrap(), BigInt::from(1));
        let mut dq = ToricDivisor::zero(3);
        dq.support[2] = crate::rat::rat(3, 2);
        assert_eq!(h0(&dq, &y).unwrap(), BigInt::from(3));
    }

    #[test]
    fn intersections() {
        let y = p2();
        let h = ToricDivisor::from_ints(&[0, 0, 1]);
        assert_eq!(intersect(&h, &h, &y).unwrap(), rat_i(1));

        let square = parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap();
        let ys = ToricSurfaceData::normal_fan(&square).unwrap();
        let a = ys.polarisation_divisor();
        assert_eq!(intersect(&a, &a, &ys).unwrap(), rat_i(2));

        // Anticanonical pairing equals the lattice perimeter.
        let mk = p2().canonical_divisor().scale(&rat_i(-1));
        assert_eq!(
            intersect(&mk, &p2().polarisation_divisor(), &p2()).unwrap(),
            lattice_perimeter(ball().polygon())
        );
        assert_eq!(canonical_dot_polarisation(&p2()), -rat_i(3));
    }

    #[test]
    fn alg_capacities_on_p2() {
        let y = p2();
        let seq = alg_capacities_toric(&y, 6, SolveOptions::default()).unwrap();
        let want: Vec<Rat> = [0, 1, 1, 2, 2, 2, 3].iter().map(|v| rat_i(*v)).collect();
        assert_eq!(seq.values(), &want[..]);

        let (v, d) = alg_capacity_toric(&y, 3, SolveOptions::default()).unwrap();
        assert_eq!(v, rat_i(2));
        assert!(h0(&d, &y).unwrap() >= BigInt::from(4));
        let (v, _) = alg_capacity_toric(&y, 2, SolveOptions::default()).unwrap();
        assert_eq!(v, rat_i(1));
        let (v, _) = alg_capacity_toric(&y, 0, SolveOptions::default()).unwrap();
        assert_eq!(v, rat_i(0));
    }

    #[test]
    fn pullback_preserves_polytope() {
        let y = p2();
        let refined = y.refine(&[(1, 1)]).unwrap();
        let a = y.polarisation_divisor();
        let pa = pullback(&a, &y, &refined).unwrap();
        assert_eq!(
            polytope_of(&pa, &refined).unwrap().vertices(),
            ball().polygon().vertices()
        );

        let d2 = ToricDivisor::from_ints(&[0, 0, 2]);
        let ref2 = y.refine(&[(-1, 0)]).unwrap();
        let pd = pullback(&d2, &y, &ref2).unwrap();
        assert_eq!(pd.support[3], rat_i(2));

        let zero = ToricDivisor::zero(3);
        let pz = pullback(&zero, &y, &refined).unwrap();
        assert!(pz.support.iter().all(|a| a.is_zero()));
    }

    #[test]
    fn fan_lattice_bridge() {
        // P^2: rank 1, basis D(-1,-1) with self-intersection 1, K = -3H.
        let y = p2();
        let bridge = FanLattice::new(&y).unwrap();
        assert_eq!(bridge.lattice.rank(), 1);
        let a_class = bridge.class_of(&y.polarisation_divisor()).unwrap();
        assert_eq!(bridge.lattice.dot(&a_class, &a_class), rat_i(1));
        let k = bridge.lattice.canonical_class();
        assert_eq!(bridge.lattice.dot(&k, &k), rat_i(9));
        assert_eq!(bridge.lattice.dot(&k, &a_class), -rat_i(3));

        // Abstract and toric capacities agree through the bridge.
        let abs_seq = crate::surfaces::alg_capacities_abstract(
            &bridge.lattice,
            &a_class,
            10,
            crate::surfaces::DEFAULT_CLASS_NODE_CAP,
        )
        .unwrap();
        let tor_seq = alg_capacities_toric(&y, 10, SolveOptions::default()).unwrap();
        assert_eq!(abs_seq.values(), tor_seq.values());

        // A singular fan is rejected.
        let tri = parse_domain(&[pt(0, 1), pt(2, 0)]).unwrap();
        let yt = ToricSurfaceData::normal_fan(&tri).unwrap();
        assert!(FanLattice::new(&yt).is_err());
    }

    #[test]
    fn iso_sections_preserved_on_toric() {
        // Blown-up plane with the corner-cut polarisation; 2E is effective
        // and non-nef, and its closure drops to zero preserving sections.
        let f1 = ToricSurfaceData::new(
            vec![(1, 0), (1, 1), (0, 1), (-1, -1)],
            vec![rat_i(0), -rat_i(1), rat_i(0), rat_i(2)],
        )
        .unwrap();
        let mut support = vec![Rat::zero(); 4];
        support[1] = rat_i(2);
        let d = ToricDivisor { support };
        let (closure, counts) = iso_closure_with_sections(&f1, &d, 16).unwrap();
        assert!(closure.converged);
        assert!(counts.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn halfint_route_matches() {
        let y = p2();
        let zseq = alg_capacities_toric(&y, 6, SolveOptions::default()).unwrap();
        let qseq = alg_capacities_toric_halfint(&y, 6, SolveOptions::default()).unwrap();
        for k in 1..=6 {
            assert_eq!(zseq.get(k), qseq.get(k), "k = {}", k);
        }
    }
}
