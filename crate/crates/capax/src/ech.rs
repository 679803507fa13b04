//! ECH capacities of convex toric domains.
//!
//! The capacity `c_k` of the domain attached to `omega` is the minimum of the
//! omega-perimeter over convex lattice polygons with exactly `k + 1` lattice
//! points. The solver searches a normal form: since clockwise edges pointing
//! up-left (`dx <= 0, dy >= 0`) have zero omega-length, any polygon can be
//! replaced, at equal cost and no fewer lattice points, by one bounded by a
//! vertical edge up from a corner, a "paid" convex arc of strictly
//! clockwise-turning edges, and a horizontal edge back. Minimising over those
//! corner polygons with at least `k + 1` points gives `c_k` (perimeter is
//! monotone under inclusion, so relaxing "exactly" to "at least" changes
//! nothing), and witnesses with an exact point count are recovered by peeling
//! vertices afterwards.
//!
//! Completeness of the arc enumeration is forced by two inequalities: a
//! polygon of width `W` and height `H` costs at least `W * y_max(omega)` and
//! at least `H * x_max(omega)`, because every unit of rightward (downward)
//! travel pays at least the height (width) of the domain. An incumbent value
//! therefore bounds every candidate's bounding box, and the incumbents are
//! seeded from axis segments and integer hulls of dilates of the domain.

use crate::domains::ConvexToricDomain;
use crate::error::{Error, Result};
use crate::geom::{hull, lattice_points, omega_perimeter, RatPoint, RatPolygon};
use crate::rat::{rat_i, Rat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;

/// Default node budget for the lattice searches. The corner-form search is
/// exponential in the cost budget (convex polygons proliferate), so deep
/// sequences should come from the toric solver; this cap turns runaway
/// searches into a resource error instead of an open-ended hang.
pub const DEFAULT_NODE_CAP: u64 = 10_000_000;

/// Where a capacity sequence came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    EchCombinatorial,
    AlgToric,
    AlgAbstract,
    Oracle,
}

impl Source {
    pub fn label(&self) -> &'static str {
        match self {
            Source::EchCombinatorial => "ech_combinatorial",
            Source::AlgToric => "alg_toric",
            Source::AlgAbstract => "alg_abstract",
            Source::Oracle => "oracle",
        }
    }
}

/// Exact capacity values `c_0, c_1, ...` indexed from zero. Always monotone
/// with `c_0 = 0`.
#[derive(Clone, Debug)]
pub struct CapacitySequence {
    values: Vec<Rat>,
    pub source: Source,
}

impl CapacitySequence {
    pub fn new(values: Vec<Rat>, source: Source) -> Result<CapacitySequence> {
        if values.is_empty() || !values[0].is_zero() {
            return Err(Error::Internal(
                "capacity sequence must start with c_0 = 0".into(),
            ));
        }
        for w in values.windows(2) {
            if w[1] < w[0] {
                return Err(Error::Internal("capacity sequence must be monotone".into()));
            }
        }
        Ok(CapacitySequence { values, source })
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, k: usize) -> &Rat {
        &self.values[k]
    }

    /// `#{k : c_k <= x}`. `None` when the computed prefix does not extend past
    /// `x`, so the count would be a lower bound rather than the true value.
    pub fn cap_at(&self, x: &Rat) -> Option<usize> {
        if self.values.last().map_or(true, |last| last <= x) {
            return None;
        }
        Some(self.values.iter().take_while(|v| *v <= x).count())
    }

    /// Entrywise positive rational rescaling.
    pub fn scaled(&self, q: &Rat) -> CapacitySequence {
        CapacitySequence {
            values: self.values.iter().map(|v| v * q).collect(),
            source: self.source,
        }
    }
}

/// `k`, optimal value, and an optimal polygon with exactly `k + 1` points.
#[derive(Clone, Debug)]
pub struct OptimiserRecord {
    pub k: usize,
    pub value: Rat,
    pub witness: RatPolygon,
}

fn is_paid(dx: i64, dy: i64) -> bool {
    !(dx <= 0 && dy >= 0)
}

/// Clockwise angular order on paid directions, from just below "up" (90
/// degrees, exclusive) around to just above "left" (-180, exclusive). Groups
/// by quadrant, then compares within a group by exact cross product.
fn cw_cmp(a: (i64, i64), b: (i64, i64)) -> Ordering {
    fn group(d: (i64, i64)) -> u8 {
        match d {
            (dx, dy) if dx > 0 && dy > 0 => 0,
            (dx, 0) if dx > 0 => 1,
            (dx, dy) if dx > 0 && dy < 0 => 2,
            (0, dy) if dy < 0 => 3,
            _ => 4, // dx < 0, dy < 0
        }
    }
    let (ga, gb) = (group(a), group(b));
    if ga != gb {
        return ga.cmp(&gb);
    }
    let cross = (a.0 as i128) * (b.1 as i128) - (a.1 as i128) * (b.0 as i128);
    // Within one quadrant, b is strictly clockwise from a iff a x b < 0.
    cross.cmp(&0)
}

/// A closed candidate polygon in corner form.
#[derive(Clone, Debug)]
struct Candidate {
    cost: Rat,
    points: i64,
    /// Arc edges as (direction, length), clockwise order. Empty for seeds
    /// that only carry a (cost, points) bound.
    arc: Option<Vec<((i64, i64), i64)>>,
}

impl Candidate {
    /// Corner polygon: origin corner, vertical edge up, arc, horizontal back.
    fn polygon(&self) -> Option<RatPolygon> {
        let arc = self.arc.as_ref()?;
        let mut dy_total = 0i64;
        for ((_, ey), len) in arc {
            dy_total += ey * len;
        }
        let h = -dy_total;
        let mut pts = vec![RatPoint::from_ints(0, 0), RatPoint::from_ints(0, h)];
        let (mut x, mut y) = (0i64, h);
        for ((ex, ey), len) in arc {
            x += ex * len;
            y += ey * len;
            pts.push(RatPoint::from_ints(x, y));
        }
        hull(&pts).ok()
    }
}

struct SweepState {
    /// Incumbent for the largest requested k; arcs costing more are useless
    /// for every smaller k too.
    budget: Rat,
    k_max: usize,
    closed: Vec<Candidate>,
}

/// Solver with per-domain memoised support values.
pub struct EchSolver {
    omega: ConvexToricDomain,
    x_max: Rat,
    y_max: Rat,
    support: HashMap<(i64, i64), Rat>,
}

impl EchSolver {
    pub fn new(omega: &ConvexToricDomain) -> EchSolver {
        EchSolver {
            omega: omega.clone(),
            x_max: omega.x_max(),
            y_max: omega.y_max(),
            support: HashMap::new(),
        }
    }

    fn support(&mut self, d: (i64, i64)) -> Rat {
        if let Some(v) = self.support.get(&d) {
            return v.clone();
        }
        let v = crate::geom::omega_length(self.omega.polygon(), &RatPoint::from_ints(d.0, d.1))
            .expect("nonzero direction");
        self.support.insert(d, v.clone());
        v
    }

    /// Hull of the lattice points of `d * omega`, as a seed candidate.
    fn integer_hull(&self, d: i64) -> Option<(RatPolygon, i64, Rat)> {
        let scaled = self.omega.polygon().dilate(&rat_i(d));
        let pts = lattice_points(&scaled);
        if pts.is_empty() {
            return None;
        }
        let rp: Vec<RatPoint> = pts
            .iter()
            .map(|(x, y)| RatPoint::new(Rat::from_integer(x.clone()), Rat::from_integer(y.clone())))
            .collect();
        let h = hull(&rp).ok()?;
        let count = crate::geom::lattice_count(&h).to_i64()?;
        let cost = omega_perimeter(self.omega.polygon(), &h);
        Some((h, count, cost))
    }

    fn directions(&self, w_bound: i64, h_bound: i64) -> Vec<(i64, i64)> {
        let mut dirs = Vec::new();
        for dx in -w_bound..=w_bound {
            for dy in -h_bound..=h_bound {
                if (dx, dy) == (0, 0) || !is_paid(dx, dy) {
                    continue;
                }
                if dx.unsigned_abs().gcd(&dy.unsigned_abs()) != 1 {
                    continue;
                }
                dirs.push((dx, dy));
            }
        }
        dirs.sort_by(|a, b| cw_cmp(*a, *b));
        dirs
    }

    /// Lattice points of the closed corner polygon, by Pick's theorem (all
    /// walk vertices are integral).
    fn closed_points(shoelace: i128, blen: i64, dx: i64, dy: i64) -> i64 {
        // Clockwise walk: shoelace sum including the closing corner edges is
        // -2 * area; the closing edges contribute dx * dy.
        let twice_area = -(shoelace + (dx as i128) * (dy as i128));
        debug_assert!(twice_area >= 0);
        let boundary = blen + dx - dy;
        ((twice_area as i64 + boundary) >> 1) + 1
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &mut self,
        dirs: &[(i64, i64)],
        start: usize,
        x: i64,
        y: i64,
        cost: &Rat,
        blen: i64,
        shoelace: i128,
        arc: &mut Vec<((i64, i64), i64)>,
        w_bound: i64,
        h_bound: i64,
        state: &mut SweepState,
        nodes: &mut u64,
        node_cap: u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > node_cap {
            return Err(Error::ResourceLimit(format!(
                "lattice search exceeded {} nodes (raise --max-nodes)",
                node_cap
            )));
        }
        // The arc closes whenever net displacement is right-and-down.
        if x >= 0 && y <= 0 {
            let pts = Self::closed_points(shoelace, blen, x, y);
            let dominated = state
                .closed
                .iter()
                .any(|c| c.points >= pts && c.cost <= *cost);
            if !dominated {
                if pts as usize >= state.k_max + 1 && *cost < state.budget {
                    state.budget = cost.clone();
                }
                state.closed.push(Candidate {
                    cost: cost.clone(),
                    points: pts,
                    arc: Some(arc.clone()),
                });
            }
        }
        for i in start..dirs.len() {
            let d = dirs[i];
            let step = self.support(d);
            let mut len = 1i64;
            loop {
                let nx = x + d.0 * len;
                let ny = y + d.1 * len;
                if nx.abs() > w_bound || ny.abs() > h_bound {
                    break;
                }
                let ncost = cost + &step * rat_i(len);
                // Cost to close from (nx, ny): pending upward drift must come
                // down at x_max per unit, pending leftward drift must come
                // back right at y_max per unit.
                let mut lb = ncost.clone();
                if ny > 0 {
                    lb += rat_i(ny) * &self.x_max;
                }
                if nx < 0 {
                    lb += rat_i(-nx) * &self.y_max;
                }
                if lb > state.budget {
                    break;
                }
                let nshoe = shoelace + (x as i128) * (ny as i128) - (y as i128) * (nx as i128);
                arc.push((d, len));
                self.dfs(
                    dirs,
                    i + 1,
                    nx,
                    ny,
                    &ncost,
                    blen + len,
                    nshoe,
                    arc,
                    w_bound,
                    h_bound,
                    state,
                    nodes,
                    node_cap,
                )?;
                arc.pop();
                len += 1;
            }
        }
        Ok(())
    }

    fn sweep(&mut self, k_max: usize, node_cap: u64) -> Result<Vec<Candidate>> {
        let mut closed: Vec<Candidate> = Vec::new();
        let k = k_max as i64;
        let seg_h = Candidate {
            cost: rat_i(k) * &self.y_max,
            points: k + 1,
            arc: Some(if k > 0 { vec![((1, 0), k)] } else { vec![] }),
        };
        let seg_v = Candidate {
            cost: rat_i(k) * &self.x_max,
            points: k + 1,
            arc: Some(if k > 0 { vec![((0, -1), k)] } else { vec![] }),
        };
        let mut budget = seg_h.cost.clone().min(seg_v.cost.clone());
        closed.push(seg_h);
        closed.push(seg_v);
        for d in 1..=(2 * k_max as i64 + 2) {
            if let Some((_, count, cost)) = self.integer_hull(d) {
                let done = count as usize >= k_max + 1;
                if done && cost < budget {
                    budget = cost.clone();
                }
                closed.push(Candidate {
                    cost,
                    points: count,
                    arc: None,
                });
                if done {
                    break;
                }
            }
        }
        let w_bound = (&budget / &self.y_max)
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::ResourceLimit("search box too large".into()))?;
        let h_bound = (&budget / &self.x_max)
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::ResourceLimit("search box too large".into()))?;
        let dirs = self.directions(w_bound, h_bound);
        let mut state = SweepState {
            budget,
            k_max,
            closed,
        };
        let mut nodes = 0u64;
        let mut arc = Vec::new();
        self.dfs(
            &dirs,
            0,
            0,
            0,
            &Rat::zero(),
            0,
            0,
            &mut arc,
            w_bound,
            h_bound,
            &mut state,
            &mut nodes,
            node_cap,
        )?;
        Ok(state.closed)
    }

    /// Capacities for `k = 0..=k_max`, sharing one search pass: every closed
    /// polygon with `n` points bounds `c_k` for all `k <= n - 1`.
    pub fn capacities(&mut self, k_max: usize, node_cap: u64) -> Result<CapacitySequence> {
        let closed = self.sweep(k_max, node_cap)?;
        let mut values = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let best = closed
                .iter()
                .filter(|c| c.points as usize >= k + 1)
                .map(|c| &c.cost)
                .min()
                .ok_or_else(|| Error::Internal("no feasible polygon found".into()))?;
            values.push(best.clone());
        }
        CapacitySequence::new(values, Source::EchCombinatorial)
    }

    /// Capacity plus an optimal witness with exactly `k + 1` lattice points.
    pub fn capacity(&mut self, k: usize, node_cap: u64) -> Result<OptimiserRecord> {
        let closed = self.sweep(k, node_cap)?;
        let value = closed
            .iter()
            .filter(|c| c.points as usize >= k + 1)
            .map(|c| &c.cost)
            .min()
            .cloned()
            .ok_or_else(|| Error::Internal("no feasible polygon found".into()))?;
        let mut witnesses: Vec<RatPolygon> = Vec::new();
        for c in &closed {
            if c.points as usize >= k + 1 && c.cost == value {
                if let Some(poly) = c.polygon() {
                    witnesses.push(shrink_to_count(poly, k + 1)?);
                }
            }
        }
        if witnesses.is_empty() {
            // The optimum came from an integer-hull seed with no arc stored.
            for d in 1..=(2 * k as i64 + 2) {
                if let Some((poly, count, cost)) = self.integer_hull(d) {
                    if count as usize >= k + 1 && cost == value {
                        witnesses.push(shrink_to_count(poly, k + 1)?);
                        break;
                    }
                }
            }
        }
        let witness = witnesses
            .into_iter()
            .min_by(lex_cmp_polygons)
            .ok_or_else(|| Error::Internal("witness reconstruction failed".into()))?;
        debug_assert_eq!(crate::geom::lattice_count(&witness), BigInt::from(k + 1));
        debug_assert_eq!(omega_perimeter(self.omega.polygon(), &witness), value);
        Ok(OptimiserRecord { k, value, witness })
    }

    /// Cap function `#{k : c_k <= x}` by the dual search: the largest lattice
    /// point count over corner polygons of cost at most `x`.
    pub fn cap_function(&mut self, x: &Rat, node_cap: u64) -> Result<BigInt> {
        if x.is_negative() {
            return Err(Error::InvalidArgument("cap function needs x >= 0".into()));
        }
        let w_bound = (x / &self.y_max)
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::ResourceLimit("cap-function box too large".into()))?;
        let h_bound = (x / &self.x_max)
            .floor()
            .to_integer()
            .to_i64()
            .ok_or_else(|| Error::ResourceLimit("cap-function box too large".into()))?;
        let dirs = self.directions(w_bound, h_bound);
        let mut best = 1i64;
        let mut nodes = 0u64;
        self.cap_dfs(
            &dirs,
            0,
            0,
            0,
            &Rat::zero(),
            0,
            0,
            x,
            w_bound,
            h_bound,
            &mut best,
            &mut nodes,
            node_cap,
        )?;
        Ok(BigInt::from(best))
    }

    #[allow(clippy::too_many_arguments)]
    fn cap_dfs(
        &mut self,
        dirs: &[(i64, i64)],
        start: usize,
        x: i64,
        y: i64,
        cost: &Rat,
        blen: i64,
        shoelace: i128,
        budget: &Rat,
        w_bound: i64,
        h_bound: i64,
        best: &mut i64,
        nodes: &mut u64,
        node_cap: u64,
    ) -> Result<()> {
        *nodes += 1;
        if *nodes > node_cap {
            return Err(Error::ResourceLimit(format!(
                "cap-function search exceeded {} nodes (raise --max-nodes)",
                node_cap
            )));
        }
        if x >= 0 && y <= 0 {
            let pts = Self::closed_points(shoelace, blen, x, y);
            if pts > *best {
                *best = pts;
            }
        }
        for i in start..dirs.len() {
            let d = dirs[i];
            let step = self.support(d);
            let mut len = 1i64;
            loop {
                let nx = x + d.0 * len;
                let ny = y + d.1 * len;
                if nx.abs() > w_bound || ny.abs() > h_bound {
                    break;
                }
                let ncost = cost + &step * rat_i(len);
                let mut lb = ncost.clone();
                if ny > 0 {
                    lb += rat_i(ny) * &self.x_max;
                }
                if nx < 0 {
                    lb += rat_i(-nx) * &self.y_max;
                }
                if lb > *budget {
                    break;
                }
                let nshoe = shoelace + (x as i128) * (ny as i128) - (y as i128) * (nx as i128);
                self.cap_dfs(
                    dirs,
                    i + 1,
                    nx,
                    ny,
                    &ncost,
                    blen + len,
                    nshoe,
                    budget,
                    w_bound,
                    h_bound,
                    best,
                    nodes,
                    node_cap,
                )?;
                len += 1;
            }
        }
        Ok(())
    }
}

fn lex_cmp_polygons(a: &RatPolygon, b: &RatPolygon) -> Ordering {
    for (p, q) in a.vertices().iter().zip(b.vertices().iter()) {
        let c = p.x.cmp(&q.x).then_with(|| p.y.cmp(&q.y));
        if c != Ordering::Equal {
            return c;
        }
    }
    a.vertices().len().cmp(&b.vertices().len())
}

/// Remove hull vertices one at a time (rebuilding the hull of the remaining
/// lattice points) until exactly `target` points remain. Perimeter is
/// monotone under inclusion, so an optimal polygon stays optimal throughout.
fn shrink_to_count(mut poly: RatPolygon, target: usize) -> Result<RatPolygon> {
    loop {
        let pts = lattice_points(&poly);
        match pts.len().cmp(&target) {
            Ordering::Less => return Err(Error::Internal("shrink target overshot".into())),
            Ordering::Equal => return Ok(poly),
            Ordering::Greater => {}
        }
        let victim = poly
            .vertices()
            .iter()
            .max_by(|p, q| p.x.cmp(&q.x).then_with(|| p.y.cmp(&q.y)))
            .expect("nonempty")
            .clone();
        let remaining: Vec<RatPoint> = pts
            .iter()
            .map(|(x, y)| RatPoint::new(Rat::from_integer(x.clone()), Rat::from_integer(y.clone())))
            .filter(|p| *p != victim)
            .collect();
        if remaining.is_empty() {
            return Err(Error::Internal("shrank polygon to nothing".into()));
        }
        poly = hull(&remaining)?;
    }
}

/// Capacity sequence for `k = 0..=k_max`.
pub fn ech_capacities(
    omega: &ConvexToricDomain,
    k_max: usize,
    node_cap: u64,
) -> Result<CapacitySequence> {
    EchSolver::new(omega).capacities(k_max, node_cap)
}

/// Single capacity with witness.
pub fn ech_capacity(omega: &ConvexToricDomain, k: usize, node_cap: u64) -> Result<OptimiserRecord> {
    EchSolver::new(omega).capacity(k, node_cap)
}

/// Cap function value at `x`.
pub fn cap_function(omega: &ConvexToricDomain, x: &Rat, node_cap: u64) -> Result<BigInt> {
    EchSolver::new(omega).cap_function(x, node_cap)
}

/// Exhaustive oracle: minimum omega-perimeter over hulls of point sets in the
/// closed box `[0, box_size]^2` with exactly `k + 1` lattice points. Written
/// against the raw definition: vertex-chain enumeration of all convex
/// positions plus a column-scan point count, independent of the corner-form
/// solver and of Pick's theorem.
pub fn brute_oracle(
    omega: &ConvexToricDomain,
    k: usize,
    box_size: i64,
    node_cap: u64,
) -> Result<Rat> {
    let best = brute_oracle_sweep(omega, k, box_size, node_cap)?;
    best[k].clone().ok_or_else(|| {
        Error::ResourceLimit(format!("no polygon with {} points fits in the box", k + 1))
    })
}

/// Oracle minima for every `k <= k_max` in one enumeration pass; `None` where
/// the box admits no polygon with `k + 1` points.
pub fn brute_oracle_sweep(
    omega: &ConvexToricDomain,
    k_max: usize,
    box_size: i64,
    node_cap: u64,
) -> Result<Vec<Option<Rat>>> {
    if !(0..=8).contains(&box_size) {
        return Err(Error::ResourceLimit(
            "oracle box must be between 0 and 8".into(),
        ));
    }
    let mut grid: Vec<(i64, i64)> = Vec::new();
    for x in 0..=box_size {
        for y in 0..=box_size {
            grid.push((x, y));
        }
    }
    let mut best: Vec<Option<Rat>> = vec![None; k_max + 1];
    let mut support: HashMap<(i64, i64), Rat> = HashMap::new();
    let omega_poly = omega.polygon().clone();
    let mut dir_cost = move |d: (i64, i64)| -> Rat {
        let g = d.0.unsigned_abs().gcd(&d.1.unsigned_abs()) as i64;
        let prim = (d.0 / g, d.1 / g);
        let sup = support
            .entry(prim)
            .or_insert_with(|| {
                crate::geom::omega_length(&omega_poly, &RatPoint::from_ints(prim.0, prim.1))
                    .expect("nonzero")
            })
            .clone();
        sup * rat_i(g)
    };
    // Points.
    record_into(1, Rat::zero(), &mut best);
    // Segments: both clockwise orientations are edges.
    for i in 0..grid.len() {
        for j in (i + 1)..grid.len() {
            let (p, q) = (grid[i], grid[j]);
            let d = (q.0 - p.0, q.1 - p.1);
            let g = d.0.unsigned_abs().gcd(&d.1.unsigned_abs()) as i64;
            let cost = dir_cost(d) + dir_cost((-d.0, -d.1));
            record_into(g + 1, cost, &mut best);
        }
    }
    // Full polygons: counterclockwise vertex chains starting at the
    // lexicographically smallest vertex, later vertices in increasing angular
    // order around it.
    let mut nodes = 0u64;
    for (s, &p0) in grid.iter().enumerate() {
        let mut cands: Vec<(i64, i64)> = grid[s + 1..].to_vec();
        cands.sort_by(|a, b| {
            let va = (a.0 - p0.0, a.1 - p0.1);
            let vb = (b.0 - p0.0, b.1 - p0.1);
            let cross = (va.0 as i128) * (vb.1 as i128) - (va.1 as i128) * (vb.0 as i128);
            cross
                .cmp(&0)
                .reverse()
                .then_with(|| (va.0 * va.0 + va.1 * va.1).cmp(&(vb.0 * vb.0 + vb.1 * vb.1)))
        });
        let mut chain: Vec<(i64, i64)> = vec![p0];
        chain_dfs(
            p0,
            &cands,
            0,
            &mut chain,
            &mut best,
            &mut dir_cost,
            &mut nodes,
            node_cap,
        )?;
    }
    Ok(best)
}

fn turn(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> i128 {
    ((b.0 - a.0) as i128) * ((c.1 - a.1) as i128) - ((b.1 - a.1) as i128) * ((c.0 - a.0) as i128)
}

#[allow(clippy::too_many_arguments)]
fn chain_dfs(
    p0: (i64, i64),
    cands: &[(i64, i64)],
    start: usize,
    chain: &mut Vec<(i64, i64)>,
    best: &mut Vec<Option<Rat>>,
    dir_cost: &mut impl FnMut((i64, i64)) -> Rat,
    nodes: &mut u64,
    node_cap: u64,
) -> Result<()> {
    *nodes += 1;
    if *nodes > node_cap {
        return Err(Error::ResourceLimit(format!(
            "oracle enumeration exceeded {} nodes",
            node_cap
        )));
    }
    let m = chain.len();
    if m >= 3 && turn(chain[m - 2], chain[m - 1], p0) > 0 && turn(chain[m - 1], p0, chain[1]) > 0 {
        let pts = count_lattice_int(chain);
        let mut cost = Rat::zero();
        for i in 0..m {
            let (a, b) = (chain[i], chain[(i + 1) % m]);
            // The chain is counterclockwise; clockwise edges run b -> a.
            cost += dir_cost((a.0 - b.0, a.1 - b.1));
        }
        record_into(pts, cost, best);
    }
    for i in start..cands.len() {
        let c = cands[i];
        if m >= 2 && turn(chain[m - 2], chain[m - 1], c) <= 0 {
            continue;
        }
        chain.push(c);
        chain_dfs(p0, cands, i + 1, chain, best, dir_cost, nodes, node_cap)?;
        chain.pop();
    }
    Ok(())
}

fn record_into(pts: i64, cost: Rat, best: &mut [Option<Rat>]) {
    let k = pts - 1;
    if k >= 0 && (k as usize) < best.len() {
        let slot = &mut best[k as usize];
        if slot.as_ref().map_or(true, |b| cost < *b) {
            *slot = Some(cost);
        }
    }
}

/// Integer-only column-scan lattice count for a counterclockwise convex
/// vertex chain with small coordinates.
fn count_lattice_int(verts: &[(i64, i64)]) -> i64 {
    let xmin = verts.iter().map(|v| v.0).min().unwrap();
    let xmax = verts.iter().map(|v| v.0).max().unwrap();
    let n = verts.len();
    let mut count = 0i64;
    for x in xmin..=xmax {
        // Track extremal boundary heights at this column as exact fractions
        // num/den with den > 0.
        let mut lo: Option<(i128, i128)> = None;
        let mut hi: Option<(i128, i128)> = None;
        let mut note = |num: i128, den: i128| {
            debug_assert!(den > 0);
            match &mut lo {
                Some((ln, ld)) => {
                    if num * *ld < *ln * den {
                        lo = Some((num, den));
                    }
                }
                None => lo = Some((num, den)),
            }
            match &mut hi {
                Some((hn, hd)) => {
                    if num * *hd > *hn * den {
                        hi = Some((num, den));
                    }
                }
                None => hi = Some((num, den)),
            }
        };
        for i in 0..n {
            let (a, b) = (verts[i], verts[(i + 1) % n]);
            if a.0 == b.0 {
                if a.0 == x {
                    note(a.1 as i128, 1);
                    note(b.1 as i128, 1);
                }
                continue;
            }
            let (xl, xr) = if a.0 < b.0 { (a.0, b.0) } else { (b.0, a.0) };
            if x < xl || x > xr {
                continue;
            }
            let mut num =
                (a.1 as i128) * ((b.0 - a.0) as i128) + ((x - a.0) as i128) * ((b.1 - a.1) as i128);
            let mut den = (b.0 - a.0) as i128;
            if den < 0 {
                num = -num;
                den = -den;
            }
            note(num, den);
        }
        if let (Some((ln, ld)), Some((hn, hd))) = (lo, hi) {
            let lo_int = Integer::div_ceil(&ln, &ld);
            let hi_int = Integer::div_floor(&hn, &hd);
            if hi_int >= lo_int {
                count += (hi_int - lo_int + 1) as i64;
            }
        }
    }
    count
}

/// Decomposition of a witness as `residual + d * omega`.
#[derive(Clone, Debug)]
pub struct ShapeReport {
    pub k: usize,
    pub value: Rat,
    pub dilation: i64,
    pub residual: RatPolygon,
}

/// For each `k` in the range, expresses the solver's witness as a residual
/// lattice polygon plus `d * omega` with `d` maximal, found by subtracting
/// omega's edge multiset from the witness's.
pub fn optimiser_shape_report(
    omega: &ConvexToricDomain,
    k_range: std::ops::RangeInclusive<usize>,
    node_cap: u64,
) -> Result<Vec<ShapeReport>> {
    if !omega.is_lattice() {
        return Err(Error::InvalidDomain(
            "shape reports need a lattice domain".into(),
        ));
    }
    let mut solver = EchSolver::new(omega);
    let mut out = Vec::new();
    for k in k_range {
        let rec = solver.capacity(k, node_cap)?;
        let (d, residual) = subtract_dilates(omega, &rec.witness)?;
        out.push(ShapeReport {
            k,
            value: rec.value,
            dilation: d,
            residual,
        });
    }
    Ok(out)
}

fn edge_multiset(p: &RatPolygon) -> HashMap<(i64, i64), Rat> {
    let mut out: HashMap<(i64, i64), Rat> = HashMap::new();
    for e in p.edges_ccw() {
        if let Some(((px, py), len)) = crate::geom::primitive_direction(&e) {
            let key = (px.to_i64().unwrap(), py.to_i64().unwrap());
            *out.entry(key).or_insert_with(Rat::zero) += len;
        }
    }
    out
}

fn subtract_dilates(omega: &ConvexToricDomain, witness: &RatPolygon) -> Result<(i64, RatPolygon)> {
    let omega_edges = edge_multiset(omega.polygon());
    let witness_edges = edge_multiset(witness);
    let mut d_max = i64::MAX;
    for (dir, olen) in &omega_edges {
        let wlen = witness_edges.get(dir).cloned().unwrap_or_else(Rat::zero);
        let q = (wlen / olen).floor().to_integer().to_i64().unwrap_or(0);
        d_max = d_max.min(q.max(0));
    }
    if d_max == i64::MAX {
        d_max = 0;
    }
    let mut leftover: Vec<((i64, i64), Rat)> = Vec::new();
    for (dir, wlen) in &witness_edges {
        let mut rem = wlen.clone();
        if let Some(olen) = omega_edges.get(dir) {
            rem -= olen * rat_i(d_max);
        }
        if rem.is_positive() {
            leftover.push((*dir, rem));
        }
    }
    leftover.sort_by(|a, b| crate::geom::ccw_dir_cmp(a.0, b.0));
    let mut pts = vec![RatPoint::from_ints(0, 0)];
    let (mut x, mut y) = (Rat::zero(), Rat::zero());
    for ((dx, dy), len) in &leftover {
        x += rat_i(*dx) * len;
        y += rat_i(*dy) * len;
        pts.push(RatPoint::new(x.clone(), y.clone()));
    }
    if !(x.is_zero() && y.is_zero()) {
        return Err(Error::Internal(
            "residual edge multiset does not close".into(),
        ));
    }
    let residual = hull(&pts)?;
    Ok((d_max, residual))
}

/// True when every vertex of `inner` lies in `outer`.
pub fn domain_contained(inner: &ConvexToricDomain, outer: &ConvexToricDomain) -> bool {
    inner
        .polygon()
        .vertices()
        .iter()
        .all(|p| outer.polygon().contains(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::parse_domain;

    fn pt(x: i64, y: i64) -> RatPoint {
        RatPoint::from_ints(x, y)
    }

    fn ball() -> ConvexToricDomain {
        parse_domain(&[pt(0, 1), pt(1, 0)]).unwrap()
    }

    fn square() -> ConvexToricDomain {
        parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap()
    }

    #[test]
    fn ball_small_capacities() {
        let seq = ech_capacities(&ball(), 6, DEFAULT_NODE_CAP).unwrap();
        let want: Vec<Rat> = [0, 1, 1, 2, 2, 2, 3].iter().map(|v| rat_i(*v)).collect();
        assert_eq!(seq.values(), &want[..]);
    }

    #[test]
    fn ball_witnesses() {
        let rec = ech_capacity(&ball(), 0, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rec.value, rat_i(0));
        assert_eq!(rec.witness.degeneracy(), crate::geom::Degeneracy::Point);

        let rec = ech_capacity(&ball(), 1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rec.value, rat_i(1));
        assert_eq!(crate::geom::lattice_count(&rec.witness), BigInt::from(2));

        let rec = ech_capacity(&ball(), 3, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(rec.value, rat_i(2));
        assert_eq!(crate::geom::lattice_count(&rec.witness), BigInt::from(4));
    }

    #[test]
    fn square_small_capacities() {
        // Matches the closed form min{m + n : (m+1)(n+1) >= k+1} and the
        // brute oracle (box 4).
        let seq = ech_capacities(&square(), 8, DEFAULT_NODE_CAP).unwrap();
        let want: Vec<Rat> = [0, 1, 2, 2, 3, 3, 4, 4, 4].iter().map(|v| rat_i(*v)).collect();
        assert_eq!(seq.values(), &want[..]);
    }

    #[test]
    fn scaled_ball_capacities() {
        let two_ball = parse_domain(&[pt(0, 2), pt(2, 0)]).unwrap();
        let seq = ech_capacities(&two_ball, 3, DEFAULT_NODE_CAP).unwrap();
        let want: Vec<Rat> = [0, 2, 2, 4].iter().map(|v| rat_i(*v)).collect();
        assert_eq!(seq.values(), &want[..]);
    }

    #[test]
    fn oracle_matches_solver_on_ball() {
        let omega = ball();
        let oracle = brute_oracle_sweep(&omega, 6, 4, DEFAULT_NODE_CAP).unwrap();
        let seq = ech_capacities(&omega, 6, DEFAULT_NODE_CAP).unwrap();
        for k in 0..=6 {
            assert_eq!(oracle[k].as_ref().unwrap(), seq.get(k), "k = {}", k);
        }
    }

    #[test]
    fn oracle_k0_is_zero() {
        assert_eq!(brute_oracle(&square(), 0, 3, DEFAULT_NODE_CAP).unwrap(), rat_i(0));
    }

    #[test]
    fn cap_function_examples() {
        let omega = ball();
        let caps: Vec<BigInt> = (0..=2)
            .map(|x| cap_function(&omega, &rat_i(x), DEFAULT_NODE_CAP).unwrap())
            .collect();
        assert_eq!(caps, vec![BigInt::from(1), BigInt::from(3), BigInt::from(6)]);
    }

    #[test]
    fn shape_reports() {
        let omega = ball();
        let reports = optimiser_shape_report(&omega, 1..=1, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(reports[0].dilation, 0);
        let reports = optimiser_shape_report(&omega, 20..=20, DEFAULT_NODE_CAP).unwrap();
        assert!(reports[0].dilation >= 1);
    }

    #[test]
    fn monotone_in_domain() {
        let inner = ball();
        let outer = square();
        assert!(domain_contained(&inner, &outer));
        let si = ech_capacities(&inner, 8, DEFAULT_NODE_CAP).unwrap();
        let so = ech_capacities(&outer, 8, DEFAULT_NODE_CAP).unwrap();
        for k in 0..=8 {
            assert!(si.get(k) <= so.get(k));
        }
    }
}
