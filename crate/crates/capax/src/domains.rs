//! Convex toric domains and weight sequences.
//!
//! A convex toric domain is a region in the first quadrant bounded by the two
//! axes and the graph of a concave non-increasing function; here that graph is
//! a rational polygonal chain. Weight sequences decompose a domain into
//! triangles by repeatedly peeling the largest standard simplex, normalising
//! the two leftover pieces back onto the axes by unimodular affine maps.

use crate::error::{Error, Result};
use crate::geom::{hull, RatPoint, RatPolygon};
use crate::rat::{rat_gcd_all, rat_i, Rat};
use num_traits::{Signed, Zero};

pub const DEFAULT_WEIGHT_DEPTH: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// All vertices in `Z^2`.
    Lattice,
    /// All vertices in `Q^2`.
    Rational,
    /// Rational slopes only. Unreachable for inputs built from exact
    /// rationals; kept so the classification is exhaustive.
    RationalSloped,
}

/// A validated convex toric domain.
#[derive(Clone, Debug)]
pub struct ConvexToricDomain {
    polygon: RatPolygon,
    chain: Vec<RatPoint>,
    classification: Classification,
    scale: Option<(Rat, RatPolygon)>,
}

impl ConvexToricDomain {
    /// Full moment polygon, including the origin and the axis edges.
    pub fn polygon(&self) -> &RatPolygon {
        &self.polygon
    }

    /// Non-axis boundary chain from the y-axis vertex to the x-axis vertex.
    pub fn chain(&self) -> &[RatPoint] {
        &self.chain
    }

    pub fn classification(&self) -> Classification {
        self.classification
    }

    /// `(q, base)` with the polygon equal to `q * base` for a primitive
    /// lattice polygon `base`.
    pub fn scale(&self) -> Option<&(Rat, RatPolygon)> {
        self.scale.as_ref()
    }

    pub fn is_lattice(&self) -> bool {
        self.classification == Classification::Lattice
    }

    pub fn x_max(&self) -> Rat {
        self.polygon.x_range().1
    }

    pub fn y_max(&self) -> Rat {
        self.polygon.y_range().1
    }

    pub fn area(&self) -> Rat {
        crate::geom::area(&self.polygon)
    }

    pub fn dilate(&self, q: &Rat) -> ConvexToricDomain {
        let chain: Vec<RatPoint> = self.chain.iter().map(|p| p.scale(q)).collect();
        parse_domain(&chain).expect("dilation preserves validity")
    }
}

/// Validate a non-axis boundary chain and build the domain.
///
/// The input lists the chain from the y-axis vertex to the x-axis vertex;
/// collinear intermediate points are merged. A horizontal first edge and a
/// vertical last edge are allowed, matching the graph convention for a
/// concave non-increasing boundary function.
pub fn parse_domain(points: &[RatPoint]) -> Result<ConvexToricDomain> {
    if points.len() < 2 {
        return Err(Error::InvalidDomain(
            "need at least two boundary points".into(),
        ));
    }
    for p in points {
        if p.x.is_negative() || p.y.is_negative() {
            return Err(Error::InvalidDomain(format!(
                "point ({}, {}) is not in the first quadrant",
                p.x, p.y
            )));
        }
    }
    if !points[0].x.is_zero() {
        return Err(Error::InvalidDomain(
            "chain must start at a vertex on the y-axis".into(),
        ));
    }
    if !points[points.len() - 1].y.is_zero() {
        return Err(Error::InvalidDomain(
            "chain must end at a vertex on the x-axis".into(),
        ));
    }
    if points[0].y.is_zero() || points[points.len() - 1].x.is_zero() {
        return Err(Error::InvalidDomain(
            "domain must be two-dimensional".into(),
        ));
    }
    // Monotonicity of the raw chain: x non-decreasing, y non-increasing.
    for w in points.windows(2) {
        let dx = &w[1].x - &w[0].x;
        let dy = &w[1].y - &w[0].y;
        if dx.is_negative() || dy.is_positive() || (dx.is_zero() && dy.is_zero()) {
            return Err(Error::InvalidDomain(format!(
                "vertex chain not monotone at ({}, {}) -> ({}, {})",
                w[0].x, w[0].y, w[1].x, w[1].y
            )));
        }
    }
    // Merge collinear runs, then demand strictly decreasing slopes (dents are
    // a concavity violation, not a canonicalisation matter).
    let mut chain: Vec<RatPoint> = vec![points[0].clone()];
    for p in &points[1..] {
        while chain.len() >= 2 {
            let a = &chain[chain.len() - 2];
            let b = &chain[chain.len() - 1];
            let turn = b.sub(a).cross(&p.sub(b));
            if turn.is_zero() {
                chain.pop();
            } else if turn.is_positive() {
                return Err(Error::InvalidDomain(format!(
                    "boundary not concave non-increasing near ({}, {})",
                    b.x, b.y
                )));
            } else {
                break;
            }
        }
        chain.push(p.clone());
    }
    // A vertical edge is only allowed as the final drop to the x-axis.
    for (i, w) in chain.windows(2).enumerate() {
        if w[1].x == w[0].x && i + 2 != chain.len() {
            return Err(Error::InvalidDomain(
                "vertical edge away from the x-axis end".into(),
            ));
        }
    }
    let mut all = chain.clone();
    all.push(RatPoint::from_ints(0, 0));
    let polygon = hull(&all)?;
    if polygon.degeneracy() != crate::geom::Degeneracy::Full {
        return Err(Error::InvalidDomain("domain must be two-dimensional".into()));
    }
    let classification = if polygon.is_lattice() {
        Classification::Lattice
    } else {
        Classification::Rational
    };
    let scale = crate::geom::primitive_scale(&polygon);
    Ok(ConvexToricDomain {
        polygon,
        chain,
        classification,
        scale,
    })
}

/// A concave piece in normalised position: the region under the graph of a
/// strictly convex, strictly decreasing chain meeting both axes. The region is
/// not convex in general, so it is represented by its graph chain (from the
/// y-axis endpoint to the x-axis endpoint) rather than a convex polygon.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConcavePiece {
    chain: Vec<RatPoint>,
}

impl ConcavePiece {
    pub fn from_chain(chain: Vec<RatPoint>) -> Result<ConcavePiece> {
        if chain.len() < 2 {
            return Err(Error::InvalidDomain("piece chain too short".into()));
        }
        if !chain[0].x.is_zero()
            || !chain[chain.len() - 1].y.is_zero()
            || !chain[0].y.is_positive()
            || !chain[chain.len() - 1].x.is_positive()
        {
            return Err(Error::InvalidDomain(
                "piece chain must run from the positive y-axis to the positive x-axis".into(),
            ));
        }
        for w in chain.windows(2) {
            let dx = &w[1].x - &w[0].x;
            let dy = &w[1].y - &w[0].y;
            if !dx.is_positive() || !dy.is_negative() {
                return Err(Error::InvalidDomain(
                    "piece chain must be strictly monotone".into(),
                ));
            }
        }
        for w in chain.windows(3) {
            let turn = w[1].sub(&w[0]).cross(&w[2].sub(&w[1]));
            if !turn.is_positive() {
                return Err(Error::InvalidDomain(
                    "piece chain must be strictly convex".into(),
                ));
            }
        }
        Ok(ConcavePiece { chain })
    }

    /// The triangle with legs `x` on the x-axis and `y` on the y-axis.
    pub fn triangle(x: Rat, y: Rat) -> Result<ConcavePiece> {
        ConcavePiece::from_chain(vec![
            RatPoint::new(Rat::zero(), y),
            RatPoint::new(x, Rat::zero()),
        ])
    }

    pub fn chain(&self) -> &[RatPoint] {
        &self.chain
    }

    /// Shoelace area of the (simple, possibly non-convex) region.
    pub fn area(&self) -> Rat {
        // Boundary counterclockwise: origin, x-axis leg, chain reversed.
        let mut boundary: Vec<RatPoint> = vec![RatPoint::from_ints(0, 0)];
        boundary.extend(self.chain.iter().rev().cloned());
        let n = boundary.len();
        let mut twice = Rat::zero();
        for i in 0..n {
            twice += boundary[i].cross(&boundary[(i + 1) % n]);
        }
        twice / rat_i(2)
    }
}

/// Weight sequence of a domain: the distinguished head (for convex domains)
/// plus an unordered multiset of triangle weights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSequence {
    pub head: Option<Rat>,
    pub weights: Vec<Rat>,
    /// Set when the peeling recursion hit the depth cap before finishing.
    pub truncated: bool,
}

impl WeightSequence {
    pub fn all_entries(&self) -> Vec<Rat> {
        let mut out = Vec::with_capacity(self.weights.len() + 1);
        if let Some(h) = &self.head {
            out.push(h.clone());
        }
        out.extend(self.weights.iter().cloned());
        out
    }
}

fn peel(piece: &ConcavePiece, depth: usize, out: &mut Vec<Rat>, truncated: &mut bool) {
    if depth == 0 {
        *truncated = true;
        return;
    }
    let chain = piece.chain();
    let a = chain
        .iter()
        .map(|p| &p.x + &p.y)
        .min()
        .expect("nonempty chain");
    if !a.is_positive() {
        return;
    }
    out.push(a.clone());
    let first = chain
        .iter()
        .position(|p| &p.x + &p.y == a)
        .expect("minimum attained");
    let last = chain
        .iter()
        .rposition(|p| &p.x + &p.y == a)
        .expect("minimum attained");
    // Upper piece: the part of the region above the cut, normalised by the
    // unimodular map (x, y) -> (x, x + y - a) that sends the cut line to the
    // x-axis and fixes the y-axis.
    if first > 0 {
        let mapped: Vec<RatPoint> = chain[..=first]
            .iter()
            .map(|p| RatPoint::new(p.x.clone(), &p.x + &p.y - &a))
            .collect();
        let sub = ConcavePiece::from_chain(mapped).expect("peeled upper piece is a valid chain");
        peel(&sub, depth - 1, out, truncated);
    }
    // Lower piece: (x, y) -> (x + y - a, y) sends the cut line to the y-axis
    // and fixes the x-axis.
    if last + 1 < chain.len() {
        let mapped: Vec<RatPoint> = chain[last..]
            .iter()
            .map(|p| RatPoint::new(&p.x + &p.y - &a, p.y.clone()))
            .collect();
        let sub = ConcavePiece::from_chain(mapped).expect("peeled lower piece is a valid chain");
        peel(&sub, depth - 1, out, truncated);
    }
}

/// Weight sequence of a concave piece by triangle peeling.
pub fn concave_weights(piece: &ConcavePiece, depth_cap: usize) -> WeightSequence {
    let mut weights = Vec::new();
    let mut truncated = false;
    peel(piece, depth_cap, &mut weights, &mut truncated);
    WeightSequence {
        head: None,
        weights,
        truncated,
    }
}

/// Weight sequence of a convex toric domain: head `a` is the smallest
/// simplex factor with the domain inside the triangle of size `a`, and the
/// weights come from the two leftover corner pieces of that triangle.
pub fn convex_weights(domain: &ConvexToricDomain, depth_cap: usize) -> WeightSequence {
    let chain = domain.chain();
    let head = domain
        .polygon()
        .vertices()
        .iter()
        .map(|p| &p.x + &p.y)
        .max()
        .expect("nonempty polygon");
    let first = chain
        .iter()
        .position(|p| &p.x + &p.y == head)
        .expect("maximum attained on the chain");
    let last = chain
        .iter()
        .rposition(|p| &p.x + &p.y == head)
        .expect("maximum attained on the chain");
    let mut weights = Vec::new();
    let mut truncated = false;
    // Corner piece along the y-axis: (x, y) -> (x, a - x - y).
    if first > 0 {
        let mapped: Vec<RatPoint> = chain[..=first]
            .iter()
            .map(|p| RatPoint::new(p.x.clone(), &head - &p.x - &p.y))
            .collect();
        let sub = ConcavePiece::from_chain(mapped).expect("upper corner piece is a valid chain");
        peel(&sub, depth_cap, &mut weights, &mut truncated);
    }
    // Corner piece along the x-axis: (x, y) -> (a - x - y, y), read backwards
    // so the image chain runs from the y-axis to the x-axis.
    if last + 1 < chain.len() {
        let mapped: Vec<RatPoint> = chain[last..]
            .iter()
            .map(|p| RatPoint::new(&head - &p.x - &p.y, p.y.clone()))
            .collect();
        let sub = ConcavePiece::from_chain(mapped).expect("lower corner piece is a valid chain");
        peel(&sub, depth_cap, &mut weights, &mut truncated);
    }
    WeightSequence {
        head: Some(head),
        weights,
        truncated,
    }
}

/// Gcd of the weight sequence (head included as an ordinary entry).
/// `None` means the gcd is infinite (empty sequence).
pub fn weight_gcd(w: &WeightSequence) -> Option<Rat> {
    let entries = w.all_entries();
    rat_gcd_all(entries.iter())
}

/// A lattice domain is primitive when the lattice lengths of its full
/// boundary (axis edges included) have gcd 1.
pub fn is_primitive(domain: &ConvexToricDomain) -> Result<bool> {
    if !domain.is_lattice() {
        return Err(Error::InvalidDomain(
            "primitivity is defined for lattice domains; use scale detection for rational ones"
                .into(),
        ));
    }
    let lens: Vec<Rat> = domain
        .polygon()
        .edges_ccw()
        .iter()
        .map(crate::geom::lattice_length)
        .collect();
    Ok(rat_gcd_all(lens.iter()) == Some(rat_i(1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

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
    fn parse_simplex() {
        let d = ball();
        assert_eq!(d.classification(), Classification::Lattice);
        let (q, base) = d.scale().unwrap();
        assert_eq!(*q, rat_i(1));
        assert_eq!(base.vertices(), d.polygon().vertices());
        assert_eq!(d.polygon().vertices().len(), 3);
    }

    #[test]
    fn parse_scaled_simplex() {
        let d = parse_domain(&[pt(0, 2), pt(2, 0)]).unwrap();
        let (q, base) = d.scale().unwrap();
        assert_eq!(*q, rat_i(2));
        assert_eq!(base.vertices(), ball().polygon().vertices());
    }

    #[test]
    fn parse_rational_domain() {
        // Collinear chain points merge during canonicalisation.
        let d = parse_domain(&[
            RatPoint::new(rat_i(0), rat(7, 2)),
            RatPoint::new(rat(3, 2), rat(5, 2)),
            RatPoint::new(rat_i(3), rat_i(1)),
            RatPoint::new(rat_i(4), rat_i(0)),
        ])
        .unwrap();
        assert_eq!(d.classification(), Classification::Rational);
        assert_eq!(d.chain().len(), 3);
        assert_eq!(d.area(), rat(61, 8));
    }

    #[test]
    fn parse_rejects_bad_chains() {
        assert!(parse_domain(&[pt(0, 1)]).is_err());
        assert!(parse_domain(&[pt(1, 1), pt(1, 0)]).is_err());
        assert!(parse_domain(&[pt(0, 1), pt(1, 1)]).is_err());
        assert!(parse_domain(&[RatPoint::from_ints(0, 1), RatPoint::new(rat_i(1), rat(-1, 2))]).is_err());
        // Dent: slopes increase along the chain.
        assert!(parse_domain(&[pt(0, 3), pt(1, 1), pt(3, 0)]).is_err());
        // x must not decrease.
        assert!(parse_domain(&[pt(0, 2), pt(2, 1), pt(1, 1), pt(3, 0)]).is_err());
    }

    #[test]
    fn parse_allows_graph_conventions() {
        // Horizontal first edge and vertical final drop.
        let d = square();
        assert_eq!(d.chain().len(), 3);
        // Vertical edge in the middle is rejected.
        assert!(parse_domain(&[pt(0, 3), pt(1, 2), pt(1, 1), pt(2, 0)]).is_err());
    }

    #[test]
    fn concave_weights_examples() {
        let tri = ConcavePiece::triangle(rat(5, 2), rat(5, 2)).unwrap();
        let w = concave_weights(&tri, DEFAULT_WEIGHT_DEPTH);
        assert_eq!(w.weights, vec![rat(5, 2)]);
        assert!(!w.truncated);

        let legs32 = ConcavePiece::triangle(rat_i(3), rat_i(2)).unwrap();
        let w = concave_weights(&legs32, DEFAULT_WEIGHT_DEPTH);
        assert_eq!(w.weights, vec![rat_i(2), rat_i(1), rat_i(1)]);
        // Area identity for the decomposition.
        let sum_sq: Rat = w.weights.iter().map(|a| a * a).sum();
        assert_eq!(sum_sq, legs32.area() * rat_i(2));
    }

    #[test]
    fn convex_weights_examples() {
        let w = convex_weights(&ball(), DEFAULT_WEIGHT_DEPTH);
        assert_eq!(w.head, Some(rat_i(1)));
        assert!(w.weights.is_empty());

        let w = convex_weights(&square(), DEFAULT_WEIGHT_DEPTH);
        assert_eq!(w.head, Some(rat_i(2)));
        assert_eq!(w.weights, vec![rat_i(1), rat_i(1)]);

        let two_ball = parse_domain(&[pt(0, 2), pt(2, 0)]).unwrap();
        let w = convex_weights(&two_ball, DEFAULT_WEIGHT_DEPTH);
        assert_eq!(w.head, Some(rat_i(2)));
        assert!(w.weights.is_empty());
    }

    #[test]
    fn weight_gcd_examples() {
        let w = WeightSequence {
            head: Some(rat_i(2)),
            weights: vec![rat_i(1), rat_i(1)],
            truncated: false,
        };
        assert_eq!(weight_gcd(&w), Some(rat_i(1)));
        let w = WeightSequence {
            head: Some(rat_i(2)),
            weights: vec![],
            truncated: false,
        };
        assert_eq!(weight_gcd(&w), Some(rat_i(2)));
        let w = WeightSequence {
            head: Some(rat(3, 2)),
            weights: vec![rat(1, 2), rat(1, 2)],
            truncated: false,
        };
        assert_eq!(weight_gcd(&w), Some(rat(1, 2)));
        let w = WeightSequence {
            head: None,
            weights: vec![],
            truncated: false,
        };
        assert_eq!(weight_gcd(&w), None);
    }

    #[test]
    fn primitivity() {
        assert!(is_primitive(&ball()).unwrap());
        let two_ball = parse_domain(&[pt(0, 2), pt(2, 0)]).unwrap();
        assert!(!is_primitive(&two_ball).unwrap());
        let tri = parse_domain(&[pt(0, 2), pt(3, 0)]).unwrap();
        assert!(is_primitive(&tri).unwrap());
        let half = parse_domain(&[
            RatPoint::new(rat_i(0), rat(1, 2)),
            RatPoint::new(rat(1, 2), rat_i(0)),
        ])
        .unwrap();
        assert!(is_primitive(&half).is_err());
    }
}
