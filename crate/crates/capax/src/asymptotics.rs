//! Structure derived from capacity sequences: gaps and attained residues,
//! tightly-constrained detection, sub-leading error terms, quasi-polynomial
//! presentations of the cap function, value recursions, and embedding
//! obstructions.
//!
//! Capacity arithmetic stays exact; floating point enters only when error
//! terms subtract a square root, and the exact capacity is kept alongside.

use crate::domains::{convex_weights, is_primitive, weight_gcd, ConvexToricDomain};
use crate::ech::CapacitySequence;
use crate::error::{Error, Result};
use crate::geom::{lattice_count, lattice_perimeter, omega_perimeter};
use crate::rat::{is_integer, rat_gcd_all, rat_i, rat_to_f64, Rat};
use crate::surfaces::{DivisorClass, SurfaceLattice};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GapMethod {
    TailObservation,
    GcdFormula,
    EdgeGcd,
}

/// Gap and attained residues read off a computed sequence tail.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub gap: Rat,
    pub method: GapMethod,
    /// Residues modulo `A^2` attained by the trailing half, sorted.
    pub attained_residues: Vec<Rat>,
    /// Set when the residue set of the trailing half disagrees with the
    /// trailing quarter, so the tail may not have stabilised.
    pub low_confidence: bool,
}

fn residue(v: &Rat, modulus: &Rat) -> Rat {
    let q = (v / modulus).floor();
    v - q * modulus
}

/// Observe the gap from a sequence tail: residues of the trailing half mod
/// `A^2`, gap = maximal circular difference between consecutive residues
/// (wrapping across the modulus; a single residue means gap `A^2`).
pub fn gap_and_residues(seq: &CapacitySequence, a_sq: &Rat) -> Result<GapReport> {
    if !a_sq.is_positive() {
        return Err(Error::InvalidArgument("A^2 must be positive".into()));
    }
    if seq.len() < 8 {
        return Err(Error::InvalidArgument(
            "sequence too short for tail analysis".into(),
        ));
    }
    let tail_of = |start: usize| -> Vec<Rat> {
        let mut res: Vec<Rat> = seq.values()[start..]
            .iter()
            .map(|v| residue(v, a_sq))
            .collect();
        res.sort();
        res.dedup();
        res
    };
    let half = tail_of(seq.len() / 2);
    let quarter = tail_of(3 * seq.len() / 4);
    let low_confidence = half != quarter;
    let mut gap = Rat::zero();
    let m = half.len();
    for i in 0..m {
        let diff = if i + 1 < m {
            &half[i + 1] - &half[i]
        } else {
            a_sq - &half[m - 1] + &half[0]
        };
        if diff > gap {
            gap = diff;
        }
    }
    Ok(GapReport {
        gap,
        method: GapMethod::TailObservation,
        attained_residues: half,
        low_confidence,
    })
}

/// Positive generator of `{D . A : D integral}`: the gcd of the pairings of
/// `A` with the lattice basis. Scales linearly when `A` is a rational
/// multiple of an integral class.
pub fn gap_formula(s: &SurfaceLattice, a: &DivisorClass) -> Result<Rat> {
    let mut pairings = Vec::new();
    for i in 0..s.rank() {
        let mut basis = DivisorClass::zero(s.rank());
        basis.coords[i] = rat_i(1);
        let p = s.dot(&basis, a);
        if !p.is_zero() {
            pairings.push(p.abs());
        }
    }
    rat_gcd_all(pairings.iter())
        .ok_or_else(|| Error::InvalidDivisor("A pairs to zero with the whole lattice".into()))
}

/// Toric gap via the moment polygon: the gcd of the boundary edge lattice
/// lengths (the pairings of the prime invariant divisors with `A`).
pub fn gap_edge_gcd(omega: &ConvexToricDomain) -> Result<Rat> {
    let lens: Vec<Rat> = omega
        .polygon()
        .edges_ccw()
        .iter()
        .map(crate::geom::lattice_length)
        .collect();
    rat_gcd_all(lens.iter()).ok_or_else(|| Error::InvalidDomain("degenerate domain".into()))
}

/// One route's verdict inside a tightly-constrained report.
#[derive(Clone, Debug)]
pub struct RouteVerdict {
    pub name: &'static str,
    pub gap_or_gcd: Rat,
    pub tight: bool,
}

#[derive(Clone, Debug)]
pub struct TightlyConstrainedReport {
    pub tight: bool,
    pub routes: Vec<RouteVerdict>,
}

/// Decide tight constraint for a domain by every available route: edge gcd,
/// lattice primitivity (for lattice domains), weight-sequence gcd, and the
/// tail of a computed sequence when one is supplied. Disagreement between
/// routes is a hard failure.
pub fn is_tightly_constrained_domain(
    omega: &ConvexToricDomain,
    seq: Option<&CapacitySequence>,
    weight_depth: usize,
) -> Result<TightlyConstrainedReport> {
    let mut routes = Vec::new();
    let edge = gap_edge_gcd(omega)?;
    routes.push(RouteVerdict {
        name: "edge_gcd",
        tight: edge == rat_i(1),
        gap_or_gcd: edge,
    });
    if omega.is_lattice() {
        let prim = is_primitive(omega)?;
        routes.push(RouteVerdict {
            name: "primitivity",
            gap_or_gcd: if prim { rat_i(1) } else { rat_i(0) },
            tight: prim,
        });
    }
    let w = convex_weights(omega, weight_depth);
    if !w.truncated {
        let g = weight_gcd(&w)
            .ok_or_else(|| Error::Internal("convex weight sequence is empty".into()))?;
        routes.push(RouteVerdict {
            name: "weight_gcd",
            tight: g == rat_i(1),
            gap_or_gcd: g,
        });
    }
    if let Some(seq) = seq {
        let a_sq = crate::geom::area(omega.polygon()) * rat_i(2);
        let report = gap_and_residues(seq, &a_sq)?;
        if !report.low_confidence {
            routes.push(RouteVerdict {
                name: "tail_observation",
                tight: report.gap == rat_i(1),
                gap_or_gcd: report.gap,
            });
        }
    }
    let tight = routes[0].tight;
    if routes.iter().any(|r| r.tight != tight) {
        return Err(Error::Internal(format!(
            "tightly-constrained routes disagree: {:?}",
            routes
        )));
    }
    Ok(TightlyConstrainedReport { tight, routes })
}

/// Surface-side variant: the gcd formula, plus the sequence tail when given.
pub fn is_tightly_constrained_surface(
    s: &SurfaceLattice,
    a: &DivisorClass,
    seq: Option<&CapacitySequence>,
) -> Result<TightlyConstrainedReport> {
    let mut routes = Vec::new();
    let g = gap_formula(s, a)?;
    routes.push(RouteVerdict {
        name: "gcd_formula",
        tight: g == rat_i(1),
        gap_or_gcd: g,
    });
    if let Some(seq) = seq {
        let a_sq = s.dot(a, a);
        let report = gap_and_residues(seq, &a_sq)?;
        if !report.low_confidence {
            routes.push(RouteVerdict {
                name: "tail_observation",
                tight: report.gap == rat_i(1),
                gap_or_gcd: report.gap,
            });
        }
    }
    let tight = routes[0].tight;
    if routes.iter().any(|r| r.tight != tight) {
        return Err(Error::Internal(format!(
            "tightly-constrained routes disagree: {:?}",
            routes
        )));
    }
    Ok(TightlyConstrainedReport { tight, routes })
}

/// Algebraic Ruelle invariant `-K . A - gap`.
pub fn ruelle_surface(s: &SurfaceLattice, a: &DivisorClass) -> Result<Rat> {
    let gap = gap_formula(s, a)?;
    let minus_k_dot_a = -s.dot(&s.canonical_class(), a);
    Ok(minus_k_dot_a - gap)
}

/// Toric form: `-K . A` is the lattice perimeter of the moment polygon.
pub fn ruelle_domain(omega: &ConvexToricDomain) -> Result<Rat> {
    let gap = gap_edge_gcd(omega)?;
    Ok(lattice_perimeter(omega.polygon()) - gap)
}

#[derive(Clone, Debug)]
pub struct ErrorTermRow {
    pub k: usize,
    pub capacity: Rat,
    pub error: f64,
}

/// Error terms `e_k = c_k - sqrt(2 A^2 k)` with tail extrema over a trailing
/// window, next to the predicted limit superior and inferior.
#[derive(Clone, Debug)]
pub struct ErrorTermReport {
    pub rows: Vec<ErrorTermRow>,
    pub window: usize,
    pub tail_max: f64,
    pub tail_min: f64,
    pub predicted_limsup: Rat,
    pub predicted_liminf: Rat,
}

pub fn error_terms(
    seq: &CapacitySequence,
    a_sq: &Rat,
    window: usize,
    predicted_limsup: Rat,
    predicted_liminf: Rat,
) -> Result<ErrorTermReport> {
    if window == 0 || window > seq.len() {
        return Err(Error::InvalidArgument(
            "window must be positive and at most the sequence length".into(),
        ));
    }
    let a_sq_f = rat_to_f64(a_sq);
    let rows: Vec<ErrorTermRow> = seq
        .values()
        .iter()
        .enumerate()
        .map(|(k, c)| ErrorTermRow {
            k,
            capacity: c.clone(),
            error: rat_to_f64(c) - (2.0 * a_sq_f * k as f64).sqrt(),
        })
        .collect();
    let tail = &rows[rows.len() - window..];
    let tail_max = tail.iter().map(|r| r.error).fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().map(|r| r.error).fold(f64::INFINITY, f64::min);
    Ok(ErrorTermReport {
        rows,
        window,
        tail_max,
        tail_min,
        predicted_limsup,
        predicted_liminf,
    })
}

/// Predicted error-term limits for a surface: `limsup = gap + K.A / 2`,
/// `liminf = K.A / 2`.
pub fn predicted_limits_surface(gap: &Rat, k_dot_a: &Rat) -> (Rat, Rat) {
    let half_ka = k_dot_a / rat_i(2);
    (gap + &half_ka, half_ka)
}

/// Predicted limits for a domain that is `q` times a primitive lattice
/// domain: `limsup = q - perimeter/2`, `liminf = -perimeter/2`.
pub fn predicted_limits_domain(omega: &ConvexToricDomain) -> Result<(Rat, Rat)> {
    let (q, _) = omega
        .scale()
        .cloned()
        .ok_or_else(|| Error::InvalidDomain("domain is not a rational multiple of a lattice domain".into()))?;
    let half_per = lattice_perimeter(omega.polygon()) / rat_i(2);
    Ok((q - &half_per, -half_per))
}

/// Deviation data for the leading-order growth `c_k^2 / k -> 2 A^2`.
#[derive(Clone, Debug)]
pub struct WeylTrend {
    pub first_dev: f64,
    pub final_dev: f64,
    /// Net decrease across the trailing window.
    pub decreased: bool,
    /// Final deviation relative to `2 A^2`.
    pub final_ratio: f64,
}

pub fn weyl_trend(seq: &CapacitySequence, a_sq: &Rat, window: usize) -> Result<WeylTrend> {
    if seq.len() < window + 1 || window < 2 {
        return Err(Error::InvalidArgument("window too large or too small".into()));
    }
    let target = 2.0 * rat_to_f64(a_sq);
    let dev = |k: usize| -> f64 {
        let c = rat_to_f64(seq.get(k));
        (c * c / k as f64 - target).abs()
    };
    let k_last = seq.len() - 1;
    let k_first = seq.len() - window;
    let first_dev = dev(k_first);
    let final_dev = dev(k_last);
    Ok(WeylTrend {
        first_dev,
        final_dev,
        decreased: final_dev < first_dev,
        final_ratio: final_dev / target,
    })
}

/// Quasi-polynomial presentation of the cap function
/// `cap(x) = x^2/(2A^2) - (K.A) x/(2A^2) + gamma_i`, `x = i mod A^2`.
#[derive(Clone, Debug)]
pub struct QuasiPolynomial {
    pub period: i64,
    pub quad: Rat,
    pub lin: Rat,
    pub constants: Vec<Rat>,
    pub onset: i64,
}

impl QuasiPolynomial {
    pub fn eval(&self, x: i64) -> Rat {
        let xi = rat_i(x);
        let i = (x.rem_euclid(self.period)) as usize;
        &self.quad * &xi * &xi + &self.lin * &xi + &self.constants[i]
    }
}

/// Integer cap-function values `cap(0..=x_max)` from a capacity sequence that
/// extends beyond `x_max`.
pub fn cap_values(seq: &CapacitySequence, x_max: i64) -> Result<Vec<BigInt>> {
    let mut out = Vec::with_capacity(x_max as usize + 1);
    for x in 0..=x_max {
        let c = seq
            .cap_at(&rat_i(x))
            .ok_or_else(|| Error::InvalidArgument(format!(
                "sequence too short to evaluate the cap function at {}",
                x
            )))?;
        out.push(BigInt::from(c));
    }
    Ok(out)
}

/// Extract the quasi-polynomial: the quadratic and linear coefficients are
/// pinned to `1/(2A^2)` and `-K.A/(2A^2)` (verified, not fitted), the
/// constants come from the top period of the data, and the onset is the least
/// `x` from which the closed form matches every computed value exactly.
pub fn fit_quasipolynomial(
    caps: &[BigInt],
    a_sq: i64,
    k_dot_a: &Rat,
) -> Result<QuasiPolynomial> {
    if a_sq <= 0 {
        return Err(Error::InvalidArgument("A^2 must be a positive integer".into()));
    }
    let period = a_sq;
    let need = 3 * period as usize + 1;
    if caps.len() < need {
        return Err(Error::InvalidArgument(format!(
            "need at least {} cap values to fit a period-{} quasi-polynomial",
            need, period
        )));
    }
    let quad = Rat::new(BigInt::from(1), BigInt::from(2 * a_sq));
    let lin = -k_dot_a / rat_i(2 * a_sq);
    // Constants from the last full period.
    let x_max = caps.len() as i64 - 1;
    let mut constants = vec![Rat::zero(); period as usize];
    for i in 0..period {
        // Largest x <= x_max with x = i mod period.
        let x = x_max - (x_max - i).rem_euclid(period);
        let xi = rat_i(x);
        constants[i as usize] =
            Rat::from_integer(caps[x as usize].clone()) - &quad * &xi * &xi - &lin * &xi;
    }
    let qp = QuasiPolynomial {
        period,
        quad,
        lin,
        constants,
        onset: 0,
    };
    // Scan downward for the first mismatch.
    let mut onset = 0i64;
    for x in (0..=x_max).rev() {
        if qp.eval(x) != Rat::from_integer(caps[x as usize].clone()) {
            onset = x + 1;
            break;
        }
    }
    if onset + 3 * period > x_max + 1 {
        return Err(Error::InvalidArgument(format!(
            "no onset with three stable periods within range (onset {}, x_max {})",
            onset, x_max
        )));
    }
    Ok(QuasiPolynomial { onset, ..qp })
}

/// Ehrhart cross-check for primitive lattice domains: `cap(i + lambda x) -
/// ehr(x)` must be eventually constant in `x` for each residue `i`, where
/// `lambda` is the omega-perimeter of omega (equal to `A^2`; verified) and
/// `ehr(x)` counts lattice points of `x * omega`.
pub fn ehrhart_cap_check(
    omega: &ConvexToricDomain,
    caps: &[BigInt],
    min_tail: usize,
) -> Result<Vec<Rat>> {
    let lambda_rat = omega_perimeter(omega.polygon(), omega.polygon());
    let a_sq = crate::geom::area(omega.polygon()) * rat_i(2);
    if lambda_rat != a_sq {
        return Err(Error::Internal(
            "omega-perimeter of omega differs from 2 area(omega)".into(),
        ));
    }
    if !is_integer(&lambda_rat) || !lambda_rat.is_positive() {
        return Err(Error::InvalidDomain(
            "Ehrhart check needs an integral positive period".into(),
        ));
    }
    let lambda = lambda_rat.to_integer().to_i64().unwrap();
    let x_top = (caps.len() as i64 - 1 - (lambda - 1)) / lambda;
    let mut gammas = Vec::new();
    for i in 0..lambda {
        let mut column = Vec::new();
        for x in 0..=x_top {
            let idx = i + lambda * x;
            if idx >= caps.len() as i64 {
                break;
            }
            let ehr = if x == 0 {
                BigInt::from(1)
            } else {
                lattice_count(&omega.polygon().dilate(&rat_i(x)))
            };
            column.push(Rat::from_integer(&caps[idx as usize] - ehr));
        }
        if column.len() < min_tail + 1 {
            return Err(Error::InvalidArgument(
                "not enough data for the Ehrhart cross-check".into(),
            ));
        }
        let tail = &column[column.len() - min_tail..];
        let first = &tail[0];
        if tail.iter().any(|g| g != first) {
            return Err(Error::Internal(format!(
                "cap(i + lambda x) - ehr(x) not eventually constant for residue {}",
                i
            )));
        }
        gammas.push(first.clone());
    }
    Ok(gammas)
}

/// Outcomes of the value and cap-function recursions.
#[derive(Clone, Debug, Default)]
pub struct RecursionReport {
    /// `(k, k', holds)` for the capacity recursion `c_{k'} = c_k + A^2` at
    /// `k' = k + I(A)/2 + c_k`.
    pub value_checks: Vec<(usize, usize, bool)>,
    /// `(x, holds)` for `cap(x + A^2) = cap(x) + x + I(A)/2` at attained `x`.
    pub cap_checks: Vec<(i64, bool)>,
    /// Violations above the threshold `x > A . (A + K)`.
    pub failures: usize,
    /// Violations at or below the threshold (allowed; reported only).
    pub informational: usize,
}

/// Check the recursions on a sequence with integral `A^2` and `K . A`.
pub fn check_recursions(
    seq: &CapacitySequence,
    a_sq: i64,
    k_dot_a: &Rat,
    k_range: std::ops::RangeInclusive<usize>,
) -> Result<RecursionReport> {
    if a_sq <= 0 {
        return Err(Error::InvalidArgument("A^2 must be a positive integer".into()));
    }
    let index_a = rat_i(a_sq) - k_dot_a; // I(A) = A^2 - K.A
    let half_index = &index_a / rat_i(2);
    if !is_integer(&half_index) {
        return Err(Error::InvalidArgument("I(A)/2 must be integral".into()));
    }
    let half_index_int = half_index.to_integer().to_i64().unwrap();
    let threshold = rat_i(a_sq) + k_dot_a; // A . (A + K)
    let mut report = RecursionReport::default();
    for k in k_range {
        if k == 0 || k >= seq.len() {
            continue;
        }
        let ck = seq.get(k);
        if !is_integer(ck) {
            continue;
        }
        let ck_int = ck.to_integer().to_i64().unwrap();
        let kp = k as i64 + half_index_int + ck_int;
        if kp < 0 || kp as usize >= seq.len() {
            continue;
        }
        let expect = ck + rat_i(a_sq);
        let holds = *seq.get(kp as usize) == expect;
        if !holds {
            if *ck > threshold {
                report.failures += 1;
            } else {
                report.informational += 1;
            }
        }
        report.value_checks.push((k, kp as usize, holds));
    }
    // Cap recursion over attained x in range.
    let x_max_possible = {
        let last = seq.values().last().unwrap();
        crate::rat::rat_floor(last).to_i64().unwrap_or(0) - 1
    };
    let x_hi = x_max_possible - a_sq;
    if x_hi >= 0 {
        let caps = cap_values(seq, x_max_possible)?;
        for x in 0..=x_hi {
            let attained = x == 0 || caps[x as usize] > caps[x as usize - 1];
            if !attained {
                continue;
            }
            let lhs = &caps[(x + a_sq) as usize];
            let rhs = &caps[x as usize] + BigInt::from(x) + BigInt::from(half_index_int);
            let holds = *lhs == rhs;
            if !holds {
                if rat_i(x) > threshold {
                    report.failures += 1;
                } else {
                    report.informational += 1;
                }
            }
            report.cap_checks.push((x, holds));
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Obstructed(String),
    NoObstructionFound,
}

/// Embedding obstruction report between two domains. Verdicts are one-sided:
/// an embedding is never certified, only ruled out.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    /// First `k` with `c_k(omega) > c_k(omega2)`, obstructing the open
    /// embedding of the first domain into the second.
    pub first_violation: Option<(usize, Rat, Rat)>,
    pub forward: Verdict,
    /// The same test with the roles swapped.
    pub backward: Verdict,
    /// Perimeter test when the areas agree: an embedding forces the source
    /// perimeter to be at least the target perimeter.
    pub perimeter_verdicts: Option<(Verdict, Verdict)>,
}

pub fn obstruct(
    omega: &ConvexToricDomain,
    omega2: &ConvexToricDomain,
    seq1: &CapacitySequence,
    seq2: &CapacitySequence,
    k_max: usize,
) -> Result<ObstructionReport> {
    if seq1.len() <= k_max || seq2.len() <= k_max {
        return Err(Error::InvalidArgument("sequences shorter than k_max".into()));
    }
    let mut first_violation = None;
    let mut forward = Verdict::NoObstructionFound;
    let mut backward = Verdict::NoObstructionFound;
    for k in 0..=k_max {
        if seq1.get(k) > seq2.get(k) {
            first_violation = Some((k, seq1.get(k).clone(), seq2.get(k).clone()));
            forward = Verdict::Obstructed(format!(
                "c_{}(source) = {} > {} = c_{}(target)",
                k,
                seq1.get(k),
                seq2.get(k),
                k
            ));
            break;
        }
    }
    for k in 0..=k_max {
        if seq2.get(k) > seq1.get(k) {
            backward = Verdict::Obstructed(format!(
                "c_{}(source) = {} > {} = c_{}(target)",
                k,
                seq2.get(k),
                seq1.get(k),
                k
            ));
            break;
        }
    }
    let perimeter_verdicts = if omega.area() == omega2.area() {
        let p1 = lattice_perimeter(omega.polygon());
        let p2 = lattice_perimeter(omega2.polygon());
        let fwd = if p1 < p2 {
            Verdict::Obstructed(format!(
                "equal areas but source perimeter {} < target perimeter {}",
                p1, p2
            ))
        } else {
            Verdict::NoObstructionFound
        };
        let bwd = if p2 < p1 {
            Verdict::Obstructed(format!(
                "equal areas but source perimeter {} < target perimeter {}",
                p2, p1
            ))
        } else {
            Verdict::NoObstructionFound
        };
        Some((fwd, bwd))
    } else {
        None
    };
    Ok(ObstructionReport {
        first_violation,
        forward,
        backward,
        perimeter_verdicts,
    })
}

/// Capacity sequence of a formal disjoint union:
/// `c_k = max over k1 + k2 = k of c_{k1} + c_{k2}`.
pub fn disjoint_union(
    s1: &CapacitySequence,
    s2: &CapacitySequence,
    k_max: usize,
) -> Result<CapacitySequence> {
    if s1.len() <= k_max || s2.len() <= k_max {
        return Err(Error::InvalidArgument("sequences shorter than k_max".into()));
    }
    let mut values = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let best = (0..=k)
            .map(|k1| s1.get(k1) + s2.get(k - k1))
            .max()
            .expect("nonempty split");
        values.push(best);
    }
    CapacitySequence::new(values, s1.source)
}
