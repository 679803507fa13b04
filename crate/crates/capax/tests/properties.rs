//! Randomised structural properties, seeded for reproducibility.

use capax::domains::{
    concave_weights, convex_weights, is_primitive, parse_domain, weight_gcd, ConcavePiece,
    ConvexToricDomain, DEFAULT_WEIGHT_DEPTH,
};
use capax::ech::{ech_capacities, DEFAULT_NODE_CAP};
use capax::geom::{
    area, hull, lattice_count, lattice_count_pick, lattice_perimeter, minkowski_sum, mixed_volume,
    omega_perimeter, RatPoint, RatPolygon,
};
use capax::rat::{rat, rat_i, Rat};
use capax::toric::{intersect, polytope_of, ToricDivisor, ToricSurfaceData};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn pt(x: i64, y: i64) -> RatPoint {
    RatPoint::from_ints(x, y)
}

fn random_lattice_polygon(rng: &mut StdRng) -> RatPolygon {
    loop {
        let n = rng.gen_range(1..=6);
        let pts: Vec<RatPoint> = (0..n)
            .map(|_| pt(rng.gen_range(0..=5), rng.gen_range(0..=5)))
            .collect();
        if let Ok(h) = hull(&pts) {
            return h;
        }
    }
}

fn random_rational_polygon(rng: &mut StdRng) -> RatPolygon {
    loop {
        let n = rng.gen_range(1..=6);
        let pts: Vec<RatPoint> = (0..n)
            .map(|_| {
                RatPoint::new(
                    rat(rng.gen_range(0..=20), rng.gen_range(1..=4)),
                    rat(rng.gen_range(0..=20), rng.gen_range(1..=4)),
                )
            })
            .collect();
        if let Ok(h) = hull(&pts) {
            return h;
        }
    }
}

/// A random valid convex toric domain (possibly degenerate tries are
/// discarded).
fn random_domain(rng: &mut StdRng) -> ConvexToricDomain {
    loop {
        let h = rng.gen_range(1..=4i64);
        let w = rng.gen_range(1..=4i64);
        let mid: Vec<RatPoint> = if rng.gen_bool(0.5) {
            vec![pt(rng.gen_range(1..=w.max(1)), rng.gen_range(1..=h))]
        } else {
            vec![]
        };
        let mut chain = vec![pt(0, h)];
        chain.extend(mid);
        chain.push(pt(w + rng.gen_range(0..=2), 0));
        if let Ok(d) = parse_domain(&chain) {
            return d;
        }
    }
}

#[test]
fn mixed_volume_symmetric_and_linear() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..300 {
        let p = random_lattice_polygon(&mut rng);
        let p2 = random_lattice_polygon(&mut rng);
        let q = random_lattice_polygon(&mut rng);
        assert_eq!(mixed_volume(&p, &q), mixed_volume(&q, &p));
        let sum = minkowski_sum(&p, &p2);
        assert_eq!(
            mixed_volume(&sum, &q),
            mixed_volume(&p, &q) + mixed_volume(&p2, &q)
        );
    }
}

#[test]
fn omega_perimeter_equals_mixed_volume_thousand_pairs() {
    let mut rng = StdRng::seed_from_u64(7);
    for i in 0..1000 {
        let omega = if i % 2 == 0 {
            random_rational_polygon(&mut rng)
        } else {
            random_lattice_polygon(&mut rng)
        };
        let lambda = if i % 3 == 0 {
            random_rational_polygon(&mut rng)
        } else {
            random_lattice_polygon(&mut rng)
        };
        assert_eq!(
            omega_perimeter(&omega, &lambda),
            mixed_volume(&lambda, &omega),
            "pair {}",
            i
        );
    }
}

#[test]
fn omega_perimeter_translation_invariant() {
    let mut rng = StdRng::seed_from_u64(23);
    for _ in 0..200 {
        let omega = random_rational_polygon(&mut rng);
        let lambda = random_lattice_polygon(&mut rng);
        let t_int = pt(rng.gen_range(-3..=3), rng.gen_range(-3..=3));
        let t_rat = RatPoint::new(rat(rng.gen_range(-9..=9), 4), rat(rng.gen_range(-9..=9), 4));
        let base = omega_perimeter(&omega, &lambda);
        assert_eq!(omega_perimeter(&omega, &lambda.translate(&t_int)), base);
        assert_eq!(omega_perimeter(&omega, &lambda.translate(&t_rat)), base);
    }
}

#[test]
fn pick_equals_scan_everywhere() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..400 {
        let p = random_lattice_polygon(&mut rng);
        assert_eq!(lattice_count(&p), lattice_count_pick(&p).unwrap());
    }
}

#[test]
fn scaling_laws() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..200 {
        let p = random_lattice_polygon(&mut rng);
        let q = random_lattice_polygon(&mut rng);
        for s in [rat_i(2), rat(3, 2), rat(1, 3)] {
            let ps = p.dilate(&s);
            assert_eq!(area(&ps), area(&p) * &s * &s);
            assert_eq!(lattice_perimeter(&ps), lattice_perimeter(&p) * &s);
            assert_eq!(mixed_volume(&ps, &q), mixed_volume(&p, &q) * &s);
        }
    }
}

#[test]
fn concave_weight_identity_on_corpus() {
    // Sum of squared weights = twice the area, over >= 50 lattice pieces.
    let mut checked = 0;
    for a in 1..=8i64 {
        for b in 1..=8i64 {
            let piece = ConcavePiece::triangle(rat_i(a), rat_i(b)).unwrap();
            let w = concave_weights(&piece, DEFAULT_WEIGHT_DEPTH);
            assert!(!w.truncated, "legs ({}, {})", a, b);
            let sum_sq: Rat = w.weights.iter().map(|x| x * x).sum();
            assert_eq!(sum_sq, piece.area() * rat_i(2), "legs ({}, {})", a, b);
            checked += 1;
        }
    }
    // A few multi-edge pieces.
    let chains = vec![
        vec![pt(0, 3), pt(1, 1), pt(3, 0)],
        vec![pt(0, 4), pt(1, 2), pt(2, 1), pt(4, 0)],
        vec![pt(0, 5), pt(1, 2), pt(3, 1), pt(6, 0)],
        vec![pt(0, 2), pt(2, 1), pt(5, 0)],
    ];
    for chain in chains {
        let piece = ConcavePiece::from_chain(chain).unwrap();
        let w = concave_weights(&piece, DEFAULT_WEIGHT_DEPTH);
        assert!(!w.truncated);
        let sum_sq: Rat = w.weights.iter().map(|x| x * x).sum();
        assert_eq!(sum_sq, piece.area() * rat_i(2));
        checked += 1;
    }
    assert!(checked >= 50);
}

#[test]
fn convex_weight_identity_and_scaling() {
    let mut rng = StdRng::seed_from_u64(53);
    for i in 0..60 {
        let d = random_domain(&mut rng);
        let w = convex_weights(&d, DEFAULT_WEIGHT_DEPTH);
        assert!(!w.truncated, "domain {}", i);
        let head = w.head.clone().unwrap();
        let sum_sq: Rat = w.weights.iter().map(|x| x * x).sum();
        assert_eq!(&head * &head - sum_sq, d.area() * rat_i(2), "domain {}", i);
        // Scaling acts entrywise on weights.
        for s in [rat_i(2), rat(3, 2)] {
            let ds = d.dilate(&s);
            let ws = convex_weights(&ds, DEFAULT_WEIGHT_DEPTH);
            assert_eq!(ws.head.unwrap(), &head * &s);
            let mut scaled: Vec<Rat> = w.weights.iter().map(|x| x * &s).collect();
            let mut got = ws.weights.clone();
            scaled.sort();
            got.sort();
            assert_eq!(got, scaled);
        }
    }
}

#[test]
fn primitivity_iff_weight_gcd_one() {
    let mut rng = StdRng::seed_from_u64(61);
    let mut lattice_seen = 0;
    for _ in 0..120 {
        let d = random_domain(&mut rng);
        if !d.is_lattice() {
            continue;
        }
        lattice_seen += 1;
        let prim = is_primitive(&d).unwrap();
        let w = convex_weights(&d, DEFAULT_WEIGHT_DEPTH);
        assert!(!w.truncated);
        let g = weight_gcd(&w).unwrap();
        assert_eq!(prim, g == rat_i(1));
        // Doubling breaks primitivity and doubles the gcd.
        let dd = d.dilate(&rat_i(2));
        assert!(!is_primitive(&dd).unwrap());
        let wd = convex_weights(&dd, DEFAULT_WEIGHT_DEPTH);
        assert_eq!(weight_gcd(&wd).unwrap(), g * rat_i(2));
    }
    assert!(lattice_seen >= 30);
}

#[test]
fn ech_conformality() {
    let square = parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap();
    let base = ech_capacities(&square, 8, DEFAULT_NODE_CAP).unwrap();
    for q in [rat_i(2), rat(3, 2)] {
        let scaled = square.dilate(&q);
        let got = ech_capacities(&scaled, 8, DEFAULT_NODE_CAP).unwrap();
        for k in 0..=8 {
            assert_eq!(*got.get(k), base.get(k) * &q, "q = {}, k = {}", q, k);
        }
    }
}

#[test]
fn intersect_dual_routes_agree() {
    // Mixed volume of polytopes vs the edge-length linear form.
    let mut rng = StdRng::seed_from_u64(71);
    let domains = vec![
        parse_domain(&[pt(0, 1), pt(1, 0)]).unwrap(),
        parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap(),
        parse_domain(&[pt(0, 2), pt(3, 0)]).unwrap(),
    ];
    for omega in &domains {
        let y = ToricSurfaceData::normal_fan(omega).unwrap();
        let n = y.rays().len();
        for _ in 0..40 {
            // Random nef divisors: repair random integral supports.
            let raw = ToricDivisor::from_ints(
                &(0..n).map(|_| rng.gen_range(0..=4)).collect::<Vec<_>>(),
            );
            if polytope_of(&raw, &y).is_none() {
                continue;
            }
            let d = match capax::toric::nef_repair(&raw, &y) {
                Ok(d) => d,
                Err(_) => continue,
            };
            let a = y.polarisation_divisor();
            let via_mv = intersect(&d, &a, &y).unwrap();
            let via_edges = capax::toric::dot_polarisation(&d, &y);
            assert_eq!(via_mv, via_edges);
        }
    }
}

#[test]
fn h0_multiples_are_ehrhart_values() {
    let tri = parse_domain(&[pt(0, 2), pt(3, 0)]).unwrap();
    let y = ToricSurfaceData::normal_fan(&tri).unwrap();
    let a = y.polarisation_divisor();
    let area2 = capax::toric::polarisation_self_intersection(&y); // 2 area
    let perim = lattice_perimeter(tri.polygon());
    for d in 1..=10i64 {
        let h = capax::toric::h0(&a.scale(&rat_i(d)), &y).unwrap();
        let count = lattice_count(&tri.polygon().dilate(&rat_i(d)));
        assert_eq!(h, count);
        // Ehrhart shape: area d^2 + perimeter/2 d + 1.
        let expect = &area2 / rat_i(2) * rat_i(d) * rat_i(d)
            + &perim / rat_i(2) * rat_i(d)
            + rat_i(1);
        assert_eq!(Rat::from_integer(h), expect);
    }
}

#[test]
fn capacity_sequences_reject_bad_data() {
    use capax::ech::{CapacitySequence, Source};
    assert!(CapacitySequence::new(vec![], Source::Oracle).is_err());
    assert!(CapacitySequence::new(vec![rat_i(1)], Source::Oracle).is_err());
    assert!(CapacitySequence::new(vec![rat_i(0), rat_i(2), rat_i(1)], Source::Oracle).is_err());
}
