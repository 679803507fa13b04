use capax::domains::parse_domain;
use capax::ech::ech_capacities;
use capax::geom::RatPoint;
use capax::rat::{rat, rat_i, rat_to_f64};
use capax::toric::{alg_capacities_toric, SolveOptions, ToricSurfaceData};
use std::time::Instant;

fn pt(x: i64, y: i64) -> RatPoint { RatPoint::from_ints(x, y) }

fn main() {
    // P^2 deep sweep for the error-term tail.
    let ball = parse_domain(&[pt(0, 1), pt(1, 0)]).unwrap();
    let y = ToricSurfaceData::normal_fan(&ball).unwrap();
    let t0 = Instant::now();
    let seq = alg_capacities_toric(&y, 5000, SolveOptions::default()).unwrap();
    println!("P2 k<=5000 in {:?}; c_5000 = {}", t0.elapsed(), seq.get(5000));
    // e_k = c_k - sqrt(2k) near the tail.
    let mut tail_max = f64::NEG_INFINITY;
    let mut tail_min = f64::INFINITY;
    for k in 2500..=5000usize {
        let e = rat_to_f64(seq.get(k)) - (2.0 * k as f64).sqrt();
        tail_max = tail_max.max(e);
        tail_min = tail_min.min(e);
    }
    println!("tail e_k in [{:.4}, {:.4}] (predicted [-1.5, -0.5])", tail_min, tail_max);

    // k <= 60 sweeps for gap observation on all corpus items.
    let domains = vec![
        ("ball", parse_domain(&[pt(0, 1), pt(1, 0)]).unwrap()),
        ("ball2", parse_domain(&[pt(0, 2), pt(2, 0)]).unwrap()),
        ("square", parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap()),
        ("tri21", parse_domain(&[pt(0, 1), pt(2, 0)]).unwrap()),
        ("fig3a", parse_domain(&[
            RatPoint::new(rat_i(0), rat(7, 2)),
            RatPoint::new(rat(3, 2), rat(5, 2)),
            RatPoint::new(rat_i(3), rat_i(1)),
            RatPoint::new(rat_i(4), rat_i(0)),
        ]).unwrap()),
    ];
    for (name, omega) in &domains {
        let t0 = Instant::now();
        let y = ToricSurfaceData::normal_fan(omega).unwrap();
        let alg = alg_capacities_toric(&y, 60, SolveOptions::default()).unwrap();
        let t1 = Instant::now();
        println!("{:8} alg k<=60 {:8.2?} c60={}", name, t1 - t0, alg.get(60));
    }
    // The ech corner search hits its node cap well before k = 60; confirm
    // the resource error fires rather than hanging.
    let t0 = Instant::now();
    match ech_capacities(&domains[2].1, 60, 2_000_000) {
        Ok(s) => println!("square ech k<=60 {:?} c60={}", t0.elapsed(), s.get(60)),
        Err(e) => println!("square ech k<=60 errs as expected ({:?}): {}", t0.elapsed(), e),
    }
}
