use capax::domains::parse_domain;
use capax::ech::{ech_capacities, DEFAULT_NODE_CAP};
use capax::geom::RatPoint;
use capax::rat::{rat, rat_i};
use capax::toric::{alg_capacities_toric, SolveOptions, ToricSurfaceData};
use std::time::Instant;

fn pt(x: i64, y: i64) -> RatPoint { RatPoint::from_ints(x, y) }

fn main() {
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
        let ech = ech_capacities(omega, 20, DEFAULT_NODE_CAP).unwrap();
        let t1 = Instant::now();
        let y = ToricSurfaceData::normal_fan(omega).unwrap();
        let alg = alg_capacities_toric(&y, 20, SolveOptions::default()).unwrap();
        let t2 = Instant::now();
        let agree = ech.values() == alg.values();
        println!(
            "{:8} ech {:6.2?} alg {:6.2?} agree={} c20={}",
            name,
            t1 - t0,
            t2 - t1,
            agree,
            ech.get(20)
        );
        if !agree {
            println!("  ech: {:?}", ech.values().iter().map(|v| v.to_string()).collect::<Vec<_>>());
            println!("  alg: {:?}", alg.values().iter().map(|v| v.to_string()).collect::<Vec<_>>());
        }
    }
}
