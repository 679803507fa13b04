use capax::asymptotics::cap_values;
use capax::domains::parse_domain;
use capax::geom::{lattice_count, RatPoint};
use capax::rat::rat_i;
use capax::toric::{alg_capacities_toric, SolveOptions, ToricSurfaceData};
use std::time::Instant;

fn pt(x: i64, y: i64) -> RatPoint { RatPoint::from_ints(x, y) }

fn main() {
    // Square: cap(i + 2x) - ehr(x) per residue.
    let sq = parse_domain(&[pt(0, 1), pt(1, 1), pt(1, 0)]).unwrap();
    let y = ToricSurfaceData::normal_fan(&sq).unwrap();
    let seq = alg_capacities_toric(&y, 260, SolveOptions::default()).unwrap();
    let caps = cap_values(&seq, 20).unwrap();
    for i in 0..2i64 {
        let col: Vec<String> = (0..9)
            .map(|x| {
                let ehr = if x == 0 { num_bigint::BigInt::from(1) } else {
                    lattice_count(&sq.polygon().dilate(&rat_i(x)))
                };
                format!("{}", &caps[(i + 2 * x) as usize] - ehr)
            })
            .collect();
        println!("square residue {}: cap(i+2x)-ehr(x) = {:?}", i, col);
    }
    // fig3a deep sweep timing + gap stability.
    let fig = parse_domain(&[
        RatPoint::new(rat_i(0), capax::rat::rat(7, 2)),
        RatPoint::new(capax::rat::rat(3, 2), capax::rat::rat(5, 2)),
        RatPoint::new(rat_i(3), rat_i(1)),
        RatPoint::new(rat_i(4), rat_i(0)),
    ]).unwrap();
    let yf = ToricSurfaceData::normal_fan(&fig).unwrap();
    for kmax in [150usize, 300] {
        let t0 = Instant::now();
        let seq = alg_capacities_toric(&yf, kmax, SolveOptions::default()).unwrap();
        let a_sq = capax::toric::polarisation_self_intersection(&yf);
        let trend = capax::asymptotics::weyl_trend(&seq, &a_sq, kmax / 2).unwrap();
        let gap = capax::asymptotics::gap_and_residues(&seq, &a_sq).unwrap();
        println!(
            "fig3a k<={}: {:?}, weyl ratio {:.4}, tail gap {} (low_conf {})",
            kmax, t0.elapsed(), trend.final_ratio, gap.gap, gap.low_confidence
        );
    }
}
