//! Golden-file generator. Capacity prefixes come from the brute-force oracle
//! (exhaustive enumeration over a box), not from the production solvers, so
//! the goldens stay an independent reference. Quasi-polynomial constants are
//! derived from exact cap-function counting on long capacity sequences; the
//! del Pezzo closure record pins the transform arithmetic.
//!
//! Run from the workspace root: writes under crates/capax/corpus/.

use capax::asymptotics::{cap_values, fit_quasipolynomial};
use capax::ech::brute_oracle_sweep;
use capax::rat::rat_i;
use capax::surfaces::{iso_transform_closure, DivisorClass};
use capax::toric::{alg_capacities_toric, canonical_dot_polarisation, SolveOptions, ToricSurfaceData};
use capax::wire::{rat_to_pair, read_domain, read_surface_lattice};
use num_traits::ToPrimitive;
use std::fs;
use std::path::Path;

fn main() {
    let root = Path::new("crates/capax/corpus");
    assert!(root.exists(), "run from the workspace root");
    // Read inputs straight from disk; the embedded registry requires the
    // goldens this program is about to produce.
    let domain = |name: &str| {
        let json = fs::read_to_string(root.join(name).join("input.json")).unwrap();
        read_domain(&json).unwrap()
    };
    let domains: Vec<(&str, _)> = ["ball", "ball2", "square", "tri21", "fig3a"]
        .iter()
        .map(|&n| (n, domain(n)))
        .collect();

    // Oracle capacity prefixes: box 6, k <= 10 for the ball, k <= 8 for the
    // other domains.
    for (name, omega) in &domains {
        let name = *name;
        let k_max = if name == "ball" { 10 } else { 8 };
        let sweep = brute_oracle_sweep(omega, k_max, 6, 2_000_000_000).unwrap();
        let mut csv = String::from("k,value_num,value_den\n");
        for (k, v) in sweep.iter().enumerate() {
            let v = v.as_ref().expect("box 6 covers the prefix");
            let [n, d] = rat_to_pair(v).unwrap();
            csv.push_str(&format!("{},{},{}\n", k, n, d));
        }
        fs::write(root.join(name).join("golden/oracle_capacities.csv"), csv).unwrap();
        println!("oracle golden written for {}", name);
    }

    // Quasi-polynomial constants for the integral-polarisation domains.
    // Only for tightly-constrained (primitive) domains: at non-attained
    // residues the cap function is a shifted copy of the previous attained
    // value and the residue constant drifts, so no quasi-polynomial exists.
    for name in ["ball", "square", "tri21"] {
        let omega = domain(name);
        let y = ToricSurfaceData::normal_fan(&omega).unwrap();
        let a_sq_rat = capax::toric::polarisation_self_intersection(&y);
        let a_sq = a_sq_rat.to_integer().to_i64().unwrap();
        let k_dot_a = canonical_dot_polarisation(&y);
        // Enough x-range for three periods past any reasonable onset.
        let x_max = 6 * a_sq + 12;
        // Sequence long enough that c_k exceeds x_max.
        let mut k_hi = 32;
        let seq = loop {
            let seq = alg_capacities_toric(&y, k_hi, SolveOptions::default()).unwrap();
            if *seq.values().last().unwrap() > rat_i(x_max) {
                break seq;
            }
            k_hi *= 2;
        };
        let caps = cap_values(&seq, x_max).unwrap();
        let qp = fit_quasipolynomial(&caps, a_sq, &k_dot_a).unwrap();
        let mut csv = String::from("period,onset,gamma_num,gamma_den\n");
        for g in &qp.constants {
            let [n, d] = rat_to_pair(g).unwrap();
            csv.push_str(&format!("{},{},{},{}\n", qp.period, qp.onset, n, d));
        }
        fs::write(root.join(name).join("golden/quasipolynomial.csv"), csv).unwrap();
        println!("quasipolynomial golden written for {} (onset {})", name, qp.onset);
    }

    // Del Pezzo closure record: effective non-nef classes with their closure
    // results and step counts.
    let dp5_json = fs::read_to_string(root.join("dp5/input.json")).unwrap();
    let dp5 = read_surface_lattice(&dp5_json).unwrap();
    let starts: Vec<Vec<i64>> = vec![
        // 3 E1.
        vec![0, 3, 0, 0, 0],
        // (L - E1 - E2) + 3 E1.
        vec![1, 2, -1, 0, 0],
        // 2(L - E1 - E2) + 2(L - E3 - E4) + 4 E1.
        vec![4, 2, -2, -2, -2],
        // 2L + E1 - 2E2 (effective: 2(L - E1 - E2) + 3E1).
        vec![2, 1, -2, 0, 0],
    ];
    let mut csv = String::from("start;result;steps\n");
    for start in &starts {
        let d = DivisorClass::from_ints(start);
        let closure = iso_transform_closure(&dp5, &d, 64).unwrap();
        assert!(closure.converged, "closure must converge for {:?}", start);
        let result: Vec<String> = closure
            .result
            .coords
            .iter()
            .map(|c| c.to_integer().to_i64().unwrap().to_string())
            .collect();
        let start_s: Vec<String> = start.iter().map(|v| v.to_string()).collect();
        csv.push_str(&format!(
            "{};{};{}\n",
            start_s.join(","),
            result.join(","),
            closure.steps.len()
        ));
        println!(
            "dp5 closure {:?} -> {:?} in {} steps",
            start,
            result,
            closure.steps.len()
        );
    }
    fs::write(root.join("dp5/golden/iso_closure.csv"), csv).unwrap();
    println!("dp5 iso golden written");
}
