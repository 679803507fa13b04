//! Curated fixtures with golden files.
//!
//! Inputs and golden outputs live under `corpus/<name>/` and are embedded at
//! compile time. Golden capacity prefixes were produced by the brute-force
//! oracle before the main solvers existed and are never regenerated by them;
//! each value's provenance is spelled out in the fixture's `PROVENANCE.md`.

use crate::domains::ConvexToricDomain;
use crate::ech::{CapacitySequence, Source};
use crate::error::{Error, Result};
use crate::surfaces::SurfaceLattice;
use crate::wire;

#[derive(Clone, Debug)]
pub enum FixtureData {
    Domain(ConvexToricDomain),
    Lattice(SurfaceLattice),
}

#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub data: FixtureData,
    /// Golden oracle capacities (domains only), with the box size used.
    pub oracle_capacities: Option<CapacitySequence>,
    pub oracle_box: Option<i64>,
    pub provenance: &'static str,
}

struct RawFixture {
    name: &'static str,
    input: &'static str,
    is_domain: bool,
    oracle_csv: Option<&'static str>,
    oracle_box: Option<i64>,
    provenance: &'static str,
}

static RAW: &[RawFixture] = &[
    RawFixture {
        name: "ball",
        input: include_str!("../corpus/ball/input.json"),
        is_domain: true,
        oracle_csv: Some(include_str!("../corpus/ball/golden/oracle_capacities.csv")),
        oracle_box: Some(6),
        provenance: include_str!("../corpus/ball/PROVENANCE.md"),
    },
    RawFixture {
        name: "ball2",
        input: include_str!("../corpus/ball2/input.json"),
        is_domain: true,
        oracle_csv: Some(include_str!("../corpus/ball2/golden/oracle_capacities.csv")),
        oracle_box: Some(6),
        provenance: include_str!("../corpus/ball2/PROVENANCE.md"),
    },
    RawFixture {
        name: "square",
        input: include_str!("../corpus/square/input.json"),
        is_domain: true,
        oracle_csv: Some(include_str!("../corpus/square/golden/oracle_capacities.csv")),
        oracle_box: Some(6),
        provenance: include_str!("../corpus/square/PROVENANCE.md"),
    },
    RawFixture {
        name: "tri21",
        input: include_str!("../corpus/tri21/input.json"),
        is_domain: true,
        oracle_csv: Some(include_str!("../corpus/tri21/golden/oracle_capacities.csv")),
        oracle_box: Some(6),
        provenance: include_str!("../corpus/tri21/PROVENANCE.md"),
    },
    RawFixture {
        name: "fig3a",
        input: include_str!("../corpus/fig3a/input.json"),
        is_domain: true,
        oracle_csv: Some(include_str!("../corpus/fig3a/golden/oracle_capacities.csv")),
        oracle_box: Some(6),
        provenance: include_str!("../corpus/fig3a/PROVENANCE.md"),
    },
    RawFixture {
        name: "p2",
        input: include_str!("../corpus/p2/input.json"),
        is_domain: false,
        oracle_csv: None,
        oracle_box: None,
        provenance: include_str!("../corpus/p2/PROVENANCE.md"),
    },
    RawFixture {
        name: "f1",
        input: include_str!("../corpus/f1/input.json"),
        is_domain: false,
        oracle_csv: None,
        oracle_box: None,
        provenance: include_str!("../corpus/f1/PROVENANCE.md"),
    },
    RawFixture {
        name: "dp5",
        input: include_str!("../corpus/dp5/input.json"),
        is_domain: false,
        oracle_csv: None,
        oracle_box: None,
        provenance: include_str!("../corpus/dp5/PROVENANCE.md"),
    },
];

/// Names of all registered fixtures.
pub fn registry() -> Vec<&'static str> {
    RAW.iter().map(|r| r.name).collect()
}

pub fn load_fixture(name: &str) -> Result<Fixture> {
    let raw = RAW
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::UnknownFixture(name.into()))?;
    let data = if raw.is_domain {
        FixtureData::Domain(wire::read_domain(raw.input)?)
    } else {
        FixtureData::Lattice(wire::read_surface_lattice(raw.input)?)
    };
    let oracle_capacities = match raw.oracle_csv {
        Some(csv) => Some(wire::sequence_from_csv(csv, Source::Oracle)?),
        None => None,
    };
    Ok(Fixture {
        name: raw.name,
        data,
        oracle_capacities,
        oracle_box: raw.oracle_box,
        provenance: raw.provenance,
    })
}

/// The five corpus domains.
pub fn corpus_domains() -> Result<Vec<(&'static str, ConvexToricDomain)>> {
    let mut out = Vec::new();
    for name in ["ball", "ball2", "square", "tri21", "fig3a"] {
        match load_fixture(name)?.data {
            FixtureData::Domain(d) => out.push((name, d)),
            FixtureData::Lattice(_) => unreachable!("domain fixture"),
        }
    }
    Ok(out)
}

/// Golden quasi-polynomial constants for a domain fixture, if recorded:
/// `(period, onset, gammas)`.
pub fn golden_quasipolynomial(name: &str) -> Option<(i64, i64, Vec<crate::rat::Rat>)> {
    let csv = match name {
        "ball" => include_str!("../corpus/ball/golden/quasipolynomial.csv"),
        "square" => include_str!("../corpus/square/golden/quasipolynomial.csv"),
        "tri21" => include_str!("../corpus/tri21/golden/quasipolynomial.csv"),
        _ => return None,
    };
    let mut period = 0i64;
    let mut onset = 0i64;
    let mut gammas = Vec::new();
    for line in csv.lines().skip(1) {
        let parts: Vec<&str> = line.trim().split(',').collect();
        if parts.len() != 4 {
            continue;
        }
        period = parts[0].parse().ok()?;
        onset = parts[1].parse().ok()?;
        let n: i64 = parts[2].parse().ok()?;
        let d: i64 = parts[3].parse().ok()?;
        gammas.push(wire::pair_to_rat(&[n, d]).ok()?);
    }
    Some((period, onset, gammas))
}

/// Golden isoparametric closure record for the degree-five del Pezzo fixture:
/// `(start class, expected result class, expected step count)`.
pub fn golden_dp5_iso() -> Vec<(Vec<i64>, Vec<i64>, usize)> {
    let csv = include_str!("../corpus/dp5/golden/iso_closure.csv");
    let mut out = Vec::new();
    for line in csv.lines().skip(1) {
        let parts: Vec<&str> = line.trim().split(';').collect();
        if parts.len() != 3 {
            continue;
        }
        let parse_vec = |s: &str| -> Vec<i64> {
            s.split(',').map(|x| x.trim().parse().unwrap()).collect()
        };
        out.push((
            parse_vec(parts[0]),
            parse_vec(parts[1]),
            parts[2].trim().parse().unwrap(),
        ));
    }
    out
}
