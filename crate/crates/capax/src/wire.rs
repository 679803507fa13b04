//! Stable machine-readable formats. Rationals are always `[num, den]`
//! integer pairs, never decimal strings, so golden files compare bit-exactly.

use crate::domains::{parse_domain, ConvexToricDomain};
use crate::ech::CapacitySequence;
use crate::error::{Error, Result};
use crate::geom::{RatPoint, RatPolygon};
use crate::rat::Rat;
use crate::surfaces::SurfaceLattice;
use crate::toric::ToricSurfaceData;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

pub type RatPair = [i64; 2];

pub fn rat_to_pair(q: &Rat) -> Result<RatPair> {
    let n = q.numer().to_i64().ok_or_else(|| {
        Error::InvalidArgument("rational numerator exceeds the wire range".into())
    })?;
    let d = q.denom().to_i64().ok_or_else(|| {
        Error::InvalidArgument("rational denominator exceeds the wire range".into())
    })?;
    Ok([n, d])
}

pub fn pair_to_rat(p: &RatPair) -> Result<Rat> {
    if p[1] == 0 {
        return Err(Error::InvalidArgument("zero denominator".into()));
    }
    Ok(Rat::new(BigInt::from(p[0]), BigInt::from(p[1])))
}

/// Domain file: the non-axis boundary chain from the y-axis vertex to the
/// x-axis vertex; axis edges implicit.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DomainFile {
    pub vertices: Vec<[RatPair; 2]>,
}

impl DomainFile {
    pub fn from_domain(d: &ConvexToricDomain) -> Result<DomainFile> {
        let vertices = d
            .chain()
            .iter()
            .map(|p| Ok([rat_to_pair(&p.x)?, rat_to_pair(&p.y)?]))
            .collect::<Result<Vec<_>>>()?;
        Ok(DomainFile { vertices })
    }

    pub fn to_domain(&self) -> Result<ConvexToricDomain> {
        let pts = self
            .vertices
            .iter()
            .map(|[x, y]| Ok(RatPoint::new(pair_to_rat(x)?, pair_to_rat(y)?)))
            .collect::<Result<Vec<_>>>()?;
        parse_domain(&pts)
    }
}

pub fn read_domain(json: &str) -> Result<ConvexToricDomain> {
    let file: DomainFile = serde_json::from_str(json)
        .map_err(|e| Error::InvalidDomain(format!("bad domain JSON: {}", e)))?;
    file.to_domain()
}

pub fn write_domain(d: &ConvexToricDomain) -> Result<String> {
    let file = DomainFile::from_domain(d)?;
    serde_json::to_string_pretty(&file).map_err(|e| Error::Internal(e.to_string()))
}

/// Toric surface file: fan rays plus polarisation supports.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ToricSurfaceFile {
    pub rays: Vec<[i64; 2]>,
    pub polarisation: Vec<RatPair>,
}

pub fn read_toric_surface(json: &str) -> Result<ToricSurfaceData> {
    let file: ToricSurfaceFile = serde_json::from_str(json)
        .map_err(|e| Error::InvalidSurface(format!("bad surface JSON: {}", e)))?;
    let rays = file.rays.iter().map(|r| (r[0], r[1])).collect();
    let polarisation = file
        .polarisation
        .iter()
        .map(pair_to_rat)
        .collect::<Result<Vec<_>>>()?;
    ToricSurfaceData::new(rays, polarisation)
}

pub fn write_toric_surface(y: &ToricSurfaceData) -> Result<String> {
    let file = ToricSurfaceFile {
        rays: y.rays().iter().map(|&(x, yv)| [x, yv]).collect(),
        polarisation: y
            .polarisation()
            .iter()
            .map(rat_to_pair)
            .collect::<Result<Vec<_>>>()?,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::Internal(e.to_string()))
}

/// Abstract surface file: intersection lattice data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceLatticeFile {
    pub rank: usize,
    pub gram: Vec<Vec<i64>>,
    #[serde(rename = "K")]
    pub k: Vec<i64>,
    #[serde(rename = "chiO")]
    pub chi_o: i64,
    pub effective_gens: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nef_gens: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

pub fn read_surface_lattice(json: &str) -> Result<SurfaceLattice> {
    let file: SurfaceLatticeFile = serde_json::from_str(json)
        .map_err(|e| Error::InvalidSurface(format!("bad lattice JSON: {}", e)))?;
    if file.gram.len() != file.rank {
        return Err(Error::InvalidSurface(
            "rank does not match the Gram matrix".into(),
        ));
    }
    SurfaceLattice::new(
        file.gram,
        file.k,
        file.chi_o,
        file.effective_gens,
        file.nef_gens,
        file.labels,
    )
}

/// Capacity CSV: `k,value_num,value_den` rows with a header.
pub fn sequence_to_csv(seq: &CapacitySequence) -> Result<String> {
    let mut out = String::from("k,value_num,value_den\n");
    for (k, v) in seq.values().iter().enumerate() {
        let [n, d] = rat_to_pair(v)?;
        out.push_str(&format!("{},{},{}\n", k, n, d));
    }
    Ok(out)
}

pub fn sequence_from_csv(csv: &str, source: crate::ech::Source) -> Result<CapacitySequence> {
    let mut values = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with('k')) {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::MalformedFixture(format!("bad CSV row: {}", line)));
        }
        let k: usize = parts[0]
            .parse()
            .map_err(|_| Error::MalformedFixture(format!("bad k: {}", parts[0])))?;
        if k != values.len() {
            return Err(Error::MalformedFixture("CSV rows out of order".into()));
        }
        let n: i64 = parts[1]
            .parse()
            .map_err(|_| Error::MalformedFixture(format!("bad numerator: {}", parts[1])))?;
        let d: i64 = parts[2]
            .parse()
            .map_err(|_| Error::MalformedFixture(format!("bad denominator: {}", parts[2])))?;
        values.push(pair_to_rat(&[n, d])?);
    }
    CapacitySequence::new(values, source)
}

/// Witness polygon JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub k: usize,
    pub value: RatPair,
    pub vertices: Vec<[RatPair; 2]>,
}

pub fn polygon_vertices_wire(p: &RatPolygon) -> Result<Vec<[RatPair; 2]>> {
    p.vertices()
        .iter()
        .map(|v| Ok([rat_to_pair(&v.x)?, rat_to_pair(&v.y)?]))
        .collect()
}
