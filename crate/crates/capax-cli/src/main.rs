//! Command-line interface: one binary exposing the solvers and analyses with
//! stable machine-readable output. Exit codes: 0 success, 2 validation
//! error, 3 resource cap exceeded.

use capax::asymptotics;
use capax::domains::convex_weights;
use capax::ech;
use capax::error::Error;
use capax::fixtures;
use capax::rat::{rat_to_f64, Rat};
use capax::surfaces::{self, DivisorClass};
use capax::toric;
use capax::wire;
use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "capax", version, about = "Exact capacities of polarised surfaces and convex toric domains")]
struct Cli {
    /// Node budget for branch-and-bound searches.
    #[arg(long, global = true, default_value_t = ech::DEFAULT_NODE_CAP)]
    max_nodes: u64,
    /// Iteration cap for the isoparametric transform and weight recursion.
    #[arg(long, global = true, default_value_t = 64)]
    max_iter: usize,
    /// Worker threads for embarrassingly parallel scans (falls back to the
    /// CAPAX_THREADS environment variable, then 1). Results are identical
    /// for every thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct DomainArg {
    /// Domain JSON: {"vertices": [[[xn,xd],[yn,yd]], ...]} listing the
    /// non-axis boundary chain from the y-axis vertex to the x-axis vertex.
    #[arg(long)]
    domain: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// ECH capacities of a convex toric domain by exact lattice optimisation.
    Ech {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        kmax: usize,
        /// Also print optimal witness polygons as JSON lines.
        #[arg(long)]
        witnesses: bool,
        /// Cross-check every value against the brute-force oracle over the
        /// given box.
        #[arg(long, value_name = "BOX")]
        oracle_check: Option<i64>,
    },
    /// Algebraic capacities of a toric surface over nef integral divisors.
    AlgToric {
        /// Surface JSON: {"rays": [[x,y],...], "polarisation": [[n,d],...]}.
        #[arg(long, conflicts_with = "domain")]
        surface: Option<PathBuf>,
        /// Alternatively a domain file; its inner normal fan is used.
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        kmax: usize,
        /// Optimise over half-integer supports with floor-based counts.
        #[arg(long)]
        half_integer: bool,
    },
    /// Algebraic capacities of an abstract surface lattice.
    AlgSurface {
        /// Lattice JSON: {"rank", "gram", "K", "chiO", "effective_gens", ...}.
        #[arg(long)]
        surface: PathBuf,
        /// Polarisation coordinates, comma-separated (integers or n/d).
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        kmax: usize,
        /// Print all tied witnesses for the last k.
        #[arg(long)]
        witnesses: bool,
    },
    /// Weight sequence of a convex toric domain.
    Weights {
        #[command(flatten)]
        domain: DomainArg,
    },
    /// Cap function values by the dual lattice search.
    Cap {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        xmax: i64,
    },
    /// Gap and tightly-constrained verdict by all applicable routes.
    Gap {
        #[arg(long, conflicts_with_all = ["surface", "a"])]
        domain: Option<PathBuf>,
        #[arg(long, requires = "a")]
        surface: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
    },
    /// Error terms of a capacity sequence against the square-root law.
    Asymptotics {
        /// Capacity CSV (k,value_num,value_den).
        #[arg(long)]
        input: PathBuf,
        /// A^2 as n or n/d.
        #[arg(long, value_name = "ASQ")]
        asq: String,
        /// K . A as n or n/d, for predicted limits.
        #[arg(long, allow_hyphen_values = true)]
        k_dot_a: Option<String>,
        /// gap(Y, A) as n or n/d, for predicted limits.
        #[arg(long)]
        gap: Option<String>,
        /// Trailing window for the tail extrema.
        #[arg(long, default_value_t = 32)]
        window: usize,
    },
    /// Chamber decomposition of the big cone along a polarisation segment.
    Chambers {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// Basis indices i,j spanning the scan plane.
        #[arg(long, conflicts_with_all = ["g1", "g2"])]
        plane: Option<String>,
        /// First generator, comma-separated coordinates.
        #[arg(long, requires = "g2", allow_hyphen_values = true)]
        g1: Option<String>,
        /// Second generator.
        #[arg(long, allow_hyphen_values = true)]
        g2: Option<String>,
        /// Write an SVG sketch of the chamber rays.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Embedding obstructions between two domains.
    Obstruct {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        kmax: usize,
    },
    /// Brute-force oracle value.
    Oracle {
        #[command(flatten)]
        domain: DomainArg,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 6)]
        box_size: i64,
    },
    /// List bundled fixtures, or dump one.
    Fixtures {
        #[arg(long)]
        name: Option<String>,
    },
}

fn parse_rat(s: &str) -> Result<Rat, Error> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: i64 = n
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad rational: {}", s)))?;
    let d: i64 = d
        .parse()
        .map_err(|_| Error::InvalidArgument(format!("bad rational: {}", s)))?;
    wire::pair_to_rat(&[n, d])
}

fn parse_class(s: &str) -> Result<DivisorClass, Error> {
    let coords = s
        .split(',')
        .map(parse_rat)
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DivisorClass { coords })
}

fn rat_csv(q: &Rat) -> Result<String, Error> {
    let [n, d] = wire::rat_to_pair(q)?;
    Ok(format!("{},{}", n, d))
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {}", path.display(), e)))
}

fn run(cli: Cli) -> Result<(), Error> {
    let node_cap = cli.max_nodes;
    let threads = cli
        .threads
        .or_else(|| {
            std::env::var("CAPAX_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1)
        .max(1);
    match cli.cmd {
        Cmd::Ech {
            domain,
            kmax,
            witnesses,
            oracle_check,
        } => {
            let omega = wire::read_domain(&read(&domain.domain)?)?;
            let mut solver = ech::EchSolver::new(&omega);
            let seq = solver.capacities(kmax, node_cap)?;
            print!("{}", wire::sequence_to_csv(&seq)?);
            if witnesses {
                for k in 0..=kmax {
                    let rec = solver.capacity(k, node_cap)?;
                    let file = wire::WitnessFile {
                        k,
                        value: wire::rat_to_pair(&rec.value)?,
                        vertices: wire::polygon_vertices_wire(&rec.witness)?,
                    };
                    println!(
                        "{}",
                        serde_json::to_string(&file).map_err(|e| Error::Internal(e.to_string()))?
                    );
                }
            }
            if let Some(box_size) = oracle_check {
                let oracle = ech::brute_oracle_sweep(&omega, kmax, box_size, node_cap)?;
                for (k, v) in oracle.iter().enumerate() {
                    match v {
                        Some(v) if v == seq.get(k) => {}
                        Some(v) => {
                            return Err(Error::Internal(format!(
                                "oracle mismatch at k = {}: solver {} oracle {}",
                                k,
                                seq.get(k),
                                v
                            )))
                        }
                        None => eprintln!("# oracle box {} cannot reach k = {}", box_size, k),
                    }
                }
                println!("# oracle check passed (box {})", box_size);
            }
        }
        Cmd::AlgToric {
            surface,
            domain,
            kmax,
            half_integer,
        } => {
            let y = match (&surface, &domain) {
                (Some(path), None) => wire::read_toric_surface(&read(path)?)?,
                (None, Some(path)) => {
                    let omega = wire::read_domain(&read(path)?)?;
                    toric::ToricSurfaceData::normal_fan(&omega)?
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "pass exactly one of --surface or --domain".into(),
                    ))
                }
            };
            let opts = toric::SolveOptions { node_cap };
            let seq = if half_integer {
                toric::alg_capacities_toric_halfint(&y, kmax, opts)?
            } else {
                toric::alg_capacities_toric(&y, kmax, opts)?
            };
            print!("{}", wire::sequence_to_csv(&seq)?);
        }
        Cmd::AlgSurface {
            surface,
            a,
            kmax,
            witnesses,
        } => {
            let s = wire::read_surface_lattice(&read(&surface)?)?;
            let a = parse_class(&a)?;
            if a.coords.len() != s.rank() {
                return Err(Error::InvalidArgument(
                    "polarisation length must equal the rank".into(),
                ));
            }
            let seq = surfaces::alg_capacities_abstract(&s, &a, kmax, node_cap)?;
            print!("{}", wire::sequence_to_csv(&seq)?);
            if witnesses {
                let opt = surfaces::alg_capacity_abstract(&s, &a, kmax, node_cap)?;
                for w in &opt.witnesses {
                    println!("# witness k={}: {}", kmax, surfaces::render_class(&s, w));
                }
            }
        }
        Cmd::Weights { domain } => {
            let omega = wire::read_domain(&read(&domain.domain)?)?;
            let w = convex_weights(&omega, cli.max_iter);
            println!("entry,value_num,value_den");
            if let Some(h) = &w.head {
                println!("head,{}", rat_csv(h)?);
            }
            for (i, a) in w.weights.iter().enumerate() {
                println!("w{},{}", i, rat_csv(a)?);
            }
            if w.truncated {
                eprintln!("# warning: recursion truncated at depth {}", cli.max_iter);
            }
        }
        Cmd::Cap { domain, xmax } => {
            let omega = wire::read_domain(&read(&domain.domain)?)?;
            println!("x,cap");
            for x in 0..=xmax {
                let v = ech::cap_function(&omega, &capax::rat::rat_i(x), node_cap)?;
                println!("{},{}", x, v);
            }
        }
        Cmd::Gap { domain, surface, a } => {
            println!("route,value_num,value_den,tight");
            match (domain, surface, a) {
                (Some(path), None, None) => {
                    let omega = wire::read_domain(&read(&path)?)?;
                    let report =
                        asymptotics::is_tightly_constrained_domain(&omega, None, cli.max_iter)?;
                    for r in report.routes {
                        println!("{},{},{}", r.name, rat_csv(&r.gap_or_gcd)?, r.tight);
                    }
                }
                (None, Some(path), Some(a)) => {
                    let s = wire::read_surface_lattice(&read(&path)?)?;
                    let a = parse_class(&a)?;
                    let report = asymptotics::is_tightly_constrained_surface(&s, &a, None)?;
                    for r in report.routes {
                        println!("{},{},{}", r.name, rat_csv(&r.gap_or_gcd)?, r.tight);
                    }
                }
                _ => {
                    return Err(Error::InvalidArgument(
                        "pass --domain, or --surface with --a".into(),
                    ))
                }
            }
        }
        Cmd::Asymptotics {
            input,
            asq,
            k_dot_a,
            gap,
            window,
        } => {
            let seq = wire::sequence_from_csv(&read(&input)?, ech::Source::Oracle)?;
            let a_sq = parse_rat(&asq)?;
            let (limsup, liminf) = match (&k_dot_a, &gap) {
                (Some(ka), Some(g)) => {
                    asymptotics::predicted_limits_surface(&parse_rat(g)?, &parse_rat(ka)?)
                }
                _ => (
                    Rat::from_integer(BigInt::from(0)),
                    Rat::from_integer(BigInt::from(0)),
                ),
            };
            let have_limits = k_dot_a.is_some() && gap.is_some();
            let report =
                asymptotics::error_terms(&seq, &a_sq, window.min(seq.len()), limsup, liminf)?;
            println!("k,c_num,c_den,e_k");
            for row in &report.rows {
                println!("{},{},{:.12}", row.k, rat_csv(&row.capacity)?, row.error);
            }
            println!("# tail_max {:.12}", report.tail_max);
            println!("# tail_min {:.12}", report.tail_min);
            if have_limits {
                println!(
                    "# predicted_limsup {:.12}",
                    rat_to_f64(&report.predicted_limsup)
                );
                println!(
                    "# predicted_liminf {:.12}",
                    rat_to_f64(&report.predicted_liminf)
                );
            }
        }
        Cmd::Chambers {
            surface,
            k,
            resolution,
            plane,
            g1,
            g2,
            svg,
        } => {
            let s = wire::read_surface_lattice(&read(&surface)?)?;
            let (g1, g2) = match (plane, g1, g2) {
                (Some(p), None, None) => {
                    let idx: Vec<usize> = p
                        .split(',')
                        .map(|v| v.trim().parse())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| Error::InvalidArgument("bad --plane indices".into()))?;
                    if idx.len() != 2 || idx[0] >= s.rank() || idx[1] >= s.rank() {
                        return Err(Error::InvalidArgument(
                            "--plane needs two basis indices below the rank".into(),
                        ));
                    }
                    let mut a = DivisorClass::zero(s.rank());
                    a.coords[idx[0]] = capax::rat::rat_i(1);
                    let mut b = DivisorClass::zero(s.rank());
                    b.coords[idx[1]] = capax::rat::rat_i(1);
                    (a, b)
                }
                (None, Some(a), Some(b)) => (parse_class(&a)?, parse_class(&b)?),
                _ => {
                    return Err(Error::InvalidArgument(
                        "pass --plane i,j or both --g1 and --g2".into(),
                    ))
                }
            };
            let map =
                surfaces::chamber_scan_parallel(&s, &g1, &g2, k, resolution, node_cap, threads)?;
            println!("t_num,t_den,value_num,value_den,witnesses");
            for sample in &map.samples {
                match (&sample.outcome, &sample.note) {
                    (Some(out), _) => {
                        let labels: Vec<String> = out
                            .witnesses
                            .iter()
                            .map(|w| surfaces::render_class(&s, w))
                            .collect();
                        println!(
                            "{},{},{}",
                            rat_csv(&sample.t)?,
                            rat_csv(&out.value)?,
                            labels.join("|")
                        );
                    }
                    (None, Some(note)) => {
                        println!("{},,,{}", rat_csv(&sample.t)?, note);
                    }
                    (None, None) => unreachable!("sample has an outcome or a note"),
                }
            }
            for wall in &map.walls {
                println!("# wall,{}", rat_csv(wall)?);
            }
            if let Some(path) = svg {
                std::fs::write(&path, chambers_svg(&s, &map))
                    .map_err(|e| Error::InvalidArgument(format!("cannot write SVG: {}", e)))?;
                eprintln!("# svg written to {}", path.display());
            }
        }
        Cmd::Obstruct { a, b, kmax } => {
            let da = wire::read_domain(&read(&a)?)?;
            let db = wire::read_domain(&read(&b)?)?;
            let opts = toric::SolveOptions { node_cap };
            let ya = toric::ToricSurfaceData::normal_fan(&da)?;
            let yb = toric::ToricSurfaceData::normal_fan(&db)?;
            let sa = toric::alg_capacities_toric(&ya, kmax, opts)?;
            let sb = toric::alg_capacities_toric(&yb, kmax, opts)?;
            let report = asymptotics::obstruct(&da, &db, &sa, &sb, kmax)?;
            println!("direction,verdict,detail");
            let fmt = |v: &asymptotics::Verdict| -> (String, String) {
                match v {
                    asymptotics::Verdict::Obstructed(d) => ("obstructed".into(), d.clone()),
                    asymptotics::Verdict::NoObstructionFound => {
                        ("no obstruction found".into(), String::new())
                    }
                }
            };
            let (v, d) = fmt(&report.forward);
            println!("a_into_b,{},{}", v, d);
            let (v, d) = fmt(&report.backward);
            println!("b_into_a,{},{}", v, d);
            if let Some((pf, pb)) = &report.perimeter_verdicts {
                let (v, d) = fmt(pf);
                println!("a_into_b_perimeter,{},{}", v, d);
                let (v, d) = fmt(pb);
                println!("b_into_a_perimeter,{},{}", v, d);
            }
        }
        Cmd::Oracle {
            domain,
            k,
            box_size,
        } => {
            let omega = wire::read_domain(&read(&domain.domain)?)?;
            let value = ech::brute_oracle(&omega, k, box_size, node_cap)?;
            println!("k,value_num,value_den");
            println!("{},{}", k, rat_csv(&value)?);
        }
        Cmd::Fixtures { name } => match name {
            None => {
                println!("name,kind");
                for n in fixtures::registry() {
                    let f = fixtures::load_fixture(n)?;
                    let kind = match f.data {
                        fixtures::FixtureData::Domain(_) => "domain",
                        fixtures::FixtureData::Lattice(_) => "lattice",
                    };
                    println!("{},{}", n, kind);
                }
            }
            Some(n) => {
                let f = fixtures::load_fixture(&n)?;
                println!("{}", f.provenance);
                if let Some(seq) = &f.oracle_capacities {
                    print!("{}", wire::sequence_to_csv(seq)?);
                }
            }
        },
    }
    Ok(())
}

/// Minimal SVG of the chamber rays: the scan segment drawn as a fan of rays
/// from the origin, walls highlighted.
fn chambers_svg(s: &capax::surfaces::SurfaceLattice, map: &capax::surfaces::ChamberMap) -> String {
    let mut out = String::from(
        "<svg xmlns='http://www.w3.org/2000/svg' width='400' height='400' viewBox='-10 -10 420 420'>\n",
    );
    out.push_str("<g stroke='black' fill='none'>\n");
    let ray = |t: f64| -> (f64, f64) {
        // Sweep a quarter turn as t runs over [0, 1].
        let ang = std::f64::consts::FRAC_PI_2 * (1.0 - t);
        (380.0 * ang.cos(), 380.0 * ang.sin())
    };
    for region in &map.chambers {
        let t_mid = (rat_to_f64(&region.t_first) + rat_to_f64(&region.t_last)) / 2.0;
        let (x, y) = ray(t_mid);
        let label: Vec<String> = region
            .witnesses
            .iter()
            .map(|w| capax::surfaces::render_class(s, w))
            .collect();
        out.push_str(&format!(
            "<line x1='0' y1='400' x2='{:.1}' y2='{:.1}' stroke='gray'/>\n",
            x,
            400.0 - y
        ));
        out.push_str(&format!(
            "<text x='{:.1}' y='{:.1}' font-size='12' stroke='none' fill='black'>{}</text>\n",
            0.55 * x,
            400.0 - 0.55 * y,
            label.join("|")
        ));
    }
    for wall in &map.walls {
        let (x, y) = ray(rat_to_f64(wall));
        out.push_str(&format!(
            "<line x1='0' y1='400' x2='{:.1}' y2='{:.1}' stroke='red'/>\n",
            x,
            400.0 - y
        ));
    }
    out.push_str("</g>\n</svg>\n");
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            match e {
                Error::ResourceLimit(_) => ExitCode::from(3),
                Error::Internal(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
