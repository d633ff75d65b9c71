use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bcontract::apartment::CellComplex;
use bcontract::cone::{cone_hull, is_acyclic, support_subcomplex};
use bcontract::config::{standard_complex, Config};
use bcontract::contraction::{
    ball_region, build_contraction, coefficient_bound_sweep, dump_contraction, load_contraction, verify_contraction,
    BuildOptions, ContractionDump,
};
use bcontract::moy_prasad::{index_set, lemma_mp1_check, lemma_mp2_witness, mp1_random_sweep};
use bcontract::par::{self, Exec};
use bcontract::rational::{QVec, Q};
use bcontract::render::{render_svg, Overlay};
use bcontract::roots::{build_root_system, RootType};
use bcontract::sl2::ss::{exactness_report, Representation};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

#[derive(Parser)]
#[command(name = "bcontract", version, about = "Cone-supported contractions on affine apartments")]
struct Cli {
    /// Worker threads (0 = all cores, 1 = sequential).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Seed for randomized sweeps.
    #[arg(long, global = true, default_value_t = 20240601)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the refined complex and check ∂∂ = 0 and the Euler characteristic.
    Apartment {
        #[arg(long)]
        config: PathBuf,
        /// Write the complex dump here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a contraction on a ball around the base vertex.
    Contract {
        #[arg(long)]
        config: PathBuf,
        /// Region radius in root units; defaults to the whole window.
        #[arg(long)]
        region_radius: Option<Q>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check identity, support and equivariance of a stored contraction.
    Verify {
        #[arg(long)]
        chains: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Largest coefficient of c over growing windows.
    Bounds {
        #[arg(long = "type")]
        root_type: RootType,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
        radii: Vec<i64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Support subcomplex of the cone over a cell.
    Support {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sigma: String,
    },
    /// Moy-Prasad threshold queries.
    Mp {
        #[command(subcommand)]
        cmd: MpCmd,
    },
    /// Checks on the Bruhat-Tits tree of SL2.
    Sl2 {
        #[command(subcommand)]
        cmd: Sl2Cmd,
    },
    /// SVG of the apartment with the cone over σ, its support and c(σ).
    Render {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with_all = ["root_type", "m", "radius"])]
    config: Option<PathBuf>,
    #[arg(long = "type")]
    root_type: Option<RootType>,
    #[arg(long)]
    m: Option<u32>,
    /// Window radius in root units.
    #[arg(long = "R")]
    radius: Option<Q>,
}

#[derive(Subcommand)]
enum MpCmd {
    /// Thresholds of G_{x,r} (or G_{x,r,+} with --strict).
    Index {
        #[arg(long = "type")]
        root_type: RootType,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        r: Q,
        #[arg(long)]
        strict: bool,
    },
    /// G_{z,r} ⊆ G_{x,r} G_{y,r} at threshold level, z on [x, y].
    Mp1 {
        #[arg(long = "type")]
        root_type: RootType,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long)]
        r: Q,
        #[arg(long)]
        strict: bool,
    },
    /// Seeded random MP1 instances.
    Sweep {
        #[arg(long = "type")]
        root_type: RootType,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Witness for K_τ ⊆ K_x K_σ at the configured base vertex and depth.
    Mp2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        sigma: String,
        #[arg(long)]
        tau: String,
    },
}

#[derive(Subcommand)]
enum Sl2Cmd {
    /// Homology of the invariant coefficient-system complex on a tree ball.
    Exactness {
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long = "R", default_value_t = 1)]
        radius: u32,
        #[arg(long, default_value = "3/2")]
        r: Q,
        /// Congruence level, or "auto".
        #[arg(long = "N", default_value = "auto")]
        level: String,
        #[arg(long, default_value = "perm")]
        rep: Representation,
    },
}

#[derive(Debug)]
enum Failure {
    Core(bcontract::Error),
    Io(PathBuf, std::io::Error),
    Json(String),
    Usage(String),
}

impl From<bcontract::Error> for Failure {
    fn from(e: bcontract::Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Failure::Json(e) => write!(f, "bad JSON: {e}"),
            Failure::Usage(e) => f.write_str(e),
        }
    }
}

type Outcome = Result<bool, Failure>;

/// Stored by `contract`, read by `verify`.
#[derive(Serialize, Deserialize)]
struct ChainsFile {
    config: Config,
    region_radius: Option<Q>,
    contraction: ContractionDump,
}

fn exec_for(jobs: usize) -> Exec {
    if jobs == 1 {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn parse_point(s: &str) -> Result<QVec, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<Q>().map_err(Failure::Core))
        .collect()
}

fn write_file(path: &Path, data: &str) -> Result<(), Failure> {
    fs::write(path, data).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn print_json<T: Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("report serializes"));
}

fn region_for(cx: &CellComplex, v0: &[Q], radius: Option<Q>) -> Option<BTreeSet<usize>> {
    radius.map(|r| ball_region(cx, v0, r))
}

#[derive(Serialize)]
struct ApartmentReport {
    f_vector: Vec<usize>,
    euler_characteristic: i64,
    boundary_squared_zero: bool,
}

fn apartment(config: &Path, out: Option<&Path>) -> Outcome {
    let cfg = Config::load(config)?;
    let cx = cfg.build_complex()?;
    let mut dd = true;
    for c in &cx.cells {
        let b = cx.boundary(c.index)?;
        dd &= cx.boundary_chain(&b).is_zero();
    }
    let report = ApartmentReport {
        f_vector: cx.f_vector(),
        euler_characteristic: cx.euler_characteristic(),
        boundary_squared_zero: dd,
    };
    if let Some(out) = out {
        write_file(out, &serde_json::to_string_pretty(&cx.dump()).expect("dump serializes"))?;
    }
    print_json(&report);
    Ok(dd && report.euler_characteristic == 1)
}

fn contract(config: &Path, region_radius: Option<Q>, out: &Path, exec: Exec) -> Outcome {
    let cfg = Config::load(config)?;
    let cx = cfg.build_complex()?;
    let region = region_for(&cx, &cfg.base_vertex, region_radius);
    let c = build_contraction(&cx, &cfg.base_vertex, region.as_ref(), BuildOptions { exec, ..Default::default() })?;
    let file = ChainsFile { config: cfg, region_radius, contraction: dump_contraction(&cx, &c) };
    write_file(out, &serde_json::to_string_pretty(&file).expect("chains serialize"))?;
    eprintln!("wrote c(σ) for {} cells, max |coefficient| {}", c.maps.len(), c.max_coefficient());
    Ok(true)
}

fn verify(chains: &Path, report_path: Option<&Path>, exec: Exec) -> Outcome {
    let text = fs::read_to_string(chains).map_err(|e| Failure::Io(chains.to_path_buf(), e))?;
    let file: ChainsFile = serde_json::from_str(&text).map_err(|e| Failure::Json(e.to_string()))?;
    file.config.validate()?;
    let cx = file.config.build_complex()?;
    let c = load_contraction(&cx, &file.contraction)?;
    let report = verify_contraction(&c, &cx, &c.region(), exec);
    if let Some(p) = report_path {
        write_file(p, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    print_json(&report);
    Ok(report.passed())
}

fn bounds(root_type: RootType, m: u32, radii: &[i64], csv: Option<&Path>, exec: Exec) -> Outcome {
    let rows = coefficient_bound_sweep(root_type, m, radii, BuildOptions { exec, ..Default::default() });
    let mut table = String::from("type,m,radius,cells,max_coefficient,complete,note\n");
    for r in &rows {
        table.push_str(&format!(
            "{root_type},{m},{},{},{},{},{}\n",
            r.radius,
            r.cells,
            r.max_coefficient,
            r.complete,
            r.note.replace(',', ";")
        ));
    }
    match csv {
        Some(p) => write_file(p, &table)?,
        None => print!("{table}"),
    }
    Ok(rows.iter().all(|r| r.complete))
}

#[derive(Serialize)]
struct SupportReport {
    sigma: String,
    cells: Vec<String>,
    acyclic: bool,
}

fn support(config: &Path, sigma: &str) -> Outcome {
    let cfg = Config::load(config)?;
    let cx = cfg.build_complex()?;
    let s = cx.find_by_id(sigma)?;
    let cells = support_subcomplex(&cfg.base_vertex, &cx, s)?;
    let acyclic = is_acyclic(&cells, &cx)?;
    print_json(&SupportReport { sigma: cx.cell(s).id(), cells: cells.iter().map(|&i| cx.cell(i).id()).collect(), acyclic });
    Ok(acyclic)
}

#[derive(Serialize)]
struct SweepReport {
    root_type: RootType,
    seed: u64,
    count: usize,
    holds: usize,
}

fn mp(cmd: MpCmd, seed: u64, exec: Exec) -> Outcome {
    match cmd {
        MpCmd::Index { root_type, x, r, strict } => {
            let sys = build_root_system(root_type);
            print_json(&index_set(&sys, &parse_point(&x)?, r, strict)?);
            Ok(true)
        }
        MpCmd::Mp1 { root_type, x, y, z, r, strict } => {
            let sys = build_root_system(root_type);
            let out = lemma_mp1_check(&sys, &parse_point(&x)?, &parse_point(&y)?, &parse_point(&z)?, r, strict)?;
            print_json(&out);
            Ok(out.holds)
        }
        MpCmd::Sweep { root_type, count } => {
            let sys = build_root_system(root_type);
            let holds = mp1_random_sweep(&sys, count, seed, exec)?;
            print_json(&SweepReport { root_type, seed, count, holds });
            Ok(holds == count)
        }
        MpCmd::Mp2 { config, sigma, tau } => {
            let cfg = Config::load(&config)?;
            let cx = cfg.build_complex()?;
            let (s, t) = (cx.find_by_id(&sigma)?, cx.find_by_id(&tau)?);
            let w = lemma_mp2_witness(&cx, &cfg.base_vertex, s, t, cfg.r)?;
            print_json(&w);
            Ok(w.is_some_and(|w| w.mp1 && w.monotone))
        }
    }
}

#[derive(Serialize)]
struct Sl2Json {
    homology: [usize; 3],
    dims: Sl2Dims,
    p: u64,
    radius: u32,
    r: String,
    level: u32,
    representation: String,
    dim_v: usize,
    projector_idempotent: bool,
    projector_commutes: bool,
    coset_checks: &'static str,
    iwahori_checks: &'static str,
}

#[derive(Serialize)]
struct Sl2Dims {
    complex: [usize; 3],
    invariant: [usize; 3],
}

fn verdict(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn sl2(cmd: Sl2Cmd, exec: Exec) -> Outcome {
    let Sl2Cmd::Exactness { p, radius, r, level, rep } = cmd;
    let level = match level.as_str() {
        "auto" => None,
        n => Some(n.parse::<u32>().map_err(|_| Failure::Usage(format!("--N expects a level or auto, got {n:?}")))?),
    };
    let rep_ = exactness_report(p, radius, r, level, rep, exec)?;
    let passed = rep_.passed();
    print_json(&Sl2Json {
        homology: rep_.homology,
        dims: Sl2Dims { complex: rep_.dims, invariant: rep_.invariant_dims },
        p,
        radius,
        r: rep_.r,
        level: rep_.level,
        representation: rep.to_string(),
        dim_v: rep_.dim_v,
        projector_idempotent: rep_.projector_idempotent,
        projector_commutes: rep_.projector_commutes,
        coset_checks: verdict(rep_.coset_checks),
        iwahori_checks: verdict(rep_.iwahori_checks),
    });
    Ok(passed)
}

fn render(source: Source, sigma: Option<String>, out: Option<&Path>, exec: Exec) -> Outcome {
    let (cx, v0) = match (&source.config, source.root_type) {
        (Some(path), _) => {
            let cfg = Config::load(path)?;
            (cfg.build_complex()?, cfg.base_vertex)
        }
        (None, Some(t)) => {
            let v0 = vec![Q::ZERO; t.rank()];
            let radius = source.radius.unwrap_or(Q::int(3));
            (standard_complex(t, source.m.unwrap_or(1), &v0, radius)?, v0)
        }
        (None, None) => return Err(Failure::Usage("render needs --config or --type".into())),
    };
    let mut overlay = Overlay { base: Some(v0.clone()), ..Default::default() };
    if let Some(id) = sigma {
        let s = cx.find_by_id(&id)?;
        let seed: BTreeSet<usize> = [s].into();
        let c = build_contraction(&cx, &v0, Some(&seed), BuildOptions { exec, ..Default::default() })?;
        overlay.sigma = Some(s);
        overlay.hull = cone_hull(&v0, &cx, s).vertices;
        overlay.support = support_subcomplex(&v0, &cx, s)?;
        overlay.chain = c.maps.get(&s).cloned();
    }
    let svg = render_svg(&cx, &overlay)?;
    match out {
        Some(p) => write_file(p, &svg)?,
        None => print!("{svg}"),
    }
    Ok(true)
}

fn run(cli: Cli) -> Outcome {
    let exec = exec_for(cli.jobs);
    let seed = cli.seed;
    par::with_jobs(cli.jobs, move || match cli.cmd {
        Cmd::Apartment { config, out } => apartment(&config, out.as_deref()),
        Cmd::Contract { config, region_radius, out } => contract(&config, region_radius, &out, exec),
        Cmd::Verify { chains, report } => verify(&chains, report.as_deref(), exec),
        Cmd::Bounds { root_type, m, radii, csv } => bounds(root_type, m, &radii, csv.as_deref(), exec),
        Cmd::Support { config, sigma } => support(&config, &sigma),
        Cmd::Mp { cmd } => mp(cmd, seed, exec),
        Cmd::Sl2 { cmd } => sl2(cmd, exec),
        Cmd::Render { source, sigma, out } => render(source, sigma, out.as_deref(), exec),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
