//! `ssgraph`: build, verify and analyse supersingular isogeny graphs with
//! level structure.
//!
//! Exit codes: 0 success, 1 a checked property failed, 2 usage error,
//! 3 internal invariant breach.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ssgraph::arith::{is_prime, primes_in};
use ssgraph::components::{component_split, components_expected_isomorphic, ComponentReport};
use ssgraph::export::{from_json, to_csv, to_dot, to_json};
use ssgraph::graph::{validate_params, GraphError, IsogenyGraph, Workspace};
use ssgraph::level::{Family, LevelError, LevelSubgroup, Mat};
use ssgraph::modular::{check_dimensions, DimensionReport};
use ssgraph::operators::{component_orbits, IsomorphismReport};
use ssgraph::spectral::{eigenvalues, eta_row, gap_report, km_report, EtaRow, GapReport, KmReport, Spectrum};
use ssgraph::verify::verify;

#[derive(Parser)]
#[command(name = "ssgraph", version, about = "Supersingular isogeny graphs with level structure")]
struct Cli {
    /// File of `key = value` lines mirroring the long flags; flags given on
    /// the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random choice (torsion bases, curve enumeration).
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Group {
    /// Level.
    #[arg(long = "N", default_value_t = 1)]
    n: u32,
    /// Named subgroup: trivial, full, borel, split_cartan, nonsplit_cartan,
    /// torsion_point.
    #[arg(long = "H", default_value = "trivial")]
    h: String,
    /// Generators of H mod N, four entries (a b; c d) per matrix, e.g.
    /// "5,6,2,1;1,2,0,1". Overrides --H.
    #[arg(long = "H-gens")]
    h_gens: Option<String>,
}

#[derive(Args, Clone)]
struct Level {
    /// Characteristic.
    #[arg(long)]
    p: Option<u64>,
    /// Isogeny degree.
    #[arg(long = "l")]
    l: Option<u64>,
    #[command(flatten)]
    group: Group,
}

#[derive(Args, Clone)]
struct Source {
    #[command(flatten)]
    level: Level,
    /// Read the graph from a JSON file instead of building it.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct Out {
    /// Output path; standard output when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build G(p, l, H) and write it as JSON, CSV or DOT.
    Build {
        #[command(flatten)]
        level: Level,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
    /// Run the verification suite.
    Verify {
        #[command(flatten)]
        src: Source,
        /// Also compare with the quotient of the full level graph.
        #[arg(long)]
        against_full: bool,
        #[command(flatten)]
        out: Out,
    },
    /// Eigenvalues, trivial eigenvalues, gaps, bounds and angles.
    Spectrum {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        out: Out,
    },
    /// Cayley graph, components and their isomorphism classes.
    Components {
        #[command(flatten)]
        src: Source,
        #[command(flatten)]
        out: Out,
    },
    /// One CSV row per prime p with the spectral gap eta.
    EtaScan {
        #[arg(long = "l")]
        l: u64,
        #[command(flatten)]
        group: Group,
        #[arg(long, default_value_t = 5)]
        p_min: u64,
        #[arg(long)]
        p_max: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Distance of nontrivial spectra to the Kesten-McKay law.
    Distribution {
        #[arg(long = "l")]
        l: u64,
        #[command(flatten)]
        group: Group,
        /// Comma-separated primes.
        #[arg(long = "p", value_delimiter = ',', required = true)]
        p: Vec<u64>,
        #[command(flatten)]
        out: Out,
    },
    /// Compare |V| - nk with the matching space of cusp forms. Without --l
    /// the smallest admissible prime is used.
    Dims {
        #[command(flatten)]
        level: Level,
        #[command(flatten)]
        out: Out,
    },
    /// Convert a graph JSON file to another format.
    Export {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Breach(String),
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Params(_) | GraphError::Level(_) => Failure::Usage(e.to_string()),
            _ => Failure::Breach(e.to_string()),
        }
    }
}

impl From<LevelError> for Failure {
    fn from(e: LevelError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Whether every checked property held.
type Verdict = bool;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_gens(s: &str) -> Res<Vec<Mat>> {
    let nums: Vec<u32> = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| usage(format!("bad entry {t:?} in --H-gens"))))
        .collect::<Res<_>>()?;
    if nums.is_empty() || nums.len() % 4 != 0 {
        return Err(usage("--H-gens needs four entries per matrix"));
    }
    Ok(nums.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect())
}

impl Group {
    fn subgroup(&self) -> Res<LevelSubgroup> {
        let n = self.n;
        if n == 0 {
            return Err(usage("--N must be positive"));
        }
        match &self.h_gens {
            Some(s) => {
                let gens = parse_gens(s)?;
                if gens.iter().flatten().any(|&x| x >= n.max(1)) {
                    return Err(usage(format!("generator entries must be reduced mod {n}")));
                }
                Ok(LevelSubgroup::from_generators(n, &gens)?)
            }
            None => {
                let f = Family::parse(&self.h).ok_or_else(|| usage(format!("unknown subgroup {:?}", self.h)))?;
                Ok(LevelSubgroup::named(f, n)?)
            }
        }
    }
}

impl Level {
    fn build(&self, seed: u64) -> Res<(Workspace, IsogenyGraph)> {
        let p = self.p.ok_or_else(|| usage("--p is required"))?;
        let l = self.l.ok_or_else(|| usage("--l is required"))?;
        let h = self.group.subgroup()?;
        validate_params(p, l, h.n)?;
        let ws = Workspace::new(p, l, &[h.n], seed)?;
        let g = ws.graph(&h)?;
        Ok((ws, g))
    }
}

fn read_graph(path: &Path) -> Res<IsogenyGraph> {
    let s = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(from_json(&s)?)
}

impl Source {
    fn load(&self, seed: u64) -> Res<(Option<Workspace>, IsogenyGraph)> {
        match &self.input {
            Some(path) => Ok((None, read_graph(path)?)),
            None => {
                let (ws, g) = self.level.build(seed)?;
                Ok((Some(ws), g))
            }
        }
    }
}

fn emit(out: &Out, text: &str) -> Res<()> {
    match &out.output {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| Failure::Breach(format!("stdout: {e}")))
        }
    }
}

fn emit_json<T: Serialize>(out: &Out, value: &T) -> Res<()> {
    let s = serde_json::to_string_pretty(value).map_err(|e| Failure::Breach(e.to_string()))?;
    emit(out, &(s + "\n"))
}

fn render(g: &IsogenyGraph, format: Format) -> String {
    match format {
        Format::Json => to_json(g),
        Format::Csv => to_csv(g),
        Format::Dot => to_dot(g),
    }
}

#[derive(Serialize)]
struct SpectrumOut {
    spectrum: Spectrum,
    gap: GapReport,
}

#[derive(Serialize)]
struct ComponentsOut {
    components: ComponentReport,
    expected_isomorphic: bool,
    isomorphism: Option<IsomorphismReport>,
}

#[derive(Serialize)]
struct DistributionRun {
    p: u64,
    n_vertices: usize,
    km: KmReport,
}

#[derive(Serialize)]
struct DistributionOut {
    l: u64,
    #[serde(rename = "N")]
    n: u32,
    runs: Vec<DistributionRun>,
    ks_decreasing: bool,
}

fn run(cli: Cli) -> Res<Verdict> {
    let seed = cli.seed;
    match cli.cmd {
        Cmd::Build { level, format, out } => {
            let (_, g) = level.build(seed)?;
            emit(&out, &render(&g, format))?;
            Ok(true)
        }
        Cmd::Verify { src, against_full, out } => {
            let (ws, g) = src.load(seed)?;
            let full = match (&ws, against_full) {
                (Some(ws), true) => Some(ws.graph(&LevelSubgroup::named(Family::Full, g.h.n)?)?),
                (None, true) => return Err(usage("--against-full needs a built graph, not --input")),
                _ => None,
            };
            let report = verify(&g, ws.as_ref(), full.as_ref())?;
            emit_json(&out, &report)?;
            for c in report.failures() {
                eprintln!("{:?}: {} ({})", c.status, c.name, c.detail);
            }
            Ok(report.passed())
        }
        Cmd::Spectrum { src, out } => {
            let (_, g) = src.load(seed)?;
            let comps = component_split(&g);
            let gap = gap_report(&g, &comps);
            let ok = gap.trivial_ok() && gap.bound_ok() && gap.angles_ok();
            emit_json(&out, &SpectrumOut { spectrum: eigenvalues(&g.adjacency), gap })?;
            Ok(ok)
        }
        Cmd::Components { src, out } => {
            let (ws, g) = src.load(seed)?;
            let comps = component_split(&g);
            let expected = components_expected_isomorphic(&g.h, g.p, g.ell);
            let isomorphism = match &ws {
                Some(ws) => Some(component_orbits(ws, &g, &comps.members)?),
                None => None,
            };
            let ok = comps.all_connected()
                && comps.weil_morphism
                && (!expected || isomorphism.as_ref().is_none_or(|r| r.orbits.len() == 1));
            emit_json(&out, &ComponentsOut { components: comps, expected_isomorphic: expected, isomorphism })?;
            Ok(ok)
        }
        Cmd::EtaScan { l, group, p_min, p_max, out } => {
            let h = group.subgroup()?;
            if !is_prime(l) {
                return Err(usage(format!("l = {l} must be prime")));
            }
            let ps: Vec<u64> = primes_in(p_min.max(5), p_max)
                .into_iter()
                .filter(|&p| validate_params(p, l, h.n).is_ok())
                .collect();
            if ps.is_empty() {
                return Err(usage("no admissible primes in range"));
            }
            let rows: Vec<EtaRow> = ps
                .iter()
                .map(|&p| Ok(eta_row(&Workspace::new(p, l, &[h.n], seed)?.graph(&h)?)))
                .collect::<Result<_, GraphError>>()?;
            let mut csv = String::from(EtaRow::csv_header());
            csv.push('\n');
            for r in &rows {
                csv.push_str(&r.csv_line());
                csv.push('\n');
            }
            emit(&out, &csv)?;
            let bad: Vec<u64> = rows.iter().filter(|r| !r.satisfies_bound()).map(|r| r.p).collect();
            if !bad.is_empty() {
                eprintln!("gap below the theorem bound at p = {bad:?}");
            }
            Ok(bad.is_empty())
        }
        Cmd::Distribution { l, group, p: ps, out } => {
            let h = group.subgroup()?;
            for &p in &ps {
                validate_params(p, l, h.n)?;
            }
            let runs: Vec<DistributionRun> = ps
                .iter()
                .map(|&p| {
                    let g = Workspace::new(p, l, &[h.n], seed)?.graph(&h)?;
                    let comps = component_split(&g);
                    let gap = gap_report(&g, &comps);
                    let nontrivial: Vec<_> = gap.components.iter().flat_map(|c| c.nontrivial.clone()).collect();
                    Ok(DistributionRun { p, n_vertices: g.len(), km: km_report(&nontrivial, l, g.k_info().k_prime) })
                })
                .collect::<Result<_, GraphError>>()?;
            let ks_decreasing = runs.windows(2).all(|w| w[1].km.ks < w[0].km.ks);
            emit_json(&out, &DistributionOut { l, n: h.n, runs, ks_decreasing })?;
            Ok(true)
        }
        Cmd::Dims { mut level, out } => {
            // The vertex count does not depend on l.
            if level.l.is_none() {
                let p = level.p.ok_or_else(|| usage("--p is required"))?;
                let n = level.group.n as u64;
                level.l = (2..).find(|&q| is_prime(q) && q != p && n % q != 0);
            }
            let (_, g) = level.build(seed)?;
            let comps = component_split(&g);
            let report: DimensionReport = check_dimensions(&g, &comps)
                .ok_or_else(|| usage("dimension check covers trivial, borel and nonsplit_cartan only"))?;
            emit_json(&out, &report)?;
            Ok(report.matches)
        }
        Cmd::Export { input, format, out } => {
            let g = read_graph(&input)?;
            emit(&out, &render(&g, format))?;
            Ok(true)
        }
    }
}

fn parse(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    let mut cmd = Cli::command().args_override_self(true);
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.args_override_self(true));
    }
    let m = cmd.try_get_matches_from(args)?;
    Cli::from_arg_matches(&m)
}

fn main() -> ExitCode {
    let args = match config::expand(std::env::args_os().collect(), &Cli::command()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let cli = match parse(args) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .expect("global pool is set once");
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Breach(m)) => {
            eprintln!("invariant breach: {m}");
            ExitCode::from(3)
        }
    }
}
