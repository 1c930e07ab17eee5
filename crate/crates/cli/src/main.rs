use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use strata_forge::clutching::{boundary_catalog, degeneration_witness, ClutchingTree};
use strata_forge::experiments::{
    absolutely_simple_search, cache_file_name, cached_census, census_with_budget, chebotarev_experiment,
    class_group_experiment, distribution_report, not_supersingular_witness, prank_distribution,
    splitting_field_experiment, write_jsonl, CensusMode, CensusRecord, ChebotarevOptions, ClassGroupOptions,
    ExperimentReport, DEFAULT_CENSUS_BUDGET, DEFAULT_RATIO_SLACK, SCHEMA,
};
use strata_forge::ff::{FqPoly, GaloisField};
use strata_forge::hyperelliptic::HyperellipticCurve;
use strata_forge::prank::{curve_newton_polygon, p_rank};
use strata_forge::symplectic::{
    baseline_csv_row, charpoly_mod, fixed_vector_proportion, group_bfs, sp_order, standard_transvections,
    weyl_order, Mode, BASELINE_CSV_HEADER, DEFAULT_ENUMERATION_CAP,
};
use strata_forge::Error;

// Writes that fail (a closed pipe, say) are dropped rather than panicking.
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! out_raw {
    ($($t:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

/// Environment variable naming the census and report cache directory.
const CACHE_ENV: &str = "STRATA_FORGE_CACHE";
const DEFAULT_CACHE: &str = ".strata-forge-cache";

const EXIT_VALIDATION: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_FAILED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "strata-forge", version, about = "p-ranks, zeta functions and census experiments for hyperelliptic curves")]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Global {
    /// Seed for every randomized step
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (0 uses all cores)
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Cache directory for censuses and reports [env: STRATA_FORGE_CACHE]
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Largest exhaustive census, in polynomials
    #[arg(long, global = true, default_value_t = DEFAULT_CENSUS_BUDGET)]
    budget: u64,

    /// Print JSON instead of text
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct FieldArgs {
    /// Characteristic (odd prime)
    #[arg(long)]
    p: u32,

    /// Extension degree
    #[arg(long, default_value_t = 1)]
    n: u32,
}

#[derive(Args, Debug, Clone, Serialize)]
struct CurveArgs {
    #[command(flatten)]
    field: FieldArgs,

    /// Coefficients of f, constant term first; entries are packed field elements
    #[arg(long, allow_hyphen_values = true)]
    f: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// p-rank of y² = f(x) from the Hasse–Witt matrix
    Prank(CurveArgs),
    /// Point counts and L-polynomial
    Lpoly(CurveArgs),
    /// Newton polygon and classification
    Np(CurveArgs),
    /// Exhaustive or sampled census written as JSON lines
    Census {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        g: usize,
        /// Sample this many curves instead of enumerating
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Clutching-tree and boundary calculators
    #[command(subcommand)]
    Clutch(Clutch),
    /// Symplectic group orders and baselines
    #[command(subcommand)]
    Mono(Mono),
    /// Census experiments; writes a JSON report
    #[command(subcommand)]
    Experiment(Experiment),
    /// Re-render saved reports without recomputation
    Report {
        /// Report file; defaults to every report in the cache directory
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Clutch {
    /// p-rank labelings of a tree with total p-rank f
    Labelings {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        f: u32,
    },
    /// Stratum dimension g(Λ) + f − |Λ|
    Dim {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        f: u32,
    },
    /// Contract one edge
    Coalesce {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        edge: usize,
    },
    /// Whether TARGET is reached from TREE by coalescing edges
    Refines {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        target: String,
    },
    /// Boundary divisors and their p-rank strata
    Catalog {
        #[arg(long)]
        g: u32,
    },
    /// Chain of elliptic curves realizing a compact-type p-rank
    Witness {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        g: u32,
        #[arg(long)]
        f: u32,
    },
}

#[derive(Subcommand, Debug)]
enum Mono {
    /// |Sp_2g(Z/l)|
    SpOrder {
        #[arg(long)]
        g: u32,
        #[arg(long)]
        l: u64,
    },
    /// Order of the group generated by the standard transvections
    Bfs {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: u64,
    },
    /// 2^g·g!
    Weyl {
        #[arg(long)]
        g: u32,
    },
    /// Fixed-vector proportions as CSV, one row per multiplier
    Baseline {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        l: u64,
        /// Single multiplier; default is every unit mod l
        #[arg(long)]
        m: Option<u64>,
        /// Monte Carlo with this many samples instead of enumeration
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frobenius characteristic polynomial mod l of a curve
    Charpoly {
        #[command(flatten)]
        curve: CurveArgs,
        #[arg(long)]
        l: u64,
    },
}

#[derive(Args, Debug, Clone, Serialize)]
struct CensusArgs {
    #[command(flatten)]
    field: FieldArgs,
    #[arg(long)]
    g: usize,
    /// Sampled census of this size instead of the exhaustive one
    #[arg(long)]
    sample: Option<u64>,
    /// Report path; defaults to the cache directory
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
struct StratumArgs {
    #[command(flatten)]
    census: CensusArgs,
    /// p-rank of the stratum
    #[arg(long)]
    f: usize,
}

#[derive(Subcommand, Debug)]
enum Experiment {
    ClassGroup {
        #[command(flatten)]
        s: StratumArgs,
        #[arg(long)]
        l: u64,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Monte Carlo baseline with this many samples
        #[arg(long)]
        baseline_samples: Option<u64>,
    },
    Splitting {
        #[command(flatten)]
        s: StratumArgs,
    },
    Simple {
        #[command(flatten)]
        s: StratumArgs,
    },
    Chebotarev {
        #[command(flatten)]
        s: StratumArgs,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = 0.10)]
        tolerance: f64,
        #[arg(long)]
        baseline_samples: Option<u64>,
    },
    Notss {
        #[arg(long, default_value_t = 3)]
        g: usize,
        /// Primes to search, in order
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        q: Vec<u32>,
        /// Sample size for fields too large to enumerate
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Distribution {
        #[command(flatten)]
        c: CensusArgs,
        /// Window slack: ratios must lie in [1/(c q), c/q]
        #[arg(long, default_value_t = DEFAULT_RATIO_SLACK)]
        slack: f64,
    },
}

fn parse_curve(a: &CurveArgs) -> Result<HyperellipticCurve, Error> {
    let k = GaloisField::new(a.field.p, a.field.n)?;
    let q = k.order() as i64;
    let coeffs = a
        .f
        .split(',')
        .map(|t| {
            let v: i64 = t
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad coefficient {t:?}")))?;
            match v {
                v if v < 0 => Ok(k.from_int(v)),
                v if v < q => k.element(v as u32),
                v => Err(Error::InvalidInput(format!("coefficient {v} is not an element of F_{q}"))),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    HyperellipticCurve::new(FqPoly::new(&k, coeffs))
}

struct Ctx {
    global: Global,
    cache: PathBuf,
}

impl Ctx {
    fn print(&self, text: impl std::fmt::Display, value: Value) {
        if self.global.json {
            let mut v = value;
            if let Value::Object(m) = &mut v {
                m.insert("schema".into(), json!(SCHEMA));
            }
            out!("{v}");
        } else {
            out!("{text}");
        }
    }

    fn census(&self, a: &CensusArgs) -> Result<Vec<CensusRecord>, Error> {
        let k = GaloisField::new(a.field.p, a.field.n)?;
        match a.sample {
            Some(samples) => census_with_budget(a.g, &k, CensusMode::Sample { samples, seed: self.global.seed }, self.global.budget),
            None => {
                let total = (k.order() as u128).saturating_pow(2 * a.g as u32 + 1);
                if total > self.global.budget as u128 {
                    return Err(Error::BudgetExceeded {
                        what: "exhaustive census".into(),
                        needed: total,
                        cap: self.global.budget as u128,
                    });
                }
                cached_census(&self.cache, a.g, &k)
            }
        }
    }

    /// Saves, prints and maps the verdict to an exit code.
    fn finish(&self, mut rep: ExperimentReport, out: Option<&Path>, name: &str, config: Value) -> Result<u8, Error> {
        if let Value::Object(m) = &mut rep.parameters {
            m.insert("config".into(), json!({"global": self.global, "args": config}));
        }
        if rep.seed.is_none() {
            rep.seed = Some(self.global.seed);
        }
        let path = match out {
            Some(p) => p.to_path_buf(),
            None => {
                std::fs::create_dir_all(&self.cache)?;
                self.cache.join(format!("report_{name}.json"))
            }
        };
        rep.save(&path)?;
        if self.global.json {
            out!("{}", serde_json::to_string(&rep)?);
        } else {
            out_raw!("{}", rep.render());
            out!("  saved: {}", path.display());
        }
        Ok(if rep.passed() { 0 } else { EXIT_FAILED })
    }
}

fn stem(c: &CensusArgs) -> String {
    let mut s = format!("p{}_n{}_g{}", c.field.p, c.field.n, c.g);
    if let Some(n) = c.sample {
        s.push_str(&format!("_sample{n}"));
    }
    s
}

fn run(cli: Cli) -> Result<u8, Error> {
    if cli.global.threads > 0 {
        // a second initialization in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global();
    }
    let cache = cli
        .global
        .cache_dir
        .clone()
        .or_else(|| std::env::var_os(CACHE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_CACHE));
    let ctx = Ctx { global: cli.global, cache };
    match cli.cmd {
        Command::Prank(a) => {
            let c = parse_curve(&a)?;
            let r = p_rank(&c);
            ctx.print(r, json!({"genus": c.genus(), "p_rank": r}));
        }
        Command::Lpoly(a) => {
            let c = parse_curve(&a)?;
            let counts = c.point_counts()?;
            let l = c.l_polynomial()?;
            let coeffs: Vec<String> = l.coeffs.iter().map(ToString::to_string).collect();
            let counts_s: Vec<String> = counts.iter().map(ToString::to_string).collect();
            ctx.print(
                format!(
                    "genus: {}\npoint_counts: {}\nl_poly: {}\npicard_order: {}",
                    c.genus(),
                    counts_s.join(","),
                    coeffs.join(","),
                    l.picard_order()
                ),
                json!({"genus": c.genus(), "point_counts": counts, "l_poly": l, "picard_order": l.picard_order().to_string()}),
            );
        }
        Command::Np(a) => {
            let c = parse_curve(&a)?;
            let l = c.l_polynomial()?;
            let np = curve_newton_polygon(&c, &l)?;
            let segs: Vec<String> = np.triples().iter().map(|(a, b, n)| format!("{a}/{b} x{n}")).collect();
            ctx.print(
                format!("slopes: {}\nclassification: {}", segs.join(", "), np.classify()),
                json!({"newton_polygon": np, "classification": np.classify(), "p_rank": p_rank(&c)}),
            );
        }
        Command::Census { field, g, sample, out } => {
            let args = CensusArgs { field, g, sample, out: None };
            let recs = ctx.census(&args)?;
            let path = match (out, sample) {
                (Some(p), _) => {
                    write_jsonl(&p, &recs)?;
                    p
                }
                (None, None) => ctx.cache.join(cache_file_name(args.field.p, args.field.n, g)),
                (None, Some(n)) => {
                    std::fs::create_dir_all(&ctx.cache)?;
                    let p = ctx.cache.join(format!(
                        "census_p{}_n{}_g{g}_sample{n}_seed{}.jsonl",
                        args.field.p, args.field.n, ctx.global.seed
                    ));
                    write_jsonl(&p, &recs)?;
                    p
                }
            };
            let d = prank_distribution(&recs, DEFAULT_RATIO_SLACK)?;
            ctx.print(
                format!("{} records, counts by p-rank {:?}\nwritten: {}", recs.len(), d.counts, path.display()),
                json!({"records": recs.len(), "counts": d.counts, "path": path}),
            );
        }
        Command::Clutch(c) => clutch(&ctx, c)?,
        Command::Mono(m) => mono(&ctx, m)?,
        Command::Experiment(e) => return experiment(&ctx, e),
        Command::Report { input } => {
            let files = match input {
                Some(p) => vec![p],
                None => {
                    let mut v: Vec<PathBuf> = std::fs::read_dir(&ctx.cache)?
                        .filter_map(|e| e.ok().map(|e| e.path()))
                        .filter(|p| {
                            p.file_name()
                                .and_then(|n| n.to_str())
                                .is_some_and(|n| n.starts_with("report_") && n.ends_with(".json"))
                        })
                        .collect();
                    v.sort();
                    v
                }
            };
            let mut all_pass = true;
            for f in files {
                let rep = ExperimentReport::load(&f)?;
                all_pass &= rep.passed();
                if ctx.global.json {
                    out!("{}", serde_json::to_string(&rep)?);
                } else {
                    out_raw!("{}", rep.render());
                }
            }
            if !all_pass {
                return Ok(EXIT_FAILED);
            }
        }
    }
    Ok(0)
}

fn clutch(ctx: &Ctx, c: Clutch) -> Result<(), Error> {
    match c {
        Clutch::Labelings { tree, f } => {
            let t = ClutchingTree::parse(&tree)?;
            let ls = t.labelings(f)?;
            let text: Vec<String> = ls
                .iter()
                .map(|l| l.iter().map(ToString::to_string).collect::<Vec<_>>().join(","))
                .collect();
            ctx.print(text.join("\n"), json!({"tree": t.to_record(None), "f": f, "labelings": ls}));
        }
        Clutch::Dim { tree, f } => {
            let t = ClutchingTree::parse(&tree)?;
            let d = t.stratum_dim(f)?;
            ctx.print(d, json!({"tree": t.to_record(None), "f": f, "dim": d}));
        }
        Clutch::Coalesce { tree, edge } => {
            let t = ClutchingTree::parse(&tree)?.coalesce(edge)?;
            ctx.print(&t, json!({"tree": t.to_record(None)}));
        }
        Clutch::Refines { tree, target } => {
            let r = ClutchingTree::parse(&tree)?.refines(&ClutchingTree::parse(&target)?);
            ctx.print(r, json!({"refines": r}));
        }
        Clutch::Catalog { g } => {
            let cat = boundary_catalog(g)?;
            let mut lines = Vec::new();
            for d in &cat {
                for s in &d.strata {
                    lines.push(format!(
                        "{} genera {:?} f={} dim={} splittings {:?}",
                        d.name(),
                        d.component_genera,
                        s.f,
                        s.dim,
                        s.splittings
                    ));
                }
            }
            ctx.print(lines.join("\n"), json!({"g": g, "catalog": cat}));
        }
        Clutch::Witness { field, g, f } => {
            let k = GaloisField::new(field.p, field.n)?;
            let w = degeneration_witness(g, f, &k)?;
            let curves: Vec<Vec<u32>> = w.curves.iter().map(|c| c.f().values()).collect();
            let text: Vec<String> = w
                .labeling
                .iter()
                .zip(&curves)
                .enumerate()
                .map(|(i, (l, c))| format!("vertex {i}: f_v={l} y^2 = {c:?}"))
                .collect();
            ctx.print(
                format!("{}\np-rank: {}", text.join("\n"), w.p_rank()),
                json!({"tree": w.tree.to_record(Some(&w.labeling)), "curves": curves, "p_rank": w.p_rank()}),
            );
        }
    }
    Ok(())
}

fn mono(ctx: &Ctx, m: Mono) -> Result<(), Error> {
    match m {
        Mono::SpOrder { g, l } => {
            let n = sp_order(g, l);
            ctx.print(&n, json!({"g": g, "l": l, "order": n.to_string()}));
        }
        Mono::Bfs { g, l, cap } => {
            let r = group_bfs(&standard_transvections(g, l)?, cap)?;
            let (text, v) = match r {
                strata_forge::symplectic::BfsOutcome::Order(n) => (n.to_string(), json!(n)),
                strata_forge::symplectic::BfsOutcome::Exceeded => ("exceeded".to_string(), json!("exceeded")),
            };
            ctx.print(text, json!({"g": g, "l": l, "cap": cap, "order": v}));
        }
        Mono::Weyl { g } => {
            let w = weyl_order(g);
            ctx.print(w, json!({"g": g, "order": w.to_string()}));
        }
        Mono::Baseline { g, l, m, samples, out } => {
            let ms: Vec<u64> = match m {
                Some(m) => vec![m],
                None => (1..l).collect(),
            };
            let mut csv = String::from(BASELINE_CSV_HEADER);
            csv.push('\n');
            for m in ms {
                let mode = match samples {
                    Some(s) => Mode::MonteCarlo { samples: s, seed: ctx.global.seed },
                    None => Mode::exact(),
                };
                let p = fixed_vector_proportion(g, l, m, mode)?;
                csv.push_str(&baseline_csv_row(g, l, m, &p));
                csv.push('\n');
            }
            match out {
                Some(p) => std::fs::write(p, csv)?,
                None => out_raw!("{csv}"),
            }
        }
        Mono::Charpoly { curve, l } => {
            let c = parse_curve(&curve)?;
            let p = charpoly_mod(&c.l_polynomial()?, l)?;
            let text: Vec<String> = p.iter().map(ToString::to_string).collect();
            ctx.print(text.join(","), json!({"l": l, "charpoly": p}));
        }
    }
    Ok(())
}

fn experiment(ctx: &Ctx, e: Experiment) -> Result<u8, Error> {
    let baseline = |s: Option<u64>| match s {
        Some(samples) => Mode::MonteCarlo { samples, seed: ctx.global.seed },
        None => Mode::exact(),
    };
    match e {
        Experiment::ClassGroup { s, l, tolerance, baseline_samples } => {
            let recs = ctx.census(&s.census)?;
            let opts = ClassGroupOptions { tolerance, baseline: baseline(baseline_samples) };
            let rep = class_group_experiment(&recs, s.f, l, opts)?;
            let name = format!("class-group_{}_f{}_l{l}", stem(&s.census), s.f);
            let cfg = json!({"stratum": s, "l": l, "tolerance": tolerance, "baseline_samples": baseline_samples});
            ctx.finish(rep, s.census.out.as_deref(), &name, cfg)
        }
        Experiment::Splitting { s } => {
            let recs = ctx.census(&s.census)?;
            let rep = splitting_field_experiment(&recs, s.f)?;
            let name = format!("splitting_{}_f{}", stem(&s.census), s.f);
            ctx.finish(rep, s.census.out.as_deref(), &name, json!({"stratum": s}))
        }
        Experiment::Simple { s } => {
            let recs = ctx.census(&s.census)?;
            let rep = absolutely_simple_search(&recs, s.f)?;
            let name = format!("simple_{}_f{}", stem(&s.census), s.f);
            ctx.finish(rep, s.census.out.as_deref(), &name, json!({"stratum": s}))
        }
        Experiment::Chebotarev { s, l, tolerance, baseline_samples } => {
            let recs = ctx.census(&s.census)?;
            let opts = ChebotarevOptions {
                baseline: baseline(baseline_samples),
                tolerance,
                exhaustive: s.census.sample.is_none(),
                ..ChebotarevOptions::default()
            };
            let rep = chebotarev_experiment(&recs, s.f, l, opts)?;
            let name = format!("chebotarev_{}_f{}_l{l}", stem(&s.census), s.f);
            let cfg = json!({"stratum": s, "l": l, "tolerance": tolerance, "baseline_samples": baseline_samples});
            ctx.finish(rep, s.census.out.as_deref(), &name, cfg)
        }
        Experiment::Notss { g, q, samples, out } => {
            let fields = q.iter().map(|&p| GaloisField::prime(p)).collect::<Result<Vec<_>, _>>()?;
            let rep = not_supersingular_witness(g, &fields, samples, ctx.global.seed)?;
            let name = format!("notss_g{g}");
            ctx.finish(rep, out.as_deref(), &name, json!({"g": g, "q": q, "samples": samples}))
        }
        Experiment::Distribution { c, slack } => {
            let recs = ctx.census(&c)?;
            let rep = distribution_report(&recs, slack)?;
            let name = format!("distribution_{}", stem(&c));
            ctx.finish(rep, c.out.as_deref(), &name, json!({"census": c, "slack": slack}))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { EXIT_BUDGET } else { EXIT_VALIDATION })
        }
    }
}
