use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlwb::acceptance::{run_all, SCENARIOS};
use mlwb::dense::counterexample_g;
use mlwb::formats::{parse_kripke, parse_map, parse_nframe, write_kripke, write_map, KripkeDoc, NDoc};
use mlwb::gen::{random_kk_morphism, random_nk_morphism, random_pmorphism, random_rooted_frame};
use mlwb::horn::{gamma_close_counted, HornTheory};
use mlwb::kripke::{check_pmorphism, truth_preservation_test, unravel, PreservationReport};
use mlwb::neighbourhood::{check_n_pmorphism, n_truth_preservation_test, NMorphism};
use mlwb::pipeline::{parse_scenario, run_pipeline};
use mlwb::predicate::{check_kk_morphism, check_nk_morphism, kk_truth_preservation_test, nk_truth_preservation_test};
use mlwb::syntax::{parse_pred, parse_prop};
use mlwb::Error;

#[derive(Parser)]
#[command(name = "mlwb", version, about = "Modal logic workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a frame, scenario, Horn theory or formula file and print it back.
    Parse { file: PathBuf },
    /// Evaluate a formula at a point of a model.
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        at: String,
        #[arg(long)]
        formula: String,
    },
    /// Close a frame under a Horn theory.
    Close {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        horn: PathBuf,
    },
    /// Unravel a rooted frame (read from `--frame` or stdin) to a depth.
    Unravel {
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        frame: Option<PathBuf>,
    },
    /// Check a p-morphism, or run the sampled preservation suite.
    Pmorph {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, requires_all = ["target", "map"])]
        source: Option<PathBuf>,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dense neighbourhood semantics.
    Dense {
        #[command(subcommand)]
        command: DenseCommand,
    },
    /// Run a scenario file, or a bundled scenario by name.
    Pipeline { scenario: String },
    /// Run the acceptance suite.
    Selftest,
}

#[derive(Subcommand)]
enum DenseCommand {
    /// Exhibit the canonical counterexample frame.
    Counterexample {
        #[arg(long, default_value_t = 20)]
        kmax: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Kripke,
    Nframe,
    Kk,
    Nk,
}

/// Why a command failed: a violated check (exit 1) or bad input (exit 2).
enum Failure {
    Refuted(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Parse { file } => parse(&file),
        Command::Eval { model, at, formula } => eval(&model, &at, &formula),
        Command::Close { frame, horn } => close(&frame, &horn),
        Command::Unravel { depth, frame } => unravel_cmd(depth, frame.as_deref()),
        Command::Pmorph { kind, source, target, map, samples, seed } => match (source, target, map) {
            (Some(s), Some(t), Some(m)) => pmorph_files(kind, &s, &t, &m, samples, seed),
            _ => pmorph_suite(kind, samples, seed),
        },
        Command::Dense { command: DenseCommand::Counterexample { kmax } } => dense_counterexample(kmax),
        Command::Pipeline { scenario } => pipeline(&scenario),
        Command::Selftest => selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Refuted(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn first_keyword(text: &str) -> Option<&str> {
    text.lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().next())
}

fn parse(file: &Path) -> Outcome {
    let text = read(file)?;
    let kw = first_keyword(&text).unwrap_or("");
    if kw.starts_with('[') {
        let name = file.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        let s = parse_scenario(name, &text)?;
        println!("scenario {}", s.name);
        println!("{}", s.skeleton);
        if let Some(t) = &s.theory {
            println!("horn\n{t}");
        }
        println!("formula {}", s.formula);
    } else if matches!(kw, "nframe" | "points") {
        let doc = parse_nframe(&text)?;
        println!("{}", doc.frame);
    } else if matches!(kw, "frame" | "worlds") {
        let doc = parse_kripke(&text)?;
        println!("{}", doc.frame);
    } else if text.contains("=>") {
        print!("{}", HornTheory::parse(&text)?);
    } else {
        let body: String = text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join(" ");
        match parse_prop(&body) {
            Ok(f) => println!("{f}"),
            Err(_) => println!("{}", parse_pred(&body).map_err(Error::from)?),
        }
    }
    Ok(())
}

enum Model {
    Kripke(KripkeDoc),
    N(NDoc),
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    let text = read(path)?;
    Ok(match first_keyword(&text) {
        Some("nframe" | "points") => Model::N(parse_nframe(&text)?),
        _ => Model::Kripke(parse_kripke(&text)?),
    })
}

fn eval(model: &Path, at: &str, formula: &str) -> Outcome {
    let value = match load_model(model)? {
        Model::Kripke(doc) if doc.is_predicate() => {
            doc.pred_model()?.eval(doc.frame.world(at)?, &parse_pred(formula).map_err(Error::from)?)?
        }
        Model::Kripke(doc) => doc.model()?.eval(doc.frame.world(at)?, &parse_prop(formula).map_err(Error::from)?)?,
        Model::N(doc) if doc.domain.is_some() => {
            doc.pred_model()?.eval(doc.frame.point(at)?, &parse_pred(formula).map_err(Error::from)?)?
        }
        Model::N(doc) => doc.model()?.eval(doc.frame.point(at)?, &parse_prop(formula).map_err(Error::from)?)?,
    };
    println!("{value}");
    if value {
        Ok(())
    } else {
        Err(Failure::Refuted(format!("formula is false at `{at}`")))
    }
}

fn close(frame: &Path, horn: &Path) -> Outcome {
    let doc = parse_kripke(&read(frame)?)?;
    let theory = HornTheory::parse(&read(horn)?)?;
    let (closed, added) = gamma_close_counted(&doc.frame, &theory);
    print!("{}", write_kripke(&closed, &doc.valuation));
    eprintln!("{added} edges added");
    Ok(())
}

fn unravel_cmd(depth: usize, frame: Option<&Path>) -> Outcome {
    let text = match frame {
        Some(p) => read(p)?,
        None => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
            s
        }
    };
    let doc = parse_kripke(&text)?;
    let u = unravel(&doc.frame, depth)?;
    print!("{}", write_kripke(&u.frame, &Default::default()));
    print!("{}", write_map(u.frame.names(), doc.frame.names(), &u.projection, None));
    u.check_projection(&doc.frame).map_err(|v| Failure::Refuted(format!("projection fails: {v}")))?;
    Ok(())
}

fn report(label: &str, r: &PreservationReport) -> Outcome {
    println!("{label}: {r}");
    if r.all_agree() {
        Ok(())
    } else {
        Err(Failure::Refuted(format!("{label}: truth is not preserved")))
    }
}

fn pmorph_files(kind: Kind, source: &Path, target: &Path, map: &Path, samples: usize, seed: u64) -> Outcome {
    let (s, t, m) = (read(source)?, read(target)?, read(map)?);
    let violation = |v: &dyn std::fmt::Display| Failure::Refuted(format!("not a p-morphism: {v}"));
    match kind {
        Kind::Kripke => {
            let (s, t) = (parse_kripke(&s)?.frame, parse_kripke(&t)?.frame);
            let map = parse_map(&m, s.names(), t.names())?;
            let f = check_pmorphism(&map.phi0, &s, &t).map_err(|v| violation(&v))?;
            report("kripke", &truth_preservation_test(&f, samples, seed)?)
        }
        Kind::Nframe => {
            let (s, t) = (parse_nframe(&s)?.frame, parse_nframe(&t)?.frame);
            let map = parse_map(&m, s.names(), t.names())?;
            let f: NMorphism = check_n_pmorphism(&map.phi0, &s, &t).map_err(|v| violation(&v))?;
            report("nframe", &n_truth_preservation_test(&f, samples, seed)?)
        }
        Kind::Kk => {
            let (s, t) = (parse_kripke(&s)?, parse_kripke(&t)?);
            let map = parse_map(&m, s.frame.names(), t.frame.names())?;
            let phi1 = map.phi1.ok_or_else(|| Failure::Input("map file has no `elem` lines".into()))?;
            let f = check_kk_morphism(&map.phi0, &phi1, &s.pred_frame()?, &t.pred_frame()?).map_err(|v| violation(&v))?;
            report("kk", &kk_truth_preservation_test(&f, samples, seed)?)
        }
        Kind::Nk => {
            let (s, t) = (parse_nframe(&s)?, parse_kripke(&t)?);
            let map = parse_map(&m, s.frame.names(), t.frame.names())?;
            let phi1 = map.phi1.ok_or_else(|| Failure::Input("map file has no `elem` lines".into()))?;
            let f = check_nk_morphism(&map.phi0, &phi1, &s.pred_frame()?, &t.pred_frame()?).map_err(|v| violation(&v))?;
            report("nk", &nk_truth_preservation_test(&f, samples, seed)?)
        }
    }
}

/// Random morphisms of the requested kind, 20 samples each.
fn pmorph_suite(kind: Kind, samples: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = PreservationReport::new();
    for _ in 0..samples.div_ceil(20) {
        let s = rng.gen();
        let n = rng.gen_range(1..=3);
        let r = match kind {
            Kind::Kripke | Kind::Nframe => {
                let target = random_rooted_frame(&mut rng, n, 0.4);
                let m = random_pmorphism(&mut rng, &target);
                if matches!(kind, Kind::Kripke) {
                    truth_preservation_test(&m, 20, s)?
                } else {
                    let nm = NMorphism::from_kripke(&m).map_err(|v| Failure::Refuted(v.to_string()))?;
                    n_truth_preservation_test(&nm, 20, s)?
                }
            }
            Kind::Kk => kk_truth_preservation_test(&random_kk_morphism(&mut rng, n), 20, s)?,
            Kind::Nk => nk_truth_preservation_test(&random_nk_morphism(&mut rng, n), 20, s)?,
        };
        total.samples += r.samples;
        total.agreed += r.agreed;
        total.failures.extend(r.failures);
    }
    report("sampled suite", &total)
}

fn dense_counterexample(kmax: usize) -> Outcome {
    let r = counterexample_g(kmax)?;
    println!("{r}");
    if r.passed() {
        Ok(())
    } else {
        Err(Failure::Refuted("counterexample not reproduced".into()))
    }
}

fn pipeline(scenario: &str) -> Outcome {
    let path = Path::new(scenario);
    let (name, text) = if path.exists() {
        (path.file_stem().and_then(|s| s.to_str()).unwrap_or(scenario).to_string(), read(path)?)
    } else if let Some((n, t)) = SCENARIOS.iter().find(|(n, _)| *n == scenario) {
        (n.to_string(), t.to_string())
    } else {
        return Err(Failure::Input(format!("no scenario file or bundled scenario `{scenario}`")));
    };
    let s = parse_scenario(&name, &text)?;
    let started = Instant::now();
    let r = run_pipeline(&s)?;
    println!("{r}");
    eprintln!("elapsed {} ms", started.elapsed().as_millis());
    if r.reproduced() {
        Ok(())
    } else {
        Err(Failure::Refuted(format!("pipeline status {}", r.status())))
    }
}

fn selftest() -> Outcome {
    let results = run_all();
    for c in &results {
        println!("{c}");
    }
    let failed: Vec<String> = results.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
    println!("{}/{} criteria passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Refuted(format!("failing criteria: {}", failed.join(", "))))
    }
}
