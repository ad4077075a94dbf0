//! Command-line front end: `extract`, `stats`, `eval` and `conceptualize`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use verbpat::conceptualize::{conceptualize_known_phrase, Conceptualizer, KnownPhrase, PriorStore};
use verbpat::corpus::DEFAULT_MIN_COUNT;
use verbpat::evaluate::{self, Baseline, GoldLabels};
use verbpat::patterns::{self, AssignmentStore, PatternRecord};
use verbpat::solver::{self, CoolingSchedule, SolverConfig};
use verbpat::{mdl, IdiomDictionary, PhraseCorpus, Taxonomy};

#[derive(Debug, Parser)]
#[command(name = "verbpat", version, about = "Extract and apply verb patterns")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn patterns for every verb in a corpus.
    Extract(ExtractArgs),
    /// Summarize a patterns file per verb.
    Stats(StatsArgs),
    /// Coverage and precision against gold labels.
    Eval(EvalArgs),
    /// Rank concepts for an entity, optionally using a verb's patterns.
    Conceptualize(ConceptualizeArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ScheduleArg {
    Cooling,
    Literal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BaselineArg {
    Ib,
    Cb,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub taxonomy: PathBuf,
    /// Idiom dictionary, `verb<TAB>object` per line.
    #[arg(long)]
    pub idioms: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write the run manifest. Defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[arg(long, default_value_t = mdl::DEFAULT_THETA, allow_negative_numbers = true, value_parser = non_negative)]
    pub theta: f64,
    #[arg(long, default_value_t = solver::DEFAULT_GAMMA, allow_negative_numbers = true, value_parser = positive)]
    pub gamma: f64,
    #[arg(long, default_value_t = solver::DEFAULT_T0, allow_negative_numbers = true, value_parser = positive)]
    pub t0: f64,
    #[arg(long, default_value_t = solver::DEFAULT_COOLING_A, allow_negative_numbers = true, value_parser = positive)]
    pub cooling_a: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Cooling)]
    pub schedule: ScheduleArg,
    #[arg(long, default_value_t = solver::DEFAULT_BETA, value_parser = at_least_one)]
    pub beta: usize,
    #[arg(long, default_value_t = solver::DEFAULT_RESTARTS, value_parser = at_least_one)]
    pub restarts: usize,
    #[arg(long, value_parser = at_least_one)]
    pub max_iterations: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_freq: u64,
    /// Worker threads for per-verb solves; defaults to the number of CPUs.
    #[arg(long, value_parser = at_least_one)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub patterns: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Learned patterns. Required unless `--baseline` is given.
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    /// Test phrases, `verb<TAB>object` per line.
    #[arg(long)]
    pub test: PathBuf,
    /// Gold labels, `verb<TAB>object<TAB>kind<TAB>label` per line.
    #[arg(long)]
    pub gold: PathBuf,
    /// Evaluate a baseline built from `--corpus` and `--taxonomy` instead of `--patterns`.
    #[arg(long, value_enum, requires_all = ["corpus", "taxonomy"])]
    pub baseline: Option<BaselineArg>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MIN_COUNT, value_parser = clap::value_parser!(u64).range(1..))]
    pub min_freq: u64,
}

#[derive(Debug, Args)]
pub struct ConceptualizeArgs {
    #[arg(long)]
    pub patterns: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: PathBuf,
    #[arg(long)]
    pub entity: String,
    #[arg(long)]
    pub verb: Option<String>,
    /// Comma-separated context entities.
    #[arg(long, value_delimiter = ',')]
    pub context: Vec<String>,
    #[arg(long, value_parser = at_least_one)]
    pub top: Option<usize>,
    /// Additive smoothing for context and verb-prior factors; off by default.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = non_negative)]
    pub smoothing: f64,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn non_negative(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v < 0.0 {
        return Err("must be non-negative".into());
    }
    Ok(v)
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    let v = parse_f64(s)?;
    if v <= 0.0 {
        return Err("must be positive".into());
    }
    Ok(v)
}

fn at_least_one(s: &str) -> std::result::Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if v == 0 {
        return Err("must be at least 1".into());
    }
    Ok(v)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Extract(args) => extract(&args, out),
        Command::Stats(args) => stats(&args, out),
        Command::Eval(args) => eval(&args, out),
        Command::Conceptualize(args) => conceptualize(&args, out),
    }
}

fn load_corpus(path: &Path, min_freq: u64) -> Result<PhraseCorpus> {
    PhraseCorpus::load(path, min_freq).with_context(|| format!("reading corpus {}", path.display()))
}

fn load_taxonomy(path: &Path) -> Result<Taxonomy> {
    Taxonomy::load(path).with_context(|| format!("reading taxonomy {}", path.display()))
}

fn load_patterns(path: &Path) -> Result<Vec<PatternRecord>> {
    let file = File::open(path).with_context(|| format!("opening patterns {}", path.display()))?;
    patterns::read_jsonl(BufReader::new(file))
        .with_context(|| format!("reading patterns {}", path.display()))
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
    bytes: u64,
}

fn digest(path: &Path) -> Result<InputDigest> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&data)),
        bytes: data.len() as u64,
    })
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: SolverConfig,
    min_freq: u64,
    workers: Option<usize>,
    inputs: ManifestInputs,
    output: InputDigest,
    verbs: usize,
    patterns: usize,
}

#[derive(Debug, Serialize)]
struct ManifestInputs {
    corpus: InputDigest,
    taxonomy: InputDigest,
    idioms: Option<InputDigest>,
}

fn extract(args: &ExtractArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = SolverConfig {
        theta: args.theta,
        gamma: args.gamma,
        t0: args.t0,
        cooling_a: args.cooling_a,
        beta: args.beta,
        seed: args.seed,
        restarts: args.restarts,
        max_iterations: args.max_iterations,
        schedule: match args.schedule {
            ScheduleArg::Cooling => CoolingSchedule::Cooling,
            ScheduleArg::Literal => CoolingSchedule::Literal,
        },
        trace: false,
    };
    cfg.validate()?;
    log::info!(
        "theta={} gamma={} t0={} cooling_a={} beta={} restarts={} seed={} schedule={:?}",
        cfg.theta,
        cfg.gamma,
        cfg.t0,
        cfg.cooling_a,
        cfg.beta,
        cfg.restarts,
        cfg.seed,
        cfg.schedule
    );

    let corpus = load_corpus(&args.corpus, args.min_freq)?;
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let idioms = match &args.idioms {
        Some(path) => IdiomDictionary::load(path)
            .with_context(|| format!("reading idiom dictionary {}", path.display()))?,
        None => IdiomDictionary::new(),
    };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    let verbs: Vec<&str> = corpus.verbs().collect();
    let per_verb: Vec<Vec<PatternRecord>> = pool.install(|| {
        verbs
            .par_iter()
            .map(|verb| -> Result<Vec<PatternRecord>> {
                let dist = corpus.phrase_distribution(verb)?;
                let result = solver::solve_distribution(&dist, &taxonomy, &idioms, &cfg)
                    .with_context(|| format!("solving verb `{verb}`"))?;
                log::debug!(
                    "{verb}: {:.6} bits after {} iterations",
                    result.length.total,
                    result.total_iterations
                );
                Ok(patterns::pattern_records(&result.assignment, &dist)?)
            })
            .collect::<Result<_>>()
    })?;
    let records: Vec<PatternRecord> = per_verb.into_iter().flatten().collect();

    {
        let file =
            File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
        let mut writer = BufWriter::new(file);
        patterns::write_jsonl(&mut writer, &records)?;
        writer.flush()?;
    }

    let manifest = Manifest {
        tool: "verbpat",
        version: env!("CARGO_PKG_VERSION"),
        command: "extract",
        config: cfg,
        min_freq: args.min_freq,
        workers: args.workers,
        inputs: ManifestInputs {
            corpus: digest(&args.corpus)?,
            taxonomy: digest(&args.taxonomy)?,
            idioms: args.idioms.as_deref().map(digest).transpose()?,
        },
        output: digest(&args.out)?,
        verbs: verbs.len(),
        patterns: records.len(),
    };
    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        let mut name = args.out.clone().into_os_string();
        name.push(".manifest.json");
        PathBuf::from(name)
    });
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&manifest_path, text + "\n")
        .with_context(|| format!("writing manifest {}", manifest_path.display()))?;

    writeln!(
        out,
        "wrote {} patterns for {} verbs to {}",
        records.len(),
        verbs.len(),
        args.out.display()
    )?;
    Ok(())
}

/// Per-verb phrase and pattern counts.
#[derive(Debug, Clone, PartialEq)]
pub struct VerbStats {
    pub verb: String,
    pub phrases: usize,
    pub patterns: usize,
    pub conceptualized_phrases: usize,
}

pub fn verb_stats(records: &[PatternRecord]) -> Result<Vec<VerbStats>> {
    let store = AssignmentStore::from_records(records)?;
    Ok(store
        .iter()
        .map(|a| VerbStats {
            verb: a.verb().to_owned(),
            phrases: a.len(),
            patterns: a.pattern_count(),
            conceptualized_phrases: a.iter().filter(|(_, k)| !k.is_idiom()).count(),
        })
        .collect())
}

fn stats(args: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let records = load_patterns(&args.patterns)?;
    let rows = verb_stats(&records)?;
    writeln!(out, "verb\tphrases\tpatterns\tconceptualized_fraction")?;
    for row in &rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}",
            row.verb,
            row.phrases,
            row.patterns,
            row.conceptualized_phrases as f64 / row.phrases as f64
        )?;
    }
    if !rows.is_empty() {
        let n = rows.len() as f64;
        let phrases: usize = rows.iter().map(|r| r.phrases).sum();
        let patterns: usize = rows.iter().map(|r| r.patterns).sum();
        let concept: usize = rows.iter().map(|r| r.conceptualized_phrases).sum();
        writeln!(
            out,
            "(mean)\t{:.2}\t{:.2}\t{:.6}",
            phrases as f64 / n,
            patterns as f64 / n,
            concept as f64 / phrases as f64
        )?;
    }
    Ok(())
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let store = match args.baseline {
        Some(mode) => {
            let (Some(corpus), Some(taxonomy)) = (&args.corpus, &args.taxonomy) else {
                bail!("--baseline needs --corpus and --taxonomy");
            };
            let corpus = load_corpus(corpus, args.min_freq)?;
            let taxonomy = load_taxonomy(taxonomy)?;
            let mode = match mode {
                BaselineArg::Ib => Baseline::Idiom,
                BaselineArg::Cb => Baseline::Concept,
            };
            corpus
                .verbs()
                .map(|v| evaluate::assign_baseline(v, &corpus, &taxonomy, mode))
                .collect::<verbpat::Result<AssignmentStore>>()?
        }
        None => {
            let Some(path) = &args.patterns else {
                bail!("--patterns is required unless --baseline is given");
            };
            AssignmentStore::from_records(&load_patterns(path)?)?
        }
    };
    let test = evaluate::load_test_phrases(&args.test)
        .with_context(|| format!("reading test phrases {}", args.test.display()))?;
    let gold = GoldLabels::load(&args.gold)
        .with_context(|| format!("reading gold labels {}", args.gold.display()))?;
    let report = evaluate::coverage_precision(&test, &store, &gold)?;
    write!(out, "{report}")?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct RankedConcept {
    concept: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct ConceptualizeOutput<'a> {
    entity: &'a str,
    verb: Option<&'a str>,
    context: &'a [String],
    smoothing: f64,
    /// `pattern`, `idiom_stop` or `ranked`
    resolution: &'static str,
    concepts: Vec<RankedConcept>,
}

fn conceptualize(args: &ConceptualizeArgs, out: &mut dyn Write) -> Result<()> {
    let taxonomy = load_taxonomy(&args.taxonomy)?;
    let records = match &args.patterns {
        Some(path) => load_patterns(path)?,
        None => Vec::new(),
    };
    let store = AssignmentStore::from_records(&records)?;
    let priors = PriorStore::from_records(&records)?;
    let verb = args.verb.as_deref();

    let known = verb.map_or(KnownPhrase::Unknown, |v| {
        conceptualize_known_phrase(v, &args.entity, &store)
    });
    let (resolution, mut concepts) = match known {
        KnownPhrase::Concept(c) => (
            "pattern",
            vec![RankedConcept {
                concept: c,
                score: 1.0,
            }],
        ),
        KnownPhrase::IdiomStop => ("idiom_stop", Vec::new()),
        KnownPhrase::Unknown => {
            let ranked = Conceptualizer::new(&taxonomy, &priors)
                .with_smoothing(args.smoothing)?
                .rank(&args.entity, &args.context, verb)?;
            (
                "ranked",
                ranked
                    .into_iter()
                    .map(|(concept, score)| RankedConcept { concept, score })
                    .collect(),
            )
        }
    };
    if let Some(k) = args.top {
        concepts.truncate(k);
    }
    let output = ConceptualizeOutput {
        entity: &args.entity,
        verb,
        context: &args.context,
        smoothing: args.smoothing,
        resolution,
        concepts,
    };
    serde_json::to_writer(&mut *out, &output)?;
    writeln!(out)?;
    Ok(())
}
