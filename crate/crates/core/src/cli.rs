//! Command-line front end. Every command writes to a caller-supplied sink
//! and reports an exit code: 0 success, 2 input or schema error, 3 backend
//! error.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::aggregate::{judge, AggregationMode, Verdict};
use crate::backends::{atoms_from_texts, decompose_into};
use crate::config::{resolve, BackendSpec, RunConfig};
use crate::construct::{
    assemble, atom_index, build_contradiction_pairs, build_entailment_pairs, build_neutral_pairs, build_test_split,
    decompose_instances, stats, DatasetSplit, GenerationBackends, SplitName,
};
use crate::error::{Error, Result};
use crate::evaluate::{compare_modes, stratified_eval, EvalMode, EvalOptions};
use crate::io::{read_atomic, read_grouped, read_sentences, write_json, write_jsonl, write_split, GroupedRecord};
use crate::label::Label;
use crate::types::SentenceInstance;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_BACKEND: i32 = 3;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_backend() {
        EXIT_BACKEND
    } else {
        EXIT_INPUT
    }
}

#[derive(Debug, Parser)]
#[command(name = "atomnli", version, about = "Atomic-level NLI: decompose, build, evaluate, judge")]
pub struct Cli {
    /// Directory every relative path is resolved against.
    #[arg(long)]
    pub workdir: PathBuf,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split each hypothesis of a sentence-level file into atoms.
    Decompose(DecomposeArgs),
    /// Build atomic training data (and optionally the test split) from a run config.
    Build(BuildArgs),
    /// Evaluate a classifier on a grouped test file, stratified by atom count.
    Eval(EvalArgs),
    /// Explain one prediction atom by atom.
    Judge(JudgeArgs),
    /// Print split statistics as JSON.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    /// JSON file with `classifier` and/or `decomposer` backend specs.
    #[arg(long)]
    pub backends: Option<PathBuf>,

    #[arg(long, default_value_t = 8)]
    pub max_atoms: usize,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value = "strict", value_parser = parse_eval_mode)]
    pub mode: EvalMode,
    /// Run strict, sum and sentence side by side.
    #[arg(long)]
    pub compare: bool,
    #[arg(long, default_value_t = 5)]
    pub max_stratum: usize,
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write `mode,stratum,class,metric,value` rows here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct JudgeArgs {
    #[arg(long)]
    pub premise: String,
    #[arg(long)]
    pub hypothesis: String,
    #[arg(long, default_value = "strict", value_parser = parse_aggregation)]
    pub mode: AggregationMode,
    /// Use these atoms instead of decomposing the hypothesis (repeatable).
    #[arg(long = "atom")]
    pub atoms: Vec<String>,
    /// Print the verdict as JSON.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub backend: BackendArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// `test` reads grouped instances, `train`/`validation` read triplets.
    #[arg(long, default_value = "test", value_parser = parse_split)]
    pub split: SplitName,
    #[arg(long, default_value_t = 8)]
    pub max_atoms: usize,
}

fn parse_eval_mode(s: &str) -> std::result::Result<EvalMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_aggregation(s: &str) -> std::result::Result<AggregationMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "strict" => Ok(AggregationMode::Strict),
        "sum" => Ok(AggregationMode::Sum),
        _ => Err(format!("unknown aggregation mode '{s}' (strict, sum)")),
    }
}

fn parse_split(s: &str) -> std::result::Result<SplitName, String> {
    match s.to_ascii_lowercase().as_str() {
        "train" => Ok(SplitName::Train),
        "validation" => Ok(SplitName::Validation),
        "test" => Ok(SplitName::Test),
        _ => Err(format!("unknown split '{s}' (train, validation, test)")),
    }
}

/// Backend selection for the single-purpose commands.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendFile {
    pub classifier: BackendSpec,
    pub decomposer: BackendSpec,
}

impl BackendArgs {
    fn load(&self, workdir: &Path) -> Result<BackendFile> {
        match &self.backends {
            None => Ok(BackendFile::default()),
            Some(p) => serde_json::from_str(&std::fs::read_to_string(resolve(workdir, p))?)
                .map_err(|e| Error::Config(e.to_string())),
        }
    }
}

/// Run a parsed command line. Errors are written to `err`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let wd = cli.workdir.as_path();
    let result = match &cli.command {
        Command::Decompose(a) => cmd_decompose(wd, a, out),
        Command::Build(a) => cmd_build(wd, a, out),
        Command::Eval(a) => cmd_eval(wd, a, out),
        Command::Judge(a) => cmd_judge(wd, a, out),
        Command::Stats(a) => cmd_stats(wd, a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Parse `args` (program name first) and run. Usage errors exit with 2.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, out, err),
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                EXIT_INPUT
            } else {
                let _ = write!(out, "{}", e.render());
                EXIT_OK
            }
        }
    }
}

fn write_histogram(out: &mut dyn Write, hist: &BTreeMap<usize, usize>) -> Result<()> {
    writeln!(out, "atoms\tinstances")?;
    for (k, v) in hist {
        writeln!(out, "{k}\t{v}")?;
    }
    Ok(())
}

pub fn cmd_decompose(workdir: &Path, a: &DecomposeArgs, out: &mut dyn Write) -> Result<()> {
    let backends = a.backend.load(workdir)?;
    let decomposer = backends.decomposer.decomposer()?;
    let input = read_sentences(&resolve(workdir, &a.input))?;
    let done = decompose_instances(&input, decomposer.as_ref(), a.backend.max_atoms)?;
    for id in &done.dropped {
        log::warn!("dropped '{id}': invalid decomposition");
    }
    write_jsonl(&resolve(workdir, &a.output), done.instances.iter().map(GroupedRecord::from))?;
    write_histogram(out, &crate::construct::atom_histogram(&done.instances))?;
    writeln!(out, "dropped\t{}", done.dropped.len())?;
    Ok(())
}

fn label_counts(split: &DatasetSplit) -> String {
    let mut counts = [0usize; 3];
    if let Some(rows) = split.atomic_rows() {
        rows.iter().for_each(|r| counts[r.label.index()] += 1);
    }
    if let Some(rows) = split.grouped_rows() {
        rows.iter().for_each(|r| counts[r.gold.index()] += 1);
    }
    Label::ALL
        .iter()
        .map(|l| format!("{l}={}", counts[l.index()]))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_build(workdir: &Path, a: &BuildArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = RunConfig::from_file(&resolve(workdir, &a.config))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let summary = pool.install(|| build(workdir, &cfg))?;
    out.write_all(summary.as_bytes())?;
    Ok(())
}

fn build(workdir: &Path, cfg: &RunConfig) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    let p = &cfg.pipeline;
    let classifier = cfg.classifier.classifier(workdir)?;
    let decomposer = cfg.decomposer.decomposer()?;
    let generation = if cfg.branches.contradiction && cfg.branches.generation {
        Some((cfg.generator.generator()?, cfg.ensemble(workdir, &classifier)?))
    } else {
        None
    };

    let sentences = read_sentences(&resolve(workdir, &cfg.input))?;
    let decomposed = decompose_instances(&sentences, decomposer.as_ref(), p.max_atoms)?;
    for id in &decomposed.dropped {
        log::warn!("dropped '{id}': invalid decomposition");
    }
    let instances = &decomposed.instances;

    let entail = if cfg.branches.entailment {
        let gold_e: Vec<SentenceInstance> = instances
            .iter()
            .filter(|i| i.gold == Label::Entailment)
            .cloned()
            .collect();
        build_entailment_pairs(&gold_e, classifier.as_ref(), p)?
    } else {
        Vec::new()
    };
    let neutral = if cfg.branches.neutral {
        let index = if cfg.branches.retrieval && !instances.is_empty() {
            Some(atom_index(instances, p)?)
        } else {
            None
        };
        build_neutral_pairs(instances, classifier.as_ref(), index.as_ref(), p)?
    } else {
        Vec::new()
    };
    let contra = if cfg.branches.contradiction {
        let gen = generation.as_ref().map(|(g, e)| GenerationBackends {
            generator: g.as_ref(),
            ensemble: e,
        });
        build_contradiction_pairs(instances, classifier.as_ref(), gen, p)?
    } else {
        Vec::new()
    };
    let split = assemble(cfg.split, entail, neutral, contra, p)?;

    let dir = resolve(workdir, &cfg.output_dir);
    std::fs::create_dir_all(&dir)?;
    write_split(&dir, &split)?;
    write_json(&dir.join(format!("{}.stats.json", split.name)), &stats(&split)?)?;
    let _ = writeln!(
        out,
        "{}: {} rows ({}), {} instances dropped",
        split.name,
        split.len(),
        label_counts(&split),
        decomposed.dropped.len()
    );

    if let Some(test_input) = &cfg.test_input {
        let test = read_sentences(&resolve(workdir, test_input))?;
        let (split, dropped) = build_test_split(&test, decomposer.as_ref(), p.max_atoms)?;
        write_split(&dir, &split)?;
        write_json(&dir.join("test.stats.json"), &stats(&split)?)?;
        let _ = writeln!(
            out,
            "test: {} instances ({}), {} dropped",
            split.len(),
            label_counts(&split),
            dropped.len()
        );
    }

    write_json(&dir.join("effective_config.json"), cfg)?;
    Ok(out)
}

pub fn cmd_eval(workdir: &Path, a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    if a.max_stratum == 0 {
        return Err(Error::InvalidInput("--max-stratum must be at least 1".into()));
    }
    let backends = a.backend.load(workdir)?;
    let classifier = backends.classifier.classifier(workdir)?;
    let test = read_grouped(&resolve(workdir, &a.test), false, a.backend.max_atoms)?;
    if test.is_empty() {
        return Err(Error::InvalidInput("test file holds no instances".into()));
    }
    let opts = EvalOptions {
        max_stratum: a.max_stratum,
    };
    if a.compare {
        let cmp = compare_modes(&test, classifier.as_ref(), &opts)?;
        write!(out, "{}", cmp.to_table())?;
        if let Some(p) = &a.output {
            write_json(&resolve(workdir, p), &cmp)?;
        }
        if let Some(p) = &a.csv {
            let mut csv = cmp.strict.to_csv();
            for r in [&cmp.sum, &cmp.sentence] {
                csv.extend(r.to_csv().lines().skip(1).map(|l| format!("{l}\n")));
            }
            std::fs::write(resolve(workdir, p), csv)?;
        }
    } else {
        let report = stratified_eval(&test, classifier.as_ref(), a.mode, &opts)?;
        write!(out, "{}", report.to_table())?;
        if let Some(p) = &a.output {
            write_json(&resolve(workdir, p), &report)?;
        }
        if let Some(p) = &a.csv {
            std::fs::write(resolve(workdir, p), report.to_csv())?;
        }
    }
    Ok(())
}

/// One line per atom, then the aggregated verdict.
pub fn render_verdict(v: &Verdict) -> String {
    let mut s = String::new();
    for (i, ((text, label), d)) in v.atom_texts.iter().zip(&v.atom_labels).zip(&v.atom_dists).enumerate() {
        s.push_str(&format!(
            "atom {}\t{:<13}\tp_e={:.4} p_n={:.4} p_c={:.4}\t{}\n",
            i + 1,
            label.as_str(),
            d.entailment(),
            d.neutral(),
            d.contradiction(),
            text
        ));
    }
    if let Some(t) = &v.summed {
        s.push_str(&format!("summed\ts_e={:.4} s_n={:.4} s_c={:.4}\n", t.s_e, t.s_n, t.s_c));
    }
    s.push_str(&format!("overall ({})\t{}\n", v.mode, v.aggregated));
    s
}

pub fn cmd_judge(workdir: &Path, a: &JudgeArgs, out: &mut dyn Write) -> Result<()> {
    if a.premise.trim().is_empty() {
        return Err(Error::InvalidInput("premise is empty".into()));
    }
    if a.hypothesis.trim().is_empty() {
        return Err(Error::InvalidInput("hypothesis is empty".into()));
    }
    let backends = a.backend.load(workdir)?;
    let classifier = backends.classifier.classifier(workdir)?;
    let atoms = if a.atoms.is_empty() {
        let decomposer = backends.decomposer.decomposer()?;
        decompose_into(decomposer.as_ref(), "judge", &a.hypothesis, a.backend.max_atoms)?
    } else {
        atoms_from_texts("judge", a.atoms.clone(), a.backend.max_atoms)?
    };
    let verdict = judge(&a.premise, &atoms, classifier.as_ref(), a.mode)?;
    if a.json {
        serde_json::to_writer_pretty(&mut *out, &verdict.to_record())?;
        writeln!(out)?;
    } else {
        write!(out, "{}", render_verdict(&verdict))?;
    }
    Ok(())
}

pub fn cmd_stats(workdir: &Path, a: &StatsArgs, out: &mut dyn Write) -> Result<()> {
    let path = resolve(workdir, &a.input);
    let split = match a.split {
        SplitName::Test => DatasetSplit::grouped(read_grouped(&path, true, a.max_atoms)?),
        name => DatasetSplit::atomic(name, read_atomic(&path)?)?,
    };
    serde_json::to_writer_pretty(&mut *out, &stats(&split)?)?;
    writeln!(out)?;
    Ok(())
}
