//! Command-line front end. Every subcommand writes a line-oriented text
//! report to the given writer and, with `--out`, machine-readable files.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::bench::{self, BenchParams, BenchmarkKind, BenchmarkSpec};
use crate::compare::{self, CompareConfig};
use crate::dd::{self, DdConfig};
use crate::ir::{self, DeviceModel, Dt};
use crate::sched::{self, Policy, TimedCircuit, TimedInstruction};
use crate::sim::{self, DensityMatrixSimulator};
use crate::slice::{self, SliceSummary};
use crate::tuner::{self, Mode, TuneConfig};
use crate::{derive_seed, Error, Result};

pub const DEVICE_ENV: &str = "SLACKSTITCH_DEVICE";

const REFERENCE_DEVICE: &str = include_str!("../devices/reference.toml");

#[derive(Debug, Parser)]
#[command(name = "slackstitch", version, about = "Slack-window gate scheduling for quantum circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit benchmark circuits with their accepted outputs.
    Bench(BenchArgs),
    /// Schedule a circuit and list its slack windows.
    #[command(alias = "windows")]
    Schedule(ScheduleArgs),
    /// Build the slice+inverse circuit of every window and check the depth criteria.
    Slice(SliceArgs),
    /// Tune window positions and stitch the result.
    Tune(TuneArgs),
    /// Execute a schedule on the simulator.
    Run(RunArgs),
    /// Evaluate every scheduling policy on one circuit.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// OpenQASM 2 input file.
    #[arg(long, conflicts_with = "bench")]
    input: Option<PathBuf>,
    /// Built-in benchmark: ghz, qft, qaoa, adder, rep.
    #[arg(long)]
    bench: Option<String>,
    /// Benchmark width.
    #[arg(long)]
    n: Option<usize>,
    /// Accepted outputs for a file input, comma separated. Defaults to the
    /// modal outputs of the noiseless circuit.
    #[arg(long, value_delimiter = ',')]
    accepted: Vec<String>,
    /// Target bitstring of the QFT benchmark.
    #[arg(long)]
    qft_target: Option<String>,
}

#[derive(Debug, Args)]
struct DeviceArgs {
    /// Device TOML file. Falls back to the built-in reference device.
    #[arg(long, env = DEVICE_ENV)]
    device: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuningArgs {
    /// Total tuning circuit slots shared by all tunable windows.
    #[arg(long, default_value_t = tuner::DEFAULT_BUDGET)]
    budget: usize,
    /// Shots per tuning circuit.
    #[arg(long, default_value_t = tuner::DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark kind, or all.
    #[arg(long, default_value = "all")]
    bench: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    qft_target: Option<String>,
    /// Directory for `<name>.qasm` and `<name>.accepted.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = PolicyArg::Alap)]
    policy: PolicyArg,
    /// Write the schedule as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SliceArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    /// Directory for one `.qasm` per window plus `manifest.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TuneArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = ModeArg::TsSiC)]
    mode: ModeArg,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, value_enum, default_value_t = DdArg::Off)]
    dd: DdArg,
    #[arg(long, default_value_t = dd::DEFAULT_HEURISTIC_FACTOR)]
    dd_factor: f64,
    /// Directory for `schedule.json`, `report.txt` and `report.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Schedule JSON written by `schedule` or `tune`.
    #[arg(long, conflicts_with_all = ["input", "bench"])]
    schedule: Option<PathBuf>,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    #[arg(long, value_enum, default_value_t = PolicyArg::Alap)]
    policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = ModeArg::None)]
    mode: ModeArg,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, value_enum, default_value_t = DdArg::Off)]
    dd: DdArg,
    #[arg(long, default_value_t = dd::DEFAULT_HEURISTIC_FACTOR)]
    dd_factor: f64,
    #[arg(long, default_value_t = 10_000)]
    eval_shots: u64,
    /// Write the outcome counts as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    device: DeviceArgs,
    #[command(flatten)]
    tuning: TuningArgs,
    #[arg(long, default_value_t = 10_000)]
    eval_shots: u64,
    #[arg(long, default_value_t = dd::DEFAULT_HEURISTIC_FACTOR)]
    dd_factor: f64,
    /// Directory for `compare.txt` and `compare.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PolicyArg {
    Alap,
    Asap,
    Middle,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Alap => Policy::Alap,
            PolicyArg::Asap => Policy::Asap,
            PolicyArg::Middle => Policy::Middle,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum ModeArg {
    None,
    TsSi,
    TsSiC,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum DdArg {
    Off,
    On,
    Heuristic,
}

impl DdArg {
    fn config(self, factor: f64) -> Result<Option<DdConfig>> {
        if factor.is_nan() || factor <= 0.0 {
            return Err(Error::Usage(format!("--dd-factor must be positive, got {factor}")));
        }
        Ok(match self {
            DdArg::Off => None,
            DdArg::On => Some(DdConfig::default()),
            DdArg::Heuristic => Some(DdConfig {
                heuristic: true,
                heuristic_factor: factor,
                ..DdConfig::default()
            }),
        })
    }
}

/// On-disk form of a schedule. The device is supplied separately.
#[derive(Debug, Serialize, Deserialize)]
struct ScheduleDoc {
    name: String,
    num_qubits: usize,
    total_duration: Dt,
    accepted: Vec<String>,
    timed: Vec<TimedInstruction>,
}

impl ScheduleDoc {
    fn new(name: &str, tc: &TimedCircuit, accepted: &[String]) -> Self {
        ScheduleDoc {
            name: name.to_string(),
            num_qubits: tc.num_qubits(),
            total_duration: tc.total_duration(),
            accepted: accepted.to_vec(),
            timed: tc.timed().to_vec(),
        }
    }

    fn into_timed(self, device: &Arc<DeviceModel>) -> Result<TimedCircuit> {
        TimedCircuit::with_total_duration(device.clone(), self.num_qubits, self.timed, self.total_duration)
    }
}

/// Runs the binary: parses `std::env::args`, prints to stdout, and reports
/// errors on stderr with a nonzero exit code.
pub fn main() -> ExitCode {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(std::env::args_os(), &mut lock) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
/// `--help` and `--version` are written to `out` and succeed.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            write_out(out, &e.render().to_string())?;
            return Ok(());
        }
        Err(e) => {
            let msg = e.render().to_string();
            let msg = msg.strip_prefix("error: ").unwrap_or(&msg).trim_end();
            return Err(Error::Usage(msg.to_string()));
        }
    };
    let text = match cli.command {
        Command::Bench(a) => cmd_bench(a)?,
        Command::Schedule(a) => cmd_schedule(a)?,
        Command::Slice(a) => cmd_slice(a)?,
        Command::Tune(a) => cmd_tune(a)?,
        Command::Run(a) => cmd_run(a)?,
        Command::Compare(a) => cmd_compare(a)?,
    };
    write_out(out, &text)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::Io {
        path: "<output>".into(),
        source: e,
    })
}

fn load_device(a: &DeviceArgs) -> Result<Arc<DeviceModel>> {
    let d = match &a.device {
        Some(p) => DeviceModel::load(p)?,
        None => DeviceModel::from_toml_str(REFERENCE_DEVICE)?,
    };
    Ok(Arc::new(d))
}

fn bench_params(target: &Option<String>) -> BenchParams {
    BenchParams {
        qft_target: target.clone(),
        ..BenchParams::default()
    }
}

fn load_input(a: &InputArgs) -> Result<BenchmarkSpec> {
    match (&a.input, &a.bench) {
        (Some(path), None) => {
            let bytes = read(path)?;
            let circuit = crate::qasm::parse_bytes(&bytes).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
            let accepted = if a.accepted.is_empty() {
                bench::modal_outputs(&circuit)?
            } else {
                a.accepted.clone()
            };
            let name = path.file_stem().map_or("input".into(), |s| s.to_string_lossy().into_owned());
            BenchmarkSpec::from_file(&name, circuit, accepted)
        }
        (None, Some(kind)) => {
            let kind: BenchmarkKind = kind.parse()?;
            let n = a.n.unwrap_or(kind.default_size());
            let mut spec = bench::make_benchmark(kind, n, &bench_params(&a.qft_target))?;
            if !a.accepted.is_empty() {
                spec.accepted = a.accepted.clone();
            }
            Ok(spec)
        }
        _ => Err(Error::Usage("give exactly one of --input or --bench".into())),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.display().to_string(),
            source: e,
        })?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn validated(spec: &BenchmarkSpec, device: &DeviceModel) -> Result<()> {
    ir::validate(&spec.circuit, device)?;
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<String> {
    let kinds: Vec<BenchmarkKind> = if a.bench.eq_ignore_ascii_case("all") {
        BenchmarkKind::ALL.to_vec()
    } else {
        vec![a.bench.parse()?]
    };
    let params = bench_params(&a.qft_target);
    let mut text = String::new();
    for kind in kinds {
        let n = a.n.filter(|_| !a.bench.eq_ignore_ascii_case("all")).unwrap_or(kind.default_size());
        let spec = bench::make_benchmark(kind, n, &params)?;
        let qasm = crate::qasm::serialize(&spec.circuit);
        let _ = writeln!(
            text,
            "# {} qubits={} gates={} cx_depth={} accepted={}",
            spec.name,
            spec.num_qubits,
            spec.circuit.len(),
            ir::cx_depth(&spec.circuit),
            spec.accepted.join("+")
        );
        match &a.out {
            Some(dir) => {
                write_file(&dir.join(format!("{}.qasm", spec.name)), &qasm)?;
                let manifest = serde_json::json!({
                    "name": spec.name,
                    "num_qubits": spec.num_qubits,
                    "accepted": spec.accepted,
                });
                write_file(
                    &dir.join(format!("{}.accepted.json", spec.name)),
                    &serde_json::to_string_pretty(&manifest)?,
                )?;
            }
            None => text.push_str(&qasm),
        }
    }
    Ok(text)
}

fn windows_table(tc: &TimedCircuit) -> String {
    let mut text = String::from("window\tqubit\tstart\tduration\tblock\tblock_start\tmax_offset\toffset\ttunable\n");
    for w in sched::find_slack_windows(tc) {
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            w.window_id,
            w.qubit,
            w.start,
            w.duration,
            w.gate_block.len(),
            w.block_start,
            w.max_offset(),
            w.offset(),
            w.is_tunable()
        );
    }
    text
}

fn cmd_schedule(a: ScheduleArgs) -> Result<String> {
    let device = load_device(&a.device)?;
    let spec = load_input(&a.input)?;
    validated(&spec, &device)?;
    let policy: Policy = a.policy.into();
    let tc = sched::schedule(&spec.circuit, &device, policy)?;
    let mut text = format!(
        "# schedule name={} policy={} total_duration={}\n",
        spec.name,
        policy,
        tc.total_duration()
    );
    text.push_str(&tc.report());
    text.push_str(&windows_table(&tc));
    if let Some(path) = &a.out {
        write_file(path, &serde_json::to_string_pretty(&ScheduleDoc::new(&spec.name, &tc, &spec.accepted))?)?;
    }
    Ok(text)
}

fn cmd_slice(a: SliceArgs) -> Result<String> {
    let device = load_device(&a.device)?;
    let spec = load_input(&a.input)?;
    validated(&spec, &device)?;
    let alap = sched::schedule(&spec.circuit, &device, Policy::Alap)?;
    let original = ir::cx_depth(&spec.circuit);
    let mut summaries = Vec::new();
    let mut text = format!("# slice name={} original_cx_depth={}\n", spec.name, original);
    text.push_str("window\tqubit\toffset_min\toffset_max\tslice_cx\tsi_cx\tcriteria\n");
    for w in sched::find_slack_windows(&alap) {
        let s = slice::build_slice(&alap, &w)?;
        let si = slice::build_si_circuit(&s, w.offset())?;
        let summary = SliceSummary {
            window_id: w.window_id,
            qubit: w.qubit,
            offset_range: si.tunable_offset_range,
            slice_cx_depth: s.cx_depth(),
            si_cx_depth: si.cx_depth(),
            original_cx_depth: original,
            passes: slice::passes_depth_criteria(&si, &spec.circuit),
        };
        let _ = writeln!(
            text,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            summary.window_id,
            summary.qubit,
            summary.offset_range.0,
            summary.offset_range.1,
            summary.slice_cx_depth,
            summary.si_cx_depth,
            if summary.passes { "pass" } else { "fail" }
        );
        if let Some(dir) = &a.out {
            let qasm = crate::qasm::serialize(&si.timed().to_padded_circuit());
            write_file(&dir.join(format!("{}_w{}.qasm", spec.name, w.window_id)), &qasm)?;
        }
        summaries.push(summary);
    }
    if let Some(dir) = &a.out {
        write_file(&dir.join("manifest.json"), &serde_json::to_string_pretty(&summaries)?)?;
    }
    Ok(text)
}

struct Pipeline {
    schedule: TimedCircuit,
    baseline_duration: Dt,
    report: Option<tuner::TuningReport>,
    inserted: usize,
}

fn build_schedule(
    spec: &BenchmarkSpec,
    device: &Arc<DeviceModel>,
    policy: Policy,
    mode: ModeArg,
    tuning: &TuningArgs,
    dd_cfg: Option<DdConfig>,
) -> Result<Pipeline> {
    validated(spec, device)?;
    let (schedule, baseline_duration, report) = match mode {
        ModeArg::None => {
            let tc = sched::schedule(&spec.circuit, device, policy)?;
            let d = tc.total_duration();
            (tc, d, None)
        }
        ModeArg::TsSi | ModeArg::TsSiC => {
            let cfg = TuneConfig {
                mode: if mode == ModeArg::TsSi { Mode::TsSi } else { Mode::TsSiC },
                budget: tuning.budget,
                shots: tuning.shots,
                seed: tuning.seed,
            };
            let out = tuner::run_pipeline(&spec.circuit, device, &DensityMatrixSimulator::new(), &cfg)?;
            (out.stitched.schedule, out.baseline.total_duration(), Some(out.report))
        }
    };
    let (schedule, inserted) = match dd_cfg {
        Some(cfg) => dd::apply_dd(&schedule, &cfg)?,
        None => (schedule, 0),
    };
    Ok(Pipeline {
        schedule,
        baseline_duration,
        report,
        inserted,
    })
}

fn cmd_tune(a: TuneArgs) -> Result<String> {
    if a.mode == ModeArg::None {
        return Err(Error::Usage("tune needs --mode ts-si or ts-si-c".into()));
    }
    let device = load_device(&a.device)?;
    let spec = load_input(&a.input)?;
    let dd_cfg = a.dd.config(a.dd_factor)?;
    let p = build_schedule(&spec, &device, Policy::Alap, a.mode, &a.tuning, dd_cfg)?;
    let report = p.report.expect("tuning modes produce a report");
    let mut text = format!(
        "# tune name={} baseline_duration={} stitched_duration={} dd_inserted={}\n",
        spec.name,
        p.baseline_duration,
        p.schedule.total_duration(),
        p.inserted
    );
    text.push_str(&report.to_text());
    if let Some(dir) = &a.out {
        write_file(
            &dir.join("schedule.json"),
            &serde_json::to_string_pretty(&ScheduleDoc::new(&spec.name, &p.schedule, &spec.accepted))?,
        )?;
        write_file(&dir.join("report.txt"), &text)?;
        write_file(&dir.join("report.json"), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(text)
}

fn cmd_run(a: RunArgs) -> Result<String> {
    let device = load_device(&a.device)?;
    let (name, tc, accepted, inserted) = match &a.schedule {
        Some(path) => {
            let doc: ScheduleDoc = serde_json::from_slice(&read(path)?)
                .map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
            let name = doc.name.clone();
            let accepted = doc.accepted.clone();
            (name, doc.into_timed(&device)?, accepted, 0)
        }
        None => {
            let spec = load_input(&a.input)?;
            let dd_cfg = a.dd.config(a.dd_factor)?;
            let p = build_schedule(&spec, &device, a.policy.into(), a.mode, &a.tuning, dd_cfg)?;
            (spec.name, p.schedule, spec.accepted, p.inserted)
        }
    };
    if accepted.is_empty() {
        return Err(Error::Usage(format!("{name}: no accepted outputs")));
    }
    let probs = sim::exact_distribution(&tc, &device)?;
    let dist = sim::sample_distribution(&probs, a.eval_shots, derive_seed(a.tuning.seed, &[0]));
    let ideal = sim::ideal_distribution(&tc.to_circuit())?;
    let pos = sim::pos(&dist, &accepted)?;
    let hellinger = sim::hellinger_fidelity(&dist.probabilities(), &ideal)?;
    let mut text = format!(
        "# run name={} total_duration={} dd_inserted={} shots={} seed={}\n",
        name,
        tc.total_duration(),
        inserted,
        a.eval_shots,
        a.tuning.seed
    );
    let _ = writeln!(text, "pos\t{pos:.6}");
    let _ = writeln!(text, "hellinger\t{hellinger:.6}");
    let _ = writeln!(text, "accepted\t{}", accepted.join("+"));
    for (bits, count) in &dist.counts {
        let _ = writeln!(text, "{bits}\t{count}");
    }
    if let Some(path) = &a.out {
        let doc = serde_json::json!({
            "name": name,
            "total_duration": tc.total_duration(),
            "shots": dist.shots,
            "counts": dist.counts,
            "pos": pos,
            "hellinger": hellinger,
        });
        write_file(path, &serde_json::to_string_pretty(&doc)?)?;
    }
    Ok(text)
}

fn cmd_compare(a: CompareArgs) -> Result<String> {
    let device = load_device(&a.device)?;
    let spec = load_input(&a.input)?;
    validated(&spec, &device)?;
    if a.dd_factor.is_nan() || a.dd_factor <= 0.0 {
        return Err(Error::Usage(format!("--dd-factor must be positive, got {}", a.dd_factor)));
    }
    let cfg = CompareConfig {
        budget: a.tuning.budget,
        shots: a.tuning.shots,
        eval_shots: a.eval_shots,
        seed: a.tuning.seed,
        dd_factor: a.dd_factor,
    };
    let report = compare::compare(&spec, &device, &cfg)?;
    let text = report.to_text();
    if let Some(dir) = &a.out {
        write_file(&dir.join("compare.txt"), &text)?;
        write_file(&dir.join("compare.json"), &serde_json::to_string_pretty(&report)?)?;
    }
    Ok(text)
}
