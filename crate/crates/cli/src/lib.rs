//! Command-line front end for `pairspec`.
//!
//! Exit codes: 0 on success, 2 on usage errors, 3 on data errors.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use pairspec::baseline::{BASELINE_ALPHA_COUNT, BASELINE_BETA_COUNT, BASELINE_K_RANGE};
use pairspec::cost::{BASELINE_GRID_POINTS, PAIR_GRID_POINTS, TYPICAL_MINUTIAE};
use pairspec::template_io::{self, TemplateDoc};
use pairspec::{
    baseline_match, compute_g, compute_template, score, synth_database, verification_cost, BaselineGrid,
    BaselineTemplate, CostBreakdown, CostModel, Database, Evaluator, Family, Matcher, MinutiaSet, RadialProfile,
    RotationPreset, SynthProfile, TemplatePair, Variant,
};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Marks an error as a usage error (exit code 2). Every other error is a
/// data error (exit code 3).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<UsageError>()) {
        EXIT_USAGE
    } else {
        EXIT_DATA
    }
}

#[derive(Debug, Parser)]
#[command(name = "pairspec", version, about = "Minutia-pair spectral fingerprint templates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the templates of one minutiae file.
    Template(TemplateArgs),
    /// Compare two minutiae or template files.
    Match(MatchArgs),
    /// Run the genuine/impostor protocol on a database directory.
    Eval(EvalArgs),
    /// Write a synthetic database.
    Synth(SynthArgs),
    /// Time template computation and scoring, and print the analytic costs.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProfileName {
    Mcyt,
    Verifinger,
    Synthetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    L,
    M,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RotationArg {
    Off,
    Narrow,
    Wide,
}

/// Matching configuration shared by all commands.
#[derive(Debug, Clone, Args)]
pub struct MatchOptions {
    /// Named parameter profile; the flags below override it.
    #[arg(long, value_enum, default_value = "mcyt")]
    pub profile: ProfileName,
    #[arg(long, value_enum, default_value = "m")]
    pub family: FamilyArg,
    /// Rotation search range: off, ±3° or ±4.5° in 1.5° steps.
    #[arg(long, value_enum)]
    pub rotation: Option<RotationArg>,
    /// Explicit rotation search `MAX_DEG:STEP_DEG`; overrides --rotation.
    #[arg(long, value_name = "MAX:STEP")]
    pub angles: Option<String>,
    /// Minimum minutia quality.
    #[arg(long)]
    pub q_min: Option<u32>,
    /// Treat the y axis of input files as pointing up.
    #[arg(long)]
    pub flip_y: bool,
}

impl MatchOptions {
    pub fn radial_profile(&self) -> RadialProfile {
        match self.profile {
            ProfileName::Mcyt => RadialProfile::Mcyt,
            ProfileName::Verifinger => RadialProfile::Verifinger,
            ProfileName::Synthetic => RadialProfile::for_image_width(SynthProfile::default().width),
        }
    }

    pub fn family(&self) -> Family {
        match self.family {
            FamilyArg::L => Family::L,
            FamilyArg::M => Family::M,
        }
    }

    fn angles(&self) -> anyhow::Result<Vec<f64>> {
        if let Some(range) = &self.angles {
            let (max, step) = range
                .split_once(':')
                .ok_or_else(|| usage(format!("--angles expects MAX:STEP, got {range:?}")))?;
            let max: f64 = max.trim().parse().map_err(|_| usage(format!("bad angle {max:?}")))?;
            let step: f64 = step.trim().parse().map_err(|_| usage(format!("bad angle step {step:?}")))?;
            if !(max >= 0.0 && step > 0.0 && max.is_finite()) {
                return Err(usage("--angles needs MAX >= 0 and STEP > 0"));
            }
            return Ok(pairspec::matching::angle_range(max, step));
        }
        let preset = match self.rotation {
            None | Some(RotationArg::Off) => RotationPreset::Off,
            Some(RotationArg::Narrow) => RotationPreset::Narrow,
            Some(RotationArg::Wide) => RotationPreset::Wide,
        };
        Ok(preset.angles())
    }

    pub fn matcher(&self) -> anyhow::Result<Matcher> {
        let mut m = Matcher::new(self.family(), self.radial_profile()).with_angles(self.angles()?);
        if let Some(q) = self.q_min {
            m.min_quality = q;
        }
        m.flip_y = self.flip_y;
        Ok(m)
    }
}

#[derive(Debug, Args)]
pub struct TemplateArgs {
    /// Minutiae file.
    pub input: PathBuf,
    /// Output template file.
    #[arg(short, long)]
    pub output: PathBuf,
    /// Write the single-minutia log-polar templates instead of pair templates.
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub opts: MatchOptions,
}

#[derive(Debug, Args)]
pub struct MatchArgs {
    /// Enrolled minutiae or template file.
    pub enrolled: PathBuf,
    /// Probe minutiae or template file.
    pub probe: PathBuf,
    /// Compare single-minutia log-polar templates; prints "score shift".
    #[arg(long)]
    pub baseline: bool,
    #[command(flatten)]
    pub opts: MatchOptions,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory of `<person>_<finger>_<image>.xyt` files.
    pub dir: PathBuf,
    /// Output directory for the CSV reports.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed of the impostor impression draw.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Restrict to these person ids, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub persons: Option<Vec<u32>>,
    #[command(flatten)]
    pub opts: MatchOptions,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    pub out: PathBuf,
    #[arg(long)]
    pub fingers: Option<usize>,
    #[arg(long)]
    pub impressions: Option<usize>,
    #[arg(long)]
    pub minutiae: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Drop every noise source.
    #[arg(long)]
    pub noiseless: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Database directory; a synthetic database is generated when absent.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Timed repetitions per operation.
    #[arg(long, default_value_t = 15)]
    pub reps: usize,
    /// Untimed warm-up repetitions per operation.
    #[arg(long, default_value_t = 3)]
    pub warmup: usize,
    /// Minutia count used by the analytic cost model.
    #[arg(long, default_value_t = TYPICAL_MINUTIAE)]
    pub z: u64,
    #[command(flatten)]
    pub opts: MatchOptions,
}

pub fn run(cli: Cli, out: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::Template(a) => cmd_template(&a, out),
        Command::Match(a) => cmd_match(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::Bench(a) => {
            let report = run_bench(&a)?;
            write!(out, "{report}")?;
            Ok(())
        }
    }
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

enum Input {
    Minutiae(MinutiaSet),
    Templates(Vec<TemplateDoc>),
}

fn read_input(path: &Path) -> anyhow::Result<Input> {
    let text = read_text(path)?;
    if template_io::looks_like_template(&text) {
        let docs = template_io::parse_documents(&text).with_context(|| format!("in {}", path.display()))?;
        Ok(Input::Templates(docs))
    } else {
        Ok(Input::Minutiae(pairspec::parse_minutiae_file(path)?))
    }
}

fn baseline_grid() -> BaselineGrid {
    BaselineGrid::new(
        BASELINE_ALPHA_COUNT,
        BASELINE_BETA_COUNT,
        BASELINE_K_RANGE,
        pairspec::spectral::DEFAULT_SIGMA,
    )
    .expect("default baseline grid is valid")
}

fn cmd_template(a: &TemplateArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let s = match read_input(&a.input)? {
        Input::Minutiae(s) => s,
        Input::Templates(_) => return Err(usage(format!("{} is already a template file", a.input.display()))),
    };
    let m = a.opts.matcher()?;
    let prepared = m.prepare(&s);
    let source = a.input.display().to_string();
    let docs = if a.baseline {
        let grid = baseline_grid();
        [Variant::Location, Variant::LocationOrientation]
            .into_iter()
            .map(|v| Ok(TemplateDoc::Baseline(compute_g(&prepared, &grid, v)?.with_source(&source))))
            .collect::<pairspec::Result<Vec<_>>>()?
    } else {
        let (loc, ori) = TemplatePair::compute(&prepared, &m.grids)?.into_parts();
        vec![
            TemplateDoc::Pair(loc.with_source(&source)),
            TemplateDoc::Pair(ori.with_source(&source)),
        ]
    };
    template_io::write_documents(&a.output, &docs)?;
    writeln!(
        out,
        "wrote {} templates from {} minutiae to {}",
        docs.len(),
        prepared.len(),
        a.output.display()
    )?;
    Ok(())
}

fn pair_templates(input: Input, m: &Matcher, path: &Path) -> anyhow::Result<TemplatePair> {
    match input {
        Input::Minutiae(s) => Ok(m.enroll(&s)?),
        Input::Templates(docs) => {
            let mut loc = None;
            let mut ori = None;
            for d in docs {
                match d {
                    TemplateDoc::Pair(t) if t.variant() == Variant::Location => loc = Some(t),
                    TemplateDoc::Pair(t) => ori = Some(t),
                    TemplateDoc::Baseline(_) => {
                        bail!("{} holds baseline templates; use --baseline", path.display())
                    }
                }
            }
            match (loc, ori) {
                (Some(l), Some(o)) => Ok(TemplatePair::new(l, o)?),
                _ => bail!("{} must hold one x and one xtheta template", path.display()),
            }
        }
    }
}

fn baseline_templates(input: Input, m: &Matcher, path: &Path) -> anyhow::Result<[BaselineTemplate; 2]> {
    match input {
        Input::Minutiae(s) => {
            let s = m.prepare(&s);
            let grid = baseline_grid();
            Ok([
                compute_g(&s, &grid, Variant::Location)?,
                compute_g(&s, &grid, Variant::LocationOrientation)?,
            ])
        }
        Input::Templates(docs) => {
            let mut loc = None;
            let mut ori = None;
            for d in docs {
                match d {
                    TemplateDoc::Baseline(t) if t.variant() == Variant::Location => loc = Some(t),
                    TemplateDoc::Baseline(t) => ori = Some(t),
                    TemplateDoc::Pair(_) => bail!("{} holds pair templates; drop --baseline", path.display()),
                }
            }
            match (loc, ori) {
                (Some(l), Some(o)) => Ok([l, o]),
                _ => bail!("{} must hold one x and one xtheta baseline template", path.display()),
            }
        }
    }
}

/// Column shifts of the baseline grid closest to the searched angles.
fn baseline_shifts(angles: &[f64], cols: usize) -> Vec<i64> {
    let step = std::f64::consts::TAU / cols as f64;
    let mut shifts: Vec<i64> = angles.iter().map(|a| (a / step).round() as i64).collect();
    shifts.sort_unstable();
    shifts.dedup();
    shifts
}

/// Formats with 9 significant digits.
pub fn sig9(v: f64) -> String {
    format!("{v:.8e}")
        .parse::<f64>()
        .map(|r| format!("{r}"))
        .unwrap_or_else(|_| v.to_string())
}

fn cmd_match(a: &MatchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let m = a.opts.matcher()?;
    let enrolled = read_input(&a.enrolled)?;
    let probe = read_input(&a.probe)?;
    if a.baseline {
        let [el, eo] = baseline_templates(enrolled, &m, &a.enrolled)?;
        let [pl, po] = baseline_templates(probe, &m, &a.probe)?;
        let shifts = baseline_shifts(&m.angles, el.cols());
        let rx = baseline_match(&pl, &el, &shifts)?;
        let rt = baseline_match(&po, &eo, &shifts)?;
        writeln!(
            out,
            "{} {} {} {}",
            sig9(rx.score),
            sig9(rt.score),
            sig9(rx.score + rt.score),
            rx.shift
        )?;
        return Ok(());
    }
    let e = pair_templates(enrolled, &m, &a.enrolled)?;
    let p = pair_templates(probe, &m, &a.probe)?;
    let r = m.compare(&e, &p)?;
    writeln!(
        out,
        "{} {} {} {}",
        sig9(r.score_x),
        sig9(r.score_xtheta),
        sig9(r.fused),
        sig9(r.phi_opt)
    )?;
    Ok(())
}

fn load_database(dir: &Path) -> anyhow::Result<Database> {
    if !dir.is_dir() {
        return Err(usage(format!("{} is not a directory", dir.display())));
    }
    let db = Database::load_dir(dir)?;
    if db.impression_count() == 0 {
        return Err(usage(format!("no .xyt files in {}", dir.display())));
    }
    Ok(db)
}

fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut db = load_database(&a.dir)?;
    if let Some(p) = &a.persons {
        db = db.restrict_persons(p);
        if db.impression_count() == 0 {
            return Err(usage("no impressions left after --persons"));
        }
    }
    let m = a.opts.matcher()?;
    let evaluator = Evaluator::new(&db, &m);
    let report = evaluator.run(a.seed)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    report.write_comparisons_csv(&db, &a.out.join("comparisons.csv"))?;
    report.write_roc_csv(&a.out.join("roc.csv"))?;
    if report.phi_histogram.is_some() {
        report.write_histogram_csv(&a.out.join("histogram.csv"))?;
    }
    eprintln!(
        "{} genuine, {} impostor comparisons; {} fingers skipped, {} failed templates",
        report.genuine.len(),
        report.impostor.len(),
        report.skipped_fingers,
        report.failed_templates
    );
    writeln!(out, "{}", report.summary_line())?;
    Ok(())
}

fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let mut p = SynthProfile::default();
    if let Some(v) = a.fingers {
        p.fingers = v;
    }
    if let Some(v) = a.impressions {
        p.impressions = v;
    }
    if let Some(v) = a.minutiae {
        p.minutiae = v;
    }
    if let Some(v) = a.seed {
        p.seed = v;
    }
    if a.noiseless {
        p.noise = pairspec::NoiseModel::none();
    }
    if p.fingers == 0 || p.impressions == 0 {
        return Err(usage("--fingers and --impressions must be positive"));
    }
    if p.minutiae < 2 {
        return Err(usage("--minutiae must be at least 2"));
    }
    let db = synth_database(&p)?;
    db.write_dir(&a.out)?;
    writeln!(
        out,
        "wrote {} impressions of {} fingers to {}",
        db.impression_count(),
        db.fingers().len(),
        a.out.display()
    )?;
    Ok(())
}

/// Median wall-clock time of one operation, in microseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub name: String,
    pub median_us: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub impressions: usize,
    pub timings: Vec<Timing>,
    /// Grid size of the timed pair templates.
    pub timed_grid_points: usize,
    pub pair_cost: CostBreakdown,
    pub baseline_cost: CostBreakdown,
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "inputs: {} impressions, pair grid of {} points",
            self.impressions, self.timed_grid_points
        )?;
        for t in &self.timings {
            writeln!(f, "{:<16} median {:>12.1} us", t.name, t.median_us)?;
        }
        writeln!(
            f,
            "pair-based: {} summation terms over {} grid points, {} per minutia, total {} units",
            self.pair_cost.summation_terms,
            PAIR_GRID_POINTS,
            self.pair_cost.terms_per_minutia,
            self.pair_cost.total()
        )?;
        writeln!(
            f,
            "single-minutia: {} summation terms over {} grid points, {} per minutia, total {} units",
            self.baseline_cost.summation_terms,
            BASELINE_GRID_POINTS,
            self.baseline_cost.terms_per_minutia,
            self.baseline_cost.total()
        )
    }
}

fn median_us(mut samples: Vec<f64>) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

fn time_op(name: &str, warmup: usize, reps: usize, mut op: impl FnMut() -> anyhow::Result<()>) -> anyhow::Result<Timing> {
    for _ in 0..warmup {
        op()?;
    }
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        op()?;
        samples.push(start.elapsed().as_secs_f64() * 1e6);
    }
    Ok(Timing {
        name: name.to_string(),
        median_us: median_us(samples),
    })
}

/// Times template computation and scoring over the impressions of a
/// database and evaluates the analytic cost model for the same grids.
pub fn run_bench(a: &BenchArgs) -> anyhow::Result<BenchReport> {
    if a.reps == 0 {
        return Err(usage("--reps must be positive"));
    }
    if a.z < 2 {
        return Err(usage("--z must be at least 2"));
    }
    let db = match &a.db {
        Some(dir) => load_database(dir)?,
        None => synth_database(&SynthProfile::default())?,
    };
    let m = a.opts.matcher()?;
    let sets: Vec<MinutiaSet> = db
        .fingers()
        .iter()
        .flat_map(|f| f.impressions.iter().map(|i| m.prepare(&i.minutiae)))
        .filter(|s| s.len() >= 2)
        .collect();
    if sets.len() < 2 {
        return Err(usage("benchmark needs at least two impressions with two usable minutiae"));
    }
    let grid = m.grids.orientation.clone();
    let family_name = format!("compute_{}", grid.family());
    let bgrid = baseline_grid();

    let mut timings = Vec::new();
    timings.push(time_op(&family_name, a.warmup, a.reps, || {
        for s in &sets {
            std::hint::black_box(compute_template(s, Variant::LocationOrientation, &grid)?);
        }
        Ok(())
    })?);
    timings.push(time_op("compute_G", a.warmup.min(1), a.reps.min(3), || {
        for s in sets.iter().take(4) {
            std::hint::black_box(compute_g(s, &bgrid, Variant::Location)?);
        }
        Ok(())
    })?);
    let templates = sets
        .iter()
        .map(|s| compute_template(s, Variant::LocationOrientation, &grid))
        .collect::<pairspec::Result<Vec<_>>>()?;
    timings.push(time_op("score", a.warmup, a.reps, || {
        for w in templates.windows(2) {
            std::hint::black_box(score(&w[0], &w[1])?);
        }
        Ok(())
    })?);
    for (t, per) in timings.iter_mut().zip([sets.len(), sets.len().min(4), templates.len() - 1]) {
        t.median_us /= per as f64;
        t.name.push_str(" (each)");
    }

    let n_phi = m.angles.len() as u64;
    let pair_cost = verification_cost(&CostModel::with_unit_costs(PAIR_GRID_POINTS, a.z, n_phi)?, true)?;
    let baseline_cost = verification_cost(&CostModel::with_unit_costs(BASELINE_GRID_POINTS, a.z, n_phi)?, false)?;
    Ok(BenchReport {
        impressions: sets.len(),
        timings,
        timed_grid_points: grid.len(),
        pair_cost,
        baseline_cost,
    })
}
