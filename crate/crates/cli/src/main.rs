use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::anyhow;
use clap::{Args, Parser, Subcommand, ValueEnum};

use emailnet_core::export::{export_component, ExportFormat};
use emailnet_core::feature_io::{read_feature_file, write_feature_file};
use emailnet_core::synth::{self, presets};
use emailnet_core::{analyze_records, scan_image, AnalysisOptions, FeatureRecord, FileImage, Policy, ScanConfig, ScenarioSpec, StopList};

/// Build and triage email co-reference networks from raw storage images.
#[derive(Parser)]
#[command(name = "emailnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan an image and write a feature file
    Scan(ScanArgs),
    /// Analyse a feature file and write reports and graph exports
    Analyze(AnalyzeArgs),
    /// Scan an image, then analyse it
    Run(RunArgs),
    /// Generate a synthetic image and its ground-truth manifest
    Gen(GenArgs),
}

#[derive(Args)]
struct ScanOpts {
    /// Bytes per scan chunk
    #[arg(long, default_value_t = ScanConfig::default().chunk_size)]
    chunk_size: usize,
    /// Bytes each chunk reads beyond its own range
    #[arg(long, default_value_t = ScanConfig::default().overlap)]
    overlap: usize,
    /// Nested gzip levels to open; 0 disables decompression
    #[arg(long, default_value_t = ScanConfig::default().max_recursion_depth)]
    max_depth: u32,
    /// Skip UTF-16LE addresses
    #[arg(long)]
    no_utf16: bool,
}

impl ScanOpts {
    fn config(&self) -> ScanConfig {
        ScanConfig {
            chunk_size: self.chunk_size,
            overlap: self.overlap,
            max_recursion_depth: self.max_depth,
            scan_utf16: !self.no_utf16,
            ..ScanConfig::default()
        }
    }
}

#[derive(Args)]
struct ScanArgs {
    image: PathBuf,
    /// Feature file to write
    #[arg(short, long)]
    output: PathBuf,
    #[command(flatten)]
    scan: ScanOpts,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Graphml,
    Dot,
    Csv,
    All,
}

#[derive(Args)]
struct AnalyzeOpts {
    /// Directory for reports and exports
    #[arg(short, long)]
    out_dir: PathBuf,
    /// Co-reference window in bytes
    #[arg(long, default_value_t = 4096, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    /// Components to report
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    top_k: u64,
    /// Domain stop-list, one domain per line
    #[arg(long)]
    stoplist: Option<PathBuf>,
    /// Classifier thresholds as key = value lines
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Graph export formats
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    format: Vec<FormatArg>,
    /// List singleton addresses in the reports
    #[arg(long)]
    include_singletons: bool,
    /// Prefix for component ids
    #[arg(long, default_value = "d1")]
    drive_id: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    features: PathBuf,
    #[command(flatten)]
    analyze: AnalyzeOpts,
}

#[derive(Args)]
struct RunArgs {
    image: PathBuf,
    #[command(flatten)]
    scan: ScanOpts,
    #[command(flatten)]
    analyze: AnalyzeOpts,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Owner,
    Server,
    TwoClusters,
    Communication,
    Logon,
    Software,
    Coauthor,
    Scale,
}

#[derive(Args)]
struct GenArgs {
    /// Image file to write
    #[arg(short, long, required_unless_present = "dump_spec")]
    out: Option<PathBuf>,
    /// Manifest file; defaults to the image path plus `.manifest.tsv`
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Scenario file
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Overrides the scenario seed
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the image size in bytes
    #[arg(long)]
    size: Option<u64>,
    /// Mail accounts for the server preset
    #[arg(long, default_value_t = 4)]
    accounts: usize,
    /// Minimum filler between regions for the two-clusters preset
    #[arg(long, default_value_t = 65536)]
    separation: u64,
    /// Print the scenario instead of generating it
    #[arg(long)]
    dump_spec: bool,
}

/// Failures map onto exit codes: analysis problems are 1, usage and I/O 2.
enum Failure {
    Analysis(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

trait OrUsage<T> {
    fn usage(self, what: impl FnOnce() -> String) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrUsage<T> for Result<T, E> {
    fn usage(self, what: impl FnOnce() -> String) -> Result<T, Failure> {
        self.map_err(|e| Failure::Usage(e.into().context(what())))
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(|f| BufWriter::with_capacity(1 << 20, f))
        .usage(|| format!("cannot create {}", path.display()))
}

fn scan_to_file(image: &Path, output: &Path, opts: &ScanOpts) -> Result<Vec<FeatureRecord>, Failure> {
    let config = opts.config();
    config.validate().usage(|| "bad scan options".to_owned())?;
    let started = Instant::now();
    let source = FileImage::open(image).usage(|| format!("cannot open {}", image.display()))?;
    let records = scan_image(&source, &config).usage(|| format!("cannot read {}", image.display()))?;
    let out = create(output)?;
    write_feature_file(&records, out).usage(|| format!("cannot write {}", output.display()))?;
    println!(
        "{}: {} records in {:.2}s",
        image.display(),
        records.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(records)
}

fn formats(args: &[FormatArg]) -> Vec<ExportFormat> {
    let mut out: Vec<ExportFormat> = Vec::new();
    for f in args {
        match f {
            FormatArg::Graphml => out.push(ExportFormat::GraphMl),
            FormatArg::Dot => out.push(ExportFormat::Dot),
            FormatArg::Csv => out.push(ExportFormat::Csv),
            FormatArg::All => out.extend(ExportFormat::ALL),
        }
    }
    out.sort();
    out.dedup();
    out
}

fn analyze_to_dir(records: &[FeatureRecord], opts: &AnalyzeOpts) -> Result<(), Failure> {
    let policy = match &opts.policy {
        Some(p) => Policy::load(p).usage(|| "cannot load policy".to_owned())?,
        None => Policy::default(),
    };
    let stoplist = match &opts.stoplist {
        Some(p) => StopList::load(p).usage(|| "cannot load stop-list".to_owned())?,
        None => StopList::default(),
    };
    let options = AnalysisOptions {
        drive_id: opts.drive_id.clone(),
        window: opts.window,
        top_k: opts.top_k as usize,
        include_singletons: opts.include_singletons,
        policy,
        stoplist,
    };
    let analysis = analyze_records(records, &options).map_err(|e| Failure::Analysis(e.into()))?;

    let dir = &opts.out_dir;
    fs::create_dir_all(dir).usage(|| format!("cannot create {}", dir.display()))?;
    let report = &analysis.report;
    let mut text = create(&dir.join("report.txt"))?;
    text.write_all(report.to_text().as_bytes())?;
    text.flush()?;
    report.write_json(create(&dir.join("report.json"))?)?;
    report.write_metrics_table(create(&dir.join("metrics.tsv"))?)?;

    let formats = formats(&opts.format);
    if !formats.is_empty() && !analysis.components.is_empty() {
        let exports = dir.join("components");
        fs::create_dir_all(&exports).usage(|| format!("cannot create {}", exports.display()))?;
        for c in &analysis.components {
            for &f in &formats {
                export_component(c, f, &exports).usage(|| format!("cannot export {}", c.component.id))?;
            }
        }
    }
    for c in &analysis.components {
        if let Err(e) = &c.centrality {
            eprintln!("emailnet: {}: {e}", c.component.id);
        }
    }
    println!(
        "{} nodes, {} edges, {} components ({} reported), {} singletons; reports in {}",
        report.totals.nodes,
        report.totals.edges,
        report.totals.components,
        report.components.len(),
        report.totals.singletons,
        dir.display()
    );
    Ok(())
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let file = File::open(&args.features).usage(|| format!("cannot open {}", args.features.display()))?;
    let parsed = read_feature_file(BufReader::new(file)).map_err(|e| {
        Failure::Analysis(anyhow!(e).context(format!("cannot parse {}", args.features.display())))
    })?;
    for w in parsed.warnings.iter().take(10) {
        eprintln!("emailnet: {}: skipped line {}: {}", args.features.display(), w.line, w.message);
    }
    if parsed.warnings.len() > 10 {
        eprintln!("emailnet: {} more lines skipped", parsed.warnings.len() - 10);
    }
    analyze_to_dir(&parsed.records, &args.analyze)
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let dir = &args.analyze.out_dir;
    fs::create_dir_all(dir).usage(|| format!("cannot create {}", dir.display()))?;
    let records = scan_to_file(&args.image, &dir.join("features.txt"), &args.scan)?;
    analyze_to_dir(&records, &args.analyze)
}

fn scenario(args: &GenArgs) -> Result<ScenarioSpec, Failure> {
    let seed = args.seed.unwrap_or(1);
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).usage(|| format!("cannot read {}", path.display()))?;
            ScenarioSpec::from_toml(&text).usage(|| format!("bad scenario {}", path.display()))?
        }
        (None, Some(p)) => match p {
            Preset::Owner => presets::owner_drive(seed),
            Preset::Server => presets::server_drive(args.accounts, seed),
            Preset::TwoClusters => presets::two_clusters(seed, args.separation),
            Preset::Communication => presets::communication(seed),
            Preset::Logon => presets::logon(seed),
            Preset::Software => presets::software(seed),
            Preset::Coauthor => presets::coauthor(seed),
            Preset::Scale => presets::scale_image(args.size.unwrap_or(2 << 30), seed),
        },
        (None, None) => return Err(Failure::Usage(anyhow!("give --spec or --preset"))),
    };
    if let Some(s) = args.seed {
        spec.rng_seed = s;
    }
    if let Some(size) = args.size {
        spec.image_size = size;
    }
    Ok(spec)
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let spec = scenario(args)?;
    if args.dump_spec {
        print!("{}", spec.to_toml());
        return Ok(());
    }
    let out = args.out.as_ref().expect("clap requires --out");
    let manifest_path = args.manifest.clone().unwrap_or_else(|| {
        let mut p = out.as_os_str().to_owned();
        p.push(".manifest.tsv");
        PathBuf::from(p)
    });
    let started = Instant::now();
    let manifest = synth::generate_to_writer(&spec, create(out)?).map_err(|e| match e {
        synth::SynthError::Verify { .. } => Failure::Analysis(e.into()),
        other => Failure::Usage(other.into()),
    })?;
    manifest.write_tsv(create(&manifest_path)?)?;
    println!(
        "{}: {} bytes, {} planted occurrences in {:.2}s; manifest {}",
        out.display(),
        spec.image_size,
        manifest.len(),
        started.elapsed().as_secs_f64(),
        manifest_path.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scan(a) => scan_to_file(&a.image, &a.output, &a.scan).map(|_| ()),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Run(a) => cmd_run(a),
        Command::Gen(a) => cmd_gen(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Analysis(e)) => {
            eprintln!("emailnet: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("emailnet: {e:#}");
            ExitCode::from(2)
        }
    }
}
