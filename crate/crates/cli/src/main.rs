use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hexlift::bundle::{
    load_model, write_json, DatasetSection, ExportBundle, LayoutSection, ModelFile, ResidualSection,
    TourSection,
};
use hexlift::compare::{best_layouts, common_b1_grid, tuning_plots};
use hexlift::diagnostics::predict_2d;
use hexlift::hexgrid::{default_b1, max_b1, DEFAULT_BUFFER};
use hexlift::io::{
    fmt_real, load_dataset, load_labels, load_layout, load_rows, write_bins, write_dataset, write_edges,
    write_labels, write_layout, write_metric_table, write_points, write_residuals, write_table,
    write_tuning,
};
use hexlift::metrics::MetricOptions;
use hexlift::simdata::{gen_2nc7, SyntheticSpec};
use hexlift::tour::{anchor_bases, project};
use hexlift::tuning::{sweep_b1, sweep_cutoff, DEFAULT_CUTOFFS, DEFAULT_SWEEP_POINTS};
use hexlift::{
    build_metric_table, fit_layout, scale_layout, CenterMode, Dataset, Fit, FitParams, ScaledLayout,
    TuningRecord,
};

const THREADS_VAR: &str = "HEXLIFT_THREADS";

#[derive(Parser)]
#[command(name = "hexlift", version, about = "Fit hexbin wireframe models to 2-D layouts and compare layouts by hexbin error")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the two-cluster synthetic data set.
    Simulate(SimulateArgs),
    /// Fit one layout and write a bundle with the model and residuals.
    Fit(FitArgs),
    /// Sweep b1 and the low-count cutoff for one layout.
    Sweep(SweepArgs),
    /// Compare several layouts of the same data.
    Compare(CompareArgs),
    /// Place new observations on a fitted layout.
    Predict(PredictArgs),
    /// Write a self-contained bundle for the viewer.
    ExportUi(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum CenterArg {
    Lattice,
    MemberMean,
}

impl From<CenterArg> for CenterMode {
    fn from(c: CenterArg) -> Self {
        match c {
            CenterArg::Lattice => CenterMode::Lattice,
            CenterArg::MemberMean => CenterMode::MemberMean,
        }
    }
}

#[derive(Args)]
struct ModelOpts {
    /// Hexagons per row (default: cube root of n, rounded up).
    #[arg(long)]
    b1: Option<usize>,
    /// Margin added around the layout, as a fraction of its width.
    #[arg(long = "buffer", default_value_t = DEFAULT_BUFFER)]
    q: f64,
    /// Drop bins holding at most this share of the observations.
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,
    /// Where each bin sits in the layout.
    #[arg(long, value_enum, default_value = "lattice")]
    center_mode: CenterArg,
    /// Scale both layout axes to [0, 1] instead of keeping the aspect ratio.
    #[arg(long)]
    stretch: bool,
}

impl ModelOpts {
    fn params(&self, n: usize) -> FitParams {
        FitParams {
            b1: Some(self.b1.unwrap_or_else(|| default_b1(n))),
            q: self.q,
            cutoff: self.cutoff,
            center_mode: self.center_mode.into(),
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    n_per_cluster: usize,
    #[arg(long, default_value_t = 0.05)]
    noise_sd: f64,
    #[arg(long, default_value_t = 3.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    /// Layout name in the bundle (default: the layout file stem).
    #[arg(long)]
    layout_id: Option<String>,
    #[command(flatten)]
    model: ModelOpts,
    /// Embed the data values instead of referencing the data file.
    #[arg(long)]
    inline_data: bool,
    /// Also write bins, edges, residuals and the scaled layout as CSV here.
    #[arg(long)]
    csv_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepOpts {
    /// b1 values to sweep (default: log-spaced from 2 to the largest useful value).
    #[arg(long = "b1", value_delimiter = ',')]
    b1_values: Vec<usize>,
    /// Number of points in the default b1 grid.
    #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
    points: usize,
    #[arg(long = "buffer", default_value_t = DEFAULT_BUFFER)]
    q: f64,
    /// Cutoff applied during the b1 sweep.
    #[arg(long, default_value_t = 0.0)]
    cutoff: f64,
    #[arg(long, value_enum, default_value = "lattice")]
    center_mode: CenterArg,
    #[arg(long)]
    stretch: bool,
}

impl SweepOpts {
    fn template(&self) -> FitParams {
        FitParams {
            b1: None,
            q: self.q,
            cutoff: self.cutoff,
            center_mode: self.center_mode.into(),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    #[arg(long)]
    layout_id: Option<String>,
    #[command(flatten)]
    sweep: SweepOpts,
    /// Cutoffs for the cutoff sweep, ascending (default: a fixed small grid,
    /// keeping only values below the largest bin share).
    #[arg(long, value_delimiter = ',')]
    cutoffs: Vec<f64>,
    /// b1 values at which cutoffs are swept (default: cube root of n).
    #[arg(long, value_delimiter = ',')]
    cutoff_b1: Vec<usize>,
    #[arg(long)]
    out: PathBuf,
    /// Also write the tuning curves as JSON for plotting.
    #[arg(long)]
    plot_json: Option<PathBuf>,
}

#[derive(Args)]
struct MetricOpts {
    /// Binwidth at which layouts are scored.
    #[arg(long, default_value_t = 0.05)]
    reference_a1: f64,
    /// Random triplets per layout (default: ten per observation).
    #[arg(long)]
    n_triplets: Option<usize>,
    /// Largest number of point pairs used for the rank correlation.
    #[arg(long, default_value_t = 200_000)]
    max_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Layout files; each is named by its file stem.
    #[arg(long = "layout", required = true, num_args = 1..)]
    layouts: Vec<PathBuf>,
    #[command(flatten)]
    sweep: SweepOpts,
    #[command(flatten)]
    metrics: MetricOpts,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// A bundle or a standalone model file.
    #[arg(long)]
    model: PathBuf,
    /// Which layout of a bundle to use (default: the first).
    #[arg(long)]
    layout_id: Option<String>,
    #[arg(long)]
    input: PathBuf,
    /// Report positions in the scaled [0, 1] layout units.
    #[arg(long)]
    scaled: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long = "layout", required = true, num_args = 1..)]
    layouts: Vec<PathBuf>,
    /// One-column file of integer class labels, for coloring.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[command(flatten)]
    model: ModelOpts,
    /// Number of points in the b1 sweep stored with each layout.
    #[arg(long, default_value_t = DEFAULT_SWEEP_POINTS)]
    points: usize,
    #[command(flatten)]
    metrics: MetricOpts,
    /// Random frames the tour passes through.
    #[arg(long, default_value_t = 5)]
    anchors: usize,
    /// Interpolation steps between tour frames.
    #[arg(long, default_value_t = 30)]
    steps: usize,
    /// Static projections to write when --projections-dir is given.
    #[arg(long, default_value_t = 3)]
    frames: usize,
    #[arg(long)]
    projections_dir: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    configure_threads()?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Sweep(a) => sweep(a),
        Command::Compare(a) => compare(a),
        Command::Predict(a) => predict(a),
        Command::ExportUi(a) => export_ui(a),
    }
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    Ok(())
}

fn read_data(path: &Path) -> Result<Dataset> {
    load_dataset(path).with_context(|| format!("reading data from {}", path.display()))
}

fn read_layout(path: &Path, id: Option<&str>, data: &Dataset, stretch: bool) -> Result<ScaledLayout> {
    let raw = load_layout(path, id).with_context(|| format!("reading layout from {}", path.display()))?;
    if raw.len() != data.n() {
        bail!(
            "row count mismatch: data has {} rows, layout {} has {}",
            data.n(),
            path.display(),
            raw.len()
        );
    }
    scale_layout(&raw, !stretch).with_context(|| format!("scaling layout {}", path.display()))
}

fn read_layouts(paths: &[PathBuf], data: &Dataset, stretch: bool) -> Result<Vec<ScaledLayout>> {
    let layouts = paths
        .iter()
        .map(|p| read_layout(p, None, data, stretch))
        .collect::<Result<Vec<_>>>()?;
    let mut seen = HashSet::new();
    for l in &layouts {
        if !seen.insert(l.layout_id.as_str()) {
            bail!("two layout files are both named {:?}; rename one", l.layout_id);
        }
    }
    Ok(layouts)
}

fn layout_section(fit: &Fit, layout: &ScaledLayout, mode: CenterMode, tuning: Vec<TuningRecord>) -> LayoutSection {
    LayoutSection {
        layout_id: layout.layout_id.clone(),
        scaled: layout.clone(),
        model: ModelFile::from_fit(fit, mode),
        residuals: ResidualSection::from_fit(fit),
        tuning,
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let (data, labels) = gen_2nc7(&SyntheticSpec {
        n_per_cluster: a.n_per_cluster,
        noise_sd: a.noise_sd,
        separation: a.separation,
        seed: a.seed,
    })?;
    write_dataset(&a.out_dir.join("data.csv"), &data)?;
    write_labels(&a.out_dir.join("labels.csv"), &labels)?;
    Ok(())
}

fn fit(a: FitArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    let layout = read_layout(&a.layout, a.layout_id.as_deref(), &data, a.model.stretch)?;
    let params = a.model.params(data.n());
    let fit = fit_layout(&data, &layout, &params).context("fitting the model")?;

    let dataset = if a.inline_data {
        DatasetSection::inline(&data, None)
    } else {
        DatasetSection::reference(&data, &a.data.to_string_lossy())
    };
    let mut bundle = ExportBundle::new(dataset);
    bundle
        .layouts
        .push(layout_section(&fit, &layout, params.center_mode, Vec::new()));
    bundle.validate()?;
    write_json(&a.out, &bundle)?;

    if let Some(dir) = &a.csv_dir {
        write_bins(&dir.join("bins.csv"), &fit.model)?;
        write_edges(&dir.join("edges.csv"), &fit.model)?;
        write_residuals(&dir.join("residuals.csv"), &fit.binning, &fit.residuals)?;
        write_layout(&dir.join("layout_scaled.csv"), &layout)?;
    }
    println!("hbe={}", fmt_real(fit.residuals.hbe));
    Ok(())
}

fn b1_grid(opts: &SweepOpts, n: usize, layouts: &[ScaledLayout]) -> Result<Vec<usize>> {
    if opts.b1_values.is_empty() {
        Ok(common_b1_grid(n, layouts, opts.points)?)
    } else {
        Ok(opts.b1_values.clone())
    }
}

/// Records keyed by layout, b1 and cutoff so overlapping sweeps appear once.
fn merge(groups: Vec<Vec<TuningRecord>>) -> Vec<TuningRecord> {
    let mut unique: BTreeMap<(String, usize, u64), TuningRecord> = BTreeMap::new();
    for r in groups.into_iter().flatten() {
        unique.insert((r.layout_id.clone(), r.b1, r.cutoff.to_bits()), r);
    }
    let mut out: Vec<TuningRecord> = unique.into_values().collect();
    out.sort_by(|x, y| {
        x.a1.total_cmp(&y.a1)
            .then(x.cutoff.total_cmp(&y.cutoff))
            .then(x.layout_id.cmp(&y.layout_id))
    });
    out
}

fn sweep(a: SweepArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    let layout = read_layout(&a.layout, a.layout_id.as_deref(), &data, a.sweep.stretch)?;
    let template = a.sweep.template();
    let grid = b1_grid(&a.sweep, data.n(), std::slice::from_ref(&layout))?;
    let mut groups = vec![sweep_b1(&data, &layout, &grid, a.sweep.cutoff, &template).context("b1 sweep")?];

    let cutoff_b1 = if a.cutoff_b1.is_empty() {
        vec![default_b1(data.n()).min(max_b1(data.n(), layout.r2))]
    } else {
        a.cutoff_b1.clone()
    };
    for &b1 in &cutoff_b1 {
        let cutoffs = if a.cutoffs.is_empty() {
            // keep defaults the largest bin survives
            let fit = fit_layout(&data, &layout, &template.with_b1(b1).with_cutoff(0.0))?;
            let top = fit.model.std_counts().into_iter().fold(0.0, f64::max);
            let kept: Vec<f64> = DEFAULT_CUTOFFS.iter().copied().filter(|&c| c < top).collect();
            if kept.len() < DEFAULT_CUTOFFS.len() {
                eprintln!("b1={b1}: skipping cutoffs at or above the largest bin share {}", fmt_real(top));
            }
            kept
        } else {
            a.cutoffs.clone()
        };
        groups.push(
            sweep_cutoff(&data, &layout, &[b1], &cutoffs, &template)
                .with_context(|| format!("cutoff sweep at b1={b1}"))?,
        );
    }
    let records = merge(groups);
    write_tuning(&a.out, &records)?;
    if let Some(path) = &a.plot_json {
        write_json(path, &tuning_plots(&records))?;
    }
    Ok(())
}

fn metric_options(m: &MetricOpts, q: f64) -> MetricOptions {
    MetricOptions {
        q,
        n_triplets: m.n_triplets,
        max_pairs: m.max_pairs,
        seed: m.seed,
    }
}

fn compare(a: CompareArgs) -> Result<()> {
    if a.layouts.len() < 2 {
        bail!("compare needs at least 2 layouts, got {}", a.layouts.len());
    }
    let data = read_data(&a.data)?;
    let layouts = read_layouts(&a.layouts, &data, a.sweep.stretch)?;
    let template = a.sweep.template();
    let grid = b1_grid(&a.sweep, data.n(), &layouts)?;

    let table = build_metric_table(&layouts, &data, a.metrics.reference_a1, &metric_options(&a.metrics, a.sweep.q))
        .context("building the metric table")?;
    let mut bundle = ExportBundle::new(DatasetSection::reference(&data, &a.data.to_string_lossy()));
    let mut all = Vec::new();
    for layout in &layouts {
        let records = sweep_b1(&data, layout, &grid, a.sweep.cutoff, &template)
            .with_context(|| format!("sweeping layout {:?}", layout.layout_id))?;
        let fit = fit_layout(&data, layout, &template.with_b1(table.b1))?;
        bundle
            .layouts
            .push(layout_section(&fit, layout, template.center_mode, records.clone()));
        all.extend(records);
    }
    let all = merge(vec![all]);
    bundle.best = best_layouts(&all);
    bundle.metrics = Some(table);
    bundle.validate()?;

    write_tuning(&a.out_dir.join("tuning.csv"), &all)?;
    write_metric_table(&a.out_dir.join("metrics.csv"), bundle.metrics.as_ref().expect("set above"))?;
    write_json(&a.out_dir.join("compare.json"), &bundle)?;
    for row in &bundle.metrics.as_ref().expect("set above").rows {
        println!("{} hbe={}", row.layout_id, fmt_real(row.hbe));
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let (file, scaled) = load_model(&a.model, a.layout_id.as_deref())
        .with_context(|| format!("reading model from {}", a.model.display()))?;
    let model = file.to_model()?;
    let (values, p) = load_rows(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    if p != model.p {
        bail!("{} has {p} columns, the model expects {}", a.input.display(), model.p);
    }
    let to_units: Box<dyn Fn([f64; 2]) -> [f64; 2]> = match (a.scaled, scaled) {
        (true, _) => Box::new(|pt| pt),
        (false, Some(layout)) => Box::new(move |pt| layout.to_raw(pt)),
        (false, None) => bail!(
            "{} holds no layout scaling; pass --scaled or use a bundle",
            a.model.display()
        ),
    };
    let points = values
        .chunks_exact(p)
        .map(|x| predict_2d(x, &model).map(&to_units))
        .collect::<hexlift::Result<Vec<_>>>()?;
    write_points(&a.out, &points)?;
    Ok(())
}

fn export_ui(a: ExportArgs) -> Result<()> {
    let data = read_data(&a.data)?;
    let labels = match &a.labels {
        Some(path) => {
            let labels = load_labels(path).with_context(|| format!("reading labels from {}", path.display()))?;
            if labels.len() != data.n() {
                bail!("row count mismatch: data has {} rows, labels have {}", data.n(), labels.len());
            }
            Some(labels)
        }
        None => None,
    };
    let layouts = read_layouts(&a.layouts, &data, a.model.stretch)?;
    let params = a.model.params(data.n());
    let sweep_template = FitParams {
        cutoff: 0.0,
        ..params
    };
    let grid = common_b1_grid(data.n(), &layouts, a.points)?;

    let mut bundle = ExportBundle::new(DatasetSection::inline(&data, labels));
    let mut all = Vec::new();
    let mut models = Vec::new();
    for layout in &layouts {
        let fit = fit_layout(&data, layout, &params)
            .with_context(|| format!("fitting layout {:?}", layout.layout_id))?;
        let records = sweep_b1(&data, layout, &grid, 0.0, &sweep_template)?;
        bundle
            .layouts
            .push(layout_section(&fit, layout, params.center_mode, records.clone()));
        all.extend(records);
        models.push(fit.model);
    }
    if layouts.len() >= 2 {
        bundle.metrics = Some(build_metric_table(
            &layouts,
            &data,
            a.metrics.reference_a1,
            &metric_options(&a.metrics, a.model.q),
        )?);
        bundle.best = best_layouts(&merge(vec![all]));
    }
    let anchors = anchor_bases(data.p(), a.anchors.max(a.frames).max(1), a.metrics.seed)?;
    bundle.tour = Some(TourSection::new(&anchors[..a.anchors.max(1)], a.steps));
    bundle.validate()?;
    write_json(&a.out, &bundle)?;

    if let Some(dir) = &a.projections_dir {
        for (k, basis) in anchors.iter().take(a.frames).enumerate() {
            let pts = project(data.values(), data.p(), basis)?;
            write_table_points(&dir.join(format!("frame{}_data.csv", k + 1)), None, &pts)?;
            for (layout, model) in layouts.iter().zip(&models) {
                let pts = project(&model.centroids_pd, model.p, basis)?;
                let ids: Vec<usize> = model.bin_ids.iter().map(|h| h + 1).collect();
                let name = format!("frame{}_{}_model.csv", k + 1, layout.layout_id);
                write_table_points(&dir.join(name), Some(&ids), &pts)?;
            }
        }
    }
    Ok(())
}

fn write_table_points(path: &Path, ids: Option<&[usize]>, pts: &[[f64; 2]]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let (header, rows): (Vec<&str>, Vec<Vec<String>>) = match ids {
        Some(ids) => (
            vec!["bin_id", "proj1", "proj2"],
            ids.iter()
                .zip(pts)
                .map(|(id, p)| vec![id.to_string(), fmt_real(p[0]), fmt_real(p[1])])
                .collect(),
        ),
        None => (
            vec!["proj1", "proj2"],
            pts.iter().map(|p| vec![fmt_real(p[0]), fmt_real(p[1])]).collect(),
        ),
    };
    write_table(file, &header, &rows)?;
    Ok(())
}
