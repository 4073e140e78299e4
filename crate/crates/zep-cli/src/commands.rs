//! Subcommand implementations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;

use zep::config::Config;
use zep::dataset::{
    build_corpus, extract_patches, load_annotations, save_annotations, synth_faces,
    to_training_set, Annotation, VariationRanges,
};
use zep::encoder::{assemble_zep, encode_signal_feature, extract_epochs, normalize_signal};
use zep::eval::{accuracy_curve, noise_sweep, stringent_error, tp_score, LocalizationError};
use zep::image::{load_pgm, save_pgm, GrayImage, Rect};
use zep::localizer::{
    eye_center, localize, make_face_context, scan, segment_regions, select_region, Eye, EyePair,
    ModeParams,
};
use zep::mlp::{binary_accuracy, mean_squared_error, Head, Mlp, TrainOptions};
use zep::projections::{
    build_oriented_integrals, edge_projection_naive, fast_projection, integral_projection_naive,
    scan_projections, scan_projections_naive, sobel_energy, Axis,
};

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Train a discriminator on a synthetic corpus or annotated images.
    Train(TrainArgs),
    /// Localize eye centers for each annotated face.
    Localize(LocalizeArgs),
    /// Localize and score against ground truth.
    Eval(EvalArgs),
    /// Encode a patch or a 1D signal into features or epoch lists.
    Encode(EncodeArgs),
    /// Dump a projection of an image rectangle as CSV.
    Project(ProjectArgs),
    /// Render a synthetic face corpus to disk.
    Synth(SynthArgs),
    /// Measure stage timings and the fast-vs-naive scan speedup.
    Bench(BenchArgs),
}

pub fn run(command: Command, config: &Config) -> anyhow::Result<u8> {
    match command {
        Command::Train(args) => cmd_train(args, config),
        Command::Localize(args) => cmd_localize(args, config),
        Command::Eval(args) => cmd_eval(args, config),
        Command::Encode(args) => cmd_encode(args, config),
        Command::Project(args) => cmd_project(args, config),
        Command::Synth(args) => cmd_synth(args, config),
        Command::Bench(args) => cmd_bench(args, config),
    }
}

fn write_output(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => std::fs::write(path, content)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{content}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Discriminator head to train.
    #[arg(long, value_enum)]
    head: HeadArg,
    /// Output model file.
    #[arg(long)]
    out: PathBuf,
    /// Synthetic training faces (ignored with --annotations).
    #[arg(long, default_value_t = 40)]
    faces: usize,
    /// Synthetic validation faces.
    #[arg(long, default_value_t = 20)]
    val_faces: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Train from real images instead of the synthetic corpus.
    #[arg(long, requires = "annotations")]
    images: Option<PathBuf>,
    /// Annotation CSV for --images.
    #[arg(long, requires = "images")]
    annotations: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum HeadArg {
    Regression,
    Binary,
}

impl From<HeadArg> for Head {
    fn from(value: HeadArg) -> Head {
        match value {
            HeadArg::Regression => Head::Regression,
            HeadArg::Binary => Head::Binary,
        }
    }
}

fn cmd_train(args: TrainArgs, config: &Config) -> anyhow::Result<u8> {
    let head: Head = args.head.into();
    let ranges = if head == config.training_scheme_lateral {
        VariationRanges::lateral()
    } else {
        VariationRanges::default()
    };

    let (train_set, val_set) = match (&args.images, &args.annotations) {
        (Some(images), Some(annotations)) => {
            let faces = load_face_corpus(images, annotations)?;
            let samples = extract_real_patches(&faces, head, args.seed, config)?;
            let set = to_training_set(&samples, head)?;
            (set, None)
        }
        _ => {
            let train = build_corpus(args.faces, &ranges, head, args.seed, config)?;
            let val = build_corpus(
                args.val_faces,
                &ranges,
                head,
                args.seed.wrapping_add(0x5a5a_5a5a),
                config,
            )?;
            (
                to_training_set(&train, head)?,
                Some(to_training_set(&val, head)?),
            )
        }
    };

    let mut model = Mlp::with_default_sizing(config.feature_len(), head, args.seed)?;
    let trace = model.train(
        &train_set,
        &TrainOptions {
            epochs: config.train_epochs,
            learning_rate: config.learning_rate,
            seed: args.seed.wrapping_add(0x7e57),
        },
    )?;
    model.save(&args.out)?;

    println!("samples={}", train_set.len());
    println!("loss_trace_len={}", trace.len());
    println!(
        "final_loss={}",
        trace.last().map_or("n/a".to_string(), |l| format!("{l:.6}"))
    );
    if let Some(val) = val_set {
        match head {
            Head::Binary => println!("val_accuracy={:.4}", binary_accuracy(&model, &val)?),
            Head::Regression => println!("val_mse={:.6}", mean_squared_error(&model, &val)?),
        }
    }
    println!("model={}", args.out.display());
    Ok(0)
}

fn extract_real_patches(
    faces: &[(GrayImage, Annotation)],
    head: Head,
    seed: u64,
    config: &Config,
) -> anyhow::Result<Vec<zep::dataset::PatchSample>> {
    let mut samples = Vec::new();
    for (i, (img, ann)) in faces.iter().enumerate() {
        let ctx = make_face_context(img, ann.face_rect, config)?;
        let (left, right) = ann.working_eyes(config.face_size);
        let working = Annotation::new(ann.id.clone(), ctx.face.full_rect(), left, right)?;
        samples.extend(extract_patches(
            &ctx.face,
            &working,
            head,
            seed.wrapping_add(i as u64),
            config,
        )?);
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// localize / eval
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct LocalizeArgs {
    /// Directory holding one `<id>.pgm` per annotation row.
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    frontal_model: PathBuf,
    #[arg(long)]
    lateral_model: PathBuf,
    /// Result CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

pub const LOCALIZE_HEADER: &str =
    "id,left_row,left_col,right_row,right_col,illumination,left_confidence,right_confidence";

fn cmd_localize(args: LocalizeArgs, config: &Config) -> anyhow::Result<u8> {
    let faces = load_face_corpus(&args.images, &args.annotations)?;
    let frontal = Mlp::load(&args.frontal_model)
        .with_context(|| format!("loading {}", args.frontal_model.display()))?;
    let lateral = Mlp::load(&args.lateral_model)
        .with_context(|| format!("loading {}", args.lateral_model.display()))?;

    let results = run_localization(&faces, &frontal, &lateral, config)?;
    let mut out = String::from(LOCALIZE_HEADER);
    out.push('\n');
    let mut missing = 0usize;
    for (ann, result) in faces.iter().map(|(_, a)| a).zip(&results) {
        match result {
            Some(pair) => {
                let _ = writeln!(
                    out,
                    "{},{:.2},{:.2},{:.2},{:.2},{},{:.4},{:.4}",
                    ann.id,
                    pair.left.row,
                    pair.left.col,
                    pair.right.row,
                    pair.right.col,
                    pair.illumination,
                    pair.left_confidence,
                    pair.right_confidence
                );
            }
            None => {
                missing += 1;
                let _ = writeln!(out, "{},,,,,,,", ann.id);
            }
        }
    }
    write_output(args.out.as_deref(), &out)?;
    if missing > 0 {
        eprintln!("{missing} face(s) produced no candidates");
        return Ok(3);
    }
    Ok(0)
}

/// Localizes every face, in parallel, preserving input order. Faces with
/// no surviving candidates yield `None`; other failures abort.
fn run_localization(
    faces: &[(GrayImage, Annotation)],
    frontal: &Mlp,
    lateral: &Mlp,
    config: &Config,
) -> anyhow::Result<Vec<Option<EyePair>>> {
    faces
        .par_iter()
        .map(|(img, ann)| match localize(img, ann.face_rect, frontal, lateral, config) {
            Ok(pair) => Ok(Some(pair)),
            Err(zep::Error::NoCandidates(_)) => Ok(None),
            Err(e) => Err(anyhow!(e).context(format!("localizing {}", ann.id))),
        })
        .collect()
}

fn load_face_corpus(
    images: &Path,
    annotations: &Path,
) -> anyhow::Result<Vec<(GrayImage, Annotation)>> {
    let annotations = load_annotations(annotations)?;
    annotations
        .into_iter()
        .map(|ann| {
            let path = images.join(format!("{}.pgm", ann.id));
            let img =
                load_pgm(&path).with_context(|| format!("loading {}", path.display()))?;
            ann.face_rect
                .check_inside(img.width(), img.height())
                .with_context(|| format!("face rectangle of {}", ann.id))?;
            Ok((img, ann))
        })
        .collect()
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    images: PathBuf,
    #[arg(long)]
    annotations: PathBuf,
    #[arg(long)]
    frontal_model: PathBuf,
    #[arg(long)]
    lateral_model: PathBuf,
    /// Per-image error CSV.
    #[arg(long)]
    out_errors: Option<PathBuf>,
    /// Accuracy curve CSV.
    #[arg(long)]
    out_curve: Option<PathBuf>,
    /// Curve thresholds (ascending); default 0.01..=0.30 step 0.01.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<f64>,
    /// Run the noise sweep at these sigmas.
    #[arg(long, value_delimiter = ',')]
    noise_sigmas: Vec<f64>,
    /// Noise sweep CSV.
    #[arg(long)]
    out_noise: Option<PathBuf>,
    #[arg(long, default_value_t = 99)]
    noise_seed: u64,
}

fn cmd_eval(args: EvalArgs, config: &Config) -> anyhow::Result<u8> {
    let faces = load_face_corpus(&args.images, &args.annotations)?;
    let frontal = Mlp::load(&args.frontal_model)?;
    let lateral = Mlp::load(&args.lateral_model)?;

    let results = run_localization(&faces, &frontal, &lateral, config)?;
    let mut errors: Vec<LocalizationError> = Vec::new();
    let mut error_csv = String::from("id,eps_l,eps_r,eps\n");
    let mut missing = 0usize;
    for ((_, ann), result) in faces.iter().zip(&results) {
        match result {
            Some(pair) => {
                let e = stringent_error(pair, ann)?;
                let _ = writeln!(
                    error_csv,
                    "{},{:.4},{:.4},{:.6}",
                    ann.id, e.eps_left, e.eps_right, e.eps
                );
                errors.push(e);
            }
            None => {
                missing += 1;
                let _ = writeln!(error_csv, "{},,,", ann.id);
            }
        }
    }
    write_output(args.out_errors.as_deref(), &error_csv)?;

    if errors.is_empty() {
        bail!("no face was localized; nothing to score");
    }

    // Faces without candidates count as failures at every threshold.
    let located_fraction = errors.len() as f64 / faces.len() as f64;
    let table = accuracy_curve(&errors, &[0.05, 0.1, 0.25])?;
    println!("faces={} localized={} missing={missing}", faces.len(), errors.len());
    for (i, t) in table.thresholds.iter().enumerate() {
        println!(
            "accuracy_eps<{t}: worst={:.4} avg={:.4} best={:.4}",
            table.min_curve[i] * located_fraction,
            table.avg_curve[i] * located_fraction,
            table.max_curve[i] * located_fraction,
        );
    }

    if let Some(curve_path) = &args.out_curve {
        let thresholds = if args.thresholds.is_empty() {
            (1..=30).map(|i| i as f64 * 0.01).collect()
        } else {
            args.thresholds.clone()
        };
        let curve = accuracy_curve(&errors, &thresholds)?;
        let mut csv = String::from("threshold,min,avg,max\n");
        for (i, t) in curve.thresholds.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{:.4},{:.4},{:.4},{:.4}",
                t,
                curve.min_curve[i] * located_fraction,
                curve.avg_curve[i] * located_fraction,
                curve.max_curve[i] * located_fraction,
            );
        }
        write_output(Some(curve_path), &csv)?;
    }

    if !args.noise_sigmas.is_empty() {
        let sweep = noise_sweep(
            &faces,
            &frontal,
            &lateral,
            config,
            &args.noise_sigmas,
            args.noise_seed,
        )?;
        let mut csv = String::from("sigma,accuracy\n");
        for point in &sweep {
            let _ = writeln!(csv, "{},{:.4}", point.sigma, point.accuracy);
            println!("noise sigma={} accuracy_eps<0.1={:.4}", point.sigma, point.accuracy);
        }
        if let Some(path) = &args.out_noise {
            write_output(Some(path), &csv)?;
        }
    }

    Ok(if missing > 0 { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// encode / project
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct EncodeArgs {
    /// Patch image (PGM) to encode.
    #[arg(long, conflicts_with = "signal")]
    patch: Option<PathBuf>,
    /// 1D signal CSV (one sample per line, or index,value rows).
    #[arg(long)]
    signal: Option<PathBuf>,
    /// What to emit; defaults to `feature` for patches and `epochs` for
    /// signals.
    #[arg(long, value_enum)]
    emit: Option<EmitArg>,
    /// Projection to list epochs for when encoding a patch.
    #[arg(long, value_enum, default_value_t = ProjectionArg::GrayH)]
    projection: ProjectionArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EmitArg {
    Feature,
    Epochs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum ProjectionArg {
    GrayH,
    GrayV,
    EdgeH,
    EdgeV,
}

fn cmd_encode(args: EncodeArgs, config: &Config) -> anyhow::Result<u8> {
    let enc = config.encoder_params();
    let content = match (&args.patch, &args.signal) {
        (Some(patch), None) => {
            let img = load_pgm(patch)?;
            let rect = img.full_rect();
            let energy = sobel_energy(&img)?;
            let gray_h = integral_projection_naive(&img, rect, Axis::Horizontal)?;
            let gray_v = integral_projection_naive(&img, rect, Axis::Vertical)?;
            let edge_h = integral_projection_naive(&energy, rect, Axis::Horizontal)?;
            let edge_v = integral_projection_naive(&energy, rect, Axis::Vertical)?;
            match args.emit.unwrap_or(EmitArg::Feature) {
                EmitArg::Feature => {
                    let feature = assemble_zep(&gray_h, &gray_v, &edge_h, &edge_v, &enc)?;
                    feature_csv(feature.values())
                }
                EmitArg::Epochs => {
                    let p = match args.projection {
                        ProjectionArg::GrayH => &gray_h,
                        ProjectionArg::GrayV => &gray_v,
                        ProjectionArg::EdgeH => &edge_h,
                        ProjectionArg::EdgeV => &edge_v,
                    };
                    epochs_csv(&zep::encoder::normalize_projection(p)?)
                }
            }
        }
        (None, Some(signal)) => {
            let samples = read_signal(signal)?;
            let normalized = normalize_signal(&samples)?;
            match args.emit.unwrap_or(EmitArg::Epochs) {
                EmitArg::Epochs => epochs_csv(&normalized),
                EmitArg::Feature => feature_csv(encode_signal_feature(&normalized, &enc).values()),
            }
        }
        _ => bail!("exactly one of --patch or --signal is required"),
    };
    write_output(args.out.as_deref(), &content)?;
    Ok(0)
}

fn feature_csv(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        let _ = writeln!(out, "{i},{v:.6}");
    }
    out
}

fn epochs_csv(signal: &zep::encoder::NormalizedProjection) -> String {
    let mut out = String::from("index,duration,amplitude,shape\n");
    for (i, e) in extract_epochs(signal).iter().enumerate() {
        let _ = writeln!(out, "{i},{},{:.6},{}", e.duration, e.amplitude, e.shape);
    }
    out
}

fn read_signal(path: &Path) -> anyhow::Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("index") {
            continue;
        }
        let token = line.rsplit(',').next().unwrap_or(line).trim();
        samples.push(
            token
                .parse::<f64>()
                .map_err(|_| anyhow!("line {}: bad sample {token:?}", i + 1))?,
        );
    }
    Ok(samples)
}

#[derive(Args, Debug)]
pub struct ProjectArgs {
    #[arg(long)]
    image: PathBuf,
    /// Rectangle as row_min,row_max,col_min,col_max (inclusive); whole
    /// image when absent.
    #[arg(long, value_delimiter = ',')]
    rect: Vec<usize>,
    #[arg(long, value_enum)]
    axis: AxisArg,
    #[arg(long, value_enum, default_value_t = KindArg::Integral)]
    kind: KindArg,
    /// Compute through the prefix-sum tables instead of the naive path
    /// (results are identical).
    #[arg(long)]
    fast: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum AxisArg {
    Horizontal,
    Vertical,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum KindArg {
    Integral,
    Edge,
}

fn cmd_project(args: ProjectArgs, _config: &Config) -> anyhow::Result<u8> {
    let img = load_pgm(&args.image)?;
    let rect = match args.rect.as_slice() {
        [] => img.full_rect(),
        &[r0, r1, c0, c1] => Rect::new(r0, r1, c0, c1)?,
        other => bail!("--rect expects 4 values, got {}", other.len()),
    };
    let axis = match args.axis {
        AxisArg::Horizontal => Axis::Horizontal,
        AxisArg::Vertical => Axis::Vertical,
    };
    let projection = match (args.kind, args.fast) {
        (KindArg::Integral, false) => integral_projection_naive(&img, rect, axis)?,
        (KindArg::Integral, true) => {
            fast_projection(&build_oriented_integrals(&img), rect, axis)?
        }
        (KindArg::Edge, false) => edge_projection_naive(&img, rect, axis)?,
        (KindArg::Edge, true) => {
            fast_projection(&build_oriented_integrals(&sobel_energy(&img)?), rect, axis)?
        }
    };
    write_output(args.out.as_deref(), &feature_csv(projection.values()))?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    faces: usize,
    /// Output directory for `<id>.pgm` files plus `annotations.csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PresetArg::Default)]
    preset: PresetArg,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PresetArg {
    /// Frontal illumination corpus.
    Default,
    /// Strong side shadows (lateral illumination).
    Lateral,
    /// Noise-free faces with brightness headroom.
    Headroom,
}

impl PresetArg {
    fn ranges(self) -> VariationRanges {
        match self {
            PresetArg::Default => VariationRanges::default(),
            PresetArg::Lateral => VariationRanges::lateral(),
            PresetArg::Headroom => VariationRanges::headroom(),
        }
    }
}

fn cmd_synth(args: SynthArgs, config: &Config) -> anyhow::Result<u8> {
    std::fs::create_dir_all(&args.out)?;
    let faces = synth_faces(args.faces, &args.preset.ranges(), config.face_size, args.seed)?;
    for (img, ann) in &faces {
        save_pgm(img, args.out.join(format!("{}.pgm", ann.id)))?;
    }
    let annotations: Vec<Annotation> = faces.into_iter().map(|(_, ann)| ann).collect();
    save_annotations(&annotations, args.out.join("annotations.csv"))?;
    println!(
        "wrote {} faces and annotations.csv to {}",
        annotations.len(),
        args.out.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 30)]
    iterations: usize,
    /// Iterations for the naive scan baseline (it is far slower).
    #[arg(long, default_value_t = 5)]
    naive_iterations: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Frame size WxH used for the throughput aggregate.
    #[arg(long, default_value = "1280x720")]
    frame: String,
    /// Single-thread CPU benchmark score of this host.
    #[arg(long, default_value_t = 1747.0)]
    cpu_score: f64,
    /// Timing CSV (stage,mean_ms,p95_ms).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn cmd_bench(args: BenchArgs, config: &Config) -> anyhow::Result<u8> {
    let (frame_w, frame_h) = parse_frame(&args.frame)?;
    let iterations = args.iterations.max(1);

    // Fixture face plus quickly trained models; timings do not depend on
    // model quality.
    let faces = synth_faces(1, &VariationRanges::default(), config.face_size, args.seed)?;
    let (img, ann) = &faces[0];
    let frontal = quick_model(Head::Regression, config, args.seed)?;
    let lateral = quick_model(Head::Binary, config, args.seed + 1)?;

    let ctx = make_face_context(img, ann.face_rect, config)?;
    let patch = config.patch_size;
    let stride = config.scan_stride;
    let enc = config.encoder_params();

    // Stage inputs prepared once.
    let windows: Vec<_> = scan_projections(&ctx.face, ctx.face.full_rect(), patch, patch, stride)?
        .collect();
    let features: Vec<_> = windows
        .iter()
        .map(|w| assemble_zep(&w.gray_h, &w.gray_v, &w.edge_h, &w.edge_v, &enc))
        .collect::<zep::Result<_>>()?;
    let zep_image = scan(&ctx, ctx.left_roi, &frontal, config)?;
    let params = ModeParams::for_mode(config, ctx.illumination);

    let mut report = Vec::new();
    report.push(time_stage("projection_scan", iterations, || {
        for roi in [ctx.left_roi, ctx.right_roi] {
            let region = roi.dilated_clamped(patch / 2, ctx.face.width(), ctx.face.height());
            let scan = scan_projections(&ctx.face, region, patch, patch, stride).unwrap();
            for w in scan {
                std::hint::black_box(&w.gray_h);
            }
        }
    }));
    report.push(time_stage("encode", iterations, || {
        for w in &windows {
            let f = assemble_zep(&w.gray_h, &w.gray_v, &w.edge_h, &w.edge_v, &enc).unwrap();
            std::hint::black_box(f.len());
        }
    }));
    report.push(time_stage("mlp_forward", iterations, || {
        for f in &features {
            std::hint::black_box(frontal.forward(f.values()).unwrap());
        }
    }));
    report.push(time_stage("postprocess", iterations, || {
        let regions = segment_regions(&zep_image, &params);
        let region = select_region(&regions, params.region_rule, Eye::Left).unwrap();
        std::hint::black_box(eye_center(region, &zep_image, &params).unwrap());
    }));
    report.push(time_stage("full_localize", iterations, || {
        std::hint::black_box(localize(img, ann.face_rect, &frontal, &lateral, config).unwrap());
    }));

    let mut csv = String::from("stage,mean_ms,p95_ms\n");
    for (stage, mean_ms, p95_ms) in &report {
        let _ = writeln!(csv, "{stage},{mean_ms:.3},{p95_ms:.3}");
        println!("{stage}: mean {mean_ms:.3} ms, p95 {p95_ms:.3} ms");
    }
    if let Some(path) = &args.out {
        write_output(Some(path), &csv)?;
    }

    // Fast vs naive full-face scan.
    let full = ctx.face.full_rect();
    let fast_ms = time_stage("", iterations, || {
        let scan = scan_projections(&ctx.face, full, patch, patch, stride).unwrap();
        for w in scan {
            std::hint::black_box(&w.gray_h);
        }
    })
    .1;
    let naive_ms = time_stage("", args.naive_iterations.max(1), || {
        let scan = scan_projections_naive(&ctx.face, full, patch, patch, stride).unwrap();
        for w in scan {
            std::hint::black_box(&w.gray_h);
        }
    })
    .1;
    println!(
        "scan fast {fast_ms:.3} ms vs naive {naive_ms:.3} ms: speedup {:.1}x",
        naive_ms / fast_ms
    );

    let localize_ms = report.last().unwrap().1;
    let fps = 1000.0 / localize_ms;
    let tp = tp_score(fps, frame_w, frame_h, args.cpu_score)?;
    println!(
        "localize {:.3} ms/face ({fps:.1} faces/s), tp_score {tp:.2} at {frame_w}x{frame_h} / cpu {}",
        localize_ms, args.cpu_score
    );
    Ok(0)
}

fn quick_model(head: Head, config: &Config, seed: u64) -> anyhow::Result<Mlp> {
    let ranges = if head == Head::Binary {
        VariationRanges::lateral()
    } else {
        VariationRanges::default()
    };
    let samples = build_corpus(4, &ranges, head, seed, config)?;
    let set = to_training_set(&samples, head)?;
    let mut model = Mlp::with_default_sizing(config.feature_len(), head, seed)?;
    model.train(
        &set,
        &TrainOptions {
            epochs: 10,
            learning_rate: config.learning_rate,
            seed,
        },
    )?;
    Ok(model)
}

fn time_stage(name: &str, iterations: usize, mut f: impl FnMut()) -> (String, f64, f64) {
    // Warm-up pass.
    f();
    let mut samples: Vec<f64> = (0..iterations)
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed().as_secs_f64() * 1000.0
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let p95 = samples[((samples.len() as f64 * 0.95).ceil() as usize - 1).min(samples.len() - 1)];
    (name.to_string(), mean, p95)
}

fn parse_frame(spec: &str) -> anyhow::Result<(usize, usize)> {
    let (w, h) = spec
        .split_once('x')
        .ok_or_else(|| anyhow!("--frame expects WxH, got {spec:?}"))?;
    Ok((w.parse()?, h.parse()?))
}
