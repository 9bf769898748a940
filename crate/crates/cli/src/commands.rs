//! Command implementations. Every stochastic command resolves an explicit
//! seed (or draws one from the OS and records it), writes its outputs, and
//! drops a `<out>.meta.json` sidecar with the resolved configuration and
//! wall time so runs can be replayed byte-for-byte.

use crate::args::*;
use crate::error::CliError;
use chsh_core::eval::{self, Classifier, Region, SliceSpec, SuiteConfig};
use chsh_core::geometry::{self, Behaviour, Space};
use chsh_core::io;
use chsh_core::ml::{self, FocalLossParams, LossKind, MlpConfig, SplitDataset, SvmGrid, TrainedModel};
use chsh_core::npa::{self, NpaLevel};
use chsh_core::sampling::{self, Label, LabelledPoint, Method, OracleError, PointMeta};
use chsh_core::seesaw::{self, SeesawConfig, SeesawStatus};
use rand::SeedableRng;
#[allow(unused_imports)]
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn parse_space(s: Option<&str>) -> Result<Space, CliError> {
    match s.unwrap_or("corr4") {
        "corr4" => Ok(Space::Corr4),
        "full8" => Ok(Space::Full8),
        other => Err(CliError::domain(format!("unknown space '{other}'"))),
    }
}

fn parse_level(s: Option<&str>, default: NpaLevel) -> Result<NpaLevel, CliError> {
    match s {
        None => Ok(default),
        Some(text) => text.parse().map_err(CliError::Domain),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::random())
}

fn parse_f64_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::domain(format!("bad number '{t}': {e}"))))
        .collect()
}

/// A named membership oracle resolved from its CLI spelling.
enum Oracle {
    Tlm,
    Local,
    Npa(NpaLevel),
    Seesaw { d: usize, seeds: usize },
}

impl Oracle {
    fn parse(spec: &str) -> Result<Oracle, CliError> {
        if spec == "tlm" {
            return Ok(Oracle::Tlm);
        }
        if spec == "local" {
            return Ok(Oracle::Local);
        }
        if let Some(level) = spec.strip_prefix("npa:") {
            return Ok(Oracle::Npa(level.parse().map_err(CliError::Domain)?));
        }
        if let Some(rest) = spec.strip_prefix("seesaw:") {
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() == 2 {
                let d = parts[0].parse().map_err(|_| CliError::domain("bad seesaw dimension"))?;
                let seeds = parts[1].parse().map_err(|_| CliError::domain("bad seesaw seeds"))?;
                return Ok(Oracle::Seesaw { d, seeds });
            }
            return Err(CliError::domain("seesaw oracle is spelled seesaw:<d>,<seeds>"));
        }
        Err(CliError::domain(format!(
            "unknown oracle '{spec}' (expected tlm, local, npa:<level> or seesaw:<d>,<seeds>)"
        )))
    }

    fn name(&self) -> String {
        match self {
            Oracle::Tlm => "tlm".into(),
            Oracle::Local => "local".into(),
            Oracle::Npa(level) => format!("npa:{level}"),
            Oracle::Seesaw { d, seeds } => format!("seesaw:{d},{seeds}"),
        }
    }

    /// Pointwise classifier; the see-saw variant derives its stream from the
    /// point index so batches stay deterministic.
    fn classify(&self, b: &Behaviour, idx: usize, seed: u64) -> Result<bool, OracleError> {
        match self {
            Oracle::Tlm => Ok(geometry::corr4_quantum(&b.to_corr4())),
            Oracle::Local => Ok(geometry::local_membership(b)?),
            Oracle::Npa(level) => Ok(npa::member_at(b, *level)?),
            Oracle::Seesaw { d, seeds } => {
                let cfg = SeesawConfig::new(*d, *seeds);
                let point_seed = seed ^ (idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
                let verdict = seesaw::steered_seesaw(b, &cfg, point_seed)
                    .map_err(|e| OracleError(e.to_string()))?;
                Ok(verdict.status == SeesawStatus::InQdd)
            }
        }
    }
}

fn write_sidecar(
    out: &Path,
    command: &str,
    config: serde_json::Value,
    seed: u64,
    wall: f64,
) -> Result<(), CliError> {
    let meta = json!({
        "command": command,
        "config": config,
        "seed": seed,
        "wall_seconds": wall,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = sidecar_path(out);
    std::fs::write(&path, serde_json::to_string_pretty(&meta).expect("serializable") + "\n")
        .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    out.with_file_name(name)
}

fn required<T: Clone>(v: &Option<T>, flag: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| CliError::domain(format!("missing required --{flag}")))
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

pub fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let space = parse_space(args.space.as_deref())?;
    let method = args.method.clone().unwrap_or_else(|| "uniform".into());
    let n = required(&args.n, "n")?;
    let out = required(&args.out, "out")?;
    let seed = resolve_seed(args.seed);
    let default_oracle = match space {
        Space::Corr4 => "tlm".to_string(),
        Space::Full8 => "npa:1ab".to_string(),
    };
    let oracle_spec = args.oracle.clone().unwrap_or(default_oracle);
    let oracle = Oracle::parse(&oracle_spec)?;
    let default_level = match space {
        Space::Corr4 => NpaLevel::Pure(1),
        Space::Full8 => NpaLevel::OnePlusAB,
    };
    let level = parse_level(args.level.as_deref(), default_level)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let points: Vec<LabelledPoint> = match method.as_str() {
        "uniform" | "balanced" => {
            let balanced = method == "balanced";
            sampling::sample_uniform(
                space,
                n,
                |b| oracle.classify(b, 0, seed),
                &oracle.name(),
                balanced,
                seed,
                &mut rng,
            )?
        }
        "offset" => {
            let epsilon = required(&args.epsilon, "epsilon")?;
            let cfg = sampling::OffsetConfig { epsilon, level };
            let pairs = n / 2;
            let dirs: Vec<Vec<f64>> = if args.facet_filter.unwrap_or(false) {
                if space != Space::Full8 {
                    return Err(CliError::domain("--facet-filter requires --space full8"));
                }
                sampling::sample_facet_directions(pairs, &mut rng)
            } else {
                (0..pairs).map(|_| sampling::random_direction(space.dim(), &mut rng)).collect()
            };
            let results = chsh_core::exec::map(&dirs, |u| sampling::boundary_pair(u, &cfg, seed));
            let mut points = Vec::with_capacity(pairs * 2);
            for r in results {
                let (inner, outer) = r?;
                points.push(inner);
                points.push(outer);
            }
            points
        }
        "spread" => {
            let sigma = required(&args.sigma, "sigma")?;
            sampling::spread_sample(
                space,
                &sampling::SpreadConfig::new(sigma),
                level,
                n,
                seed,
                &mut rng,
            )?
        }
        "simplex" => {
            if space != Space::Full8 {
                return Err(CliError::domain("--method simplex requires --space full8"));
            }
            let behaviours = sampling::sample_simplex(n, &mut rng);
            let labels = chsh_core::exec::map(&behaviours, |b| oracle.classify(b, 0, seed));
            let meta = PointMeta {
                method: Method::Simplex,
                epsilon: None,
                sigma: None,
                seed,
                oracle: oracle.name(),
            };
            behaviours
                .into_iter()
                .zip(labels)
                .map(|(b, l)| {
                    Ok(LabelledPoint {
                        b,
                        label: Label::from_bool(l?),
                        meta: meta.clone(),
                    })
                })
                .collect::<Result<Vec<_>, OracleError>>()?
        }
        other => return Err(CliError::domain(format!("unknown method '{other}'"))),
    };

    io::write_points_jsonl(&out, &points)?;
    if let Some(csv) = &args.csv {
        io::write_points_csv(csv, &points)?;
    }
    let config = json!({
        "space": space, "method": method, "n": n,
        "epsilon": args.epsilon, "sigma": args.sigma,
        "level": level.to_string(), "oracle": oracle.name(),
        "facet_filter": args.facet_filter.unwrap_or(false),
        "out": out.display().to_string(),
    });
    write_sidecar(&out, "generate", config, seed, start.elapsed().as_secs_f64())?;
    eprintln!("generate: wrote {} points to {}", points.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

pub fn cmd_classify(args: ClassifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let input = required(&args.input, "input")?;
    let out = required(&args.out, "out")?;
    let oracle = Oracle::parse(&required(&args.oracle, "oracle")?)?;
    let seed = resolve_seed(args.seed);

    let rows = io::read_behaviours_jsonl(&input)?;
    let behaviours: Vec<Behaviour> = rows.iter().map(|(b, _)| b.clone()).collect();
    let t0 = Instant::now();
    let indexed: Vec<(usize, Behaviour)> = behaviours.into_iter().enumerate().collect();
    let labels = chsh_core::exec::map(&indexed, |(idx, b)| oracle.classify(b, *idx, seed));
    let classify_elapsed = t0.elapsed().as_secs_f64();

    let mut points = Vec::with_capacity(rows.len());
    for ((_, b), label) in indexed.into_iter().zip(labels) {
        points.push(LabelledPoint {
            label: Label::from_bool(label?),
            meta: PointMeta {
                method: Method::Uniform,
                epsilon: None,
                sigma: None,
                seed,
                oracle: oracle.name(),
            },
            b,
        });
    }
    io::write_points_jsonl(&out, &points)?;
    let config = json!({
        "input": input.display().to_string(),
        "oracle": oracle.name(),
        "out": out.display().to_string(),
        "points": points.len(),
        "mean_seconds_per_point": if points.is_empty() { 0.0 } else { classify_elapsed / points.len() as f64 },
    });
    write_sidecar(&out, "classify", config, seed, start.elapsed().as_secs_f64())?;
    eprintln!("classify: labelled {} behaviours with {}", points.len(), oracle.name());
    Ok(())
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

pub fn cmd_train(args: TrainArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let data_path = required(&args.data, "data")?;
    let out = required(&args.out, "out")?;
    let kind = args.model.clone().unwrap_or_else(|| "svm".into());
    let seed = resolve_seed(args.seed);
    let split_seed = args.split_seed.unwrap_or(seed);

    let points = io::read_points_jsonl(&data_path)?;
    let data = SplitDataset::split(points, split_seed);

    let model = match kind.as_str() {
        "svm" => {
            let mut grid = SvmGrid::default();
            if let Some(cs) = &args.grid_c {
                grid.c_values = parse_f64_list(cs)?;
            }
            if let Some(gs) = &args.grid_gamma {
                grid.gamma_values = parse_f64_list(gs)?;
            }
            TrainedModel::Svm(ml::train_svm(&data.train, &data.validation, &grid)?)
        }
        "mlp" => {
            let loss = match args.loss.as_deref().unwrap_or("focal") {
                "focal" => LossKind::Focal(FocalLossParams {
                    alpha: args.focal_alpha.unwrap_or(1e-2),
                    gamma: args.focal_gamma.unwrap_or(2.0),
                }),
                "bbce" => LossKind::BalancedBce,
                other => return Err(CliError::domain(format!("unknown loss '{other}'"))),
            };
            let mut cfg = MlpConfig::new(loss, seed);
            cfg.convex = args.convex.unwrap_or(false);
            if let Some(r) = args.restarts {
                cfg.restarts = r;
            }
            TrainedModel::Mlp(ml::train_mlp(&data.train, &data.validation, &cfg)?)
        }
        other => return Err(CliError::domain(format!("unknown model kind '{other}'"))),
    };

    io::write_model(&out, &model)?;
    if let Some(report_path) = &args.report {
        let report = eval::full_report(&model, &data, &SuiteConfig::default())?;
        write_json(report_path, &report)?;
    }
    let config = json!({
        "data": data_path.display().to_string(),
        "model": kind,
        "loss": args.loss,
        "convex": args.convex.unwrap_or(false),
        "restarts": args.restarts,
        "split_seed": split_seed,
        "out": out.display().to_string(),
    });
    write_sidecar(&out, "train", config, seed, start.elapsed().as_secs_f64())?;
    eprintln!("train: wrote {kind} model to {}", out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

pub fn cmd_eval(args: EvalArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let model_path = required(&args.model, "model")?;
    let data_path = required(&args.data, "data")?;
    let out = required(&args.out, "out")?;
    let seed = resolve_seed(args.seed);
    let split_seed = args.split_seed.unwrap_or(seed);

    let model = io::read_model(&model_path)?;
    let points = io::read_points_jsonl(&data_path)?;
    let data = SplitDataset::split(points, split_seed);

    let mut suites = SuiteConfig { include_train: true, seed, ..Default::default() };
    if let Some(path) = &args.unbalanced {
        suites.unbalanced = Some(io::read_points_jsonl(path)?);
    }
    if let Some(spread) = &args.spread {
        let sigmas = parse_f64_list(spread)?;
        let n = args.spread_n.unwrap_or(10_000);
        suites.spreads = sigmas.into_iter().map(|s| (s, n)).collect();
        let default_level = if model.feature_dim() == 4 {
            NpaLevel::Pure(1)
        } else {
            NpaLevel::OnePlusAB
        };
        suites.spread_level = Some(parse_level(args.level.as_deref(), default_level)?);
    }
    if let Some(slices) = &args.slices {
        for name in slices.split(',') {
            suites.slices.push(slice_by_name(name.trim(), 141)?);
        }
    }
    let report = eval::full_report(&model, &data, &suites)?;
    write_json(&out, &report)?;
    let config = json!({
        "model": model_path.display().to_string(),
        "data": data_path.display().to_string(),
        "split_seed": split_seed,
        "spread": args.spread,
        "slices": args.slices,
        "out": out.display().to_string(),
    });
    write_sidecar(&out, "eval", config, seed, start.elapsed().as_secs_f64())?;
    eprintln!("eval: report written to {}", out.display());
    Ok(())
}

fn slice_by_name(name: &str, resolution: usize) -> Result<SliceSpec, CliError> {
    match name {
        "slice1" => Ok(eval::slice_pr_pair(resolution)),
        "slice2" => Ok(eval::slice_three_equal(resolution)),
        "full8pr" => Ok(eval::slice_full8_pr(resolution)),
        other => Err(CliError::domain(format!("unknown slice '{other}'"))),
    }
}

// ---------------------------------------------------------------------------
// slice
// ---------------------------------------------------------------------------

pub fn cmd_slice(args: SliceArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let spec_name = required(&args.spec, "spec")?;
    let out = required(&args.out, "out")?;
    let classifier_spec = args.classifier.clone().unwrap_or_else(|| "tlm".into());
    let spec = slice_by_name(&spec_name, args.resolution.unwrap_or(141))?;

    let model;
    let oracle;
    let classifier: Box<dyn Fn(&Behaviour) -> Result<bool, OracleError> + Sync> =
        if let Some(path) = classifier_spec.strip_prefix("model:") {
            model = io::read_model(Path::new(path))?;
            Box::new(move |b: &Behaviour| {
                model
                    .predict(b)
                    .map(|p| p.label == Label::Quantum)
                    .map_err(|e| OracleError(e.to_string()))
            })
        } else {
            oracle = Oracle::parse(&classifier_spec)?;
            Box::new(move |b: &Behaviour| oracle.classify(b, 0, 0))
        };

    let grid = eval::slice_grid(&spec, &classifier as Classifier)?;
    if out.extension().is_some_and(|e| e == "csv") {
        io::write_slice_csv(&out, &grid)?;
    } else {
        io::write_slice_json(&out, &grid)?;
    }
    let config = json!({
        "spec": spec_name,
        "classifier": classifier_spec,
        "resolution": spec.grid_resolution,
        "out": out.display().to_string(),
    });
    write_sidecar(&out, "slice", config, 0, start.elapsed().as_secs_f64())?;
    eprintln!("slice: {} cells written to {}", grid.len(), out.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// volume
// ---------------------------------------------------------------------------

pub fn cmd_volume(args: VolumeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let out = required(&args.out, "out")?;
    let n = required(&args.n, "n")?;
    let seed = resolve_seed(args.seed);
    let region_name = args.region.clone().unwrap_or_else(|| "ns".into());
    let space = parse_space(args.space.as_deref())?;
    let region = match region_name.as_str() {
        "ns" => Region::NsUniform(space),
        "simplex" => Region::Simplex,
        other => return Err(CliError::domain(format!("unknown region '{other}'"))),
    };
    let oracle_specs = required(&args.oracles, "oracles")?;

    let mut rows = Vec::new();
    for spec in oracle_specs.split(',') {
        let oracle = Oracle::parse(spec.trim())?;
        let f = |b: &Behaviour| oracle.classify(b, 0, seed);
        let stats = eval::volume_ratio(region, &f, n, seed)?;
        rows.push((oracle.name(), stats));
    }
    if out.extension().is_some_and(|e| e == "csv") {
        io::write_volume_csv(&out, &rows)?;
    } else {
        io::write_volume_json(&out, &rows)?;
    }
    let config = json!({
        "region": region_name, "space": space, "oracles": oracle_specs,
        "n": n, "out": out.display().to_string(),
    });
    write_sidecar(&out, "volume", config, seed, start.elapsed().as_secs_f64())?;
    for (name, stats) in &rows {
        eprintln!("volume[{name}]: ratio {:.4} ± {:.4}", stats.ratio, stats.stderr);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// appendix A pipeline
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AppendixaSummary {
    directions: usize,
    lt_1e2: usize,
    lt_1e3: usize,
    lt_threshold: usize,
    threshold: f64,
    fraction_lt_1e2: f64,
    d: usize,
    seeds: usize,
    level: String,
}

pub fn cmd_appendixa(args: AppendixaArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let n = args.n.unwrap_or(100);
    let d = args.d.unwrap_or(6);
    let seeds = args.seeds.unwrap_or(50);
    let level = parse_level(args.level.as_deref(), NpaLevel::OnePlusAB)?;
    let seed = resolve_seed(args.seed);
    let prefix = required(&args.out_prefix, "out-prefix")?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = sampling::sample_facet_directions(n, &mut rng);
    let mut cfg = SeesawConfig::new(d, seeds);
    if let Some(ms) = args.max_sweeps {
        cfg.max_sweeps = ms;
    }
    let gaps = chsh_core::exec::map(&dirs, |u| -> Result<f64, CliError> {
        let ub = Behaviour::new_unchecked(Space::Full8, u.clone());
        let lambda = npa::max_lambda(&ub, level)?;
        let target = ub.scaled(lambda);
        let dir_seed = seed ^ hash64(u);
        let verdict = seesaw::steered_seesaw(&target, &cfg, dir_seed)?;
        Ok(verdict.best_distance)
    });
    let gaps: Vec<f64> = gaps.into_iter().collect::<Result<_, _>>()?;

    // histogram of the distances of at least 1e-3, bin width 1e-3
    let bin = 1e-3;
    let mut hist: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for &g in &gaps {
        if g >= bin {
            *hist.entry((g / bin) as usize).or_insert(0) += 1;
        }
    }
    let hist_path = PathBuf::from(format!("{prefix}_hist.csv"));
    {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(
            std::fs::File::create(&hist_path)
                .map_err(|e| CliError::io(format!("{}: {e}", hist_path.display())))?,
        );
        writeln!(w, "bin_low,bin_high,count").map_err(|e| CliError::io(e.to_string()))?;
        for (&k, &count) in &hist {
            writeln!(w, "{},{},{}", k as f64 * bin, (k + 1) as f64 * bin, count)
                .map_err(|e| CliError::io(e.to_string()))?;
        }
    }

    let lt_1e2 = gaps.iter().filter(|&&g| g < 1e-2).count();
    let summary = AppendixaSummary {
        directions: n,
        lt_1e2,
        lt_1e3: gaps.iter().filter(|&&g| g < 1e-3).count(),
        lt_threshold: gaps.iter().filter(|&&g| g < cfg.threshold).count(),
        threshold: cfg.threshold,
        fraction_lt_1e2: lt_1e2 as f64 / n.max(1) as f64,
        d,
        seeds,
        level: level.to_string(),
    };
    let summary_path = PathBuf::from(format!("{prefix}_summary.json"));
    write_json(&summary_path, &summary)?;
    let config = json!({
        "n": n, "d": d, "seeds": seeds, "level": level.to_string(),
        "max_sweeps": args.max_sweeps, "out_prefix": prefix,
    });
    write_sidecar(&summary_path, "appendixa", config, seed, start.elapsed().as_secs_f64())?;
    eprintln!(
        "appendixa: {}/{} directions within 1e-2 ({}%)",
        summary.lt_1e2,
        n,
        100.0 * summary.fraction_lt_1e2
    );
    Ok(())
}

fn hash64(u: &[f64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &v in u {
        h ^= v.to_bits();
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::io(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    Ok(())
}
