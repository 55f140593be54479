//! Command implementations shared by the binary and the integration tests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex;

use crate::channel::{
    end_to_end, freespace_gain, observe, run_campaign, synth_freespace, synth_sparse_angular,
    NoiseSpec, Observation, RisChannel,
};
use crate::cli::report::{write_bench, write_report, BenchRow, RunReport};
use crate::cli::scenario::{ChannelModel, MethodSpec, ResolvedScenario, ScenarioFile};
use crate::configure::{
    conjugate_phase, exhaustive_oracle, iterative_optimize_with, quantize_binary, IterativeOptions,
    PhaseConfig,
};
use crate::coverage::{coverage_map, power_db, GridFormat, PgmScale};
use crate::error::{Result, RisError};
use crate::estimate::{
    build_dictionary, default_sparsity, hadamard_estimate, omp, ComplexMatrix, EstimateResult,
};
use crate::io::{
    read_channel_csv, read_channel_json, read_config_csv, read_trace_csv, write_channel_csv,
    write_channel_json, write_config_bits, write_config_csv, write_estimate_json,
    write_sensing_csv, write_trace_csv,
};
use crate::scene::{distance, Scene};
use crate::sensing::{
    angular_to_spatial, apply_mask, bernoulli_matrix, dft2_matrix, hadamard_for, AngularTransform,
    SensingMatrix,
};

/// On-disk representation selected by `--format` or the file extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Json,
    Csv,
}

fn format_for(path: &Path, flag: Option<FileFormat>) -> Result<FileFormat> {
    if let Some(f) = flag {
        return Ok(f);
    }
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Ok(FileFormat::Json),
        Some("csv") => Ok(FileFormat::Csv),
        _ => Err(RisError::Schema {
            path: path.display().to_string(),
            message: "cannot infer the file format from the extension; pass --format".into(),
        }),
    }
}

// ── scenario → channel ──────────────────────────────────────────────────────

fn geometric_los(scene: &Scene<f64>) -> Result<Complex<f64>> {
    let d = distance(&scene.tx_position, &scene.rx_position);
    freespace_gain(d, scene.wavelength())
}

fn import_channel(
    rs: &ResolvedScenario,
    path: &Path,
    format: Option<FileFormat>,
) -> Result<RisChannel<f64>> {
    let scene = &rs.scene;
    let mut ch = match format_for(path, format)? {
        FileFormat::Json => read_channel_json::<f64>(path)?,
        FileFormat::Csv => read_channel_csv::<f64>(path, scene.rows, scene.cols)?,
    };
    if ch.rows != scene.rows || ch.cols != scene.cols {
        return Err(rs.schema_err(format!(
            "imported channel is {}x{}, scenario lattice is {}x{}",
            ch.rows, ch.cols, scene.rows, scene.cols
        )));
    }
    match (&scene.mask, &ch.mask) {
        (Some(sm), Some(cm)) if sm != cm => {
            return Err(rs.schema_err("imported channel mask differs from the scenario mask"));
        }
        (Some(sm), None) => ch = ch.with_mask(sm.clone())?,
        (None, Some(_)) => {
            return Err(rs.schema_err("imported channel has a mask but the scenario does not"));
        }
        _ => {}
    }
    Ok(ch)
}

/// Builds the cascaded channel the scenario describes.  The direct Tx→Rx
/// path is attached only when `channel.los` is set; imported files keep
/// their own direct-path entry, other models use the free-space value.
pub fn build_channel(rs: &ResolvedScenario) -> Result<RisChannel<f64>> {
    let scene = &rs.scene;
    match rs.file.channel.model {
        ChannelModel::Freespace => synth_freespace(scene, rs.file.channel.los),
        ChannelModel::SparseAngular => {
            let s = rs
                .file
                .channel
                .sparsity
                .unwrap_or_else(|| default_sparsity(scene.num_elements()));
            let mut ch = synth_sparse_angular(
                scene.rows,
                scene.cols,
                s,
                rs.synth_seed(),
                rs.file.channel.amplitude_profile.map(Into::into),
            )?;
            if let Some(mask) = &scene.mask {
                ch = ch.with_mask(mask.clone())?;
            }
            if rs.file.channel.los {
                ch = ch.with_los(geometric_los(scene)?);
            }
            Ok(ch)
        }
        ChannelModel::Import => {
            let rel = rs
                .file
                .channel
                .import_path
                .as_ref()
                .expect("validated at load");
            let path = rs.relative_to_scenario(rel);
            let mut ch = import_channel(rs, &path, None)?;
            if !rs.file.channel.los {
                ch.los = None;
            } else if ch.los.is_none() {
                ch = ch.with_los(geometric_los(scene)?);
            }
            Ok(ch)
        }
    }
}

fn noise_spec(rs: &ResolvedScenario) -> Result<NoiseSpec<f64>> {
    match rs.file.campaign.snr_db {
        Some(snr) => NoiseSpec::with_snr(snr, rs.noise_seed()),
        None => Ok(NoiseSpec::noiseless()),
    }
}

/// Expands an estimate over the campaign's active columns into a quantized
/// full-lattice configuration (masked elements stay at phase 0, inactive).
fn expand_estimate(rho_active: &[Complex<f64>], scene: &Scene<f64>) -> Result<PhaseConfig<f64>> {
    match &scene.mask {
        None => Ok(quantize_binary(&conjugate_phase(rho_active))),
        Some(mask) => {
            let mut full = vec![Complex::new(0.0, 0.0); scene.num_elements()];
            for (z, j) in rho_active.iter().zip(scene.active_indices()) {
                full[j] = *z;
            }
            quantize_binary(&conjugate_phase(&full)).with_mask(mask.clone())
        }
    }
}

/// Received path gain under the channel exactly as the scenario built it
/// (the direct path counts only when the scenario enables it).
fn gain_at_rx(channel: &RisChannel<f64>, config: &PhaseConfig<f64>) -> Result<f64> {
    let h = end_to_end(channel, config)?;
    Ok(power_db(h.norm_sqr()))
}

// ── estimation campaigns ────────────────────────────────────────────────────

/// Everything an estimation run needs before the algorithm proper starts.
pub struct EstimateSetup {
    pub channel: RisChannel<f64>,
    pub w: SensingMatrix,
    pub obs: Observation<f64>,
    pub u: Option<AngularTransform<f64>>,
    pub dictionary: Option<ComplexMatrix<f64>>,
    pub sparsity: Option<usize>,
}

pub fn prepare_estimate(rs: &ResolvedScenario) -> Result<EstimateSetup> {
    let scene = &rs.scene;
    let method = rs.file.campaign.method;
    let channel = build_channel(rs)?;
    let (w, u, dictionary, sparsity) = match method {
        MethodSpec::Hadamard => {
            let full = hadamard_for(scene.num_elements())?;
            let w = match &scene.mask {
                Some(mask) => apply_mask(&full, mask)?,
                None => full,
            };
            (w, None, None, None)
        }
        MethodSpec::Omp => {
            if scene.mask.is_some() {
                return Err(rs.schema_err(
                    "the omp method needs a fully active lattice; remove the mask or use hadamard",
                ));
            }
            let n = scene.num_elements();
            let m = rs.file.campaign.m.unwrap_or_else(|| (n / 2).max(1));
            let w = bernoulli_matrix(m, n, rs.sensing_seed())?;
            let u = dft2_matrix::<f64>(scene.rows, scene.cols)?;
            let dictionary = build_dictionary(&w, &u)?;
            let s = rs
                .file
                .campaign
                .sparsity
                .unwrap_or_else(|| default_sparsity(n));
            (w, Some(u), Some(dictionary), Some(s))
        }
        MethodSpec::Iterative => {
            return Err(rs.schema_err("estimate handles hadamard and omp; use `optimize`"));
        }
    };
    let obs = run_campaign(&channel, &w, &noise_spec(rs)?)?;
    Ok(EstimateSetup {
        channel,
        w,
        obs,
        u,
        dictionary,
        sparsity,
    })
}

/// The timed portion of an estimation run: estimator plus configuration
/// mapping, with the campaign and dictionary treated as already available.
pub fn run_estimator(
    rs: &ResolvedScenario,
    setup: &EstimateSetup,
) -> Result<(EstimateResult<f64>, PhaseConfig<f64>)> {
    let scene = &rs.scene;
    match rs.file.campaign.method {
        MethodSpec::Hadamard => {
            let est = hadamard_estimate(&setup.obs, &setup.w)?;
            let config = expand_estimate(&est.rho_hat, scene)?;
            Ok((est, config))
        }
        MethodSpec::Omp => {
            let dictionary = setup.dictionary.as_ref().expect("prepared for omp");
            let u = setup.u.as_ref().expect("prepared for omp");
            let s = setup.sparsity.expect("prepared for omp");
            let mut est = omp(dictionary, &setup.obs, s)?;
            let gamma = est.gamma_hat.as_ref().expect("omp returns angular output");
            est.rho_hat = angular_to_spatial(gamma, u)?;
            let config = expand_estimate(&est.rho_hat, scene)?;
            Ok((est, config))
        }
        MethodSpec::Iterative => unreachable!("rejected by prepare_estimate"),
    }
}

pub fn cmd_estimate(rs: &ResolvedScenario, out: &Path) -> Result<RunReport> {
    let setup = prepare_estimate(rs)?;
    let t0 = Instant::now();
    let (est, config) = run_estimator(rs, &setup)?;
    let elapsed = t0.elapsed().as_secs_f64();

    let method = rs.file.campaign.method;
    write_estimate_json(&est, method.name(), setup.sparsity, &out.join("estimate.json"))?;
    write_config_csv(&config, &out.join("config.csv"))?;
    write_config_bits(&config, &out.join("config.bits"))?;
    write_sensing_csv(&setup.w, &out.join("sensing.csv"))?;

    let report = RunReport {
        method: method.name().into(),
        broadcast_instants: setup.w.rows() as u64,
        active_elements: rs.scene.active_count(),
        algorithm_time_seconds: elapsed,
        gain_at_rx_db: gain_at_rx(&setup.channel, &config)?,
        gain_delta_db: None,
        config_path: "config.csv".into(),
        artifacts: ["estimate.json", "config.csv", "config.bits", "sensing.csv", "report.json"]
            .map(String::from)
            .to_vec(),
    };
    write_report(&report, &out.join("report.json"))?;
    Ok(report)
}

// ── iterative optimization ──────────────────────────────────────────────────

/// Runs the greedy optimizer with the scenario's probe policy.  Free-space
/// scenarios re-synthesize the channel on every probe, mirroring a fresh
/// field evaluation per pilot; returns the config, the power trace, and the
/// number of probe calls made.
pub fn run_iterative(rs: &ResolvedScenario) -> Result<(PhaseConfig<f64>, Vec<f64>, u64)> {
    let scene = &rs.scene;
    if rs.file.campaign.method != MethodSpec::Iterative {
        return Err(rs.schema_err("optimize handles the iterative method; use `estimate`"));
    }
    let noise = noise_spec(rs)?;
    let repeats = rs.file.campaign.probe_repeats;
    let fixed = match rs.file.channel.model {
        ChannelModel::Freespace => None,
        _ => Some(build_channel(rs)?),
    };
    let include_los = rs.file.channel.los;
    let mut draw: u64 = 0;
    let mut probes: u64 = 0;
    let probe = |config: &PhaseConfig<f64>| -> Result<f64> {
        let synthesized;
        let channel = match &fixed {
            Some(ch) => ch,
            None => {
                synthesized = synth_freespace(scene, include_los)?;
                &synthesized
            }
        };
        let mut acc = 0.0;
        for _ in 0..repeats {
            let h = observe(channel, config, &noise, draw)?;
            draw += 1;
            acc += h.norm_sqr();
        }
        probes += 1;
        Ok(acc / repeats as f64)
    };
    let options = IterativeOptions {
        two_probe: rs.file.campaign.probes_per_element == 2,
        passes: 1,
    };
    let (config, trace) =
        iterative_optimize_with(probe, scene.rows, scene.cols, scene.mask.as_deref(), options)?;
    Ok((config, trace, probes))
}

pub fn cmd_optimize(rs: &ResolvedScenario, out: &Path) -> Result<RunReport> {
    let t0 = Instant::now();
    let (config, trace, probes) = run_iterative(rs)?;
    let elapsed = t0.elapsed().as_secs_f64();

    let n_active = rs.scene.active_count() as u64;
    let p = rs.file.campaign.probes_per_element as u64;
    debug_assert_eq!(probes, if p == 2 { 2 * n_active } else { n_active + 1 });

    let trace_path = out.join("trace.csv");
    write_trace_csv(&trace, &trace_path)?;
    if rs.file.campaign.snr_db.is_none() {
        // Deterministic probes make the best-so-far trace non-decreasing;
        // verify the write survived intact.
        let back = read_trace_csv::<f64>(&trace_path)?;
        for (i, pair) in back.windows(2).enumerate() {
            if pair[1] < pair[0] {
                return Err(RisError::Domain(format!(
                    "power trace decreases between steps {} and {}",
                    i + 1,
                    i + 2
                )));
            }
        }
    }
    write_config_csv(&config, &out.join("config.csv"))?;
    write_config_bits(&config, &out.join("config.bits"))?;

    let channel = build_channel(rs)?;
    let report = RunReport {
        method: "iterative".into(),
        broadcast_instants: p * n_active,
        active_elements: rs.scene.active_count(),
        algorithm_time_seconds: elapsed,
        gain_at_rx_db: gain_at_rx(&channel, &config)?,
        gain_delta_db: None,
        config_path: "config.csv".into(),
        artifacts: ["trace.csv", "config.csv", "config.bits", "report.json"]
            .map(String::from)
            .to_vec(),
    };
    write_report(&report, &out.join("report.json"))?;
    Ok(report)
}

// ── coverage maps ───────────────────────────────────────────────────────────

pub fn cmd_coverage(rs: &ResolvedScenario, config_path: &Path, out: &Path) -> Result<RunReport> {
    let scene = &rs.scene;
    if rs.file.channel.model != ChannelModel::Freespace {
        return Err(rs.schema_err("coverage supports only the freespace channel model"));
    }
    let grid = rs
        .file
        .grid
        .as_ref()
        .ok_or_else(|| rs.schema_err("coverage requires a grid block in the scenario"))?
        .to_grid()?;
    let mut config = read_config_csv::<f64>(config_path)?;
    if config.len() != scene.num_elements() {
        return Err(RisError::DimensionMismatch(format!(
            "config has {} phases, lattice has {}",
            config.len(),
            scene.num_elements()
        )));
    }
    if let Some(mask) = &scene.mask {
        config = config.with_mask(mask.clone())?;
    }
    let baseline = match &scene.mask {
        Some(mask) => PhaseConfig::zero(scene.num_elements()).with_mask(mask.clone())?,
        None => PhaseConfig::zero(scene.num_elements()),
    };
    let include_los = rs.file.channel.los;

    let t0 = Instant::now();
    let opt_map = coverage_map(scene, &config, &grid, include_los, "optimized")?;
    let base_map = coverage_map(scene, &baseline, &grid, include_los, "baseline")?;
    let elapsed = t0.elapsed().as_secs_f64();

    // One shared grayscale range keeps the two PGMs directly comparable.
    let scale = PgmScale {
        floor_db: Some(opt_map.min_db().min(base_map.min_db())),
        max_db: Some(opt_map.max_db().max(base_map.max_db())),
    };
    for (map, stem) in [(&opt_map, "coverage_optimized"), (&base_map, "coverage_baseline")] {
        crate::coverage::write_grid(map, GridFormat::Csv, &out.join(format!("{stem}.csv")), scale)?;
        crate::coverage::write_grid(map, GridFormat::Pgm, &out.join(format!("{stem}.pgm")), scale)?;
    }

    let (rx_ix, rx_iy) = grid.nearest_cell(&scene.rx_position);
    let g_opt = opt_map.value(rx_ix, rx_iy);
    let g_base = base_map.value(rx_ix, rx_iy);
    let report = RunReport {
        method: "coverage".into(),
        broadcast_instants: 0,
        active_elements: scene.active_count(),
        algorithm_time_seconds: elapsed,
        gain_at_rx_db: g_opt,
        gain_delta_db: Some(g_opt - g_base),
        config_path: config_path.display().to_string(),
        artifacts: [
            "coverage_optimized.csv",
            "coverage_optimized.pgm",
            "coverage_baseline.csv",
            "coverage_baseline.pgm",
            "report.json",
        ]
        .map(String::from)
        .to_vec(),
    };
    write_report(&report, &out.join("report.json"))?;
    Ok(report)
}

// ── benchmarking ────────────────────────────────────────────────────────────

fn median(mut times: Vec<f64>) -> f64 {
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    times[times.len() / 2]
}

fn bench_one(rs: &ResolvedScenario, repeats: usize) -> Result<BenchRow> {
    let method = rs.file.campaign.method;
    let mut times = Vec::with_capacity(repeats);
    let broadcast_instants;
    match method {
        MethodSpec::Hadamard | MethodSpec::Omp => {
            let setup = prepare_estimate(rs)?;
            broadcast_instants = setup.w.rows() as u64;
            for _ in 0..repeats {
                let t0 = Instant::now();
                let (est, config) = run_estimator(rs, &setup)?;
                times.push(t0.elapsed().as_secs_f64());
                std::hint::black_box((est, config));
            }
        }
        MethodSpec::Iterative => {
            if rs.file.channel.model != ChannelModel::Freespace {
                return Err(rs.schema_err(
                    "the iterative benchmark needs the freespace model so probes re-synthesize",
                ));
            }
            let p = rs.file.campaign.probes_per_element as u64;
            broadcast_instants = p * rs.scene.active_count() as u64;
            for _ in 0..repeats {
                let t0 = Instant::now();
                let out = run_iterative(rs)?;
                times.push(t0.elapsed().as_secs_f64());
                std::hint::black_box(out);
            }
        }
    }
    Ok(BenchRow {
        method: method.name().into(),
        median_seconds: median(times),
        repeats,
        broadcast_instants,
    })
}

/// Times every scenario's configuration method over `repeats` runs and
/// reports medians.  When hadamard, omp, and iterative all appear, their
/// medians must come out strictly increasing in that order.
pub fn cmd_bench(
    paths: &[PathBuf],
    seed_override: Option<u64>,
    repeats: usize,
    out: Option<&Path>,
) -> Result<Vec<BenchRow>> {
    if repeats < 5 {
        return Err(RisError::Domain(format!(
            "bench needs at least 5 repeats, got {repeats}"
        )));
    }
    let mut rows = Vec::with_capacity(paths.len());
    let mut lattice: Option<usize> = None;
    for path in paths {
        let rs = ScenarioFile::load(path)?.resolve(path, seed_override)?;
        let n = rs.scene.num_elements();
        match lattice {
            None => lattice = Some(n),
            Some(prev) if prev != n => {
                return Err(rs.schema_err(format!(
                    "bench scenarios must share one lattice size, got {prev} and {n} elements"
                )));
            }
            _ => {}
        }
        rows.push(bench_one(&rs, repeats)?);
    }
    let find = |name: &str| {
        rows.iter()
            .find(|r| r.method == name)
            .map(|r| r.median_seconds)
    };
    if let (Some(h), Some(o), Some(i)) = (find("hadamard"), find("omp"), find("iterative")) {
        if !(h < o && o < i) {
            return Err(RisError::Domain(format!(
                "median timing order violated: hadamard {h:.6}s, omp {o:.6}s, iterative {i:.6}s"
            )));
        }
    }
    println!("{:<12} {:>14} {:>8} {:>12}", "method", "median_s", "repeats", "broadcasts");
    for row in &rows {
        println!(
            "{:<12} {:>14.6} {:>8} {:>12}",
            row.method, row.median_seconds, row.repeats, row.broadcast_instants
        );
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| RisError::io(dir, e))?;
        write_bench(&rows, &dir.join("bench.json"))?;
    }
    Ok(rows)
}

// ── channel import/export ───────────────────────────────────────────────────

pub fn cmd_channel_export(
    rs: &ResolvedScenario,
    output: &Path,
    format: Option<FileFormat>,
) -> Result<()> {
    let channel = build_channel(rs)?;
    match format_for(output, format)? {
        FileFormat::Json => write_channel_json(&channel, output)?,
        FileFormat::Csv => write_channel_csv(&channel, output)?,
    }
    println!(
        "wrote channel {}x{} ({} active) to {}",
        channel.rows,
        channel.cols,
        channel.active_count(),
        output.display()
    );
    Ok(())
}

pub fn cmd_channel_import(
    rs: &ResolvedScenario,
    input: &Path,
    output: Option<&Path>,
    format: Option<FileFormat>,
) -> Result<()> {
    let channel = import_channel(rs, input, format)?;
    println!(
        "imported channel {}x{} ({} active, direct path: {})",
        channel.rows,
        channel.cols,
        channel.active_count(),
        if channel.los.is_some() { "present" } else { "absent" }
    );
    if let Some(out) = output {
        match format_for(out, None)? {
            FileFormat::Json => write_channel_json(&channel, out)?,
            FileFormat::Csv => write_channel_csv(&channel, out)?,
        }
        println!("re-exported to {}", out.display());
    }
    Ok(())
}

// ── exhaustive oracle ───────────────────────────────────────────────────────

pub fn cmd_oracle(rs: &ResolvedScenario, out: &Path) -> Result<RunReport> {
    let channel = build_channel(rs)?;
    let t0 = Instant::now();
    let (config, power) = exhaustive_oracle(&channel)?;
    let elapsed = t0.elapsed().as_secs_f64();

    write_config_csv(&config, &out.join("config.csv"))?;
    write_config_bits(&config, &out.join("config.bits"))?;
    let report = RunReport {
        method: "oracle".into(),
        broadcast_instants: 1u64 << channel.active_count(),
        active_elements: channel.active_count(),
        algorithm_time_seconds: elapsed,
        gain_at_rx_db: power_db(power),
        gain_delta_db: None,
        config_path: "config.csv".into(),
        artifacts: ["config.csv", "config.bits", "report.json"]
            .map(String::from)
            .to_vec(),
    };
    write_report(&report, &out.join("report.json"))?;
    Ok(report)
}
