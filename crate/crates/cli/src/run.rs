//! The pipelines behind each subcommand: build the model, locate exact zeros,
//! build the envelope and its approximate zeros, compare and write artifacts.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::ValueEnum;
use lzeros::envelope::{Chain, Envelope};
use lzeros::gaussian::{
    fit_gaussian, trajectory_seeds, unbounded_zeros, zero_curves, zero_trajectories, GaussianFit,
    GaussianSpec, Polyline,
};
use lzeros::spin::{quench, IsingSpec};
use lzeros::twoband::TwoBandQuench;
use lzeros::zeros::{delta_eta, edge_strip, BoxGrid};
use lzeros::{
    compute_envelope, find_zeros, ComplexTime, EnergyDistribution, Error, Rect, SearchWindow,
    SurvivalAmplitude, ZeroSet,
};

use crate::config::{CompareConfig, ConfigError, Format, HeightMode, ModelConfig, RunConfig};
use crate::heatmap::{Heatmap, Layer, Marker};
use crate::report::{
    Diagnostics, GaussianSummary, OutputDir, RunReport, TwoBandSummary, WidthTable, REPORT_FILE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Exact and approximate zeros, envelope, diagnostics.
    Quench,
    /// Distribution and envelope only.
    Envelope,
    /// Exact zeros only.
    Zeros,
    /// Exact vs approximate zero counts in stacked boxes.
    Compare,
    /// Gaussian model (fitted unless the model is already Gaussian).
    Gaussian,
    /// Free-fermion closed-form zeros against the exact ones.
    Twoband,
    /// SVG map of the normalized amplitude with zero markers.
    Heatmap,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Quench => "quench",
            Self::Envelope => "envelope",
            Self::Zeros => "zeros",
            Self::Compare => "compare",
            Self::Gaussian => "gaussian",
            Self::Twoband => "twoband",
            Self::Heatmap => "heatmap",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub mirror_beta: bool,
}

struct Model {
    dist: EnergyDistribution,
    twoband: Option<TwoBandQuench>,
    gaussian: Option<GaussianSpec>,
    esqpt: Option<f64>,
}

impl Model {
    fn amplitude(&self) -> &dyn SurvivalAmplitudeSync {
        match &self.twoband {
            Some(tb) => tb,
            None => &self.dist,
        }
    }

    fn envelope(&self) -> Envelope {
        match &self.twoband {
            Some(tb) => tb.bcs_envelope(&self.dist),
            None => compute_envelope(&self.dist),
        }
    }
}

trait SurvivalAmplitudeSync: SurvivalAmplitude + Sync {}
impl<T: SurvivalAmplitude + Sync> SurvivalAmplitudeSync for T {}

fn build_model(model: &ModelConfig, base: &Path) -> Result<Model> {
    let plain = |dist| Model {
        dist,
        twoband: None,
        gaussian: None,
        esqpt: None,
    };
    Ok(match model {
        ModelConfig::Ising {
            sites,
            h_i,
            h_f,
            alpha,
            units,
        } => {
            let mut spec = IsingSpec::long_range(*sites, *h_i, *alpha);
            if let Some(u) = units {
                spec = spec.with_units(*u);
            }
            let q = quench(&spec, &spec.with_field(*h_f))?;
            Model {
                esqpt: q.esqpt_energy,
                ..plain(q.distribution()?)
            }
        }
        ModelConfig::IsingNn { sites, h_i, h_f } => twoband(TwoBandQuench::ising(*sites, *h_i, *h_f)?)?,
        ModelConfig::Xy {
            sites,
            gamma_i,
            h_i,
            gamma_f,
            h_f,
        } => twoband(TwoBandQuench::xy(*sites, *gamma_i, *h_i, *gamma_f, *h_f)?)?,
        ModelConfig::Gaussian(spec) => Model {
            gaussian: Some(*spec),
            ..plain(spec.distribution()?)
        },
        ModelConfig::Distribution { path } => {
            let path = base.join(path);
            let file = std::fs::File::open(&path)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            let dist = EnergyDistribution::read_csv(file)
                .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
            plain(dist)
        }
    })
}

fn twoband(tb: TwoBandQuench) -> Result<Model> {
    Ok(Model {
        dist: tb.bcs_populations()?,
        twoband: Some(tb),
        gaussian: None,
        esqpt: None,
    })
}

fn diagnostics(model: &Model, env: &Envelope) -> Diagnostics {
    let dist = &model.dist;
    Diagnostics {
        levels: dist.len(),
        dropped_levels: dist.dropped_levels().len(),
        ipr: dist.ipr(),
        mean_energy: dist.mean_energy(),
        esqpt_energy: model.esqpt,
        edge_strip: edge_strip(dist).ok().map(|(a, b)| [a, b]),
        envelope: env.diagnostics(),
        envelope_members: env.members.len(),
        envelope_chains: env.chains.len(),
        envelope_monotone: env.is_monotone(),
    }
}

/// Everything a command writes, collected before the report is assembled.
struct Run<'a> {
    cfg: &'a RunConfig,
    window: SearchWindow,
    mirror_beta: bool,
    out: OutputDir,
    counts: BTreeMap<String, usize>,
}

impl Run<'_> {
    fn wants(&self, f: Format) -> bool {
        self.cfg.outputs.wants(f)
    }

    fn zeros(&mut self, name: &str, set: &ZeroSet, window: &SearchWindow) -> Result<()> {
        self.counts.insert(name.to_string(), set.len());
        if self.wants(Format::Csv) {
            let mut buf = Vec::new();
            set.write_csv(&mut buf)?;
            self.out.write(&format!("zeros_{name}.csv"), &buf)?;
        }
        if self.wants(Format::Json) {
            self.out
                .write(&format!("zeros_{name}.json"), set.to_json(Some(window))?.as_bytes())?;
        }
        Ok(())
    }

    fn distribution(&mut self, name: &str, dist: &EnergyDistribution) -> Result<()> {
        if self.wants(Format::Csv) {
            let mut buf = Vec::new();
            dist.write_csv(&mut buf)?;
            self.out.write(name, &buf)?;
        }
        Ok(())
    }

    fn envelope(&mut self, env: &Envelope) -> Result<()> {
        self.out.write("envelope.json", env.to_json()?.as_bytes())
    }

    fn heatmap<A: SurvivalAmplitude + ?Sized>(&mut self, amp: &A, layers: &[Layer<'_>]) -> Result<()> {
        let [columns, rows] = self.cfg.outputs.heatmap_size;
        let map = Heatmap {
            rect: self.window.rect(),
            columns,
            rows,
            mirror_beta: self.mirror_beta,
        };
        self.out.write("heatmap.svg", map.render(amp, layers).as_bytes())
    }
}

fn layers<'a>(exact: &'a ZeroSet, approximate: Option<&'a ZeroSet>, analytic: Option<&'a ZeroSet>) -> Vec<Layer<'a>> {
    let mut v = vec![Layer {
        zeros: exact,
        marker: Marker::Circle,
        color: "white",
        label: "exact",
    }];
    if let Some(a) = approximate {
        v.push(Layer {
            zeros: a,
            marker: Marker::Cross,
            color: "red",
            label: "approximate",
        });
    }
    if let Some(a) = analytic {
        v.push(Layer {
            zeros: a,
            marker: Marker::Plus,
            color: "orange",
            label: "analytic",
        });
    }
    v
}

/// Runs `command` and writes its artifacts and `report.json`.
pub fn execute(command: Command, opts: &Options) -> Result<RunReport> {
    let mut cfg = RunConfig::load(&opts.config)?;
    if let Some(seed) = opts.seed {
        cfg.window.seed = seed;
    }
    let mirror_beta = opts.mirror_beta || cfg.outputs.mirror_beta;
    let base = opts.config.parent().unwrap_or(Path::new("."));
    let dir = opts.out.clone().unwrap_or_else(|| cfg.outputs.directory.clone());
    let label = opts.config.display().to_string();

    let started = Instant::now();
    let model = build_model(&cfg.model, base).with_context(|| format!("{label}: model"))?;
    let built = started.elapsed();

    let mut run = Run {
        cfg: &cfg,
        window: cfg.window.search_window(),
        mirror_beta,
        out: OutputDir::create(&dir)?,
        counts: BTreeMap::new(),
    };
    let env = model.envelope();
    let mut report = RunReport {
        command: command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: opts
            .config
            .file_name()
            .map_or_else(String::new, |n| n.to_string_lossy().into_owned()),
        seed: cfg.window.seed,
        mirror_beta,
        model: cfg.model.clone(),
        window: run.window,
        diagnostics: Some(diagnostics(&model, &env)),
        trivial_envelope: env.members.len() <= 1,
        zero_counts: BTreeMap::new(),
        delta_eta: None,
        gaussian: None,
        twoband: None,
        files: Vec::new(),
    };

    let window = run.window;
    let rect = window.rect();
    let amp = model.amplitude();
    let exact = |w: &SearchWindow| find_zeros(amp, w).with_context(|| format!("{label}: exact zeros"));

    match command {
        Command::Envelope => {
            run.distribution("distribution.csv", &model.dist)?;
            run.envelope(&env)?;
        }
        Command::Zeros => {
            let z = exact(&window)?;
            run.zeros("exact", &z, &window)?;
        }
        Command::Quench => {
            run.distribution("distribution.csv", &model.dist)?;
            if run.wants(Format::Json) {
                run.envelope(&env)?;
            }
            let z = exact(&window)?;
            let approx = env.approximate_zeros(&rect);
            run.zeros("exact", &z, &window)?;
            run.zeros("approximate", &approx, &window)?;
            let analytic = match (&model.twoband, &model.gaussian) {
                (Some(tb), _) => Some(tb.bcs_zeros_in(&rect)),
                (None, Some(spec)) => unbounded_zeros(spec, &rect).ok(),
                _ => None,
            };
            if let Some(a) = &analytic {
                run.zeros("analytic", a, &window)?;
            }
            if let Some(c) = &cfg.compare {
                let (tables, _, _) = compare(c, &model, &env, &window)
                    .with_context(|| format!("{label}: compare"))?;
                write_tables(&mut run, &tables)?;
                report.delta_eta = Some(tables);
            }
            if run.wants(Format::Svg) {
                run.heatmap(amp, &layers(&z, Some(&approx), analytic.as_ref()))?;
            }
        }
        Command::Compare => {
            let c = cfg
                .compare
                .as_ref()
                .ok_or_else(|| ConfigError(format!("{label}: compare needs a [compare] section")))?;
            let (tables, z, approx) =
                compare(c, &model, &env, &window).with_context(|| format!("{label}: compare"))?;
            run.zeros("exact", &z, &window)?;
            run.zeros("approximate", &approx, &window)?;
            write_tables(&mut run, &tables)?;
            report.delta_eta = Some(tables);
        }
        Command::Heatmap => {
            let z = exact(&window)?;
            let approx = env.approximate_zeros(&rect);
            run.counts.insert("exact".into(), z.len());
            run.counts.insert("approximate".into(), approx.len());
            run.heatmap(amp, &layers(&z, Some(&approx), None))?;
        }
        Command::Twoband => {
            let tb = model.twoband.as_ref().ok_or_else(|| {
                ConfigError(format!("{label}: twoband needs an ising_nn or xy model"))
            })?;
            run.out.write("modes.csv", &modes_csv(tb)?)?;
            let z = exact(&window)?;
            let approx = env.approximate_zeros(&rect);
            let analytic = tb.bcs_zeros_in(&rect);
            run.zeros("exact", &z, &window)?;
            run.zeros("approximate", &approx, &window)?;
            run.zeros("analytic", &analytic, &window)?;
            report.twoband = Some(TwoBandSummary {
                modes: tb.modes.len(),
                max_deviation: max_distance(&z, &analytic),
                envelope_exact: approx.len() == analytic.len()
                    && max_distance(&approx, &analytic).is_none_or(|d| d < 1e-10),
            });
            if run.wants(Format::Svg) {
                run.heatmap(amp, &layers(&z, Some(&approx), Some(&analytic)))?;
            }
        }
        Command::Gaussian => {
            let (spec, fit) = match model.gaussian {
                Some(s) => (s, None),
                None => {
                    let f = fit_gaussian(&model.dist).with_context(|| format!("{label}: fit"))?;
                    (f.spec, Some(f))
                }
            };
            let summary = gaussian(&mut run, &spec, fit.as_ref(), &label)?;
            report.gaussian = Some(summary);
        }
    }

    let elapsed = started.elapsed();
    let timing = format!(
        "model_s {:.6}\ntotal_s {:.6}\n",
        built.as_secs_f64(),
        elapsed.as_secs_f64()
    );
    std::fs::write(run.out.root().join("timing.txt"), timing)
        .with_context(|| format!("writing timing to {}", dir.display()))?;

    report.zero_counts = run.counts;
    report.files = run.out.into_files();
    let json = serde_json::to_string_pretty(&report)?;
    std::fs::write(dir.join(REPORT_FILE), json + "\n")
        .with_context(|| format!("writing {}", dir.join(REPORT_FILE).display()))?;
    Ok(report)
}

/// Largest distance from a point of `a` to its nearest point in `b`.
fn max_distance(a: &ZeroSet, b: &ZeroSet) -> Option<f64> {
    if a.is_empty() || b.is_empty() {
        return None;
    }
    Some(
        a.iter()
            .map(|x| {
                b.iter()
                    .map(|y| x.z.distance(y.z))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max),
    )
}

fn modes_csv(tb: &TwoBandQuench) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["q", "abs_z", "w", "pair_energy", "eps_i", "eps_f"])?;
    for m in &tb.modes {
        w.write_record([m.q, m.abs_z(), m.w, m.pair_energy, m.eps_i, m.eps_f].map(|x| x.to_string()))?;
    }
    Ok(w.into_inner()?)
}

/// Box height: the largest period among the chains touching the most
/// populated envelope level.
fn local_period(env: &Envelope) -> Result<f64> {
    let idx = env.diagnostics().max_index;
    env.chains
        .iter()
        .filter_map(|c| match c {
            Chain::TwoLevel(s) if s.a == idx || s.b == idx => Some(s.period),
            Chain::Multilevel(g) if g.members.contains(&idx) => {
                Some(TAU / g.spacing.unwrap_or(g.span))
            }
            _ => None,
        })
        .reduce(f64::max)
        .ok_or_else(|| {
            ConfigError("height_mode = \"local_spacing\" needs an envelope chain at the most populated level".into())
                .into()
        })
}

fn compare(
    c: &CompareConfig,
    model: &Model,
    env: &Envelope,
    window: &SearchWindow,
) -> Result<(Vec<WidthTable>, ZeroSet, ZeroSet)> {
    let height = match c.height_mode {
        HeightMode::Fixed => c.height.expect("validated"),
        HeightMode::LocalSpacing => local_period(env)?,
    };
    let widest = c.widths.iter().copied().fold(0.0, f64::max);
    let t0 = window.t_min;
    let union = Rect::new(
        c.beta_center - 0.5 * widest,
        c.beta_center + 0.5 * widest,
        t0,
        t0 + height * c.boxes as f64,
    );
    let search = SearchWindow {
        beta_min: union.beta_min,
        beta_max: union.beta_max,
        t_min: union.t_min,
        t_max: union.t_max,
        ..*window
    };
    let exact = find_zeros(model.amplitude(), &search)?;
    let approx = env.approximate_zeros(&union);
    let tables = c
        .widths
        .iter()
        .map(|&w| {
            let grid = BoxGrid::stacked(c.beta_center - 0.5 * w, c.beta_center + 0.5 * w, t0, height, c.boxes);
            table(w, height, delta_eta(&exact, &approx, &grid))
        })
        .collect();
    Ok((tables, exact, approx))
}

fn table(width: f64, height: f64, boxes: Vec<lzeros::zeros::BoxStat>) -> WidthTable {
    let divergent = boxes.iter().any(|b| b.exact == 0 && b.approximate > 0);
    let values: Vec<f64> = boxes.iter().filter_map(|b| b.delta_eta).collect();
    let steps: Vec<f64> = values
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .collect();
    let flips = steps.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    let oscillatory = steps.len() >= 3 && 2 * flips >= steps.len() - 1;
    let third = (boxes.len() / 3).max(1);
    let mean = |s: &[lzeros::zeros::BoxStat]| {
        let v: Vec<f64> = s.iter().filter_map(|b| b.delta_eta).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    let decreasing = match (mean(&boxes[..third]), mean(&boxes[boxes.len() - third..])) {
        (Some(a), Some(b)) => b < a,
        _ => false,
    };
    WidthTable {
        width,
        height,
        boxes,
        divergent,
        oscillatory,
        decreasing,
    }
}

fn write_tables(run: &mut Run<'_>, tables: &[WidthTable]) -> Result<()> {
    if run.wants(Format::Csv) {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["width", "box", "beta_min", "beta_max", "t_min", "t_max", "t_center", "exact", "approximate", "delta_eta"])?;
        for t in tables {
            for (i, b) in t.boxes.iter().enumerate() {
                let r = b.rect;
                w.write_record([
                    t.width.to_string(),
                    i.to_string(),
                    r.beta_min.to_string(),
                    r.beta_max.to_string(),
                    r.t_min.to_string(),
                    r.t_max.to_string(),
                    (0.5 * (r.t_min + r.t_max)).to_string(),
                    b.exact.to_string(),
                    b.approximate.to_string(),
                    b.delta_eta.map_or_else(String::new, |d| d.to_string()),
                ])?;
            }
        }
        run.out.write("delta_eta.csv", &w.into_inner()?)?;
    }
    Ok(())
}

fn polylines_csv(lines: &[Polyline], rect: &Rect) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "id"])?;
    for l in lines {
        for p in l.points.iter().filter(|p| rect.contains(**p)) {
            w.write_record([p.beta.to_string(), p.t.to_string(), l.id.to_string()])?;
        }
    }
    Ok(w.into_inner()?)
}

fn gaussian(run: &mut Run<'_>, spec: &GaussianSpec, fit: Option<&GaussianFit>, label: &str) -> Result<GaussianSummary> {
    let valid = spec.validate().map_err(|e| match fit {
        // a fit that lands outside the model's domain is a numerical outcome
        Some(_) => Error::IllConditioned(format!("fitted model is invalid: {e}")),
        None => e,
    });
    valid.with_context(|| format!("{label}: gaussian model"))?;
    let window = run.window;
    let rect = window.rect();
    let bounded = spec.distribution()?;
    run.distribution("gaussian_distribution.csv", &bounded)?;
    let exact = find_zeros(&bounded, &window).with_context(|| format!("{label}: exact zeros"))?;
    run.zeros("exact", &exact, &window)?;

    // period indices whose zeros can reach the window
    let ends = [spec.spacing(spec.j_min), spec.spacing(spec.j_max - 1)];
    let fast = ends[0].max(ends[1]);
    let slow = ends[0].min(ends[1]);
    let n_min = ((rect.t_min * slow / TAU - 1.0).floor() as i64).max(0);
    let n_max = (rect.t_max * fast / TAU).ceil() as i64;

    let mut note = None;
    let analytic = match unbounded_zeros(spec, &rect) {
        Ok(z) => Some(z),
        Err(Error::OutOfValidity(m)) => {
            note = Some(m);
            None
        }
        Err(e) => return Err(e.into()),
    };
    if let Some(a) = &analytic {
        run.zeros("analytic", a, &window)?;
        let curves = zero_curves(spec, n_min..=n_max, (spec.j_min as f64, spec.j_max as f64), 400)?;
        run.out.write("curves.csv", &polylines_csv(&curves, &rect)?)?;
    }

    let mut trajectories = 0;
    if spec.epsilon != 0.0 {
        let seeds = trajectory_seeds(spec, rect.beta_min, rect.beta_max)
            .with_context(|| format!("{label}: trajectory seeds"))?;
        let n_top = (rect.t_max * spec.delta / TAU).ceil() as i64;
        let tr = zero_trajectories(spec, &seeds.points(), 0..=n_top)
            .with_context(|| format!("{label}: trajectories"))?;
        trajectories = tr.len();
        let lines: Vec<Polyline> = tr
            .iter()
            .enumerate()
            .map(|(i, t)| Polyline {
                id: i as i64,
                points: t.points.iter().map(|p| p.1).collect::<Vec<ComplexTime>>(),
            })
            .collect();
        run.out.write("trajectories.csv", &polylines_csv(&lines, &rect)?)?;
    }

    if run.wants(Format::Svg) {
        run.heatmap(&bounded, &layers(&exact, None, analytic.as_ref()))?;
    }
    Ok(GaussianSummary {
        spec: *spec,
        fitted: fit.is_some(),
        log_population_rms: fit.map(|f| f.log_population_rms),
        energy_rms: fit.map(|f| f.energy_rms),
        unbounded_note: note,
        trajectories,
    })
}
