//! The experiment registry: each entry turns one distributional identity into a
//! seeded, reproducible pass/fail run.
//!
//! Ensembles are drawn on rayon over streams `RngStream::tagged(seed, tag, i)`;
//! the two sides of a two-sample test always use different tags.

use std::fs;
use std::path::PathBuf;

use cei_core::exact::{conditioned_on_min, enumerate_condition_min, InputWeighting, PathLaw};
use cei_core::samplers::{
    rejection_sample, rejection_sample_conditioned_min, rejection_sample_min_amplitude, sample_bessel3_bridge,
    sample_bessel3_process, sample_brownian_bridge, sample_signed_bm, EiParams, Process, SampleError,
    DEFAULT_MAX_ATTEMPTS,
};
use cei_core::stats::{
    chi2_independence, correlation, exact_distribution_compare, ks_two_sample, ks_uniform, median, TestReport,
};
use cei_core::transforms::{
    bes3_to_bridge, condition_min_transform, condition_min_value_transform, first_passage_transform,
    last_passage_transform, vervaat, TransformError,
};
use cei_core::{
    amplitude, argmin_first, cyclic_shift, maximum, minimum, reflected_process, shifted_min_profile, GridPath,
    Interval, RngStream,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::emit::{emit_samples, SampleMetadata};
use crate::HarnessError;

/// At most this many paths of an experiment's main ensemble are written to disk.
pub const MAX_EMITTED_PATHS: usize = 256;

const TIMES: [f64; 3] = [0.25, 0.5, 0.75];
const PATHWISE_TOL: f64 = 1e-12;
const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub citation: &'static str,
    pub description: &'static str,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: TestReport,
    /// Set when a sampler or transform error aborted the pipeline; the report is then failed.
    pub error: Option<String>,
    pub samples_file: Option<PathBuf>,
    pub report_file: Option<PathBuf>,
}

struct Output {
    report: TestReport,
    samples: Vec<GridPath>,
    source: &'static str,
}

struct Entry {
    info: ExperimentInfo,
    statistical: bool,
    defaults: fn(&mut ExperimentConfig),
    run: fn(&ExperimentConfig) -> Result<Output, HarnessError>,
}

fn base_config(name: &str, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        experiment: name.to_string(),
        n: 1024,
        paths: 10_000,
        seed,
        epsilon: None,
        interval: None,
        x: None,
        y: None,
        alpha: cei_core::stats::DEFAULT_ALPHA,
        out_dir: None,
        format: Default::default(),
    }
}

fn default_interval() -> Interval {
    Interval::left_open(-0.4, -0.1).expect("valid interval")
}

fn with_interval(c: &mut ExperimentConfig) {
    c.interval = Some(default_interval());
}

fn with_epsilon(c: &mut ExperimentConfig) {
    c.epsilon = Some(0.05);
}

fn with_endpoint(c: &mut ExperimentConfig) {
    c.x = Some(1.0);
}

fn local_time_defaults(c: &mut ExperimentConfig) {
    c.n = 4096;
    c.epsilon = Some(0.02);
    c.y = Some(-0.5);
}

fn discrete_defaults(c: &mut ExperimentConfig) {
    c.n = 4;
    c.paths = 100;
}

fn per_family_defaults(c: &mut ExperimentConfig) {
    c.paths = 100;
}

fn no_defaults(_: &mut ExperimentConfig) {}

fn registry() -> Vec<(u64, Entry)> {
    macro_rules! entry {
        ($seed:expr, $name:expr, $cite:expr, $desc:expr, $stat:expr, $defaults:expr, $run:expr) => {
            (
                $seed,
                Entry {
                    info: ExperimentInfo {
                        name: $name,
                        citation: $cite,
                        description: $desc,
                    },
                    statistical: $stat,
                    defaults: $defaults,
                    run: $run,
                },
            )
        };
    }
    vec![
        entry!(
            101,
            "nu-uniformity",
            "occupation-time shift: uniform shift time",
            "KS test of nu/n against U[0,1] for the occupation shift of bridges",
            true,
            with_interval,
            nu_uniformity
        ),
        entry!(
            102,
            "nu-independence",
            "occupation-time shift: independence of the shift time",
            "chi-square independence of nu/n and the max of the shifted bridge",
            true,
            with_interval,
            nu_independence
        ),
        entry!(
            103,
            "theorem22-forward",
            "occupation-time shift: conditioned law (forward)",
            "shifted bridges vs rejection-sampled bridges with min in I",
            true,
            with_interval,
            theorem22_forward
        ),
        entry!(
            104,
            "theorem22-converse",
            "occupation-time shift: converse",
            "uniform re-shift of shifted bridges vs bridges with amplitude >= -sup I",
            true,
            with_interval,
            theorem22_converse
        ),
        entry!(
            105,
            "discrete-exact-theorem22",
            "occupation-time shift: exact discrete statement",
            "exhaustive enumeration of small walks: shifted law, nu law, independence",
            false,
            discrete_defaults,
            discrete_exact
        ),
        entry!(
            106,
            "vervaat-limit",
            "Vervaat transform as the eps -> 0 limit of conditioning",
            "KS distance between max(vervaat(bridge)) and max(bridge | min >= -eps) along an eps schedule",
            true,
            with_epsilon,
            vervaat_limit_bridge
        ),
        entry!(
            107,
            "ei-vervaat-limit",
            "Vervaat limit for exchangeable-increment bridges",
            "as vervaat-limit, for an EI bridge with sigma = 1 and jumps {0.6, -0.4, 0.3}",
            true,
            with_epsilon,
            vervaat_limit_ei
        ),
        entry!(
            108,
            "range-equals-excursion-max",
            "excursion maximum equals bridge range",
            "pathwise max(vervaat(p)) = amplitude(p), plus a two-sample KS check",
            true,
            no_defaults,
            range_equals_excursion_max
        ),
        entry!(
            109,
            "bessel3-first-passage",
            "first-passage shift of a bridge to a Bessel-3 bridge",
            "first_passage_transform of 0 -> 0 bridges vs Bessel-3 bridges to x",
            true,
            with_endpoint,
            bessel3_first_passage
        ),
        entry!(
            110,
            "meander-construction",
            "meander from signed Brownian motion",
            "first-passage shift of signed BM vs BM | min >= -eps",
            true,
            with_epsilon,
            meander_construction
        ),
        entry!(
            111,
            "bes3-to-bridge",
            "uniformly shifted Bessel-3 minus drift is a bridge",
            "bes3_to_bridge output vs bridges; correlation with the Bessel endpoint",
            true,
            no_defaults,
            bes3_to_bridge_experiment
        ),
        entry!(
            112,
            "local-time-min-level",
            "local-time shift conditions the minimum",
            "fraction of local-time shifted bridges with min within 2 eps of y",
            true,
            local_time_defaults,
            local_time_min_level
        ),
        entry!(
            113,
            "local-time-vervaat-degeneration",
            "local-time shift degenerates to Vervaat as y -> 0",
            "median |nu - argmin|/n along y = -0.3, -0.1, -0.03",
            true,
            local_time_defaults,
            local_time_vervaat_degeneration
        ),
        entry!(
            114,
            "reflected-identity",
            "reflected process R = X - J",
            "R[j] = -min(cyclic_shift(p, j)) for bridge, EI and signed-BM paths",
            false,
            per_family_defaults,
            reflected_identity
        ),
        entry!(
            115,
            "size-biased-theorem22",
            "occupation-time shift with occupation size-biasing",
            "exact enumeration and Monte Carlo check of the size-biased shift against min in I",
            true,
            with_interval,
            size_biased_theorem22
        ),
        entry!(
            116,
            "bessel3-last-passage",
            "last-passage shift of a 0 -> x bridge to a Bessel-3 bridge",
            "last_passage_transform of bridges to x vs Bessel-3 bridges to x",
            true,
            with_endpoint,
            bessel3_last_passage
        ),
        entry!(
            117,
            "meander-rayleigh",
            "meander as a Bessel-3 bridge to a Rayleigh endpoint",
            "last-passage shift of bridges to Rayleigh endpoints vs Bessel-3 bridges to Rayleigh endpoints",
            true,
            with_epsilon,
            meander_rayleigh
        ),
    ]
}

pub fn list_experiments() -> Vec<ExperimentInfo> {
    registry().into_iter().map(|(_, e)| e.info).collect()
}

fn lookup(name: &str) -> Result<(u64, Entry), HarnessError> {
    registry()
        .into_iter()
        .find(|(_, e)| e.info.name == name)
        .ok_or_else(|| HarnessError::UnknownExperiment(name.to_string()))
}

/// The registered defaults of an experiment.
pub fn default_config(name: &str) -> Result<ExperimentConfig, HarnessError> {
    let (seed, entry) = lookup(name)?;
    let mut c = base_config(name, seed);
    (entry.defaults)(&mut c);
    Ok(c)
}

#[derive(Serialize)]
struct ReportFile<'a> {
    #[serde(flatten)]
    report: &'a TestReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<&'a str>,
    config: ExperimentConfig,
}

/// Runs an experiment and, when `out_dir` is set, writes
/// `<name>.samples.<csv|json>` and `<name>.report.json` there.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome, HarnessError> {
    let (_, entry) = lookup(&cfg.experiment)?;
    cfg.validate(entry.statistical)?;
    let name = entry.info.name;
    let (report, samples, source, error) = match (entry.run)(cfg) {
        Ok(o) => (o.report, o.samples, o.source, None),
        Err(
            e @ (HarnessError::Sample(_) | HarnessError::Transform(_) | HarnessError::Stats(_) | HarnessError::Path(_)),
        ) => {
            let r = TestReport::exact(name, 0.0, false, (0, 0)).detail("error", 1.0);
            (r, Vec::new(), "", Some(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    let report = report.named(name).with_seed(cfg.seed);

    let mut outcome = RunOutcome {
        report,
        error,
        samples_file: None,
        report_file: None,
    };
    if let Some(dir) = &cfg.out_dir {
        fs::create_dir_all(dir)?;
        if !samples.is_empty() {
            let path = dir.join(format!("{name}.samples.{}", cfg.format.extension()));
            let meta = SampleMetadata {
                n: samples[0].n(),
                master_seed: cfg.seed,
                source: source.to_string(),
            };
            emit_samples(&samples, &meta, cfg.format, &path)?;
            outcome.samples_file = Some(path);
        }
        let path = dir.join(format!("{name}.report.json"));
        let file = ReportFile {
            report: &outcome.report,
            error: outcome.error.as_deref(),
            config: ExperimentConfig {
                out_dir: None,
                ..cfg.clone()
            },
        };
        let mut text = serde_json::to_string_pretty(&file)?;
        text.push('\n');
        fs::write(&path, text)?;
        outcome.report_file = Some(path);
    }
    Ok(outcome)
}

// ---------------------------------------------------------------------------
// plumbing

struct Draw<S> {
    stat: S,
    path: Option<GridPath>,
}

fn draw<S>(stat: S, path: GridPath) -> Result<Draw<S>, HarnessError> {
    Ok(Draw { stat, path: Some(path) })
}

/// Evaluates `f` on `count` tagged streams; keeps the statistics of every draw and
/// the paths of the first [`MAX_EMITTED_PATHS`].
fn draws<S, F>(count: usize, seed: u64, tag: u32, f: F) -> Result<(Vec<S>, Vec<GridPath>), HarnessError>
where
    S: Send,
    F: Fn(&mut ChaCha8Rng) -> Result<Draw<S>, HarnessError> + Sync,
{
    let out = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = RngStream::tagged(seed, tag, i as u64).rng();
            f(&mut rng).map(|d| (d.stat, d.path.filter(|_| i < MAX_EMITTED_PATHS)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut stats = Vec::with_capacity(count);
    let mut kept = Vec::new();
    for (s, p) in out {
        stats.push(s);
        kept.extend(p);
    }
    Ok((stats, kept))
}

fn retry<T>(mut attempt: impl FnMut() -> Result<Option<T>, HarnessError>) -> Result<T, HarnessError> {
    for _ in 0..DEFAULT_MAX_ATTEMPTS {
        if let Some(t) = attempt()? {
            return Ok(t);
        }
    }
    Err(SampleError::MaxAttemptsExceeded {
        attempts: DEFAULT_MAX_ATTEMPTS,
    }
    .into())
}

fn column<const K: usize>(rows: &[[f64; K]], i: usize) -> Vec<f64> {
    rows.iter().map(|r| r[i]).collect()
}

fn marginals(p: &GridPath) -> [f64; 3] {
    TIMES.map(|t| p.at_time(t))
}

fn time_label(t: f64) -> String {
    format!("t_{t}")
}

fn interval(cfg: &ExperimentConfig) -> Result<Interval, HarnessError> {
    let iv = cfg
        .interval
        .ok_or_else(|| HarnessError::InvalidConfig("experiment needs an interval".into()))?;
    Ok(Interval::new(iv.lo, iv.hi, iv.lo_open, iv.hi_open)?)
}

fn required(v: Option<f64>, what: &str) -> Result<f64, HarnessError> {
    v.ok_or_else(|| HarnessError::InvalidConfig(format!("experiment needs {what}")))
}

fn ei_bridge() -> Process {
    Process::Ei {
        params: EiParams::new(0.0, 1.0, vec![0.6, -0.4, 0.3]).expect("valid EI parameters"),
        x_end: None,
    }
}

/// Collects labelled sub-checks into one report. All-statistical groups report the
/// smallest p-value; anything else reports `exact_pass` = all passed. The statistic
/// is the largest sub-statistic; every sub-result is kept in `details`.
struct Checks {
    alpha: f64,
    subs: Vec<(String, TestReport)>,
}

impl Checks {
    fn new(alpha: f64) -> Self {
        Checks {
            alpha,
            subs: Vec::new(),
        }
    }

    fn add(&mut self, label: impl Into<String>, r: TestReport) {
        self.subs.push((label.into(), r));
    }

    fn exact(&mut self, label: impl Into<String>, statistic: f64, pass: bool) {
        self.add(label, TestReport::exact("", statistic, pass, (0, 0)));
    }

    fn finish(self, n_samples: (usize, usize)) -> TestReport {
        let statistic = self
            .subs
            .iter()
            .map(|(_, r)| r.statistic)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut report = if self.subs.iter().all(|(_, r)| r.p_value.is_some()) {
            let p = self.subs.iter().filter_map(|(_, r)| r.p_value).fold(1.0, f64::min);
            TestReport::statistical("", statistic, p, self.alpha, n_samples)
        } else {
            TestReport::exact("", statistic, self.subs.iter().all(|(_, r)| r.passed), n_samples)
        };
        for (label, r) in self.subs {
            report = report.detail(format!("{label}.statistic"), r.statistic);
            report = report.detail(format!("{label}.passed"), if r.passed { 1.0 } else { 0.0 });
            if let Some(p) = r.p_value {
                report = report.detail(format!("{label}.p_value"), p);
            }
            for (k, v) in r.details.into_iter().filter(|(k, _)| k != "alpha") {
                report = report.detail(format!("{label}.{k}"), v);
            }
        }
        report
    }
}

// ---------------------------------------------------------------------------
// occupation-time shift

fn occupation_shift<R: Rng + ?Sized>(n: usize, iv: Interval, rng: &mut R) -> Result<(usize, GridPath), HarnessError> {
    retry(|| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let r = condition_min_transform(&p, iv, rng.random())?;
        Ok(r.nu_index.zip(r.path))
    })
}

fn conditioned_bridge<R: Rng + ?Sized>(n: usize, iv: Interval, rng: &mut R) -> Result<GridPath, HarnessError> {
    let base = Process::Bridge { x: 0.0 };
    Ok(rejection_sample(&base, n, |p| iv.contains(minimum(p)), DEFAULT_MAX_ATTEMPTS, rng)?.0)
}

fn forward_profile(p: &GridPath) -> [f64; 4] {
    let [a, b, c] = marginals(p);
    [a, b, c, minimum(p)]
}

fn compare_forward(
    cfg: &ExperimentConfig,
    shifted: &[[f64; 4]],
    oracle: &[[f64; 4]],
    checks: &mut Checks,
) -> Result<(), HarnessError> {
    let labels = TIMES.map(time_label);
    for (i, label) in labels.iter().map(String::as_str).chain(["min"]).enumerate() {
        checks.add(
            label,
            ks_two_sample(&column(shifted, i), &column(oracle, i), cfg.alpha)?,
        );
    }
    Ok(())
}

fn nu_uniformity(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let iv = interval(cfg)?;
    let n = cfg.n;
    let (nus, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let (nu, q) = occupation_shift(n, iv, rng)?;
        draw(nu as f64 / n as f64, q)
    })?;
    Ok(Output {
        report: ks_uniform(&nus, cfg.alpha)?,
        samples,
        source: "condition-min",
    })
}

fn nu_independence(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let iv = interval(cfg)?;
    let n = cfg.n;
    let (rows, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let (nu, q) = occupation_shift(n, iv, rng)?;
        draw([nu as f64 / n as f64, maximum(&q)], q)
    })?;
    let report = chi2_independence(&column(&rows, 0), &column(&rows, 1), 5, cfg.alpha)?;
    Ok(Output {
        report,
        samples,
        source: "condition-min",
    })
}

fn theorem22_forward(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let iv = interval(cfg)?;
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (shifted, samples) = draws(m, cfg.seed, 0, |rng| {
        let (_, q) = occupation_shift(n, iv, rng)?;
        draw(forward_profile(&q), q)
    })?;
    let (oracle, _) = draws(m, cfg.seed, 1, |rng| {
        let p = conditioned_bridge(n, iv, rng)?;
        draw(forward_profile(&p), p)
    })?;
    let mut checks = Checks::new(cfg.alpha);
    compare_forward(cfg, &shifted, &oracle, &mut checks)?;
    Ok(Output {
        report: checks.finish((m, m)),
        samples,
        source: "condition-min",
    })
}

fn theorem22_converse(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let iv = interval(cfg)?;
    let (n, m) = (cfg.n, cfg.paths / 2);
    // positive occupation of I by the shifted minima of a bridge means amplitude >= -sup I
    let level = -iv.hi;
    let (reshifted, samples) = draws(m, cfg.seed, 0, |rng| {
        let (_, q) = occupation_shift(n, iv, rng)?;
        let r = cyclic_shift(&q, rng.random_range(0..n))?;
        draw([maximum(&r), r.at_time(0.5)], r)
    })?;
    let (oracle, _) = draws(m, cfg.seed, 1, |rng| {
        let p = rejection_sample_min_amplitude(n, level, &Process::Bridge { x: 0.0 }, DEFAULT_MAX_ATTEMPTS, rng)?;
        draw([maximum(&p), p.at_time(0.5)], p)
    })?;
    let mut checks = Checks::new(cfg.alpha);
    checks.add(
        "max",
        ks_two_sample(&column(&reshifted, 0), &column(&oracle, 0), cfg.alpha)?,
    );
    checks.add(
        "t_0.5",
        ks_two_sample(&column(&reshifted, 1), &column(&oracle, 1), cfg.alpha)?,
    );
    Ok(Output {
        report: checks.finish((m, m)),
        samples,
        source: "condition-min+uniform-shift",
    })
}

fn discrete_cases() -> Vec<(&'static str, Vec<f64>, Interval)> {
    let point = Interval::point(-2.0).expect("valid interval");
    let band = Interval::closed(-1.0, 0.0).expect("valid interval");
    let pm = vec![1.0, 1.0, -1.0, -1.0];
    let asym = vec![2.0, -1.0, -1.0];
    vec![
        ("pm1.point", pm.clone(), point),
        ("pm1.band", pm, band),
        ("asym.point", asym.clone(), point),
        ("asym.band", asym, band),
    ]
}

fn law_paths(law: &PathLaw) -> Result<Vec<GridPath>, HarnessError> {
    law.keys()
        .map(|k| Ok(GridPath::new(k.iter().map(|v| v.0).collect())?))
        .collect()
}

fn discrete_exact(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let mut checks = Checks::new(cfg.alpha);
    let mut samples = Vec::new();
    let mut cells = 0;
    let mut events = Vec::new();
    for (label, s, iv) in discrete_cases() {
        let e = enumerate_condition_min(&s, iv, InputWeighting::Plain);
        let law = e.path_law();
        let tv = exact_distribution_compare(&law, &conditioned_on_min(&s, iv), EXACT_TOL)?;
        checks.add(format!("{label}.law"), tv);
        let dev = e
            .nu_law()
            .iter()
            .map(|p| (p - 1.0 / e.n as f64).abs())
            .fold(0.0, f64::max);
        checks.exact(format!("{label}.nu_uniform"), dev, dev <= EXACT_TOL);
        let defect = e.independence_defect();
        checks.exact(format!("{label}.nu_independent"), defect, defect <= EXACT_TOL);
        events.push((format!("{label}.event_probability"), e.event_probability));
        if label == "pm1.band" {
            samples = law_paths(&law)?;
        }
        cells += e.joint.len();
    }
    let mut report = checks.finish((cells, 0));
    for (k, v) in events {
        report = report.detail(k, v);
    }
    Ok(Output {
        report,
        samples,
        source: "condition-min-enumeration",
    })
}

fn size_biased_theorem22(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let iv = interval(cfg)?;
    let (n, m) = (cfg.n, cfg.paths / 2);
    let mut checks = Checks::new(cfg.alpha);
    for (label, s, siv) in discrete_cases() {
        let law = enumerate_condition_min(&s, siv, InputWeighting::SizeBiased).path_law();
        checks.add(
            format!("{label}.law"),
            exact_distribution_compare(&law, &conditioned_on_min(&s, siv), EXACT_TOL)?,
        );
    }
    // accepting a uniform cell only when it is occupied size-biases the input by its occupation
    let (shifted, samples) = draws(m, cfg.seed, 0, |rng| {
        let q = retry(|| {
            let p = sample_brownian_bridge(n, 0.0, rng);
            let j = rng.random_range(0..n);
            let mj = shifted_min_profile(&p)[j];
            Ok(if iv.contains(mj) {
                Some(cyclic_shift(&p, j)?)
            } else {
                None
            })
        })?;
        draw(forward_profile(&q), q)
    })?;
    let (oracle, _) = draws(m, cfg.seed, 1, |rng| {
        let p = conditioned_bridge(n, iv, rng)?;
        draw(forward_profile(&p), p)
    })?;
    compare_forward(cfg, &shifted, &oracle, &mut checks)?;
    Ok(Output {
        report: checks.finish((m, m)),
        samples,
        source: "size-biased-shift",
    })
}

// ---------------------------------------------------------------------------
// Vervaat limits and the range identity

fn vervaat_limit(cfg: &ExperimentConfig, base: &Process) -> Result<Output, HarnessError> {
    let (n, m) = (cfg.n, cfg.paths / 2);
    let eps_final = required(cfg.epsilon, "epsilon")?;
    let mut schedule: Vec<f64> = [0.5, 0.2, 0.1].into_iter().filter(|e| *e > eps_final).collect();
    schedule.push(eps_final);

    let (ver, samples) = draws(m, cfg.seed, 0, |rng| {
        let v = vervaat(&base.sample(n, rng));
        draw(maximum(&v), v)
    })?;
    let mut checks = Checks::new(cfg.alpha);
    let mut distances = Vec::new();
    for (k, &eps) in schedule.iter().enumerate() {
        let (cond, _) = draws(m, cfg.seed, 1 + k as u32, |rng| {
            let p = rejection_sample_conditioned_min(n, eps, base, DEFAULT_MAX_ATTEMPTS, rng)?;
            draw(maximum(&p), p)
        })?;
        let r = ks_two_sample(&ver, &cond, cfg.alpha)?;
        distances.push(r.statistic);
        if k + 1 == schedule.len() {
            checks.add(format!("eps_{eps}"), r);
        }
    }
    let worst_rise = distances.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    checks.exact("monotone", worst_rise, worst_rise <= 0.0);
    let mut report = checks.finish((m, m));
    for (eps, d) in schedule.iter().zip(&distances) {
        report = report.detail(format!("distance.eps_{eps}"), *d);
    }
    Ok(Output {
        report,
        samples,
        source: "vervaat",
    })
}

fn vervaat_limit_bridge(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    vervaat_limit(cfg, &Process::Bridge { x: 0.0 })
}

fn vervaat_limit_ei(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    vervaat_limit(cfg, &ei_bridge())
}

fn range_equals_excursion_max(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (pairs, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let v = vervaat(&p);
        draw([maximum(&v), amplitude(&p)], v)
    })?;
    let err = pairs
        .iter()
        .map(|[a, b]| (a - b).abs() / (1.0 + b.abs()))
        .fold(0.0, f64::max);
    let (amps, _) = draws(m, cfg.seed, 1, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        draw(amplitude(&p), p)
    })?;
    let mut checks = Checks::new(cfg.alpha);
    checks.exact("pathwise", err, err <= PATHWISE_TOL);
    checks.add("ks", ks_two_sample(&column(&pairs[..m], 0), &amps, cfg.alpha)?);
    Ok(Output {
        report: checks.finish((cfg.paths, m)),
        samples,
        source: "vervaat",
    })
}

// ---------------------------------------------------------------------------
// first/last passage shifts, meander, Bessel-3

fn first_passage_retry<R: Rng + ?Sized>(
    rng: &mut R,
    mut sample: impl FnMut(&mut R) -> (GridPath, f64),
) -> Result<(GridPath, usize), HarnessError> {
    let mut misses = 0;
    let q = retry(|| {
        let (p, x) = sample(rng);
        match first_passage_transform(&p, x, rng.random()) {
            Ok(r) => Ok(r.into_path()),
            Err(TransformError::NoPassage { .. }) => {
                misses += 1;
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    })?;
    Ok((q, misses))
}

fn compare_marginals(
    cfg: &ExperimentConfig,
    got: &[[f64; 3]],
    oracle: &[[f64; 3]],
    checks: &mut Checks,
) -> Result<(), HarnessError> {
    for (i, t) in TIMES.iter().enumerate() {
        checks.add(
            time_label(*t),
            ks_two_sample(&column(got, i), &column(oracle, i), cfg.alpha)?,
        );
    }
    Ok(())
}

fn bessel3_bridge_oracle(cfg: &ExperimentConfig, x: f64, tag: u32) -> Result<Vec<[f64; 3]>, HarnessError> {
    let n = cfg.n;
    Ok(draws(cfg.paths / 2, cfg.seed, tag, |rng| {
        let p = sample_bessel3_bridge(n, x, rng);
        draw(marginals(&p), p)
    })?
    .0)
}

fn bessel3_first_passage(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let x = required(cfg.x, "x")?;
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (rows, samples) = draws(m, cfg.seed, 0, |rng| {
        let (q, misses) = first_passage_retry(rng, |rng| (sample_brownian_bridge(n, 0.0, rng), x))?;
        draw((marginals(&q), q.endpoint(), misses), q)
    })?;
    let got: Vec<[f64; 3]> = rows.iter().map(|r| r.0).collect();
    let oracle = bessel3_bridge_oracle(cfg, x, 1)?;
    let mut checks = Checks::new(cfg.alpha);
    compare_marginals(cfg, &got, &oracle, &mut checks)?;
    let mut report = checks.finish((m, m));
    report = report.detail("mean_endpoint", rows.iter().map(|r| r.1).sum::<f64>() / m as f64);
    report = report.detail("target_endpoint", x);
    report = report.detail("no_passage_redraws", rows.iter().map(|r| r.2).sum::<usize>() as f64);
    Ok(Output {
        report,
        samples,
        source: "first-passage",
    })
}

fn bessel3_last_passage(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let x = required(cfg.x, "x")?;
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (got, samples) = draws(m, cfg.seed, 0, |rng| {
        let p = sample_brownian_bridge(n, x, rng);
        let q = last_passage_transform(&p, rng.random())?
            .into_path()
            .expect("last passage always shifts");
        draw(marginals(&q), q)
    })?;
    let oracle = bessel3_bridge_oracle(cfg, x, 1)?;
    let mut checks = Checks::new(cfg.alpha);
    compare_marginals(cfg, &got, &oracle, &mut checks)?;
    Ok(Output {
        report: checks.finish((m, m)),
        samples,
        source: "last-passage",
    })
}

fn meander_oracle(cfg: &ExperimentConfig) -> Result<Vec<[f64; 2]>, HarnessError> {
    let eps = required(cfg.epsilon, "epsilon")?;
    let n = cfg.n;
    Ok(draws(cfg.paths / 2, cfg.seed, 1, |rng| {
        let p = rejection_sample_conditioned_min(n, eps, &Process::Bm, DEFAULT_MAX_ATTEMPTS, rng)?;
        draw([p.endpoint(), p.at_time(0.5)], p)
    })?
    .0)
}

fn compare_meander(cfg: &ExperimentConfig, got: &[[f64; 2]], oracle: &[[f64; 2]]) -> Result<TestReport, HarnessError> {
    let mut checks = Checks::new(cfg.alpha);
    checks.add(
        "endpoint",
        ks_two_sample(&column(got, 0), &column(oracle, 0), cfg.alpha)?,
    );
    checks.add("t_0.5", ks_two_sample(&column(got, 1), &column(oracle, 1), cfg.alpha)?);
    let mean = |rows: &[[f64; 2]]| rows.iter().map(|r| r[0]).sum::<f64>() / rows.len() as f64;
    Ok(checks
        .finish((got.len(), oracle.len()))
        .detail("mean_endpoint", mean(got))
        .detail("oracle_mean_endpoint", mean(oracle)))
}

fn meander_construction(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let n = cfg.n;
    let (got, samples) = draws(cfg.paths / 2, cfg.seed, 0, |rng| {
        let (q, _) = first_passage_retry(rng, |rng| {
            let p = sample_signed_bm(n, rng);
            let x = p.endpoint();
            (p, x)
        })?;
        draw([q.endpoint(), q.at_time(0.5)], q)
    })?;
    let report = compare_meander(cfg, &got, &meander_oracle(cfg)?)?;
    Ok(Output {
        report,
        samples,
        source: "signed-bm+first-passage",
    })
}

fn rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (-2.0 * (1.0 - rng.random::<f64>()).ln()).sqrt()
}

/// Gated against a Bessel-3 bridge to an independent Rayleigh endpoint (the exact
/// meander law). The rejection oracle at finite eps is reported in `details` only:
/// its endpoint law is visibly short of the limit at eps = 0.05.
fn meander_rayleigh(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (got, samples) = draws(m, cfg.seed, 0, |rng| {
        let p = sample_brownian_bridge(n, rayleigh(rng), rng);
        let q = last_passage_transform(&p, rng.random())?
            .into_path()
            .expect("last passage always shifts");
        draw([q.endpoint(), q.at_time(0.5)], q)
    })?;
    let (exact, _) = draws(m, cfg.seed, 2, |rng| {
        let p = sample_bessel3_bridge(n, rayleigh(rng), rng);
        draw([p.endpoint(), p.at_time(0.5)], p)
    })?;
    let mut report = compare_meander(cfg, &got, &exact)?;
    let reference = compare_meander(cfg, &got, &meander_oracle(cfg)?)?;
    for (k, v) in reference
        .details
        .into_iter()
        .filter(|(k, _)| k != "alpha" && k != "mean_endpoint")
    {
        report = report.detail(format!("rejection_oracle.{k}"), v);
    }
    Ok(Output {
        report,
        samples,
        source: "rayleigh-bridge+last-passage",
    })
}

fn bes3_to_bridge_experiment(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let (n, m) = (cfg.n, cfg.paths / 2);
    let (rows, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let p = sample_bessel3_process(n, rng);
        let q = bes3_to_bridge(&p, rng.random())?;
        draw((marginals(&q), p.endpoint()), q)
    })?;
    let got: Vec<[f64; 3]> = rows[..m].iter().map(|r| r.0).collect();
    let (oracle, _) = draws(m, cfg.seed, 1, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        draw(marginals(&p), p)
    })?;
    let mut checks = Checks::new(cfg.alpha);
    compare_marginals(cfg, &got, &oracle, &mut checks)?;
    let ends: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let mids: Vec<f64> = rows.iter().map(|r| r.0[1]).collect();
    let rho = correlation(&ends, &mids);
    checks.exact("corr_endpoint_mid", rho.abs(), rho.abs() < 0.05);
    Ok(Output {
        report: checks.finish((cfg.paths, m)),
        samples,
        source: "bes3-to-bridge",
    })
}

// ---------------------------------------------------------------------------
// local-time shift and the reflected process

fn local_time_min_level(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let (n, eps, y) = (cfg.n, required(cfg.epsilon, "epsilon")?, required(cfg.y, "y")?);
    let (mins, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        match condition_min_value_transform(&p, y, eps, rng.random()) {
            Ok(r) => {
                let q = r.into_path().expect("event holds");
                Ok(Draw {
                    stat: Some(minimum(&q)),
                    path: Some(q),
                })
            }
            Err(TransformError::EmptyLocalTime { .. }) => Ok(Draw { stat: None, path: None }),
            Err(e) => Err(e.into()),
        }
    })?;
    let accepted: Vec<f64> = mins.into_iter().flatten().collect();
    if accepted.is_empty() {
        return Err(TransformError::EmptyLocalTime { level: -y }.into());
    }
    let inside = accepted.iter().filter(|m| (*m - y).abs() <= 2.0 * eps).count() as f64 / accepted.len() as f64;
    let report = TestReport::exact("", inside, inside >= 0.99, (cfg.paths, accepted.len()))
        .detail("accepted", accepted.len() as f64)
        .detail("median_min", median(&accepted));
    Ok(Output {
        report,
        samples,
        source: "condition-min-value",
    })
}

fn local_time_vervaat_degeneration(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    const LEVELS: [f64; 3] = [-0.3, -0.1, -0.03];
    let (n, eps) = (cfg.n, required(cfg.epsilon, "epsilon")?);
    let (rows, samples) = draws(cfg.paths, cfg.seed, 0, |rng| {
        let p = sample_brownian_bridge(n, 0.0, rng);
        let u: f64 = rng.random();
        let rho = argmin_first(&p) as f64;
        let mut out = [None; 3];
        for (slot, y) in out.iter_mut().zip(LEVELS) {
            match condition_min_value_transform(&p, y, eps, u) {
                Ok(r) => *slot = Some((r.nu_index.expect("event holds") as f64 - rho).abs() / n as f64),
                Err(TransformError::EmptyLocalTime { .. }) => {}
                Err(e) => return Err(e.into()),
            }
        }
        Ok(Draw {
            stat: out,
            path: Some(p),
        })
    })?;
    let mut report_details = Vec::new();
    let mut medians = Vec::new();
    for (i, y) in LEVELS.iter().enumerate() {
        let d: Vec<f64> = rows.iter().filter_map(|r| r[i]).collect();
        if d.is_empty() {
            return Err(TransformError::EmptyLocalTime { level: -y }.into());
        }
        let med = median(&d);
        medians.push(med);
        report_details.push((format!("y_{y}.median_distance"), med));
        report_details.push((format!("y_{y}.accepted"), d.len() as f64));
    }
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let mut report = TestReport::exact("", medians[medians.len() - 1], decreasing, (cfg.paths, 0));
    for (k, v) in report_details {
        report = report.detail(k, v);
    }
    Ok(Output {
        report,
        samples,
        source: "bridge",
    })
}

fn reflected_identity(cfg: &ExperimentConfig) -> Result<Output, HarnessError> {
    let n = cfg.n;
    let families: [(&str, Process); 3] = [
        ("bridge", Process::Bridge { x: 0.0 }),
        ("ei", ei_bridge()),
        ("signed-bm", Process::SignedBm),
    ];
    let mut checks = Checks::new(cfg.alpha);
    let mut samples = Vec::new();
    for (tag, (label, process)) in families.iter().enumerate() {
        let (errs, kept) = draws(cfg.paths, cfg.seed, tag as u32, |rng| {
            let p = process.sample(n, rng);
            let r = reflected_process(&p)?;
            let mut err = 0.0f64;
            for (j, rj) in r.values().iter().enumerate() {
                err = err.max((rj + minimum(&cyclic_shift(&p, j)?)).abs());
            }
            draw(err, p)
        })?;
        let worst = errs.iter().copied().fold(0.0, f64::max);
        checks.exact(*label, worst, worst <= PATHWISE_TOL);
        if tag == 0 {
            samples = kept;
        }
    }
    Ok(Output {
        report: checks.finish((3 * cfg.paths, 0)),
        samples,
        source: "bridge",
    })
}
