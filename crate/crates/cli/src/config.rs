//! Scenario configuration: a TOML file with `[run]`, `[channel]`, `[ebn0]`
//! and one or more `[[modem]]` sections. See `docs/config.md`.

use std::fmt;
use std::path::{Path, PathBuf};

use oofdm_core::channel::{CeilingBounceParams, ChannelModel};
use oofdm_core::metrics::{BandwidthConvention, SearchGrid, StopRule};
use oofdm_core::transmitter::{KappaRule, ModemConfig, Scheme};
use serde::Deserialize;
use toml::Spanned;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    SeSweep,
    SeEe,
    BerCurve,
    Selftest,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [
        Scenario::SeSweep,
        Scenario::SeEe,
        Scenario::BerCurve,
        Scenario::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::SeSweep => "se-sweep",
            Scenario::SeEe => "se-ee",
            Scenario::BerCurve => "ber-curve",
            Scenario::Selftest => "selftest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One problem found in a config file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    /// 1-based line, when the problem can be pinned to one.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    run: Option<Spanned<RawRun>>,
    #[serde(default)]
    channel: Option<Spanned<RawChannel>>,
    #[serde(default)]
    ebn0: Option<Spanned<RawEbn0>>,
    #[serde(default)]
    modem: Vec<Spanned<RawModem>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    scenario: Option<Spanned<String>>,
    seed: Option<u64>,
    jobs: Option<Spanned<usize>>,
    out: Option<PathBuf>,
    target_ber: Option<Spanned<f64>>,
    bandwidth: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    model: Spanned<String>,
    rms_delay_spread_ns: Option<Spanned<f64>>,
    cp_length: Option<usize>,
    data_rate_bps: Option<Spanned<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEbn0 {
    points_db: Option<Spanned<Vec<f64>>>,
    search_start_db: Option<f64>,
    search_stop_db: Option<f64>,
    search_step_db: Option<Spanned<f64>>,
    resolution_db: Option<Spanned<f64>>,
    min_errors: Option<Spanned<u64>>,
    max_bits: Option<Spanned<u64>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawKappa {
    Fixed(usize),
    List(Vec<usize>),
    Rule(String),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawAlpha {
    Fixed(usize),
    List(Vec<usize>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModem {
    scheme: Spanned<String>,
    n: Spanned<usize>,
    l: Spanned<usize>,
    m1: Spanned<usize>,
    m2: Spanned<usize>,
    kappa: Option<Spanned<RawKappa>>,
    alpha: Option<Spanned<RawAlpha>>,
    dco_bias_factor: Option<Spanned<f64>>,
    r2: Option<Spanned<f64>>,
    d_min: Option<Spanned<f64>>,
}

/// How a modem section chooses `kappa`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KappaSpec {
    Rule(KappaRule),
    Values(Vec<usize>),
}

/// One `[[modem]]` section after validation: a base config (with `kappa`
/// from the section's rule or first value) plus the lists to sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct ModemSpec {
    pub base: ModemConfig,
    pub kappa: KappaSpec,
    pub alphas: Vec<usize>,
}

impl ModemSpec {
    /// Every concrete config: alpha-major, then kappa in the given order.
    pub fn configs(&self) -> Vec<ModemConfig> {
        let kappas = match &self.kappa {
            KappaSpec::Rule(_) => vec![self.base.kappa],
            KappaSpec::Values(v) => v.clone(),
        };
        let mut out = Vec::new();
        for &alpha in &self.alphas {
            for &kappa in &kappas {
                let mut cfg = self.base.clone();
                cfg.filter_alpha = alpha;
                cfg.kappa = kappa;
                out.push(cfg);
            }
        }
        out
    }

    /// Kappas for an SE sweep: the explicit list, or every feasible value.
    pub fn sweep_kappas(&self) -> Vec<usize> {
        match &self.kappa {
            KappaSpec::Values(v) => v.clone(),
            KappaSpec::Rule(_) if self.base.scheme.has_im_branch() => {
                (1..=self.base.omega()).collect()
            }
            KappaSpec::Rule(_) => vec![0],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub jobs: usize,
    pub out: Option<PathBuf>,
    pub target_ber: f64,
    pub bandwidth: BandwidthConvention,
    pub channel: ChannelModel,
    pub data_rate: Option<f64>,
    pub ebn0_points: Vec<f64>,
    pub search: SearchGrid,
    pub modems: Vec<ModemSpec>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_TARGET_BER: f64 = 1e-3;

impl ScenarioConfig {
    /// Settings used when no config file is given (only `selftest` allows
    /// this).
    pub fn empty() -> Self {
        Self {
            scenario: None,
            seed: DEFAULT_SEED,
            jobs: 1,
            out: None,
            target_ber: DEFAULT_TARGET_BER,
            bandwidth: BandwidthConvention::default(),
            channel: ChannelModel::Los,
            data_rate: None,
            ebn0_points: Vec::new(),
            search: SearchGrid::default(),
            modems: Vec::new(),
        }
    }
}

/// Maps byte offsets to 1-based line numbers.
struct Lines<'a>(&'a str);

impl Lines<'_> {
    fn at(&self, offset: usize) -> usize {
        self.0[..offset.min(self.0.len())].matches('\n').count() + 1
    }
}

struct Collector<'a> {
    lines: Lines<'a>,
    out: Vec<Diagnostic>,
}

impl Collector<'_> {
    fn at<T>(&mut self, span: &Spanned<T>, message: impl Into<String>) {
        let line = self.lines.at(span.span().start);
        self.out.push(Diagnostic {
            line: Some(line),
            message: message.into(),
        });
    }

    fn global(&mut self, message: impl Into<String>) {
        self.out.push(Diagnostic {
            line: None,
            message: message.into(),
        });
    }
}

/// Parses and validates config text, reporting every problem found.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let raw: RawConfig = match toml::from_str(text) {
        Ok(raw) => raw,
        Err(e) => {
            let line = e.span().map(|s| Lines(text).at(s.start));
            return Err(vec![Diagnostic {
                line,
                message: e.message().to_string(),
            }]);
        }
    };
    let mut c = Collector {
        lines: Lines(text),
        out: Vec::new(),
    };
    let cfg = build(raw, &mut c);
    if c.out.is_empty() {
        Ok(cfg)
    } else {
        Err(c.out)
    }
}

/// Every violation in the file at `path`, without running anything. An
/// empty list means the file is valid.
pub fn validate_config(path: &Path) -> std::io::Result<Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_config(&text).err().unwrap_or_default())
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        vec![Diagnostic {
            line: None,
            message: format!("cannot read {}: {e}", path.display()),
        }]
    })?;
    parse_config(&text)
}

fn build(raw: RawConfig, c: &mut Collector) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::empty();

    if let Some(run) = raw.run {
        let run = run.into_inner();
        if let Some(s) = run.scenario {
            match Scenario::parse(s.get_ref()) {
                Some(v) => cfg.scenario = Some(v),
                None => c.at(
                    &s,
                    format!(
                        "unknown scenario '{}', expected one of se-sweep, se-ee, ber-curve, selftest",
                        s.get_ref()
                    ),
                ),
            }
        }
        if let Some(seed) = run.seed {
            cfg.seed = seed;
        }
        if let Some(jobs) = run.jobs {
            if *jobs.get_ref() == 0 {
                c.at(&jobs, "jobs must be at least 1");
            }
            cfg.jobs = *jobs.get_ref();
        }
        cfg.out = run.out;
        if let Some(t) = run.target_ber {
            let v = *t.get_ref();
            if !(v > 0.0 && v < 0.5) {
                c.at(&t, format!("target_ber = {v} must lie in (0, 0.5)"));
            }
            cfg.target_ber = v;
        }
        if let Some(b) = run.bandwidth {
            match b.get_ref().as_str() {
                "filter-half-width" => cfg.bandwidth = BandwidthConvention::FilterHalfWidth,
                "nominal" => cfg.bandwidth = BandwidthConvention::Nominal,
                other => c.at(
                    &b,
                    format!("unknown bandwidth '{other}', expected filter-half-width or nominal"),
                ),
            }
        }
    }

    if let Some(ch) = raw.channel {
        let ch = ch.into_inner();
        if let Some(rate) = &ch.data_rate_bps {
            let v = *rate.get_ref();
            if v > 0.0 && v.is_finite() {
                cfg.data_rate = Some(v);
            } else {
                c.at(rate, format!("data_rate_bps = {v} must be positive"));
            }
        }
        match ch.model.get_ref().as_str() {
            "los" => {
                if let Some(d) = &ch.rms_delay_spread_ns {
                    c.at(
                        d,
                        "rms_delay_spread_ns only applies to model = \"ceiling-bounce\"",
                    );
                }
            }
            "ceiling-bounce" => match &ch.rms_delay_spread_ns {
                None => c.at(&ch.model, "ceiling-bounce needs rms_delay_spread_ns"),
                Some(d) => match CeilingBounceParams::new(d.get_ref() * 1e-9) {
                    Ok(params) => {
                        if cfg.data_rate.is_none() && ch.data_rate_bps.is_none() {
                            c.at(
                                &ch.model,
                                "ceiling-bounce needs data_rate_bps to fix the sample period",
                            );
                        }
                        cfg.channel = ChannelModel::CeilingBounce {
                            params,
                            cp_length: ch.cp_length,
                        };
                    }
                    Err(e) => c.at(d, e.to_string()),
                },
            },
            other => c.at(
                &ch.model,
                format!("unknown channel model '{other}', expected los or ceiling-bounce"),
            ),
        }
    }

    if let Some(e) = raw.ebn0 {
        let e = e.into_inner();
        if let Some(p) = e.points_db {
            if p.get_ref().iter().any(|v| !v.is_finite()) {
                c.at(&p, "points_db must be finite");
            }
            cfg.ebn0_points = p.into_inner();
        }
        let g = &mut cfg.search;
        if let Some(v) = e.search_start_db {
            g.start_db = v;
        }
        if let Some(v) = e.search_stop_db {
            g.stop_db = v;
        }
        for (field, target, name) in [
            (&e.search_step_db, &mut g.step_db, "search_step_db"),
            (&e.resolution_db, &mut g.resolution_db, "resolution_db"),
        ] {
            if let Some(v) = field {
                if !(*v.get_ref() > 0.0) {
                    c.at(v, format!("{name} must be positive"));
                }
                *target = *v.get_ref();
            }
        }
        if !(g.start_db <= g.stop_db) {
            c.global(format!(
                "[ebn0] search_start_db = {} exceeds search_stop_db = {}",
                g.start_db, g.stop_db
            ));
        }
        let mut stop = StopRule::default();
        if let Some(v) = e.min_errors {
            if *v.get_ref() == 0 {
                c.at(&v, "min_errors must be at least 1");
            }
            stop.min_errors = *v.get_ref();
        }
        if let Some(v) = e.max_bits {
            if *v.get_ref() == 0 {
                c.at(&v, "max_bits must be at least 1");
            }
            stop.max_bits = *v.get_ref();
        }
        g.stop = stop;
    }

    for section in raw.modem {
        if let Some(spec) = build_modem(section, cfg.data_rate, c) {
            cfg.modems.push(spec);
        }
    }
    cfg
}

fn build_modem(
    section: Spanned<RawModem>,
    data_rate: Option<f64>,
    c: &mut Collector,
) -> Option<ModemSpec> {
    let header = Spanned::new(section.span(), ());
    let m = section.into_inner();
    let errors_before = c.out.len();

    let scheme = match m.scheme.get_ref().parse::<Scheme>() {
        Ok(s) => Some(s),
        Err(_) => {
            c.at(
                &m.scheme,
                format!(
                    "unknown scheme '{}', expected one of {}",
                    m.scheme.get_ref(),
                    Scheme::ALL.map(|s| s.name()).join(", ")
                ),
            );
            None
        }
    };
    let (n, l, m1, m2) = (
        *m.n.get_ref(),
        *m.l.get_ref(),
        *m.m1.get_ref(),
        *m.m2.get_ref(),
    );
    if n < 4 || !n.is_power_of_two() {
        c.at(&m.n, format!("n = {n} must be a power of two >= 4"));
    }
    if l == 0 || !l.is_power_of_two() {
        c.at(&m.l, format!("l = {l} must be a power of two >= 1"));
    }
    for (v, name) in [(&m.m1, "m1"), (&m.m2, "m2")] {
        let x = *v.get_ref();
        if x < 2 || !x.is_power_of_two() {
            c.at(v, format!("{name} = {x} must be a power of two >= 2"));
        }
    }
    let scheme = scheme?;
    if c.out.len() > errors_before {
        return None;
    }

    let mut base = match ModemConfig::new(scheme, n, l, m1, m2) {
        Ok(b) => b,
        Err(e) => {
            c.at(&header, e.to_string());
            return None;
        }
    };
    let omega = base.omega();
    if n / 4 == 0 || omega == 0 {
        c.at(&m.n, format!("n = {n} leaves no eligible subcarriers"));
        return None;
    }

    for (v, name) in [(&m.r2, "r2"), (&m.d_min, "d_min")] {
        if let Some(v) = v {
            let x = *v.get_ref();
            if !(x > 0.0 && x.is_finite()) {
                c.at(v, format!("{name} = {x} must be positive"));
            }
        }
    }
    if let Some(v) = &m.r2 {
        base.pair.r2 = *v.get_ref();
    }
    if let Some(v) = &m.d_min {
        base.pair.d_min = *v.get_ref();
    }
    if let Some(k) = &m.dco_bias_factor {
        let x = *k.get_ref();
        if !(x >= 0.0 && x.is_finite()) {
            c.at(k, format!("dco_bias_factor = {x} must be finite and >= 0"));
        } else if !matches!(scheme, Scheme::Dco | Scheme::DcoIm) {
            c.at(k, format!("dco_bias_factor does not apply to {scheme}"));
        } else {
            base.dco_bias_factor = x;
        }
    }

    let kappa = match &m.kappa {
        None => KappaSpec::Rule(KappaRule::Approx),
        Some(k) => match k.get_ref() {
            RawKappa::Rule(r) if r == "auto" => KappaSpec::Rule(KappaRule::Approx),
            RawKappa::Rule(r) if r == "exhaustive" => KappaSpec::Rule(KappaRule::Exhaustive),
            RawKappa::Rule(r) => {
                c.at(
                    k,
                    format!("kappa = '{r}' is not a number, a list, \"auto\" or \"exhaustive\""),
                );
                KappaSpec::Rule(KappaRule::Approx)
            }
            RawKappa::Fixed(v) => KappaSpec::Values(vec![*v]),
            RawKappa::List(v) => KappaSpec::Values(v.clone()),
        },
    };
    match &kappa {
        KappaSpec::Rule(rule) => match base.clone().with_kappa_rule(*rule) {
            Ok(b) => base = b,
            Err(e) => c.at(&header, e.to_string()),
        },
        KappaSpec::Values(values) => {
            let span = m.kappa.as_ref().expect("explicit kappa");
            if values.is_empty() {
                c.at(span, "kappa list is empty");
            }
            if !scheme.has_im_branch() && values.iter().any(|&v| v != 0) {
                c.at(
                    span,
                    format!("{scheme} has no index-modulation branch; kappa must be 0 or omitted"),
                );
            } else if scheme.has_im_branch() {
                for &v in values {
                    if v == 0 || v > omega {
                        c.at(span, format!("kappa = {v} outside [1, omega = {omega}]"));
                    }
                }
            }
            if let Some(&first) = values.first() {
                base.kappa = first;
            }
        }
    }

    let alphas = match &m.alpha {
        None => vec![0],
        Some(a) => {
            let values = match a.get_ref() {
                RawAlpha::Fixed(v) => vec![*v],
                RawAlpha::List(v) => v.clone(),
            };
            if values.is_empty() {
                c.at(a, "alpha list is empty");
            }
            if !scheme.is_filtered() && values.iter().any(|&v| v != 0) {
                c.at(a, format!("alpha only applies to {}", Scheme::HybridAco));
            }
            for &v in &values {
                if v > n / 2 {
                    c.at(a, format!("alpha = {v} outside [0, N/2 = {}]", n / 2));
                }
            }
            values
        }
    };

    if let Some(rate) = data_rate {
        match base.clone().with_data_rate(rate) {
            Ok(b) => base = b,
            Err(e) => c.at(&header, e.to_string()),
        }
    }
    if c.out.len() > errors_before {
        return None;
    }
    let spec = ModemSpec {
        base,
        kappa,
        alphas,
    };
    for cfg in spec.configs() {
        if let Err(e) = cfg.validate() {
            c.at(&header, e.to_string());
            return None;
        }
    }
    Some(spec)
}
