//! Flat `key = value` configuration with `[section]` headers.
//!
//! Parsing never stops at the first problem: every malformed line and every invalid field
//! is collected and reported together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use conslaw_core::constructions::{OscillatorParams, WkbConfig};
use conslaw_core::flux::{Flux, Interval};
use conslaw_core::scalar::linspace;
use sha2::{Digest, Sha256};

pub const DEFAULT_COST_CEILING: f64 = 1e9;
pub const DEFAULT_SEED: u64 = 0x5eed;
const SECTIONS: [&str; 8] = ["", "run", "flux", "degeneracy", "variation", "cheng", "wkb", "sweep"];
const ORACLE_SECTION: &str = "oracle";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Degeneracy,
    Variation,
    Cheng,
    Wkb,
    Sweep,
    OracleCheck,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Degeneracy => "degeneracy",
            Kind::Variation => "variation",
            Kind::Cheng => "cheng",
            Kind::Wkb => "wkb",
            Kind::Sweep => "sweep",
            Kind::OracleCheck => "oracle-check",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        [Kind::Degeneracy, Kind::Variation, Kind::Cheng, Kind::Wkb, Kind::Sweep, Kind::OracleCheck]
            .into_iter()
            .find(|k| k.name() == text)
    }

    fn section(self) -> &'static str {
        match self {
            Kind::OracleCheck => ORACLE_SECTION,
            k => k.name(),
        }
    }

    fn needs_flux(self) -> bool {
        matches!(self, Kind::Degeneracy | Kind::Cheng | Kind::Wkb | Kind::Sweep)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One problem found in a config file.
#[derive(Debug, Clone, PartialEq)]
pub enum Issue {
    /// The line could not be read as a section header or `key = value`.
    Parse { line: usize, message: String },
    /// A field is missing, malformed or out of range.
    Validation { line: Option<usize>, field: String, message: String },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::Parse { line, message } => write!(f, "line {line}: {message}"),
            Issue::Validation { line: Some(l), field, message } => write!(f, "line {l}: {field}: {message}"),
            Issue::Validation { line: None, field, message } => write!(f, "{field}: {message}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self.issues.iter().map(|i| i.to_string()).collect();
        f.write_str(&lines.join("\n"))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
pub struct DegeneracyParams {
    pub kmax: usize,
    pub grid_size: usize,
    pub directions: usize,
    pub resolution: usize,
    pub holder_grid: usize,
    pub expect_d: Option<usize>,
    pub expect_alpha: Option<f64>,
    pub alpha_tol: f64,
    pub expect_p: Option<f64>,
    /// Relative tolerance on the Hölder exponent.
    pub p_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone)]
pub struct VariationParams {
    pub oscillator: OscillatorParams<f64>,
    pub samples: usize,
    pub tv_exponents: Vec<f64>,
    pub terms: usize,
    pub q: Vec<f64>,
    pub expect: Vec<Expect>,
    pub expect_tail: Vec<f64>,
    pub tail_tol: f64,
    pub min_quality: f64,
}

#[derive(Debug, Clone)]
pub struct ChengParams {
    pub oscillator: OscillatorParams<f64>,
    pub base_state: f64,
    pub target_t: f64,
    pub times: Vec<f64>,
    pub dx: Vec<f64>,
    pub window: (f64, f64),
    pub cfl: f64,
    pub min_order: f64,
    pub tv_exponents: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WkbParams {
    pub wkb: WkbConfig<f64>,
    pub amplitude: f64,
    pub t: f64,
    pub cells_per_period: usize,
    pub cfl: f64,
    pub min_slope: f64,
}

#[derive(Debug, Clone)]
pub struct SweepParams {
    pub wkb: WkbConfig<f64>,
    pub amplitude: f64,
    pub t: f64,
    pub s_primes: Vec<f64>,
    pub points_per_period: usize,
    pub expect_slopes: Vec<f64>,
    pub slope_tol: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct OracleParams {
    pub cases: usize,
    pub max_len: usize,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone)]
pub enum Params {
    Degeneracy(DegeneracyParams),
    Variation(VariationParams),
    Cheng(ChengParams),
    Wkb(WkbParams),
    Sweep(SweepParams),
    OracleCheck(OracleParams),
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub flux: Option<Flux<f64>>,
    pub params: Params,
    pub out_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub cost_ceiling: f64,
    /// Estimated cell updates (or equivalent elementary evaluations).
    pub estimated_cost: f64,
    pub source: String,
    pub hash: String,
}

/// SHA-256 of the config text, hex encoded.
pub fn config_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Reads and validates a config file. `kind` comes from the command line; the file may
/// also name it with a top-level `kind = ...`, and the two must agree.
pub fn parse_config(path: &Path, kind: Option<Kind>) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        issues: vec![Issue::Validation {
            line: None,
            field: "config".into(),
            message: format!("{}: {e}", path.display()),
        }],
    })?;
    parse_config_str(&text, kind)
}

pub fn parse_config_str(text: &str, kind: Option<Kind>) -> Result<ExperimentConfig, ConfigError> {
    let (raw, mut issues) = tokenize(text);
    let mut r = Reader { raw: &raw, issues: &mut issues, used: BTreeSet::new() };
    let config = validate(&mut r, text, kind);
    let unused: Vec<(String, String, usize)> = raw
        .iter()
        .filter(|(k, _)| !r.used.contains(*k))
        .map(|((s, k), (_, line))| (s.clone(), k.clone(), *line))
        .collect();
    for (s, k, line) in unused {
        issues.push(Issue::Validation { line: Some(line), field: qualified(&s, &k), message: "unknown key".into() });
    }
    match config {
        Some(c) if issues.is_empty() => Ok(c),
        _ => {
            issues.sort_by_key(|i| match i {
                Issue::Parse { line, .. } => *line,
                Issue::Validation { line, .. } => line.unwrap_or(usize::MAX),
            });
            Err(ConfigError { issues })
        }
    }
}

type Raw = BTreeMap<(String, String), (String, usize)>;

fn tokenize(text: &str) -> (Raw, Vec<Issue>) {
    let mut raw = Raw::new();
    let mut issues = Vec::new();
    let mut section = String::new();
    let mut section_ok = true;
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']').map(str::trim) {
                Some(name) if SECTIONS.contains(&name) || name == ORACLE_SECTION => {
                    section = name.to_string();
                    section_ok = true;
                }
                Some(name) => {
                    issues.push(Issue::Parse { line, message: format!("unknown section [{name}]") });
                    section_ok = false;
                }
                None => issues.push(Issue::Parse { line, message: "unterminated section header".into() }),
            }
            continue;
        }
        let Some((k, v)) = content.split_once('=') else {
            issues.push(Issue::Parse { line, message: format!("expected `key = value`, got `{content}`") });
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.contains(char::is_whitespace) {
            issues.push(Issue::Parse { line, message: format!("invalid key `{k}`") });
            continue;
        }
        if !section_ok {
            continue;
        }
        let key = (section.clone(), k.to_string());
        if let Some((_, first)) = raw.get(&key) {
            issues.push(Issue::Parse {
                line,
                message: format!("duplicate key `{}` (first set on line {first})", qualified(&section, k)),
            });
            continue;
        }
        raw.insert(key, (v.to_string(), line));
    }
    (raw, issues)
}

fn qualified(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

/// Field accessors that record problems instead of returning early.
struct Reader<'a> {
    raw: &'a Raw,
    issues: &'a mut Vec<Issue>,
    used: BTreeSet<(String, String)>,
}

impl Reader<'_> {
    fn get(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let k = (section.to_string(), key.to_string());
        let v = self.raw.get(&k).cloned();
        if v.is_some() {
            self.used.insert(k);
        }
        v
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.raw.contains_key(&(section.to_string(), key.to_string()))
    }

    fn line(&self, section: &str, key: &str) -> Option<usize> {
        self.raw.get(&(section.to_string(), key.to_string())).map(|(_, l)| *l)
    }

    fn fail(&mut self, section: &str, key: &str, message: impl Into<String>) {
        let line = self.line(section, key);
        self.issues.push(Issue::Validation { line, field: qualified(section, key), message: message.into() });
    }

    fn parsed<V>(&mut self, section: &str, key: &str, parse: impl Fn(&str) -> Result<V, String>) -> Option<Option<V>> {
        match self.get(section, key) {
            None => Some(None),
            Some((v, _)) => match parse(&v) {
                Ok(x) => Some(Some(x)),
                Err(m) => {
                    self.fail(section, key, m);
                    None
                }
            },
        }
    }

    fn check<V>(&mut self, section: &str, key: &str, v: Option<V>, ok: impl Fn(&V) -> bool, what: &str) -> Option<V> {
        match v {
            Some(x) if ok(&x) => Some(x),
            Some(_) => {
                self.fail(section, key, format!("must be {what}"));
                None
            }
            None => None,
        }
    }

    fn real(
        &mut self,
        section: &str,
        key: &str,
        default: Option<f64>,
        ok: impl Fn(&f64) -> bool,
        what: &str,
    ) -> Option<f64> {
        let v = match self.parsed(section, key, parse_real)? {
            Some(x) => Some(x),
            None if default.is_some() => return default,
            None => {
                self.fail(section, key, "missing");
                return None;
            }
        };
        self.check(section, key, v, ok, what)
    }

    fn opt_real(&mut self, section: &str, key: &str) -> Result<Option<f64>, ()> {
        self.parsed(section, key, parse_real).ok_or(())
    }

    fn count(&mut self, section: &str, key: &str, default: usize, min: usize) -> Option<usize> {
        let v = self.parsed(section, key, parse_count)?.unwrap_or(default);
        self.check(section, key, Some(v), |&n| n >= min, &format!("an integer >= {min}"))
    }

    fn list(
        &mut self,
        section: &str,
        key: &str,
        default: Option<Vec<f64>>,
        ok: impl Fn(&f64) -> bool,
        what: &str,
    ) -> Option<Vec<f64>> {
        let v =
            match self.parsed(section, key, |s| s.split(',').map(parse_real).collect::<Result<Vec<f64>, String>>())? {
                Some(x) => x,
                None => match default {
                    Some(d) => return Some(d),
                    None => {
                        self.fail(section, key, "missing");
                        return None;
                    }
                },
            };
        if v.is_empty() || !v.iter().all(&ok) {
            self.fail(section, key, format!("every entry must be {what}"));
            return None;
        }
        Some(v)
    }
}

/// Accepts decimals and simple fractions such as `4/3`.
fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let (a, b) = (a.trim().parse::<f64>(), b.trim().parse::<f64>());
            match (a, b) {
                (Ok(a), Ok(b)) if b != 0.0 => a / b,
                _ => return Err(format!("`{s}` is not a number")),
            }
        }
        None => s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_count(s: &str) -> Result<usize, String> {
    let s = s.trim().replace('_', "");
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1e15 => Ok(v as usize),
        _ => Err(format!("`{s}` is not a non-negative integer")),
    }
}

fn in_open_unit(v: &f64) -> bool {
    *v > 0.0 && *v < 1.0
}

fn positive(v: &f64) -> bool {
    *v > 0.0
}

fn validate(r: &mut Reader, text: &str, cli_kind: Option<Kind>) -> Option<ExperimentConfig> {
    let file_kind = match r.get("", "kind") {
        Some((v, _)) => match Kind::parse(&v) {
            Some(k) => Some(k),
            None => {
                r.fail("", "kind", format!("unknown experiment kind `{v}`"));
                None
            }
        },
        None => None,
    };
    let kind = match (cli_kind, file_kind) {
        (Some(a), Some(b)) if a != b => {
            r.fail("", "kind", format!("config names `{b}` but the command is `{a}`"));
            None
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => {
            r.fail("", "kind", "missing");
            None
        }
    };

    let out_dir = r.get("run", "out").map(|(v, _)| PathBuf::from(v));
    let seed =
        r.parsed("run", "seed", |s| s.trim().parse::<u64>().map_err(|_| format!("`{s}` is not a u64 seed"))).flatten();
    let threads = r.count("run", "threads", 0, 0).filter(|&n| n > 0);
    let cost_ceiling = r.real("run", "cost_ceiling", Some(DEFAULT_COST_CEILING), positive, "positive");

    let kind = kind?;
    for section in SECTIONS.iter().copied().chain([ORACLE_SECTION]) {
        let foreign = !section.is_empty() && section != "run" && section != "flux" && section != kind.section();
        if foreign {
            let keys: Vec<String> = r.raw.keys().filter(|(s, _)| s == section).map(|(_, k)| k.clone()).collect();
            for k in keys {
                r.used.insert((section.to_string(), k.clone()));
                r.fail(section, &k, format!("section [{section}] is not used by `{kind}`"));
            }
        }
    }

    let flux = if kind.needs_flux() {
        parse_flux(r)
    } else {
        for k in ["family", "exponent", "coeffs", "domain"] {
            if r.has("flux", k) {
                r.get("flux", k);
                r.fail("flux", k, format!("`{kind}` takes no flux"));
            }
        }
        None
    };
    // with a broken flux the section is still checked, against a permissive stand-in
    let stand_in = Flux::burgers(Interval::new(-1e6, 1e6).expect("valid"));
    let params = parse_params(r, kind, flux.as_ref().unwrap_or(&stand_in));
    if kind.needs_flux() && flux.is_none() {
        return None;
    }
    let params = params?;
    let cost_ceiling = cost_ceiling?;
    let estimated_cost = estimate_cost(&params, flux.as_ref());
    if estimated_cost > cost_ceiling {
        r.issues.push(Issue::Validation {
            line: r.line("run", "cost_ceiling"),
            field: "run.cost_ceiling".into(),
            message: format!("estimated cost {estimated_cost:.3e} cell updates exceeds the ceiling {cost_ceiling:.3e}"),
        });
        return None;
    }
    Some(ExperimentConfig {
        kind,
        flux,
        params,
        out_dir,
        seed,
        threads,
        cost_ceiling,
        estimated_cost,
        source: text.to_string(),
        hash: config_hash(text),
    })
}

fn parse_flux(r: &mut Reader) -> Option<Flux<f64>> {
    const S: &str = "flux";
    let family = match r.get(S, "family") {
        Some((v, _)) => Some(v),
        None => {
            r.fail(S, "family", "missing");
            None
        }
    };
    let domain = r.list(S, "domain", Some(vec![-1.0, 1.0]), |v| v.is_finite(), "finite");
    let domain = match domain {
        Some(d) if d.len() == 2 && d[0] < d[1] => Interval::new(d[0], d[1]).ok(),
        Some(_) => {
            r.fail(S, "domain", "must be two increasing values `lo, hi`");
            None
        }
        None => None,
    };
    let family = family?;
    let flux = match family.as_str() {
        "burgers" => domain.map(Flux::burgers),
        "cubic" => domain.map(Flux::cubic),
        "powerlaw" => {
            let e = r.real(S, "exponent", None, |&e| e > 1.0, "> 1");
            let (e, d) = (e?, domain?);
            Flux::power_law(e, d).map_err(|err| r.fail(S, "exponent", err.to_string())).ok()
        }
        "poly" => {
            let c = r.list(S, "coeffs", None, |v| v.is_finite(), "finite");
            let (c, d) = (c?, domain?);
            Flux::polynomial(c, d).map_err(|err| r.fail(S, "coeffs", err.to_string())).ok()
        }
        other => {
            r.fail(S, "family", format!("unknown family `{other}` (burgers, cubic, powerlaw, poly)"));
            None
        }
    };
    if family != "powerlaw" && r.has(S, "exponent") {
        r.get(S, "exponent");
        r.fail(S, "exponent", format!("not used by family `{family}`"));
    }
    if family != "poly" && r.has(S, "coeffs") {
        r.get(S, "coeffs");
        r.fail(S, "coeffs", format!("not used by family `{family}`"));
    }
    flux
}

fn oscillator(r: &mut Reader, section: &str) -> Option<OscillatorParams<f64>> {
    let s = r.real(section, "s", None, in_open_unit, "in (0, 1)");
    let eta = r.real(section, "eta", None, positive, "positive");
    let (s, eta) = (s?, eta?);
    OscillatorParams::new(s, eta).map_err(|e| r.fail(section, "eta", e.to_string())).ok()
}

fn parse_params(r: &mut Reader, kind: Kind, flux: &Flux<f64>) -> Option<Params> {
    match kind {
        Kind::Degeneracy => degeneracy_params(r).map(Params::Degeneracy),
        Kind::Variation => variation_params(r).map(Params::Variation),
        Kind::Cheng => cheng_params(r, flux).map(Params::Cheng),
        Kind::Wkb => wkb_params(r, flux).map(Params::Wkb),
        Kind::Sweep => sweep_params(r, flux).map(Params::Sweep),
        Kind::OracleCheck => oracle_params(r).map(Params::OracleCheck),
    }
}

fn degeneracy_params(r: &mut Reader) -> Option<DegeneracyParams> {
    const S: &str = "degeneracy";
    let kmax = r.count(S, "kmax", 8, 1);
    let grid_size = r.count(S, "grid_size", 401, 2);
    let directions = r.count(S, "directions", 64, 1);
    let resolution = r.count(S, "resolution", 2000, 10);
    let holder_grid = r.count(S, "holder_grid", 201, 3);
    let expect_d = r.parsed(S, "expect_d", parse_count);
    let expect_alpha = r.opt_real(S, "expect_alpha");
    let alpha_tol = r.real(S, "alpha_tol", Some(0.05), positive, "positive");
    let expect_p = r.opt_real(S, "expect_p");
    let p_tol = r.real(S, "p_tol", Some(0.05), positive, "positive");
    Some(DegeneracyParams {
        kmax: kmax?,
        grid_size: grid_size?,
        directions: directions?,
        resolution: resolution?,
        holder_grid: holder_grid?,
        expect_d: expect_d?,
        expect_alpha: expect_alpha.ok()?,
        alpha_tol: alpha_tol?,
        expect_p: expect_p.ok()?,
        p_tol: p_tol?,
    })
}

fn parse_expect(s: &str) -> Result<Vec<Expect>, String> {
    s.split(',')
        .map(|v| match v.trim() {
            "convergent" => Ok(Expect::Convergent),
            "divergent" => Ok(Expect::Divergent),
            other => Err(format!("`{other}` is neither `convergent` nor `divergent`")),
        })
        .collect()
}

fn variation_params(r: &mut Reader) -> Option<VariationParams> {
    const S: &str = "variation";
    let osc = oscillator(r, S);
    let samples = r.count(S, "samples", 20_000, 200);
    let tv = r.list(S, "tv_exponents", osc.map(|o| vec![o.s]), in_open_unit_closed, "in (0, 1]");
    let terms = r.count(S, "terms", 10_000, 20);
    let q = r.list(S, "q", osc.map(|o| vec![1.0 / o.s, 1.0 / (o.s + o.eta)]), |&q| q >= 1.0, ">= 1");
    let expect = r.parsed(S, "expect", parse_expect);
    let expect_tail = r.list(S, "expect_tail", Some(Vec::new()), |v| v.is_finite(), "finite");
    let tail_tol = r.real(S, "tail_tol", Some(0.1), positive, "positive");
    let min_quality = r.real(S, "min_quality", Some(0.99), |v| *v > 0.0 && *v <= 1.0, "in (0, 1]");
    let (q, expect, expect_tail) = (q?, expect?.unwrap_or_default(), expect_tail?);
    if !expect.is_empty() && expect.len() != q.len() {
        r.fail(S, "expect", format!("needs one verdict per q ({} given, {} expected)", expect.len(), q.len()));
        return None;
    }
    if !expect_tail.is_empty() && expect_tail.len() != q.len() {
        r.fail(
            S,
            "expect_tail",
            format!("needs one exponent per q ({} given, {} expected)", expect_tail.len(), q.len()),
        );
        return None;
    }
    Some(VariationParams {
        oscillator: osc?,
        samples: samples?,
        tv_exponents: tv?,
        terms: terms?,
        q,
        expect,
        expect_tail,
        tail_tol: tail_tol?,
        min_quality: min_quality?,
    })
}

fn in_open_unit_closed(v: &f64) -> bool {
    *v > 0.0 && *v <= 1.0
}

fn cheng_params(r: &mut Reader, flux: &Flux<f64>) -> Option<ChengParams> {
    const S: &str = "cheng";
    let osc = oscillator(r, S);
    let k = flux.domain();
    let base = r.real(
        S,
        "base_state",
        Some(0.0),
        |&u| k.contains(u),
        &format!("inside the flux domain [{}, {}]", k.lo(), k.hi()),
    );
    let target = r.real(S, "target_t", Some(1.0), |&t| t > 0.0, "positive");
    let default_times = target.map(|t| vec![0.25 * t, 0.5 * t, t]);
    let times = r.list(S, "times", default_times, |&t| t >= 0.0, ">= 0");
    let dx = r.list(S, "dx", Some(vec![1e-3, 5e-4, 2.5e-4]), positive, "positive");
    let window = r.list(S, "window", Some(vec![-0.5, 1.5]), |v| v.is_finite(), "finite");
    let window = match window {
        Some(w) if w.len() == 2 && w[0] <= 0.0 && w[1] >= 1.0 => Some((w[0], w[1])),
        Some(_) => {
            r.fail(S, "window", "must be `lo, hi` with lo <= 0 and hi >= 1");
            None
        }
        None => None,
    };
    let cfl = r.real(S, "cfl", Some(0.9), in_open_unit, "in (0, 1)");
    let min_order = r.real(S, "min_order", Some(0.8), |v| v.is_finite(), "finite");
    let tv = r.list(S, "tv_exponents", osc.map(|o| vec![o.s]), in_open_unit_closed, "in (0, 1]");
    let (target, times) = (target?, times?);
    if let Some(&t) = times.iter().find(|&&t| t > target) {
        r.fail(S, "times", format!("time {t} exceeds target_t = {target}"));
        return None;
    }
    if let (Some(w), Some(d)) = (window, &dx) {
        if let Some(&bad) = d.iter().find(|&&h| h > w.1 - w.0) {
            r.fail(S, "dx", format!("dx = {bad} exceeds the window width"));
            return None;
        }
    }
    Some(ChengParams {
        oscillator: osc?,
        base_state: base?,
        target_t: target,
        times,
        dx: dx?,
        window: window?,
        cfl: cfl?,
        min_order: min_order?,
        tv_exponents: tv?,
    })
}

/// Shared `[wkb]`/`[sweep]` fields: base state, amplitude, epsilons and the final time.
fn wkb_common(
    r: &mut Reader,
    section: &str,
    flux: &Flux<f64>,
    default_eps: Vec<f64>,
) -> Option<(WkbConfig<f64>, f64, f64)> {
    let k = flux.domain();
    let base = r.real(
        section,
        "base_state",
        Some(0.0),
        |&u| k.contains(u),
        &format!("inside the flux domain [{}, {}]", k.lo(), k.hi()),
    );
    let eps = r.list(section, "epsilons", Some(default_eps), |&e| e > 0.0 && e <= 1.0, "in (0, 1]");
    let base = base?;
    let amplitude = r.real(section, "amplitude", Some(WkbConfig::default_amplitude(flux, base)), positive, "positive");
    let t = match r.opt_real(section, "t") {
        Ok(t) => t,
        Err(()) => return None,
    };
    let (eps, amplitude) = (eps?, amplitude?);
    let cfg = WkbConfig::new(flux.clone(), base, WkbConfig::sine_profile(amplitude), eps, t)
        .map_err(|e| r.fail(section, if t.is_some() { "t" } else { "amplitude" }, e.to_string()))
        .ok()?;
    let t = cfg.t_final;
    Some((cfg, amplitude, t))
}

fn wkb_params(r: &mut Reader, flux: &Flux<f64>) -> Option<WkbParams> {
    const S: &str = "wkb";
    let common = wkb_common(r, S, flux, vec![0.2, 0.1, 0.05]);
    let cells = r.count(S, "cells_per_period", 4096, 2);
    let cfl = r.real(S, "cfl", Some(0.9), in_open_unit, "in (0, 1)");
    let min_slope = r.real(S, "min_slope", Some(0.8), |v| v.is_finite(), "finite");
    let (wkb, amplitude, t) = common?;
    Some(WkbParams { wkb, amplitude, t, cells_per_period: cells?, cfl: cfl?, min_slope: min_slope? })
}

fn sweep_params(r: &mut Reader, flux: &Flux<f64>) -> Option<SweepParams> {
    const S: &str = "sweep";
    let common = wkb_common(r, S, flux, vec![0.2, 0.1, 0.05, 0.025]);
    let s_primes = r.list(S, "s_primes", Some(vec![0.5, 0.7]), in_open_unit, "in (0, 1)");
    let ppp = r.count(S, "points_per_period", 32, 2);
    let expect = r.list(S, "expect_slopes", Some(Vec::new()), |v| v.is_finite(), "finite");
    let tol = r.list(S, "slope_tol", Some(vec![0.15]), positive, "positive");
    let (s_primes, expect, mut tol) = (s_primes?, expect?, tol?);
    if !expect.is_empty() {
        if expect.len() != s_primes.len() {
            r.fail(
                S,
                "expect_slopes",
                format!("needs one slope per s' ({} given, {} expected)", expect.len(), s_primes.len()),
            );
            return None;
        }
        if tol.len() == 1 {
            tol = vec![tol[0]; expect.len()];
        } else if tol.len() != expect.len() {
            r.fail(S, "slope_tol", "needs one tolerance, or one per expected slope");
            return None;
        }
    }
    let (wkb, amplitude, t) = common?;
    Some(SweepParams { wkb, amplitude, t, s_primes, points_per_period: ppp?, expect_slopes: expect, slope_tol: tol })
}

fn oracle_params(r: &mut Reader) -> Option<OracleParams> {
    const S: &str = ORACLE_SECTION;
    let cases = r.count(S, "cases", 500, 1);
    let max_len = r.count(S, "max_len", 12, 2);
    let max_len = r.check(S, "max_len", max_len, |&n| n <= conslaw_core::variation::BRUTEFORCE_MAX_LEN, "at most 14");
    let s = r.list(S, "s", Some(vec![0.25, 0.5, 1.0]), in_open_unit_closed, "in (0, 1]");
    Some(OracleParams { cases: cases?, max_len: max_len?, s: s? })
}

/// Largest wave speed over the sampled interval.
fn max_speed(flux: &Flux<f64>, lo: f64, hi: f64) -> f64 {
    let k = flux.domain();
    linspace(lo.max(k.lo()), hi.min(k.hi()), 1001)
        .into_iter()
        .filter_map(|u| flux.speed(u).ok())
        .fold(0.0, |m, a| m.max(a.abs()))
}

/// Godunov cell updates on `cells` cells up to time `t`.
fn godunov_cost(cells: f64, dx: f64, t: f64, speed: f64, cfl: f64) -> f64 {
    cells * (t * speed / (cfl * dx)).ceil().max(1.0)
}

fn estimate_cost(params: &Params, flux: Option<&Flux<f64>>) -> f64 {
    match params {
        Params::Degeneracy(p) => {
            (p.kmax * p.grid_size + p.directions * 9 * p.resolution + p.holder_grid * p.holder_grid) as f64
        }
        Params::Variation(p) => (p.samples * p.tv_exponents.len() + p.terms * p.q.len()) as f64,
        Params::Cheng(p) => {
            let flux = flux.expect("cheng has a flux");
            let k = flux.domain();
            let speed = max_speed(flux, k.lo(), k.hi());
            let width = p.window.1 - p.window.0;
            let certify = 20_000.0 * 32.0 * 64.0;
            let solves: f64 = p
                .times
                .iter()
                .flat_map(|&t| p.dx.iter().map(move |&h| (t, h)))
                .map(|(t, h)| godunov_cost((width / h).round(), h, t, speed, p.cfl))
                .sum();
            certify + solves
        }
        Params::Wkb(p) => {
            let (lo, hi) = p.wkb.profile_range();
            let emax = p.wkb.epsilons.iter().fold(0.0f64, |m, &e| m.max(e));
            let speed = max_speed(&p.wkb.flux, p.wkb.base_state + emax * lo, p.wkb.base_state + emax * hi);
            p.wkb
                .epsilons
                .iter()
                .map(|&e| {
                    let h = p.wkb.period(e) / p.cells_per_period as f64;
                    godunov_cost(p.cells_per_period as f64, h, p.t, speed, p.cfl)
                })
                .sum()
        }
        Params::Sweep(p) => p
            .wkb
            .epsilons
            .iter()
            .map(|&e| {
                let n = (p.points_per_period as f64 / p.wkb.period(e)).ceil() + 1.0;
                n * n / 2.0 + n * p.s_primes.len() as f64
            })
            .sum(),
        Params::OracleCheck(p) => p.cases as f64 * (1u64 << p.max_len) as f64 * p.max_len as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_and_counts() {
        assert_eq!(parse_real("4/3").unwrap(), 4.0 / 3.0);
        assert_eq!(parse_real(" -0.5 ").unwrap(), -0.5);
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("nan").is_err());
        assert_eq!(parse_count("10_000").unwrap(), 10_000);
        assert_eq!(parse_count("1e4").unwrap(), 10_000);
        assert!(parse_count("2.5").is_err());
    }

    #[test]
    fn comments_sections_and_duplicates() {
        let (raw, issues) =
            tokenize("kind = wkb # trailing\n[flux]\nfamily = cubic\nfamily = burgers\n[bogus]\nx = 1\nnot a pair\n");
        assert_eq!(raw.get(&("".into(), "kind".into())).unwrap(), &("wkb".to_string(), 1));
        let lines: Vec<usize> = issues
            .iter()
            .map(|i| match i {
                Issue::Parse { line, .. } => *line,
                _ => 0,
            })
            .collect();
        assert_eq!(lines, vec![4, 5, 7]);
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(config_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
