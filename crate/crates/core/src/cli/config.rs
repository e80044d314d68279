//! Run configuration: TOML text, `--set` overrides, cross-field checks.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mixture::{ContinuousDensity, FiniteAtoms, MixingMeasure};
use crate::spectral::{InitialDatum, IntervalDomain};

/// The shipped default configuration.
pub const DEFAULT_CONFIG: &str = include_str!("../../../../configs/default.toml");

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<String>,
    alpha: Option<f64>,
    domain: Option<RawDomain>,
    measure: Option<RawMeasure>,
    datum: Option<RawDatum>,
    basis: Option<RawBasis>,
    grid: Option<RawGrid>,
    mc: Option<RawMc>,
    ctrw: Option<RawCtrw>,
    validate: Option<RawValidate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    a: f64,
    b: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMeasure {
    #[serde(rename = "type")]
    kind: Option<String>,
    #[serde(default)]
    atom: Vec<RawAtom>,
    builtin: Option<String>,
    lower: Option<f64>,
    upper: Option<f64>,
    value: Option<f64>,
    scale: Option<f64>,
    exponent: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAtom {
    beta: f64,
    c: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDatum {
    kind: String,
    k: Option<usize>,
    center: Option<f64>,
    radius: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    kind: Option<String>,
    m: Option<usize>,
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    t: Option<Vec<f64>>,
    x: Option<Vec<f64>>,
    lambda: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMc {
    paths: Option<usize>,
    dt: Option<f64>,
    delta: Option<f64>,
    max_paths: Option<usize>,
    threads: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCtrw {
    t: Option<f64>,
    dt: Option<f64>,
    c: Option<Vec<f64>>,
    runs: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValidate {
    dt: Option<f64>,
    horizon: Option<f64>,
    window: Option<f64>,
    halvings: Option<usize>,
    lambda: Option<Vec<f64>>,
    decay_t: Option<Vec<f64>>,
    initial_t: Option<Vec<f64>>,
    eps_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisChoice {
    Exact,
    Discretized,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    pub kind: BasisChoice,
    /// Interior grid points.
    pub m: usize,
    /// Retained eigenpairs.
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McSpec {
    pub paths: usize,
    pub dt: f64,
    pub delta: f64,
    pub max_paths: usize,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtrwSpec {
    pub t: f64,
    /// Operational step of the reference E_t sampler for several atoms.
    pub dt: f64,
    pub ladder: Vec<f64>,
    pub runs: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateSpec {
    pub dt: f64,
    pub horizon: f64,
    pub window: f64,
    pub halvings: usize,
    pub lambdas: Vec<f64>,
    pub decay_times: Vec<f64>,
    pub initial_times: Vec<f64>,
    pub eps_rel: f64,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub alpha: f64,
    pub domain: IntervalDomain,
    pub measure: MixingMeasure,
    pub datum: InitialDatum,
    pub basis: BasisSpec,
    pub times: Vec<f64>,
    pub xs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub mc: McSpec,
    pub ctrw: CtrwSpec,
    pub validate: ValidateSpec,
    /// The merged configuration as TOML text.
    pub effective: String,
}

fn config_err(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("key `{key}`: {msg}"))
}

/// Line of the `[section]` header in `src`, for error messages.
fn section_line(src: &str, section: &str) -> Option<usize> {
    let header = format!("[{section}]");
    src.lines().position(|l| l.trim() == header).map(|i| i + 1)
}

/// Sets a dotted key in a TOML table; the value is read as a TOML value
/// and falls back to a plain string.
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not of the form key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key `{key}` is malformed")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur =
            entry.as_table_mut().ok_or_else(|| Error::Config(format!("override key `{key}`: `{p}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

impl RunConfig {
    /// Parses `src`, applies the overrides in order and validates.
    pub fn from_str_with(src: &str, overrides: &[String]) -> Result<Self> {
        // parse the original text first so syntax errors carry its line numbers
        toml::from_str::<RawConfig>(src).map_err(|e| Error::Config(e.to_string()))?;
        let mut table: toml::Table = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let effective = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
        let raw: RawConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("after overrides: {e}")))?;
        Self::validate(raw, src, effective)
    }

    fn validate(raw: RawConfig, src: &str, effective: String) -> Result<Self> {
        let alpha = raw.alpha.unwrap_or(2.0);
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(config_err("alpha", format!("{alpha} must lie in (0, 2]")));
        }
        let domain = match raw.domain {
            Some(d) => IntervalDomain::new(d.a, d.b).map_err(|e| config_err("domain", e))?,
            None => IntervalDomain::new(0.0, PI)?,
        };
        let measure = parse_measure(raw.measure, src)?;

        let basis = {
            let b = raw.basis.unwrap_or(RawBasis { kind: None, m: None, n: None });
            let kind = match b.kind.as_deref() {
                None if alpha == 2.0 => BasisChoice::Exact,
                None => BasisChoice::Discretized,
                Some("exact") => BasisChoice::Exact,
                Some("discretized") => BasisChoice::Discretized,
                Some(other) => {
                    return Err(config_err("basis.kind", format!("unknown kind `{other}` (exact | discretized)")))
                }
            };
            if kind == BasisChoice::Exact && alpha != 2.0 {
                return Err(config_err("basis.kind", format!("exact basis requires alpha = 2, got {alpha}")));
            }
            let m = b.m.unwrap_or(if kind == BasisChoice::Exact { 2047 } else { 512 });
            let n = b.n.unwrap_or(if kind == BasisChoice::Exact { 64 } else { 64.min(m / 8) });
            if kind == BasisChoice::Discretized && m < 64 {
                return Err(config_err("basis.m", format!("{m} must be at least 64")));
            }
            if n == 0 || n > m {
                return Err(config_err("basis.n", format!("{n} must lie in 1..={m}")));
            }
            BasisSpec { kind, m, n }
        };

        let datum = match raw.datum {
            None => InitialDatum::Eigenmode(1),
            Some(d) => match d.kind.as_str() {
                "eigenmode" => {
                    let k = d.k.unwrap_or(1);
                    if k == 0 || k > basis.n {
                        return Err(config_err("datum.k", format!("{k} must lie in 1..={}", basis.n)));
                    }
                    InitialDatum::Eigenmode(k)
                }
                "bump" => {
                    let center = d.center.unwrap_or(domain.midpoint());
                    let radius = d.radius.unwrap_or(0.38 * domain.length());
                    if !(radius > 0.0) || center - radius < domain.a() || center + radius > domain.b() {
                        return Err(config_err("datum", "bump support must lie inside the domain"));
                    }
                    InitialDatum::Bump { center, radius }
                }
                "poly-x(pi-x)" => InitialDatum::Quadratic,
                "zero" => InitialDatum::Zero,
                other => {
                    return Err(config_err(
                        "datum.kind",
                        format!("unknown datum `{other}` (eigenmode | bump | poly-x(pi-x) | zero)"),
                    ))
                }
            },
        };

        let grid = raw.grid.unwrap_or(RawGrid { t: None, x: None, lambda: None });
        let times = grid.t.unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
        let xs = grid.x.unwrap_or_else(|| vec![domain.midpoint()]);
        let lambdas = grid.lambda.unwrap_or_else(|| vec![0.5, 1.0, 5.0]);
        if times.is_empty() || times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(config_err("grid.t", "times must be nonempty, finite and nonnegative"));
        }
        if xs.is_empty() || xs.iter().any(|x| !domain.closure_contains(*x)) {
            return Err(config_err("grid.x", format!("points must lie in [{}, {}]", domain.a(), domain.b())));
        }
        if lambdas.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
            return Err(config_err("grid.lambda", "values must be nonnegative"));
        }

        let mc = {
            let m = raw.mc.unwrap_or(RawMc { paths: None, dt: None, delta: None, max_paths: None, threads: None });
            let paths = m.paths.unwrap_or(100_000);
            let spec = McSpec {
                paths,
                dt: m.dt.unwrap_or(1e-3),
                delta: m.delta.unwrap_or(1e-3),
                max_paths: m.max_paths.unwrap_or(4 * paths),
                threads: m.threads,
            };
            if spec.paths < 2 {
                return Err(config_err("mc.paths", "must be at least 2"));
            }
            for (k, v) in [("mc.dt", spec.dt), ("mc.delta", spec.delta)] {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(config_err(k, format!("{v} must be positive")));
                }
            }
            if spec.threads == Some(0) {
                return Err(config_err("mc.threads", "must be positive"));
            }
            spec
        };

        let ctrw = {
            let c = raw.ctrw.unwrap_or(RawCtrw { t: None, dt: None, c: None, runs: None });
            let spec = CtrwSpec {
                t: c.t.unwrap_or(1.0),
                dt: c.dt.unwrap_or(1e-4),
                ladder: c.c.unwrap_or_else(|| vec![1e2, 1e3, 1e4]),
                runs: c.runs.unwrap_or(100_000),
            };
            if !(spec.t > 0.0) {
                return Err(config_err("ctrw.t", "must be positive"));
            }
            if !(spec.dt > 0.0) {
                return Err(config_err("ctrw.dt", "must be positive"));
            }
            if spec.ladder.is_empty() || spec.ladder.iter().any(|c| !(*c > 0.0)) {
                return Err(config_err("ctrw.c", "scales must be positive"));
            }
            spec
        };

        let validate = {
            let v = raw.validate.unwrap_or(RawValidate {
                dt: None,
                horizon: None,
                window: None,
                halvings: None,
                lambda: None,
                decay_t: None,
                initial_t: None,
                eps_rel: None,
            });
            let spec = ValidateSpec {
                dt: v.dt.unwrap_or(1e-3),
                horizon: v.horizon.unwrap_or(2.0),
                window: v.window.unwrap_or(0.1),
                halvings: v.halvings.unwrap_or(2),
                lambdas: v.lambda.unwrap_or_else(|| vec![1.0, 5.0]),
                decay_times: v.decay_t.unwrap_or_else(|| vec![0.1, 0.5, 1.0, 2.0]),
                initial_times: v.initial_t.unwrap_or_else(|| vec![1e-1, 1e-2, 1e-3]),
                eps_rel: v.eps_rel.unwrap_or(1e-6),
            };
            if !(spec.dt > 0.0) || !(spec.horizon > spec.window) || spec.window < 0.0 {
                return Err(config_err("validate", "need dt > 0 and horizon > window >= 0"));
            }
            spec
        };

        Ok(RunConfig {
            seed: raw.seed.unwrap_or(1),
            out: PathBuf::from(raw.out.unwrap_or_else(|| "out".to_string())),
            alpha,
            domain,
            measure,
            datum,
            basis,
            times,
            xs,
            lambdas,
            mc,
            ctrw,
            validate,
            effective,
        })
    }
}

fn parse_measure(raw: Option<RawMeasure>, src: &str) -> Result<MixingMeasure> {
    let at = |key: &str| match section_line(src, "measure") {
        Some(l) => format!("{key}` (section at line {l})"),
        None => format!("{key}`"),
    };
    let m = raw.ok_or_else(|| Error::Config("missing key `measure.type`".to_string()))?;
    let kind = m.kind.ok_or_else(|| Error::Config(format!("missing key `{}", at("measure.type"))))?;
    match kind.as_str() {
        "atoms" => {
            if m.atom.is_empty() {
                return Err(Error::Config(format!(
                    "missing key `{}: at least one [[measure.atom]]",
                    at("measure.atom")
                )));
            }
            let pairs: Vec<(f64, f64)> = m.atom.iter().map(|a| (a.beta, a.c)).collect();
            Ok(FiniteAtoms::from_pairs(&pairs).map_err(|e| config_err("measure.atom", e))?.into())
        }
        "density" => {
            let need = |v: Option<f64>, key: &str| v.ok_or_else(|| Error::Config(format!("missing key `{}", at(key))));
            let lower = need(m.lower, "measure.lower")?;
            let upper = need(m.upper, "measure.upper")?;
            let d = match m.builtin.as_deref() {
                Some("uniform") => ContinuousDensity::uniform(lower, upper, m.value.unwrap_or(1.0)),
                Some("power") => ContinuousDensity::power(
                    lower,
                    upper,
                    need(m.scale, "measure.scale")?,
                    need(m.exponent, "measure.exponent")?,
                ),
                Some(other) => {
                    return Err(config_err("measure.builtin", format!("unknown density `{other}` (uniform | power)")))
                }
                None => return Err(Error::Config(format!("missing key `{}", at("measure.builtin")))),
            }
            .map_err(|e| config_err("measure", e))?;
            Ok(d.into())
        }
        other => Err(config_err("measure.type", format!("unknown type `{other}` (atoms | density)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_parses() {
        let c = RunConfig::from_str_with(DEFAULT_CONFIG, &[]).unwrap();
        assert_eq!(c.alpha, 2.0);
        assert_eq!(c.basis.kind, BasisChoice::Exact);
        assert!(matches!(c.measure, MixingMeasure::Atoms(_)));
    }

    #[test]
    fn missing_type_names_key() {
        let e = RunConfig::from_str_with("[measure]\n[[measure.atom]]\nbeta = 0.5\nc = 1.0\n", &[]).unwrap_err();
        assert!(e.to_string().contains("measure.type"), "{e}");
        let e = RunConfig::from_str_with("alpha = 2.0\n", &[]).unwrap_err();
        assert!(e.to_string().contains("measure.type"), "{e}");
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = RunConfig::from_str_with("alpha = 2.0\nbogus_key = 1\n", &[]).unwrap_err();
        let s = e.to_string();
        assert!(s.contains("bogus_key") && s.contains('2'), "{s}");
    }

    #[test]
    fn overrides_shadow_keys() {
        let c = RunConfig::from_str_with(
            DEFAULT_CONFIG,
            &["mc.paths=1234".to_string(), "alpha=1.5".to_string(), "basis.kind=discretized".to_string()],
        )
        .unwrap();
        assert_eq!(c.mc.paths, 1234);
        assert_eq!(c.alpha, 1.5);
        assert!(c.effective.contains("paths = 1234"));
        let e = RunConfig::from_str_with(DEFAULT_CONFIG, &["alpha=1.5".to_string(), "basis.kind=exact".to_string()]);
        assert!(e.is_err());
        assert!(RunConfig::from_str_with(DEFAULT_CONFIG, &["grid.x=[4.0]".to_string()]).is_err());
    }

    #[test]
    fn density_measure() {
        let src = "[measure]\ntype = \"density\"\nbuiltin = \"uniform\"\nlower = 0.2\nupper = 0.8\n";
        let c = RunConfig::from_str_with(src, &[]).unwrap();
        assert!(matches!(c.measure, MixingMeasure::Density(_)));
        let e = RunConfig::from_str_with("[measure]\ntype = \"density\"\nlower = 0.2\nupper = 0.8\n", &[]).unwrap_err();
        assert!(e.to_string().contains("measure.builtin"));
    }
}
