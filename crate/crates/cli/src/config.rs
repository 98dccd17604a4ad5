//! Flat `key = value` configuration. The file is read first, then
//! `OBSTACLE_OUT`, then command-line overrides; later sources win.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use obstacle_core::benchmarks::BenchmarkSpec;
use obstacle_core::experiment::{LoadRule, RunOptions};
use obstacle_core::io::parse_h;
use obstacle_core::majorant::{BetaRule, FluxSystem};

pub const KEYS: &[&str] = &[
    "benchmark",
    "R",
    "f",
    "phi",
    "phimax",
    "rho",
    "levels",
    "out",
    "jobs",
    "dump",
    "omega",
    "psor_tol",
    "max_sweeps",
    "psor_trace",
    "n_iter",
    "beta0",
    "beta_rule",
    "flux_system",
    "cg_tol",
    "load",
];

pub const DEFAULT_OUT: &str = "obstacle_out";

/// Raw key/value pairs, validated against [`KEYS`].
#[derive(Debug, Default, Clone)]
pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !KEYS.contains(&key) {
            bail!("unknown config key `{key}` (expected one of {})", KEYS.join(", "));
        }
        self.0.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn parse_str(text: &str, origin: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{origin}:{}: expected `key = value`", n + 1))?;
            cfg.set(k.trim(), v.trim())
                .with_context(|| format!("{origin}:{}", n + 1))?;
        }
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse_str(&text, &path.display().to_string())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| anyhow!("`{key}` has invalid value `{v}`")))
            .transpose()
    }
}

/// Validated settings of a `run`.
#[derive(Debug, Clone)]
pub struct Settings {
    pub specs: Vec<BenchmarkSpec>,
    pub levels: Vec<f64>,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub dump: bool,
    pub options: RunOptions,
}

/// `"1/2..1/64"` expands to the dyadic sequence; otherwise a comma list.
pub fn parse_levels(s: &str) -> Result<Vec<f64>> {
    let bad = |t: &str| anyhow!("invalid mesh size `{t}`");
    if let Some((a, b)) = s.split_once("..") {
        let (hi, lo) = (parse_h(a).ok_or_else(|| bad(a))?, parse_h(b).ok_or_else(|| bad(b))?);
        if lo > hi {
            bail!("level range `{s}` must go from coarse to fine");
        }
        let mut out = Vec::new();
        let mut h = hi;
        while h >= lo * (1.0 - 1e-12) {
            out.push(h);
            h *= 0.5;
        }
        if (out.last().copied().unwrap_or(hi) - lo).abs() > 1e-12 * lo {
            bail!("level range `{s}` is not a dyadic sequence");
        }
        return Ok(out);
    }
    s.split(',').map(|t| parse_h(t).ok_or_else(|| bad(t))).collect()
}

fn parse_specs(cfg: &RawConfig) -> Result<Vec<BenchmarkSpec>> {
    let list = cfg.get("benchmark").ok_or_else(|| anyhow!("no benchmark given (use --benchmark I|II|III)"))?;
    let f = cfg.num("f")?.unwrap_or(-10.0);
    list.split(',')
        .map(|id| {
            Ok(match id.trim() {
                "I" | "1" => BenchmarkSpec::Square {
                    contact_radius: cfg.num("R")?.unwrap_or(0.7),
                },
                "II" | "2" => BenchmarkSpec::RingConstant {
                    f,
                    phi: cfg.num("phi")?.unwrap_or(-1.0),
                },
                "III" | "3" => BenchmarkSpec::RingSpherical {
                    f,
                    phi_max: cfg.num("phimax")?.unwrap_or(-1.0),
                    rho: cfg.num("rho")?.unwrap_or(1.2),
                },
                other => bail!("unknown benchmark `{other}` (expected I, II or III)"),
            })
        })
        .collect()
}

fn parse_bool(cfg: &RawConfig, key: &str) -> Result<Option<bool>> {
    cfg.get(key)
        .map(|v| match v {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            _ => Err(anyhow!("`{key}` must be true or false, got `{v}`")),
        })
        .transpose()
}

impl Settings {
    pub fn from_raw(cfg: &RawConfig) -> Result<Self> {
        let specs = parse_specs(cfg)?;
        for s in &specs {
            s.exact().with_context(|| format!("benchmark {} parameters", s.id()))?;
        }
        let levels = parse_levels(cfg.get("levels").unwrap_or("1/2..1/64"))?;

        let mut options = RunOptions::default();
        let psor = &mut options.psor;
        psor.omega = cfg.num("omega")?.unwrap_or(psor.omega);
        if !(psor.omega > 0.0 && psor.omega < 2.0) {
            bail!("`omega` must lie in (0, 2), got {}", psor.omega);
        }
        psor.tol = cfg.num("psor_tol")?.unwrap_or(psor.tol);
        psor.max_sweeps = cfg.num("max_sweeps")?.unwrap_or(psor.max_sweeps);
        psor.record_trace = parse_bool(cfg, "psor_trace")?.unwrap_or(false);

        let maj = &mut options.majorant;
        maj.n_iter = cfg.num("n_iter")?.unwrap_or(maj.n_iter);
        maj.beta0 = cfg.num("beta0")?.unwrap_or(maj.beta0);
        if !(maj.beta0 > 0.0) {
            bail!("`beta0` must be positive, got {}", maj.beta0);
        }
        maj.cg.tol = cfg.num("cg_tol")?.unwrap_or(maj.cg.tol);
        maj.beta_rule = match cfg.get("beta_rule").unwrap_or("balanced") {
            "balanced" => BetaRule::Balanced,
            "unweighted" => BetaRule::Unweighted,
            "fixed" => BetaRule::Fixed,
            other => bail!("unknown beta_rule `{other}` (balanced, unweighted, fixed)"),
        };
        maj.flux_system = match cfg.get("flux_system").unwrap_or("weighted") {
            "weighted" => FluxSystem::Weighted,
            "unweighted" => FluxSystem::Unweighted,
            other => bail!("unknown flux_system `{other}` (weighted, unweighted)"),
        };
        options.load = match cfg.get("load").unwrap_or("averaged") {
            "averaged" => LoadRule::Averaged,
            "quadrature" => LoadRule::Quadrature,
            other => bail!("unknown load `{other}` (averaged, quadrature)"),
        };

        let jobs = cfg.num::<usize>("jobs")?;
        if jobs == Some(0) {
            bail!("`jobs` must be at least 1");
        }
        Ok(Self {
            specs,
            levels,
            out: PathBuf::from(cfg.get("out").unwrap_or(DEFAULT_OUT)),
            jobs,
            dump: parse_bool(cfg, "dump")?.unwrap_or(true),
            options,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_range() {
        let l = parse_levels("1/2..1/64").unwrap();
        assert_eq!(l, vec![0.5, 0.25, 0.125, 0.0625, 0.03125, 0.015625]);
        assert_eq!(parse_levels("1/16").unwrap(), vec![0.0625]);
        assert_eq!(parse_levels("1/8, 1/32").unwrap(), vec![0.125, 0.03125]);
        assert!(parse_levels("1/64..1/2").is_err());
        assert!(parse_levels("1/2..1/3").is_err());
        assert!(parse_levels("x").is_err());
    }

    #[test]
    fn file_syntax() {
        let cfg = RawConfig::parse_str("# grid\nbenchmark = II\nf=-10 # load\n\nlevels = 1/4\n", "t").unwrap();
        let s = Settings::from_raw(&cfg).unwrap();
        assert_eq!(s.specs, vec![BenchmarkSpec::RingConstant { f: -10.0, phi: -1.0 }]);
        assert_eq!(s.levels, vec![0.25]);
        assert!(RawConfig::parse_str("colour = red", "t").is_err());
        assert!(RawConfig::parse_str("benchmark II", "t").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let mut cfg = RawConfig::default();
        cfg.set("benchmark", "IV").unwrap();
        assert!(Settings::from_raw(&cfg).is_err());
        cfg.set("benchmark", "II").unwrap();
        cfg.set("omega", "2.5").unwrap();
        assert!(Settings::from_raw(&cfg).is_err());
        cfg.set("omega", "1.2").unwrap();
        cfg.set("beta_rule", "fixed").unwrap();
        let s = Settings::from_raw(&cfg).unwrap();
        assert_eq!(s.options.majorant.beta_rule, BetaRule::Fixed);
        assert_eq!(s.options.psor.omega, 1.2);
    }
}
