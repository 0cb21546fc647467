//! Scenario configuration: flat `key = value` text, one key per line.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Region;
use crate::integrate::IntegrationScheme;

/// Tolerances per check class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Finite scenarios: absolute residual bound.
    pub exact: f64,
    /// Charted scenarios: residual must stay below `slack * reported error`.
    pub slack: f64,
    /// Charted scenarios: largest acceptable reported error.
    pub error_budget: f64,
    pub cocycle: f64,
    pub roundtrip: f64,
    /// Modular certificate at doubled resolution.
    pub modular: f64,
    /// Group axioms and closed-form identities.
    pub axiom: f64,
    /// Coordinate tolerance of the coset action and normal forms.
    pub action: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exact: 1e-12,
            slack: 5.0,
            error_budget: 1e-6,
            cocycle: 1e-9,
            roundtrip: 1e-6,
            modular: 1e-8,
            axiom: 1e-12,
            action: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub group: String,
    pub k: String,
    pub h: String,
    pub scheme: IntegrationScheme,
    /// Random inputs per sampled check.
    pub samples: usize,
    pub seed: u64,
    pub tol: Tolerances,
    pub u_halfwidth: f64,
    pub cover_region: Option<Region>,
    pub cover_grid: usize,
}

const KEYS: &[&str] = &[
    "name",
    "group",
    "K",
    "H",
    "scheme",
    "resolution",
    "samples",
    "seed",
    "tol.exact",
    "tol.slack",
    "tol.error_budget",
    "tol.cocycle",
    "tol.roundtrip",
    "tol.modular",
    "tol.axiom",
    "tol.action",
    "u_halfwidth",
    "cover_region",
    "cover_grid",
];

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

impl ScenarioConfig {
    /// Parse a configuration file's text. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Config(format!("line {}: unknown key {k:?}", lineno + 1)));
            }
            if map.iter().any(|(a, _)| a == k) {
                return Err(Error::Config(format!("line {}: duplicate key {k:?}", lineno + 1)));
            }
            map.push((k.to_string(), v.to_string()));
        }
        let get = |k: &str| map.iter().find(|(a, _)| a == k).map(|(_, v)| v.as_str());
        let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("missing key {k:?}")));

        let mut tol = Tolerances::default();
        for (key, slot) in [
            ("tol.exact", &mut tol.exact),
            ("tol.slack", &mut tol.slack),
            ("tol.error_budget", &mut tol.error_budget),
            ("tol.cocycle", &mut tol.cocycle),
            ("tol.roundtrip", &mut tol.roundtrip),
            ("tol.modular", &mut tol.modular),
            ("tol.axiom", &mut tol.axiom),
            ("tol.action", &mut tol.action),
        ] {
            if let Some(v) = get(key) {
                *slot = number(key, v)?;
                if !(*slot > 0.0) {
                    return Err(Error::Config(format!("{key} must be positive")));
                }
            }
        }

        let seed: u64 = get("seed").map(|v| number("seed", v)).transpose()?.unwrap_or(0);
        let resolution: Option<usize> = get("resolution").map(|v| number("resolution", v)).transpose()?;
        let scheme = match need("scheme")? {
            "exact-sum" => IntegrationScheme::ExactSum,
            "tensor" => IntegrationScheme::tensor(resolution.unwrap_or(64)),
            "monte-carlo" => IntegrationScheme::monte_carlo(resolution.unwrap_or(100_000), seed),
            other => return Err(Error::Config(format!("unknown scheme {other:?}"))),
        };
        scheme.validate()?;

        let cover_region = get("cover_region")
            .map(|v| Region::parse(v).ok_or_else(|| Error::Config(format!("cover_region: cannot parse {v:?}"))))
            .transpose()?;
        let cfg = Self {
            name: need("name")?.to_string(),
            group: need("group")?.to_string(),
            k: need("K")?.to_string(),
            h: need("H")?.to_string(),
            scheme,
            samples: get("samples").map(|v| number("samples", v)).transpose()?.unwrap_or(10),
            seed,
            tol,
            u_halfwidth: get("u_halfwidth").map(|v| number("u_halfwidth", v)).transpose()?.unwrap_or(0.5),
            cover_region,
            cover_grid: get("cover_grid").map(|v| number("cover_grid", v)).transpose()?.unwrap_or(9),
        };
        if cfg.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if !(cfg.u_halfwidth > 0.0) {
            return Err(Error::Config("u_halfwidth must be positive".into()));
        }
        Ok(cfg)
    }

    /// Override the seed (also reseeds a Monte Carlo scheme).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let IntegrationScheme::MonteCarlo { samples, .. } = self.scheme {
            self.scheme = IntegrationScheme::monte_carlo(samples, seed);
        }
        self
    }

    /// Override the resolution (tensor points per axis or Monte Carlo samples).
    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        self.scheme = match self.scheme {
            IntegrationScheme::ExactSum => IntegrationScheme::ExactSum,
            IntegrationScheme::Tensor { .. } => IntegrationScheme::tensor(resolution),
            IntegrationScheme::MonteCarlo { seed, .. } => IntegrationScheme::monte_carlo(resolution, seed),
        };
        self.scheme.validate()?;
        Ok(self)
    }

    /// Echo of the configuration for report headers (deterministic order).
    pub fn echo(&self) -> Vec<(String, String)> {
        let t = &self.tol;
        let mut out = vec![
            ("name".into(), self.name.clone()),
            ("group".into(), self.group.clone()),
            ("K".into(), self.k.clone()),
            ("H".into(), self.h.clone()),
            ("scheme".into(), self.scheme.describe()),
            ("samples".into(), self.samples.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "tol".into(),
                format!(
                    "exact={:e} slack={} error_budget={:e} cocycle={:e} roundtrip={:e} modular={:e} axiom={:e} action={:e}",
                    t.exact, t.slack, t.error_budget, t.cocycle, t.roundtrip, t.modular, t.axiom, t.action
                ),
            ),
            ("u_halfwidth".into(), self.u_halfwidth.to_string()),
        ];
        if let Some(r) = &self.cover_region {
            let axes: Vec<String> = (0..r.dim).map(|i| format!("{},{}", r.lo[i], r.hi[i])).collect();
            out.push(("cover_region".into(), axes.join(";")));
        }
        out.push(("cover_grid".into(), self.cover_grid.to_string()));
        out
    }
}
