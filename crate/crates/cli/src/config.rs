use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Torus,
    Monodromy,
    EquivCheck,
    SpectralSet,
    Endpoints,
    PremodularZero,
    Blowup,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// One job. Complex inputs are `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<[f64; 2]>,
    /// `℘(p)`; `p` is recovered by inversion.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wp_p: Option<[f64; 2]>,
    #[serde(rename = "T", skip_serializing_if = "Option::is_none", default)]
    pub t: Option<[f64; 2]>,
    /// Parameter of the even branch.
    #[serde(rename = "A", skip_serializing_if = "Option::is_none", default)]
    pub a: Option<[f64; 2]>,
    #[serde(rename = "Btilde", skip_serializing_if = "Option::is_none", default)]
    pub btilde: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub s: Option<f64>,
    /// Period index, 1 or 2.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub j: Option<u8>,
    /// `[re_min, re_max, im_min, im_max]`
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub window: Option<[f64; 4]>,
    /// Grid nodes per side.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub resolution: Option<usize>,
    /// Local error tolerance of the ODE integrator.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

type Check = Result<(), ConfigError>;

fn field_names(c: &JobConfig) -> Vec<&'static str> {
    let mut v = Vec::new();
    let mut add = |present: bool, name| {
        if present {
            v.push(name);
        }
    };
    add(c.tau.is_some(), "tau");
    add(c.p.is_some(), "p");
    add(c.wp_p.is_some(), "wp_p");
    add(c.t.is_some(), "T");
    add(c.a.is_some(), "A");
    add(c.btilde.is_some(), "Btilde");
    add(c.r.is_some(), "r");
    add(c.s.is_some(), "s");
    add(c.j.is_some(), "j");
    add(c.window.is_some(), "window");
    add(c.resolution.is_some(), "resolution");
    add(c.tol.is_some(), "tol");
    v
}

impl JobConfig {
    /// Field sets `(required, one of, optional)` per command.
    fn schema(&self) -> (&'static [&'static str], &'static [&'static [&'static str]], &'static [&'static str]) {
        match self.command {
            Command::Torus => (&["tau"], &[], &[]),
            Command::Monodromy => {
                if self.btilde.is_some() {
                    (&["tau", "Btilde"], &[], &["tol"])
                } else {
                    (&["tau"], &[&["p", "wp_p"], &["T", "A"]], &["tol"])
                }
            }
            Command::EquivCheck => (&["tau", "T"], &[&["p", "wp_p"]], &["tol"]),
            Command::SpectralSet => (&["tau", "j"], &[&["p", "wp_p"]], &["window", "resolution", "tol"]),
            Command::Endpoints => (&["tau"], &[&["p", "wp_p"]], &[]),
            Command::PremodularZero => (&["r", "s"], &[], &["tau"]),
            Command::Blowup => (&["r", "s"], &[], &["tau", "p", "wp_p"]),
        }
    }

    /// Checks that exactly the fields demanded by the command are present
    /// and that numeric options are admissible.
    pub fn validate(&self) -> Check {
        let (required, groups, optional) = self.schema();
        let present = field_names(self);
        for name in required {
            if !present.contains(name) {
                return Err(ConfigError(format!("`{}` needs field `{name}`", self.command.name())));
            }
        }
        for group in groups {
            let n = group.iter().filter(|g| present.contains(g)).count();
            if n != 1 {
                return Err(ConfigError(format!("`{}` needs exactly one of {group:?}", self.command.name())));
            }
        }
        for name in &present {
            let known = required.contains(name) || optional.contains(name) || groups.iter().any(|g| g.contains(name));
            if !known {
                return Err(ConfigError(format!("field `{name}` is not used by `{}`", self.command.name())));
            }
        }
        if self.p.is_some() && self.wp_p.is_some() {
            return Err(ConfigError("give either `p` or `wp_p`, not both".into()));
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(ConfigError(format!("tolerance must be positive, got {t}")));
            }
        }
        if let Some(j) = self.j {
            if !(1..=2).contains(&j) {
                return Err(ConfigError(format!("j must be 1 or 2, got {j}")));
            }
        }
        if let Some(n) = self.resolution {
            if !(3..=2001).contains(&n) {
                return Err(ConfigError(format!("resolution must lie in 3..=2001, got {n}")));
            }
        }
        if let Some(w) = self.window {
            if !(w[0] < w[1] && w[2] < w[3]) {
                return Err(ConfigError(format!("window {w:?} is empty")));
            }
        }
        if self.format == Format::Csv && self.command != Command::SpectralSet {
            return Err(ConfigError("CSV output is only available for `spectral-set`".into()));
        }
        let finite = [self.tau, self.p, self.wp_p, self.t, self.a, self.btilde]
            .iter()
            .flatten()
            .flatten()
            .chain(self.r.iter())
            .chain(self.s.iter())
            .chain(self.window.iter().flatten())
            .all(|x| x.is_finite());
        if !finite {
            return Err(ConfigError("non-finite numeric input".into()));
        }
        Ok(())
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Torus => "torus",
            Command::Monodromy => "monodromy",
            Command::EquivCheck => "equiv-check",
            Command::SpectralSet => "spectral-set",
            Command::Endpoints => "endpoints",
            Command::PremodularZero => "premodular-zero",
            Command::Blowup => "blowup",
        }
    }
}
