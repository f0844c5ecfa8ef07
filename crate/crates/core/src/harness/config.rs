//! Flat `key = value` run configuration. `#` starts a comment; blank lines
//! are ignored; unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::initdata::{self, EllipticConvention, Profile};
use crate::thermo::ScalingParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Well,
    Ill,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub a: f64,
    pub gamma: f64,
    pub rho_bar: f64,
    pub epsilons: Vec<f64>,
    pub t_end: f64,
    pub cfl: f64,
    pub family: Family,
    pub profile: Profile,
    pub amplitude: f64,
    /// Regularization scale for ill-prepared data; `None` selects the grid default.
    pub delta: Option<f64>,
    pub convention: EllipticConvention,
    pub hyperviscosity: bool,
    pub symmetry: bool,
    pub out: PathBuf,
    pub sample_dt: f64,
    pub seed: u64,
    pub snapshots: bool,
    /// Side of the central window for acoustic decay profiles.
    pub decay_window: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nx: 64,
            ny: 64,
            nz: 1,
            lx: 2.0 * PI,
            ly: 2.0 * PI,
            // p'(rho_bar) = rho_bar = 1
            a: 0.5,
            gamma: 2.0,
            rho_bar: 1.0,
            epsilons: vec![0.4, 0.2, 0.1, 0.05],
            t_end: 0.5,
            cfl: 0.5,
            family: Family::Well,
            profile: Profile::TwoMode,
            amplitude: 0.05,
            delta: None,
            convention: EllipticConvention::BalanceConsistent,
            hyperviscosity: false,
            symmetry: true,
            out: PathBuf::from("out"),
            sample_dt: 0.05,
            seed: 0,
            snapshots: false,
            decay_window: 1.0,
        }
    }
}

fn cfg_err(line: usize, msg: impl std::fmt::Display) -> LabError {
    LabError::Config(format!("line {line}: {msg}"))
}

/// Parse a float, accepting `pi`, `2pi`, `2*pi` and `16 pi`.
fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    if let Some(head) = t.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let mult = if head.is_empty() {
            1.0
        } else {
            head.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))?
        };
        return Ok(mult * PI);
    }
    t.parse::<f64>().map_err(|e| format!("{s:?}: {e}"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => Err(format!("{other:?} is not a boolean")),
    }
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.trim().parse::<T>().map_err(|e| format!("{s:?}: {e}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = n + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| cfg_err(line, format!("expected `key = value`, got {content:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let e = |m: String| cfg_err(line, format!("{key}: {m}"));
            match key {
                "nx" => cfg.nx = parse_int(value).map_err(e)?,
                "ny" => cfg.ny = parse_int(value).map_err(e)?,
                "nz" => cfg.nz = parse_int(value).map_err(e)?,
                "lx" => cfg.lx = parse_f64(value).map_err(e)?,
                "ly" => cfg.ly = parse_f64(value).map_err(e)?,
                "a" => cfg.a = parse_f64(value).map_err(e)?,
                "gamma" => cfg.gamma = parse_f64(value).map_err(e)?,
                "rho_bar" => cfg.rho_bar = parse_f64(value).map_err(e)?,
                "epsilons" | "epsilon" => {
                    cfg.epsilons = value
                        .split(',')
                        .map(parse_f64)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(e)?
                }
                "t_end" => cfg.t_end = parse_f64(value).map_err(e)?,
                "cfl" => cfg.cfl = parse_f64(value).map_err(e)?,
                "family" => {
                    cfg.family = match value {
                        "well" => Family::Well,
                        "ill" => Family::Ill,
                        other => return Err(e(format!("unknown family {other:?} (well | ill)"))),
                    }
                }
                "profile" => {
                    cfg.profile = match value {
                        "two_mode" => Profile::TwoMode,
                        "random" => Profile::Random,
                        other => return Err(e(format!("unknown profile {other:?} (two_mode | random)"))),
                    }
                }
                "amplitude" => cfg.amplitude = parse_f64(value).map_err(e)?,
                "delta" => {
                    cfg.delta = if value == "auto" {
                        None
                    } else {
                        Some(parse_f64(value).map_err(e)?)
                    }
                }
                "convention" => {
                    cfg.convention = match value {
                        "balance_consistent" => EllipticConvention::BalanceConsistent,
                        "as_printed" => EllipticConvention::AsPrinted,
                        other => {
                            return Err(e(format!(
                                "unknown convention {other:?} (balance_consistent | as_printed)"
                            )))
                        }
                    }
                }
                "hyperviscosity" => cfg.hyperviscosity = parse_bool(value).map_err(e)?,
                "symmetry" => cfg.symmetry = parse_bool(value).map_err(e)?,
                "out" => cfg.out = PathBuf::from(value),
                "sample_dt" => cfg.sample_dt = parse_f64(value).map_err(e)?,
                "seed" => cfg.seed = parse_int(value).map_err(e)?,
                "snapshots" => cfg.snapshots = parse_bool(value).map_err(e)?,
                "decay_window" => cfg.decay_window = parse_f64(value).map_err(e)?,
                other => return Err(cfg_err(line, format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LabError::Config(m));
        if self.epsilons.is_empty() {
            return bad("epsilon list is empty".into());
        }
        if self.epsilons.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return bad("every epsilon must be > 0".into());
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return bad("epsilon list must be strictly decreasing".into());
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be > 0".into());
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return bad("cfl must lie in (0, 1]".into());
        }
        if !(self.sample_dt >= 0.0) {
            return bad("sample_dt must be >= 0".into());
        }
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return bad("amplitude must be >= 0".into());
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return bad("delta must be > 0".into());
            }
        }
        if !(self.decay_window > 0.0) {
            return bad("decay_window must be > 0".into());
        }
        self.grid().map_err(|e| LabError::Config(e.to_string()))?;
        self.params(self.epsilons[0])
            .map_err(|e| LabError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.nx, self.ny, self.nz, self.lx, self.ly)
    }

    pub fn params(&self, epsilon: f64) -> Result<ScalingParams> {
        ScalingParams::new(epsilon, self.a, self.gamma, self.rho_bar)
    }

    pub fn delta_for(&self, grid: &Grid) -> f64 {
        self.delta.unwrap_or_else(|| initdata::default_delta(grid))
    }

    /// Same configuration restricted to one epsilon.
    pub fn single(&self, epsilon: f64) -> RunConfig {
        RunConfig {
            epsilons: vec![epsilon],
            ..self.clone()
        }
    }

    /// Render back to the key-value format.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let eps: Vec<String> = self.epsilons.iter().map(|e| format!("{e}")).collect();
        let _ = writeln!(s, "nx = {}\nny = {}\nnz = {}", self.nx, self.ny, self.nz);
        let _ = writeln!(s, "lx = {:?}\nly = {:?}", self.lx, self.ly);
        let _ = writeln!(s, "a = {:?}\ngamma = {:?}\nrho_bar = {:?}", self.a, self.gamma, self.rho_bar);
        let _ = writeln!(s, "epsilons = {}", eps.join(", "));
        let _ = writeln!(s, "t_end = {:?}\ncfl = {:?}", self.t_end, self.cfl);
        let family = match self.family {
            Family::Well => "well",
            Family::Ill => "ill",
        };
        let profile = match self.profile {
            Profile::TwoMode => "two_mode",
            Profile::Random => "random",
        };
        let convention = match self.convention {
            EllipticConvention::BalanceConsistent => "balance_consistent",
            EllipticConvention::AsPrinted => "as_printed",
        };
        let _ = writeln!(s, "family = {family}\nprofile = {profile}\namplitude = {:?}", self.amplitude);
        match self.delta {
            Some(d) => {
                let _ = writeln!(s, "delta = {d:?}");
            }
            None => {
                let _ = writeln!(s, "delta = auto");
            }
        }
        let _ = writeln!(s, "convention = {convention}");
        let _ = writeln!(s, "hyperviscosity = {}\nsymmetry = {}", self.hyperviscosity, self.symmetry);
        let _ = writeln!(s, "out = {}", self.out.display());
        let _ = writeln!(s, "sample_dt = {:?}\nseed = {}", self.sample_dt, self.seed);
        let _ = writeln!(s, "snapshots = {}\ndecay_window = {:?}", self.snapshots, self.decay_window);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_file() {
        let text = "\
# ill-prepared sweep
nx = 32
ny = 32   # square
nz = 4
lx = 2pi
ly = 2*pi
epsilons = 0.4, 0.2, 0.1
family = ill
delta = 0.5
hyperviscosity = yes
seed = 42
";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!((c.nx, c.ny, c.nz), (32, 32, 4));
        assert!((c.lx - 2.0 * PI).abs() < 1e-15 && (c.ly - 2.0 * PI).abs() < 1e-15);
        assert_eq!(c.epsilons, vec![0.4, 0.2, 0.1]);
        assert_eq!(c.family, Family::Ill);
        assert_eq!(c.delta, Some(0.5));
        assert!(c.hyperviscosity);
        assert_eq!(c.seed, 42);
    }

    #[test]
    fn round_trips_through_text() {
        let c = RunConfig {
            family: Family::Ill,
            delta: Some(0.3),
            profile: Profile::Random,
            ..RunConfig::default()
        };
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "epsilons = 0.1, 0.2",
            "epsilons = 0.2, 0.2",
            "epsilons = 0.2, -0.1",
            "t_end = 0",
            "cfl = 0",
            "cfl = 1.5",
            "nx = 48",
            "bogus = 1",
            "nx 64",
            "family = medium",
            "gamma = 1",
        ] {
            assert!(
                matches!(RunConfig::parse(text), Err(LabError::Config(_))),
                "{text}"
            );
        }
    }
}
