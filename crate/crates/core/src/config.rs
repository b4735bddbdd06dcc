//! Run configuration: sectioned `key = value` text.
//!
//! ```text
//! [system]
//! name = mcsh
//! e = 1.0
//! kappa = 1.0
//! v = 1.0
//!
//! [grid]
//! n = 64
//! box_length = 20.0
//!
//! [integrator]
//! scheme = leapfrog
//! dt = 1e-3
//! t_final = 1.0
//! snapshot_every = 100
//! formulation = raw
//! regauge_every = none
//! support_diameter = none
//!
//! [data]
//! kind = random
//! seed = 42
//! xi0 = 0.5
//! amplitude = 0.5
//!
//! [output]
//! directory = out
//! formats = csv,json
//! snapshots = final
//! ```
//!
//! Every key is required. `[system]` takes `e`, `kappa`, `v` only for
//! `mcsh`. `[data]` takes `seed`, `xi0`, `amplitude` for `random`, `mode`
//! and `amplitude` for `single-mode`, and `path` for `file`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolve::{Formulation, IntegratorConfig, Scheme, System};
use crate::field::SpectralField;
use crate::gauge::{make_admissible_mcsh, make_admissible_mkg, PhysParams};
use crate::grid::Grid;
use crate::mcsh::McshState;
use crate::mkg::MkgState;
use crate::random::SpectrumProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Mkg,
    Mcsh,
}

impl SystemKind {
    pub fn dim(self) -> usize {
        match self {
            SystemKind::Mkg => 3,
            SystemKind::Mcsh => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSpec {
    Random { seed: u64, xi0: f64, amplitude: f64 },
    SingleMode { mode: [i64; 3], amplitude: f64 },
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotPolicy {
    None,
    Rows,
    Final,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub directory: PathBuf,
    pub csv: bool,
    pub json: bool,
    pub snapshots: SnapshotPolicy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemKind,
    pub params: Option<PhysParams>,
    pub grid: Grid,
    pub integrator: IntegratorConfig,
    pub data: DataSpec,
    pub output: OutputSpec,
}

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

struct Sections {
    map: BTreeMap<String, BTreeMap<String, Entry>>,
    header_lines: BTreeMap<String, usize>,
}

const SECTIONS: [&str; 5] = ["system", "grid", "integrator", "data", "output"];

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

impl Sections {
    fn parse(text: &str) -> Result<Self> {
        let mut map: BTreeMap<String, BTreeMap<String, Entry>> = BTreeMap::new();
        let mut header_lines = BTreeMap::new();
        let mut current: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            if let Some(name) = l.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, format!("malformed section header {l:?}")))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(err(line, format!("unknown section [{name}]")));
                }
                if map.contains_key(name) {
                    return Err(err(line, format!("duplicate section [{name}]")));
                }
                map.insert(name.to_string(), BTreeMap::new());
                header_lines.insert(name.to_string(), line);
                current = Some(name.to_string());
                continue;
            }
            let section = current
                .as_ref()
                .ok_or_else(|| err(line, "key outside of any section"))?;
            let (k, v) = l
                .split_once('=')
                .ok_or_else(|| err(line, format!("expected key = value, found {l:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(err(line, "empty key or value"));
            }
            let sec = map.get_mut(section).expect("section exists");
            if sec.contains_key(k) {
                return Err(err(line, format!("duplicate key {k:?} in [{section}]")));
            }
            sec.insert(
                k.to_string(),
                Entry {
                    value: v.to_string(),
                    line,
                    used: false,
                },
            );
        }
        for s in SECTIONS {
            if !map.contains_key(s) {
                return Err(err(text.lines().count(), format!("missing section [{s}]")));
            }
        }
        Ok(Sections { map, header_lines })
    }

    fn raw(&mut self, section: &str, key: &str) -> Result<(String, usize)> {
        let line = self.header_lines[section];
        let e = self
            .map
            .get_mut(section)
            .and_then(|s| s.get_mut(key))
            .ok_or_else(|| err(line, format!("[{section}] lacks key {key:?}")))?;
        e.used = true;
        Ok((e.value.clone(), e.line))
    }

    fn get<T: FromStr>(&mut self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(section, key)?;
        v.parse::<T>()
            .map_err(|e| err(line, format!("bad value {v:?} for {key}: {e}")))
    }

    fn optional<T: FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let (v, line) = self.raw(section, key)?;
        if v == "none" {
            return Ok(None);
        }
        v.parse::<T>()
            .map(Some)
            .map_err(|e| err(line, format!("bad value {v:?} for {key}: {e}")))
    }

    fn finish(&self) -> Result<()> {
        for (section, keys) in &self.map {
            for (k, e) in keys {
                if !e.used {
                    return Err(err(e.line, format!("unexpected key {k:?} in [{section}]")));
                }
            }
        }
        Ok(())
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Sections::parse(text)?;
        let (name, line) = s.raw("system", "name")?;
        let system = match name.as_str() {
            "mkg" => SystemKind::Mkg,
            "mcsh" => SystemKind::Mcsh,
            _ => return Err(err(line, format!("unknown system {name:?} (mkg|mcsh)"))),
        };
        let params = match system {
            SystemKind::Mkg => None,
            SystemKind::Mcsh => {
                let e = s.get("system", "e")?;
                let kappa = s.get("system", "kappa")?;
                let v = s.get("system", "v")?;
                Some(PhysParams::new(e, kappa, v).map_err(|x| err(line, x.to_string()))?)
            }
        };

        let n: usize = s.get("grid", "n")?;
        let box_length: f64 = s.get("grid", "box_length")?;
        let grid = Grid::new(system.dim(), n, box_length)
            .map_err(|x| err(s.header_lines["grid"], x.to_string()))?;

        let integrator = IntegratorConfig {
            scheme: s.get::<Scheme>("integrator", "scheme")?,
            dt: s.get("integrator", "dt")?,
            t_final: s.get("integrator", "t_final")?,
            snapshot_every: s.get("integrator", "snapshot_every")?,
            formulation: s.get::<Formulation>("integrator", "formulation")?,
            regauge_every: s.optional("integrator", "regauge_every")?,
            support_diameter: s.optional("integrator", "support_diameter")?,
        };
        integrator
            .validate(&grid)
            .map_err(|x| err(s.header_lines["integrator"], x.to_string()))?;

        let (kind, kline) = s.raw("data", "kind")?;
        let data = match kind.as_str() {
            "random" => DataSpec::Random {
                seed: s.get("data", "seed")?,
                xi0: s.get("data", "xi0")?,
                amplitude: s.get("data", "amplitude")?,
            },
            "single-mode" => {
                let (m, mline) = s.raw("data", "mode")?;
                let parts: Vec<i64> = m
                    .split(',')
                    .map(|p| p.trim().parse::<i64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| err(mline, format!("bad mode {m:?}")))?;
                if parts.len() != system.dim() {
                    return Err(err(mline, format!("mode needs {} integers", system.dim())));
                }
                let mut mode = [0i64; 3];
                mode[..parts.len()].copy_from_slice(&parts);
                DataSpec::SingleMode {
                    mode,
                    amplitude: s.get("data", "amplitude")?,
                }
            }
            "file" => DataSpec::File {
                path: PathBuf::from(s.raw("data", "path")?.0),
            },
            _ => return Err(err(kline, format!("unknown data kind {kind:?} (random|single-mode|file)"))),
        };

        let directory = PathBuf::from(s.raw("output", "directory")?.0);
        let (formats, fline) = s.raw("output", "formats")?;
        let (mut csv, mut json) = (false, false);
        for f in formats.split(',').map(str::trim) {
            match f {
                "csv" => csv = true,
                "json" => json = true,
                _ => return Err(err(fline, format!("unknown format {f:?} (csv|json)"))),
            }
        }
        let (snap, sline) = s.raw("output", "snapshots")?;
        let snapshots = match snap.as_str() {
            "none" => SnapshotPolicy::None,
            "rows" => SnapshotPolicy::Rows,
            "final" => SnapshotPolicy::Final,
            _ => return Err(err(sline, format!("unknown snapshot policy {snap:?} (none|rows|final)"))),
        };
        s.finish()?;
        Ok(RunConfig {
            system,
            params,
            grid,
            integrator,
            data,
            output: OutputSpec {
                directory,
                csv,
                json,
                snapshots,
            },
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| err(0, format!("cannot read {}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Builds the initial state described by `[data]`.
    pub fn initial_state(&self) -> Result<System> {
        let g = self.grid;
        Ok(match (&self.data, self.system) {
            (DataSpec::Random { seed, xi0, amplitude }, SystemKind::Mkg) => {
                System::Mkg(make_admissible_mkg(g, *seed, &SpectrumProfile::new(*xi0), *amplitude))
            }
            (DataSpec::Random { seed, xi0, amplitude }, SystemKind::Mcsh) => {
                let p = self.params.expect("mcsh has parameters");
                System::Mcsh(make_admissible_mcsh(g, *seed, &SpectrumProfile::new(*xi0), *amplitude, &p), p)
            }
            (DataSpec::SingleMode { mode, amplitude }, kind) => {
                // A charged plane wave at rest in phi_t satisfies the Gauss law
                // with every other field zero.
                let phi = SpectralField::plane_wave(g, *mode, Complex64::new(*amplitude, 0.0))?;
                match kind {
                    SystemKind::Mkg => {
                        let mut s = MkgState::zeros(g)?;
                        s.phi = phi;
                        System::Mkg(s)
                    }
                    SystemKind::Mcsh => {
                        let mut s = McshState::zeros(g)?;
                        s.phi = phi;
                        System::Mcsh(s, self.params.expect("mcsh has parameters"))
                    }
                }
            }
            (DataSpec::File { path }, SystemKind::Mkg) => System::Mkg(MkgState::load(path)?),
            (DataSpec::File { path }, SystemKind::Mcsh) => {
                System::Mcsh(McshState::load(path)?, self.params.expect("mcsh has parameters"))
            }
        })
        .and_then(|s: System| {
            if s.grid() != &self.grid {
                return Err(Error::GridMismatch);
            }
            Ok(s)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MKG: &str = "[system]
name = mkg

[grid]
n = 8
box_length = 10.0

[integrator]
scheme = rk4
dt = 0.01
t_final = 0.1
snapshot_every = 2
formulation = decomposed
regauge_every = 5
support_diameter = none

[data]
kind = single-mode
mode = 1,0,-1
amplitude = 0.2

[output]
directory = out
formats = json
snapshots = none
";

    fn line_of(e: Error) -> usize {
        match e {
            Error::Config { line, .. } => line,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn parses_complete_config() {
        let c = RunConfig::parse(MKG).unwrap();
        assert_eq!(c.system, SystemKind::Mkg);
        assert!(c.params.is_none());
        assert_eq!(c.grid.dim(), 3);
        assert_eq!(c.integrator.scheme, Scheme::Rk4);
        assert_eq!(c.integrator.formulation, Formulation::Decomposed);
        assert_eq!(c.integrator.regauge_every, Some(5));
        assert_eq!(c.integrator.support_diameter, None);
        assert_eq!(
            c.data,
            DataSpec::SingleMode {
                mode: [1, 0, -1],
                amplitude: 0.2
            }
        );
        assert!(c.output.json && !c.output.csv);
        let s = c.initial_state().unwrap();
        assert!(s.gauss_residual().l2_norm() < 1e-14);
        assert!((s.phi().l2_norm() - 0.2 * 1000f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        let extra = MKG.replace("n = 8", "n = 8\ncolor = blue");
        assert_eq!(line_of(RunConfig::parse(&extra).unwrap_err()), 6);
        let missing = MKG.replace("dt = 0.01\n", "");
        assert_eq!(line_of(RunConfig::parse(&missing).unwrap_err()), 8);
        let mcsh_key = MKG.replace("name = mkg", "name = mkg\nkappa = 1");
        assert_eq!(line_of(RunConfig::parse(&mcsh_key).unwrap_err()), 3);
        let no_section = MKG.replace("[output]", "");
        assert!(RunConfig::parse(&no_section).is_err());
    }

    #[test]
    fn mcsh_requires_physical_parameters() {
        let text = MKG.replace("name = mkg", "name = mcsh").replace("mode = 1,0,-1", "mode = 1,0");
        assert_eq!(line_of(RunConfig::parse(&text).unwrap_err()), 1);
        let text = text.replace("name = mcsh", "name = mcsh\ne = 1\nkappa = 0.5\nv = 1");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.grid.dim(), 2);
        assert_eq!(c.params.unwrap().kappa, 0.5);
    }

    #[test]
    fn rejects_bad_values() {
        let bad_mode = MKG.replace("mode = 1,0,-1", "mode = 1,0");
        assert_eq!(line_of(RunConfig::parse(&bad_mode).unwrap_err()), 19);
        let cfl = MKG.replace("dt = 0.01", "dt = 1.0").replace("t_final = 0.1", "t_final = 1.0");
        assert_eq!(line_of(RunConfig::parse(&cfl).unwrap_err()), 8);
        let grid = MKG.replace("n = 8", "n = 12");
        assert_eq!(line_of(RunConfig::parse(&grid).unwrap_err()), 4);
        let fmt = MKG.replace("formats = json", "formats = json,xml");
        assert_eq!(line_of(RunConfig::parse(&fmt).unwrap_err()), 24);
    }

    #[test]
    fn comments_are_ignored() {
        let text = MKG.replace("n = 8", "n = 8 # points per axis");
        assert_eq!(RunConfig::parse(&text).unwrap().grid.n(), 8);
    }
}
