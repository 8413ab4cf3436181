use serde::Serialize;

use multislit::capacity::{ProfileOptions, ReparamOptions};
use multislit::evolution::EvolutionOptions;
use multislit::scmap::MapOptions;

use crate::failure::Failure;
use crate::io::FileDigest;

/// Every tolerance and resolution knob a command may use, frozen per run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub map: MapOptions,
    pub evolution: EvolutionOptions,
    pub profile: ProfileOptions,
    pub reparam: ReparamOptions,
}

impl Settings {
    pub fn new(tol_map: Option<f64>, tol_ode: Option<f64>, tol_lap: Option<f64>, depth: Option<usize>) -> Self {
        let mut map = MapOptions::default();
        if let Some(t) = tol_map {
            map.tol_map = t;
        }
        let mut evolution = EvolutionOptions::default();
        if let Some(t) = tol_ode {
            evolution.ode.tol = t;
        }
        if let Some(t) = tol_lap {
            evolution.laplace.tol = t;
        }
        let mut profile = ProfileOptions { map, ..Default::default() };
        if let Some(d) = depth {
            profile.max_depth = d;
            profile.min_depth = profile.min_depth.min(d);
        }
        Self { map, evolution, profile, reparam: ReparamOptions { map, ..Default::default() } }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub cli: &'static str,
    pub core: &'static str,
}

/// Record of one command run: what went in, which knobs were used, what
/// came out.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub versions: Versions,
    pub inputs: Vec<FileDigest>,
    pub settings: Settings,
    pub threads: Option<usize>,
    pub wall_clock_seconds: f64,
    pub status: &'static str,
    pub failure: Option<Failure>,
    /// Non-fatal conditions such as swallowed marked points.
    pub flags: Vec<String>,
    pub summary: serde_json::Value,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn new(command: &str, settings: Settings, threads: Option<usize>) -> Self {
        Self {
            command: command.into(),
            versions: Versions { cli: env!("CARGO_PKG_VERSION"), core: multislit::VERSION },
            inputs: Vec::new(),
            settings,
            threads,
            wall_clock_seconds: 0.0,
            status: "ok",
            failure: None,
            flags: Vec::new(),
            summary: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn fail(&mut self, failure: Failure) {
        self.status = "failed";
        self.failure = Some(failure);
    }
}
