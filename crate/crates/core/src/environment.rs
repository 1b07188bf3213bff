//! The simulated track and the oracles through which mode algorithms touch it.
//!
//! Positions are in km along the track, speeds in km/h, time in seconds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::modes::Check;

pub const MAX_SPEED: f64 = 120.0;
pub const DEFAULT_DT: f64 = 0.01;
pub const DEFAULT_LENGTH: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvironmentError {
    #[error("track length must be positive, got {0}")]
    BadLength(f64),
    #[error("time step must be positive, got {0}")]
    BadStep(f64),
    #[error("need at least one car")]
    NoCars,
    #[error("chicane [{0}, {1}] must satisfy 0 < lo < hi < 1/2 (fractions of L)")]
    BadChicane(f64, f64),
    #[error("fault refers to car {car}, but there are {cars} cars")]
    BadFaultCar { car: usize, cars: usize },
    #[error("unknown oracle `{0}` in fault schedule")]
    UnknownOracle(String),
    #[error("noise amplitude must be finite and nonnegative, got {0}")]
    BadNoise(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Readings are perturbed by `amplitude_km · U(-1, 1)`.
    #[serde(default)]
    pub amplitude_km: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultSpec {
    pub step: u64,
    pub oracle: String,
    #[serde(default)]
    pub car: usize,
}

/// Environment block of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentFile {
    #[serde(rename = "L_km", default = "default_length")]
    pub length_km: f64,
    #[serde(default = "default_dt")]
    pub dt_s: f64,
    #[serde(default = "one_car")]
    pub cars: usize,
    /// `[lo, hi]` as fractions of `L`.
    #[serde(default)]
    pub chicane: Option<[f64; 2]>,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub faults: Vec<FaultSpec>,
}

fn default_length() -> f64 {
    DEFAULT_LENGTH
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn one_car() -> usize {
    1
}

impl Default for EnvironmentFile {
    fn default() -> Self {
        Self { length_km: DEFAULT_LENGTH, dt_s: DEFAULT_DT, cars: 1, chicane: None, noise: NoiseConfig::default(), faults: Vec::new() }
    }
}

impl EnvironmentFile {
    pub fn validate(&self) -> Result<(), EnvironmentError> {
        if !(self.length_km > 0.0 && self.length_km.is_finite()) {
            return Err(EnvironmentError::BadLength(self.length_km));
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return Err(EnvironmentError::BadStep(self.dt_s));
        }
        if self.cars == 0 {
            return Err(EnvironmentError::NoCars);
        }
        if let Some([lo, hi]) = self.chicane {
            if !(0.0 < lo && lo < hi && hi < 0.5) {
                return Err(EnvironmentError::BadChicane(lo, hi));
            }
        }
        if !(self.noise.amplitude_km >= 0.0 && self.noise.amplitude_km.is_finite()) {
            return Err(EnvironmentError::BadNoise(self.noise.amplitude_km));
        }
        for f in &self.faults {
            if f.oracle != "power" {
                return Err(EnvironmentError::UnknownOracle(f.oracle.clone()));
            }
            if f.car >= self.cars {
                return Err(EnvironmentError::BadFaultCar { car: f.car, cars: self.cars });
            }
        }
        Ok(())
    }
}

/// The track and the cars on it. Cars never move backwards and speeds stay in `[0, 120]`.
#[derive(Debug, Clone)]
pub struct TrackEnvironment {
    length: f64,
    positions: Vec<f64>,
    speeds: Vec<f64>,
    waiting: Vec<bool>,
    clock: f64,
    step: u64,
    chicane: Option<(f64, f64)>,
    noise: f64,
    rng: ChaCha8Rng,
    faults: Vec<FaultSpec>,
}

impl TrackEnvironment {
    pub fn new(length: f64, cars: usize) -> Self {
        Self {
            length,
            positions: vec![0.0; cars],
            speeds: vec![0.0; cars],
            waiting: vec![false; cars],
            clock: 0.0,
            step: 0,
            chicane: None,
            noise: 0.0,
            rng: ChaCha8Rng::seed_from_u64(0),
            faults: Vec::new(),
        }
    }

    /// Builds the environment of a scenario. `seed` overrides the noise seed.
    pub fn from_file(file: &EnvironmentFile, seed: Option<u64>) -> Result<Self, EnvironmentError> {
        file.validate()?;
        let mut env = Self::new(file.length_km, file.cars);
        env.chicane = file.chicane.map(|[lo, hi]| (lo * file.length_km, hi * file.length_km));
        env.noise = file.noise.amplitude_km;
        env.rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(file.noise.seed));
        env.faults = file.faults.clone();
        Ok(env)
    }

    pub fn with_noise(mut self, amplitude_km: f64, seed: u64) -> Self {
        self.noise = amplitude_km;
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self
    }

    pub fn with_fault(mut self, step: u64, car: usize) -> Self {
        self.faults.push(FaultSpec { step, oracle: "power".into(), car });
        self
    }

    pub fn with_chicane(mut self, lo_km: f64, hi_km: f64) -> Self {
        self.chicane = Some((lo_km, hi_km));
        self
    }

    /// Places a car before the run starts.
    pub fn place(&mut self, car: usize, x: f64) {
        self.positions[car] = x.clamp(0.0, self.length);
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cars(&self) -> usize {
        self.positions.len()
    }

    pub fn position(&self, car: usize) -> f64 {
        self.positions[car]
    }

    pub fn speed(&self, car: usize) -> f64 {
        self.speeds[car]
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn chicane(&self) -> Option<(f64, f64)> {
        self.chicane
    }

    pub fn is_waiting(&self, car: usize) -> bool {
        self.waiting[car]
    }

    pub fn set_waiting(&mut self, car: usize, waiting: bool) {
        self.waiting[car] = waiting;
    }

    pub fn finished(&self, car: usize) -> bool {
        self.positions[car] >= self.length
    }

    /// Position measurement. Only the noise generator advances; the track is unchanged.
    pub fn oracle_pos(&mut self, car: usize) -> f64 {
        let x = self.positions[car];
        if self.noise == 0.0 {
            return x;
        }
        let e: f64 = self.rng.gen_range(-1.0..=1.0);
        (x + self.noise * e).clamp(0.0, self.length)
    }

    /// Sets the speed of car `car`. `NotOK` (and no change) for speeds outside
    /// `[0, 120]` or when an actuator fault is scheduled for this step.
    pub fn oracle_power(&mut self, car: usize, v: f64) -> Check {
        let faulted = self.faults.iter().any(|f| f.step == self.step && f.car == car && f.oracle == "power");
        if faulted || !(0.0..=MAX_SPEED).contains(&v) {
            return Check::NotOk;
        }
        self.speeds[car] = v;
        Check::Ok
    }

    /// Moves every free car at its set speed for `dt` seconds, clamped at `L`.
    pub fn advance(&mut self, dt: f64) {
        assert!(dt > 0.0, "time step must be positive");
        for car in 0..self.positions.len() {
            if !self.waiting[car] {
                let x = self.positions[car] + self.speeds[car] * dt / 3600.0;
                self.positions[car] = x.min(self.length);
            }
        }
        self.clock += dt;
        self.step += 1;
    }
}

/// An algebra-level function through which an algorithm reads or drives the world.
/// Repeated calls with the same input may return different values.
pub trait Oracle {
    type Input;
    type Output;
    fn name(&self) -> &'static str;
    fn call(&self, env: &mut TrackEnvironment, input: Self::Input) -> Self::Output;
}

/// `pos : () → km` for one car.
#[derive(Debug, Clone, Copy)]
pub struct PositionOracle {
    pub car: usize,
}

impl Oracle for PositionOracle {
    type Input = ();
    type Output = f64;

    fn name(&self) -> &'static str {
        "pos"
    }

    fn call(&self, env: &mut TrackEnvironment, _: ()) -> f64 {
        env.oracle_pos(self.car)
    }
}

/// `power : km/h → check` for one car.
#[derive(Debug, Clone, Copy)]
pub struct PowerOracle {
    pub car: usize,
}

impl Oracle for PowerOracle {
    type Input = f64;
    type Output = Check;

    fn name(&self) -> &'static str {
        "power"
    }

    fn call(&self, env: &mut TrackEnvironment, v: f64) -> Check {
        env.oracle_power(self.car, v)
    }
}
