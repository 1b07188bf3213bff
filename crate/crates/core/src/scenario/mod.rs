//! The racing-car case study: scenario files, the step engine, and offset sweeps.
//!
//! A scenario ties a single-car mode system to an environment. `two_car_product`
//! runs two independent cars whose joint weights come from the product partition;
//! `two_car_chicane` adds the wait vertices and the restart timers.

pub mod algorithms;
pub mod two_car;

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{ComplexError, Simplex};
use crate::environment::{EnvironmentError, EnvironmentFile, TrackEnvironment};
use crate::geometry::{breakpoint_grid, GeometryError, PartitionOfUnity};
use crate::modes::{generate_probes, validate_sheaf_laws, LawReport, ModeError, ModeSystem, SystemFile, TransitionOutcome, TransitionReason};
use crate::par::{self, Execution};
use crate::state::{BoxRegion, Interval, State};
use crate::trace::{Event, EventKind, Trace, TraceRow};

pub use algorithms::{make_algorithm, Directive, ModeAlgorithm, StepContext, ALGORITHMS, CU, CURVE_SPEED, STR, STRAIGHT_SPEED};
pub use two_car::{car_coord, chicane_complex, joint_state, ChicaneGeometry, GuardError, TwoCarModel, WaitConfig, WaitCoordinator, W};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("scenario does not parse: {0}")]
    Parse(String),
    #[error("bad scenario: {0}")]
    Config(String),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    Environment(#[from] EnvironmentError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    SingleCar,
    TwoCarProduct,
    TwoCarChicane,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
}

fn default_max_steps() -> u64 {
    1_000_000
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { max_steps: default_max_steps() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default = "default_sweep_n")]
    pub n: usize,
    #[serde(default = "default_sweep_max")]
    pub max_offset_frac: f64,
}

fn default_sweep_n() -> usize {
    11
}
fn default_sweep_max() -> f64 {
    0.1
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { n: default_sweep_n(), max_offset_frac: default_sweep_max() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TwoCarConfig {
    /// Start positions as fractions of `L`.
    #[serde(default)]
    pub offsets_frac: [f64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wait: Option<WaitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

/// On-disk scenario.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub kind: ScenarioKind,
    #[serde(default)]
    pub description: String,
    pub system: SystemFile,
    #[serde(default)]
    pub environment: EnvironmentFile,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_car: Option<TwoCarConfig>,
}

/// A loaded, validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    system: ModeSystem,
    joint: Option<TwoCarModel>,
}

impl Scenario {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Self::new(file)
    }

    pub fn new(file: ScenarioFile) -> Result<Self, ScenarioError> {
        file.environment.validate()?;
        for (mode, m) in &file.system.modes {
            if !ALGORITHMS.contains(&m.algorithm.as_str()) {
                return Err(ScenarioError::Config(format!("mode {mode}: unknown algorithm `{}`", m.algorithm)));
            }
        }
        let system = ModeSystem::from_file(&file.system)?;
        let cars = file.environment.cars;
        let need = if file.kind == ScenarioKind::SingleCar { 1 } else { 2 };
        if cars != need {
            return Err(ScenarioError::Config(format!("{:?} needs {need} car(s), environment has {cars}", file.kind)));
        }
        let joint = match file.kind {
            ScenarioKind::SingleCar => None,
            ScenarioKind::TwoCarProduct => Some(TwoCarModel::product(system.phi())?),
            ScenarioKind::TwoCarChicane => {
                let [lo, hi] = file
                    .environment
                    .chicane
                    .ok_or_else(|| ScenarioError::Config("two_car_chicane needs an environment chicane".into()))?;
                let wait = file.two_car.as_ref().and_then(|t| t.wait.clone()).unwrap_or_default();
                if !(wait.t2_s > 0.0 && wait.t2_s < wait.t1_s) {
                    return Err(ScenarioError::Config(format!("timers must satisfy 0 < t2 < t1, got t1={} t2={}", wait.t1_s, wait.t2_s)));
                }
                let l = file.environment.length_km;
                let geo = ChicaneGeometry { lo: lo * l, hi: hi * l, d: wait.d_frac * l };
                if !(geo.d > 0.0 && geo.lo - 2.0 * geo.d >= 0.0) {
                    return Err(ScenarioError::Config(format!("wait depth d={} km does not fit before the chicane", geo.d)));
                }
                Some(TwoCarModel::chicane(system.phi(), geo)?)
            }
        };
        Ok(Self { file, system, joint })
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn kind(&self) -> ScenarioKind {
        self.file.kind
    }

    pub fn system(&self) -> &ModeSystem {
        &self.system
    }

    pub fn joint(&self) -> Option<&TwoCarModel> {
        self.joint.as_ref()
    }

    pub fn length(&self) -> f64 {
        self.file.environment.length_km
    }

    /// Checks the partition axioms on a breakpoint grid: every `φ_X` over `S_X`, and
    /// the joint partition over the square of track positions. Returns the number of
    /// states checked.
    pub fn audit(&self) -> Result<usize, ScenarioError> {
        let mut n = self.system.audit_partition()?;
        if let Some(j) = &self.joint {
            let l = self.length();
            let region = BoxRegion::new().with("x1", Interval::closed(0.0, l)).with("x2", Interval::closed(0.0, l));
            let grid = breakpoint_grid(&region, &j.psi);
            for s in &grid {
                j.psi.evaluate(s).map_err(|error| ModeError::Axiom { state: s.clone(), error })?;
            }
            n += grid.len();
        }
        Ok(n)
    }

    /// Runs the sheaf-law validator on `probes` seeded random states.
    pub fn check(&self, probes: usize, seed: u64) -> Result<LawReport, ScenarioError> {
        let states = generate_probes(&self.system, probes, seed)?;
        Ok(validate_sheaf_laws(&self.system, &states)?)
    }

    pub fn default_offsets_km(&self) -> [f64; 2] {
        let f = self.file.two_car.as_ref().map(|t| t.offsets_frac).unwrap_or_default();
        f.map(|x| x * self.length())
    }

    pub fn run(&self, opts: &RunOptions) -> Result<RunResult, ScenarioError> {
        Engine::new(self, opts)?.run()
    }

    /// Offsets of an `n × n` sweep over `[0, max_frac·L]²`, row-major in car 1's offset.
    pub fn sweep_offsets(&self, n: usize, max_frac: f64) -> Vec<[f64; 2]> {
        let max = max_frac * self.length();
        let at = |k: usize| if n > 1 { max * k as f64 / (n - 1) as f64 } else { 0.0 };
        (0..n).flat_map(|i| (0..n).map(move |j| [at(i), at(j)])).collect()
    }

    /// Runs every offset pair of an `n × n` sweep, without traces.
    pub fn sweep(&self, n: usize, max_frac: f64, base: &RunOptions, exec: Execution) -> Vec<SweepRun> {
        let offsets = self.sweep_offsets(n, max_frac);
        par::map(&offsets, exec, |&o| {
            let opts = RunOptions { offsets_km: Some(o), record: false, ..base.clone() };
            SweepRun { offsets_km: o, result: self.run(&opts).map(|r| r.summary).map_err(|e| e.to_string()) }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub dt: Option<f64>,
    /// Overrides the environment's noise seed.
    pub seed: Option<u64>,
    pub offsets_km: Option<[f64; 2]>,
    pub max_steps: Option<u64>,
    /// Keep a trace row per step.
    pub record: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { dt: None, seed: None, offsets_km: None, max_steps: None, record: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    Finished,
    ShieldBreach { step: u64, x1: f64, x2: f64 },
    /// A car's transfer was refused and it stopped.
    Halted { step: u64, car: usize, outcome: TransitionOutcome },
    StepLimit { steps: u64 },
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunOutcome::Finished => 0,
            RunOutcome::ShieldBreach { .. } => 2,
            RunOutcome::Halted { .. } => 3,
            RunOutcome::StepLimit { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransferRecord {
    pub step: u64,
    pub from: Simplex,
    pub to: Simplex,
    /// Position in the transferred state.
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarSummary {
    pub modes: Vec<Simplex>,
    pub transfers: Vec<TransferRecord>,
    pub final_x: f64,
    pub final_v: f64,
    pub finished: bool,
}

/// A stretch of steps during which both wait flags were set, and the step at which
/// each car was next released.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaitEpisode {
    pub start: u64,
    pub resumed: [Option<u64>; 2],
}

impl WaitEpisode {
    pub fn car2_first(&self) -> bool {
        matches!(self.resumed, [Some(a), Some(b)] if b < a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub outcome: RunOutcome,
    pub steps: u64,
    pub time_s: f64,
    pub cars: Vec<CarSummary>,
    /// Wait labels seen, from `(W,Str)`, `(Str,W)`, `(W,W)`.
    pub wait_visits: BTreeSet<String>,
    pub wait_episodes: Vec<WaitEpisode>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub trace: Option<Trace>,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub offsets_km: [f64; 2],
    pub result: Result<RunSummary, String>,
}

struct CarRun {
    car: usize,
    multi: bool,
    mode: Simplex,
    algo: Box<dyn ModeAlgorithm>,
    state: State,
    done: bool,
    summary: CarSummary,
}

impl CarRun {
    fn new(system: &ModeSystem, car: usize, multi: bool) -> Self {
        let mode = system.initial_mode().clone();
        let algo = make_algorithm(&system.package(&mode).expect("initial package").algorithm).expect("algorithm validated at load");
        let summary = CarSummary { modes: vec![mode.clone()], transfers: Vec::new(), final_x: 0.0, final_v: 0.0, finished: false };
        Self { car, multi, mode, algo, state: State::new(), done: false, summary }
    }

    fn event(&self, kind: EventKind) -> Event {
        if self.multi {
            Event::for_car(kind, self.car + 1)
        } else {
            Event::new(kind)
        }
    }

    fn call(&mut self, system: &ModeSystem, env: &mut TrackEnvironment, start: bool) -> Directive {
        let package = system.package(&self.mode).expect("mode has a package");
        let mut cx = StepContext { system, package, state: &mut self.state, env, car: self.car };
        if start {
            self.algo.start(&mut cx)
        } else {
            self.algo.step(&mut cx)
        }
    }

    /// Runs `start` (on entry) or `step`, following granted transfers within the same
    /// engine step. Returns the refused outcome if the car halted.
    fn advance(&mut self, system: &ModeSystem, env: &mut TrackEnvironment, start: bool, events: &mut Vec<Event>) -> Option<TransitionOutcome> {
        let mut d = self.call(system, env, start);
        if start && d == Directive::Stay {
            d = self.call(system, env, false);
        }
        let mut hops = 0;
        loop {
            match d {
                Directive::Stay => return None,
                Directive::Halt(o) => {
                    events.push(self.event(EventKind::TransferNotOK));
                    return Some(o);
                }
                Directive::Transfer(o) => {
                    hops += 1;
                    let (Some(to), Some(state)) = (o.new_mode.clone(), o.new_state.clone()) else {
                        events.push(self.event(EventKind::TransferNotOK));
                        return Some(TransitionOutcome::not_ok(TransitionReason::DomainViolation, "granted transfer without target"));
                    };
                    if hops > system.packages().count() {
                        events.push(self.event(EventKind::TransferNotOK));
                        return Some(TransitionOutcome::not_ok(TransitionReason::DomainViolation, "transfers did not settle within one step"));
                    }
                    log::debug!("car {}: {} -> {} at step {}", self.car + 1, self.mode, to, env.step());
                    self.summary.transfers.push(TransferRecord {
                        step: env.step(),
                        from: self.mode.clone(),
                        to: to.clone(),
                        x: state.get("x").unwrap_or(f64::NAN),
                    });
                    self.summary.modes.push(to.clone());
                    let pkg = system.package(&to).expect("transfer target has a package");
                    self.algo = make_algorithm(&pkg.algorithm).expect("algorithm validated at load");
                    self.mode = to;
                    self.state = state;
                    events.push(self.event(EventKind::TransferOK));
                    d = self.call(system, env, true);
                    if d == Directive::Stay {
                        d = self.call(system, env, false);
                    }
                }
            }
        }
    }
}

const COORDS: [&str; 2] = ["x", "v"];

struct Engine<'a> {
    scenario: &'a Scenario,
    env: TrackEnvironment,
    dt: f64,
    max_steps: u64,
    cars: Vec<CarRun>,
    coordinator: Option<WaitCoordinator>,
    trace: Option<Trace>,
    visits: BTreeSet<String>,
    episodes: Vec<WaitEpisode>,
    both_flagged: bool,
}

impl<'a> Engine<'a> {
    fn new(scenario: &'a Scenario, opts: &RunOptions) -> Result<Self, ScenarioError> {
        let file = &scenario.file;
        let mut envf = file.environment.clone();
        if let Some(dt) = opts.dt {
            envf.dt_s = dt;
        }
        let mut env = TrackEnvironment::from_file(&envf, opts.seed)?;
        let n = envf.cars;
        let multi = n > 1;
        if multi {
            let offsets = opts.offsets_km.unwrap_or_else(|| scenario.default_offsets_km());
            for (car, x) in offsets.iter().enumerate() {
                if !(0.0..envf.length_km).contains(x) {
                    return Err(ScenarioError::Config(format!("start offset {x} km of car {} is off the track", car + 1)));
                }
                env.place(car, *x);
            }
        }
        let coordinator = match (&scenario.joint, file.kind) {
            (Some(_), ScenarioKind::TwoCarChicane) => {
                let wait = file.two_car.as_ref().and_then(|t| t.wait.clone()).unwrap_or_default();
                Some(WaitCoordinator::new(&wait, envf.dt_s))
            }
            _ => None,
        };
        let trace = opts.record.then(|| {
            let coords = if multi {
                (0..n).flat_map(|c| COORDS.map(|k| car_coord(k, c))).collect()
            } else {
                COORDS.map(String::from).to_vec()
            };
            let vertices = match &scenario.joint {
                Some(j) => j.complex.vertices().labels().to_vec(),
                None => scenario.system.complex().vertices().labels().to_vec(),
            };
            Trace::new(coords, vertices)
        });
        Ok(Self {
            scenario,
            env,
            dt: envf.dt_s,
            max_steps: opts.max_steps.unwrap_or(file.run.max_steps),
            cars: (0..n).map(|c| CarRun::new(&scenario.system, c, multi)).collect(),
            coordinator,
            trace,
            visits: BTreeSet::new(),
            episodes: Vec::new(),
            both_flagged: false,
        })
    }

    fn partition(&self) -> &PartitionOfUnity {
        match &self.scenario.joint {
            Some(j) => &j.psi,
            None => self.scenario.system.phi(),
        }
    }

    fn joint(&self) -> State {
        if self.cars.len() == 1 {
            self.cars[0].state.clone()
        } else {
            joint_state(&self.cars.iter().map(|c| c.state.clone()).collect::<Vec<_>>())
        }
    }

    fn run(mut self) -> Result<RunResult, ScenarioError> {
        let system = &self.scenario.system;
        let mut first = true;
        let outcome = loop {
            let step = self.env.step();
            let mut events = Vec::new();
            let mut halted = None;
            for car in &mut self.cars {
                if car.done {
                    continue;
                }
                if let Some(o) = car.advance(system, &mut self.env, first, &mut events) {
                    halted.get_or_insert((car.car, o));
                }
            }
            first = false;

            let joint = self.joint();
            let mut breach = None;
            let mut flags = [false, false];
            if let (Some(model), Some(coord)) = (&self.scenario.joint, &mut self.coordinator) {
                let geo = model.chicane.expect("chicane model");
                let (x1, x2) = (self.env.position(0), self.env.position(1));
                match model.chicane_guard(&joint) {
                    Ok(f) => flags = f,
                    Err(GuardError::ShieldBreach { x1, x2 }) => breach = Some((x1, x2)),
                    Err(e) => return Err(ScenarioError::Config(e.to_string())),
                }
                if geo.in_chicane(x1) && geo.in_chicane(x2) {
                    breach.get_or_insert((x1, x2));
                }
                let (blocked, ev) = coord.update(flags);
                for (car, b) in blocked.iter().enumerate() {
                    self.env.set_waiting(car, *b);
                }
                events.extend(ev.iter().copied());
                self.note_waits(step, flags, &ev);
            }
            if breach.is_some() {
                events.push(Event::new(EventKind::ShieldBreach));
            }
            for car in &mut self.cars {
                if !car.done && self.env.finished(car.car) {
                    car.done = true;
                    events.push(car.event(EventKind::Finished));
                }
            }
            self.record(step, &joint, flags, events)?;

            if let Some((car, outcome)) = halted {
                break RunOutcome::Halted { step, car: car + 1, outcome };
            }
            if let Some((x1, x2)) = breach {
                break RunOutcome::ShieldBreach { step, x1, x2 };
            }
            if self.cars.iter().all(|c| c.done) {
                break RunOutcome::Finished;
            }
            if step + 1 >= self.max_steps {
                break RunOutcome::StepLimit { steps: step + 1 };
            }
            self.env.advance(self.dt);
        };
        if let RunOutcome::Halted { outcome: o, car, .. } = &outcome {
            log::warn!("car {car} halted: {}", o.detail.as_deref().unwrap_or("transfer refused"));
        }
        let cars = self
            .cars
            .iter()
            .map(|c| CarSummary {
                final_x: self.env.position(c.car),
                final_v: self.env.speed(c.car),
                finished: self.env.finished(c.car),
                ..c.summary.clone()
            })
            .collect();
        let summary = RunSummary {
            outcome,
            steps: self.env.step() + 1,
            time_s: self.env.clock(),
            cars,
            wait_visits: self.visits,
            wait_episodes: self.episodes,
        };
        Ok(RunResult { summary, trace: self.trace })
    }

    fn note_waits(&mut self, step: u64, flags: [bool; 2], events: &[Event]) {
        let label = match flags {
            [true, false] => Some(two_car::pair_wait(0)),
            [false, true] => Some(two_car::pair_wait(1)),
            [true, true] => Some(crate::complex::pair_label(W, W)),
            _ => None,
        };
        if let Some(l) = label {
            self.visits.insert(l);
        }
        let both = flags[0] && flags[1];
        if both && !self.both_flagged {
            self.episodes.push(WaitEpisode { start: step, resumed: [None, None] });
        }
        self.both_flagged = both;
        if let Some(ep) = self.episodes.last_mut() {
            for e in events {
                if let (EventKind::Resume, Some(car)) = (e.kind, e.car) {
                    ep.resumed[car - 1].get_or_insert(step);
                }
            }
        }
    }

    fn record(&mut self, step: u64, joint: &State, flags: [bool; 2], events: Vec<Event>) -> Result<(), ScenarioError> {
        if self.trace.is_none() {
            return Ok(());
        }
        let p = self.partition().evaluate(joint).map_err(|error| ModeError::Axiom { state: joint.clone(), error })?;
        let active = match &self.scenario.joint {
            Some(j) => j.joint_mode(&self.cars.iter().map(|c| c.mode.clone()).collect::<Vec<_>>(), flags),
            None => self.cars[0].mode.clone(),
        };
        let trace = self.trace.as_mut().expect("recording");
        let coords = trace.coords().iter().map(|c| joint.get(c).unwrap_or(f64::NAN)).collect();
        trace.push(TraceRow {
            step,
            time_s: self.env.clock(),
            active_mode: active.key(),
            coords,
            weights: p.weights().to_vec(),
            events,
        });
        Ok(())
    }
}
