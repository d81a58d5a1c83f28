//! Seeded skill micro-benchmarks and long-horizon task benchmarks, with
//! reports shaped like the basic-skill and long-horizon success tables.
//!
//! Every skill trial draws its randomization from a ChaCha8 stream keyed by
//! `(seed, skill, trial)` and never by gravity, so 0g and 1g rows are paired.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cog::{run_episode, CoGNode, CollaborationGraph, EpisodeConfig, MessageLog, Roster};
use crate::math::{Aabb, Vec3};
use crate::robots::{DescriptorSpec, RobotKind};
use crate::scenario::{random_direction, Gravity, ScenarioConfig};
use crate::sim::{Articulation, ArticulationKind, Body, Predicate, RegionRef, StationLayout, World, DEFAULT_DT};
use crate::skills::{ParamValue, SkillInvocation, SkillKind, TerminalWindow, TerminationSpec, LID_OPEN_ANGLE};

/// Column order of the basic-skill table.
pub const TABLE_SKILLS: [SkillKind; 7] = [
    SkillKind::PickCube,
    SkillKind::ThrowCube,
    SkillKind::CatchFloatingCube,
    SkillKind::OpenCabinetDoor,
    SkillKind::CloseCabinetDoor,
    SkillKind::OpenBox,
    SkillKind::PickFromBox,
];

pub const GRAVITIES: [Gravity; 2] = [Gravity::ZeroG, Gravity::EarthG];

const BENCH_CONFIG: &str = include_str!("../assets/bench_skills.json");

const TABLE_CENTER: Vec3 = Vec3::new(2.0, 1.5, 0.8);
const TABLE_TOP: f64 = 0.85;
const HOME: Vec3 = Vec3::new(2.0, 1.2, 1.45);
const CUBE_HALF: f64 = 0.03;
const CARGO_HALF: f64 = 0.04;
const NODE: &str = "trial";

/// Randomization ranges for one skill. Unused fields stay at zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillRanges {
    /// Radius of the tabletop disc objects spawn in.
    #[serde(default)]
    pub spawn_radius: f64,
    /// Centre and half extents of a free-space spawn box.
    #[serde(default)]
    pub spawn: Option<Vec3>,
    #[serde(default)]
    pub spawn_box: Vec3,
    /// Object speed range; applied only where the object floats (0g).
    #[serde(default)]
    pub drift: [f64; 2],
    /// Horizontal placement jitter of cabinets and boxes.
    #[serde(default)]
    pub fixture_offset: f64,
    #[serde(default)]
    pub target: Option<Vec3>,
    #[serde(default)]
    pub target_jitter: Vec3,
    #[serde(default)]
    pub target_half_extent: f64,
    #[serde(default)]
    pub initial_angle: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkillBenchConfig {
    /// Per-trial episode budget in ticks.
    pub timeout: u64,
    pub skills: BTreeMap<SkillKind, SkillRanges>,
}

impl SkillBenchConfig {
    /// The shipped ranges.
    pub fn shipped() -> SkillBenchConfig {
        serde_json::from_str(BENCH_CONFIG).expect("shipped bench config parses")
    }

    pub fn from_json(text: &str) -> Result<SkillBenchConfig, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn ranges(&self, skill: SkillKind) -> SkillRanges {
        self.skills.get(&skill).cloned().unwrap_or_default()
    }

    pub fn hash(&self) -> String {
        config_hash(self)
    }
}

fn config_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Everything a trial draws from its random stream.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialDraw {
    /// Object offset from its nominal spawn point.
    pub object: Vec3,
    pub drift: Vec3,
    pub fixture: Vec3,
    pub target: Vec3,
    pub angle: f64,
}

fn skill_stream(skill: SkillKind) -> u64 {
    SkillKind::ALL.iter().position(|s| *s == skill).unwrap_or(0) as u64
}

fn uniform(rng: &mut ChaCha8Rng, [lo, hi]: [f64; 2]) -> f64 {
    if hi > lo {
        rng.gen_range(lo..hi)
    } else {
        lo
    }
}

fn in_box(rng: &mut ChaCha8Rng, half: Vec3) -> Vec3 {
    let mut v = Vec3::ZERO;
    for k in 0..3 {
        let h = half.get(k);
        if h > 0.0 {
            v.set(k, rng.gen_range(-h..h));
        }
    }
    v
}

/// Draws trial `trial` of `seed`. Gravity is deliberately not an input.
pub fn draw_trial(ranges: &SkillRanges, skill: SkillKind, seed: u64, trial: u64) -> TrialDraw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((skill_stream(skill) << 32) | trial);
    let r = ranges.spawn_radius * rng.gen::<f64>().sqrt();
    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut object = Vec3::new(r * theta.cos(), r * theta.sin(), 0.0);
    object += in_box(&mut rng, ranges.spawn_box);
    let speed = uniform(&mut rng, ranges.drift);
    let drift = random_direction(&mut rng) * speed;
    let f = ranges.fixture_offset;
    let fixture = in_box(&mut rng, Vec3::new(f, f, 0.0));
    let target = in_box(&mut rng, ranges.target_jitter);
    let angle = uniform(&mut rng, ranges.initial_angle);
    TrialDraw { object, drift, fixture, target, angle }
}

/// One randomized single-node episode.
#[derive(Debug, Clone)]
pub struct SkillTrial {
    pub world: World,
    pub roster: Roster,
    pub graph: CollaborationGraph,
    pub chain: Vec<SkillInvocation>,
    pub draw: TrialDraw,
}

/// Body id of the benched executor.
pub fn executor_id(kind: RobotKind) -> &'static str {
    match kind {
        RobotKind::FreeFlying => "flyer",
        RobotKind::RailType => "rail_bot",
        RobotKind::Dexterous => "arm",
        RobotKind::Human => "human",
    }
}

pub fn is_supported(skill: SkillKind, kind: RobotKind, gravity: Gravity) -> bool {
    kind.skill_table().contains(&skill) && !(skill.zero_g_only() && gravity == Gravity::EarthG)
}

fn invocation(skill: SkillKind, exec: &str, params: &[(&str, ParamValue)]) -> SkillInvocation {
    SkillInvocation {
        skill,
        executor: exec.into(),
        params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
        termination: TerminationSpec::new(&TerminalWindow::default()),
    }
}

fn id(s: &str) -> ParamValue {
    ParamValue::Id(s.into())
}

/// A dynamic object that rests on its support in 1g and floats with the
/// drawn drift in 0g.
fn loose_object(id: &str, half: f64, mass: f64, p: Vec3, drift: Vec3, gravity: Gravity) -> Body {
    let mut b = Body::cuboid(id, Vec3::splat(half), mass, p).graspable();
    match gravity {
        Gravity::EarthG => b.flags.fixed_to_surface = true,
        Gravity::ZeroG => b.twist.linear = drift,
    }
    b
}

/// Builds the world, roster and one-node graph for a trial.
pub fn build_skill_trial(
    cfg: &SkillBenchConfig,
    skill: SkillKind,
    kind: RobotKind,
    gravity: Gravity,
    seed: u64,
    trial: u64,
) -> Result<SkillTrial, String> {
    let ranges = cfg.ranges(skill);
    let draw = draw_trial(&ranges, skill, seed, trial);
    let layout = StationLayout::default_three_module();
    let mut world = World::new(gravity.vector(), DEFAULT_DT, layout.clone());
    let add = |w: &mut World, b: Body| w.add_body(b).map_err(|e| e.to_string());
    add(&mut world, Body::fixture("table", Vec3::new(0.5, 0.5, 0.05), TABLE_CENTER))?;

    let exec = executor_id(kind);
    let spec = DescriptorSpec {
        id: exec.into(),
        kind,
        skills: None,
        locomotion: None,
        payload_limit: None,
        drag_capability: None,
        workspace: (kind == RobotKind::Dexterous)
            .then(|| vec![Aabb::new(Vec3::new(1.0, 0.3, TABLE_TOP), Vec3::new(3.0, 2.3, 2.1))]),
        gripper_offset: None,
        home: HOME,
        limits: None,
    };
    let desc = spec.resolve(&layout).map_err(|(f, r)| format!("{f}: {r}"))?;

    let cube_at = TABLE_CENTER + Vec3::new(0.0, 0.0, TABLE_TOP - TABLE_CENTER.z + CUBE_HALF) + draw.object;
    let (goal, chain) = match skill {
        SkillKind::PickCube => {
            add(&mut world, loose_object("cube", CUBE_HALF, 0.2, cube_at, draw.drift, gravity))?;
            let goal = Predicate::Held { body: "cube".into(), gripper: exec.into() };
            (goal, vec![invocation(SkillKind::PickCube, exec, &[("object", id("cube"))])])
        }
        SkillKind::ThrowCube => {
            add(&mut world, loose_object("cube", CUBE_HALF, 0.2, cube_at, draw.drift, gravity))?;
            let target = ranges.target.unwrap_or(Vec3::new(2.7, 1.5, 1.05)) + draw.target;
            let region = Aabb::from_center(target, Vec3::splat(ranges.target_half_extent.max(0.01)));
            let goal = Predicate::Within { body: "cube".into(), region: RegionRef::Box(region) };
            let chain = vec![
                invocation(SkillKind::PickCube, exec, &[("object", id("cube"))]),
                invocation(SkillKind::ThrowCube, exec, &[("object", id("cube")), ("target", ParamValue::Vector(target))]),
            ];
            (goal, chain)
        }
        SkillKind::CatchFloatingCube => {
            let p = ranges.spawn.unwrap_or(HOME) + draw.object;
            add(&mut world, Body::cuboid("cube", Vec3::splat(CUBE_HALF), 0.2, p).graspable().with_velocity(draw.drift))?;
            let goal = Predicate::Held { body: "cube".into(), gripper: exec.into() };
            (goal, vec![invocation(SkillKind::CatchFloatingCube, exec, &[("object", id("cube"))])])
        }
        SkillKind::OpenCabinetDoor | SkillKind::CloseCabinetDoor => {
            let base = Vec3::new(2.0 + draw.fixture.x, 0.3, 1.5);
            add(&mut world, Body::fixture("cabinet", Vec3::new(0.3, 0.05, 0.3), base))?;
            world
                .add_articulation(Articulation {
                    id: "door".into(),
                    kind: ArticulationKind::HingeDoor,
                    parent_body: "cabinet".into(),
                    axis: Vec3::Z,
                    anchor: base + Vec3::new(-0.3, 0.1, 0.0),
                    handle_arm: Vec3::new(0.5, 0.0, 0.0),
                    value: draw.angle,
                    limits: [0.0, 1.6],
                    current_rate: 0.0,
                })
                .map_err(|e| e.to_string())?;
            let goal = if skill == SkillKind::OpenCabinetDoor {
                Predicate::DoorOpen { articulation: "door".into(), min_angle: crate::skills::DOOR_OPEN_ANGLE }
            } else {
                Predicate::DoorClosed { articulation: "door".into(), max_angle: crate::skills::DOOR_CLOSED_ANGLE }
            };
            (goal, vec![invocation(skill, exec, &[("articulation", id("door"))])])
        }
        SkillKind::OpenBox | SkillKind::PickFromBox => {
            let half = Vec3::new(0.12, 0.12, 0.08);
            let c = Vec3::new(TABLE_CENTER.x, TABLE_CENTER.y, TABLE_TOP + half.z) + draw.fixture;
            let mut crate_body = Body::fixture("crate", half, c);
            crate_body.collision = crate::sim::CollisionClass::None;
            add(&mut world, crate_body)?;
            let cargo_at = c - Vec3::new(0.0, 0.0, half.z - CARGO_HALF - 0.02);
            add(&mut world, loose_object("cargo", CARGO_HALF, 0.5, cargo_at, draw.drift, gravity))?;
            world
                .add_articulation(Articulation {
                    id: "lid".into(),
                    kind: ArticulationKind::BoxLid,
                    parent_body: "crate".into(),
                    axis: Vec3::new(0.0, -1.0, 0.0),
                    anchor: c + Vec3::new(-half.x, 0.0, half.z),
                    handle_arm: Vec3::new(2.0 * half.x, 0.0, 0.0),
                    value: draw.angle,
                    limits: [0.0, 1.6],
                    current_rate: 0.0,
                })
                .map_err(|e| e.to_string())?;
            if skill == SkillKind::OpenBox {
                let goal = Predicate::DoorOpen { articulation: "lid".into(), min_angle: LID_OPEN_ANGLE };
                (goal, vec![invocation(SkillKind::OpenBox, exec, &[("articulation", id("lid"))])])
            } else {
                let goal = Predicate::Held { body: "cargo".into(), gripper: exec.into() };
                let inv = invocation(SkillKind::PickFromBox, exec, &[("object", id("cargo")), ("lid", id("lid"))]);
                (goal, vec![inv])
            }
        }
        other => return Err(format!("{other} has no bench setup")),
    };
    for b in desc.spawn_bodies(&layout) {
        add(&mut world, b)?;
    }
    let mut roster: Roster = BTreeMap::new();
    roster.insert(exec.to_string(), Arc::new(desc));
    let graph = CollaborationGraph {
        task: format!("{skill} benchmark trial"),
        nodes: vec![CoGNode::new(NODE, skill.name(), goal, exec)],
    };
    Ok(SkillTrial { world, roster, graph, chain, draw })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub success: bool,
    pub ticks: u64,
}

/// Runs one trial; any setup or planning error is a failed trial.
pub fn run_skill_trial(
    cfg: &SkillBenchConfig,
    skill: SkillKind,
    kind: RobotKind,
    gravity: Gravity,
    seed: u64,
    trial: u64,
) -> TrialResult {
    let failed = TrialResult { success: false, ticks: 0 };
    let Ok(t) = build_skill_trial(cfg, skill, kind, gravity, seed, trial) else { return failed };
    let config = EpisodeConfig {
        timeout: cfg.timeout,
        retry_budget: 0,
        chains: BTreeMap::from([(NODE.to_string(), t.chain)]),
        ..EpisodeConfig::default()
    };
    match run_episode(t.world, t.graph, &t.roster, config) {
        Ok(res) => TrialResult { success: res.success, ticks: res.ticks },
        Err(_) => failed,
    }
}

/// One report row: a skill for an executor kind under one gravity, or a task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    pub kind: Option<RobotKind>,
    pub gravity: Gravity,
    pub supported: bool,
    pub trials: u32,
    pub successes: u32,
    /// `successes / trials`; absent for unsupported or empty rows.
    pub rate: Option<f64>,
    pub mean_ticks: Option<f64>,
}

impl BenchRow {
    fn from_results(name: String, kind: Option<RobotKind>, gravity: Gravity, results: &[TrialResult]) -> BenchRow {
        let trials = results.len() as u32;
        let successes = results.iter().filter(|r| r.success).count() as u32;
        let (rate, mean_ticks) = if trials == 0 {
            (None, None)
        } else {
            let ticks: u64 = results.iter().map(|r| r.ticks).sum();
            (Some(successes as f64 / trials as f64), Some(ticks as f64 / trials as f64))
        };
        BenchRow { name, kind, gravity, supported: true, trials, successes, rate, mean_ticks }
    }

    fn unsupported(name: String, kind: Option<RobotKind>, gravity: Gravity) -> BenchRow {
        BenchRow { name, kind, gravity, supported: false, trials: 0, successes: 0, rate: None, mean_ticks: None }
    }

    pub fn failures(&self) -> u32 {
        self.trials - self.successes
    }

    /// Table cell: two-decimal rate, `-` when unsupported.
    pub fn cell(&self) -> String {
        match (self.supported, self.rate) {
            (false, _) => "-".into(),
            (true, Some(r)) => format!("{r:.2}"),
            (true, None) => "n/a".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Skills,
    Tasks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMetadata {
    pub suite: Suite,
    pub seed: u64,
    /// Trials per row.
    pub trials: u32,
    /// First and last instance seed (tasks) or trial stream (skills).
    pub seed_range: [u64; 2],
    /// SHA-256 of the canonical JSON of every config the bench read.
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: BenchMetadata,
    pub rows: Vec<BenchRow>,
    /// Kept out of the serialized report so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

fn seed_range(base: u64, n: u32) -> [u64; 2] {
    [base, base + u64::from(n.max(1)) - 1]
}

/// One row of the basic-skill table with the shipped ranges.
pub fn run_skill_bench(skill: SkillKind, kind: RobotKind, gravity: Gravity, n_trials: u32, seed: u64) -> BenchRow {
    run_skill_bench_with(&SkillBenchConfig::shipped(), skill, kind, gravity, n_trials, seed)
}

pub fn run_skill_bench_with(
    cfg: &SkillBenchConfig,
    skill: SkillKind,
    kind: RobotKind,
    gravity: Gravity,
    n_trials: u32,
    seed: u64,
) -> BenchRow {
    let name = skill.name().to_string();
    if !is_supported(skill, kind, gravity) {
        return BenchRow::unsupported(name, Some(kind), gravity);
    }
    let results: Vec<TrialResult> = (0..u64::from(n_trials))
        .into_par_iter()
        .map(|t| run_skill_trial(cfg, skill, kind, gravity, seed, t))
        .collect();
    BenchRow::from_results(name, Some(kind), gravity, &results)
}

/// The full skill x gravity matrix for each kind, rows ordered by kind,
/// gravity, then table column.
pub fn run_skill_suite(cfg: &SkillBenchConfig, kinds: &[RobotKind], n_trials: u32, seed: u64) -> BenchReport {
    let start = Instant::now();
    let mut rows = Vec::new();
    for &kind in kinds {
        for g in GRAVITIES {
            for skill in TABLE_SKILLS {
                rows.push(run_skill_bench_with(cfg, skill, kind, g, n_trials, seed));
            }
        }
    }
    BenchReport {
        metadata: BenchMetadata {
            suite: Suite::Skills,
            seed,
            trials: n_trials,
            seed_range: seed_range(0, n_trials),
            config_hash: config_hash(&(cfg, kinds)),
        },
        rows,
        wall_time: start.elapsed(),
    }
}

/// Outcome of one task-bench episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub scenario: String,
    pub seed: u64,
    pub success: bool,
    pub ticks: u64,
    pub reason: Option<String>,
    pub log: MessageLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskBench {
    pub row: BenchRow,
    pub episodes: Vec<EpisodeRecord>,
}

/// Plays one scenario instance to completion with the rule planner and the
/// scripted human.
pub fn run_scenario_episode(scenario: &ScenarioConfig, seed: u64) -> EpisodeRecord {
    let failed = |reason: String| EpisodeRecord {
        scenario: scenario.name.clone(),
        seed,
        success: false,
        ticks: 0,
        reason: Some(reason),
        log: MessageLog::default(),
    };
    let inst = match scenario.instantiate(seed) {
        Ok(i) => i,
        Err(e) => return failed(e.to_string()),
    };
    let graph = match scenario.plan_graph(&inst, None) {
        Ok(g) => g,
        Err(e) => return failed(format!("planning failed: {e}")),
    };
    let config = EpisodeConfig { timeout: scenario.episode_timeout, ..EpisodeConfig::default() };
    match run_episode(inst.world, graph, &inst.roster, config) {
        Ok(r) => EpisodeRecord {
            scenario: scenario.name.clone(),
            seed,
            success: r.success,
            ticks: r.ticks,
            reason: r.reason,
            log: r.log,
        },
        Err(e) => failed(e.to_string()),
    }
}

/// `n_episodes` episodes at seeds `seed..seed + n`.
pub fn run_task_bench(scenario: &ScenarioConfig, n_episodes: u32, seed: u64) -> TaskBench {
    let episodes: Vec<EpisodeRecord> = (0..u64::from(n_episodes))
        .into_par_iter()
        .map(|i| run_scenario_episode(scenario, seed + i))
        .collect();
    let results: Vec<TrialResult> = episodes.iter().map(|e| TrialResult { success: e.success, ticks: e.ticks }).collect();
    let row = BenchRow::from_results(scenario.display_name().to_string(), None, scenario.gravity, &results);
    TaskBench { row, episodes }
}

pub fn run_task_suite(scenarios: &[ScenarioConfig], n_episodes: u32, seed: u64) -> (BenchReport, Vec<EpisodeRecord>) {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut episodes = Vec::new();
    for s in scenarios {
        let b = run_task_bench(s, n_episodes, seed);
        rows.push(b.row);
        episodes.extend(b.episodes);
    }
    let report = BenchReport {
        metadata: BenchMetadata {
            suite: Suite::Tasks,
            seed,
            trials: n_episodes,
            seed_range: seed_range(seed, n_episodes),
            config_hash: config_hash(scenarios),
        },
        rows,
        wall_time: start.elapsed(),
    };
    (report, episodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl ReportFormat {
    /// Guesses from a file extension, defaulting to text.
    pub fn from_path(path: &Path) -> ReportFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => ReportFormat::Json,
            Some("csv") => ReportFormat::Csv,
            _ => ReportFormat::Text,
        }
    }
}

fn row_label(row: &BenchRow) -> String {
    match row.kind {
        Some(k) => format!("{k:?} ({})", row.gravity.label()),
        None => row.name.clone(),
    }
}

fn render_table(out: &mut String, header: &[String], body: &[Vec<String>]) {
    let mut widths: Vec<usize> = header.iter().map(String::len).collect();
    for r in body {
        for (w, c) in widths.iter_mut().zip(r) {
            *w = (*w).max(c.len());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(s, "{c:<w$}");
            } else {
                let _ = write!(s, "  {c:>w$}");
            }
        }
        s.trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  "));
    for r in body {
        let _ = writeln!(out, "{}", line(r));
    }
}

fn render_text(report: &BenchReport) -> String {
    let mut out = String::new();
    let m = &report.metadata;
    match m.suite {
        Suite::Skills => {
            let mut columns: Vec<String> = Vec::new();
            let mut lines: Vec<(String, BTreeMap<String, String>)> = Vec::new();
            for row in &report.rows {
                if !columns.contains(&row.name) {
                    columns.push(row.name.clone());
                }
                let label = row_label(row);
                match lines.iter_mut().find(|(l, _)| *l == label) {
                    Some((_, cells)) => {
                        cells.insert(row.name.clone(), row.cell());
                    }
                    None => lines.push((label, BTreeMap::from([(row.name.clone(), row.cell())]))),
                }
            }
            let header: Vec<String> = std::iter::once("Robots".to_string()).chain(columns.iter().cloned()).collect();
            let body: Vec<Vec<String>> = lines
                .into_iter()
                .map(|(label, cells)| {
                    std::iter::once(label)
                        .chain(columns.iter().map(|c| cells.get(c).cloned().unwrap_or_else(|| "-".into())))
                        .collect()
                })
                .collect();
            render_table(&mut out, &header, &body);
        }
        Suite::Tasks => {
            let header: Vec<String> =
                ["Tasks", "Gravity", "Trials", "Successes", "Rate", "Mean ticks"].iter().map(|s| s.to_string()).collect();
            let body: Vec<Vec<String>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.name.clone(),
                        r.gravity.label().to_string(),
                        r.trials.to_string(),
                        r.successes.to_string(),
                        r.cell(),
                        r.mean_ticks.map_or("-".into(), |t| format!("{t:.1}")),
                    ]
                })
                .collect();
            render_table(&mut out, &header, &body);
        }
    }
    let _ = writeln!(
        out,
        "\nseed {} | trials per row {} | seed range {}..={} | config sha256 {}",
        m.seed, m.trials, m.seed_range[0], m.seed_range[1], m.config_hash
    );
    out
}

#[derive(Serialize)]
struct CsvRow<'a> {
    name: &'a str,
    kind: String,
    gravity: &'static str,
    supported: bool,
    trials: u32,
    successes: u32,
    rate: String,
    mean_ticks: String,
}

fn render_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        w.serialize(CsvRow {
            name: &r.name,
            kind: r.kind.map(|k| format!("{k:?}")).unwrap_or_default(),
            gravity: r.gravity.label(),
            supported: r.supported,
            trials: r.trials,
            successes: r.successes,
            rate: if r.supported { r.rate.map(|x| x.to_string()).unwrap_or_default() } else { "-".into() },
            mean_ticks: r.mean_ticks.map(|x| x.to_string()).unwrap_or_default(),
        })
        .expect("csv rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn render_report(report: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => render_text(report),
        ReportFormat::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        ReportFormat::Csv => render_csv(report),
    }
}

pub fn emit_report(report: &BenchReport, format: ReportFormat, path: impl AsRef<Path>) -> io::Result<()> {
    std::fs::write(path, render_report(report, format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn draws_ignore_gravity_and_differ_by_trial() {
        let cfg = SkillBenchConfig::shipped();
        let r = cfg.ranges(SkillKind::PickCube);
        assert_eq!(draw_trial(&r, SkillKind::PickCube, 7, 3), draw_trial(&r, SkillKind::PickCube, 7, 3));
        assert_ne!(draw_trial(&r, SkillKind::PickCube, 7, 3), draw_trial(&r, SkillKind::PickCube, 7, 4));
        let d = draw_trial(&r, SkillKind::PickCube, 7, 3);
        assert!(d.object.norm() <= r.spawn_radius + 1e-12);
        assert!(d.drift.norm() <= r.drift[1] + 1e-12);
    }

    #[test]
    fn empty_row_performs_no_division() {
        let row = BenchRow::from_results("x".into(), None, Gravity::ZeroG, &[]);
        assert_eq!((row.trials, row.successes, row.rate, row.mean_ticks), (0, 0, None, None));
        assert_eq!(row.cell(), "n/a");
    }

    #[test]
    fn catch_at_1g_is_a_dash() {
        let row = run_skill_bench(SkillKind::CatchFloatingCube, RobotKind::Dexterous, Gravity::EarthG, 5, 7);
        assert!(!row.supported);
        assert_eq!(row.cell(), "-");
    }
}
