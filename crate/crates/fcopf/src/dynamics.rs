//! Reduced-order multi-machine simulation of the frequency response after a
//! generating-unit trip.
//!
//! Model, per generator group g (units in a group stay coherent):
//!
//! ```text
//! (2 H_g S_g / f0) df_g/dt = pm_g - pe_g          [per-unit-of-group MW]
//! d(delta_g)/dt            = 2 pi (f_g - f0)
//! T_g d(dpm_g)/dt          = -((f_g - f0)/f0) S_g / R_g - dpm_g
//! pm_g = clamp(pm0_g + dpm_g, p_min, p_max)
//! ```
//!
//! Each coherent group is an internal node behind its units' coupling
//! reactance (`machine_x / online units`), injecting into the DC network;
//! loads are constant power, and all physical bus angles are eliminated
//! algebraically each stage. The tripped unit's injection, inertia, governor,
//! and reactance branch are removed at the event instant. Integration is
//! classical fixed-step fourth-order Runge-Kutta.

use crate::grid::{check_operating_point, system_inertia, BusId, GridCase, OperatingPoint, UnitId};
use crate::linalg::{Lu, Matrix};

/// Trip instant within the simulation window, seconds.
pub const EVENT_TIME: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementRule {
    /// Metrics read at the bus where the trip occurred.
    DisturbanceBus,
    /// Metrics read on the center-of-inertia frequency.
    Coi,
}

#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    /// Integration step, seconds.
    pub dt: f64,
    /// Total simulated span, seconds.
    pub horizon: f64,
    /// RoCoF averaging window, seconds (ten cycles of a 60 Hz system).
    pub rocof_window: f64,
    pub measurement_bus_rule: MeasurementRule,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            horizon: 20.0,
            rocof_window: 0.167,
            measurement_bus_rule: MeasurementRule::DisturbanceBus,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt > 0.0) {
            return Err(SimError::BadConfig("dt must be positive".into()));
        }
        if !(self.rocof_window > 0.0) {
            return Err(SimError::BadConfig("rocof_window must be positive".into()));
        }
        if self.horizon < 5.0 * self.rocof_window {
            return Err(SimError::BadConfig(
                "horizon must cover at least five RoCoF windows".into(),
            ));
        }
        Ok(())
    }
}

/// Time-domain record of one trip simulation.
#[derive(Debug, Clone)]
pub struct FrequencyTrace {
    pub times: Vec<f64>,
    /// Per-group frequency series, Hz (units in a group are coherent).
    pub group_freq: Vec<Vec<f64>>,
    /// Per-bus frequency series, Hz, case bus order.
    pub bus_freq: Vec<Vec<f64>>,
    pub bus_ids: Vec<BusId>,
    pub event_time: f64,
    pub tripped_unit: UnitId,
    pub f0: f64,
}

/// Worst windowed RoCoF and nadir extracted from a trace.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct FrequencyMetrics {
    pub rocof: f64,
    pub nadir: f64,
    pub measurement_bus: BusId,
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("initial operating point is infeasible: {0}")]
    InfeasibleStart(String),
    #[error("integration diverged at t={t:.3}s: frequency {freq:.2} Hz outside [50, 70]")]
    Diverged { t: f64, freq: f64 },
    #[error("network solve failed: {0}")]
    Network(String),
    #[error("unit {0:?} is not part of the case")]
    UnknownUnit(UnitId),
    #[error("bus {0} not present in trace")]
    UnknownBus(BusId),
    #[error("window of {window}s exceeds the post-event trace span {span}s")]
    WindowTooLong { window: f64, span: f64 },
    #[error("no online units remain")]
    NoUnits,
}

/// Per-group state inside the integrator.
#[derive(Debug, Clone, Copy)]
struct GroupState {
    delta: f64,
    freq: f64,
    dpm: f64,
}

/// DC network with one internal node per online machine group.
///
/// Node ordering: machine nodes (one per phase entry) followed by all
/// physical buses. The bus block is eliminated through its LU factor each
/// evaluation, leaving electrical power as a linear map of machine angles.
struct NetworkModel {
    /// Full Laplacian over machine nodes + buses, MW/rad.
    lap: Matrix,
    n_machines: usize,
    n_buses: usize,
    lu: Lu,
    /// Nameplate load at each bus, MW.
    bus_load: Vec<f64>,
}

impl NetworkModel {
    /// `branches`: (machine slot, bus position, reactance pu) per group.
    fn build(
        case: &GridCase,
        branches: &[(usize, usize, f64)],
        n_machines: usize,
    ) -> Result<NetworkModel, SimError> {
        let n = case.buses.len();
        let dim = n_machines + n;
        let mut lap = Matrix::zeros(dim, dim);
        let mut add = |a: usize, b: usize, x: f64| {
            let w = case.base_mva / x;
            lap[(a, a)] += w;
            lap[(b, b)] += w;
            lap[(a, b)] -= w;
            lap[(b, a)] -= w;
        };
        for l in &case.lines {
            let a = n_machines + case.bus_position(l.from_bus).unwrap();
            let b = n_machines + case.bus_position(l.to_bus).unwrap();
            add(a, b, l.x);
        }
        for &(slot, bus, x) in branches {
            add(slot, n_machines + bus, x);
        }
        // eliminate the bus block
        let mut bus_block = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                bus_block[(i, j)] = lap[(n_machines + i, n_machines + j)];
            }
        }
        let lu = Lu::factor(&bus_block).map_err(|e| SimError::Network(e.to_string()))?;
        let mut bus_load = vec![0.0; n];
        for l in &case.loads {
            bus_load[case.bus_position(l.bus).unwrap()] += l.p_load;
        }
        Ok(NetworkModel {
            lap,
            n_machines,
            n_buses: n,
            lu,
            bus_load,
        })
    }

    /// Electrical power drawn from each machine node given its angle, MW.
    ///
    /// Also writes the recovered physical bus angles into `theta`.
    fn electrical_power(
        &self,
        machine_angles: &[f64],
        load_scale: &[f64],
        theta: &mut [f64],
    ) -> Vec<f64> {
        let nm = self.n_machines;
        // bus-block rhs: -load - coupling to machine nodes
        let mut rhs = vec![0.0; self.n_buses];
        for (i, r) in rhs.iter_mut().enumerate() {
            let mut acc = -self.bus_load[i] * load_scale[i];
            for (m, &a) in machine_angles.iter().enumerate() {
                acc -= self.lap[(nm + i, m)] * a;
            }
            *r = acc;
        }
        let solved = self.lu.solve(&rhs);
        theta.copy_from_slice(&solved);
        // P_e at machine node = Laplacian row over (machine angles, bus angles)
        (0..nm)
            .map(|m| {
                let mut acc = 0.0;
                for (j, &a) in machine_angles.iter().enumerate() {
                    acc += self.lap[(m, j)] * a;
                }
                for (j, &t) in solved.iter().enumerate() {
                    acc += self.lap[(m, nm + j)] * t;
                }
                acc
            })
            .collect()
    }
}

/// Online composition of one generator group during a simulation phase.
///
/// A phase's groups map one-to-one onto machine nodes in its network model,
/// in phase order.
#[derive(Debug, Clone)]
struct GroupPhase {
    group: usize,
    online_units: usize,
    /// Mechanical setpoint per unit, MW.
    pm0: f64,
}

/// Simulate the frequency response to tripping one unit.
pub fn simulate_trip(
    case: &GridCase,
    op: &OperatingPoint,
    tripped_unit: UnitId,
    config: &SimConfig,
) -> Result<FrequencyTrace, SimError> {
    config.validate()?;
    if tripped_unit.group >= case.gen_groups.len()
        || tripped_unit.unit >= case.gen_groups[tripped_unit.group].unit_count
    {
        return Err(SimError::UnknownUnit(tripped_unit));
    }
    let violations = check_operating_point(case, op);
    if !violations.is_empty() {
        return Err(SimError::InfeasibleStart(format!(
            "{} violation(s), first: {:?}",
            violations.len(),
            violations[0]
        )));
    }

    let n_groups = case.gen_groups.len();
    let n_buses = case.buses.len();
    let steps = (config.horizon / config.dt).round() as usize;
    let event_step = (EVENT_TIME / config.dt).round() as usize;

    // load scale relative to nameplate, per bus (constant-power loads)
    let mut load_scale_by_bus = vec![1.0; n_buses];
    for (l, &mw) in case.loads.iter().zip(&op.load_mw) {
        let b = case.bus_position(l.bus).unwrap();
        load_scale_by_bus[b] = if l.p_load > 0.0 { mw / l.p_load } else { 1.0 };
    }

    // pre-event phase: all units online
    let pre_phase: Vec<GroupPhase> = (0..n_groups)
        .map(|g| GroupPhase {
            group: g,
            online_units: case.gen_groups[g].unit_count,
            pm0: op.group_output[g],
        })
        .collect();
    let pre_net = phase_network(case, &pre_phase)?;

    // post-event phase: tripped unit removed; its groupmates keep their
    // per-unit setpoint
    let mut post_phase: Vec<GroupPhase> = Vec::new();
    for g in 0..n_groups {
        let units = case.gen_groups[g].unit_count - usize::from(g == tripped_unit.group);
        if units > 0 {
            post_phase.push(GroupPhase {
                group: g,
                online_units: units,
                pm0: op.group_output[g],
            });
        }
    }
    if post_phase.is_empty() {
        return Err(SimError::NoUnits);
    }
    let post_net = phase_network(case, &post_phase)?;

    // initial machine angles: bus angle plus the drop across the coupling
    // branch carrying the group's output
    let states: Vec<GroupState> = (0..n_groups)
        .map(|g| {
            let grp = &case.gen_groups[g];
            let b = case.bus_position(grp.bus).unwrap();
            let branch_x = coupling_x(case, g, grp.unit_count);
            let p_total = op.group_output[g] * grp.unit_count as f64;
            GroupState {
                delta: op.angles[b] + p_total * branch_x / case.base_mva,
                freq: case.f0,
                dpm: 0.0,
            }
        })
        .collect();

    // Exact equilibrium: read initial mechanical setpoints from the solved
    // network instead of the dispatch targets (they agree to rounding, and
    // this pins the pre-event derivative at exactly zero).
    let mut pre_phase = pre_phase;
    let mut post_phase = post_phase;
    {
        let mut theta = vec![0.0; n_buses];
        let angles: Vec<f64> = pre_phase.iter().map(|p| states[p.group].delta).collect();
        let pe = pre_net.electrical_power(&angles, &load_scale_by_bus, &mut theta);
        for (slot, p) in pre_phase.iter_mut().enumerate() {
            p.pm0 = pe[slot] / p.online_units as f64;
        }
        let setpoints: Vec<f64> = (0..n_groups)
            .map(|g| {
                pre_phase
                    .iter()
                    .find(|p| p.group == g)
                    .map(|p| p.pm0)
                    .unwrap_or(0.0)
            })
            .collect();
        for p in post_phase.iter_mut() {
            p.pm0 = setpoints[p.group];
        }
    }

    integrate(
        case,
        config,
        states,
        pre_phase,
        pre_net,
        post_phase,
        post_net,
        load_scale_by_bus,
        steps,
        event_step,
        tripped_unit,
    )
}

/// System-base reactance of a group's coupling branch with `units` online.
fn coupling_x(case: &GridCase, group: usize, units: usize) -> f64 {
    let g = &case.gen_groups[group];
    g.machine_x * case.base_mva / g.rated_mva / units as f64
}

/// Build the network model for a phase (machine nodes in phase order).
fn phase_network(case: &GridCase, phase: &[GroupPhase]) -> Result<NetworkModel, SimError> {
    let branches: Vec<(usize, usize, f64)> = phase
        .iter()
        .enumerate()
        .map(|(slot, p)| {
            let bus = case.bus_position(case.gen_groups[p.group].bus).unwrap();
            (slot, bus, coupling_x(case, p.group, p.online_units))
        })
        .collect();
    NetworkModel::build(case, &branches, phase.len())
}

#[inline]
fn effective_pm(g: &crate::grid::GenGroup, pm0: f64, dpm: f64) -> f64 {
    (pm0 + dpm).clamp(g.p_min, g.p_max)
}

#[allow(clippy::too_many_arguments)]
fn integrate(
    case: &GridCase,
    config: &SimConfig,
    mut states: Vec<GroupState>,
    pre_phase: Vec<GroupPhase>,
    pre_net: NetworkModel,
    post_phase: Vec<GroupPhase>,
    post_net: NetworkModel,
    load_scale_by_bus: Vec<f64>,
    steps: usize,
    event_step: usize,
    tripped_unit: UnitId,
) -> Result<FrequencyTrace, SimError> {
    let n_groups = case.gen_groups.len();
    let n_buses = case.buses.len();
    let dt = config.dt;
    let f0 = case.f0;

    let mut times = Vec::with_capacity(steps + 1);
    let mut group_freq: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); n_groups];
    let mut bus_freq: Vec<Vec<f64>> = vec![Vec::with_capacity(steps + 1); n_buses];

    // frequency interpolation weights for non-generator buses, per phase
    let pre_weights = bus_frequency_weights(case, &pre_phase);
    let post_weights = bus_frequency_weights(case, &post_phase);

    let mut theta = vec![0.0; n_buses];
    let mut angle_buf: Vec<f64> = Vec::with_capacity(n_groups);

    // derivative evaluation for the active phase
    let deriv = |states: &[GroupState],
                 phase: &[GroupPhase],
                 net: &NetworkModel,
                 theta: &mut [f64],
                 angles: &mut Vec<f64>|
     -> Vec<GroupState> {
        angles.clear();
        angles.extend(phase.iter().map(|p| states[p.group].delta));
        let pe = net.electrical_power(angles, &load_scale_by_bus, theta);
        let mut d = vec![
            GroupState {
                delta: 0.0,
                freq: 0.0,
                dpm: 0.0
            };
            states.len()
        ];
        for (slot, p) in phase.iter().enumerate() {
            let g = &case.gen_groups[p.group];
            let s = states[p.group];
            let pm = effective_pm(g, p.pm0, s.dpm);
            let pe_unit = pe[slot] / p.online_units as f64;
            d[p.group] = GroupState {
                delta: 2.0 * std::f64::consts::PI * (s.freq - f0),
                freq: (pm - pe_unit) * f0 / (2.0 * g.inertia * g.rated_mva),
                dpm: (-(s.freq - f0) / f0 * g.rated_mva / g.droop - s.dpm) / g.governor_tc,
            };
        }
        d
    };

    let record = |t: f64,
                  states: &[GroupState],
                  phase: &[GroupPhase],
                  weights: &BusWeights,
                  times: &mut Vec<f64>,
                  group_freq: &mut [Vec<f64>],
                  bus_freq: &mut [Vec<f64>]| {
        times.push(t);
        for (g, series) in group_freq.iter_mut().enumerate() {
            let online = phase.iter().any(|p| p.group == g);
            let value = if online {
                states[g].freq
            } else {
                series.last().copied().unwrap_or(f0)
            };
            series.push(value);
        }
        for (b, series) in bus_freq.iter_mut().enumerate() {
            series.push(weights.bus_frequency(b, states));
        }
    };

    let mut phase = &pre_phase;
    let mut net = &pre_net;
    let mut weights = &pre_weights;
    record(
        0.0, &states, phase, weights, &mut times, &mut group_freq, &mut bus_freq,
    );

    for step in 0..steps {
        if step == event_step {
            phase = &post_phase;
            net = &post_net;
            weights = &post_weights;
        }
        // RK4
        let k1 = deriv(&states, phase, net, &mut theta, &mut angle_buf);
        let s2 = advance(&states, &k1, dt / 2.0);
        let k2 = deriv(&s2, phase, net, &mut theta, &mut angle_buf);
        let s3 = advance(&states, &k2, dt / 2.0);
        let k3 = deriv(&s3, phase, net, &mut theta, &mut angle_buf);
        let s4 = advance(&states, &k3, dt);
        let k4 = deriv(&s4, phase, net, &mut theta, &mut angle_buf);
        for g in 0..states.len() {
            states[g].delta +=
                dt / 6.0 * (k1[g].delta + 2.0 * k2[g].delta + 2.0 * k3[g].delta + k4[g].delta);
            states[g].freq +=
                dt / 6.0 * (k1[g].freq + 2.0 * k2[g].freq + 2.0 * k3[g].freq + k4[g].freq);
            states[g].dpm +=
                dt / 6.0 * (k1[g].dpm + 2.0 * k2[g].dpm + 2.0 * k3[g].dpm + k4[g].dpm);
        }
        // governor anti-windup: hold the state inside the actuator range
        for p in phase {
            let g = &case.gen_groups[p.group];
            states[p.group].dpm = states[p.group]
                .dpm
                .clamp(g.p_min - p.pm0, g.p_max - p.pm0);
        }
        let t = (step + 1) as f64 * dt;
        for p in phase {
            let f = states[p.group].freq;
            if !(50.0..=70.0).contains(&f) {
                return Err(SimError::Diverged { t, freq: f });
            }
        }
        record(
            t, &states, phase, weights, &mut times, &mut group_freq, &mut bus_freq,
        );
    }

    Ok(FrequencyTrace {
        times,
        group_freq,
        bus_freq,
        bus_ids: case.buses.iter().map(|b| b.id).collect(),
        event_time: EVENT_TIME,
        tripped_unit,
        f0,
    })
}

fn advance(states: &[GroupState], d: &[GroupState], h: f64) -> Vec<GroupState> {
    states
        .iter()
        .zip(d)
        .map(|(s, k)| GroupState {
            delta: s.delta + h * k.delta,
            freq: s.freq + h * k.freq,
            dpm: s.dpm + h * k.dpm,
        })
        .collect()
}

/// Interpolation weights mapping group frequencies to bus frequencies.
///
/// A generator bus reports its own machines' inertia-weighted frequency; any
/// other bus reports an average of online machine frequencies weighted by
/// machine inertia over the shortest-path reactance distance to that machine.
struct BusWeights {
    /// weights[bus][group] (zero when unused)
    weights: Vec<Vec<f64>>,
}

impl BusWeights {
    fn bus_frequency(&self, bus: usize, states: &[GroupState]) -> f64 {
        let w = &self.weights[bus];
        let mut num = 0.0;
        let mut den = 0.0;
        for (g, &wg) in w.iter().enumerate() {
            if wg > 0.0 {
                num += wg * states[g].freq;
                den += wg;
            }
        }
        num / den
    }
}

fn bus_frequency_weights(case: &GridCase, phase: &[GroupPhase]) -> BusWeights {
    let n = case.buses.len();
    // shortest reactance distance between all buses (Floyd-Warshall; n <= tens)
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for l in &case.lines {
        let a = case.bus_position(l.from_bus).unwrap();
        let b = case.bus_position(l.to_bus).unwrap();
        if l.x < dist[a][b] {
            dist[a][b] = l.x;
            dist[b][a] = l.x;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let v = dist[i][k] + dist[k][j];
                if v < dist[i][j] {
                    dist[i][j] = v;
                }
            }
        }
    }

    let mut weights = vec![vec![0.0; case.gen_groups.len()]; n];
    let gen_buses: Vec<usize> = phase
        .iter()
        .map(|p| case.bus_position(case.gen_groups[p.group].bus).unwrap())
        .collect();
    for b in 0..n {
        let local = phase
            .iter()
            .zip(&gen_buses)
            .filter(|(_, &gb)| gb == b)
            .collect::<Vec<_>>();
        if !local.is_empty() {
            // a generator bus reports its own machines
            for (p, _) in local {
                let g = &case.gen_groups[p.group];
                weights[b][p.group] = g.inertia * g.rated_mva * p.online_units as f64;
            }
        } else {
            for (p, &gb) in phase.iter().zip(&gen_buses) {
                let g = &case.gen_groups[p.group];
                let d = dist[b][gb] + coupling_x(case, p.group, p.online_units);
                weights[b][p.group] = g.inertia * g.rated_mva * p.online_units as f64 / d.max(1e-9);
            }
        }
    }
    BusWeights { weights }
}

/// Most negative windowed average frequency slope at a bus, Hz/s.
pub fn measure_rocof(trace: &FrequencyTrace, bus: BusId, window: f64) -> Result<f64, SimError> {
    let series = bus_series(trace, bus)?;
    let dt = trace.times[1] - trace.times[0];
    if window < 2.0 * dt {
        return Err(SimError::BadConfig(format!(
            "window {window}s shorter than two steps"
        )));
    }
    let wsteps = (window / dt).round() as usize;
    let start = trace
        .times
        .iter()
        .position(|&t| t >= trace.event_time)
        .unwrap_or(0);
    if start + wsteps >= trace.times.len() {
        return Err(SimError::WindowTooLong {
            window,
            span: trace.times.last().unwrap() - trace.event_time,
        });
    }
    let mut worst = f64::INFINITY;
    for i in start..(trace.times.len() - wsteps) {
        let slope = (series[i + wsteps] - series[i]) / (wsteps as f64 * dt);
        if slope < worst {
            worst = slope;
        }
    }
    Ok(worst)
}

/// Minimum post-event frequency at a bus, Hz.
pub fn measure_nadir(trace: &FrequencyTrace, bus: BusId) -> Result<f64, SimError> {
    let series = bus_series(trace, bus)?;
    let start = trace
        .times
        .iter()
        .position(|&t| t >= trace.event_time)
        .unwrap_or(0);
    Ok(series[start..].iter().copied().fold(f64::INFINITY, f64::min))
}

fn bus_series<'t>(trace: &'t FrequencyTrace, bus: BusId) -> Result<&'t [f64], SimError> {
    let idx = trace
        .bus_ids
        .iter()
        .position(|&b| b == bus)
        .ok_or(SimError::UnknownBus(bus))?;
    Ok(&trace.bus_freq[idx])
}

/// Closed-form initial frequency slope after losing one unit, Hz/s.
///
/// Uses the post-trip equivalent inertia, matching the simulator's behaviour
/// at the event instant.
pub fn analytic_initial_rocof(
    case: &GridCase,
    op: &OperatingPoint,
    tripped_unit: UnitId,
) -> Result<f64, SimError> {
    if tripped_unit.group >= case.gen_groups.len()
        || tripped_unit.unit >= case.gen_groups[tripped_unit.group].unit_count
    {
        return Err(SimError::UnknownUnit(tripped_unit));
    }
    let remaining: Vec<UnitId> = case
        .all_units()
        .into_iter()
        .filter(|&u| u != tripped_unit)
        .collect();
    if remaining.is_empty() {
        return Err(SimError::NoUnits);
    }
    let h_sys = system_inertia(case, &remaining).map_err(|e| SimError::Network(e.to_string()))?;
    let p_loss = op.group_output[tripped_unit.group];
    Ok(-case.f0 * p_loss / (2.0 * h_sys * case.base_mva))
}

/// Center-of-inertia frequency series (post-trip machine set after the event).
pub fn coi_series(trace: &FrequencyTrace, case: &GridCase) -> Vec<f64> {
    let n = trace.times.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let post = trace.times[i] >= trace.event_time;
        let mut num = 0.0;
        let mut den = 0.0;
        for (g, grp) in case.gen_groups.iter().enumerate() {
            let mut units = grp.unit_count as f64;
            if post && trace.tripped_unit.group == g {
                units -= 1.0;
            }
            if units > 0.0 {
                let w = grp.inertia * grp.rated_mva * units;
                num += w * trace.group_freq[g][i];
                den += w;
            }
        }
        out.push(num / den);
    }
    out
}

/// Render a trace as columnar text: time plus one column per bus.
pub fn export_trace(trace: &FrequencyTrace) -> String {
    let mut out = String::new();
    out.push_str("time");
    for b in &trace.bus_ids {
        out.push_str(&format!("\tbus_{b}"));
    }
    out.push('\n');
    for (i, t) in trace.times.iter().enumerate() {
        out.push_str(&format!("{t}"));
        for series in &trace.bus_freq {
            out.push_str(&format!("\t{}", series[i]));
        }
        out.push('\n');
    }
    out
}

/// Bus where a unit's disturbance is measured.
pub fn disturbance_bus(case: &GridCase, unit: UnitId) -> BusId {
    case.gen_groups[unit.group].bus
}

/// Measure the configured metrics from a trace.
pub fn measure_metrics(
    trace: &FrequencyTrace,
    case: &GridCase,
    config: &SimConfig,
) -> Result<FrequencyMetrics, SimError> {
    let bus = disturbance_bus(case, trace.tripped_unit);
    match config.measurement_bus_rule {
        MeasurementRule::DisturbanceBus => Ok(FrequencyMetrics {
            rocof: measure_rocof(trace, bus, config.rocof_window)?,
            nadir: measure_nadir(trace, bus)?,
            measurement_bus: bus,
        }),
        MeasurementRule::Coi => {
            let coi = coi_series(trace, case);
            let mut synthetic = trace.clone();
            // reuse the bus machinery by replacing the disturbance bus column
            let idx = trace.bus_ids.iter().position(|&b| b == bus).unwrap();
            synthetic.bus_freq[idx] = coi;
            Ok(FrequencyMetrics {
                rocof: measure_rocof(&synthetic, bus, config.rocof_window)?,
                nadir: measure_nadir(&synthetic, bus)?,
                measurement_bus: bus,
            })
        }
    }
}
