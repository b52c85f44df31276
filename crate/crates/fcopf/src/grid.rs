//! Static network model: case-file ingestion, DC power flow, and aggregate
//! inertia bookkeeping.
//!
//! All power quantities at this level are MW on the system base; machine
//! inertia is stored on the machine MVA base and converted where aggregated.

use std::collections::HashMap;

use crate::linalg::{Lu, Matrix};

/// Bus identifier as written in the case file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct BusId(pub usize);

impl std::fmt::Display for BusId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One generating unit, addressed by its group and position within the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct UnitId {
    pub group: usize,
    pub unit: usize,
}

#[derive(Debug, Clone)]
pub struct Bus {
    pub id: BusId,
    pub slack: bool,
}

#[derive(Debug, Clone)]
pub struct Line {
    pub from_bus: BusId,
    pub to_bus: BusId,
    /// Series reactance, pu on the system base.
    pub x: f64,
    /// Thermal limit, MW.
    pub limit: f64,
}

/// A set of identical units at one bus sharing a single per-unit output.
#[derive(Debug, Clone)]
pub struct GenGroup {
    pub bus: BusId,
    pub unit_count: usize,
    /// Per-unit output limits, MW.
    pub p_min: f64,
    pub p_max: f64,
    /// Quadratic cost coefficients per unit: c2 $/MW^2 h, c1 $/MWh, c0 $/h.
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    /// Inertia constant, seconds on the machine MVA base.
    pub inertia: f64,
    /// Machine rating, MVA per unit.
    pub rated_mva: f64,
    /// Governor droop, pu.
    pub droop: f64,
    /// Governor time constant, seconds.
    pub governor_tc: f64,
    /// Coupling reactance between the machine's internal node and its bus,
    /// pu on the machine base.
    pub machine_x: f64,
    /// Per-unit output in the reference operating condition, MW.
    pub default_output: f64,
}

#[derive(Debug, Clone)]
pub struct Load {
    pub bus: BusId,
    pub p_load: f64,
}

/// Validated static description of the study system.
#[derive(Debug, Clone)]
pub struct GridCase {
    pub base_mva: f64,
    pub f0: f64,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub gen_groups: Vec<GenGroup>,
    pub loads: Vec<Load>,
    fingerprint: String,
    bus_index: HashMap<BusId, usize>,
}

/// A dispatch together with its network solution.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OperatingPoint {
    /// Per-unit output of each generator group, MW.
    pub group_output: Vec<f64>,
    /// Absolute real power of each load, MW (case load order).
    pub load_mw: Vec<f64>,
    /// Bus voltage angles, rad (case bus order, slack = 0).
    pub angles: Vec<f64>,
    /// Line flows, MW (case line order, from -> to positive).
    pub flows: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    NodalBalance,
    FlowEquation,
    GeneratorLimit,
    LineLimit,
}

/// One constraint violation found when checking an operating point.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub element: String,
    pub magnitude: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CaseError {
    #[error("case schema violation: {0}")]
    Schema(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("duplicate bus id {0}")]
    DuplicateBus(BusId),
    #[error("network graph is disconnected: bus {0} unreachable from the slack bus")]
    Disconnected(BusId),
}

#[derive(Debug, thiserror::Error)]
pub enum PowerFlowError {
    #[error("injections do not balance: net {0:.6} MW")]
    Unbalanced(f64),
    #[error("susceptance system is singular: {0}")]
    Singular(#[from] crate::linalg::SingularMatrix),
    #[error("injection vector length {got} does not match bus count {want}")]
    DimensionMismatch { got: usize, want: usize },
}

const BALANCE_TOL_MW: f64 = 1e-6;

/// Raw document shape for the case file; validated into [`GridCase`].
mod doc {
    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct CaseDoc {
        pub system: System,
        pub buses: Vec<BusDoc>,
        pub lines: Vec<LineDoc>,
        pub gen_groups: Vec<GenGroupDoc>,
        pub loads: Vec<LoadDoc>,
    }

    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct System {
        pub base_mva: f64,
        pub f0: f64,
    }

    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct BusDoc {
        pub id: usize,
        #[serde(default)]
        pub slack: bool,
    }

    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct LineDoc {
        pub from_bus: usize,
        pub to_bus: usize,
        pub x: f64,
        pub limit: f64,
    }

    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct GenGroupDoc {
        pub bus: usize,
        pub unit_count: usize,
        pub p_min: f64,
        pub p_max: f64,
        pub c2: f64,
        pub c1: f64,
        pub c0: f64,
        pub inertia: f64,
        pub rated_mva: f64,
        pub droop: f64,
        pub governor_tc: f64,
        pub machine_x: f64,
        pub default_output: f64,
    }

    #[derive(serde::Deserialize)]
    #[serde(deny_unknown_fields)]
    pub struct LoadDoc {
        pub bus: usize,
        pub p_load: f64,
    }
}

/// Parse and validate a case document.
pub fn parse_case(text: &str) -> Result<GridCase, CaseError> {
    let doc: doc::CaseDoc = toml::from_str(text).map_err(|e| CaseError::Schema(e.to_string()))?;

    let fail = |path: &str, message: String| -> CaseError {
        CaseError::Invalid {
            path: path.to_string(),
            message,
        }
    };

    if doc.system.base_mva <= 0.0 {
        return Err(fail("system.base_mva", "must be positive".into()));
    }
    if doc.system.f0 <= 0.0 {
        return Err(fail("system.f0", "must be positive".into()));
    }

    let mut bus_index = HashMap::new();
    let mut buses = Vec::new();
    let mut slack_count = 0usize;
    for (i, b) in doc.buses.iter().enumerate() {
        let id = BusId(b.id);
        if bus_index.insert(id, i).is_some() {
            return Err(CaseError::DuplicateBus(id));
        }
        if b.slack {
            slack_count += 1;
        }
        buses.push(Bus { id, slack: b.slack });
    }
    if slack_count != 1 {
        return Err(fail(
            "buses",
            format!("exactly one slack bus required, found {slack_count}"),
        ));
    }

    let mut lines = Vec::new();
    for (i, l) in doc.lines.iter().enumerate() {
        let path = format!("lines[{i}]");
        let from = BusId(l.from_bus);
        let to = BusId(l.to_bus);
        if from == to {
            return Err(fail(&path, format!("from_bus == to_bus ({from})")));
        }
        for (field, id) in [("from_bus", from), ("to_bus", to)] {
            if !bus_index.contains_key(&id) {
                return Err(fail(&format!("{path}.{field}"), format!("unknown bus {id}")));
            }
        }
        if l.x <= 0.0 {
            return Err(fail(&format!("{path}.x"), "reactance must be positive".into()));
        }
        if l.limit <= 0.0 {
            return Err(fail(&format!("{path}.limit"), "limit must be positive".into()));
        }
        lines.push(Line {
            from_bus: from,
            to_bus: to,
            x: l.x,
            limit: l.limit,
        });
    }

    let mut gen_groups = Vec::new();
    for (i, g) in doc.gen_groups.iter().enumerate() {
        let path = format!("gen_groups[{i}]");
        let bus = BusId(g.bus);
        if !bus_index.contains_key(&bus) {
            return Err(fail(&format!("{path}.bus"), format!("unknown bus {bus}")));
        }
        if g.unit_count < 1 {
            return Err(fail(&format!("{path}.unit_count"), "must be at least 1".into()));
        }
        if !(0.0 <= g.p_min && g.p_min < g.p_max) {
            return Err(fail(
                &format!("{path}.p_min"),
                format!("need 0 <= p_min < p_max, got [{}, {}]", g.p_min, g.p_max),
            ));
        }
        if g.c2 < 0.0 {
            return Err(fail(&format!("{path}.c2"), "cost must be convex (c2 >= 0)".into()));
        }
        for (field, v) in [
            ("inertia", g.inertia),
            ("rated_mva", g.rated_mva),
            ("droop", g.droop),
            ("governor_tc", g.governor_tc),
            ("machine_x", g.machine_x),
        ] {
            if v <= 0.0 {
                return Err(fail(&format!("{path}.{field}"), "must be positive".into()));
            }
        }
        if g.default_output < g.p_min || g.default_output > g.p_max {
            return Err(fail(
                &format!("{path}.default_output"),
                "must lie within [p_min, p_max]".into(),
            ));
        }
        gen_groups.push(GenGroup {
            bus,
            unit_count: g.unit_count,
            p_min: g.p_min,
            p_max: g.p_max,
            c2: g.c2,
            c1: g.c1,
            c0: g.c0,
            inertia: g.inertia,
            rated_mva: g.rated_mva,
            droop: g.droop,
            governor_tc: g.governor_tc,
            machine_x: g.machine_x,
            default_output: g.default_output,
        });
    }

    let mut loads = Vec::new();
    for (i, l) in doc.loads.iter().enumerate() {
        let bus = BusId(l.bus);
        if !bus_index.contains_key(&bus) {
            return Err(fail(&format!("loads[{i}].bus"), format!("unknown bus {bus}")));
        }
        if l.p_load < 0.0 {
            return Err(fail(&format!("loads[{i}].p_load"), "must be non-negative".into()));
        }
        loads.push(Load {
            bus,
            p_load: l.p_load,
        });
    }

    // connectivity from the slack bus
    let n = buses.len();
    let mut adjacency = vec![Vec::new(); n];
    for l in &lines {
        let a = bus_index[&l.from_bus];
        let b = bus_index[&l.to_bus];
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let start = buses.iter().position(|b| b.slack).unwrap();
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(b) = stack.pop() {
        for &nb in &adjacency[b] {
            if !seen[nb] {
                seen[nb] = true;
                stack.push(nb);
            }
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(CaseError::Disconnected(buses[i].id));
    }

    let fingerprint = fingerprint_text(text);
    Ok(GridCase {
        base_mva: doc.system.base_mva,
        f0: doc.system.f0,
        buses,
        lines,
        gen_groups,
        loads,
        fingerprint,
        bus_index,
    })
}

fn fingerprint_text(text: &str) -> String {
    use sha2::Digest;
    let digest = sha2::Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

const BUNDLED_CASE: &str = include_str!("../cases/ieee9_freq.toml");

impl GridCase {
    /// The modified nine-bus study system shipped with the crate.
    pub fn bundled() -> GridCase {
        parse_case(BUNDLED_CASE).expect("bundled case must parse")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED_CASE
    }

    pub fn fingerprint(&self) -> &str {
        &self.fingerprint
    }

    pub fn bus_position(&self, id: BusId) -> Option<usize> {
        self.bus_index.get(&id).copied()
    }

    pub fn slack_position(&self) -> usize {
        self.buses.iter().position(|b| b.slack).unwrap()
    }

    /// Group whose bus is the slack bus; absorbs sampling residuals.
    pub fn slack_group(&self) -> Option<usize> {
        let slack = self.buses[self.slack_position()].id;
        self.gen_groups.iter().position(|g| g.bus == slack)
    }

    pub fn all_units(&self) -> Vec<UnitId> {
        let mut out = Vec::new();
        for (gi, g) in self.gen_groups.iter().enumerate() {
            for u in 0..g.unit_count {
                out.push(UnitId { group: gi, unit: u });
            }
        }
        out
    }

    /// Display name of a unit, e.g. `G21` for the first unit at bus 2.
    pub fn unit_name(&self, unit: UnitId) -> String {
        let bus = self.gen_groups[unit.group].bus;
        format!("G{}{}", bus, unit.unit + 1)
    }

    /// Resolve a display name like `G21` back to a unit id.
    pub fn unit_from_name(&self, name: &str) -> Option<UnitId> {
        for unit in self.all_units() {
            if self.unit_name(unit) == name {
                return Some(unit);
            }
        }
        None
    }

    /// First unit at each generator bus: the credible trip set.
    pub fn credible_contingencies(&self) -> Vec<UnitId> {
        (0..self.gen_groups.len())
            .map(|group| UnitId { group, unit: 0 })
            .collect()
    }

    pub fn total_load(&self) -> f64 {
        self.loads.iter().map(|l| l.p_load).sum()
    }

    /// Net bus injections (MW) implied by a dispatch and load vector.
    pub fn injections(&self, group_output: &[f64], load_mw: &[f64]) -> Vec<f64> {
        assert_eq!(group_output.len(), self.gen_groups.len());
        assert_eq!(load_mw.len(), self.loads.len());
        let mut inj = vec![0.0; self.buses.len()];
        for (g, &p) in self.gen_groups.iter().zip(group_output) {
            inj[self.bus_index[&g.bus]] += p * g.unit_count as f64;
        }
        for (l, &p) in self.loads.iter().zip(load_mw) {
            inj[self.bus_index[&l.bus]] -= p;
        }
        inj
    }

    /// Reference operating point: nameplate loads, default outputs, with the
    /// slack group's output adjusted so the system balances exactly.
    pub fn default_operating_point(&self) -> Result<OperatingPoint, PowerFlowError> {
        let load_mw: Vec<f64> = self.loads.iter().map(|l| l.p_load).collect();
        let mut outputs: Vec<f64> = self.gen_groups.iter().map(|g| g.default_output).collect();
        let slack_group = self.slack_group().expect("case has a slack-bus group");
        let other: f64 = self
            .gen_groups
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != slack_group)
            .map(|(i, g)| outputs[i] * g.unit_count as f64)
            .sum();
        let residual = self.total_load() - other;
        outputs[slack_group] = residual / self.gen_groups[slack_group].unit_count as f64;
        OperatingPoint::solve(self, outputs, load_mw)
    }
}

impl OperatingPoint {
    /// Build an operating point by solving the network for a given dispatch.
    pub fn solve(
        case: &GridCase,
        group_output: Vec<f64>,
        load_mw: Vec<f64>,
    ) -> Result<OperatingPoint, PowerFlowError> {
        let inj = case.injections(&group_output, &load_mw);
        let (angles, flows) = dc_power_flow(case, &inj)?;
        Ok(OperatingPoint {
            group_output,
            load_mw,
            angles,
            flows,
        })
    }
}

/// Solve the DC network equations for balanced bus injections (MW).
///
/// Returns bus angles (rad, slack fixed to zero) and line flows (MW).
pub fn dc_power_flow(
    case: &GridCase,
    injections: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), PowerFlowError> {
    let n = case.buses.len();
    if injections.len() != n {
        return Err(PowerFlowError::DimensionMismatch {
            got: injections.len(),
            want: n,
        });
    }
    let net: f64 = injections.iter().sum();
    if net.abs() > BALANCE_TOL_MW {
        return Err(PowerFlowError::Unbalanced(net));
    }

    let slack = case.slack_position();
    // susceptance Laplacian in MW/rad
    let mut lap = Matrix::zeros(n, n);
    for l in &case.lines {
        let a = case.bus_index[&l.from_bus];
        let b = case.bus_index[&l.to_bus];
        let w = case.base_mva / l.x;
        lap[(a, a)] += w;
        lap[(b, b)] += w;
        lap[(a, b)] -= w;
        lap[(b, a)] -= w;
    }

    // reduced system with the slack row/column removed
    let keep: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let m = keep.len();
    let mut reduced = Matrix::zeros(m, m);
    let mut rhs = vec![0.0; m];
    for (ri, &i) in keep.iter().enumerate() {
        rhs[ri] = injections[i];
        for (rj, &j) in keep.iter().enumerate() {
            reduced[(ri, rj)] = lap[(i, j)];
        }
    }
    let solved = Lu::factor(&reduced)?.solve(&rhs);

    let mut angles = vec![0.0; n];
    for (ri, &i) in keep.iter().enumerate() {
        angles[i] = solved[ri];
    }
    let flows: Vec<f64> = case
        .lines
        .iter()
        .map(|l| {
            let a = case.bus_index[&l.from_bus];
            let b = case.bus_index[&l.to_bus];
            (angles[a] - angles[b]) / l.x * case.base_mva
        })
        .collect();
    Ok((angles, flows))
}

/// Equivalent system inertia, seconds on the system base, over a unit set.
pub fn system_inertia(case: &GridCase, online_units: &[UnitId]) -> Result<f64, CaseError> {
    if online_units.is_empty() {
        return Err(CaseError::Invalid {
            path: "online_units".into(),
            message: "must be nonempty".into(),
        });
    }
    let mut sum = 0.0;
    for u in online_units {
        let g = &case.gen_groups[u.group];
        sum += g.inertia * g.rated_mva;
    }
    Ok(sum / case.base_mva)
}

/// Check an operating point against the network and limit constraints.
///
/// Violations are data, not errors: an empty list means the point is feasible
/// within tolerance.
pub fn check_operating_point(case: &GridCase, op: &OperatingPoint) -> Vec<Violation> {
    let mut out = Vec::new();

    // generator limits per group (per-unit output)
    for (gi, (g, &p)) in case.gen_groups.iter().zip(&op.group_output).enumerate() {
        let excess = if p > g.p_max {
            p - g.p_max
        } else if p < g.p_min {
            g.p_min - p
        } else {
            0.0
        };
        if excess > BALANCE_TOL_MW {
            out.push(Violation {
                kind: ViolationKind::GeneratorLimit,
                element: format!("gen_groups[{gi}] (bus {})", g.bus),
                magnitude: excess,
            });
        }
    }

    // flow equation per line
    for (li, (l, &flow)) in case.lines.iter().zip(&op.flows).enumerate() {
        let a = case.bus_index[&l.from_bus];
        let b = case.bus_index[&l.to_bus];
        let implied = (op.angles[a] - op.angles[b]) / l.x * case.base_mva;
        let err = (flow - implied).abs();
        if err > BALANCE_TOL_MW {
            out.push(Violation {
                kind: ViolationKind::FlowEquation,
                element: format!("lines[{li}] ({}->{})", l.from_bus, l.to_bus),
                magnitude: err,
            });
        }
    }

    // line thermal limits
    for (li, (l, &flow)) in case.lines.iter().zip(&op.flows).enumerate() {
        let excess = flow.abs() - l.limit;
        if excess > BALANCE_TOL_MW {
            out.push(Violation {
                kind: ViolationKind::LineLimit,
                element: format!("lines[{li}] ({}->{})", l.from_bus, l.to_bus),
                magnitude: excess,
            });
        }
    }

    // nodal balance at every bus: generation - load - net line export = 0
    let mut mismatch = case.injections(&op.group_output, &op.load_mw);
    for (l, &flow) in case.lines.iter().zip(&op.flows) {
        mismatch[case.bus_index[&l.from_bus]] -= flow;
        mismatch[case.bus_index[&l.to_bus]] += flow;
    }
    for (bi, m) in mismatch.iter().enumerate() {
        if m.abs() > BALANCE_TOL_MW {
            out.push(Violation {
                kind: ViolationKind::NodalBalance,
                element: format!("bus {}", case.buses[bi].id),
                magnitude: m.abs(),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_bus_case() -> GridCase {
        parse_case(
            r#"
            [system]
            base_mva = 100.0
            f0 = 60.0
            [[buses]]
            id = 1
            slack = true
            [[buses]]
            id = 2
            [[lines]]
            from_bus = 1
            to_bus = 2
            x = 0.1
            limit = 100.0
            [[gen_groups]]
            bus = 1
            unit_count = 1
            p_min = 0.0
            p_max = 100.0
            c2 = 0.01
            c1 = 1.0
            c0 = 0.0
            inertia = 5.0
            rated_mva = 100.0
            droop = 0.05
            governor_tc = 0.5
            machine_x = 0.3
            default_output = 10.0
            [[loads]]
            bus = 2
            p_load = 10.0
            "#,
        )
        .unwrap()
    }

    #[test]
    fn bundled_case_matches_reference_loads() {
        let case = GridCase::bundled();
        let loads: Vec<(usize, f64)> = case.loads.iter().map(|l| (l.bus.0, l.p_load)).collect();
        assert_eq!(loads, vec![(5, 125.0), (6, 90.0), (8, 100.0)]);
    }

    #[test]
    fn bundled_case_group_unit_counts() {
        let case = GridCase::bundled();
        let groups: Vec<(usize, usize)> = case
            .gen_groups
            .iter()
            .map(|g| (g.bus.0, g.unit_count))
            .collect();
        assert_eq!(groups, vec![(1, 2), (2, 4), (3, 3)]);
    }

    #[test]
    fn self_loop_line_is_rejected() {
        let text = GridCase::bundled_text().replace("from_bus = 4\nto_bus = 5", "from_bus = 4\nto_bus = 4");
        let err = parse_case(&text).unwrap_err();
        match err {
            CaseError::Invalid { path, .. } => assert!(path.starts_with("lines["), "{path}"),
            other => panic!("expected Invalid, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_bus_is_rejected() {
        let text = GridCase::bundled_text().replace("id = 9", "id = 8");
        assert!(matches!(parse_case(&text), Err(CaseError::DuplicateBus(_))));
    }

    #[test]
    fn two_bus_flow_identity() {
        let case = two_bus_case();
        let (angles, flows) = dc_power_flow(&case, &[10.0, -10.0]).unwrap();
        assert!((flows[0] - 10.0).abs() < 1e-9);
        // angle difference = flow * x / base
        let diff = angles[0] - angles[1];
        assert!((diff - 10.0 * 0.1 / 100.0).abs() < 1e-12);
    }

    #[test]
    fn zero_injections_zero_flows() {
        let case = GridCase::bundled();
        let inj = vec![0.0; case.buses.len()];
        let (angles, flows) = dc_power_flow(&case, &inj).unwrap();
        assert!(angles.iter().all(|a| a.abs() < 1e-12));
        assert!(flows.iter().all(|f| f.abs() < 1e-12));
    }

    #[test]
    fn unbalanced_injections_rejected() {
        let case = two_bus_case();
        assert!(matches!(
            dc_power_flow(&case, &[10.0, -9.0]),
            Err(PowerFlowError::Unbalanced(_))
        ));
    }

    #[test]
    fn power_flow_is_linear() {
        let case = GridCase::bundled();
        let op = case.default_operating_point().unwrap();
        let inj = case.injections(&op.group_output, &op.load_mw);
        let (_, flows) = dc_power_flow(&case, &inj).unwrap();
        let scaled: Vec<f64> = inj.iter().map(|v| v * 0.37).collect();
        let (_, flows2) = dc_power_flow(&case, &scaled).unwrap();
        for (a, b) in flows.iter().zip(&flows2) {
            let rel = (b - a * 0.37).abs() / a.abs().max(1.0);
            assert!(rel < 1e-9);
        }
    }

    #[test]
    fn system_inertia_basics() {
        let case = two_bus_case();
        let h = system_inertia(&case, &[UnitId { group: 0, unit: 0 }]).unwrap();
        assert!((h - 5.0).abs() < 1e-12);
        assert!(system_inertia(&case, &[]).is_err());
    }

    #[test]
    fn system_inertia_two_identical_units() {
        let case = parse_case(
            r#"
            [system]
            base_mva = 100.0
            f0 = 60.0
            [[buses]]
            id = 1
            slack = true
            [[buses]]
            id = 2
            [[lines]]
            from_bus = 1
            to_bus = 2
            x = 0.1
            limit = 100.0
            [[gen_groups]]
            bus = 1
            unit_count = 2
            p_min = 0.0
            p_max = 100.0
            c2 = 0.01
            c1 = 1.0
            c0 = 0.0
            inertia = 4.0
            rated_mva = 50.0
            droop = 0.05
            governor_tc = 0.5
            machine_x = 0.3
            default_output = 10.0
            [[loads]]
            bus = 2
            p_load = 20.0
            "#,
        )
        .unwrap();
        let h = system_inertia(&case, &case.all_units()).unwrap();
        assert!((h - 4.0).abs() < 1e-12);
    }

    #[test]
    fn system_inertia_additive_over_disjoint_sets() {
        let case = GridCase::bundled();
        let units = case.all_units();
        let (a, b) = units.split_at(4);
        let total = system_inertia(&case, &units).unwrap();
        let pa = system_inertia(&case, a).unwrap();
        let pb = system_inertia(&case, b).unwrap();
        assert!((total - (pa + pb)).abs() < 1e-12);
    }

    #[test]
    fn inertia_summation_oracle_with_unit_removed() {
        let case = GridCase::bundled();
        let units: Vec<UnitId> = case
            .all_units()
            .into_iter()
            .filter(|u| !(u.group == 1 && u.unit == 0))
            .collect();
        let h = system_inertia(&case, &units).unwrap();
        // direct summation oracle
        let mut expect = 0.0;
        for u in &units {
            let g = &case.gen_groups[u.group];
            expect += g.inertia * g.rated_mva;
        }
        expect /= case.base_mva;
        assert_eq!(h, expect);
    }

    #[test]
    fn check_flags_generator_limit_excess() {
        let case = GridCase::bundled();
        let mut op = case.default_operating_point().unwrap();
        let g0_max = case.gen_groups[0].p_max;
        op.group_output[0] = g0_max + 1.0;
        let violations = check_operating_point(&case, &op);
        let gen_violation = violations
            .iter()
            .find(|v| v.kind == ViolationKind::GeneratorLimit)
            .expect("generator violation");
        assert!((gen_violation.magnitude - 1.0).abs() < 1e-9);
    }

    #[test]
    fn check_flags_nodal_balance_failure() {
        let case = GridCase::bundled();
        let mut op = case.default_operating_point().unwrap();
        op.load_mw[0] += 5.0; // 5 MW missing at that bus
        let violations = check_operating_point(&case, &op);
        let bal = violations
            .iter()
            .find(|v| v.kind == ViolationKind::NodalBalance)
            .expect("balance violation");
        assert!((bal.magnitude - 5.0).abs() < 1e-9);
    }

    #[test]
    fn default_operating_point_is_feasible() {
        let case = GridCase::bundled();
        let op = case.default_operating_point().unwrap();
        let violations = check_operating_point(&case, &op);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn nodal_balance_holds_for_random_balanced_injections() {
        let case = GridCase::bundled();
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = case.buses.len();
            let mut inj: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
            let net: f64 = inj.iter().sum();
            inj[0] -= net;
            let (_, flows) = dc_power_flow(&case, &inj).unwrap();
            // Kirchhoff at every bus
            let mut mismatch = inj.clone();
            for (l, &f) in case.lines.iter().zip(&flows) {
                mismatch[case.bus_position(l.from_bus).unwrap()] -= f;
                mismatch[case.bus_position(l.to_bus).unwrap()] += f;
            }
            assert!(mismatch.iter().all(|m| m.abs() < 1e-6), "{mismatch:?}");
        }
    }
}
