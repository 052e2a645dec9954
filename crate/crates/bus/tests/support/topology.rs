//! Random bus topologies replayed against a direct simulation of the
//! delivery rules. Failures come back as messages so callers can report them
//! their own way.

use std::collections::{BTreeMap, BTreeSet};

use facet_bus::{BusError, BusId, Hub, Mode, Publication, ToolId, ToolKind};
use facet_core::{EntityId, Model};
use rand::rngs::StdRng;
use rand::Rng;

#[derive(Clone, Debug)]
pub struct Topology {
    pub buses: usize,
    /// Per tool: attached buses, initial mode, bridge flag.
    pub tools: Vec<(BTreeSet<usize>, Mode, bool)>,
}

#[derive(Clone, Debug)]
pub enum Op {
    Publish {
        tool: usize,
        bus: usize,
        entities: BTreeSet<usize>,
    },
    Select {
        tool: usize,
        entities: BTreeSet<usize>,
    },
    SetMode {
        tool: usize,
        mode: Mode,
    },
    Attach {
        tool: usize,
        bus: usize,
    },
    Detach {
        tool: usize,
        bus: usize,
    },
}

pub const MODES: [Mode; 3] = [Mode::Following, Mode::Frozen, Mode::Highlighting];

/// At most 5 buses, 10 tools and 3 bridges.
pub fn random_topology(rng: &mut StdRng) -> Topology {
    let buses = rng.random_range(1..=5);
    let n = rng.random_range(1..=10);
    let bridges: BTreeSet<usize> = (0..rng.random_range(0..=3))
        .map(|_| rng.random_range(0..n))
        .collect();
    let tools = (0..n)
        .map(|i| {
            let attached = (0..buses).filter(|_| rng.random_bool(0.5)).collect();
            (
                attached,
                MODES[rng.random_range(0..3)],
                bridges.contains(&i),
            )
        })
        .collect();
    Topology { buses, tools }
}

pub fn random_ops(rng: &mut StdRng, len: usize) -> Vec<Op> {
    let group = |rng: &mut StdRng| {
        (0..rng.random_range(0..5))
            .map(|_| rng.random_range(0..12))
            .collect()
    };
    (0..len)
        .map(|_| {
            let tool = rng.random_range(0..10);
            let bus = rng.random_range(0..5);
            match rng.random_range(0..12) {
                0..6 => Op::Publish {
                    tool,
                    bus,
                    entities: group(rng),
                },
                6..8 => Op::Select {
                    tool,
                    entities: group(rng),
                },
                8..10 => Op::SetMode {
                    tool,
                    mode: MODES[rng.random_range(0..3)],
                },
                10 => Op::Attach { tool, bus },
                _ => Op::Detach { tool, bus },
            }
        })
        .collect()
}

pub struct Session {
    pub hub: Hub,
    pub buses: Vec<BusId>,
    pub tools: Vec<ToolId>,
    pool: Vec<EntityId>,
}

impl Session {
    pub fn build(model: &Model, topo: &Topology) -> Session {
        let mut hub = Hub::new();
        let buses: Vec<BusId> = (0..topo.buses)
            .map(|i| hub.create_bus(format!("b{i}")))
            .collect();
        let mut tools = Vec::new();
        for (i, (attached, mode, bridge)) in topo.tools.iter().enumerate() {
            let t = hub.create_tool(ToolKind::ALL[i % ToolKind::ALL.len()]);
            for &b in attached {
                hub.attach(model, t, buses[b]).unwrap();
            }
            hub.set_mode(model, t, *mode).unwrap();
            hub.set_bridge(model, t, *bridge).unwrap();
            tools.push(t);
        }
        let pool = model.entity_ids().take(12).collect();
        Session {
            hub,
            buses,
            tools,
            pool,
        }
    }

    fn entities(&self, picks: &BTreeSet<usize>) -> BTreeSet<EntityId> {
        picks
            .iter()
            .map(|&i| self.pool[i % self.pool.len()])
            .collect()
    }
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Buses a publication must reach: follow every non-frozen bridge other than
/// the producer.
fn reachable(hub: &Hub, producer: ToolId, start: &BTreeSet<BusId>) -> BTreeSet<BusId> {
    let mut seen = start.clone();
    let mut stack: Vec<BusId> = start.iter().copied().collect();
    while let Some(b) = stack.pop() {
        for &t in &hub.bus(b).unwrap().tools {
            let tool = hub.tool(t).unwrap();
            if t == producer || !tool.bridge || tool.mode == Mode::Frozen {
                continue;
            }
            for &next in &tool.buses {
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
    }
    seen
}

pub type States = BTreeMap<ToolId, (BTreeSet<EntityId>, BTreeSet<EntityId>)>;

pub fn snapshot(hub: &Hub) -> States {
    hub.tools()
        .map(|t| (t.id, (t.current.clone(), t.highlighted.clone())))
        .collect()
}

fn check_publication(
    hub: &Hub,
    before: &States,
    producer: ToolId,
    start: &BTreeSet<BusId>,
    entities: &BTreeSet<EntityId>,
    p: &Publication,
) -> Result<(), String> {
    let reach = reachable(hub, producer, start);
    let reached: Vec<BusId> = p.messages.iter().map(|m| m.bus).collect();
    let distinct: BTreeSet<BusId> = reached.iter().copied().collect();
    ensure!(
        reached.len() == distinct.len(),
        "a bus saw lineage {:?} twice",
        p.lineage
    );
    ensure!(
        distinct == reach,
        "reached {distinct:?}, expected {reach:?}"
    );
    let bound = hub.buses().count() * hub.tools().count();
    ensure!(
        p.deliveries.len() <= bound,
        "{} deliveries exceed {bound}",
        p.deliveries.len()
    );

    let mut previous_visited = BTreeSet::new();
    for m in &p.messages {
        ensure!(Some(m.lineage) == p.lineage, "lineage changed");
        ensure!(
            m.visited_buses.contains(&m.bus),
            "visited set misses its own bus"
        );
        ensure!(
            m.visited_buses.is_superset(&previous_visited),
            "visited set shrank"
        );
        previous_visited = m.visited_buses.clone();
        ensure!(&m.entities == entities, "forward changed the entities");

        let expected: BTreeSet<ToolId> = hub
            .bus(m.bus)
            .unwrap()
            .tools
            .iter()
            .copied()
            .filter(|&t| t != producer && Some(t) != m.forwarded_by)
            .filter(|&t| hub.tool(t).unwrap().mode != Mode::Frozen)
            .collect();
        let got: Vec<ToolId> = p
            .deliveries
            .iter()
            .filter(|(id, _)| *id == m.id)
            .map(|&(_, t)| t)
            .collect();
        ensure!(
            got.len() == expected.len(),
            "message {:?}: {got:?} vs {expected:?}",
            m.id
        );
        ensure!(
            got.into_iter().collect::<BTreeSet<_>>() == expected,
            "wrong receivers"
        );
    }

    let receivers: BTreeSet<ToolId> = p.deliveries.iter().map(|&(_, t)| t).collect();
    for tool in hub.tools() {
        let (old_current, old_highlighted) = &before[&tool.id];
        let received = receivers.contains(&tool.id);
        match tool.mode {
            Mode::Frozen => {
                ensure!(
                    &tool.current == old_current,
                    "frozen tool {} changed",
                    tool.id
                );
                ensure!(
                    &tool.highlighted == old_highlighted,
                    "frozen tool {} highlighted",
                    tool.id
                );
            }
            Mode::Highlighting => {
                ensure!(
                    &tool.current == old_current,
                    "highlighting tool {} changed",
                    tool.id
                );
                let expect = if received {
                    entities.intersection(old_current).copied().collect()
                } else {
                    old_highlighted.clone()
                };
                ensure!(
                    tool.highlighted == expect,
                    "tool {} highlights {:?}",
                    tool.id,
                    tool.highlighted
                );
            }
            Mode::Following => {
                ensure!(
                    tool.highlighted.is_empty(),
                    "following tool {} highlights",
                    tool.id
                );
                let expect = if received || tool.id == producer {
                    entities
                } else {
                    old_current
                };
                ensure!(
                    &tool.current == expect,
                    "following tool {} shows {:?}",
                    tool.id,
                    tool.current
                );
            }
        }
    }
    Ok(())
}

fn publish_step(
    model: &Model,
    s: &mut Session,
    t: ToolId,
    bus: Option<BusId>,
    picks: &BTreeSet<usize>,
    before: &States,
) -> Result<(), String> {
    let group = s.entities(picks);
    let attached = s.hub.tool(t).unwrap().buses.clone();
    let (start, result) = match bus {
        Some(b) => (
            BTreeSet::from([b]),
            s.hub.publish(model, t, b, group.clone()),
        ),
        None => (attached.clone(), s.hub.select(model, t, group.clone())),
    };
    match result {
        Ok(p) => check_publication(&s.hub, before, t, &start, &group, &p),
        Err(BusError::Detached { .. }) => {
            ensure!(!start.is_subset(&attached), "attached tool refused");
            ensure!(
                &snapshot(&s.hub) == before,
                "refused publication changed state"
            );
            Ok(())
        }
        Err(BusError::NoBus(_)) => {
            ensure!(attached.is_empty(), "attached tool reported no bus");
            Ok(())
        }
        Err(e) => Err(format!("unexpected {e}")),
    }
}

/// Applies `ops`, checking every step.
pub fn run(model: &Model, topo: &Topology, ops: &[Op]) -> Result<Session, String> {
    let mut s = Session::build(model, topo);
    let n_tools = s.tools.len();
    let n_buses = s.buses.len();
    for op in ops {
        let before = snapshot(&s.hub);
        match op {
            Op::Publish {
                tool,
                bus,
                entities,
            } => {
                let (t, b) = (s.tools[tool % n_tools], s.buses[bus % n_buses]);
                publish_step(model, &mut s, t, Some(b), entities, &before)?;
            }
            Op::Select { tool, entities } => {
                let t = s.tools[tool % n_tools];
                publish_step(model, &mut s, t, None, entities, &before)?;
            }
            Op::SetMode { tool, mode } => {
                let t = s.tools[tool % n_tools];
                s.hub.set_mode(model, t, *mode).unwrap();
                let after = s.hub.tool(t).unwrap();
                ensure!(
                    after.current == before[&t].0,
                    "mode change altered entities"
                );
                ensure!(
                    after.mode == Mode::Highlighting || after.highlighted.is_empty(),
                    "highlight survived a mode change"
                );
            }
            Op::Attach { tool, bus } => {
                let (t, b) = (s.tools[tool % n_tools], s.buses[bus % n_buses]);
                s.hub.attach(model, t, b).unwrap();
                ensure!(snapshot(&s.hub) == before, "attach altered state");
            }
            Op::Detach { tool, bus } => {
                let (t, b) = (s.tools[tool % n_tools], s.buses[bus % n_buses]);
                s.hub.detach(model, t, b).unwrap();
                ensure!(snapshot(&s.hub) == before, "detach altered state");
            }
        }
    }
    Ok(s)
}

/// Runs the sequence twice and compares histories, states and events.
pub fn check(model: &Model, topo: &Topology, ops: &[Op]) -> Result<(), String> {
    let mut first = run(model, topo, ops)?;
    let mut second = run(model, topo, ops)?;
    let histories = |s: &Session| s.hub.buses().map(|b| b.history.clone()).collect::<Vec<_>>();
    ensure!(
        histories(&first) == histories(&second),
        "histories differ between runs"
    );
    ensure!(
        snapshot(&first.hub) == snapshot(&second.hub),
        "states differ between runs"
    );
    ensure!(
        first.hub.take_events() == second.hub.take_events(),
        "events differ between runs"
    );
    Ok(())
}
