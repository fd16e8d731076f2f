//! Executable signaling procedures: attach, data delivery and handover
//! for both architectures, run as sequential message chains through the
//! event engine.
//!
//! Each procedure produces a [`Transcript`] whose message names and
//! `(from, to)` pairs follow the corresponding sequence chart, and
//! updates entity state (bindings, bearers, GRE bridges) as the chart's
//! narrative describes. In expected-value mode the measured latency of a
//! handover transcript equals the matching closed form.
//!
//! ```
//! use coresim::procedures::{handover_with_traffic, run_procedure, ProcedureKind, World};
//! use coresim::topology::Architecture;
//!
//! let mut world = World::with_defaults(Architecture::Icna).unwrap();
//! run_procedure(ProcedureKind::AttachIcna, &mut world).unwrap();
//! let bridged = handover_with_traffic(&mut world, 1.0, true, 0.0).unwrap();
//! assert_eq!(bridged.packets_lost, 0);
//!
//! let mut world = World::with_defaults(Architecture::Icna).unwrap();
//! run_procedure(ProcedureKind::AttachIcna, &mut world).unwrap();
//! let unbridged = handover_with_traffic(&mut world, 1.0, false, 0.0).unwrap();
//! assert!(unbridged.packets_lost > 0);
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::delay::{DelayConfig, DelayParams, HopCounts};
use crate::simnet::{Action, Engine, SimError, SimTime, TraceRecord, WirelessMode};
use crate::topology::{
    build_topology, serving_bs, Address, Architecture, BearerTable, Binding, BindingTable,
    InnerAddressAllocator, NodeId, NodeKind, Topology, TopologyError,
};

#[derive(Debug, Error)]
pub enum ProcedureError {
    #[error("procedure {procedure} cannot run on a {arch} world")]
    InvalidScenario {
        procedure: &'static str,
        arch: &'static str,
    },
    #[error("invalid state: {0}")]
    InvalidState(&'static str),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Closed vocabulary of signaling message names. `LocationQueryRequest`
/// and `LocationQueryResponse` carry the controller lookups the data
/// delivery charts show without naming.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageName {
    AttachRequest,
    AttachAccept,
    AttachComplete,
    UpdateLocationRequest,
    UpdateLocationAnswer,
    CreateSessionRequest,
    CreateSessionResponse,
    ModifyBearerRequest,
    ModifyBearerResponse,
    InitialContextSetupRequest,
    InitialContextSetupResponse,
    HandoverRequest,
    HandoverAcknowledgment,
    HandoverRequired,
    HandoverCommand,
    HandoverNotify,
    PathSwitchRequest,
    PathSwitchResponse,
    PathModifyRequest,
    PathModifyResponse,
    GatewayAllocationRequest,
    GatewayAllocationResponse,
    IpAllocationRequest,
    IpAllocationResponse,
    LocationQueryRequest,
    LocationQueryResponse,
    ReleaseResources,
}

impl MessageName {
    pub fn as_str(&self) -> &'static str {
        match self {
            MessageName::AttachRequest => "AttachRequest",
            MessageName::AttachAccept => "AttachAccept",
            MessageName::AttachComplete => "AttachComplete",
            MessageName::UpdateLocationRequest => "UpdateLocationRequest",
            MessageName::UpdateLocationAnswer => "UpdateLocationAnswer",
            MessageName::CreateSessionRequest => "CreateSessionRequest",
            MessageName::CreateSessionResponse => "CreateSessionResponse",
            MessageName::ModifyBearerRequest => "ModifyBearerRequest",
            MessageName::ModifyBearerResponse => "ModifyBearerResponse",
            MessageName::InitialContextSetupRequest => "InitialContextSetupRequest",
            MessageName::InitialContextSetupResponse => "InitialContextSetupResponse",
            MessageName::HandoverRequest => "HandoverRequest",
            MessageName::HandoverAcknowledgment => "HandoverAcknowledgment",
            MessageName::HandoverRequired => "HandoverRequired",
            MessageName::HandoverCommand => "HandoverCommand",
            MessageName::HandoverNotify => "HandoverNotify",
            MessageName::PathSwitchRequest => "PathSwitchRequest",
            MessageName::PathSwitchResponse => "PathSwitchResponse",
            MessageName::PathModifyRequest => "PathModifyRequest",
            MessageName::PathModifyResponse => "PathModifyResponse",
            MessageName::GatewayAllocationRequest => "GatewayAllocationRequest",
            MessageName::GatewayAllocationResponse => "GatewayAllocationResponse",
            MessageName::IpAllocationRequest => "IpAllocationRequest",
            MessageName::IpAllocationResponse => "IpAllocationResponse",
            MessageName::LocationQueryRequest => "LocationQueryRequest",
            MessageName::LocationQueryResponse => "LocationQueryResponse",
            MessageName::ReleaseResources => "ReleaseResources",
        }
    }
}

impl fmt::Display for MessageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One signaling message in flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ControlMessage {
    pub name: MessageName,
    pub from: NodeId,
    pub to: NodeId,
}

/// One transcript entry: a control message or a data-plane hop.
#[derive(Debug, Clone, PartialEq)]
pub enum TranscriptEntry {
    Control(ControlMessage),
    Data {
        from: NodeId,
        to: NodeId,
        size_bytes: u64,
    },
}

impl TranscriptEntry {
    pub fn label(&self) -> &'static str {
        match self {
            TranscriptEntry::Control(m) => m.name.as_str(),
            TranscriptEntry::Data { .. } => "Data",
        }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match self {
            TranscriptEntry::Control(m) => (m.from, m.to),
            TranscriptEntry::Data { from, to, .. } => (*from, *to),
        }
    }
}

/// Ordered log of a procedure run plus its headline counters. Entries
/// are stamped with arrival times; `start` is the instant the first
/// message departed.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub start: SimTime,
    pub entries: Vec<(SimTime, TranscriptEntry)>,
    pub packets_delivered: u64,
    pub packets_lost: u64,
    pub packets_in_flight: u64,
    pub packets_injected: u64,
}

impl Transcript {
    /// Completion time minus start time, ms.
    pub fn final_latency_ms(&self) -> f64 {
        match self.entries.last() {
            Some((last, _)) => last.saturating_sub(self.start).as_ms(),
            None => 0.0,
        }
    }

    pub fn message_labels(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(_, e)| e.label()).collect()
    }

    /// Line-oriented export: `t_ms name from to`.
    pub fn export_lines(&self) -> String {
        let mut out = String::new();
        for (t, e) in &self.entries {
            let (from, to) = e.endpoints();
            out.push_str(&format!("{:.6} {} {} {}\n", t.as_ms(), e.label(), from, to));
        }
        out
    }
}

/// Keyed GRE tunnel bridging the source and target base stations of one
/// UE's handover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreBridge {
    pub key: u32,
    pub source_bs: NodeId,
    pub target_bs: NodeId,
    pub active: bool,
}

/// The nine runnable procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcedureKind {
    Attach4g,
    AttachIcna,
    DataMobileToInternet,
    DataMobileToMobile,
    DataInternetToMobile,
    X2Handover4g,
    S1Handover4g,
    InterGatewayHandoverIcna,
    IntraGatewayHandoverIcna,
}

impl ProcedureKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProcedureKind::Attach4g => "attach_4g",
            ProcedureKind::AttachIcna => "attach_icna",
            ProcedureKind::DataMobileToInternet => "data_mh_ih",
            ProcedureKind::DataMobileToMobile => "data_mh_mh",
            ProcedureKind::DataInternetToMobile => "data_ih_mh",
            ProcedureKind::X2Handover4g => "x2_ho_4g",
            ProcedureKind::S1Handover4g => "s1_ho_4g",
            ProcedureKind::InterGatewayHandoverIcna => "inter_gw_ho_icna",
            ProcedureKind::IntraGatewayHandoverIcna => "intra_gw_ho_icna",
        }
    }

    pub fn architecture(&self) -> Architecture {
        match self {
            ProcedureKind::Attach4g | ProcedureKind::X2Handover4g | ProcedureKind::S1Handover4g => {
                Architecture::Epc4g
            }
            _ => Architecture::Icna,
        }
    }
}

/// Topology plus all mutable entity state for one simulation run.
pub struct World {
    pub arch: Architecture,
    pub topology: Topology,
    pub params: DelayParams,
    pub hops: HopCounts,
    pub delay_cfg: DelayConfig,
    pub mode: WirelessMode,
    pub bindings: BindingTable,
    pub bearers: BearerTable,
    pub attached: BTreeMap<NodeId, NodeId>,
    pub ue_inner: BTreeMap<NodeId, Address>,
    pub bridges: BTreeMap<NodeId, GreBridge>,
    inner_alloc: InnerAddressAllocator,
    next_gre_key: u32,
}

impl World {
    pub fn new(
        arch: Architecture,
        params: DelayParams,
        hops: HopCounts,
        delay_cfg: DelayConfig,
        mode: WirelessMode,
        ue_per_bs: u32,
    ) -> Result<World, ProcedureError> {
        let topology = build_topology(&hops, arch, ue_per_bs)?;
        Ok(World {
            arch,
            topology,
            params,
            hops,
            delay_cfg,
            mode,
            bindings: BindingTable::default(),
            bearers: BearerTable::default(),
            attached: BTreeMap::new(),
            ue_inner: BTreeMap::new(),
            bridges: BTreeMap::new(),
            inner_alloc: InnerAddressAllocator::default(),
            next_gre_key: 0,
        })
    }

    pub fn with_defaults(arch: Architecture) -> Result<World, ProcedureError> {
        World::new(
            arch,
            DelayParams::default(),
            HopCounts::default(),
            DelayConfig::default(),
            WirelessMode::ExpectedValue,
            1,
        )
    }

    fn node(&self, kind: NodeKind, index: u32) -> NodeId {
        NodeId::new(kind, index)
    }

    fn single(&self, kind: NodeKind) -> Result<NodeId, ProcedureError> {
        self.topology
            .nodes_of_kind(kind)
            .first()
            .copied()
            .ok_or(ProcedureError::InvalidState("required node kind missing"))
    }

    fn require_attached(&self, ue: NodeId) -> Result<NodeId, ProcedureError> {
        self.attached
            .get(&ue)
            .copied()
            .ok_or(ProcedureError::InvalidState("UE is not attached"))
    }

    fn allocate_gre_key(&mut self) -> u32 {
        self.next_gre_key += 1;
        self.next_gre_key
    }
}

enum Step {
    Control(MessageName, NodeId, NodeId),
    Data(NodeId, NodeId),
}

/// Runs a sequential message chain: each step departs when the previous
/// one arrives, the sequence-chart convention.
struct ChainRunner<'w> {
    world: &'w World,
    engine: Engine<TranscriptEntry>,
    transcript: Transcript,
    clock: SimTime,
}

impl<'w> ChainRunner<'w> {
    fn new(world: &'w World) -> ChainRunner<'w> {
        ChainRunner {
            world,
            engine: Engine::new(world.mode),
            transcript: Transcript::default(),
            clock: SimTime::ZERO,
        }
    }

    fn run(&mut self, steps: &[Step]) -> Result<(), ProcedureError> {
        for step in steps {
            self.step(step)?;
        }
        Ok(())
    }

    /// Transmit one step over the shortest path and record its arrival.
    fn step(&mut self, step: &Step) -> Result<SimTime, ProcedureError> {
        let (from, to, size, entry) = match step {
            Step::Control(name, from, to) => (
                *from,
                *to,
                self.world.params.control_packet_bytes,
                TranscriptEntry::Control(ControlMessage {
                    name: *name,
                    from: *from,
                    to: *to,
                }),
            ),
            Step::Data(from, to) => (
                *from,
                *to,
                self.world.params.data_packet_bytes,
                TranscriptEntry::Data {
                    from: *from,
                    to: *to,
                    size_bytes: self.world.params.data_packet_bytes as u64,
                },
            ),
        };
        let path = self.world.topology.route(from, to)?;
        let delay = self.engine.transmit(
            size,
            &path,
            &self.world.topology,
            &self.world.params,
            &self.world.delay_cfg,
        )?;
        let at = self.clock + delay;
        self.engine.schedule(
            at,
            Action::Deliver {
                payload: entry.clone(),
                to,
            },
        )?;
        let ev = self.engine.pop_due(at).expect("just scheduled");
        self.engine.record_trace(TraceRecord {
            at: ev.at,
            seq: ev.seq,
            src: from,
            dst: to,
            kind: entry.label().to_string(),
            size_bytes: size as u64,
        });
        self.transcript.entries.push((ev.at, entry));
        self.clock = at;
        Ok(at)
    }

    fn finish(self) -> (Transcript, Vec<TraceRecord>) {
        (self.transcript, self.engine.trace().to_vec())
    }
}

/// Run one procedure on `world`, mutating entity state and returning the
/// transcript.
pub fn run_procedure(kind: ProcedureKind, world: &mut World) -> Result<Transcript, ProcedureError> {
    let (transcript, _) = run_procedure_traced(kind, world)?;
    Ok(transcript)
}

/// As [`run_procedure`], also returning the engine's event trace.
pub fn run_procedure_traced(
    kind: ProcedureKind,
    world: &mut World,
) -> Result<(Transcript, Vec<TraceRecord>), ProcedureError> {
    if kind.architecture() != world.arch {
        return Err(ProcedureError::InvalidScenario {
            procedure: kind.as_str(),
            arch: world.arch.as_str(),
        });
    }
    match kind {
        ProcedureKind::Attach4g => attach_4g(world),
        ProcedureKind::AttachIcna => attach_icna(world),
        ProcedureKind::DataMobileToInternet => data_mh_ih(world),
        ProcedureKind::DataMobileToMobile => data_mh_mh(world),
        ProcedureKind::DataInternetToMobile => data_ih_mh(world),
        ProcedureKind::X2Handover4g => handover_x2(world),
        ProcedureKind::S1Handover4g => handover_s1(world),
        ProcedureKind::InterGatewayHandoverIcna => handover_inter_gw(world, true),
        ProcedureKind::IntraGatewayHandoverIcna => handover_intra_gw(world),
    }
}

type Traced = Result<(Transcript, Vec<TraceRecord>), ProcedureError>;

fn attach_4g(world: &mut World) -> Traced {
    use MessageName::*;
    let ue = world.node(NodeKind::Ue, 0);
    let bs = serving_bs(&world.topology, ue)?;
    let mme = world.single(NodeKind::Mme)?;
    let hss = world.single(NodeKind::Hss)?;
    let sgw = world.single(NodeKind::Sgw)?;
    let pgw = world.single(NodeKind::Pgw)?;
    let steps = [
        Step::Control(AttachRequest, ue, bs),
        Step::Control(AttachRequest, bs, mme),
        Step::Control(UpdateLocationRequest, mme, hss),
        Step::Control(UpdateLocationAnswer, hss, mme),
        Step::Control(CreateSessionRequest, mme, sgw),
        Step::Control(ModifyBearerRequest, sgw, pgw),
        Step::Control(ModifyBearerResponse, pgw, sgw),
        Step::Control(CreateSessionResponse, sgw, mme),
        Step::Control(AttachAccept, mme, ue),
        Step::Control(InitialContextSetupRequest, mme, bs),
        Step::Control(InitialContextSetupResponse, bs, mme),
        Step::Control(AttachComplete, ue, mme),
        Step::Control(ModifyBearerRequest, mme, sgw),
        Step::Control(ModifyBearerResponse, sgw, mme),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let out = runner.finish();
    world.bearers.allocate(ue, sgw, pgw);
    world.attached.insert(ue, bs);
    let inner = world.inner_alloc.allocate();
    world.ue_inner.insert(ue, inner);
    Ok(out)
}

fn attach_icna(world: &mut World) -> Traced {
    use MessageName::*;
    let ue = world.node(NodeKind::Ue, 0);
    let bs = serving_bs(&world.topology, ue)?;
    let uce = world.single(NodeKind::Uce)?;
    let hss = world.single(NodeKind::Hss)?;
    let cgw = world.single(NodeKind::Cgw)?;
    let steps = [
        Step::Control(AttachRequest, ue, bs),
        Step::Control(AttachRequest, bs, uce),
        Step::Control(UpdateLocationRequest, uce, hss),
        Step::Control(UpdateLocationAnswer, hss, uce),
        Step::Control(GatewayAllocationRequest, uce, cgw),
        Step::Control(GatewayAllocationResponse, cgw, uce),
        Step::Control(IpAllocationRequest, bs, uce),
        Step::Control(IpAllocationResponse, uce, bs),
        Step::Control(AttachAccept, uce, bs),
        Step::Control(AttachAccept, bs, ue),
        Step::Control(AttachComplete, ue, bs),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let out = runner.finish();
    let inner = world.inner_alloc.allocate();
    let serving_outer = world
        .topology
        .outer_address(bs)
        .ok_or(ProcedureError::InvalidState("BS has no locator"))?;
    let gateway = world
        .topology
        .outer_address(cgw)
        .ok_or(ProcedureError::InvalidState("CGW has no locator"))?;
    world.bindings.bind(
        inner,
        Binding {
            serving_bs: bs,
            serving_outer,
            gateway,
        },
    );
    world.ue_inner.insert(ue, inner);
    world.attached.insert(ue, bs);
    Ok(out)
}

fn data_mh_ih(world: &mut World) -> Traced {
    let ue = world.node(NodeKind::Ue, 0);
    let bs = world.require_attached(ue)?;
    let cgw = world.single(NodeKind::Cgw)?;
    let host = world.single(NodeKind::InternetHost)?;
    let steps = [
        Step::Data(ue, bs),
        Step::Data(bs, cgw),
        Step::Data(cgw, host),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let mut out = runner.finish();
    out.0.packets_injected = 1;
    out.0.packets_delivered = 1;
    Ok(out)
}

fn data_mh_mh(world: &mut World) -> Traced {
    use MessageName::*;
    let ue1 = world.node(NodeKind::Ue, 0);
    let ue2 = world.node(NodeKind::Ue, 1);
    let bs1 = world.require_attached(ue1)?;
    let bs2 = world.require_attached(ue2)?;
    let uce = world.single(NodeKind::Uce)?;
    let mut steps = vec![
        Step::Data(ue1, bs1),
        Step::Control(LocationQueryRequest, bs1, uce),
        Step::Control(LocationQueryResponse, uce, bs1),
    ];
    if bs1 == bs2 {
        // Same-BS case: deliver locally, no encapsulation leg.
        steps.push(Step::Data(bs1, ue2));
    } else {
        steps.push(Step::Data(bs1, bs2));
        steps.push(Step::Data(bs2, ue2));
    }
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let mut out = runner.finish();
    out.0.packets_injected = 1;
    out.0.packets_delivered = 1;
    Ok(out)
}

fn data_ih_mh(world: &mut World) -> Traced {
    use MessageName::*;
    let ue = world.node(NodeKind::Ue, 0);
    let bs = world.require_attached(ue)?;
    let uce = world.single(NodeKind::Uce)?;
    let cgw = world.single(NodeKind::Cgw)?;
    let host = world.single(NodeKind::InternetHost)?;
    let steps = [
        Step::Data(host, cgw),
        Step::Control(LocationQueryRequest, cgw, uce),
        Step::Control(LocationQueryResponse, uce, cgw),
        Step::Data(cgw, bs),
        Step::Data(bs, ue),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let mut out = runner.finish();
    out.0.packets_injected = 1;
    out.0.packets_delivered = 1;
    Ok(out)
}

fn handover_endpoints(world: &World) -> Result<(NodeId, NodeId, NodeId), ProcedureError> {
    let ue = NodeId::new(NodeKind::Ue, 0);
    let source = world.require_attached(ue)?;
    let target = world
        .topology
        .nodes_of_kind(NodeKind::BaseStation)
        .into_iter()
        .find(|&bs| bs != source)
        .ok_or(ProcedureError::InvalidState("no target BS available"))?;
    Ok((ue, source, target))
}

fn handover_x2(world: &mut World) -> Traced {
    use MessageName::*;
    let (ue, source, target) = handover_endpoints(world)?;
    let mme = world.single(NodeKind::Mme)?;
    let sgw = world.single(NodeKind::Sgw)?;
    let pgw = world.single(NodeKind::Pgw)?;
    let steps = [
        Step::Control(HandoverRequest, source, target),
        Step::Control(HandoverAcknowledgment, target, source),
        Step::Control(PathSwitchRequest, target, mme),
        Step::Control(CreateSessionRequest, mme, sgw),
        Step::Control(ModifyBearerRequest, sgw, pgw),
        Step::Control(ModifyBearerResponse, pgw, sgw),
        Step::Control(CreateSessionResponse, sgw, mme),
        Step::Control(PathSwitchResponse, mme, target),
        Step::Control(ReleaseResources, mme, source),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let out = runner.finish();
    world.attached.insert(ue, target);
    Ok(out)
}

fn handover_s1(world: &mut World) -> Traced {
    use MessageName::*;
    let (ue, source, target) = handover_endpoints(world)?;
    let mme = world.single(NodeKind::Mme)?;
    let sgw = world.single(NodeKind::Sgw)?;
    let pgw = world.single(NodeKind::Pgw)?;
    let steps = [
        Step::Control(HandoverRequired, source, mme),
        Step::Control(HandoverRequest, mme, target),
        Step::Control(HandoverAcknowledgment, target, mme),
        Step::Control(HandoverCommand, mme, source),
        Step::Control(HandoverNotify, source, mme),
        Step::Control(ModifyBearerRequest, mme, sgw),
        Step::Control(ModifyBearerRequest, sgw, pgw),
        Step::Control(ModifyBearerResponse, pgw, sgw),
        Step::Control(ModifyBearerResponse, sgw, mme),
        Step::Control(ReleaseResources, mme, source),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let out = runner.finish();
    world.attached.insert(ue, target);
    Ok(out)
}

/// Inter-gateway handover. Key instants are reported by
/// [`handover_inter_gw_timed`] for the traffic overlay.
fn handover_inter_gw(world: &mut World, commit_state: bool) -> Traced {
    let (out, _) = handover_inter_gw_timed(world, commit_state)?;
    Ok(out)
}

/// Instants of the inter-gateway handover that govern packet fate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HandoverWindow {
    /// UE detaches from the source BS; the GRE bridge is active from here.
    pub detach: SimTime,
    /// CGW starts encapsulating toward the target BS.
    pub gateway_commit: SimTime,
    /// Source BS releases the GRE bridge.
    pub release: SimTime,
}

fn handover_inter_gw_timed(
    world: &mut World,
    commit_state: bool,
) -> Result<((Transcript, Vec<TraceRecord>), HandoverWindow), ProcedureError> {
    use MessageName::*;
    let (ue, source, target) = handover_endpoints(world)?;
    let uce = world.single(NodeKind::Uce)?;
    let cgw = world.single(NodeKind::Cgw)?;

    let mut runner = ChainRunner::new(world);
    runner.step(&Step::Control(HandoverRequest, source, target))?;
    let detach = runner.step(&Step::Control(HandoverAcknowledgment, target, source))?;
    runner.step(&Step::Control(PathSwitchRequest, target, uce))?;
    runner.step(&Step::Control(PathSwitchResponse, uce, target))?;
    let gateway_commit = runner.step(&Step::Control(PathModifyRequest, uce, cgw))?;
    runner.step(&Step::Control(PathModifyResponse, cgw, uce))?;
    let release = runner.step(&Step::Control(ReleaseResources, target, source))?;
    let out = runner.finish();

    let key = world.allocate_gre_key();
    if commit_state {
        let inner = world
            .ue_inner
            .get(&ue)
            .copied()
            .ok_or(ProcedureError::InvalidState("UE has no inner address"))?;
        let outer = world
            .topology
            .outer_address(target)
            .ok_or(ProcedureError::InvalidState("target BS has no locator"))?;
        world.bindings.update_serving(inner, target, outer)?;
        world.attached.insert(ue, target);
        // Bridge existed between detach and release; it ends inactive.
        world.bridges.insert(
            ue,
            GreBridge {
                key,
                source_bs: source,
                target_bs: target,
                active: false,
            },
        );
    }
    Ok((
        out,
        HandoverWindow {
            detach,
            gateway_commit,
            release,
        },
    ))
}

fn handover_intra_gw(world: &mut World) -> Traced {
    use MessageName::*;
    let (ue, source, target) = handover_endpoints(world)?;
    let uce = world.single(NodeKind::Uce)?;
    let cgw = world.single(NodeKind::Cgw)?;
    let steps = [
        Step::Control(HandoverRequired, source, uce),
        Step::Control(HandoverRequest, uce, target),
        Step::Control(HandoverAcknowledgment, target, uce),
        Step::Control(HandoverCommand, uce, source),
        Step::Control(ModifyBearerRequest, uce, cgw),
        Step::Control(ModifyBearerResponse, cgw, uce),
        Step::Control(ReleaseResources, uce, source),
    ];
    let mut runner = ChainRunner::new(world);
    runner.run(&steps)?;
    let out = runner.finish();
    let inner = world
        .ue_inner
        .get(&ue)
        .copied()
        .ok_or(ProcedureError::InvalidState("UE has no inner address"))?;
    let outer = world
        .topology
        .outer_address(target)
        .ok_or(ProcedureError::InvalidState("target BS has no locator"))?;
    world.bindings.update_serving(inner, target, outer)?;
    world.attached.insert(ue, target);
    Ok(out)
}

/// Inter-gateway handover overlaid with a continuous downlink flow from
/// the Internet host to the UE. With `bridging` the source BS forwards
/// packets that arrive during the handover window over the GRE tunnel;
/// without it those packets are dropped and counted.
pub fn handover_with_traffic(
    world: &mut World,
    downlink_rate_per_ms: f64,
    bridging: bool,
    trigger_at_ms: f64,
) -> Result<Transcript, ProcedureError> {
    if world.arch != Architecture::Icna {
        return Err(ProcedureError::InvalidScenario {
            procedure: "handover_with_traffic",
            arch: world.arch.as_str(),
        });
    }
    let ue = NodeId::new(NodeKind::Ue, 0);
    let source = world.require_attached(ue)?;
    let cgw = world.single(NodeKind::Cgw)?;
    let host = world.single(NodeKind::InternetHost)?;

    // Per-leg delays are deterministic in expected-value mode, so the
    // control chain can be laid out first and the data packets processed
    // as events against its instants.
    let trigger = SimTime::from_ms(trigger_at_ms);
    let (mut chain, window) = {
        let (out, w) = handover_inter_gw_timed(world, true)?;
        (out.0, w)
    };
    // Shift the control chain to the trigger time.
    chain.start = trigger;
    for (t, _) in chain.entries.iter_mut() {
        *t = *t + trigger;
    }
    let window = HandoverWindow {
        detach: window.detach + trigger,
        gateway_commit: window.gateway_commit + trigger,
        release: window.release + trigger,
    };
    let target = world
        .attached
        .get(&ue)
        .copied()
        .ok_or(ProcedureError::InvalidState("UE lost attachment"))?;

    #[derive(Clone, Debug, PartialEq)]
    enum Stage {
        Gateway,
        BaseStation { bs: NodeId },
        Handset,
    }

    let mut engine: Engine<Stage> = Engine::new(world.mode);
    let params = world.params;
    let cfg = world.delay_cfg;
    let sd = params.data_packet_bytes;

    // Inject from t=0 until the bridge is released, then drain.
    let mut injected = 0u64;
    if downlink_rate_per_ms > 0.0 {
        let host_leg = world.topology.route(host, cgw)?;
        let mut k = 0u64;
        loop {
            let t_inject = SimTime::from_ms(k as f64 / downlink_rate_per_ms);
            if t_inject > window.release {
                break;
            }
            let d = engine.transmit(sd, &host_leg, &world.topology, &params, &cfg)?;
            engine.schedule(
                t_inject + d,
                Action::Deliver {
                    payload: Stage::Gateway,
                    to: cgw,
                },
            )?;
            injected += 1;
            k += 1;
        }
    }

    let mut transcript = Transcript {
        start: chain.start,
        entries: chain.entries,
        packets_injected: injected,
        ..Default::default()
    };

    let horizon = SimTime::from_ms(window.release.as_ms() + 10_000.0);
    while let Some(ev) = engine.pop_due(horizon) {
        let t = ev.at;
        let Action::Deliver { payload, to } = ev.action else {
            continue;
        };
        match payload {
            Stage::Gateway => {
                // Encapsulation target reflects the gateway's binding at
                // forwarding time.
                let bs = if t < window.gateway_commit {
                    source
                } else {
                    target
                };
                let path = world.topology.route(cgw, bs)?;
                let d = engine.transmit(sd, &path, &world.topology, &params, &cfg)?;
                engine.schedule(
                    t + d,
                    Action::Deliver {
                        payload: Stage::BaseStation { bs },
                        to: bs,
                    },
                )?;
            }
            Stage::BaseStation { bs } => {
                if bs == target {
                    let path = world.topology.route(bs, ue)?;
                    let d = engine.transmit(sd, &path, &world.topology, &params, &cfg)?;
                    engine.schedule(
                        t + d,
                        Action::Deliver {
                            payload: Stage::Handset,
                            to: ue,
                        },
                    )?;
                } else if t < window.detach {
                    // UE still listening to the source BS.
                    let path = world.topology.route(bs, ue)?;
                    let d = engine.transmit(sd, &path, &world.topology, &params, &cfg)?;
                    engine.schedule(
                        t + d,
                        Action::Deliver {
                            payload: Stage::Handset,
                            to: ue,
                        },
                    )?;
                } else if bridging && t <= window.release {
                    // Forward over the GRE bridge to the target BS.
                    let path = world.topology.route(bs, target)?;
                    let d = engine.transmit(sd, &path, &world.topology, &params, &cfg)?;
                    engine.schedule(
                        t + d,
                        Action::Deliver {
                            payload: Stage::BaseStation { bs: target },
                            to: target,
                        },
                    )?;
                } else {
                    transcript.packets_lost += 1;
                    transcript.entries.push((
                        t,
                        TranscriptEntry::Data {
                            from: bs,
                            to: ue,
                            size_bytes: 0,
                        },
                    ));
                }
            }
            Stage::Handset => {
                transcript.packets_delivered += 1;
                let _ = to;
            }
        }
    }
    transcript.packets_in_flight =
        injected - transcript.packets_delivered - transcript.packets_lost;
    transcript.entries.sort_by_key(|(t, _)| *t);
    Ok(transcript)
}

/// Simulated total-transmission-delay composite: the exact legs the
/// closed form counts, transmitted one after another over the realized
/// topology. Pairs with [`crate::delay::ttd_epc`] / [`crate::delay::ttd_icna`].
pub fn simulate_composite_ttd(world: &mut World) -> Result<SimTime, ProcedureError> {
    let mut engine: Engine<()> = Engine::new(world.mode);
    let p = world.params;
    let cfg = world.delay_cfg;
    let sc = p.control_packet_bytes;
    let sd = p.data_packet_bytes;
    let ue = NodeId::new(NodeKind::Ue, 0);
    let bs = serving_bs(&world.topology, ue)?;

    // (size, count, route) per closed-form term.
    let mut legs: Vec<(f64, u32, Vec<NodeId>)> = Vec::new();
    let wireless = world.topology.route(ue, bs)?;
    match world.arch {
        Architecture::Epc4g => {
            let mme = world.single(NodeKind::Mme)?;
            let hss = world.single(NodeKind::Hss)?;
            let sgw = world.single(NodeKind::Sgw)?;
            let pgw = world.single(NodeKind::Pgw)?;
            legs.push((sc, 4, wireless.clone()));
            legs.push((sc, 5, world.topology.route(bs, mme)?));
            legs.push((sc, 2, world.topology.route(mme, hss)?));
            legs.push((sc, 4, world.topology.route(mme, sgw)?));
            legs.push((sc, 2, world.topology.route(sgw, pgw)?));
            legs.push((sd, 2, wireless));
            legs.push((sd, 2, world.topology.route(mme, sgw)?));
            legs.push((sd, 2, world.topology.route(sgw, pgw)?));
        }
        Architecture::Icna => {
            let uce = world.single(NodeKind::Uce)?;
            let hss = world.single(NodeKind::Hss)?;
            let cgw = world.single(NodeKind::Cgw)?;
            legs.push((sc, 3, wireless.clone()));
            legs.push((sc, 5, world.topology.route(bs, uce)?));
            legs.push((sc, 2, world.topology.route(uce, hss)?));
            legs.push((sc, 2, world.topology.route(uce, cgw)?));
            legs.push((sd, 2, wireless));
            legs.push((sd, 2, world.topology.route(bs, cgw)?));
        }
    }
    let mut total = SimTime::ZERO;
    for (size, count, path) in legs {
        for _ in 0..count {
            total = total + engine.transmit(size, &path, &world.topology, &p, &cfg)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delay::{handover_delay, HandoverKind};

    fn icna_world() -> World {
        let mut w = World::with_defaults(Architecture::Icna).unwrap();
        run_procedure(ProcedureKind::AttachIcna, &mut w).unwrap();
        w
    }

    #[test]
    fn attach_icna_message_order() {
        let mut w = World::with_defaults(Architecture::Icna).unwrap();
        let t = run_procedure(ProcedureKind::AttachIcna, &mut w).unwrap();
        assert_eq!(
            t.message_labels(),
            vec![
                "AttachRequest",
                "AttachRequest",
                "UpdateLocationRequest",
                "UpdateLocationAnswer",
                "GatewayAllocationRequest",
                "GatewayAllocationResponse",
                "IpAllocationRequest",
                "IpAllocationResponse",
                "AttachAccept",
                "AttachAccept",
                "AttachComplete",
            ]
        );
        assert_eq!(w.bindings.len(), 1);
    }

    #[test]
    fn architecture_mismatch_is_rejected() {
        let mut w = World::with_defaults(Architecture::Icna).unwrap();
        assert!(matches!(
            run_procedure(ProcedureKind::X2Handover4g, &mut w),
            Err(ProcedureError::InvalidScenario { .. })
        ));
    }

    #[test]
    fn handover_without_attach_is_invalid_state() {
        let mut w = World::with_defaults(Architecture::Icna).unwrap();
        assert!(matches!(
            run_procedure(ProcedureKind::InterGatewayHandoverIcna, &mut w),
            Err(ProcedureError::InvalidState(_))
        ));
    }

    #[test]
    fn inter_gw_latency_matches_closed_form() {
        let mut w = icna_world();
        let t = run_procedure(ProcedureKind::InterGatewayHandoverIcna, &mut w).unwrap();
        let expect = handover_delay(HandoverKind::InterGatewayIcna, &w.params, &w.hops)
            .unwrap()
            .total_ms();
        assert!((t.final_latency_ms() - expect).abs() < 1e-6);
    }

    #[test]
    fn binding_tracks_last_committed_handover() {
        let mut w = icna_world();
        let ue = NodeId::new(NodeKind::Ue, 0);
        let inner = w.ue_inner[&ue];
        for _ in 0..5 {
            run_procedure(ProcedureKind::InterGatewayHandoverIcna, &mut w).unwrap();
            let expected_bs = w.attached[&ue];
            let expected_outer = w.topology.outer_address(expected_bs).unwrap();
            assert_eq!(w.bindings.lookup_outer(inner).unwrap(), expected_outer);
        }
    }

    #[test]
    fn bridged_handover_loses_nothing() {
        let mut w = icna_world();
        let t = handover_with_traffic(&mut w, 1.0, true, 5.0).unwrap();
        assert_eq!(t.packets_lost, 0);
        assert_eq!(t.packets_in_flight, 0);
        assert!(t.packets_delivered > 0);
        assert_eq!(t.packets_injected, t.packets_delivered + t.packets_lost);
    }

    #[test]
    fn unbridged_handover_drops_the_window() {
        let mut w = icna_world();
        let t = handover_with_traffic(&mut w, 1.0, false, 0.0).unwrap();
        // Window at defaults: detach 28.016 ms, commit 70.04 ms.
        assert!(t.packets_lost >= 42, "lost {}", t.packets_lost);
        assert_eq!(t.packets_injected, t.packets_delivered + t.packets_lost);
    }

    #[test]
    fn zero_rate_bridged_handover_is_clean() {
        let mut w = icna_world();
        let t = handover_with_traffic(&mut w, 0.0, true, 0.0).unwrap();
        assert_eq!(t.packets_injected, 0);
        assert_eq!(t.packets_lost, 0);
        assert!(w.bridges.values().all(|b| !b.active));
    }

    #[test]
    fn same_bs_data_path_stays_local() {
        let mut w = World::new(
            Architecture::Icna,
            DelayParams::default(),
            HopCounts::default(),
            DelayConfig::default(),
            WirelessMode::ExpectedValue,
            2, // UE0 and UE1 both on BS1
        )
        .unwrap();
        run_procedure(ProcedureKind::AttachIcna, &mut w).unwrap();
        // Attach UE1 manually at the same BS.
        let ue1 = NodeId::new(NodeKind::Ue, 1);
        let bs = serving_bs(&w.topology, ue1).unwrap();
        w.attached.insert(ue1, bs);
        let inner = w.inner_alloc.allocate();
        let outer = w.topology.outer_address(bs).unwrap();
        let gw = w
            .topology
            .outer_address(w.single(NodeKind::Cgw).unwrap())
            .unwrap();
        w.bindings.bind(
            inner,
            Binding {
                serving_bs: bs,
                serving_outer: outer,
                gateway: gw,
            },
        );
        w.ue_inner.insert(ue1, inner);

        let t = run_procedure(ProcedureKind::DataMobileToMobile, &mut w).unwrap();
        let labels = t.message_labels();
        assert_eq!(
            labels,
            vec![
                "Data",
                "LocationQueryRequest",
                "LocationQueryResponse",
                "Data"
            ]
        );
        // No entry touches a switch or the CGW.
        for (_, e) in &t.entries {
            let (from, to) = e.endpoints();
            for n in [from, to] {
                assert!(n.kind != NodeKind::Cgw && n.kind != NodeKind::L3Switch);
            }
        }
    }

    #[test]
    fn composite_ttd_matches_closed_form() {
        use crate::delay::{ttd_epc, ttd_icna};
        let mut w = icna_world();
        let sim = simulate_composite_ttd(&mut w).unwrap().as_ms();
        let analytic = ttd_icna(&w.params, &w.hops, &w.delay_cfg)
            .unwrap()
            .total_ms();
        assert!((sim - analytic).abs() < 1e-6, "{sim} vs {analytic}");

        let mut w4 = World::with_defaults(Architecture::Epc4g).unwrap();
        let sim = simulate_composite_ttd(&mut w4).unwrap().as_ms();
        let analytic = ttd_epc(&w4.params, &w4.hops, &w4.delay_cfg)
            .unwrap()
            .total_ms();
        assert!((sim - analytic).abs() < 1e-6, "{sim} vs {analytic}");
    }
}
