//! Network entities, addressing state and routing for both architectures.
//!
//! Topologies are generated from a [`HopCounts`] configuration: role
//! anchors (base stations, controllers, gateways) are joined by chains of
//! layer-3 switches whose lengths realize the configured shortest-path
//! hop counts exactly. Construction re-verifies every configured pair and
//! fails with [`TopologyError::Unrealizable`] when a shortcut through
//! another chain perturbs a count.
//!
//! ```
//! use coresim::delay::HopCounts;
//! use coresim::topology::{build_topology, Architecture, NodeId, NodeKind};
//!
//! let topo = build_topology(&HopCounts::default(), Architecture::Icna, 1).unwrap();
//! let bs1 = NodeId::new(NodeKind::BaseStation, 1);
//! let bs2 = NodeId::new(NodeKind::BaseStation, 2);
//! assert_eq!(topo.hop_count(bs1, bs2), Some(2)); // λ
//! ```

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::delay::HopCounts;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("hop counts admit no graph: {pair} realizes {got} hops, {want} configured")]
    Unrealizable {
        pair: &'static str,
        got: u32,
        want: u32,
    },
    #[error("no route between {0} and {1}")]
    NoRoute(NodeId, NodeId),
    #[error("node {0} not in topology")]
    UnknownNode(NodeId),
    #[error("no binding for inner address {0:#010x}")]
    UnknownUe(u32),
    #[error("outer addresses are locators, not destinations")]
    OuterAddressAsDestination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Ue,
    BaseStation,
    Sgw,
    Pgw,
    Mme,
    Hss,
    Uce,
    Cgw,
    L3Switch,
    InternetHost,
}

impl NodeKind {
    fn tag(&self) -> &'static str {
        match self {
            NodeKind::Ue => "UE",
            NodeKind::BaseStation => "BS",
            NodeKind::Sgw => "SGW",
            NodeKind::Pgw => "PGW",
            NodeKind::Mme => "MME",
            NodeKind::Hss => "HSS",
            NodeKind::Uce => "UCE",
            NodeKind::Cgw => "CGW",
            NodeKind::L3Switch => "L3S",
            NodeKind::InternetHost => "HOST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub kind: NodeKind,
    pub index: u32,
}

impl NodeId {
    pub fn new(kind: NodeKind, index: u32) -> NodeId {
        NodeId { kind, index }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.tag(), self.index)
    }
}

/// Which of the two architectures a topology realizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Architecture {
    Epc4g,
    Icna,
}

impl Architecture {
    pub fn as_str(&self) -> &'static str {
        match self {
            Architecture::Epc4g => "4g",
            Architecture::Icna => "icna",
        }
    }
}

/// Disjoint address spaces: UE identifiers, node locators, everything else.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AddressSpace {
    MobileInner,
    CoreOuter,
    External,
}

pub const MOBILE_INNER_BASE: u32 = 0x0A00_0000; // 10.0.0.0/8
pub const CORE_OUTER_BASE: u32 = 0xC0A8_0000; // 192.168.0.0/16
pub const EXTERNAL_BASE: u32 = 0x0808_0800;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Address {
    pub value: u32,
}

impl Address {
    pub fn new(value: u32) -> Address {
        Address { value }
    }

    pub fn space(&self) -> AddressSpace {
        if self.value >> 24 == 0x0A {
            AddressSpace::MobileInner
        } else if self.value >> 16 == 0xC0A8 {
            AddressSpace::CoreOuter
        } else {
            AddressSpace::External
        }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.value;
        write!(
            f,
            "{}.{}.{}.{}",
            v >> 24,
            (v >> 16) & 0xFF,
            (v >> 8) & 0xFF,
            v & 0xFF
        )
    }
}

/// Is a data destination inside the mobile network or external to it?
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DestinationClass {
    SameMobileNetwork,
    External,
}

/// Classify a data-packet destination by address space. Outer (locator)
/// addresses are rejected: they never appear as data destinations.
pub fn classify_destination(dst: Address) -> Result<DestinationClass, TopologyError> {
    match dst.space() {
        AddressSpace::MobileInner => Ok(DestinationClass::SameMobileNetwork),
        AddressSpace::External => Ok(DestinationClass::External),
        AddressSpace::CoreOuter => Err(TopologyError::OuterAddressAsDestination),
    }
}

/// One UE's location binding held by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Binding {
    pub serving_bs: NodeId,
    pub serving_outer: Address,
    pub gateway: Address,
}

/// Controller-held map from UE inner address to serving-BS locator.
#[derive(Debug, Clone, Default)]
pub struct BindingTable {
    entries: BTreeMap<u32, Binding>,
}

impl BindingTable {
    pub fn bind(&mut self, inner: Address, binding: Binding) {
        self.entries.insert(inner.value, binding);
    }

    pub fn lookup(&self, inner: Address) -> Result<&Binding, TopologyError> {
        self.entries
            .get(&inner.value)
            .ok_or(TopologyError::UnknownUe(inner.value))
    }

    pub fn lookup_outer(&self, inner: Address) -> Result<Address, TopologyError> {
        self.lookup(inner).map(|b| b.serving_outer)
    }

    pub fn update_serving(
        &mut self,
        inner: Address,
        bs: NodeId,
        outer: Address,
    ) -> Result<(), TopologyError> {
        let entry = self
            .entries
            .get_mut(&inner.value)
            .ok_or(TopologyError::UnknownUe(inner.value))?;
        entry.serving_bs = bs;
        entry.serving_outer = outer;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// One EPC bearer: uplink and downlink tunnel endpoints plus anchors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bearer {
    pub teid_uplink: u32,
    pub teid_downlink: u32,
    pub sgw: NodeId,
    pub pgw: NodeId,
}

/// EPC bearer state with per-gateway TEID allocation.
#[derive(Debug, Clone, Default)]
pub struct BearerTable {
    entries: BTreeMap<NodeId, Bearer>,
    next_teid: HashMap<NodeId, u32>,
}

impl BearerTable {
    pub fn allocate(&mut self, ue: NodeId, sgw: NodeId, pgw: NodeId) -> Bearer {
        let teid_uplink = self.next_teid_for(pgw);
        let teid_downlink = self.next_teid_for(sgw);
        let bearer = Bearer {
            teid_uplink,
            teid_downlink,
            sgw,
            pgw,
        };
        self.entries.insert(ue, bearer);
        bearer
    }

    fn next_teid_for(&mut self, gateway: NodeId) -> u32 {
        let next = self.next_teid.entry(gateway).or_insert(1);
        let teid = *next;
        *next += 1;
        teid
    }

    pub fn bearer(&self, ue: NodeId) -> Option<&Bearer> {
        self.entries.get(&ue)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&NodeId, &Bearer)> {
        self.entries.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub wired: bool,
}

/// A concrete graph realizing the configured hop counts.
#[derive(Debug, Clone)]
pub struct Topology {
    pub arch: Architecture,
    nodes: Vec<NodeId>,
    links: Vec<LinkSpec>,
    adjacency: BTreeMap<NodeId, Vec<NodeId>>,
    wireless: HashSet<(NodeId, NodeId)>,
    outer_addrs: BTreeMap<NodeId, Address>,
    next_switch: u32,
}

impl Topology {
    fn new(arch: Architecture) -> Topology {
        Topology {
            arch,
            nodes: Vec::new(),
            links: Vec::new(),
            adjacency: BTreeMap::new(),
            wireless: HashSet::new(),
            outer_addrs: BTreeMap::new(),
            next_switch: 0,
        }
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn contains(&self, n: NodeId) -> bool {
        self.adjacency.contains_key(&n)
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        self.nodes
            .iter()
            .copied()
            .filter(|n| n.kind == kind)
            .collect()
    }

    /// Locator address of a core node.
    pub fn outer_address(&self, n: NodeId) -> Option<Address> {
        self.outer_addrs.get(&n).copied()
    }

    fn add_node(&mut self, n: NodeId) {
        if !self.adjacency.contains_key(&n) {
            self.nodes.push(n);
            self.adjacency.insert(n, Vec::new());
            if n.kind != NodeKind::Ue && n.kind != NodeKind::InternetHost {
                let addr = Address::new(CORE_OUTER_BASE + self.outer_addrs.len() as u32 + 1);
                self.outer_addrs.insert(n, addr);
            }
        }
    }

    fn add_link(&mut self, a: NodeId, b: NodeId, wired: bool) {
        self.add_node(a);
        self.add_node(b);
        self.links.push(LinkSpec { a, b, wired });
        self.adjacency.get_mut(&a).unwrap().push(b);
        self.adjacency.get_mut(&b).unwrap().push(a);
        if !wired {
            self.wireless.insert((a, b));
            self.wireless.insert((b, a));
        }
    }

    /// Join `a` and `b` by a chain of `hops` wired links through fresh
    /// switches.
    fn add_chain(&mut self, a: NodeId, b: NodeId, hops: u32) {
        let mut prev = a;
        for _ in 1..hops {
            let sw = NodeId::new(NodeKind::L3Switch, self.next_switch);
            self.next_switch += 1;
            self.add_link(prev, sw, true);
            prev = sw;
        }
        self.add_link(prev, b, true);
    }

    pub fn is_wireless(&self, a: NodeId, b: NodeId) -> bool {
        self.wireless.contains(&(a, b))
    }

    pub fn has_link(&self, a: NodeId, b: NodeId) -> bool {
        self.adjacency
            .get(&a)
            .map(|v| v.contains(&b))
            .unwrap_or(false)
    }

    /// Shortest-path hop count, if connected.
    pub fn hop_count(&self, src: NodeId, dst: NodeId) -> Option<u32> {
        self.bfs_dist(dst).get(&src).copied()
    }

    fn bfs_dist(&self, from: NodeId) -> HashMap<NodeId, u32> {
        let mut dist = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(from, 0);
        queue.push_back(from);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            for &next in &self.adjacency[&n] {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(next) {
                    e.insert(d + 1);
                    queue.push_back(next);
                }
            }
        }
        dist
    }

    /// Deterministic shortest path from `src` to `dst`, inclusive of both
    /// endpoints. Among equal-length paths the lexicographically smallest
    /// node sequence is chosen.
    pub fn route(&self, src: NodeId, dst: NodeId) -> Result<Vec<NodeId>, TopologyError> {
        if !self.contains(src) {
            return Err(TopologyError::UnknownNode(src));
        }
        if !self.contains(dst) {
            return Err(TopologyError::UnknownNode(dst));
        }
        if src == dst {
            return Ok(vec![src]);
        }
        let dist = self.bfs_dist(dst);
        let mut here = src;
        let mut d = *dist.get(&src).ok_or(TopologyError::NoRoute(src, dst))?;
        let mut path = vec![src];
        while here != dst {
            let mut next: Option<NodeId> = None;
            for &cand in &self.adjacency[&here] {
                if dist.get(&cand) == Some(&(d - 1)) && next.is_none_or(|n| cand < n) {
                    next = Some(cand);
                }
            }
            here = next.expect("BFS distance map guarantees a predecessor");
            d -= 1;
            path.push(here);
        }
        Ok(path)
    }

    /// Plain-text edge list: `<node> <node> <wired|wireless>` per line.
    pub fn edge_list(&self) -> String {
        let mut out = String::new();
        for l in &self.links {
            out.push_str(&format!(
                "{} {} {}\n",
                l.a,
                l.b,
                if l.wired { "wired" } else { "wireless" }
            ));
        }
        out
    }
}

/// Build a topology with `ue_per_bs` UEs attached to each of two base
/// stations, realizing the configured hop counts.
pub fn build_topology(
    h: &HopCounts,
    arch: Architecture,
    ue_per_bs: u32,
) -> Result<Topology, TopologyError> {
    let mut t = Topology::new(arch);
    let bs1 = NodeId::new(NodeKind::BaseStation, 1);
    let bs2 = NodeId::new(NodeKind::BaseStation, 2);
    let hss = NodeId::new(NodeKind::Hss, 0);
    let host = NodeId::new(NodeKind::InternetHost, 0);

    let mut checks: Vec<(&'static str, NodeId, NodeId, u32)> = Vec::new();
    match arch {
        Architecture::Epc4g => {
            let sgw = NodeId::new(NodeKind::Sgw, 0);
            let pgw = NodeId::new(NodeKind::Pgw, 0);
            let mme = NodeId::new(NodeKind::Mme, 0);
            t.add_chain(bs1, sgw, h.access_gateway);
            t.add_chain(bs2, sgw, h.access_gateway);
            t.add_chain(sgw, pgw, h.gateway_chain);
            t.add_chain(bs1, mme, h.access_controller);
            t.add_chain(bs2, mme, h.access_controller);
            t.add_chain(mme, hss, h.controller_registry);
            t.add_chain(mme, sgw, h.controller_gateway);
            t.add_chain(bs1, bs2, h.inter_access);
            t.add_link(pgw, host, true);
            checks.push(("eNB-SGW", bs1, sgw, h.access_gateway));
            checks.push(("eNB-SGW", bs2, sgw, h.access_gateway));
            checks.push(("SGW-PGW", sgw, pgw, h.gateway_chain));
            checks.push(("eNB-MME", bs1, mme, h.access_controller));
            checks.push(("eNB-MME", bs2, mme, h.access_controller));
            checks.push(("MME-HSS", mme, hss, h.controller_registry));
            checks.push(("MME-SGW", mme, sgw, h.controller_gateway));
            checks.push(("eNB-eNB", bs1, bs2, h.inter_access));
        }
        Architecture::Icna => {
            let uce = NodeId::new(NodeKind::Uce, 0);
            let cgw = NodeId::new(NodeKind::Cgw, 0);
            t.add_chain(bs1, cgw, h.access_gateway);
            t.add_chain(bs2, cgw, h.access_gateway);
            t.add_chain(bs1, uce, h.access_controller);
            t.add_chain(bs2, uce, h.access_controller);
            t.add_chain(uce, hss, h.controller_registry);
            t.add_chain(uce, cgw, h.controller_gateway);
            t.add_chain(bs1, bs2, h.inter_access);
            t.add_link(cgw, host, true);
            checks.push(("BS-CGW", bs1, cgw, h.access_gateway));
            checks.push(("BS-CGW", bs2, cgw, h.access_gateway));
            checks.push(("BS-UCE", bs1, uce, h.access_controller));
            checks.push(("BS-UCE", bs2, uce, h.access_controller));
            checks.push(("UCE-HSS", uce, hss, h.controller_registry));
            checks.push(("UCE-CGW", uce, cgw, h.controller_gateway));
            checks.push(("BS-BS", bs1, bs2, h.inter_access));
        }
    }

    let mut ue_index = 0;
    for bs in [bs1, bs2] {
        for _ in 0..ue_per_bs {
            let ue = NodeId::new(NodeKind::Ue, ue_index);
            ue_index += 1;
            t.add_link(ue, bs, false);
        }
    }

    for (pair, a, b, want) in checks {
        let got = t.hop_count(a, b).unwrap_or(u32::MAX);
        if got != want {
            return Err(TopologyError::Unrealizable { pair, got, want });
        }
    }
    Ok(t)
}

/// Base station a UE is attached to (its single wireless neighbor).
pub fn serving_bs(t: &Topology, ue: NodeId) -> Result<NodeId, TopologyError> {
    if !t.contains(ue) {
        return Err(TopologyError::UnknownNode(ue));
    }
    t.nodes_of_kind(NodeKind::BaseStation)
        .into_iter()
        .find(|&bs| t.has_link(ue, bs))
        .ok_or(TopologyError::NoRoute(ue, ue))
}

/// Data-plane route between two UEs under each architecture's policy:
/// the EPC anchors traffic through SGW and PGW, while the IP-in-IP core
/// forwards directly between base stations over the switches.
pub fn data_route_ue_to_ue(
    t: &Topology,
    src_ue: NodeId,
    dst_ue: NodeId,
) -> Result<Vec<NodeId>, TopologyError> {
    let src_bs = serving_bs(t, src_ue)?;
    let dst_bs = serving_bs(t, dst_ue)?;
    let mut path = vec![src_ue];
    match t.arch {
        Architecture::Epc4g => {
            let sgw = t.nodes_of_kind(NodeKind::Sgw)[0];
            let pgw = t.nodes_of_kind(NodeKind::Pgw)[0];
            append_route(&mut path, t.route(src_bs, sgw)?);
            append_route(&mut path, t.route(sgw, pgw)?);
            append_route(&mut path, t.route(pgw, sgw)?);
            append_route(&mut path, t.route(sgw, dst_bs)?);
        }
        Architecture::Icna => {
            if src_bs == dst_bs {
                path.push(src_bs);
            } else {
                append_route(&mut path, t.route(src_bs, dst_bs)?);
            }
        }
    }
    path.push(dst_ue);
    Ok(path)
}

fn append_route(path: &mut Vec<NodeId>, leg: Vec<NodeId>) {
    for n in leg {
        if path.last() != Some(&n) {
            path.push(n);
        }
    }
}

/// Allocator for UE inner addresses; each address is handed out once.
#[derive(Debug, Clone, Default)]
pub struct InnerAddressAllocator {
    next: u32,
}

impl InnerAddressAllocator {
    pub fn allocate(&mut self) -> Address {
        self.next += 1;
        Address::new(MOBILE_INNER_BASE + self.next)
    }
}
