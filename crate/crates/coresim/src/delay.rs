//! Closed-form transmission and handover delay model.
//!
//! Two primitives underlie everything here:
//!
//! * wireless leg: `prefactor(q) × (8·S/B_wl + wireless latency)`
//! * wired leg over `H` hops: `H × (8·S/B_w + wired latency + queue delay)`
//!
//! Sizes are in bytes, bandwidths in Mbps (10⁶ bit/s), latencies in
//! milliseconds. The reference prefactor is `(1−q)/(1+q)`, which shrinks
//! the delay as the failure probability grows; the conventional
//! retransmission factor `(1+q)/(1−q)` is available as a mode switch, as
//! is the choice of latency constant inside the wireless leg.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DelayError {
    #[error("invalid delay parameter: {0}")]
    InvalidParams(&'static str),
    #[error("invalid hop counts: {0}")]
    InvalidHops(&'static str),
}

/// Link, queuing and packet-size parameters shared by both architectures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams {
    /// Delay of a wireless link, ms.
    pub wireless_latency_ms: f64,
    /// Delay of a wired link, ms.
    pub wired_latency_ms: f64,
    /// Wireless link failure probability, in `[0, 1)`.
    pub failure_prob: f64,
    /// Average queuing delay at each node, ms.
    pub queue_delay_ms: f64,
    /// Size of control packets, bytes.
    pub control_packet_bytes: f64,
    /// Size of data packets, bytes.
    pub data_packet_bytes: f64,
    /// Bandwidth of wireless links, Mbps.
    pub wireless_bandwidth_mbps: f64,
    /// Bandwidth of wired links, Mbps.
    pub wired_bandwidth_mbps: f64,
}

impl Default for DelayParams {
    fn default() -> Self {
        DelayParams {
            wireless_latency_ms: 10.0,
            wired_latency_ms: 2.0,
            failure_prob: 0.2,
            queue_delay_ms: 5.0,
            control_packet_bytes: 50.0,
            data_packet_bytes: 200.0,
            wireless_bandwidth_mbps: 11.0,
            wired_bandwidth_mbps: 100.0,
        }
    }
}

impl DelayParams {
    pub fn validate(&self) -> Result<(), DelayError> {
        if self.wireless_latency_ms < 0.0 || self.wired_latency_ms < 0.0 {
            return Err(DelayError::InvalidParams("link latencies must be >= 0"));
        }
        if self.queue_delay_ms < 0.0 {
            return Err(DelayError::InvalidParams("queue delay must be >= 0"));
        }
        if !(0.0..1.0).contains(&self.failure_prob) {
            return Err(DelayError::InvalidParams(
                "failure probability must be in [0, 1)",
            ));
        }
        if self.control_packet_bytes <= 0.0 || self.data_packet_bytes <= 0.0 {
            return Err(DelayError::InvalidParams("packet sizes must be > 0"));
        }
        if self.wireless_bandwidth_mbps <= 0.0 || self.wired_bandwidth_mbps <= 0.0 {
            return Err(DelayError::InvalidParams("bandwidths must be > 0"));
        }
        Ok(())
    }
}

/// Hop counts between role pairs. The same structure serves both
/// architectures; the right-hand names give the IP-in-IP reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopCounts {
    /// eNB↔SGW in EPC, BS↔CGW on the IP-in-IP data plane (α).
    pub access_gateway: u32,
    /// SGW↔PGW (β).
    pub gateway_chain: u32,
    /// eNB↔MME, BS↔UCE (γ).
    pub access_controller: u32,
    /// MME↔HSS, UCE↔HSS (δ).
    pub controller_registry: u32,
    /// MME↔SGW, UCE↔CGW (ε).
    pub controller_gateway: u32,
    /// eNB↔eNB, BS↔BS (λ).
    pub inter_access: u32,
}

impl Default for HopCounts {
    fn default() -> Self {
        HopCounts {
            access_gateway: 2,
            gateway_chain: 3,
            access_controller: 2,
            controller_registry: 3,
            controller_gateway: 2,
            inter_access: 2,
        }
    }
}

impl HopCounts {
    pub fn validate(&self) -> Result<(), DelayError> {
        let all = [
            self.access_gateway,
            self.gateway_chain,
            self.access_controller,
            self.controller_registry,
            self.controller_gateway,
            self.inter_access,
        ];
        if all.contains(&0) {
            return Err(DelayError::InvalidHops("every hop count must be >= 1"));
        }
        Ok(())
    }
}

/// Prefactor applied to the wireless leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WirelessPrefactor {
    /// `(1−q)/(1+q)`, the reference form.
    #[default]
    SuccessWeighted,
    /// `(1+q)/(1−q)`, the conventional expected retransmission cost.
    Retransmission,
}

/// Which latency constant the wireless leg adds to its transmission term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WirelessLatencyTerm {
    /// Use the wireless link latency (default).
    #[default]
    WirelessLink,
    /// Use the wired link latency instead.
    WiredLink,
}

/// Hop count used by the EPC data-plane legs of the total transmission
/// delay. The reference composition counts the controller↔gateway
/// distance even though those legs run access↔gateway; both are 2 at the
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EpcDataPlaneHops {
    #[default]
    ControllerGateway,
    AccessGateway,
}

/// Fidelity switches for the closed-form model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DelayConfig {
    pub prefactor: WirelessPrefactor,
    pub latency_term: WirelessLatencyTerm,
    pub epc_data_plane_hops: EpcDataPlaneHops,
}

/// Delay of one wireless leg for a message of `size_bytes`, ms.
pub fn wireless_delay(size_bytes: f64, p: &DelayParams, cfg: &DelayConfig) -> f64 {
    let q = p.failure_prob;
    let prefactor = match cfg.prefactor {
        WirelessPrefactor::SuccessWeighted => (1.0 - q) / (1.0 + q),
        WirelessPrefactor::Retransmission => (1.0 + q) / (1.0 - q),
    };
    let latency = match cfg.latency_term {
        WirelessLatencyTerm::WirelessLink => p.wireless_latency_ms,
        WirelessLatencyTerm::WiredLink => p.wired_latency_ms,
    };
    prefactor * (transmission_ms(size_bytes, p.wireless_bandwidth_mbps) + latency)
}

/// Delay of a wired path of `hops` store-and-forward hops, ms.
pub fn wired_delay(size_bytes: f64, hops: u32, p: &DelayParams) -> f64 {
    hops as f64
        * (transmission_ms(size_bytes, p.wired_bandwidth_mbps)
            + p.wired_latency_ms
            + p.queue_delay_ms)
}

/// Serialization time of `size_bytes` at `bandwidth_mbps`, ms.
fn transmission_ms(size_bytes: f64, bandwidth_mbps: f64) -> f64 {
    // bytes → bits, Mbps → bits/ms (10⁶ bit/s = 10³ bit/ms)
    8.0 * size_bytes / (bandwidth_mbps * 1000.0)
}

/// One term of a delay total: `count` legs of `per_term_ms` each.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTerm {
    pub label: &'static str,
    pub count: u32,
    pub per_term_ms: f64,
}

/// A delay total with its constituent terms, for auditing.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayBreakdown {
    pub terms: Vec<DelayTerm>,
}

impl DelayBreakdown {
    pub fn total_ms(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.count as f64 * t.per_term_ms)
            .sum()
    }
}

fn breakdown(terms: Vec<DelayTerm>) -> DelayBreakdown {
    DelayBreakdown { terms }
}

/// Total transmission delay (attach + first data delivery) of the EPC
/// architecture.
pub fn ttd_epc(
    p: &DelayParams,
    h: &HopCounts,
    cfg: &DelayConfig,
) -> Result<DelayBreakdown, DelayError> {
    p.validate()?;
    h.validate()?;
    let sc = p.control_packet_bytes;
    let sd = p.data_packet_bytes;
    let data_hops = match cfg.epc_data_plane_hops {
        EpcDataPlaneHops::ControllerGateway => h.controller_gateway,
        EpcDataPlaneHops::AccessGateway => h.access_gateway,
    };
    Ok(breakdown(vec![
        DelayTerm {
            label: "wireless control",
            count: 4,
            per_term_ms: wireless_delay(sc, p, cfg),
        },
        DelayTerm {
            label: "access-controller control",
            count: 5,
            per_term_ms: wired_delay(sc, h.access_controller, p),
        },
        DelayTerm {
            label: "controller-registry control",
            count: 2,
            per_term_ms: wired_delay(sc, h.controller_registry, p),
        },
        DelayTerm {
            label: "controller-gateway control",
            count: 4,
            per_term_ms: wired_delay(sc, h.controller_gateway, p),
        },
        DelayTerm {
            label: "gateway-chain control",
            count: 2,
            per_term_ms: wired_delay(sc, h.gateway_chain, p),
        },
        DelayTerm {
            label: "wireless data",
            count: 2,
            per_term_ms: wireless_delay(sd, p, cfg),
        },
        DelayTerm {
            label: "core data leg",
            count: 2,
            per_term_ms: wired_delay(sd, data_hops, p),
        },
        DelayTerm {
            label: "gateway-chain data",
            count: 2,
            per_term_ms: wired_delay(sd, h.gateway_chain, p),
        },
    ]))
}

/// Total transmission delay of the IP-in-IP architecture.
pub fn ttd_icna(
    p: &DelayParams,
    h: &HopCounts,
    cfg: &DelayConfig,
) -> Result<DelayBreakdown, DelayError> {
    p.validate()?;
    h.validate()?;
    let sc = p.control_packet_bytes;
    let sd = p.data_packet_bytes;
    Ok(breakdown(vec![
        DelayTerm {
            label: "wireless control",
            count: 3,
            per_term_ms: wireless_delay(sc, p, cfg),
        },
        DelayTerm {
            label: "access-controller control",
            count: 5,
            per_term_ms: wired_delay(sc, h.access_controller, p),
        },
        DelayTerm {
            label: "controller-registry control",
            count: 2,
            per_term_ms: wired_delay(sc, h.controller_registry, p),
        },
        DelayTerm {
            label: "controller-gateway control",
            count: 2,
            per_term_ms: wired_delay(sc, h.controller_gateway, p),
        },
        DelayTerm {
            label: "wireless data",
            count: 2,
            per_term_ms: wireless_delay(sd, p, cfg),
        },
        DelayTerm {
            label: "access-gateway data",
            count: 2,
            per_term_ms: wired_delay(sd, h.access_gateway, p),
        },
    ]))
}

/// The four handover procedures with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandoverKind {
    X2Epc,
    S1Epc,
    InterGatewayIcna,
    IntraGatewayIcna,
}

impl HandoverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HandoverKind::X2Epc => "x2_4g",
            HandoverKind::S1Epc => "s1_4g",
            HandoverKind::InterGatewayIcna => "inter_gw_icna",
            HandoverKind::IntraGatewayIcna => "intra_gw_icna",
        }
    }
}

/// Closed-form handover delay. All signaling uses the control packet size.
pub fn handover_delay(
    kind: HandoverKind,
    p: &DelayParams,
    h: &HopCounts,
) -> Result<DelayBreakdown, DelayError> {
    p.validate()?;
    h.validate()?;
    let sc = p.control_packet_bytes;
    let t_inter = wired_delay(sc, h.inter_access, p);
    let t_ctrl = wired_delay(sc, h.access_controller, p);
    let t_gw = wired_delay(sc, h.controller_gateway, p);
    let t_chain = wired_delay(sc, h.gateway_chain, p);
    let terms = match kind {
        HandoverKind::X2Epc => vec![
            DelayTerm {
                label: "inter-access",
                count: 2,
                per_term_ms: t_inter,
            },
            DelayTerm {
                label: "access-controller",
                count: 3,
                per_term_ms: t_ctrl,
            },
            DelayTerm {
                label: "controller-gateway",
                count: 2,
                per_term_ms: t_gw,
            },
            DelayTerm {
                label: "gateway-chain",
                count: 2,
                per_term_ms: t_chain,
            },
        ],
        HandoverKind::S1Epc => vec![
            DelayTerm {
                label: "inter-access",
                count: 6,
                per_term_ms: t_inter,
            },
            DelayTerm {
                label: "controller-gateway",
                count: 2,
                per_term_ms: t_gw,
            },
            DelayTerm {
                label: "gateway-chain",
                count: 2,
                per_term_ms: t_chain,
            },
        ],
        HandoverKind::InterGatewayIcna => vec![
            DelayTerm {
                label: "inter-access",
                count: 3,
                per_term_ms: t_inter,
            },
            DelayTerm {
                label: "access-controller",
                count: 2,
                per_term_ms: t_ctrl,
            },
            DelayTerm {
                label: "controller-gateway",
                count: 2,
                per_term_ms: t_gw,
            },
        ],
        HandoverKind::IntraGatewayIcna => vec![
            DelayTerm {
                label: "access-controller",
                count: 5,
                per_term_ms: t_ctrl,
            },
            DelayTerm {
                label: "controller-gateway",
                count: 2,
                per_term_ms: t_gw,
            },
        ],
    };
    Ok(breakdown(terms))
}
