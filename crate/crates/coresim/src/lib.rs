//! Delay modeling and discrete-event simulation of two mobile packet-core
//! architectures: a conventional 4G EPC that tunnels user traffic through
//! GTP-U over centralized gateways, and an IP-in-IP core ("ICNA") that
//! routes between base stations over plain L3 switching with a logically
//! centralized controller.
//!
//! The crate has two independent evaluation paths that must agree:
//!
//! * [`delay`] — closed-form latency expressions (attach + first packet,
//!   four handover variants) built from per-leg wireless and wired terms.
//! * [`simnet`] + [`procedures`] — an event engine that replays the same
//!   signaling chains message by message over a realized [`topology`],
//!   producing transcripts and packet traces.
//!
//! [`wire`] pins the byte-level encapsulation formats (GTP-U, compact
//! IP-in-IP, GRE) and the header-overhead arithmetic; [`experiments`]
//! drives parameter sweeps and CSV output for the `coresim` binary.
//!
//! # Example: total transmission delay, both cores
//!
//! ```
//! use coresim::delay::{ttd_epc, ttd_icna, DelayConfig, DelayParams, HopCounts};
//!
//! let p = DelayParams::default();
//! let h = HopCounts::default();
//! let cfg = DelayConfig::default();
//! let epc = ttd_epc(&p, &h, &cfg).unwrap().total_ms();
//! let icna = ttd_icna(&p, &h, &cfg).unwrap().total_ms();
//! assert!((epc - 320.570909).abs() < 1e-3);
//! assert!((icna - 201.744).abs() < 1e-3);
//! ```
//!
//! # Example: simulated handover matches the closed form
//!
//! ```
//! use coresim::delay::{handover_delay, DelayParams, HandoverKind, HopCounts};
//! use coresim::procedures::{run_procedure, ProcedureKind, World};
//! use coresim::topology::Architecture;
//!
//! let mut world = World::with_defaults(Architecture::Icna).unwrap();
//! run_procedure(ProcedureKind::AttachIcna, &mut world).unwrap();
//! let t = run_procedure(ProcedureKind::InterGatewayHandoverIcna, &mut world).unwrap();
//! let expected = handover_delay(
//!     HandoverKind::InterGatewayIcna,
//!     &DelayParams::default(),
//!     &HopCounts::default(),
//! )
//! .unwrap()
//! .total_ms();
//! assert!((t.final_latency_ms() - expected).abs() < 1e-6);
//! ```

pub mod delay;
pub mod experiments;
pub mod procedures;
pub mod simnet;
pub mod topology;
pub mod wire;
