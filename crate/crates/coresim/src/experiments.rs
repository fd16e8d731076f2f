//! Scenario configuration, parameter sweeps and CSV emission.
//!
//! A scenario is a TOML file of `key = value` sections selecting an
//! architecture pair, a metric, a swept parameter and optional parameter
//! overrides. Sweeps over closed-form metrics call the delay model
//! directly; simulated columns re-run the same point through the event
//! engine and are emitted side by side as `<metric>_sim` rows.
//!
//! ```
//! use coresim::experiments::{parse_scenario, render_csv, run_sweep};
//!
//! let scenario = parse_scenario(r#"
//! name = "quick"
//! metric = "ttd"
//!
//! [sweep]
//! param = "T_q"
//! from = 1.0
//! to = 3.0
//! step = 1.0
//! "#).unwrap();
//! let rows = run_sweep(&scenario).unwrap();
//! let csv = render_csv(&rows).unwrap();
//! assert!(csv.starts_with("sweep_value,metric,value_4g,value_icna\n"));
//! assert_eq!(csv.lines().count(), 4);
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::delay::{
    handover_delay, ttd_epc, ttd_icna, DelayConfig, DelayError, DelayParams, HandoverKind,
    HopCounts,
};
use crate::procedures::{
    run_procedure, simulate_composite_ttd, ProcedureError, ProcedureKind, World,
};
use crate::simnet::WirelessMode;
use crate::topology::Architecture;
use crate::wire::{tunneling_overhead_percent_with, CodecError, OuterHeaderMode, Scheme};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("no rows to emit")]
    EmptyRows,
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Procedure(#[from] ProcedureError),
}

/// Parameters a scenario may sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    QueueDelay,
    WirelessLatency,
    AccessControllerHops,
    InterAccessHops,
    DataPacketBytes,
    NumBaseStations,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<SweepParam, ExperimentError> {
        match s {
            "T_q" => Ok(SweepParam::QueueDelay),
            "L_wl" => Ok(SweepParam::WirelessLatency),
            "gamma" => Ok(SweepParam::AccessControllerHops),
            "lambda" => Ok(SweepParam::InterAccessHops),
            "S_d" => Ok(SweepParam::DataPacketBytes),
            "n_enbs" => Ok(SweepParam::NumBaseStations),
            other => Err(ExperimentError::Config(format!(
                "unknown sweep parameter `{other}` (expected T_q, L_wl, gamma, lambda, S_d or n_enbs)"
            ))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::QueueDelay => "T_q",
            SweepParam::WirelessLatency => "L_wl",
            SweepParam::AccessControllerHops => "gamma",
            SweepParam::InterAccessHops => "lambda",
            SweepParam::DataPacketBytes => "S_d",
            SweepParam::NumBaseStations => "n_enbs",
        }
    }
}

/// Metrics a scenario can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Total transmission delay, both architectures.
    Ttd,
    /// Inter-gateway handover vs X2 handover.
    HandoverInterVsX2,
    /// Intra-gateway handover vs S1 handover.
    HandoverIntraVsS1,
    /// Data tunneling overhead per scheme.
    Dto,
    /// Cumulative delay of consecutive handovers across a BS chain.
    HandoverChain,
}

impl Metric {
    pub fn parse(s: &str) -> Result<Metric, ExperimentError> {
        match s {
            "ttd" => Ok(Metric::Ttd),
            "handover_inter_x2" => Ok(Metric::HandoverInterVsX2),
            "handover_intra_s1" => Ok(Metric::HandoverIntraVsS1),
            "dto" => Ok(Metric::Dto),
            "handover_chain" => Ok(Metric::HandoverChain),
            other => Err(ExperimentError::Config(format!("unknown metric `{other}`"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Ttd => "ttd",
            Metric::HandoverInterVsX2 => "handover_inter_x2",
            Metric::HandoverIntraVsS1 => "handover_intra_s1",
            Metric::Dto => "dto",
            Metric::HandoverChain => "handover_chain",
        }
    }
}

/// Values carried by one result row.
#[derive(Debug, Clone, PartialEq)]
pub enum RowValues {
    /// `value_4g,value_icna` columns.
    ArchPair { value_4g: f64, value_icna: f64 },
    /// Per-scheme overhead columns.
    PerScheme { gtp: f64, ipinip: f64, gre: f64 },
    /// A swept point that could not be evaluated; the sweep continues.
    Error(String),
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_value: f64,
    pub metric: String,
    pub values: RowValues,
}

/// A fully resolved scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub metric: Metric,
    pub sweep: SweepParam,
    pub from: f64,
    pub to: f64,
    pub step: f64,
    pub params: DelayParams,
    pub hops: HopCounts,
    pub delay_cfg: DelayConfig,
    pub mode: WirelessMode,
    /// Outer-header layout used by overhead metrics.
    pub outer_mode: OuterHeaderMode,
    /// Also run the event engine and emit `<metric>_sim` rows.
    pub simulate: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.step <= 0.0 {
            return Err(ExperimentError::Config("sweep step must be > 0".into()));
        }
        if self.from > self.to {
            return Err(ExperimentError::Config("sweep from must be <= to".into()));
        }
        self.params.validate()?;
        self.hops.validate()?;
        Ok(())
    }

    fn swept_values(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0u64;
        loop {
            let v = self.from + i as f64 * self.step;
            if v > self.to + 1e-9 {
                break;
            }
            out.push(v);
            i += 1;
        }
        out
    }

    /// Apply one swept value, returning the adjusted parameter set.
    fn point(&self, v: f64) -> (DelayParams, HopCounts) {
        let mut p = self.params;
        let mut h = self.hops;
        match self.sweep {
            SweepParam::QueueDelay => p.queue_delay_ms = v,
            SweepParam::WirelessLatency => p.wireless_latency_ms = v,
            SweepParam::AccessControllerHops => h.access_controller = v.round() as u32,
            SweepParam::InterAccessHops => h.inter_access = v.round() as u32,
            SweepParam::DataPacketBytes => p.data_packet_bytes = v,
            SweepParam::NumBaseStations => {} // consumed by the chain metric
        }
        (p, h)
    }
}

/// Run a sweep, producing one row per swept point (two per point when
/// simulation output is requested).
pub fn run_sweep(s: &Scenario) -> Result<Vec<ResultRow>, ExperimentError> {
    s.validate()?;
    let mut rows = Vec::new();
    for v in s.swept_values() {
        let (p, h) = s.point(v);
        match analytic_point(s, v, &p, &h) {
            Ok(row) => rows.push(row),
            Err(e) => rows.push(ResultRow {
                sweep_value: v,
                metric: s.metric.as_str().to_string(),
                values: RowValues::Error(e.to_string()),
            }),
        }
        if s.simulate {
            match simulated_point(s, v, &p, &h) {
                Ok(values) => rows.push(ResultRow {
                    sweep_value: v,
                    metric: format!("{}_sim", s.metric.as_str()),
                    values,
                }),
                Err(e) => rows.push(ResultRow {
                    sweep_value: v,
                    metric: format!("{}_sim", s.metric.as_str()),
                    values: RowValues::Error(e.to_string()),
                }),
            }
        }
    }
    if rows.is_empty() {
        return Err(ExperimentError::EmptyRows);
    }
    Ok(rows)
}

fn analytic_point(
    s: &Scenario,
    v: f64,
    p: &DelayParams,
    h: &HopCounts,
) -> Result<ResultRow, ExperimentError> {
    let values = match s.metric {
        Metric::Ttd => RowValues::ArchPair {
            value_4g: ttd_epc(p, h, &s.delay_cfg)?.total_ms(),
            value_icna: ttd_icna(p, h, &s.delay_cfg)?.total_ms(),
        },
        Metric::HandoverInterVsX2 => RowValues::ArchPair {
            value_4g: handover_delay(HandoverKind::X2Epc, p, h)?.total_ms(),
            value_icna: handover_delay(HandoverKind::InterGatewayIcna, p, h)?.total_ms(),
        },
        Metric::HandoverIntraVsS1 => RowValues::ArchPair {
            value_4g: handover_delay(HandoverKind::S1Epc, p, h)?.total_ms(),
            value_icna: handover_delay(HandoverKind::IntraGatewayIcna, p, h)?.total_ms(),
        },
        Metric::Dto => {
            let sd = p.data_packet_bytes.round() as u64;
            let m = s.outer_mode;
            RowValues::PerScheme {
                gtp: tunneling_overhead_percent_with(Scheme::Gtp4g, m, sd)?,
                ipinip: tunneling_overhead_percent_with(Scheme::IpInIpIcna, m, sd)?,
                gre: tunneling_overhead_percent_with(Scheme::GreHandover, m, sd)?,
            }
        }
        Metric::HandoverChain => {
            let handovers = (v.round() as u64).saturating_sub(1) as f64;
            RowValues::ArchPair {
                value_4g: handovers * handover_delay(HandoverKind::X2Epc, p, h)?.total_ms(),
                value_icna: handovers
                    * handover_delay(HandoverKind::InterGatewayIcna, p, h)?.total_ms(),
            }
        }
    };
    Ok(ResultRow {
        sweep_value: v,
        metric: s.metric.as_str().to_string(),
        values,
    })
}

fn simulated_point(
    s: &Scenario,
    v: f64,
    p: &DelayParams,
    h: &HopCounts,
) -> Result<RowValues, ExperimentError> {
    let world = |arch| World::new(arch, *p, *h, s.delay_cfg, s.mode, 1);
    match s.metric {
        Metric::Ttd => {
            let mut epc = world(Architecture::Epc4g)?;
            let mut icna = world(Architecture::Icna)?;
            Ok(RowValues::ArchPair {
                value_4g: simulate_composite_ttd(&mut epc)?.as_ms(),
                value_icna: simulate_composite_ttd(&mut icna)?.as_ms(),
            })
        }
        Metric::HandoverInterVsX2 => Ok(RowValues::ArchPair {
            value_4g: simulate_handover(
                ProcedureKind::Attach4g,
                ProcedureKind::X2Handover4g,
                s,
                p,
                h,
            )?,
            value_icna: simulate_handover(
                ProcedureKind::AttachIcna,
                ProcedureKind::InterGatewayHandoverIcna,
                s,
                p,
                h,
            )?,
        }),
        Metric::HandoverIntraVsS1 => Ok(RowValues::ArchPair {
            value_4g: simulate_handover(
                ProcedureKind::Attach4g,
                ProcedureKind::S1Handover4g,
                s,
                p,
                h,
            )?,
            value_icna: simulate_handover(
                ProcedureKind::AttachIcna,
                ProcedureKind::IntraGatewayHandoverIcna,
                s,
                p,
                h,
            )?,
        }),
        Metric::Dto => {
            // Byte-counted from actually encoded frames.
            use crate::wire::{encapsulate_with, Addressing};
            let sd = p.data_packet_bytes.round() as usize;
            let payload = vec![0u8; sd];
            let count = |scheme: Scheme| -> Result<f64, ExperimentError> {
                let addr = Addressing::outer(0xC0A80001, 0xC0A80002)
                    .with_inner(0x0A000001, 0x0A000002)
                    .with_tunnel_id(1);
                let total = encapsulate_with(scheme, s.outer_mode, &addr, &payload)?
                    .encode()
                    .len();
                Ok((total - sd) as f64 / total as f64 * 100.0)
            };
            Ok(RowValues::PerScheme {
                gtp: count(Scheme::Gtp4g)?,
                ipinip: count(Scheme::IpInIpIcna)?,
                gre: count(Scheme::GreHandover)?,
            })
        }
        Metric::HandoverChain => {
            // A UE crossing a chain of v base stations performs v-1
            // consecutive handovers; report the cumulative delay.
            let handovers = (v.round() as u64).saturating_sub(1);
            let chain =
                |attach: ProcedureKind, ho: ProcedureKind| -> Result<f64, ExperimentError> {
                    let mut w = World::new(attach.architecture(), *p, *h, s.delay_cfg, s.mode, 1)?;
                    run_procedure(attach, &mut w)?;
                    let mut total = 0.0;
                    for _ in 0..handovers {
                        total += run_procedure(ho, &mut w)?.final_latency_ms();
                    }
                    Ok(total)
                };
            Ok(RowValues::ArchPair {
                value_4g: chain(ProcedureKind::Attach4g, ProcedureKind::X2Handover4g)?,
                value_icna: chain(
                    ProcedureKind::AttachIcna,
                    ProcedureKind::InterGatewayHandoverIcna,
                )?,
            })
        }
    }
}

fn simulate_handover(
    attach: ProcedureKind,
    ho: ProcedureKind,
    s: &Scenario,
    p: &DelayParams,
    h: &HopCounts,
) -> Result<f64, ExperimentError> {
    let mut w = World::new(attach.architecture(), *p, *h, s.delay_cfg, s.mode, 1)?;
    run_procedure(attach, &mut w)?;
    Ok(run_procedure(ho, &mut w)?.final_latency_ms())
}

/// Render rows as CSV with fixed 6-decimal formatting, ordered by swept
/// value (then metric name) regardless of input order.
pub fn render_csv(rows: &[ResultRow]) -> Result<String, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::EmptyRows);
    }
    let per_scheme = rows
        .iter()
        .any(|r| matches!(r.values, RowValues::PerScheme { .. }));
    let mut sorted: Vec<&ResultRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        a.sweep_value
            .partial_cmp(&b.sweep_value)
            .unwrap()
            .then_with(|| a.metric.cmp(&b.metric))
    });
    let mut out = String::new();
    if per_scheme {
        out.push_str("sweep_value,metric,dto_gtp_4g,dto_ipinip_icna,dto_gre\n");
    } else {
        out.push_str("sweep_value,metric,value_4g,value_icna\n");
    }
    for r in sorted {
        match &r.values {
            RowValues::ArchPair {
                value_4g,
                value_icna,
            } => {
                writeln!(
                    out,
                    "{:.6},{},{:.6},{:.6}",
                    r.sweep_value, r.metric, value_4g, value_icna
                )
                .unwrap();
            }
            RowValues::PerScheme { gtp, ipinip, gre } => {
                writeln!(
                    out,
                    "{:.6},{},{:.6},{:.6},{:.6}",
                    r.sweep_value, r.metric, gtp, ipinip, gre
                )
                .unwrap();
            }
            RowValues::Error(msg) => {
                let cleaned = msg.replace([',', '\n'], ";");
                writeln!(out, "{:.6},{}_error,{},", r.sweep_value, r.metric, cleaned).unwrap();
            }
        }
    }
    Ok(out)
}

/// Write rows to `path` as CSV.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), ExperimentError> {
    let csv = render_csv(rows)?;
    std::fs::write(path, csv)?;
    Ok(())
}

// ---- scenario files ----------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    metric: String,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    outer_header: Option<String>,
    #[serde(default)]
    simulate: bool,
    sweep: SweepSection,
    #[serde(default)]
    params: ParamSection,
    #[serde(default)]
    hops: HopSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    param: String,
    from: f64,
    to: f64,
    step: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct ParamSection {
    L_wl: Option<f64>,
    L_w: Option<f64>,
    q: Option<f64>,
    T_q: Option<f64>,
    S_c: Option<f64>,
    S_d: Option<f64>,
    B_wl: Option<f64>,
    B_w: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HopSection {
    alpha: Option<u32>,
    beta: Option<u32>,
    gamma: Option<u32>,
    delta: Option<u32>,
    epsilon: Option<u32>,
    lambda: Option<u32>,
}

/// Parse a scenario file (TOML `key = value` sections).
pub fn parse_scenario(text: &str) -> Result<Scenario, ExperimentError> {
    let file: ScenarioFile =
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
    let mut params = DelayParams::default();
    let ps = &file.params;
    if let Some(v) = ps.L_wl {
        params.wireless_latency_ms = v;
    }
    if let Some(v) = ps.L_w {
        params.wired_latency_ms = v;
    }
    if let Some(v) = ps.q {
        params.failure_prob = v;
    }
    if let Some(v) = ps.T_q {
        params.queue_delay_ms = v;
    }
    if let Some(v) = ps.S_c {
        params.control_packet_bytes = v;
    }
    if let Some(v) = ps.S_d {
        params.data_packet_bytes = v;
    }
    if let Some(v) = ps.B_wl {
        params.wireless_bandwidth_mbps = v;
    }
    if let Some(v) = ps.B_w {
        params.wired_bandwidth_mbps = v;
    }
    let mut hops = HopCounts::default();
    let hs = &file.hops;
    if let Some(v) = hs.alpha {
        hops.access_gateway = v;
    }
    if let Some(v) = hs.beta {
        hops.gateway_chain = v;
    }
    if let Some(v) = hs.gamma {
        hops.access_controller = v;
    }
    if let Some(v) = hs.delta {
        hops.controller_registry = v;
    }
    if let Some(v) = hs.epsilon {
        hops.controller_gateway = v;
    }
    if let Some(v) = hs.lambda {
        hops.inter_access = v;
    }
    let mode = match file.mode.as_deref() {
        None | Some("expected") => WirelessMode::ExpectedValue,
        Some("stochastic") => WirelessMode::Stochastic {
            seed: file.seed.unwrap_or(0),
        },
        Some(other) => {
            return Err(ExperimentError::Config(format!(
                "unknown mode `{other}` (expected `expected` or `stochastic`)"
            )))
        }
    };
    let outer_mode = parse_outer_header(file.outer_header.as_deref())?;
    let scenario = Scenario {
        name: file.name,
        metric: Metric::parse(&file.metric)?,
        sweep: SweepParam::parse(&file.sweep.param)?,
        from: file.sweep.from,
        to: file.sweep.to,
        step: file.sweep.step,
        params,
        hops,
        delay_cfg: DelayConfig::default(),
        mode,
        outer_mode,
        simulate: file.simulate,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Parse an outer-header selector (`compact` is the default layout).
pub fn parse_outer_header(s: Option<&str>) -> Result<OuterHeaderMode, ExperimentError> {
    match s {
        None | Some("compact") => Ok(OuterHeaderMode::Compact),
        Some("standard") => Ok(OuterHeaderMode::StandardIpv4),
        Some(other) => Err(ExperimentError::Config(format!(
            "unknown outer header `{other}` (expected `compact` or `standard`)"
        ))),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ExperimentError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ttd_scenario() -> Scenario {
        Scenario {
            name: "test".into(),
            metric: Metric::Ttd,
            sweep: SweepParam::QueueDelay,
            from: 1.0,
            to: 10.0,
            step: 1.0,
            params: DelayParams::default(),
            hops: HopCounts::default(),
            delay_cfg: DelayConfig::default(),
            mode: WirelessMode::ExpectedValue,
            outer_mode: OuterHeaderMode::Compact,
            simulate: false,
        }
    }

    #[test]
    fn ttd_sweep_keeps_icna_below_4g() {
        let rows = run_sweep(&ttd_scenario()).unwrap();
        assert_eq!(rows.len(), 10);
        for r in &rows {
            match r.values {
                RowValues::ArchPair {
                    value_4g,
                    value_icna,
                } => assert!(value_icna < value_4g),
                _ => panic!("unexpected row shape"),
            }
        }
    }

    #[test]
    fn dto_sweep_reference_point() {
        let s = Scenario {
            metric: Metric::Dto,
            sweep: SweepParam::DataPacketBytes,
            from: 100.0,
            to: 1000.0,
            step: 100.0,
            ..ttd_scenario()
        };
        let rows = run_sweep(&s).unwrap();
        let at200 = rows.iter().find(|r| r.sweep_value == 200.0).unwrap();
        match at200.values {
            RowValues::PerScheme { gtp, ipinip, .. } => {
                assert!((gtp - 15.254237).abs() < 1e-4);
                assert!((ipinip - 13.793103).abs() < 1e-4);
            }
            _ => panic!("unexpected row shape"),
        }
    }

    #[test]
    fn standard_outer_header_raises_ipinip_overhead() {
        let s = Scenario {
            metric: Metric::Dto,
            sweep: SweepParam::DataPacketBytes,
            from: 200.0,
            to: 200.0,
            step: 1.0,
            outer_mode: OuterHeaderMode::StandardIpv4,
            ..ttd_scenario()
        };
        let rows = run_sweep(&s).unwrap();
        match rows[0].values {
            // 40 header bytes over a 200-byte payload.
            RowValues::PerScheme { ipinip, .. } => {
                assert!((ipinip - 40.0 / 240.0 * 100.0).abs() < 1e-9)
            }
            _ => panic!("unexpected row shape"),
        }
    }

    #[test]
    fn inter_access_sweep_slopes() {
        // X2 counts 2 inter-access legs, the inter-gateway handover 3;
        // slopes in the swept hop count must be 2 and 3 per-hop delays.
        let s = Scenario {
            metric: Metric::HandoverInterVsX2,
            sweep: SweepParam::InterAccessHops,
            from: 1.0,
            to: 8.0,
            step: 1.0,
            ..ttd_scenario()
        };
        let rows = run_sweep(&s).unwrap();
        let per_hop = crate::delay::wired_delay(50.0, 1, &DelayParams::default());
        let vals: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| match r.values {
                RowValues::ArchPair {
                    value_4g,
                    value_icna,
                } => (value_4g, value_icna),
                _ => panic!(),
            })
            .collect();
        for w in vals.windows(2) {
            assert!((w[1].0 - w[0].0 - 2.0 * per_hop).abs() < 1e-9);
            assert!((w[1].1 - w[0].1 - 3.0 * per_hop).abs() < 1e-9);
        }
        // 4G above ICNA at the default hop counts.
        assert!(vals[1].0 > vals[1].1);
    }

    #[test]
    fn csv_is_deterministic_and_fixed_format() {
        let rows = run_sweep(&ttd_scenario()).unwrap();
        let a = render_csv(&rows).unwrap();
        let b = render_csv(&rows).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("sweep_value,metric,value_4g,value_icna\n"));
        assert_eq!(a.lines().count(), 11);
    }

    #[test]
    fn empty_rows_are_rejected() {
        assert!(matches!(render_csv(&[]), Err(ExperimentError::EmptyRows)));
    }

    #[test]
    fn scenario_file_roundtrip() {
        let text = r#"
name = "ttd_vs_queue_delay"
metric = "ttd"
simulate = true

[sweep]
param = "T_q"
from = 1.0
to = 10.0
step = 1.0

[params]
T_q = 5.0

[hops]
gamma = 2
"#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.metric, Metric::Ttd);
        assert_eq!(s.sweep, SweepParam::QueueDelay);
        assert!(s.simulate);
    }

    #[test]
    fn unknown_sweep_param_is_config_error() {
        let text = r#"
name = "bad"
metric = "ttd"

[sweep]
param = "frobnitz"
from = 1.0
to = 2.0
step = 1.0
"#;
        assert!(matches!(
            parse_scenario(text),
            Err(ExperimentError::Config(_))
        ));
    }

    #[test]
    fn unrealizable_point_becomes_error_row_and_sweep_continues() {
        let s = Scenario {
            metric: Metric::HandoverInterVsX2,
            sweep: SweepParam::InterAccessHops,
            from: 1.0,
            to: 6.0,
            step: 1.0,
            simulate: true,
            hops: HopCounts {
                access_controller: 1,
                ..Default::default()
            },
            ..ttd_scenario()
        };
        // inter-access > 2 is unrealizable when both BSs sit one hop
        // from the controller.
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 12);
        let sim_errors = rows
            .iter()
            .filter(|r| matches!(r.values, RowValues::Error(_)))
            .count();
        assert!(sim_errors >= 4, "expected error rows, got {sim_errors}");
        let csv = render_csv(&rows).unwrap();
        assert!(csv.contains("_sim_error"));
    }
}
