//! Encapsulation header codecs and tunneling-overhead arithmetic.
//!
//! Three schemes are supported, matching the data planes of the two
//! architectures plus the handover bridge:
//!
//! * [`Scheme::Gtp4g`] — IP/UDP/GTP, 36 header bytes (the EPC user plane)
//! * [`Scheme::IpInIpIcna`] — compact outer IP + inner IPv4, 32 header bytes
//! * [`Scheme::GreHandover`] — IPv4 + keyed GRE, 28 header bytes
//!
//! The compact 12-byte outer header is not a standard wire format; its
//! layout is pinned here (and by the golden vectors in `tests/golden/`) as
//! two 4-byte addresses, a protocol byte, a reserved byte and a 16-bit
//! payload length. [`OuterHeaderMode::StandardIpv4`] substitutes a full
//! 20-byte IPv4 outer header for sensitivity runs.
//!
//! ```
//! use coresim::wire::{encapsulate, decapsulate, decode, Addressing, Scheme};
//!
//! let addr = Addressing::outer(0xC0A80101, 0xC0A80201).with_inner(0x0A000001, 0x0A000101);
//! let frame = encapsulate(Scheme::IpInIpIcna, &addr, b"hello").unwrap();
//! assert_eq!(frame.encoded_len(), 32 + 5);
//!
//! let back = decode(Scheme::IpInIpIcna, &frame.encode()).unwrap();
//! let (addressing, payload) = decapsulate(&back).unwrap();
//! assert_eq!(payload, b"hello");
//! assert_eq!(addressing.inner_dst, Some(0x0A000101));
//! ```

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CodecError {
    #[error("scheme {0:?} cannot carry this operation")]
    InvalidScheme(Scheme),
    #[error("addressing incomplete for {scheme:?}: missing {missing}")]
    IncompleteAddressing {
        scheme: Scheme,
        missing: &'static str,
    },
    #[error("malformed frame: need at least {need} bytes, got {got}")]
    MalformedFrame { need: usize, got: usize },
    #[error("scheme mismatch while decoding {scheme:?}: {detail}")]
    SchemeMismatch {
        scheme: Scheme,
        detail: &'static str,
    },
}

/// Encapsulation scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Gtp4g,
    IpInIpIcna,
    GreHandover,
    None,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Gtp4g => "GTP_4G",
            Scheme::IpInIpIcna => "IPINIP_ICNA",
            Scheme::GreHandover => "GRE_HANDOVER",
            Scheme::None => "NONE",
        }
    }

    pub fn from_str_name(s: &str) -> Option<Scheme> {
        match s {
            "GTP_4G" => Some(Scheme::Gtp4g),
            "IPINIP_ICNA" => Some(Scheme::IpInIpIcna),
            "GRE_HANDOVER" => Some(Scheme::GreHandover),
            "NONE" => Some(Scheme::None),
            _ => None,
        }
    }
}

/// Outer-header choice for the IP-in-IP scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OuterHeaderMode {
    /// 12-byte compact outer header (default).
    #[default]
    Compact,
    /// Full 20-byte IPv4 outer header.
    StandardIpv4,
}

/// IP protocol numbers used in the `protocol` field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpProtocol {
    Udp,
    Gre,
    IpInIp,
    Other,
}

impl IpProtocol {
    pub fn number(self) -> u8 {
        match self {
            IpProtocol::Udp => 17,
            IpProtocol::Gre => 47,
            IpProtocol::IpInIp => 4,
            IpProtocol::Other => 0,
        }
    }

    pub fn from_number(n: u8) -> IpProtocol {
        match n {
            17 => IpProtocol::Udp,
            47 => IpProtocol::Gre,
            4 => IpProtocol::IpInIp,
            _ => IpProtocol::Other,
        }
    }
}

pub const IPV4_HEADER_LEN: usize = 20;
pub const COMPACT_OUTER_LEN: usize = 12;
pub const UDP_HEADER_LEN: usize = 8;
pub const GTP_HEADER_LEN: usize = 8;
pub const GRE_HEADER_LEN: usize = 8;

/// GTP-U port used in the UDP header of the 4G stack.
pub const GTPU_PORT: u16 = 2152;

/// Standard 20-byte IPv4 header. Fields not listed are encoded as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ipv4Header {
    pub protocol: IpProtocol,
    pub src: u32,
    pub dst: u32,
    pub total_length: u16,
}

impl Ipv4Header {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(0x45); // version 4, IHL 5
        out.push(0);
        out.extend_from_slice(&self.total_length.to_be_bytes());
        out.extend_from_slice(&[0; 5]); // id, flags/frag, ttl
        out.push(self.protocol.number());
        out.extend_from_slice(&[0, 0]); // checksum
        out.extend_from_slice(&self.src.to_be_bytes());
        out.extend_from_slice(&self.dst.to_be_bytes());
    }

    pub fn decode(scheme: Scheme, buf: &[u8]) -> Result<(Ipv4Header, &[u8]), CodecError> {
        let rest = take(scheme, buf, IPV4_HEADER_LEN)?;
        if buf[0] != 0x45 {
            return Err(CodecError::SchemeMismatch {
                scheme,
                detail: "bad IPv4 version/IHL byte",
            });
        }
        let hdr = Ipv4Header {
            protocol: IpProtocol::from_number(buf[9]),
            src: u32::from_be_bytes(buf[12..16].try_into().unwrap()),
            dst: u32::from_be_bytes(buf[16..20].try_into().unwrap()),
            total_length: u16::from_be_bytes(buf[2..4].try_into().unwrap()),
        };
        Ok((hdr, rest))
    }
}

/// The 12-byte compact outer header of the IP-in-IP core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompactOuterHeader {
    pub src: u32,
    pub dst: u32,
    pub protocol: IpProtocol,
    pub payload_length: u16,
}

impl CompactOuterHeader {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.src.to_be_bytes());
        out.extend_from_slice(&self.dst.to_be_bytes());
        out.push(self.protocol.number());
        out.push(0); // reserved
        out.extend_from_slice(&self.payload_length.to_be_bytes());
    }

    pub fn decode(scheme: Scheme, buf: &[u8]) -> Result<(CompactOuterHeader, &[u8]), CodecError> {
        let rest = take(scheme, buf, COMPACT_OUTER_LEN)?;
        let hdr = CompactOuterHeader {
            src: u32::from_be_bytes(buf[0..4].try_into().unwrap()),
            dst: u32::from_be_bytes(buf[4..8].try_into().unwrap()),
            protocol: IpProtocol::from_number(buf[8]),
            payload_length: u16::from_be_bytes(buf[10..12].try_into().unwrap()),
        };
        Ok((hdr, rest))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UdpHeader {
    pub src_port: u16,
    pub dst_port: u16,
    pub length: u16,
    pub checksum: u16,
}

impl UdpHeader {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.src_port.to_be_bytes());
        out.extend_from_slice(&self.dst_port.to_be_bytes());
        out.extend_from_slice(&self.length.to_be_bytes());
        out.extend_from_slice(&self.checksum.to_be_bytes());
    }

    pub fn decode(scheme: Scheme, buf: &[u8]) -> Result<(UdpHeader, &[u8]), CodecError> {
        let rest = take(scheme, buf, UDP_HEADER_LEN)?;
        let hdr = UdpHeader {
            src_port: u16::from_be_bytes(buf[0..2].try_into().unwrap()),
            dst_port: u16::from_be_bytes(buf[2..4].try_into().unwrap()),
            length: u16::from_be_bytes(buf[4..6].try_into().unwrap()),
            checksum: u16::from_be_bytes(buf[6..8].try_into().unwrap()),
        };
        Ok((hdr, rest))
    }
}

/// GTP-U flags byte: version 1, protocol type GTP.
pub const GTP_FLAGS: u8 = 0x30;
/// GTP-U message type for user data (G-PDU).
pub const GTP_MSG_GPDU: u8 = 0xFF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GtpUHeader {
    pub flags: u8,
    pub message_type: u8,
    pub length: u16,
    pub teid: u32,
}

impl GtpUHeader {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.push(self.flags);
        out.push(self.message_type);
        out.extend_from_slice(&self.length.to_be_bytes());
        out.extend_from_slice(&self.teid.to_be_bytes());
    }

    pub fn decode(scheme: Scheme, buf: &[u8]) -> Result<(GtpUHeader, &[u8]), CodecError> {
        let rest = take(scheme, buf, GTP_HEADER_LEN)?;
        let hdr = GtpUHeader {
            flags: buf[0],
            message_type: buf[1],
            length: u16::from_be_bytes(buf[2..4].try_into().unwrap()),
            teid: u32::from_be_bytes(buf[4..8].try_into().unwrap()),
        };
        Ok((hdr, rest))
    }
}

/// Key-present bit in the GRE flags word.
pub const GRE_FLAG_KEY_PRESENT: u16 = 0x2000;
/// EtherType carried in the GRE protocol field (IPv4).
pub const GRE_PROTO_IPV4: u16 = 0x0800;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GreHeader {
    pub flags: u16,
    pub protocol_type: u16,
    pub key: u32,
}

impl GreHeader {
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.flags.to_be_bytes());
        out.extend_from_slice(&self.protocol_type.to_be_bytes());
        out.extend_from_slice(&self.key.to_be_bytes());
    }

    pub fn decode(scheme: Scheme, buf: &[u8]) -> Result<(GreHeader, &[u8]), CodecError> {
        let rest = take(scheme, buf, GRE_HEADER_LEN)?;
        let hdr = GreHeader {
            flags: u16::from_be_bytes(buf[0..2].try_into().unwrap()),
            protocol_type: u16::from_be_bytes(buf[2..4].try_into().unwrap()),
            key: u32::from_be_bytes(buf[4..8].try_into().unwrap()),
        };
        if hdr.flags & GRE_FLAG_KEY_PRESENT == 0 {
            return Err(CodecError::SchemeMismatch {
                scheme,
                detail: "GRE key-present flag not set",
            });
        }
        Ok((hdr, rest))
    }
}

fn take(scheme: Scheme, buf: &[u8], need: usize) -> Result<&[u8], CodecError> {
    let _ = scheme;
    if buf.len() < need {
        Err(CodecError::MalformedFrame {
            need,
            got: buf.len(),
        })
    } else {
        Ok(&buf[need..])
    }
}

/// One header in an encapsulated frame, outermost first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Header {
    Ipv4(Ipv4Header),
    CompactOuter(CompactOuterHeader),
    Udp(UdpHeader),
    Gtp(GtpUHeader),
    Gre(GreHeader),
}

impl Header {
    pub fn encoded_len(&self) -> usize {
        match self {
            Header::Ipv4(_) => IPV4_HEADER_LEN,
            Header::CompactOuter(_) => COMPACT_OUTER_LEN,
            Header::Udp(_) => UDP_HEADER_LEN,
            Header::Gtp(_) => GTP_HEADER_LEN,
            Header::Gre(_) => GRE_HEADER_LEN,
        }
    }

    fn encode(&self, out: &mut Vec<u8>) {
        match self {
            Header::Ipv4(h) => h.encode(out),
            Header::CompactOuter(h) => h.encode(out),
            Header::Udp(h) => h.encode(out),
            Header::Gtp(h) => h.encode(out),
            Header::Gre(h) => h.encode(out),
        }
    }
}

/// Address material for building a frame. Schemes pick the fields they need.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Addressing {
    pub outer_src: Option<u32>,
    pub outer_dst: Option<u32>,
    pub inner_src: Option<u32>,
    pub inner_dst: Option<u32>,
    /// TEID for GTP, tunnel key for GRE.
    pub tunnel_id: Option<u32>,
}

impl Addressing {
    pub fn outer(src: u32, dst: u32) -> Addressing {
        Addressing {
            outer_src: Some(src),
            outer_dst: Some(dst),
            ..Default::default()
        }
    }

    pub fn with_inner(mut self, src: u32, dst: u32) -> Addressing {
        self.inner_src = Some(src);
        self.inner_dst = Some(dst);
        self
    }

    pub fn with_tunnel_id(mut self, id: u32) -> Addressing {
        self.tunnel_id = Some(id);
        self
    }
}

/// An encapsulated data-plane frame: ordered headers plus payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncapsulatedFrame {
    pub scheme: Scheme,
    pub headers: Vec<Header>,
    pub payload: Vec<u8>,
}

impl EncapsulatedFrame {
    pub fn encoded_len(&self) -> usize {
        self.headers.iter().map(Header::encoded_len).sum::<usize>() + self.payload.len()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        for h in &self.headers {
            h.encode(&mut out);
        }
        out.extend_from_slice(&self.payload);
        out
    }
}

/// Header bytes added by `scheme` under the given outer-header mode.
pub fn header_overhead_bytes(scheme: Scheme, mode: OuterHeaderMode) -> usize {
    match scheme {
        Scheme::Gtp4g => IPV4_HEADER_LEN + UDP_HEADER_LEN + GTP_HEADER_LEN, // 36
        Scheme::IpInIpIcna => match mode {
            OuterHeaderMode::Compact => COMPACT_OUTER_LEN + IPV4_HEADER_LEN, // 32
            OuterHeaderMode::StandardIpv4 => 2 * IPV4_HEADER_LEN,            // 40
        },
        Scheme::GreHandover => IPV4_HEADER_LEN + GRE_HEADER_LEN, // 28
        Scheme::None => 0,
    }
}

fn require(scheme: Scheme, field: Option<u32>, missing: &'static str) -> Result<u32, CodecError> {
    field.ok_or(CodecError::IncompleteAddressing { scheme, missing })
}

/// Build a frame for `scheme` with the default (compact) outer header.
pub fn encapsulate(
    scheme: Scheme,
    addressing: &Addressing,
    payload: &[u8],
) -> Result<EncapsulatedFrame, CodecError> {
    encapsulate_with(scheme, OuterHeaderMode::Compact, addressing, payload)
}

/// Build a frame for `scheme`, choosing the IP-in-IP outer-header layout.
pub fn encapsulate_with(
    scheme: Scheme,
    mode: OuterHeaderMode,
    addressing: &Addressing,
    payload: &[u8],
) -> Result<EncapsulatedFrame, CodecError> {
    let plen = payload.len();
    let headers = match scheme {
        Scheme::Gtp4g => {
            let src = require(scheme, addressing.outer_src, "outer_src")?;
            let dst = require(scheme, addressing.outer_dst, "outer_dst")?;
            let teid = require(scheme, addressing.tunnel_id, "tunnel_id (TEID)")?;
            vec![
                Header::Ipv4(Ipv4Header {
                    protocol: IpProtocol::Udp,
                    src,
                    dst,
                    total_length: (IPV4_HEADER_LEN + UDP_HEADER_LEN + GTP_HEADER_LEN + plen) as u16,
                }),
                Header::Udp(UdpHeader {
                    src_port: GTPU_PORT,
                    dst_port: GTPU_PORT,
                    length: (UDP_HEADER_LEN + GTP_HEADER_LEN + plen) as u16,
                    checksum: 0,
                }),
                Header::Gtp(GtpUHeader {
                    flags: GTP_FLAGS,
                    message_type: GTP_MSG_GPDU,
                    length: plen as u16,
                    teid,
                }),
            ]
        }
        Scheme::IpInIpIcna => {
            let osrc = require(scheme, addressing.outer_src, "outer_src")?;
            let odst = require(scheme, addressing.outer_dst, "outer_dst")?;
            let isrc = require(scheme, addressing.inner_src, "inner_src")?;
            let idst = require(scheme, addressing.inner_dst, "inner_dst")?;
            let inner = Header::Ipv4(Ipv4Header {
                protocol: IpProtocol::Other,
                src: isrc,
                dst: idst,
                total_length: (IPV4_HEADER_LEN + plen) as u16,
            });
            let outer = match mode {
                OuterHeaderMode::Compact => Header::CompactOuter(CompactOuterHeader {
                    src: osrc,
                    dst: odst,
                    protocol: IpProtocol::IpInIp,
                    payload_length: (IPV4_HEADER_LEN + plen) as u16,
                }),
                OuterHeaderMode::StandardIpv4 => Header::Ipv4(Ipv4Header {
                    protocol: IpProtocol::IpInIp,
                    src: osrc,
                    dst: odst,
                    total_length: (2 * IPV4_HEADER_LEN + plen) as u16,
                }),
            };
            vec![outer, inner]
        }
        Scheme::GreHandover => {
            let src = require(scheme, addressing.outer_src, "outer_src")?;
            let dst = require(scheme, addressing.outer_dst, "outer_dst")?;
            let key = require(scheme, addressing.tunnel_id, "tunnel_id (GRE key)")?;
            vec![
                Header::Ipv4(Ipv4Header {
                    protocol: IpProtocol::Gre,
                    src,
                    dst,
                    total_length: (IPV4_HEADER_LEN + GRE_HEADER_LEN + plen) as u16,
                }),
                Header::Gre(GreHeader {
                    flags: GRE_FLAG_KEY_PRESENT,
                    protocol_type: GRE_PROTO_IPV4,
                    key,
                }),
            ]
        }
        Scheme::None => vec![],
    };
    Ok(EncapsulatedFrame {
        scheme,
        headers,
        payload: payload.to_vec(),
    })
}

/// Parse raw bytes claimed to carry `scheme` back into a frame.
pub fn decode(scheme: Scheme, bytes: &[u8]) -> Result<EncapsulatedFrame, CodecError> {
    decode_with(scheme, OuterHeaderMode::Compact, bytes)
}

pub fn decode_with(
    scheme: Scheme,
    mode: OuterHeaderMode,
    bytes: &[u8],
) -> Result<EncapsulatedFrame, CodecError> {
    let min = header_overhead_bytes(scheme, mode);
    if bytes.len() < min {
        return Err(CodecError::MalformedFrame {
            need: min,
            got: bytes.len(),
        });
    }
    let mut headers = Vec::new();
    let rest = match scheme {
        Scheme::Gtp4g => {
            let (ip, rest) = Ipv4Header::decode(scheme, bytes)?;
            if ip.protocol != IpProtocol::Udp {
                return Err(CodecError::SchemeMismatch {
                    scheme,
                    detail: "outer IPv4 protocol is not UDP",
                });
            }
            let (udp, rest) = UdpHeader::decode(scheme, rest)?;
            let (gtp, rest) = GtpUHeader::decode(scheme, rest)?;
            headers.push(Header::Ipv4(ip));
            headers.push(Header::Udp(udp));
            headers.push(Header::Gtp(gtp));
            rest
        }
        Scheme::IpInIpIcna => {
            let rest = match mode {
                OuterHeaderMode::Compact => {
                    let (outer, rest) = CompactOuterHeader::decode(scheme, bytes)?;
                    if outer.protocol != IpProtocol::IpInIp {
                        return Err(CodecError::SchemeMismatch {
                            scheme,
                            detail: "outer protocol is not IP-in-IP",
                        });
                    }
                    headers.push(Header::CompactOuter(outer));
                    rest
                }
                OuterHeaderMode::StandardIpv4 => {
                    let (outer, rest) = Ipv4Header::decode(scheme, bytes)?;
                    if outer.protocol != IpProtocol::IpInIp {
                        return Err(CodecError::SchemeMismatch {
                            scheme,
                            detail: "outer protocol is not IP-in-IP",
                        });
                    }
                    headers.push(Header::Ipv4(outer));
                    rest
                }
            };
            let (inner, rest) = Ipv4Header::decode(scheme, rest)?;
            headers.push(Header::Ipv4(inner));
            rest
        }
        Scheme::GreHandover => {
            let (ip, rest) = Ipv4Header::decode(scheme, bytes)?;
            if ip.protocol != IpProtocol::Gre {
                return Err(CodecError::SchemeMismatch {
                    scheme,
                    detail: "delivery IPv4 protocol is not GRE",
                });
            }
            let (gre, rest) = GreHeader::decode(scheme, rest)?;
            headers.push(Header::Ipv4(ip));
            headers.push(Header::Gre(gre));
            rest
        }
        Scheme::None => bytes,
    };
    Ok(EncapsulatedFrame {
        scheme,
        headers,
        payload: rest.to_vec(),
    })
}

/// Recover `(addressing, payload)` from a frame built by [`encapsulate`].
pub fn decapsulate(frame: &EncapsulatedFrame) -> Result<(Addressing, Vec<u8>), CodecError> {
    let mut addr = Addressing::default();
    match (frame.scheme, frame.headers.as_slice()) {
        (Scheme::Gtp4g, [Header::Ipv4(ip), Header::Udp(_), Header::Gtp(gtp)]) => {
            addr.outer_src = Some(ip.src);
            addr.outer_dst = Some(ip.dst);
            addr.tunnel_id = Some(gtp.teid);
        }
        (Scheme::IpInIpIcna, [Header::CompactOuter(outer), Header::Ipv4(inner)]) => {
            addr.outer_src = Some(outer.src);
            addr.outer_dst = Some(outer.dst);
            addr.inner_src = Some(inner.src);
            addr.inner_dst = Some(inner.dst);
        }
        (Scheme::IpInIpIcna, [Header::Ipv4(outer), Header::Ipv4(inner)]) => {
            addr.outer_src = Some(outer.src);
            addr.outer_dst = Some(outer.dst);
            addr.inner_src = Some(inner.src);
            addr.inner_dst = Some(inner.dst);
        }
        (Scheme::GreHandover, [Header::Ipv4(ip), Header::Gre(gre)]) => {
            addr.outer_src = Some(ip.src);
            addr.outer_dst = Some(ip.dst);
            addr.tunnel_id = Some(gre.key);
        }
        (Scheme::None, []) => {}
        _ => {
            return Err(CodecError::SchemeMismatch {
                scheme: frame.scheme,
                detail: "header stack does not match scheme",
            })
        }
    }
    Ok((addr, frame.payload.clone()))
}

/// Data tunneling overhead in percent: `headers / (headers + payload) × 100`.
pub fn tunneling_overhead_percent(scheme: Scheme, payload_bytes: u64) -> Result<f64, CodecError> {
    tunneling_overhead_percent_with(scheme, OuterHeaderMode::Compact, payload_bytes)
}

pub fn tunneling_overhead_percent_with(
    scheme: Scheme,
    mode: OuterHeaderMode,
    payload_bytes: u64,
) -> Result<f64, CodecError> {
    if scheme == Scheme::None {
        return Err(CodecError::InvalidScheme(scheme));
    }
    let h = header_overhead_bytes(scheme, mode) as f64;
    Ok(h / (h + payload_bytes as f64) * 100.0)
}

/// Fixed reference frames. The byte-level layouts of all three schemes
/// are pinned by golden vectors built from exactly these frames, and the
/// `codec dump` subcommand emits them one per line as `<scheme> <hex>`.
pub fn golden_frames() -> Vec<(Scheme, OuterHeaderMode, EncapsulatedFrame)> {
    let payload: Vec<u8> = (0u8..16).collect();
    let gtp = Addressing::outer(0xC0A80101, 0xC0A80201).with_tunnel_id(0x2A);
    let ipip = Addressing::outer(0xC0A80101, 0xC0A80201).with_inner(0x0A000001, 0x0A000101);
    let gre = Addressing::outer(0xC0A80101, 0xC0A80201).with_tunnel_id(0x2A);
    vec![
        (
            Scheme::Gtp4g,
            OuterHeaderMode::Compact,
            encapsulate(Scheme::Gtp4g, &gtp, &payload).unwrap(),
        ),
        (
            Scheme::IpInIpIcna,
            OuterHeaderMode::Compact,
            encapsulate(Scheme::IpInIpIcna, &ipip, &payload).unwrap(),
        ),
        (
            Scheme::IpInIpIcna,
            OuterHeaderMode::StandardIpv4,
            encapsulate_with(
                Scheme::IpInIpIcna,
                OuterHeaderMode::StandardIpv4,
                &ipip,
                &payload,
            )
            .unwrap(),
        ),
        (
            Scheme::GreHandover,
            OuterHeaderMode::Compact,
            encapsulate(Scheme::GreHandover, &gre, &payload).unwrap(),
        ),
    ]
}

/// Render [`golden_frames`] in the dump format: one `<scheme> <hex>` line
/// per frame.
pub fn render_golden_frames() -> String {
    let mut out = String::new();
    for (scheme, _, frame) in golden_frames() {
        out.push_str(scheme.as_str());
        out.push(' ');
        for b in frame.encode() {
            out.push_str(&format!("{b:02x}"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn any_addr(scheme: Scheme) -> Addressing {
        match scheme {
            Scheme::Gtp4g => Addressing::outer(0xC0A80001, 0xC0A80002).with_tunnel_id(7),
            Scheme::IpInIpIcna => {
                Addressing::outer(0xC0A80001, 0xC0A80002).with_inner(0x0A000001, 0x0A000002)
            }
            Scheme::GreHandover => Addressing::outer(0xC0A80001, 0xC0A80002).with_tunnel_id(42),
            Scheme::None => Addressing::default(),
        }
    }

    #[test]
    fn frame_sizes_match_header_sums() {
        let payload = vec![0xAB; 200];
        let f = encapsulate(Scheme::Gtp4g, &any_addr(Scheme::Gtp4g), &payload).unwrap();
        assert_eq!(f.encoded_len(), 236);
        assert_eq!(f.encode().len(), 236);

        let f = encapsulate(Scheme::IpInIpIcna, &any_addr(Scheme::IpInIpIcna), &[]).unwrap();
        assert_eq!(f.encoded_len(), 32);

        let f = encapsulate(
            Scheme::GreHandover,
            &any_addr(Scheme::GreHandover),
            &payload,
        )
        .unwrap();
        assert_eq!(f.encoded_len(), 228);
    }

    #[test]
    fn standard_outer_mode_is_40_bytes() {
        let f = encapsulate_with(
            Scheme::IpInIpIcna,
            OuterHeaderMode::StandardIpv4,
            &any_addr(Scheme::IpInIpIcna),
            &[],
        )
        .unwrap();
        assert_eq!(f.encoded_len(), 40);
        let back = decode_with(
            Scheme::IpInIpIcna,
            OuterHeaderMode::StandardIpv4,
            &f.encode(),
        )
        .unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn gtp_roundtrip_preserves_teid_and_payload() {
        let payload = vec![0x5A; 50];
        let addr = any_addr(Scheme::Gtp4g);
        let f = encapsulate(Scheme::Gtp4g, &addr, &payload).unwrap();
        let decoded = decode(Scheme::Gtp4g, &f.encode()).unwrap();
        let (got_addr, got_payload) = decapsulate(&decoded).unwrap();
        assert_eq!(got_addr.tunnel_id, Some(7));
        assert_eq!(got_addr.outer_src, addr.outer_src);
        assert_eq!(got_payload, payload);
    }

    #[test]
    fn ipinip_roundtrip_keeps_inner_and_outer_separate() {
        let addr = any_addr(Scheme::IpInIpIcna);
        let f = encapsulate(Scheme::IpInIpIcna, &addr, b"hello").unwrap();
        let (got, payload) =
            decapsulate(&decode(Scheme::IpInIpIcna, &f.encode()).unwrap()).unwrap();
        assert_eq!(got, addr);
        assert_eq!(payload, b"hello");
    }

    #[test]
    fn truncated_gtp_frame_is_malformed() {
        let bytes = [0u8; 10];
        match decode(Scheme::Gtp4g, &bytes) {
            Err(CodecError::MalformedFrame { need: 36, got: 10 }) => {}
            other => panic!("expected malformed-frame error, got {other:?}"),
        }
    }

    #[test]
    fn missing_addressing_is_rejected() {
        let err = encapsulate(Scheme::Gtp4g, &Addressing::default(), &[]).unwrap_err();
        assert!(matches!(err, CodecError::IncompleteAddressing { .. }));
        let err = encapsulate(Scheme::IpInIpIcna, &Addressing::outer(1, 2), &[]).unwrap_err();
        assert!(matches!(err, CodecError::IncompleteAddressing { .. }));
    }

    #[test]
    fn wrong_protocol_field_is_scheme_mismatch() {
        let addr = any_addr(Scheme::GreHandover);
        let f = encapsulate(Scheme::GreHandover, &addr, &[]).unwrap();
        let mut bytes = f.encode();
        bytes[9] = 17; // claim UDP in the delivery header
        assert!(matches!(
            decode(Scheme::GreHandover, &bytes),
            Err(CodecError::SchemeMismatch { .. })
        ));
    }

    #[test]
    fn overhead_reference_points() {
        let gtp = tunneling_overhead_percent(Scheme::Gtp4g, 200).unwrap();
        assert!((gtp - 36.0 / 236.0 * 100.0).abs() < 1e-12);
        let icna = tunneling_overhead_percent(Scheme::IpInIpIcna, 200).unwrap();
        assert!((icna - 32.0 / 232.0 * 100.0).abs() < 1e-12);
        let gre = tunneling_overhead_percent(Scheme::GreHandover, 0).unwrap();
        assert_eq!(gre, 100.0);
        assert!(tunneling_overhead_percent(Scheme::None, 10).is_err());
    }

    #[test]
    fn overhead_matches_byte_counted_frames() {
        for scheme in [Scheme::Gtp4g, Scheme::IpInIpIcna, Scheme::GreHandover] {
            for plen in [0usize, 1, 50, 200, 1500] {
                let f = encapsulate(scheme, &any_addr(scheme), &vec![0u8; plen]).unwrap();
                let total = f.encode().len();
                let counted = (total - plen) as f64 / total as f64 * 100.0;
                let formula = tunneling_overhead_percent(scheme, plen as u64).unwrap();
                assert!((counted - formula).abs() < 1e-12);
            }
        }
    }
}
