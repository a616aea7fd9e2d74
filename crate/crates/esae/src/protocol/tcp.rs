//! TCP transport: length-prefixed wire frames over a stream socket, plus
//! the RESYNC control frame for the reinit policy.
//!
//! Stream layout: each message is a 4-byte big-endian length prefix followed
//! by the message body. A body starting with the wire magic `ESAE` is an
//! encrypted frame; a body starting with `ESRK` is a RESYNC control frame
//! (magic then the 8-byte big-endian failed session index). The stream closes
//! gracefully when the sender shuts down its write half.

use std::io::{ErrorKind, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::time::Duration;

use crate::channel_sim::ChannelParams;
use crate::error::{Error, Result};
use crate::keychain::{KdfParams, SessionKey};
use crate::sakp::{FrameDetections, SakpConfig, SemanticDigest};
use crate::secure_channel::WIRE_MAGIC;

use super::{
    InitialKeyProvider, ReceiverEndpoint, ReceiverOutcome, ResyncPolicy,
    SenderEndpoint, SessionParams, SessionTrace, StepRecord, AUTH_FAIL_DIGEST,
};

pub const RESYNC_MAGIC: [u8; 4] = *b"ESRK";
const RESYNC_BODY_LEN: usize = 12;
/// Cap on a single message body; guards against hostile length prefixes.
const MAX_MSG_LEN: usize = 64 * 1024 * 1024;

fn write_msg(stream: &mut TcpStream, body: &[u8]) -> Result<()> {
    let len = u32::try_from(body.len())
        .map_err(|_| Error::Protocol("message exceeds u32 length prefix".into()))?;
    stream.write_all(&len.to_be_bytes())?;
    stream.write_all(body)?;
    Ok(())
}

/// Reads one length-prefixed message. `Ok(None)` on clean end of stream.
fn read_msg(stream: &mut TcpStream) -> Result<Option<Vec<u8>>> {
    let mut len_buf = [0u8; 4];
    match stream.read_exact(&mut len_buf) {
        Ok(()) => {}
        Err(e) if e.kind() == ErrorKind::UnexpectedEof => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let len = u32::from_be_bytes(len_buf) as usize;
    if len == 0 || len > MAX_MSG_LEN {
        return Err(Error::Protocol(format!("unreasonable message length {len}")));
    }
    let mut body = vec![0u8; len];
    stream.read_exact(&mut body).map_err(|e| {
        if e.kind() == ErrorKind::UnexpectedEof {
            Error::Protocol("stream closed mid-message".into())
        } else {
            Error::from(e)
        }
    })?;
    Ok(Some(body))
}

fn encode_resync(failed_index: u64) -> Vec<u8> {
    let mut body = Vec::with_capacity(RESYNC_BODY_LEN);
    body.extend_from_slice(&RESYNC_MAGIC);
    body.extend_from_slice(&failed_index.to_be_bytes());
    body
}

fn decode_resync(body: &[u8]) -> Result<u64> {
    if body.len() != RESYNC_BODY_LEN || body[..4] != RESYNC_MAGIC {
        return Err(Error::Protocol("malformed RESYNC control frame".into()));
    }
    Ok(u64::from_be_bytes(body[4..12].try_into().unwrap()))
}

/// Sender-side record of one transmitted frame; `key` is kept for
/// out-of-band key comparison by the measuring harness only.
#[derive(Debug, Clone)]
pub struct SenderRow {
    pub step: u64,
    pub session_index: u64,
    pub digest: SemanticDigest,
    pub key: SessionKey,
}

/// Receiver-side record of one received frame.
#[derive(Debug, Clone)]
pub struct ReceiverRow {
    pub step: u64,
    pub session_index: u64,
    pub auth_ok: bool,
    pub receiver_digest: Option<String>,
    pub resync: bool,
    pub key: SessionKey,
}

#[derive(Debug, Clone)]
pub struct ReceiverReport {
    pub rows: Vec<ReceiverRow>,
    pub frames_ok: u64,
    pub auth_failures: u64,
    pub resyncs: u64,
}

/// A connected sending endpoint.
pub struct TcpSender {
    stream: TcpStream,
    endpoint: SenderEndpoint,
    rows: Vec<SenderRow>,
    step: u64,
}

impl TcpSender {
    pub fn connect(
        addr: SocketAddr,
        cfg: SakpConfig,
        kdf: KdfParams,
        provider: Box<dyn InitialKeyProvider>,
    ) -> Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true).ok();
        Ok(TcpSender {
            stream,
            endpoint: SenderEndpoint::new(cfg, kdf, provider)?,
            rows: Vec::new(),
            step: 0,
        })
    }

    /// Handles any control traffic that has already arrived, then seals and
    /// sends one frame.
    pub fn send_frame(&mut self, frame: &FrameDetections) -> Result<()> {
        self.poll_control()?;
        self.step += 1;
        let key = self.endpoint.current_key().clone();
        let sent = self.endpoint.step(frame)?;
        write_msg(&mut self.stream, &sent.wire)?;
        self.rows.push(SenderRow {
            step: self.step,
            session_index: sent.session_index,
            digest: sent.digest,
            key,
        });
        Ok(())
    }

    /// Non-blocking check for a pending RESYNC; re-initializes on receipt.
    pub fn poll_control(&mut self) -> Result<bool> {
        self.stream.set_nonblocking(true)?;
        let mut probe = [0u8; 1];
        let pending = match self.stream.peek(&mut probe) {
            Ok(0) => false,
            Ok(_) => true,
            Err(e) if e.kind() == ErrorKind::WouldBlock => false,
            Err(e) => {
                self.stream.set_nonblocking(false)?;
                return Err(e.into());
            }
        };
        self.stream.set_nonblocking(false)?;
        if !pending {
            return Ok(false);
        }
        self.read_control()?;
        Ok(true)
    }

    /// Blocking read of one RESYNC control frame; re-initializes the chain.
    pub fn wait_resync(&mut self) -> Result<u64> {
        self.read_control()
    }

    fn read_control(&mut self) -> Result<u64> {
        let body = read_msg(&mut self.stream)?
            .ok_or_else(|| Error::Protocol("peer closed while a control frame was expected".into()))?;
        let failed_index = decode_resync(&body)?;
        self.endpoint.resync()?;
        Ok(failed_index)
    }

    /// Shuts down the write half and returns the send log.
    pub fn finish(self) -> Result<Vec<SenderRow>> {
        self.stream.shutdown(std::net::Shutdown::Write)?;
        Ok(self.rows)
    }

    pub fn endpoint(&self) -> &SenderEndpoint {
        &self.endpoint
    }
}

/// Accepts one connection and runs the receiver loop until the peer closes
/// its write half. A malformed frame aborts the session with a protocol
/// error and the partial report is lost by design.
pub fn serve_one(
    listener: &TcpListener,
    cfg: SakpConfig,
    kdf: KdfParams,
    provider: Box<dyn InitialKeyProvider>,
    policy: ResyncPolicy,
    channel: &ChannelParams,
) -> Result<ReceiverReport> {
    let (mut stream, _peer) = listener.accept()?;
    stream.set_nodelay(true).ok();
    stream.set_read_timeout(Some(Duration::from_secs(30)))?;
    let mut endpoint = ReceiverEndpoint::new(cfg, kdf, provider, policy)?;
    let mut rows = Vec::new();
    let mut step = 0u64;
    while let Some(body) = read_msg(&mut stream)? {
        if body.len() >= 4 && body[..4] == RESYNC_MAGIC {
            return Err(Error::Protocol("receiver got a RESYNC control frame".into()));
        }
        if body.len() < 4 || body[..4] != WIRE_MAGIC {
            return Err(Error::Protocol("unknown message magic; disconnecting".into()));
        }
        step += 1;
        let key = endpoint.current_key().clone();
        match endpoint.step(&body, channel)? {
            ReceiverOutcome::Reconstructed { digest, session_index, .. } => {
                rows.push(ReceiverRow {
                    step,
                    session_index,
                    auth_ok: true,
                    receiver_digest: Some(digest.to_string()),
                    resync: false,
                    key,
                });
            }
            ReceiverOutcome::AuthFailed { session_index } => {
                rows.push(ReceiverRow {
                    step,
                    session_index,
                    auth_ok: false,
                    receiver_digest: Some(AUTH_FAIL_DIGEST.to_string()),
                    resync: false,
                    key,
                });
            }
            ReceiverOutcome::ResyncRequested { failed_index } => {
                write_msg(&mut stream, &encode_resync(failed_index))?;
                endpoint.resync()?;
                rows.push(ReceiverRow {
                    step,
                    session_index: failed_index,
                    auth_ok: false,
                    receiver_digest: None,
                    resync: true,
                    key,
                });
            }
        }
    }
    let stats = endpoint.stats();
    Ok(ReceiverReport {
        rows,
        frames_ok: stats.frames_ok,
        auth_failures: stats.auth_failures,
        resyncs: stats.resyncs,
    })
}

/// Merges side logs into the same trace shape the in-process harness emits.
/// Key comparison happens here, in the harness, never on the wire.
pub fn merge_reports(sender_rows: &[SenderRow], report: &ReceiverReport) -> Result<SessionTrace> {
    if sender_rows.len() != report.rows.len() {
        return Err(Error::Protocol(format!(
            "side logs disagree on step count: sender {}, receiver {}",
            sender_rows.len(),
            report.rows.len()
        )));
    }
    let steps = sender_rows
        .iter()
        .zip(&report.rows)
        .map(|(s, r)| StepRecord {
            step: s.step,
            session_index: s.session_index,
            key_match: s.key.bytes() == r.key.bytes(),
            auth_ok: r.auth_ok,
            sender_digest: s.digest.to_string(),
            receiver_digest: r.receiver_digest.clone(),
            resync: r.resync,
        })
        .collect();
    Ok(SessionTrace {
        steps,
        frames_ok: report.frames_ok,
        auth_failures: report.auth_failures,
        resyncs: report.resyncs,
    })
}

/// Loopback harness: runs the receiver in a second thread, the sender on
/// this one, and merges the side logs into a [`SessionTrace`].
///
/// Streaming is pipelined, so with [`ResyncPolicy::ReinitOnFailure`] the
/// number of frames a sender pushes before reacting to a RESYNC depends on
/// timing; use [`ResyncPolicy::None`] when step-for-step determinism across
/// harnesses is required.
pub fn run_session_tcp(
    params: &SessionParams,
    frames: impl IntoIterator<Item = FrameDetections>,
) -> Result<SessionTrace> {
    params.channel.validate()?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let seed = super::provider_seed(params.seed);

    let recv_params = params.clone();
    let handle = std::thread::spawn(move || {
        serve_one(
            &listener,
            recv_params.cfg.clone(),
            recv_params.kdf.clone(),
            Box::new(super::SeededKeyProvider::new(seed)),
            recv_params.policy,
            &recv_params.channel,
        )
    });

    let mut sender = TcpSender::connect(
        addr,
        params.cfg.clone(),
        params.kdf.clone(),
        Box::new(super::SeededKeyProvider::new(seed)),
    )?;
    for frame in frames.into_iter().take(params.n_frames as usize) {
        sender.send_frame(&frame)?;
    }
    let sender_rows = sender.finish()?;
    let report = handle
        .join()
        .map_err(|_| Error::Protocol("receiver thread panicked".into()))??;
    merge_reports(&sender_rows, &report)
}
