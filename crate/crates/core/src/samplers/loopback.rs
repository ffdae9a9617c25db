//! Reference server for the sampling wire protocol, bound to localhost.
//!
//! It answers every request with the exhaustive ground states of the model,
//! splitting the reads evenly among them, or misbehaves on purpose according
//! to its [`LoopbackMode`].

use std::net::SocketAddr;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::Number;
use tiny_http::{Header, Method, Response, Server};

use super::remote::{WireRequest, WireResponse};
use super::solve_exhaustive;
use crate::error::{Error, Result};

/// Largest model the server solves.
pub const LOOPBACK_MAX_VARS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopbackMode {
    Exhaustive,
    /// Replies with a body that is not valid JSON.
    Malformed,
    /// Replies with valid JSON whose arrays disagree in length.
    Inconsistent,
    /// Claims every energy one higher than it is.
    WrongEnergy,
    /// Refuses every request with status 422.
    Reject,
    /// Answers the first `failures` requests with 503 and `Retry-After`.
    Busy {
        failures: u64,
        retry_after_secs: u64,
    },
}

pub struct LoopbackServer {
    server: Arc<Server>,
    addr: SocketAddr,
    served: Arc<AtomicU64>,
    worker: Option<JoinHandle<()>>,
}

impl LoopbackServer {
    pub fn start(mode: LoopbackMode) -> Result<Self> {
        Self::bind("127.0.0.1:0", mode)
    }

    pub fn bind(addr: &str, mode: LoopbackMode) -> Result<Self> {
        let server = Server::http(addr).map_err(|e| Error::Connection {
            message: format!("cannot bind {addr}: {e}"),
            retry_after: None,
        })?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| Error::InvalidInput("loopback server needs an IP address".into()))?;
        let server = Arc::new(server);
        let served = Arc::new(AtomicU64::new(0));
        let worker = {
            let (server, served) = (Arc::clone(&server), Arc::clone(&served));
            std::thread::spawn(move || {
                for mut request in server.incoming_requests() {
                    let count = served.fetch_add(1, Ordering::SeqCst);
                    let mut body = String::new();
                    let reply =
                        if request.method() != &Method::Post || request.url() != "/v1/sample" {
                            error_reply(404, "not found")
                        } else if request.as_reader().read_to_string(&mut body).is_err() {
                            error_reply(400, "unreadable body")
                        } else {
                            respond(mode, count, &body)
                        };
                    if let Err(e) = request.respond(reply) {
                        log::warn!("loopback reply failed: {e}");
                    }
                }
            })
        };
        Ok(LoopbackServer {
            server,
            addr,
            served,
            worker: Some(worker),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn requests_served(&self) -> u64 {
        self.served.load(Ordering::SeqCst)
    }
}

impl Drop for LoopbackServer {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(w) = self.worker.take() {
            let _ = w.join();
        }
    }
}

type Reply = Response<std::io::Cursor<Vec<u8>>>;

fn json_header() -> Header {
    Header::from_bytes("Content-Type", "application/json").expect("static header")
}

fn error_reply(status: u16, message: &str) -> Reply {
    let body = serde_json::to_string(&WireResponse {
        error: Some(message.into()),
        ..Default::default()
    })
    .expect("serialisable");
    Response::from_string(body)
        .with_status_code(status)
        .with_header(json_header())
}

fn respond(mode: LoopbackMode, count: u64, body: &str) -> Reply {
    match mode {
        LoopbackMode::Malformed => {
            return Response::from_string("{\"samples\": [[0, 1], \"energies\": oops")
                .with_header(json_header())
        }
        LoopbackMode::Reject => return error_reply(422, "request refused by policy"),
        LoopbackMode::Busy {
            failures,
            retry_after_secs,
        } if count < failures => {
            let retry = Header::from_bytes("Retry-After", retry_after_secs.to_string())
                .expect("ascii header");
            return error_reply(503, "busy").with_header(retry);
        }
        _ => {}
    }
    let request: WireRequest = match serde_json::from_str(body) {
        Ok(r) => r,
        Err(e) => return error_reply(400, &format!("bad request: {e}")),
    };
    if request.n > LOOPBACK_MAX_VARS {
        return error_reply(
            413,
            &format!("n = {} exceeds {LOOPBACK_MAX_VARS}", request.n),
        );
    }
    if request.num_reads == 0 {
        return error_reply(400, "num_reads must be positive");
    }
    let model = match request.to_model() {
        Ok(m) => m,
        Err(e) => return error_reply(400, &e.to_string()),
    };
    let solution = match solve_exhaustive(&model) {
        Ok(s) => s,
        Err(e) => return error_reply(413, &e.to_string()),
    };
    let shift = i128::from(mode == LoopbackMode::WrongEnergy);
    let mut resp = WireResponse::default();
    for (x, occ) in solution.split_reads(request.num_reads) {
        resp.samples.push(x.to_vec());
        resp.energies
            .push(Number::from_i128(solution.min_energy + shift).expect("energy fits JSON"));
        resp.occurrences.push(occ);
    }
    if mode == LoopbackMode::Inconsistent {
        resp.occurrences.push(1);
    }
    Response::from_string(serde_json::to_string(&resp).expect("serialisable"))
        .with_header(json_header())
}
