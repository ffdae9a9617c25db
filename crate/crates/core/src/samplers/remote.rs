//! Client for a remote sampling service.
//!
//! `POST {endpoint}/v1/sample` with a JSON body `{n, offset, terms, num_reads,
//! params}`, where `terms` lists `[i, j, c]` with `i <= j` (diagonal entries
//! are linear coefficients). The reply is `{samples, energies, occurrences}`
//! with an optional `error` message.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Number, Value};

use super::{SampleInfo, SampleSet};
use crate::error::{Error, Result};
use crate::qubo::{QuboModel, VariableRole};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireRequest {
    pub n: usize,
    pub offset: i64,
    pub terms: Vec<(usize, usize, i64)>,
    pub num_reads: u64,
    #[serde(default)]
    pub params: Map<String, Value>,
}

impl WireRequest {
    pub fn from_model(model: &QuboModel, num_reads: u64, params: Map<String, Value>) -> Self {
        let mut terms: BTreeMap<(usize, usize), i64> = model.quadratic().clone();
        for (i, &a) in model.linear().iter().enumerate() {
            if a != 0 {
                terms.insert((i, i), a);
            }
        }
        WireRequest {
            n: model.num_vars(),
            offset: model.offset(),
            terms: terms.into_iter().map(|((i, j), c)| (i, j, c)).collect(),
            num_reads,
            params,
        }
    }

    /// The model the request describes. Roles do not travel over the wire
    /// and are all set to [`VariableRole::And`].
    pub fn to_model(&self) -> Result<QuboModel> {
        for &(i, j, _) in &self.terms {
            if i > j || j >= self.n {
                return Err(Error::InvalidInput(format!(
                    "term ({i}, {j}) invalid for n = {}",
                    self.n
                )));
            }
        }
        QuboModel::new(
            vec![VariableRole::And; self.n],
            self.offset,
            self.terms.iter().copied(),
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WireResponse {
    #[serde(default)]
    pub samples: Vec<Vec<u8>>,
    #[serde(default)]
    pub energies: Vec<Number>,
    #[serde(default)]
    pub occurrences: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    /// Base URL, e.g. `http://127.0.0.1:8080`.
    pub endpoint: String,
    pub timeout: Duration,
    /// Further attempts after a connection failure or a busy reply.
    pub max_retries: u32,
    /// Upper bound on any single wait between attempts.
    pub max_wait: Duration,
    pub params: Map<String, Value>,
}

impl RemoteConfig {
    pub fn new(endpoint: impl Into<String>) -> Self {
        RemoteConfig {
            endpoint: endpoint.into(),
            timeout: Duration::from_secs(60),
            max_retries: 3,
            max_wait: Duration::from_secs(30),
            params: Map::new(),
        }
    }
}

fn retryable(e: &Error) -> bool {
    match e {
        Error::Connection { .. } => true,
        Error::Rejected { status, .. } => *status == 429 || *status == 503,
        _ => false,
    }
}

/// Sends the model to the service and re-scores the returned samples.
/// Energies are recomputed locally; a differing server claim only flags the
/// record. Busy replies (429/503) and connection failures are retried up to
/// `max_retries` times, honouring `Retry-After`.
pub fn remote_sample(
    config: &RemoteConfig,
    model: &QuboModel,
    num_reads: u64,
) -> Result<SampleSet> {
    if num_reads == 0 {
        return Err(Error::InvalidInput("num_reads must be at least 1".into()));
    }
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(config.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let url = format!("{}/v1/sample", config.endpoint.trim_end_matches('/'));
    let body = serde_json::to_string(&WireRequest::from_model(
        model,
        num_reads,
        config.params.clone(),
    ))
    .map_err(|e| Error::InvalidInput(format!("cannot serialise request: {e}")))?;
    let mut attempt = 0;
    loop {
        match exchange(&agent, &url, &body) {
            Ok(resp) => return ingest(model, num_reads, resp, &config.endpoint),
            Err(e) if attempt < config.max_retries && retryable(&e) => {
                let wait = e
                    .retry_after()
                    .unwrap_or(Duration::from_millis(100 << attempt.min(10)));
                log::warn!("{e}; retrying in {wait:?}");
                std::thread::sleep(wait.min(config.max_wait));
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn exchange(agent: &ureq::Agent, url: &str, body: &str) -> Result<WireResponse> {
    let mut resp = agent
        .post(url)
        .header("Content-Type", "application/json")
        .send(body)
        .map_err(|e| Error::Connection {
            message: e.to_string(),
            retry_after: None,
        })?;
    let status = resp.status().as_u16();
    let retry_after = resp
        .headers()
        .get("retry-after")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok())
        .map(Duration::from_secs);
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| Error::Connection {
            message: e.to_string(),
            retry_after,
        })?;
    let parsed = serde_json::from_str::<WireResponse>(&text);
    if status != 200 {
        let message = match parsed {
            Ok(WireResponse { error: Some(m), .. }) => m,
            _ => text.chars().take(200).collect(),
        };
        return Err(Error::Rejected {
            status,
            message,
            retry_after,
        });
    }
    let resp = parsed.map_err(|e| Error::Protocol(format!("malformed response: {e}")))?;
    if let Some(message) = resp.error {
        return Err(Error::Rejected {
            status,
            message,
            retry_after,
        });
    }
    Ok(resp)
}

/// A claim agrees if it is the same integer as the local energy.
fn claim_agrees(claim: &Number, local: i128) -> bool {
    match claim.as_i128() {
        Some(c) => c == local,
        None => claim
            .as_f64()
            .is_some_and(|c| c.fract() == 0.0 && c.abs() < 9e15 && c as i128 == local),
    }
}

fn ingest(
    model: &QuboModel,
    num_reads: u64,
    resp: WireResponse,
    endpoint: &str,
) -> Result<SampleSet> {
    let k = resp.samples.len();
    if resp.energies.len() != k || resp.occurrences.len() != k {
        return Err(Error::Protocol(format!(
            "{} samples, {} energies, {} occurrence counts",
            k,
            resp.energies.len(),
            resp.occurrences.len()
        )));
    }
    let n = model.num_vars();
    let mut total = 0u64;
    for (x, &occ) in resp.samples.iter().zip(&resp.occurrences) {
        if x.len() != n || x.iter().any(|&b| b > 1) {
            return Err(Error::Protocol(format!(
                "sample is not a 0/1 vector of length {n}"
            )));
        }
        if occ == 0 {
            return Err(Error::Protocol("sample with zero occurrences".into()));
        }
        total = total.saturating_add(occ);
    }
    if total != num_reads {
        return Err(Error::Protocol(format!(
            "occurrences sum to {total}, requested {num_reads}"
        )));
    }
    let entries = resp
        .samples
        .into_iter()
        .zip(resp.energies)
        .zip(resp.occurrences)
        .map(|((x, claim), occ)| {
            let flagged = !claim_agrees(&claim, model.evaluate(&x));
            (x, occ, flagged)
        });
    let info = SampleInfo {
        sampler: format!("remote {endpoint}"),
        seed: None,
        schedule: None,
    };
    SampleSet::from_entries(model, entries, info)
}
