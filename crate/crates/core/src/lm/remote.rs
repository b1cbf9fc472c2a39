//! Newline-delimited JSON protocol for external scorers.
//!
//! ```text
//! → {"id":1,"op":"score","table":"name[Aromi]area[riverside]","candidates":["...", "..."]}
//! ← {"id":1,"log_probs":[-12.5,-14.25]}
//! → {"id":2,"op":"generate","table":"name[Aromi]","max_len":30}
//! ← {"id":2,"text":"Aromi is a pub."}
//! ← {"id":3,"error":"message"}
//! ```
//!
//! One object per line. Ids increase strictly on each connection and
//! responses are matched to requests by id.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream, ToSocketAddrs};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::decode::decode;
use crate::lm::ngram::DelexModel;
use crate::tabular::{parse_mr, Sentence, Table};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: i64,
    pub op: String,
    pub table: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_len: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Response {
    fn error(id: i64, msg: impl Into<String>) -> Self {
        Response {
            id,
            log_probs: None,
            text: None,
            error: Some(msg.into()),
        }
    }
}

/// Where a remote scorer lives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// `tcp://host:port`
    Tcp(String),
    /// `cmd:<program> [args...]`, spoken to over its stdin/stdout.
    Command(Vec<String>),
}

impl Endpoint {
    pub fn parse(s: &str) -> Result<Endpoint> {
        if let Some(addr) = s.strip_prefix("tcp://") {
            if addr.is_empty() {
                return Err(Error::InvalidArgument("empty tcp address".into()));
            }
            return Ok(Endpoint::Tcp(addr.to_string()));
        }
        if let Some(cmd) = s.strip_prefix("cmd:") {
            let argv: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
            if argv.is_empty() {
                return Err(Error::InvalidArgument("empty command".into()));
            }
            return Ok(Endpoint::Command(argv));
        }
        Err(Error::InvalidArgument(format!(
            "scorer endpoint must be tcp://host:port or cmd:<program>, got '{s}'"
        )))
    }
}

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    pub timeout: Duration,
    pub max_retries: usize,
    /// Candidates per request.
    pub batch_size: usize,
    /// Requests written before waiting for responses.
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            timeout: Duration::from_secs(30),
            max_retries: 3,
            batch_size: 64,
            max_in_flight: 4,
        }
    }
}

enum Conn {
    Tcp {
        writer: TcpStream,
        reader: BufReader<TcpStream>,
    },
    Child {
        child: Child,
        stdin: ChildStdin,
        reader: BufReader<ChildStdout>,
    },
}

impl Conn {
    fn open(ep: &Endpoint, cfg: &RemoteConfig) -> std::io::Result<Conn> {
        match ep {
            Endpoint::Tcp(addr) => {
                let sock = addr
                    .to_socket_addrs()?
                    .next()
                    .ok_or_else(|| std::io::Error::other("address resolves to nothing"))?;
                let stream = TcpStream::connect_timeout(&sock, cfg.timeout)?;
                stream.set_read_timeout(Some(cfg.timeout))?;
                stream.set_write_timeout(Some(cfg.timeout))?;
                stream.set_nodelay(true)?;
                let reader = BufReader::new(stream.try_clone()?);
                Ok(Conn::Tcp {
                    writer: stream,
                    reader,
                })
            }
            Endpoint::Command(argv) => {
                let mut child = Command::new(&argv[0])
                    .args(&argv[1..])
                    .stdin(Stdio::piped())
                    .stdout(Stdio::piped())
                    .spawn()?;
                let stdin = child.stdin.take().expect("piped stdin");
                let stdout = child.stdout.take().expect("piped stdout");
                Ok(Conn::Child {
                    child,
                    stdin,
                    reader: BufReader::new(stdout),
                })
            }
        }
    }

    fn send(&mut self, line: &str) -> std::io::Result<()> {
        let w: &mut dyn Write = match self {
            Conn::Tcp { writer, .. } => writer,
            Conn::Child { stdin, .. } => stdin,
        };
        w.write_all(line.as_bytes())?;
        w.write_all(b"\n")?;
        w.flush()
    }

    fn recv(&mut self) -> std::io::Result<String> {
        let mut line = String::new();
        let n = match self {
            Conn::Tcp { reader, .. } => reader.read_line(&mut line)?,
            Conn::Child { reader, .. } => reader.read_line(&mut line)?,
        };
        if n == 0 {
            return Err(std::io::Error::new(
                std::io::ErrorKind::UnexpectedEof,
                "scorer closed the connection",
            ));
        }
        Ok(line)
    }
}

impl Drop for Conn {
    fn drop(&mut self) {
        if let Conn::Child { child, .. } = self {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

struct Session {
    conn: Option<Conn>,
    next_id: i64,
}

/// Client side of the protocol. The handle itself never changes; the
/// connection behind it is reopened on I/O failure, a bounded number of times.
pub struct RemoteScorer {
    endpoint: Endpoint,
    config: RemoteConfig,
    session: Mutex<Session>,
}

enum Failure {
    Io(std::io::Error),
    Fatal(Error),
}

impl RemoteScorer {
    pub fn new(endpoint: Endpoint, config: RemoteConfig) -> Self {
        RemoteScorer {
            endpoint,
            config,
            session: Mutex::new(Session {
                conn: None,
                next_id: 1,
            }),
        }
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Runs a batch of requests, retrying the whole batch on transport
    /// failure. Responses come back in request order.
    fn exchange(&self, build: &dyn Fn(i64, usize) -> Request, n: usize) -> Result<Vec<Response>> {
        let mut session = self.session.lock().expect("scorer session poisoned");
        let mut last_err = None;
        for _attempt in 0..=self.config.max_retries {
            if session.conn.is_none() {
                match Conn::open(&self.endpoint, &self.config) {
                    Ok(c) => {
                        session.conn = Some(c);
                    }
                    Err(e) => {
                        last_err = Some(e.to_string());
                        thread::sleep(Duration::from_millis(50));
                        continue;
                    }
                }
            }
            match self.run_batch(&mut session, build, n) {
                Ok(r) => return Ok(r),
                Err(Failure::Fatal(e)) => return Err(e),
                Err(Failure::Io(e)) => {
                    last_err = Some(e.to_string());
                    session.conn = None;
                }
            }
        }
        Err(Error::RemoteUnavailable(format!(
            "{:?} after {} retries: {}",
            self.endpoint,
            self.config.max_retries,
            last_err.unwrap_or_default()
        )))
    }

    fn run_batch(
        &self,
        session: &mut Session,
        build: &dyn Fn(i64, usize) -> Request,
        n: usize,
    ) -> std::result::Result<Vec<Response>, Failure> {
        let first_id = session.next_id;
        let ids: Vec<i64> = (0..n as i64).map(|i| first_id + i).collect();
        session.next_id += n as i64;
        let conn = session.conn.as_mut().expect("connection open");
        let mut got: HashMap<i64, Response> = HashMap::new();
        let mut sent = 0;
        while got.len() < n {
            while sent < n && sent - got.len() < self.config.max_in_flight.max(1) {
                let req = build(ids[sent], sent);
                let line = serde_json::to_string(&req).expect("request serializes");
                conn.send(&line).map_err(Failure::Io)?;
                sent += 1;
            }
            let line = conn.recv().map_err(Failure::Io)?;
            let resp: Response = serde_json::from_str(line.trim_end())
                .map_err(|e| Failure::Fatal(Error::Protocol(format!("bad response line: {e}"))))?;
            if let Some(msg) = &resp.error {
                return Err(Failure::Fatal(Error::Protocol(format!(
                    "scorer error for request {}: {msg}",
                    resp.id
                ))));
            }
            if !ids.contains(&resp.id) || got.contains_key(&resp.id) {
                return Err(Failure::Fatal(Error::Protocol(format!(
                    "unexpected response id {}",
                    resp.id
                ))));
            }
            got.insert(resp.id, resp);
        }
        Ok(ids.iter().map(|id| got.remove(id).expect("all ids answered")).collect())
    }

    pub fn score_texts(&self, table: &Table, texts: &[String]) -> Result<Vec<f64>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let linear = table.linearize();
        let batch = self.config.batch_size.max(1);
        let chunks: Vec<&[String]> = texts.chunks(batch).collect();
        let build = |id: i64, i: usize| Request {
            id,
            op: "score".to_string(),
            table: linear.clone(),
            candidates: Some(chunks[i].to_vec()),
            max_len: None,
        };
        let responses = self.exchange(&build, chunks.len())?;
        let mut out = Vec::with_capacity(texts.len());
        for (resp, chunk) in responses.into_iter().zip(&chunks) {
            let lp = resp
                .log_probs
                .ok_or_else(|| Error::Protocol(format!("response {} lacks log_probs", resp.id)))?;
            if lp.len() != chunk.len() {
                return Err(Error::Protocol(format!(
                    "response {} has {} scores for {} candidates",
                    resp.id,
                    lp.len(),
                    chunk.len()
                )));
            }
            if let Some(bad) = lp.iter().find(|x| !x.is_finite()) {
                return Err(Error::Protocol(format!("non-finite score {bad}")));
            }
            out.extend(lp);
        }
        Ok(out)
    }

    pub fn score(&self, table: &Table, candidates: &[Sentence]) -> Result<Vec<f64>> {
        let texts: Vec<String> = candidates.iter().map(Sentence::detokenize).collect();
        self.score_texts(table, &texts)
    }

    pub fn generate(&self, table: &Table, max_len: usize) -> Result<Sentence> {
        let linear = table.linearize();
        let build = |id: i64, _| Request {
            id,
            op: "generate".to_string(),
            table: linear.clone(),
            candidates: None,
            max_len: Some(max_len),
        };
        let resp = self.exchange(&build, 1)?.remove(0);
        let text = resp
            .text
            .ok_or_else(|| Error::Protocol(format!("response {} lacks text", resp.id)))?;
        Ok(Sentence::tokenize(&text))
    }

    /// Sends one score request with a fixed candidate set and checks the
    /// response shape. Returns the scores.
    pub fn handshake(&self) -> Result<Vec<f64>> {
        let table = parse_mr("name[Aromi], area[riverside]").expect("static MR");
        let texts = vec![
            "Aromi is in riverside area.".to_string(),
            String::new(),
            "Aromi is in riverside area.".to_string(),
        ];
        let scores = self.score_texts(&table, &texts)?;
        Ok(scores)
    }
}

/// Serves the protocol from a local model.
pub struct ModelServer {
    model: DelexModel,
    beam_width: usize,
}

impl ModelServer {
    pub fn new(model: DelexModel, beam_width: usize) -> Self {
        ModelServer {
            model,
            beam_width: beam_width.max(1),
        }
    }

    /// Handles one request line and returns the response line (no newline).
    pub fn handle_line(&self, line: &str) -> String {
        let resp = match serde_json::from_str::<Request>(line) {
            Err(e) => Response::error(-1, format!("malformed request: {e}")),
            Ok(req) => self.handle(req),
        };
        serde_json::to_string(&resp).expect("response serializes")
    }

    fn handle(&self, req: Request) -> Response {
        let id = req.id;
        let table = match parse_mr(&req.table) {
            Ok(t) => t,
            Err(e) => return Response::error(id, e.to_string()),
        };
        match req.op.as_str() {
            "score" => {
                let Some(cands) = req.candidates else {
                    return Response::error(id, "score request without candidates");
                };
                let log_probs = cands
                    .iter()
                    .map(|c| self.model.log_prob(&table, &Sentence::tokenize(c)))
                    .collect();
                Response {
                    id,
                    log_probs: Some(log_probs),
                    text: None,
                    error: None,
                }
            }
            "generate" => {
                let max_len = req.max_len.unwrap_or(40);
                match decode(&self.model, &table, max_len, self.beam_width) {
                    Ok(s) => Response {
                        id,
                        log_probs: None,
                        text: Some(s.detokenize()),
                        error: None,
                    },
                    Err(e) => Response::error(id, e.to_string()),
                }
            }
            other => Response::error(id, format!("unknown op '{other}'")),
        }
    }

    /// Answers requests line by line until the reader hits end of input.
    pub fn serve<R: BufRead, W: Write>(&self, reader: R, mut writer: W) -> std::io::Result<()> {
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(writer, "{}", self.handle_line(&line))?;
            writer.flush()?;
        }
        Ok(())
    }

    /// Accepts connections forever, one thread per connection.
    pub fn serve_tcp(self: std::sync::Arc<Self>, listener: TcpListener) -> std::io::Result<()> {
        for stream in listener.incoming() {
            let stream = stream?;
            let server = self.clone();
            thread::spawn(move || {
                let reader = match stream.try_clone() {
                    Ok(s) => BufReader::new(s),
                    Err(_) => return,
                };
                let _ = server.serve(reader, stream);
            });
        }
        Ok(())
    }
}
