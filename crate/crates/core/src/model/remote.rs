//! Newline-delimited JSON protocol.
//!
//! ```text
//! → {"op":"value_dist","target":"X4","context":[["X1",0],["X2",1]],"query":"X4"}
//! ← {"p1":0.73}
//! → {"op":"next_var","target":"X4","context":[["X1",0]]}
//! ← {"var_probs":{"X5":0.41,"X2":0.33,"X4":0.26}}
//! ← {"error":"<code>","detail":"..."}
//! ```

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{NextVariableDistribution, PromptState, SequenceModel, ValueDistribution};
use crate::error::{Error, Result};
use crate::graph::VariableId;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    ValueDist {
        target: VariableId,
        context: Vec<(VariableId, u8)>,
        query: VariableId,
    },
    NextVar {
        target: VariableId,
        context: Vec<(VariableId, u8)>,
    },
}

fn wire_context(state: &PromptState) -> Vec<(VariableId, u8)> {
    state.context().iter().map(|(v, b)| (*v, *b as u8)).collect()
}

fn prompt_from_wire(target: VariableId, context: Vec<(VariableId, u8)>) -> Result<PromptState> {
    let context = context
        .into_iter()
        .map(|(v, b)| match b {
            0 => Ok((v, false)),
            1 => Ok((v, true)),
            _ => Err(Error::param(format!("value of {v} must be 0 or 1"))),
        })
        .collect::<Result<Vec<_>>>()?;
    PromptState::new(target, context)
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
    broken: bool,
}

impl Connection {
    fn call(&mut self, request: &Request) -> Result<Value> {
        if self.broken {
            return Err(Error::RemoteUnavailable("connection unusable after an earlier failure".into()));
        }
        let result = self.exchange(request);
        if let Err(Error::RemoteUnavailable(_)) = &result {
            self.broken = true;
        }
        let value = result?;
        if let Some(code) = value.get("error") {
            let detail = value.get("detail").and_then(Value::as_str).unwrap_or_default();
            return Err(Error::Remote {
                code: code.as_str().map(str::to_string).unwrap_or_else(|| code.to_string()),
                detail: detail.to_string(),
            });
        }
        Ok(value)
    }

    fn exchange(&mut self, request: &Request) -> Result<Value> {
        let unavailable = |e: std::io::Error| match e.kind() {
            ErrorKind::TimedOut | ErrorKind::WouldBlock => Error::RemoteUnavailable("request timed out".into()),
            _ => Error::RemoteUnavailable(e.to_string()),
        };
        let mut line = serde_json::to_string(request)?;
        line.push('\n');
        self.writer.write_all(line.as_bytes()).map_err(unavailable)?;
        self.writer.flush().map_err(unavailable)?;
        let mut reply = String::new();
        if self.reader.read_line(&mut reply).map_err(unavailable)? == 0 {
            return Err(Error::RemoteUnavailable("server closed the connection".into()));
        }
        serde_json::from_str(reply.trim_end()).map_err(|e| Error::Protocol(format!("unparsable reply: {e}")))
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Client for an external model server. One request in flight at a time.
pub struct RemoteModel {
    conn: Mutex<Connection>,
    n_nodes: Option<usize>,
}

impl std::fmt::Debug for RemoteModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteModel").field("n_nodes", &self.n_nodes).finish_non_exhaustive()
    }
}

impl RemoteModel {
    pub fn connect(address: &str, timeout: Duration) -> Result<Self> {
        let addrs: Vec<_> = address
            .to_socket_addrs()
            .map_err(|e| Error::RemoteUnavailable(format!("{address}: {e}")))?
            .collect();
        let mut last = None;
        for addr in addrs {
            match TcpStream::connect_timeout(&addr, timeout) {
                Ok(stream) => {
                    stream.set_read_timeout(Some(timeout))?;
                    stream.set_write_timeout(Some(timeout))?;
                    stream.set_nodelay(true)?;
                    let reader = BufReader::new(stream.try_clone()?);
                    return Ok(Self::from_streams(reader, stream));
                }
                Err(e) => last = Some(e),
            }
        }
        Err(Error::RemoteUnavailable(match last {
            Some(e) => format!("{address}: {e}"),
            None => format!("{address}: no addresses"),
        }))
    }

    /// Spawns `program` and talks to it over stdin/stdout.
    pub fn spawn(program: &str, args: &[String]) -> Result<Self> {
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(|e| Error::RemoteUnavailable(format!("{program}: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let mut model = Self::from_streams(BufReader::new(stdout), stdin);
        model.conn.get_mut().expect("fresh lock").child = Some(child);
        Ok(model)
    }

    pub fn from_streams(reader: impl BufRead + Send + 'static, writer: impl Write + Send + 'static) -> Self {
        RemoteModel {
            conn: Mutex::new(Connection {
                reader: Box::new(reader),
                writer: Box::new(writer),
                child: None,
                broken: false,
            }),
            n_nodes: None,
        }
    }

    /// Variables with index `>= n_nodes` in replies become protocol errors.
    pub fn with_n_nodes(mut self, n_nodes: usize) -> Self {
        self.n_nodes = Some(n_nodes);
        self
    }

    fn call(&self, request: &Request) -> Result<Value> {
        self.conn
            .lock()
            .map_err(|_| Error::RemoteUnavailable("connection lock poisoned".into()))?
            .call(request)
    }
}

impl SequenceModel for RemoteModel {
    fn value_distribution(&self, state: &PromptState, query: VariableId) -> Result<ValueDistribution> {
        let reply = self.call(&Request::ValueDist {
            target: state.target(),
            context: wire_context(state),
            query,
        })?;
        let p1 = reply
            .get("p1")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Protocol(format!("expected {{\"p1\": number}}, got {reply}")))?;
        ValueDistribution::new(p1).map_err(|_| Error::Protocol(format!("p1 = {p1} outside [0, 1]")))
    }

    fn next_variable_distribution(&self, state: &PromptState) -> Result<NextVariableDistribution> {
        let reply = self.call(&Request::NextVar {
            target: state.target(),
            context: wire_context(state),
        })?;
        let probs = reply
            .get("var_probs")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Protocol(format!("expected {{\"var_probs\": object}}, got {reply}")))?;
        let mut weights = BTreeMap::new();
        for (name, p) in probs {
            let v: VariableId = name
                .parse()
                .map_err(|_| Error::Protocol(format!("unknown variable {name:?} in var_probs")))?;
            if self.n_nodes.is_some_and(|n| v.index() >= n) {
                return Err(Error::Protocol(format!("unknown variable {v} in var_probs")));
            }
            if state.contains(v) {
                return Err(Error::Protocol(format!("{v} is already in the context")));
            }
            let p = p
                .as_f64()
                .filter(|p| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| Error::Protocol(format!("bad probability for {v}: {p}")))?;
            weights.insert(v, p);
        }
        NextVariableDistribution::from_weights(weights).map_err(|e| Error::Protocol(e.to_string()))
    }
}

fn error_reply(code: &str, detail: impl std::fmt::Display) -> Value {
    json!({"error": code, "detail": detail.to_string()})
}

fn answer(model: &dyn SequenceModel, line: &str) -> Value {
    let request: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return error_reply("bad_request", e),
    };
    let result = match request {
        Request::ValueDist { target, context, query } => prompt_from_wire(target, context)
            .and_then(|s| model.value_distribution(&s, query))
            .map(|d| json!({"p1": d.p1})),
        Request::NextVar { target, context } => prompt_from_wire(target, context)
            .and_then(|s| model.next_variable_distribution(&s))
            .map(|d| json!({"var_probs": d.probs()})),
    };
    result.unwrap_or_else(|e| {
        let code = match e {
            Error::UnknownVariable(_) => "unknown_variable",
            Error::UnsupportedOperation(_) => "unsupported",
            Error::InvalidParameter(_) => "bad_request",
            _ => "internal",
        };
        error_reply(code, e)
    })
}

/// Answers requests from `reader` until end of input. Malformed requests get
/// an error reply; the loop only stops on I/O failure or EOF.
pub fn serve(model: &dyn SequenceModel, reader: impl BufRead, mut writer: impl Write) -> Result<()> {
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = answer(model, line.trim()).to_string();
        reply.push('\n');
        writer.write_all(reply.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EmpiricalBackoffModel;
    use std::io::Cursor;

    fn x(i: usize) -> VariableId {
        VariableId::new(i)
    }

    fn replay(model: &dyn SequenceModel, input: &str) -> Vec<Value> {
        let mut out = Vec::new();
        serve(model, Cursor::new(input.to_string()), &mut out).unwrap();
        String::from_utf8(out).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect()
    }

    #[test]
    fn request_encoding() {
        let r = Request::ValueDist {
            target: x(4),
            context: vec![(x(1), 0), (x(2), 1)],
            query: x(4),
        };
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"op":"value_dist","target":"X4","context":[["X1",0],["X2",1]],"query":"X4"}"#
        );
        let r = Request::NextVar {
            target: x(4),
            context: vec![(x(1), 0)],
        };
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"op":"next_var","target":"X4","context":[["X1",0]]}"#);
    }

    #[test]
    fn server_replies() {
        let m = EmpiricalBackoffModel::new(6, 1.0, 50).unwrap();
        let replies = replay(
            &m,
            concat!(
                r#"{"op":"value_dist","target":"X4","context":[["X1",0],["X2",1]],"query":"X4"}"#,
                "\n",
                r#"{"op":"next_var","target":"X4","context":[["X1",0]]}"#,
                "\n\nnot json\n",
                r#"{"op":"value_dist","target":"X4","context":[],"query":"X40"}"#,
                "\n",
                r#"{"op":"value_dist","target":"X4","context":[["X1",7]],"query":"X4"}"#,
                "\n",
            ),
        );
        assert_eq!(replies.len(), 5);
        assert_eq!(replies[0], json!({"p1": 0.5}));
        let probs = replies[1]["var_probs"].as_object().unwrap();
        assert_eq!(probs.len(), 5);
        assert!(!probs.contains_key("X1"));
        assert_eq!(replies[2]["error"], "bad_request");
        assert_eq!(replies[3]["error"], "unknown_variable");
        assert_eq!(replies[4]["error"], "bad_request");
    }

    struct Scripted(Vec<&'static str>);

    impl Scripted {
        fn client(&self) -> RemoteModel {
            let text = self.0.iter().map(|l| format!("{l}\n")).collect::<String>();
            RemoteModel::from_streams(Cursor::new(text), std::io::sink()).with_n_nodes(6)
        }
    }

    #[test]
    fn client_validates_replies() {
        let s = PromptState::new(x(4), vec![(x(1), false)]).unwrap();
        let c = Scripted(vec![r#"{"p1":0.73}"#]).client();
        assert_eq!(c.value_distribution(&s, x(4)).unwrap().p1, 0.73);

        let c = Scripted(vec![r#"{"var_probs":{"X5":0.41,"X2":0.33,"X4":0.26}}"#]).client();
        let d = c.next_variable_distribution(&s).unwrap();
        assert!((d.prob(x(5)) - 0.41).abs() < 1e-12);

        for bad in [
            r#"{"p1":1.5}"#,
            r#"{"q":0.5}"#,
            r#"not json"#,
            r#"{"var_probs":{"X9":1.0}}"#,
            r#"{"var_probs":{"X1":1.0}}"#,
            r#"{"var_probs":{"Y1":1.0}}"#,
        ] {
            let c = Scripted(vec![bad]).client();
            let r = if bad.contains("var_probs") {
                c.next_variable_distribution(&s).map(|_| ())
            } else {
                c.value_distribution(&s, x(4)).map(|_| ())
            };
            assert!(matches!(r, Err(Error::Protocol(_))), "{bad}: {r:?}");
        }

        let c = Scripted(vec![r#"{"error":"overloaded","detail":"busy"}"#]).client();
        assert!(matches!(c.value_distribution(&s, x(4)), Err(Error::Remote { .. })));

        let c = Scripted(vec![]).client();
        assert!(matches!(c.value_distribution(&s, x(4)), Err(Error::RemoteUnavailable(_))));
        assert!(matches!(c.value_distribution(&s, x(4)), Err(Error::RemoteUnavailable(_))));
    }

    #[test]
    fn unreachable_server() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        drop(listener);
        assert!(matches!(
            RemoteModel::connect(&addr, Duration::from_millis(500)),
            Err(Error::RemoteUnavailable(_))
        ));
    }

    #[test]
    fn tcp_round_trip_and_timeout() {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let server = std::thread::spawn(move || {
            let model = EmpiricalBackoffModel::new(6, 1.0, 50).unwrap();
            let (stream, _) = listener.accept().unwrap();
            serve(&model, BufReader::new(stream.try_clone().unwrap()), stream).unwrap();
            // second client never gets an answer
            let (_silent, _) = listener.accept().unwrap();
            std::thread::sleep(Duration::from_millis(600));
        });
        let s = PromptState::new(x(4), vec![(x(1), true)]).unwrap();
        {
            let client = RemoteModel::connect(&addr, DEFAULT_TIMEOUT).unwrap().with_n_nodes(6);
            assert_eq!(client.value_distribution(&s, x(4)).unwrap().p1, 0.5);
            let d = client.next_variable_distribution(&s).unwrap();
            assert!((d.probs().values().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let slow = RemoteModel::connect(&addr, Duration::from_millis(200)).unwrap();
        assert!(matches!(slow.value_distribution(&s, x(4)), Err(Error::RemoteUnavailable(_))));
        server.join().unwrap();
    }
}
