use std::io::{BufRead, BufReader, Read, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use super::protocol::{decode_response, encode, AmFailure, AssignRequest, AssignResponse, Handshake};
use super::{AdaptationManager, HostError, SubprocessSpec};

/// An AM running as a child process speaking the line protocol.
pub struct SubprocessAm {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    stderr: Arc<Mutex<String>>,
    stderr_thread: Option<JoinHandle<()>>,
    call_timeout: Duration,
    pub name: String,
}

impl SubprocessAm {
    pub fn start(spec: &SubprocessSpec) -> Result<Self, HostError> {
        let mut cmd = Command::new(&spec.program);
        cmd.args(&spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        if let Some(dir) = &spec.dir {
            cmd.current_dir(dir);
        }
        let mut child = cmd.spawn().map_err(|e| HostError::Spawn {
            program: spec.program.clone(),
            reason: e.to_string(),
        })?;
        let stdout = child.stdout.take().expect("stdout is piped");
        let mut err_pipe = child.stderr.take().expect("stderr is piped");
        let (tx, lines) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let stderr = Arc::new(Mutex::new(String::new()));
        let sink = Arc::clone(&stderr);
        let stderr_thread = std::thread::spawn(move || {
            let mut buf = [0u8; 4096];
            while let Ok(n) = err_pipe.read(&mut buf) {
                if n == 0 {
                    break;
                }
                sink.lock().unwrap().push_str(&String::from_utf8_lossy(&buf[..n]));
            }
        });
        let mut am = SubprocessAm {
            child,
            stdin: None,
            lines,
            stderr,
            stderr_thread: Some(stderr_thread),
            call_timeout: spec.call_timeout,
            name: String::new(),
        };
        am.stdin = am.child.stdin.take();
        am.handshake(spec.startup_timeout)?;
        Ok(am)
    }

    fn handshake(&mut self, timeout: Duration) -> Result<(), HostError> {
        let line = match self.lines.recv_timeout(timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(self.exited(Some(e.to_string()))),
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                return Err(HostError::HandshakeTimeout {
                    after: timeout,
                    stderr: self.stderr_text(),
                });
            }
            Err(RecvTimeoutError::Disconnected) => return Err(self.exited(None)),
        };
        let hs: Handshake = serde_json::from_str(&line).map_err(|e| HostError::Malformed {
            what: "handshake",
            line: line.clone(),
            reason: e.to_string(),
        })?;
        if !hs.ready {
            let failure = hs.error.unwrap_or_else(|| AmFailure {
                message: "AM reported it is not ready".into(),
                traceback: String::new(),
            });
            return Err(HostError::Startup {
                message: failure.message,
                traceback: failure.traceback,
            });
        }
        self.name = hs.am.unwrap_or_default();
        Ok(())
    }

    fn stderr_text(&mut self) -> String {
        self.stderr.lock().unwrap().clone()
    }

    fn kill(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    /// The child went away: collect its exit status and everything it wrote
    /// to stderr.
    fn exited(&mut self, io: Option<String>) -> HostError {
        self.stdin = None;
        let status = match self.child.wait() {
            Ok(s) => s.to_string(),
            Err(e) => e.to_string(),
        };
        if let Some(t) = self.stderr_thread.take() {
            let _ = t.join();
        }
        let mut stderr = self.stderr_text();
        if let Some(io) = io {
            stderr.push_str(&io);
        }
        HostError::Exited { status, stderr }
    }
}

impl AdaptationManager for SubprocessAm {
    fn invoke(&mut self, request: &AssignRequest) -> Result<AssignResponse, HostError> {
        let Some(stdin) = self.stdin.as_mut() else {
            return Err(self.exited(None));
        };
        let mut line = encode(request);
        line.push('\n');
        if stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()).is_err() {
            return Err(self.exited(None));
        }
        match self.lines.recv_timeout(self.call_timeout) {
            Ok(Ok(reply)) => decode_response(&reply).map_err(|e| HostError::Malformed {
                what: "response",
                line: reply,
                reason: e.to_string(),
            }),
            Ok(Err(e)) => Err(self.exited(Some(e.to_string()))),
            Err(RecvTimeoutError::Timeout) => {
                self.kill();
                self.stdin = None;
                Err(HostError::CallTimeout {
                    method: request.method.clone(),
                    after: self.call_timeout,
                })
            }
            Err(RecvTimeoutError::Disconnected) => Err(self.exited(None)),
        }
    }
}

impl Drop for SubprocessAm {
    fn drop(&mut self) {
        self.stdin = None;
        if let Ok(None) = self.child.try_wait() {
            // give a well-behaved AM a moment to exit on EOF
            std::thread::sleep(Duration::from_millis(5));
            if let Ok(None) = self.child.try_wait() {
                let _ = self.child.kill();
            }
        }
        let _ = self.child.wait();
    }
}
