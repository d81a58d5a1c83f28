use std::io::{self, BufRead, BufReader, Write};
use std::net::{Ipv4Addr, SocketAddr, TcpStream};
use std::time::{Duration, Instant};

use super::protocol::{ClientMessage, Envelope};

/// Minimal blocking client for scripted sessions and tests.
pub struct GatewayClient {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    seq: u64,
}

impl GatewayClient {
    pub fn connect(port: u16) -> io::Result<GatewayClient> {
        let stream = TcpStream::connect(SocketAddr::from((Ipv4Addr::LOCALHOST, port)))?;
        stream.set_nodelay(true)?;
        stream.set_read_timeout(Some(Duration::from_secs(10)))?;
        Ok(GatewayClient { reader: BufReader::new(stream.try_clone()?), writer: stream, seq: 0 })
    }

    /// Retries until the server accepts or `within` elapses.
    pub fn connect_retry(port: u16, within: Duration) -> io::Result<GatewayClient> {
        let deadline = Instant::now() + within;
        loop {
            match GatewayClient::connect(port) {
                Ok(c) => return Ok(c),
                Err(e) if Instant::now() >= deadline => return Err(e),
                Err(_) => std::thread::sleep(Duration::from_millis(10)),
            }
        }
    }

    pub fn send(&mut self, msg: &ClientMessage) -> io::Result<()> {
        let line = msg.to_envelope(self.seq).to_line();
        self.seq += 1;
        self.send_raw(&line)
    }

    /// Writes a line verbatim (for protocol-violation tests).
    pub fn send_raw(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        if !line.ends_with('\n') {
            self.writer.write_all(b"\n")?;
        }
        self.writer.flush()
    }

    /// Next server message; `None` once the server closed the stream.
    pub fn recv(&mut self) -> io::Result<Option<Envelope>> {
        let mut line = String::new();
        if self.reader.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        serde_json::from_str(&line).map(Some).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
    }

    /// Reads until a message of `kind` arrives, returning everything read.
    pub fn recv_until(&mut self, kind: &str) -> io::Result<Vec<Envelope>> {
        let mut seen = Vec::new();
        loop {
            match self.recv()? {
                Some(env) => {
                    let done = env.kind == kind;
                    seen.push(env);
                    if done {
                        return Ok(seen);
                    }
                }
                None => return Err(io::Error::new(io::ErrorKind::UnexpectedEof, format!("closed before `{kind}`"))),
            }
        }
    }

    /// Reads until the server closes the connection.
    pub fn drain(&mut self) -> io::Result<Vec<Envelope>> {
        let mut seen = Vec::new();
        while let Some(env) = self.recv()? {
            seen.push(env);
        }
        Ok(seen)
    }
}
