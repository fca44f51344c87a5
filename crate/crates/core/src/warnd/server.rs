//! TCP front end: one thread per connection reading request lines, one
//! writer thread per connection draining its outbound queue.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{self, Sender};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use super::protocol::{ErrReason, Message};
use super::service::{Service, Sink};
use crate::deployment::DeploymentPlan;
use crate::error::Result;

pub const MAX_LINE_BYTES: u64 = 1024;

/// Outbound queue of one connection.
#[derive(Debug, Clone)]
pub struct ChannelSink(Sender<String>);

impl Sink for ChannelSink {
    fn deliver(&self, line: &str) -> bool {
        self.0.send(line.to_string()).is_ok()
    }
}

pub struct ServerHandle {
    addr: SocketAddr,
    service: Arc<Service<ChannelSink>>,
    stop: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn service(&self) -> &Arc<Service<ChannelSink>> {
        &self.service
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }

    /// Stops accepting new connections. Open sessions run until their peers hang up.
    pub fn shutdown(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

pub fn spawn(addr: impl ToSocketAddrs, plan: DeploymentPlan) -> Result<ServerHandle> {
    let listener = TcpListener::bind(addr)?;
    let addr = listener.local_addr()?;
    let service = Arc::new(Service::new(plan));
    let stop = Arc::new(AtomicBool::new(false));
    let acceptor = {
        let service = Arc::clone(&service);
        let stop = Arc::clone(&stop);
        thread::spawn(move || accept_loop(listener, service, stop))
    };
    Ok(ServerHandle { addr, service, stop, acceptor: Some(acceptor) })
}

fn accept_loop(listener: TcpListener, service: Arc<Service<ChannelSink>>, stop: Arc<AtomicBool>) {
    for stream in listener.incoming() {
        if stop.load(Ordering::SeqCst) {
            break;
        }
        let Ok(stream) = stream else { continue };
        let service = Arc::clone(&service);
        thread::spawn(move || {
            let _ = session(stream, &service);
        });
    }
}

fn session(stream: TcpStream, service: &Service<ChannelSink>) -> std::io::Result<()> {
    let (tx, rx) = mpsc::channel::<String>();
    let mut out = stream.try_clone()?;
    let writer = thread::spawn(move || {
        for line in rx {
            if out.write_all(line.as_bytes()).and_then(|_| out.write_all(b"\n")).is_err() {
                break;
            }
        }
    });
    let sink = ChannelSink(tx);
    let mut reader = BufReader::new(stream);
    let mut buf = Vec::new();
    loop {
        buf.clear();
        let n = reader.by_ref().take(MAX_LINE_BYTES + 1).read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        let reply = if buf.last() != Some(&b'\n') && n as u64 > MAX_LINE_BYTES {
            // Drop the rest of an oversized line.
            let mut rest = Vec::new();
            reader.read_until(b'\n', &mut rest)?;
            Message::Err(ErrReason::Malformed)
        } else {
            match std::str::from_utf8(&buf) {
                Ok(line) => service.handle_line(line, &sink),
                Err(_) => Message::Err(ErrReason::Malformed),
            }
        };
        if !sink.deliver(&reply.to_string()) {
            break;
        }
    }
    drop(sink);
    let _ = writer.join();
    Ok(())
}
