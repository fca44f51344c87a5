//! Starts the warning service on a local port and talks to it over TCP.
use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;

use roadwarn::deployment::{build_plan, PlanConfig};
use roadwarn::warnd::spawn;

fn request(stream: &mut BufReader<TcpStream>, line: &str) -> std::io::Result<String> {
    stream.get_mut().write_all(format!("{line}\n").as_bytes())?;
    let mut reply = String::new();
    stream.read_line(&mut reply)?;
    println!("{line:<28} -> {}", reply.trim_end());
    Ok(reply)
}

fn main() -> roadwarn::Result<()> {
    let server = spawn("127.0.0.1:0", build_plan(200.0, PlanConfig::default())?)?;
    println!("listening on {}", server.local_addr());

    let mut phone = BufReader::new(TcpStream::connect(server.local_addr())?);
    let mut roadside = BufReader::new(TcpStream::connect(server.local_addr())?);
    request(&mut phone, "REG p1 30.0 1.0 0.0")?;
    request(&mut phone, "POS p1 31.5 1.0 1.0")?;
    request(&mut phone, "POS p1 31.0 1.0 0.5")?;
    request(&mut roadside, "EVT 1 LH receding 2.0")?;
    request(&mut roadside, "EVT 1 H approaching 2.5")?;

    let mut warn = String::new();
    phone.read_line(&mut warn)?;
    println!("phone received: {}", warn.trim_end());
    drop((phone, roadside));
    server.shutdown();
    Ok(())
}
