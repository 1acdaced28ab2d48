//! WebSocket endpoint: one session per connection, text frames carrying one
//! JSON message each.

use std::io;
use std::path::PathBuf;
use std::sync::Arc;

use futures_util::{SinkExt, StreamExt};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::{self, Message};

use super::log::{LogHeader, LogWriter};
use super::{decode_client, encode, ClientMessage, Driver, DriverConfig, ServerMessage};
use crate::gutter::GutterGeometry;
use crate::session::Mode;

pub const DEFAULT_PORT: u16 = 8765;

/// Program loaded into every new connection before the client says anything.
#[derive(Debug, Clone)]
pub struct Preload {
    pub name: String,
    pub source: String,
    pub mode: Mode,
}

#[derive(Debug, Clone, Default)]
pub struct ServerConfig {
    pub driver: DriverConfig,
    pub preload: Option<Preload>,
    /// Directory that receives one stroke log per loaded program.
    pub record_dir: Option<PathBuf>,
}

/// Connection state independent of the transport.
pub struct Connection {
    config: Arc<ServerConfig>,
    id: u64,
    driver: Driver,
    recorder: Option<LogWriter>,
    loads: u32,
}

impl Connection {
    pub fn new(config: Arc<ServerConfig>, id: u64) -> Self {
        let driver = Driver::new(config.driver.clone());
        Connection { config, id, driver, recorder: None, loads: 0 }
    }

    pub fn driver(&self) -> &Driver {
        &self.driver
    }

    /// Messages to send as soon as the socket opens.
    pub fn open(&mut self) -> Vec<ServerMessage> {
        match self.config.preload.clone() {
            Some(p) => self.dispatch(ClientMessage::LoadProgram {
                source: p.source,
                gutter_geometry: GutterGeometry::default(),
                mode: p.mode,
                name: Some(p.name),
            }),
            None => Vec::new(),
        }
    }

    pub fn on_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match decode_client(text) {
            Ok(msg) => self.dispatch(msg),
            Err(e) => vec![e.to_reply()],
        }
    }

    fn dispatch(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        let load = match &msg {
            ClientMessage::LoadProgram { source, gutter_geometry, mode, name } => {
                Some((source.clone(), *gutter_geometry, *mode, name.clone()))
            }
            _ => None,
        };
        if load.is_none() {
            self.record(&msg);
        }
        let replies = self.driver.handle(msg);
        if let Some((source, geometry, mode, name)) = load {
            if self.driver.session().is_some() {
                self.start_recording(&source, geometry, mode, name);
            }
        }
        replies
    }

    fn record(&mut self, msg: &ClientMessage) {
        if let Some(w) = &mut self.recorder {
            if let Err(e) = w.append(msg) {
                log::warn!("connection {}: stroke log write failed: {e}", self.id);
                self.recorder = None;
            }
        }
    }

    fn start_recording(&mut self, source: &str, geometry: GutterGeometry, mode: Mode, name: Option<String>) {
        let Some(dir) = &self.config.record_dir else { return };
        self.loads += 1;
        let stem = format!("session-{}-{}", self.id, self.loads);
        let program_path = dir.join(format!("{stem}.py"));
        let log_path = dir.join(format!("{stem}.jsonl"));
        let header = LogHeader::new(&name.unwrap_or_else(|| format!("{stem}.py")), source, mode, geometry);
        let result = std::fs::write(&program_path, source).and_then(|_| LogWriter::create(&log_path, &header));
        match result {
            Ok(w) => {
                log::info!("connection {}: recording to {}", self.id, log_path.display());
                self.recorder = Some(w);
            }
            Err(e) => {
                log::warn!("connection {}: cannot record to {}: {e}", self.id, dir.display());
                self.recorder = None;
            }
        }
    }
}

/// Accepts connections until the listener fails.
pub async fn serve(listener: TcpListener, config: ServerConfig) -> io::Result<()> {
    let config = Arc::new(config);
    let mut next_id = 0u64;
    loop {
        let (stream, peer) = listener.accept().await?;
        next_id += 1;
        let id = next_id;
        log::info!("connection {id} from {peer}");
        let config = config.clone();
        tokio::spawn(async move {
            match handle_connection(stream, config, id).await {
                Ok(()) => log::info!("connection {id} closed"),
                Err(e) => log::warn!("connection {id} dropped: {e}"),
            }
        });
    }
}

pub async fn handle_connection(stream: TcpStream, config: Arc<ServerConfig>, id: u64) -> Result<(), tungstenite::Error> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut tx, mut rx) = ws.split();
    let mut conn = Connection::new(config, id);
    for m in conn.open() {
        tx.send(Message::Text(encode(&m))).await?;
    }
    while let Some(frame) = rx.next().await {
        let replies = match frame? {
            Message::Text(text) => conn.on_text(&text),
            Message::Binary(_) => vec![ServerMessage::error("binary frames are not supported")],
            Message::Close(_) => break,
            _ => continue,
        };
        for m in replies {
            tx.send(Message::Text(encode(&m))).await?;
        }
    }
    Ok(())
}
