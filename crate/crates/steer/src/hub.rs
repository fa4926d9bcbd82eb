//! Session registry. Each session runs in its own task and handles its
//! commands one at a time in arrival order; frames fan out over a broadcast
//! channel to every subscriber.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use tokio::sync::{broadcast, mpsc, oneshot};
use tokio::time::Instant;

use armlift::session::{HolonomySnapshot, Session, SessionSettings, StateFrame};
use armlift::{ArmSpec, Configuration};

use crate::error::{Result, SteerError};
use crate::protocol::Outbound;

const COMMAND_QUEUE: usize = 256;
const FRAME_BUFFER: usize = 1024;

type Reply<T> = oneshot::Sender<Result<T>>;

enum Command {
    SetTarget([f64; 2], Reply<()>),
    TickRate(f64, Reply<()>),
    Tick(f64, Reply<StateFrame>),
    State(Reply<StateFrame>),
    Snapshot(Reply<HolonomySnapshot>),
    ResetBaseline(Reply<()>),
    Export(oneshot::Sender<Session>),
    Stop,
}

#[derive(Clone)]
pub struct SessionHandle {
    id: String,
    commands: mpsc::Sender<Command>,
    frames: broadcast::Sender<String>,
}

impl SessionHandle {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Frames (JSON text) emitted by this session from now on.
    pub fn subscribe(&self) -> broadcast::Receiver<String> {
        self.frames.subscribe()
    }

    async fn call<T>(&self, make: impl FnOnce(Reply<T>) -> Command) -> Result<T> {
        let (tx, rx) = oneshot::channel();
        self.commands.send(make(tx)).await.map_err(|_| SteerError::Closed(self.id.clone()))?;
        rx.await.map_err(|_| SteerError::Closed(self.id.clone()))?
    }

    pub async fn set_target(&self, point: [f64; 2]) -> Result<()> {
        self.call(|r| Command::SetTarget(point, r)).await
    }

    pub async fn set_tick_rate(&self, hz: f64) -> Result<()> {
        self.call(|r| Command::TickRate(hz, r)).await
    }

    pub async fn tick(&self, dt: f64) -> Result<StateFrame> {
        self.call(|r| Command::Tick(dt, r)).await
    }

    pub async fn state(&self) -> Result<StateFrame> {
        self.call(Command::State).await
    }

    pub async fn snapshot(&self) -> Result<HolonomySnapshot> {
        self.call(Command::Snapshot).await
    }

    pub async fn reset_baseline(&self) -> Result<()> {
        self.call(Command::ResetBaseline).await
    }

    /// Full serializable session state.
    pub async fn export(&self) -> Result<Session> {
        let (tx, rx) = oneshot::channel();
        self.commands.send(Command::Export(tx)).await.map_err(|_| SteerError::Closed(self.id.clone()))?;
        rx.await.map_err(|_| SteerError::Closed(self.id.clone()))
    }
}

fn period(hz: f64) -> Option<Duration> {
    (hz > 0.0).then(|| Duration::from_secs_f64(1.0 / hz))
}

async fn run_session(mut session: Session, mut rx: mpsc::Receiver<Command>, frames: broadcast::Sender<String>) {
    let mut next_tick = period(session.settings.tick_rate).map(|p| Instant::now() + p);
    let emit = |frame: &StateFrame| {
        let _ = frames.send(Outbound::State(frame.clone()).to_json());
    };
    loop {
        let timer = async {
            match next_tick {
                Some(at) => tokio::time::sleep_until(at).await,
                None => std::future::pending().await,
            }
        };
        tokio::select! {
            cmd = rx.recv() => {
                let Some(cmd) = cmd else { break };
                match cmd {
                    Command::SetTarget(p, r) => {
                        let _ = r.send(session.set_target(p).map_err(Into::into));
                    }
                    Command::TickRate(hz, r) => {
                        let res = session.set_tick_rate(hz);
                        if res.is_ok() {
                            next_tick = period(hz).map(|p| Instant::now() + p);
                        }
                        let _ = r.send(res.map_err(Into::into));
                    }
                    Command::Tick(dt, r) => {
                        let res = session.tick(dt);
                        if let Ok(frame) = &res {
                            emit(frame);
                        }
                        let _ = r.send(res.map_err(Into::into));
                    }
                    Command::State(r) => {
                        let _ = r.send(session.state().map_err(Into::into));
                    }
                    Command::Snapshot(r) => {
                        let _ = r.send(session.holonomy_snapshot().map_err(Into::into));
                    }
                    Command::ResetBaseline(r) => {
                        session.reset_baseline();
                        let _ = r.send(Ok(()));
                    }
                    Command::Export(r) => {
                        let _ = r.send(session.clone());
                    }
                    Command::Stop => break,
                }
            }
            _ = timer => {
                let p = period(session.settings.tick_rate).expect("timer only armed with a positive rate");
                // Nominal dt keeps a session deterministic in its message sequence.
                if let Ok(frame) = session.tick(p.as_secs_f64()) {
                    emit(&frame);
                }
                next_tick = next_tick.map(|at| (at + p).max(Instant::now()));
            }
        }
    }
}

#[derive(Default)]
pub struct Hub {
    sessions: Mutex<HashMap<String, SessionHandle>>,
    next_id: AtomicU64,
    defaults: SessionSettings,
}

impl Hub {
    pub fn new(defaults: SessionSettings) -> Arc<Self> {
        Arc::new(Hub { defaults, ..Hub::default() })
    }

    pub fn defaults(&self) -> &SessionSettings {
        &self.defaults
    }

    fn spawn(&self, session: Session) -> SessionHandle {
        let (tx, rx) = mpsc::channel(COMMAND_QUEUE);
        let (frames, _) = broadcast::channel(FRAME_BUFFER);
        let handle = SessionHandle { id: session.id.clone(), commands: tx, frames: frames.clone() };
        tokio::spawn(run_session(session, rx, frames));
        self.sessions.lock().expect("registry lock").insert(handle.id.clone(), handle.clone());
        handle
    }

    fn fresh_id(&self) -> String {
        (self.next_id.fetch_add(1, Ordering::Relaxed) + 1).to_string()
    }

    pub fn create(&self, arm: ArmSpec, q0: Configuration, settings: Option<SessionSettings>) -> Result<SessionHandle> {
        let settings = settings.unwrap_or_else(|| self.defaults.clone());
        let session = Session::create(self.fresh_id(), arm, q0, settings)?;
        Ok(self.spawn(session))
    }

    /// Restart a session from an exported state under a new id.
    pub fn resume(&self, mut session: Session) -> Result<SessionHandle> {
        session.id = self.fresh_id();
        // Round trip through the constructor checks to reject tampered states.
        Session::create(&session.id, session.spec.clone(), session.config.clone(), session.settings.clone())?;
        Ok(self.spawn(session))
    }

    pub fn get(&self, id: &str) -> Result<SessionHandle> {
        self.sessions
            .lock()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SteerError::NotFound(id.into()))
    }

    pub async fn remove(&self, id: &str) -> Result<()> {
        let handle = self.sessions.lock().expect("registry lock").remove(id);
        let handle = handle.ok_or_else(|| SteerError::NotFound(id.into()))?;
        let _ = handle.commands.send(Command::Stop).await;
        Ok(())
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.lock().expect("registry lock").keys().cloned().collect();
        ids.sort_by_key(|s| s.parse::<u64>().unwrap_or(u64::MAX));
        ids
    }
}
