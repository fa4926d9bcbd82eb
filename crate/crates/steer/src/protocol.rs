//! JSON frames exchanged with clients. Every frame carries a `type` tag.

use serde::{Deserialize, Serialize};

use armlift::session::{HolonomySnapshot, SessionSettings, StateFrame};
use armlift::{ArmSpec, Configuration};

use crate::error::SteerError;

/// Client to service. Frames other than `create` and `subscribe` act on the
/// connection's session unless they name another one with `id`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Inbound {
    Create {
        arm: ArmSpec,
        q0: Configuration,
        #[serde(default)]
        settings: Option<SessionSettings>,
    },
    Subscribe {
        id: String,
    },
    SetTarget {
        #[serde(default)]
        id: Option<String>,
        point: [f64; 2],
    },
    TickRate {
        #[serde(default)]
        id: Option<String>,
        hz: f64,
    },
    /// Advance by `dt` outside the timer; useful with tick rate 0.
    Tick {
        #[serde(default)]
        id: Option<String>,
        dt: f64,
    },
    SnapshotRequest {
        #[serde(default)]
        id: Option<String>,
    },
    ResetBaseline {
        #[serde(default)]
        id: Option<String>,
    },
}

impl Inbound {
    pub fn session_id(&self) -> Option<&str> {
        match self {
            Inbound::Create { .. } => None,
            Inbound::Subscribe { id } => Some(id),
            Inbound::SetTarget { id, .. }
            | Inbound::TickRate { id, .. }
            | Inbound::Tick { id, .. }
            | Inbound::SnapshotRequest { id }
            | Inbound::ResetBaseline { id } => id.as_deref(),
        }
    }
}

/// Service to client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Created { id: String },
    Subscribed { id: String },
    Ack { id: String },
    State(StateFrame),
    Holonomy {
        id: String,
        #[serde(flatten)]
        snapshot: HolonomySnapshot,
    },
    Error { error: String, message: String },
}

impl Outbound {
    pub fn error(e: &SteerError) -> Self {
        Outbound::Error { error: e.kind().into(), message: e.to_string() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

pub fn parse_inbound(text: &str) -> Result<Inbound, SteerError> {
    serde_json::from_str(text).map_err(|e| SteerError::Malformed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inbound_frames() {
        let f = parse_inbound(r#"{"type":"create","arm":{"lengths":[1,1,1]},"q0":{"angles":[0,1,-1]}}"#).unwrap();
        assert!(matches!(f, Inbound::Create { settings: None, .. }));
        let f = parse_inbound(r#"{"type":"set_target","point":[1.5,0.2]}"#).unwrap();
        assert_eq!(f, Inbound::SetTarget { id: None, point: [1.5, 0.2] });
        let f = parse_inbound(r#"{"type":"snapshot_request","id":"7"}"#).unwrap();
        assert_eq!(f.session_id(), Some("7"));
        assert!(parse_inbound(r#"{"type":"warp"}"#).is_err());
    }

    #[test]
    fn state_frame_is_tagged_state() {
        let spec = ArmSpec::unit_planar(3).unwrap();
        let s = armlift::session::Session::create(
            "1",
            spec,
            Configuration::from_angles(vec![0.0, 1.0, -1.0]),
            SessionSettings::default(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&Outbound::State(s.state().unwrap()).to_json()).unwrap();
        assert_eq!(v["type"], "state");
        assert_eq!(v["effector"].as_array().unwrap().len(), 2);
        assert!(v["clamped"].is_boolean());
    }
}
