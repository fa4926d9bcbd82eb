//! Start the service on a free port, open a websocket, and drag the target
//! around a square while the timer ticks at 30 Hz.

use std::time::Duration;

use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio_tungstenite::tungstenite::Message;

use armlift::session::SessionSettings;
use armlift_steer::{serve_on, Hub};

#[tokio::main]
async fn main() {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve_on(listener, Hub::new(SessionSettings::default())));

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{addr}/ws")).await.unwrap();
    let create = json!({"type": "create", "arm": {"lengths": [1, 1, 1, 1]}, "q0": {"angles": [0.4, 1.7, -0.6, 2.5]}});
    ws.send(Message::text(create.to_string())).await.unwrap();

    let mut base = None;
    let mut corners = Vec::new();
    let mut frames = 0;
    let mut heading: Option<[f64; 2]> = None;
    while let Some(Ok(msg)) = ws.next().await {
        let Message::Text(text) = msg else { continue };
        let v: Value = serde_json::from_str(&text).unwrap();
        match v["type"].as_str() {
            Some("state") => {
                frames += 1;
                let e = [v["effector"][0].as_f64().unwrap(), v["effector"][1].as_f64().unwrap()];
                let b = *base.get_or_insert_with(|| {
                    let s = 0.2;
                    corners = vec![[e[0], e[1]], [e[0], e[1] + s], [e[0] + s, e[1] + s], [e[0] + s, e[1]]];
                    e
                });
                let arrived = heading.is_none_or(|p| (e[0] - p[0]).hypot(e[1] - p[1]) < 1e-9);
                if arrived {
                    match corners.pop() {
                        Some(p) => {
                            heading = Some(p);
                            println!("frame {frames:>3}: heading to [{:.3}, {:.3}]", p[0], p[1]);
                            ws.send(Message::text(json!({"type": "set_target", "point": p}).to_string())).await.unwrap();
                        }
                        None => {
                            heading = Some([f64::NAN; 2]);
                            println!("frame {frames:>3}: back at [{:.3}, {:.3}]", b[0], b[1]);
                            ws.send(Message::text(json!({"type": "snapshot_request"}).to_string())).await.unwrap();
                        }
                    }
                }
            }
            Some("holonomy") => {
                println!("holonomy displacement {} (norm {:.2e})", v["displacement"], v["norm"].as_f64().unwrap());
                break;
            }
            Some("error") => println!("error: {}", v["message"]),
            _ => {}
        }
    }
    ws.close(None).await.ok();
    tokio::time::sleep(Duration::from_millis(20)).await;
}
