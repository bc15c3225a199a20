//! Scripted WebSocket client against a live server.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use futures::{SinkExt, StreamExt};
use rand::{Rng, SeedableRng};
use revint::scene;
use revint_playback::{serve, Hub};
use serde_json::{json, Value};
use tokio::net::{TcpListener, TcpStream};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Client = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(hub: Arc<Hub>) -> SocketAddr {
    let listener = TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(serve(listener, hub));
    addr
}

async fn connect(addr: SocketAddr) -> Client {
    connect_async(format!("ws://{addr}/ws")).await.unwrap().0
}

async fn call_raw(client: &mut Client, request: Value) -> String {
    client.send(Message::Text(request.to_string().into())).await.unwrap();
    loop {
        match client.next().await.unwrap().unwrap() {
            Message::Text(text) => return text.to_string(),
            _ => continue,
        }
    }
}

async fn call(client: &mut Client, request: Value) -> Value {
    serde_json::from_str(&call_raw(client, request).await).unwrap()
}

async fn create(client: &mut Client, sc: &revint::Scene) -> Value {
    call(client, json!({"op": "create", "scene": sc})).await
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn random_walk_revisits_match_first_visits() {
    let hub = Arc::new(Hub::default());
    let addr = start(hub).await;
    let mut client = connect(addr).await;
    let created = create(&mut client, &scene::gravity_ring(16)).await;
    assert_eq!(created["ok"], true);
    let id = created["id"].as_str().unwrap().to_string();

    let mut first_visit: HashMap<i64, String> = HashMap::new();
    first_visit.insert(0, created["digest"].as_str().unwrap().to_string());
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut revisits = 0;
    for _ in 0..100 {
        let target: i64 = rng.gen_range(-500..=500);
        let r = call(&mut client, json!({"op": "seek", "id": id, "step": target})).await;
        assert_eq!(r["ok"], true, "{r}");
        assert_eq!(r["step"], target);
        let digest = r["digest"].as_str().unwrap().to_string();
        match first_visit.get(&target) {
            Some(d) => {
                revisits += 1;
                assert_eq!(d, &digest, "step {target}");
            }
            None => {
                first_visit.insert(target, digest);
            }
        }
    }
    let back = call(&mut client, json!({"op": "seek", "id": id, "step": 0})).await;
    assert_eq!(back["digest"], created["digest"]);
    assert!(revisits > 0 || first_visit.len() == 101);
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn forward_then_home_restores_creation_digest() {
    let addr = start(Arc::new(Hub::default())).await;
    let mut client = connect(addr).await;
    let created = create(&mut client, &scene::chain(8)).await;
    let id = created["id"].as_str().unwrap();
    let far = call(&mut client, json!({"op": "seek", "id": id, "step": 3000})).await;
    assert_ne!(far["digest"], created["digest"]);
    let home = call(&mut client, json!({"op": "seek", "id": id, "step": 0})).await;
    assert_eq!(home["digest"], created["digest"]);
    let frame = call(&mut client, json!({"op": "frame", "id": id})).await;
    assert_eq!(frame["positions"].as_array().unwrap().len(), 8);
    assert!(frame["q_hex"].as_array().unwrap().iter().all(Value::is_string));
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn frames_are_byte_stable_across_reconnects() {
    let hub = Arc::new(Hub::default());
    let addr = start(hub.clone()).await;
    let mut frames = Vec::new();
    for _ in 0..2 {
        let mut client = connect(addr).await;
        let created = create(&mut client, &scene::spring(0.1)).await;
        let id = created["id"].as_str().unwrap();
        call(&mut client, json!({"op": "seek", "id": id, "step": -123})).await;
        frames.push(call_raw(&mut client, json!({"op": "frame", "id": id})).await);
        client.close(None).await.unwrap();
    }
    assert_eq!(frames[0], frames[1]);
    // Sessions die with their connection.
    for _ in 0..50 {
        if hub.is_empty() {
            break;
        }
        tokio::time::sleep(std::time::Duration::from_millis(20)).await;
    }
    assert!(hub.is_empty());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 2)]
async fn errors_over_the_wire() {
    let addr = start(Arc::new(Hub::new(1000))).await;
    let mut client = connect(addr).await;
    let r = call(&mut client, json!({"op": "create", "scene": {"name": "broken"}})).await;
    assert_eq!((r["ok"].clone(), r["code"].clone()), (json!(false), json!("bad_scene")));
    let r = call(&mut client, json!({"op": "frame", "id": "session-999"})).await;
    assert_eq!(r["code"], "unknown_session");
    let created = create(&mut client, &scene::spring(0.1)).await;
    let r = call(&mut client, json!({"op": "seek", "id": created["id"], "step": 5000})).await;
    assert_eq!(r["code"], "seek_cap");
}
