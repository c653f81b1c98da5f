//! Wire-level test of the chat-completion client against a minimal
//! in-process HTTP server.

mod common;

use cockpit_core::harness::agents::Agent;
use cockpit_core::harness::client::{EndpointConfig, HttpEndpointAgent};
use cockpit_core::harness::ChatMessage;
use std::io::{Read, Write};
use std::net::TcpListener;

/// Serve `responses` one per connection, recording request bodies.
fn spawn_server(responses: Vec<String>) -> (String, std::thread::JoinHandle<Vec<String>>) {
    let listener = TcpListener::bind("127.0.0.1:0").expect("bind");
    let addr = listener.local_addr().unwrap();
    let handle = std::thread::spawn(move || {
        let mut bodies = Vec::new();
        for response in responses {
            let (mut stream, _) = listener.accept().expect("accept");
            let mut buffer = vec![0u8; 65536];
            let mut filled = 0usize;
            let body;
            loop {
                let n = stream.read(&mut buffer[filled..]).expect("read");
                filled += n;
                let text = String::from_utf8_lossy(&buffer[..filled]).into_owned();
                if let Some(header_end) = text.find("\r\n\r\n") {
                    let content_length = text
                        .lines()
                        .find_map(|line| {
                            let (name, value) = line.split_once(':')?;
                            name.eq_ignore_ascii_case("content-length")
                                .then(|| value.trim().parse::<usize>().ok())?
                        })
                        .unwrap_or(0);
                    let have = filled - (header_end + 4);
                    if have >= content_length {
                        body = text[header_end + 4..].to_string();
                        break;
                    }
                }
                if n == 0 {
                    body = String::new();
                    break;
                }
            }
            bodies.push(body);
            let payload = response.as_bytes();
            let head = format!(
                "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                payload.len()
            );
            stream.write_all(head.as_bytes()).unwrap();
            stream.write_all(payload).unwrap();
        }
        bodies
    });
    (format!("http://{addr}/v1/chat/completions"), handle)
}

#[test]
fn client_speaks_the_chat_completion_wire_format() {
    let reply = serde_json::json!({
        "choices": [{"message": {"role": "assistant", "content": "done"}}]
    });
    let (url, server) = spawn_server(vec![reply.to_string()]);

    let config = EndpointConfig {
        url,
        model: "test-model".into(),
        api_key_env: None,
        temperature: 0.7,
        max_retries: 1,
        timeout_secs: 10,
    };
    let mut agent = HttpEndpointAgent::new(config).unwrap();
    let history = vec![
        ChatMessage::system("be helpful"),
        ChatMessage::user("Query: lock the doors"),
    ];
    let reply = agent.reply(&history).unwrap();
    assert_eq!(reply, "done");

    let bodies = server.join().unwrap();
    let request: serde_json::Value = serde_json::from_str(&bodies[0]).unwrap();
    assert_eq!(request["model"], "test-model");
    assert_eq!(request["temperature"], 0.7);
    assert_eq!(request["messages"][0]["role"], "system");
    assert_eq!(request["messages"][1]["role"], "user");
    assert_eq!(request["messages"][1]["content"], "Query: lock the doors");
}

#[test]
fn client_retries_then_reports_endpoint_failure() {
    // Server that always closes with a 500.
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let server = std::thread::spawn(move || {
        for _ in 0..2 {
            let (mut stream, _) = listener.accept().unwrap();
            let mut sink = [0u8; 4096];
            let _ = stream.read(&mut sink);
            let _ = stream.write_all(
                b"HTTP/1.1 500 Internal Server Error\r\nContent-Length: 0\r\nConnection: close\r\n\r\n",
            );
        }
    });

    let config = EndpointConfig {
        url: format!("http://{addr}/v1/chat/completions"),
        model: "test-model".into(),
        api_key_env: None,
        temperature: 0.7,
        max_retries: 2,
        timeout_secs: 5,
    };
    let mut agent = HttpEndpointAgent::new(config).unwrap();
    let err = agent.reply(&[ChatMessage::user("hi")]).unwrap_err();
    assert!(err.to_string().contains("500"));
    server.join().unwrap();
}

#[test]
fn missing_credential_variable_is_a_config_error() {
    let config = EndpointConfig {
        url: "http://127.0.0.1:1/unreachable".into(),
        model: "m".into(),
        api_key_env: Some("COCKPIT_TEST_KEY_THAT_DOES_NOT_EXIST".into()),
        temperature: 0.7,
        max_retries: 1,
        timeout_secs: 1,
    };
    let err = match HttpEndpointAgent::new(config) {
        Err(e) => e,
        Ok(_) => panic!("agent construction should fail"),
    };
    assert!(err.to_string().contains("credential variable"));
}
