//! Blocking JSON-over-HTTP helper shared by the remote generator and the
//! remote language model.

use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff: Duration,
    pub max_backoff: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            initial_backoff: Duration::from_millis(200),
            max_backoff: Duration::from_secs(5),
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 1u32.checked_shl(attempt).unwrap_or(u32::MAX);
        self.initial_backoff.saturating_mul(factor).min(self.max_backoff)
    }
}

pub(crate) fn client(timeout: Duration) -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| Error::Transport(e.to_string()))
}

/// POSTs `body` and decodes the JSON reply. Connection failures and 5xx
/// replies are retried with exponential backoff capped at
/// `policy.max_backoff`; 4xx replies fail immediately.
pub(crate) fn post_json<B: Serialize, R: DeserializeOwned>(
    client: &reqwest::blocking::Client,
    url: &str,
    body: &B,
    policy: &RetryPolicy,
) -> Result<R> {
    let mut attempt = 0;
    loop {
        let outcome = client.post(url).json(body).send();
        let retryable = match outcome {
            Ok(resp) if resp.status().is_success() => {
                return resp.json::<R>().map_err(|e| Error::Transport(format!("bad response body: {e}")));
            }
            Ok(resp) if resp.status().is_client_error() => {
                return Err(Error::Transport(format!("{url} returned {}", resp.status())));
            }
            Ok(resp) => format!("{url} returned {}", resp.status()),
            Err(e) => e.to_string(),
        };
        if attempt >= policy.max_retries {
            return Err(Error::Transport(format!(
                "{retryable} (gave up after {} attempts)",
                attempt + 1
            )));
        }
        std::thread::sleep(policy.backoff(attempt));
        attempt += 1;
    }
}

#[cfg(test)]
pub(crate) mod testserver {
    //! One-thread HTTP responder for exercising the clients.

    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex};

    /// Serves the canned `(status, body)` replies in order, one per
    /// connection, and records each request body.
    pub fn serve(replies: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/", listener.local_addr().unwrap());
        let seen = Arc::new(Mutex::new(Vec::new()));
        let log = seen.clone();
        std::thread::spawn(move || {
            for (status, body) in replies {
                let Ok((stream, _)) = listener.accept() else { return };
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut len = 0usize;
                loop {
                    let mut line = String::new();
                    reader.read_line(&mut line).unwrap();
                    if line == "\r\n" || line.is_empty() {
                        break;
                    }
                    let lower = line.to_ascii_lowercase();
                    if let Some(v) = lower.strip_prefix("content-length:") {
                        len = v.trim().parse().unwrap();
                    }
                }
                let mut buf = vec![0; len];
                reader.read_exact(&mut buf).unwrap();
                log.lock().unwrap().push(String::from_utf8(buf).unwrap());
                let mut stream = stream;
                let reply = format!(
                    "HTTP/1.1 {status} X\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(reply.as_bytes()).unwrap();
            }
        });
        (url, seen)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_is_capped() {
        let p = RetryPolicy {
            max_retries: 10,
            initial_backoff: Duration::from_millis(100),
            max_backoff: Duration::from_millis(450),
        };
        assert_eq!(p.backoff(0), Duration::from_millis(100));
        assert_eq!(p.backoff(2), Duration::from_millis(400));
        assert_eq!(p.backoff(3), Duration::from_millis(450));
        assert_eq!(p.backoff(40), Duration::from_millis(450));
    }
}
