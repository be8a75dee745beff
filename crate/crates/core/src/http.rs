//! Blocking JSON-over-HTTP transport shared by the remote oracle and the
//! remote grounding provider.

use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use crate::error::ProviderError;

#[derive(Debug, Clone)]
pub(crate) struct JsonClient {
    agent: ureq::Agent,
    url: String,
}

impl JsonClient {
    pub(crate) fn new(base: &str, path: &str, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}{}", base.trim_end_matches('/'), path);
        Self { agent, url }
    }

    pub(crate) fn url(&self) -> &str {
        &self.url
    }

    /// POSTs `body` and returns the parsed JSON object of a 2xx reply.
    pub(crate) fn post<B: Serialize>(
        &self,
        body: &B,
        context: &str,
    ) -> Result<Value, ProviderError> {
        let mut resp = self
            .agent
            .post(&self.url)
            .send_json(body)
            .map_err(|e| self.transport_error(e, context))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| self.transport_error(e, context))?;
        if !status.is_success() {
            return Err(self.malformed(context, format!("HTTP {status}: {text}")));
        }
        serde_json::from_str::<Value>(&text)
            .map_err(|e| self.malformed(context, format!("invalid JSON body `{text}`: {e}")))
    }

    pub(crate) fn malformed(&self, context: &str, message: String) -> ProviderError {
        ProviderError::Malformed {
            endpoint: self.url.clone(),
            context: context.to_string(),
            message,
        }
    }

    fn transport_error(&self, e: ureq::Error, context: &str) -> ProviderError {
        match e {
            ureq::Error::Timeout(_) => ProviderError::Timeout {
                endpoint: self.url.clone(),
                context: context.to_string(),
            },
            ureq::Error::Io(ref io)
                if matches!(
                    io.kind(),
                    std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock
                ) =>
            {
                ProviderError::Timeout {
                    endpoint: self.url.clone(),
                    context: context.to_string(),
                }
            }
            other => ProviderError::Network {
                endpoint: self.url.clone(),
                context: context.to_string(),
                message: other.to_string(),
            },
        }
    }
}
