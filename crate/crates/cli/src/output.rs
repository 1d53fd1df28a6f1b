//! Where results go: stdout, or a file plus a `.meta.json` sidecar holding
//! the effective configuration.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub struct Output {
    path: Option<PathBuf>,
    command: &'static str,
}

impl Output {
    pub fn new(path: Option<PathBuf>, command: &'static str) -> Self {
        Self { path, command }
    }

    pub fn is_file(&self) -> bool {
        self.path.is_some()
    }

    /// Writes `body`; for file outputs also writes the metadata sidecar.
    pub fn emit(&self, body: &[u8], config: &Value, extra: Option<Value>) -> anyhow::Result<()> {
        match &self.path {
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(body)?;
                out.flush()?;
            }
            Some(path) => {
                std::fs::write(path, body)?;
                let mut meta = json!({
                    "tool": "sweetmark",
                    "version": env!("CARGO_PKG_VERSION"),
                    "command": self.command,
                    "config": config,
                });
                if let Some(extra) = extra {
                    meta["summary"] = extra;
                }
                let mut text = serde_json::to_string_pretty(&meta)?;
                text.push('\n');
                std::fs::write(sidecar_path(path), text)?;
            }
        }
        Ok(())
    }

    /// JSON document with the effective configuration under `"config"`.
    pub fn emit_json(&self, mut value: Value, config: &Value) -> anyhow::Result<()> {
        if let Value::Object(map) = &mut value {
            map.insert("config".into(), config.clone());
        }
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        self.emit(text.as_bytes(), config, None)
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".meta.json");
    path.with_file_name(name)
}

/// RFC 4180 field quoting.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
