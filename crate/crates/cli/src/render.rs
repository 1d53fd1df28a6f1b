//! ANSI view of per-token watermark state.

use sweetmark::detector::TokenAnnotation;
use sweetmark::generator::GenerationStep;

use crate::backend::Backend;

const GREEN: &str = "\x1b[32m";
const RED: &str = "\x1b[31m";
const DIM: &str = "\x1b[2m";
const RESET: &str = "\x1b[0m";

/// Green and red for scored tokens, dimmed for tokens below the entropy gate.
fn paint(out: &mut String, text: &str, gated: bool, green: Option<bool>) {
    let colour = match (gated, green) {
        (true, Some(true)) => GREEN,
        (true, _) => RED,
        (false, _) => DIM,
    };
    out.push_str(colour);
    out.push_str(text);
    out.push_str(RESET);
}

pub fn annotations(backend: &Backend, prompt: &[u32], tokens: &[TokenAnnotation]) -> String {
    let mut out = backend.decode(prompt);
    if !prompt.is_empty() {
        out.push_str(backend.joiner);
    }
    for (i, a) in tokens.iter().enumerate() {
        if i > 0 {
            out.push_str(backend.joiner);
        }
        paint(&mut out, backend.token_text(a.token), a.gated, a.green);
    }
    out
}

pub fn steps(backend: &Backend, prompt: &[u32], steps: &[GenerationStep]) -> String {
    let mut out = backend.decode(prompt);
    if !prompt.is_empty() {
        out.push_str(backend.joiner);
    }
    for (i, s) in steps.iter().enumerate() {
        if i > 0 {
            out.push_str(backend.joiner);
        }
        paint(&mut out, backend.token_text(s.token), s.watermarked, s.green);
    }
    out
}

pub fn legend() -> String {
    format!("{GREEN}green{RESET} {RED}red{RESET} {DIM}below gate{RESET}")
}
