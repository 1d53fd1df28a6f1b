//! JSONL document ingestion: one object per line with a string field `"text"`.

use std::io::BufRead;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::tokenizer::Tokenizer;
use crate::vocab::{TokenId, Vocabulary};

#[derive(Deserialize)]
struct Document {
    text: String,
}

/// Blank lines are skipped; anything else must parse.
pub fn read_texts<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let doc: Document = serde_json::from_str(&line)
            .map_err(|e| Error::data(format!("corpus line {}: {e}", i + 1)))?;
        out.push(doc.text);
    }
    Ok(out)
}

pub fn load_texts(path: impl AsRef<Path>) -> Result<Vec<String>> {
    read_texts(std::io::BufReader::new(std::fs::File::open(path)?))
}

pub fn tokenize_all(texts: &[String], tokenizer: &Tokenizer, vocab: &Vocabulary) -> Vec<Vec<TokenId>> {
    texts.iter().map(|t| tokenizer.tokenize(t, vocab)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_text_fields() {
        let src = "{\"text\": \"a b\"}\n\n{\"text\": \"c\", \"id\": 3}\n";
        assert_eq!(read_texts(src.as_bytes()).unwrap(), vec!["a b", "c"]);
    }

    #[test]
    fn reports_bad_lines() {
        let err = read_texts("{\"text\": 1}\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Data(m) if m.contains("line 1")));
    }
}
