//! Dense token vocabulary and its line-per-token file format.
//!
//! File layout: a `#sweetmark-vocab v1` header followed by one token per line;
//! the token id is the line index after the header. Tokens may contain
//! newlines and tabs (whitespace runs are tokens), so `\`, `\n`, `\r` and `\t`
//! are backslash-escaped on disk.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type TokenId = u32;

pub const VOCAB_HEADER: &str = "#sweetmark-vocab v1";
pub const UNK_TOKEN: &str = "<unk>";
pub const BOS_TOKEN: &str = "<bos>";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, TokenId>,
    unk_id: TokenId,
    bos_id: TokenId,
}

impl Vocabulary {
    /// Builds a vocabulary from an ordered token list. The list must contain
    /// `<unk>` and `<bos>` exactly once each, and no duplicates.
    pub fn new(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 2 {
            return Err(Error::config("vocabulary needs at least two tokens"));
        }
        if tokens.len() > TokenId::MAX as usize {
            return Err(Error::config("vocabulary too large"));
        }
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if index.insert(tok.clone(), i as TokenId).is_some() {
                return Err(Error::data(format!("duplicate vocabulary token {tok:?}")));
            }
        }
        let unk_id = *index
            .get(UNK_TOKEN)
            .ok_or_else(|| Error::data("vocabulary lacks <unk>"))?;
        let bos_id = *index
            .get(BOS_TOKEN)
            .ok_or_else(|| Error::data("vocabulary lacks <bos>"))?;
        Ok(Self { tokens, index, unk_id, bos_id })
    }

    /// Vocabulary of `<unk>`, `<bos>` and every distinct token in `tokens`,
    /// ordered by descending frequency, ties broken lexicographically.
    pub fn from_tokens<'a, I>(tokens: I) -> Self
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut freq: HashMap<&str, u64> = HashMap::new();
        for tok in tokens {
            if tok != UNK_TOKEN && tok != BOS_TOKEN {
                *freq.entry(tok).or_default() += 1;
            }
        }
        let mut ranked: Vec<(&str, u64)> = freq.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let mut list = vec![UNK_TOKEN.to_string(), BOS_TOKEN.to_string()];
        list.extend(ranked.into_iter().map(|(t, _)| t.to_string()));
        Self::new(list).expect("specials are unique by construction")
    }

    /// Synthetic vocabulary `<unk>`, `<bos>`, `t2`, `t3`, ... of the given size.
    pub fn synthetic(size: usize) -> Result<Self> {
        if size < 3 {
            return Err(Error::config("synthetic vocabulary needs at least three tokens"));
        }
        let mut list = vec![UNK_TOKEN.to_string(), BOS_TOKEN.to_string()];
        list.extend((2..size).map(|i| format!("t{i}")));
        Self::new(list)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn unk_id(&self) -> TokenId {
        self.unk_id
    }

    pub fn bos_id(&self) -> TokenId {
        self.bos_id
    }

    pub fn id_of(&self, token: &str) -> Option<TokenId> {
        self.index.get(token).copied()
    }

    pub fn id_or_unk(&self, token: &str) -> TokenId {
        self.id_of(token).unwrap_or(self.unk_id)
    }

    pub fn token(&self, id: TokenId) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{VOCAB_HEADER}")?;
        for tok in &self.tokens {
            writeln!(w, "{}", escape(tok))?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        match lines.next() {
            Some(Ok(h)) if h == VOCAB_HEADER => {}
            Some(Ok(h)) => return Err(Error::data(format!("bad vocabulary header {h:?}"))),
            Some(Err(e)) => return Err(e.into()),
            None => return Err(Error::data("empty vocabulary file")),
        }
        let mut tokens = Vec::new();
        for (n, line) in lines.enumerate() {
            let line = line?;
            tokens.push(unescape(&line).map_err(|m| Error::data(format!("vocab line {}: {m}", n + 2)))?);
        }
        Self::new(tokens)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }

    /// Short content hash, used to tie traces and reports to the vocabulary they were made with.
    pub fn content_hash(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        let digest = Sha256::digest(&buf);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn escape(tok: &str) -> String {
    let mut out = String::with_capacity(tok.len());
    for c in tok.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(line: &str) -> std::result::Result<String, String> {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some('t') => out.push('\t'),
            Some(other) => return Err(format!("unknown escape \\{other}")),
            None => return Err("dangling backslash".into()),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_dense_and_round_trip() {
        let v = Vocabulary::from_tokens(["b", "a", "b", " ", "\n\t"]);
        assert_eq!(v.len(), 6);
        assert_eq!(v.unk_id(), 0);
        assert_eq!(v.bos_id(), 1);
        assert_eq!(v.token(2), Some("b"));
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.id_of(t), Some(i as TokenId));
        }
        assert_eq!(v.id_or_unk("zzz"), v.unk_id());
    }

    #[test]
    fn file_round_trip_preserves_whitespace_tokens() {
        let v = Vocabulary::from_tokens(["x", "\n    ", "\\n", "\t", "\r\n"]);
        let mut buf = Vec::new();
        v.write_to(&mut buf).unwrap();
        assert!(buf.starts_with(VOCAB_HEADER.as_bytes()));
        let back = Vocabulary::read_from(&buf[..]).unwrap();
        assert_eq!(back, v);
        assert_eq!(back.content_hash(), v.content_hash());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Vocabulary::new(vec!["<unk>".into()]).is_err());
        assert!(Vocabulary::new(vec!["<unk>".into(), "a".into()]).is_err());
        assert!(Vocabulary::new(vec!["<unk>".into(), "<bos>".into(), "<bos>".into()]).is_err());
        assert!(Vocabulary::read_from(&b"#other\n"[..]).is_err());
        assert!(Vocabulary::read_from(&b"#sweetmark-vocab v1\n<unk>\n<bos>\nbad\\q\n"[..]).is_err());
    }
}
