//! Lossless tokenizers: a small Python-flavoured code lexer and a whitespace splitter.
//!
//! Both produce a token list whose concatenation is exactly the input; runs of
//! whitespace are tokens of their own.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::vocab::{TokenId, Vocabulary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenizerMode {
    Code,
    Whitespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LexemeKind {
    Identifier,
    Keyword,
    Number,
    String,
    Comment,
    Whitespace,
    Operator,
    Punct,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lexeme<'a> {
    pub kind: LexemeKind,
    pub text: &'a str,
    pub offset: usize,
}

const PY_KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield", "match", "case",
];

const PY_BUILTINS: &[&str] = &[
    "abs", "all", "any", "bin", "bool", "bytes", "callable", "chr", "dict", "dir", "divmod",
    "enumerate", "filter", "float", "format", "frozenset", "getattr", "hasattr", "hash", "hex",
    "id", "input", "int", "isinstance", "issubclass", "iter", "len", "list", "map", "max", "min",
    "next", "object", "oct", "open", "ord", "pow", "print", "range", "repr", "reversed", "round",
    "set", "setattr", "slice", "sorted", "str", "sum", "super", "tuple", "type", "zip", "self",
    "cls", "Exception", "ValueError", "TypeError", "KeyError", "IndexError", "StopIteration",
    "NotImplementedError", "RuntimeError", "__init__", "__name__", "__main__",
];

const OPERATORS_3: &[&str] = &["**=", "//=", ">>=", "<<=", "..."];
const OPERATORS_2: &[&str] = &[
    "->", ":=", "==", "!=", "<=", ">=", "**", "//", "<<", ">>", "+=", "-=", "*=", "/=", "%=", "&=",
    "|=", "^=", "@=",
];
const OPERATOR_CHARS: &str = "+-*/%@&|^~<>=!";
const PUNCT_CHARS: &str = "()[]{},:;.";
const STRING_PREFIXES: &[&str] = &["r", "b", "f", "u", "rb", "br", "fr", "rf"];

#[derive(Debug, Clone)]
pub struct Tokenizer {
    mode: TokenizerMode,
    keywords: BTreeSet<String>,
    builtins: BTreeSet<String>,
}

impl Tokenizer {
    pub fn code() -> Self {
        Self {
            mode: TokenizerMode::Code,
            keywords: PY_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            builtins: PY_BUILTINS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn whitespace() -> Self {
        Self { mode: TokenizerMode::Whitespace, keywords: BTreeSet::new(), builtins: BTreeSet::new() }
    }

    pub fn new(mode: TokenizerMode) -> Self {
        match mode {
            TokenizerMode::Code => Self::code(),
            TokenizerMode::Whitespace => Self::whitespace(),
        }
    }

    pub fn mode(&self) -> TokenizerMode {
        self.mode
    }

    /// Words an identifier rename must never touch or produce: keywords and builtins.
    pub fn is_protected(&self, word: &str) -> bool {
        self.keywords.contains(word) || self.builtins.contains(word)
    }

    pub fn keyword_set(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().chain(self.builtins.iter()).map(String::as_str)
    }

    /// Strict lexing; fails on unterminated string literals.
    pub fn lex<'a>(&self, text: &'a str) -> Result<Vec<Lexeme<'a>>> {
        self.lex_inner(text, true)
    }

    /// Lenient split into token strings; never fails.
    pub fn split<'a>(&self, text: &'a str) -> Vec<&'a str> {
        self.lex_inner(text, false)
            .expect("lenient lexing cannot fail")
            .into_iter()
            .map(|l| l.text)
            .collect()
    }

    pub fn tokenize(&self, text: &str, vocab: &Vocabulary) -> Vec<TokenId> {
        self.split(text).into_iter().map(|t| vocab.id_or_unk(t)).collect()
    }

    /// Concatenates token strings; ids outside the vocabulary render as `<unk>`.
    pub fn detokenize(&self, ids: &[TokenId], vocab: &Vocabulary) -> String {
        ids.iter()
            .map(|&id| vocab.token(id).unwrap_or(crate::vocab::UNK_TOKEN))
            .collect()
    }

    fn lex_inner<'a>(&self, text: &'a str, strict: bool) -> Result<Vec<Lexeme<'a>>> {
        match self.mode {
            TokenizerMode::Whitespace => Ok(lex_whitespace(text)),
            TokenizerMode::Code => self.lex_code(text, strict),
        }
    }

    fn lex_code<'a>(&self, text: &'a str, strict: bool) -> Result<Vec<Lexeme<'a>>> {
        let bytes = text.as_bytes();
        let mut out = Vec::new();
        let mut i = 0;
        while i < text.len() {
            let c = text[i..].chars().next().expect("in bounds");
            let start = i;
            let kind;
            if c.is_whitespace() {
                i = take_while(text, i, char::is_whitespace);
                kind = LexemeKind::Whitespace;
            } else if c == '#' {
                i = text[i..].find('\n').map_or(text.len(), |n| i + n);
                kind = LexemeKind::Comment;
            } else if c == '\'' || c == '"' {
                i = lex_string(text, i, strict)?;
                kind = LexemeKind::String;
            } else if is_ident_start(c) {
                let end = take_while(text, i, is_ident_continue);
                let word = &text[i..end];
                let quote_follows = matches!(bytes.get(end), Some(b'\'') | Some(b'"'));
                if quote_follows && STRING_PREFIXES.contains(&word.to_ascii_lowercase().as_str()) {
                    i = lex_string(text, end, strict)?;
                    kind = LexemeKind::String;
                } else {
                    i = end;
                    kind = if self.keywords.contains(word) {
                        LexemeKind::Keyword
                    } else {
                        LexemeKind::Identifier
                    };
                }
            } else if c.is_ascii_digit()
                || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit()))
            {
                i = lex_number(text, i);
                kind = LexemeKind::Number;
            } else if let Some(op) = OPERATORS_3
                .iter()
                .chain(OPERATORS_2.iter())
                .find(|op| text[i..].starts_with(**op))
            {
                i += op.len();
                kind = LexemeKind::Operator;
            } else if OPERATOR_CHARS.contains(c) {
                i += 1;
                kind = LexemeKind::Operator;
            } else if PUNCT_CHARS.contains(c) {
                i += 1;
                kind = LexemeKind::Punct;
            } else {
                i += c.len_utf8();
                kind = LexemeKind::Other;
            }
            out.push(Lexeme { kind, text: &text[start..i], offset: start });
        }
        Ok(out)
    }
}

fn lex_whitespace(text: &str) -> Vec<Lexeme<'_>> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let ws = text[i..].chars().next().expect("in bounds").is_whitespace();
        let end = take_while(text, i, |c| c.is_whitespace() == ws);
        let kind = if ws { LexemeKind::Whitespace } else { LexemeKind::Other };
        out.push(Lexeme { kind, text: &text[i..end], offset: i });
        i = end;
    }
    out
}

fn take_while(text: &str, from: usize, pred: impl Fn(char) -> bool) -> usize {
    text[from..]
        .char_indices()
        .find(|&(_, c)| !pred(c))
        .map_or(text.len(), |(n, _)| from + n)
}

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

fn lex_number(text: &str, from: usize) -> usize {
    let bytes = text.as_bytes();
    let mut i = from;
    while i < bytes.len() {
        let b = bytes[i];
        let exponent_sign = (b == b'+' || b == b'-')
            && matches!(bytes[i - 1], b'e' | b'E')
            && bytes.get(i + 1).is_some_and(|d| d.is_ascii_digit())
            && !text[from..i].starts_with("0x");
        if b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || exponent_sign {
            i += 1;
        } else {
            break;
        }
    }
    i
}

/// Returns the end offset of the string literal whose opening quote is at `from`.
fn lex_string(text: &str, from: usize, strict: bool) -> Result<usize> {
    let bytes = text.as_bytes();
    let q = bytes[from];
    let triple = bytes.len() >= from + 3 && bytes[from + 1] == q && bytes[from + 2] == q;
    let mut i = from + if triple { 3 } else { 1 };
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\\' {
            i += 1;
            if i < bytes.len() {
                i += text[i..].chars().next().map_or(1, char::len_utf8);
            }
            continue;
        }
        if triple {
            if b == q && bytes.get(i + 1) == Some(&q) && bytes.get(i + 2) == Some(&q) {
                return Ok(i + 3);
            }
        } else if b == q {
            return Ok(i + 1);
        } else if b == b'\n' {
            if strict {
                return Err(Error::Lex { offset: from, message: "unterminated string literal".into() });
            }
            return Ok(i);
        }
        i += text[i..].chars().next().map_or(1, char::len_utf8);
    }
    if strict {
        return Err(Error::Lex { offset: from, message: "unterminated string literal".into() });
    }
    Ok(text.len())
}
