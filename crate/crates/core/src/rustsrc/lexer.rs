//! Minimal Rust lexer producing lexical tokens with byte spans.
//!
//! Comments and whitespace are skipped (never emitted as tokens). This is
//! not a full grammar; it covers what source rewriting, item splitting and
//! token counting need: identifiers, lifetimes, literals, and operators
//! grouped the way rustc groups them.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LexError {
    #[error("unterminated {what} starting at byte {at}")]
    Unterminated { what: &'static str, at: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Lifetime,
    Number,
    Str,
    Char,
    Punct,
}

#[derive(Debug, Clone, Copy)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

impl<'a> Token<'a> {
    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }
}

const THREE_CHAR_OPS: &[&str] = &["<<=", ">>=", "..=", "..."];
const TWO_CHAR_OPS: &[&str] = &[
    "::", "->", "=>", "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "+=", "-=", "*=", "/=",
    "%=", "^=", "&=", "|=", "..",
];

fn is_ident_start(c: char) -> bool {
    c == '_' || c.is_alphabetic()
}

fn is_ident_continue(c: char) -> bool {
    c == '_' || c.is_alphanumeric()
}

/// Lexes Rust source into tokens, skipping comments and whitespace.
pub fn lex(src: &str) -> Result<Vec<Token<'_>>, LexError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = src[i..].chars().next().unwrap();
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        // Line comment.
        if src[i..].starts_with("//") {
            i = src[i..].find('\n').map(|o| i + o + 1).unwrap_or(src.len());
            continue;
        }
        // Block comment, nested per Rust rules.
        if src[i..].starts_with("/*") {
            let start = i;
            let mut depth = 1;
            i += 2;
            while depth > 0 {
                if i >= src.len() {
                    return Err(LexError::Unterminated { what: "block comment", at: start });
                }
                if src[i..].starts_with("/*") {
                    depth += 1;
                    i += 2;
                } else if src[i..].starts_with("*/") {
                    depth -= 1;
                    i += 2;
                } else {
                    i += src[i..].chars().next().unwrap().len_utf8();
                }
            }
            continue;
        }
        // Raw / byte string prefixes.
        if let Some(len) = raw_string_len(&src[i..], i)? {
            tokens.push(Token { kind: TokenKind::Str, text: &src[i..i + len], start: i, end: i + len });
            i += len;
            continue;
        }
        if (c == 'b' && src[i..].len() > 1 && src.as_bytes()[i + 1] == b'"') || c == '"' {
            let quote_at = if c == 'b' { i + 1 } else { i };
            let end = string_end(src, quote_at)?;
            tokens.push(Token { kind: TokenKind::Str, text: &src[i..end], start: i, end });
            i = end;
            continue;
        }
        if c == 'b' && src[i..].len() > 1 && src.as_bytes()[i + 1] == b'\'' {
            let end = char_end(src, i + 1)?;
            tokens.push(Token { kind: TokenKind::Char, text: &src[i..end], start: i, end });
            i = end;
            continue;
        }
        if c == '\'' {
            // Lifetime vs char literal: a lifetime is `'ident` not followed
            // by a closing quote.
            let rest = &src[i + 1..];
            let mut chars = rest.chars();
            if let Some(first) = chars.next() {
                if is_ident_start(first) {
                    let ident_len: usize = rest
                        .chars()
                        .take_while(|&ch| is_ident_continue(ch))
                        .map(|ch| ch.len_utf8())
                        .sum();
                    if !rest[ident_len..].starts_with('\'') {
                        let end = i + 1 + ident_len;
                        tokens.push(Token {
                            kind: TokenKind::Lifetime,
                            text: &src[i..end],
                            start: i,
                            end,
                        });
                        i = end;
                        continue;
                    }
                }
            }
            let end = char_end(src, i)?;
            tokens.push(Token { kind: TokenKind::Char, text: &src[i..end], start: i, end });
            i = end;
            continue;
        }
        if is_ident_start(c) {
            let len: usize = src[i..]
                .chars()
                .take_while(|&ch| is_ident_continue(ch))
                .map(|ch| ch.len_utf8())
                .sum();
            tokens.push(Token { kind: TokenKind::Ident, text: &src[i..i + len], start: i, end: i + len });
            i += len;
            continue;
        }
        if c.is_ascii_digit() {
            let end = number_end(src, i);
            tokens.push(Token { kind: TokenKind::Number, text: &src[i..end], start: i, end });
            i = end;
            continue;
        }
        // Operators, longest match first.
        let mut matched = None;
        for op in THREE_CHAR_OPS {
            if src[i..].starts_with(op) {
                matched = Some(op.len());
                break;
            }
        }
        if matched.is_none() {
            for op in TWO_CHAR_OPS {
                if src[i..].starts_with(op) {
                    matched = Some(op.len());
                    break;
                }
            }
        }
        let len = matched.unwrap_or(c.len_utf8());
        tokens.push(Token { kind: TokenKind::Punct, text: &src[i..i + len], start: i, end: i + len });
        i += len;
    }
    Ok(tokens)
}

/// Length of a raw string literal (`r"..."`, `r#"..."#`, `br#"..."#`) at the
/// start of `s`, or None if `s` does not start with one.
fn raw_string_len(s: &str, abs: usize) -> Result<Option<usize>, LexError> {
    let bytes = s.as_bytes();
    let mut j = 0;
    if bytes.first() == Some(&b'b') {
        j = 1;
    }
    if bytes.get(j) != Some(&b'r') {
        return Ok(None);
    }
    j += 1;
    let mut hashes = 0;
    while bytes.get(j) == Some(&b'#') {
        hashes += 1;
        j += 1;
    }
    if bytes.get(j) != Some(&b'"') {
        return Ok(None);
    }
    j += 1;
    let closer: String = std::iter::once('"').chain(std::iter::repeat('#').take(hashes)).collect();
    match s[j..].find(&closer) {
        Some(off) => Ok(Some(j + off + closer.len())),
        None => Err(LexError::Unterminated { what: "raw string", at: abs }),
    }
}

/// Byte index just past the closing quote of the string starting at `open`.
fn string_end(src: &str, open: usize) -> Result<usize, LexError> {
    let bytes = src.as_bytes();
    let mut i = open + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'"' => return Ok(i + 1),
            _ => i += src[i..].chars().next().unwrap().len_utf8(),
        }
    }
    Err(LexError::Unterminated { what: "string", at: open })
}

fn char_end(src: &str, open: usize) -> Result<usize, LexError> {
    let bytes = src.as_bytes();
    let mut i = open + 1;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' => i += 2,
            b'\'' => return Ok(i + 1),
            _ => i += src[i..].chars().next().unwrap().len_utf8(),
        }
    }
    Err(LexError::Unterminated { what: "char literal", at: open })
}

fn number_end(src: &str, start: usize) -> usize {
    let bytes = src.as_bytes();
    let mut i = start;
    let mut seen_dot = false;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_alphanumeric() || b == b'_' {
            // Exponent sign: 1e-5, 2.5E+3.
            if (b == b'e' || b == b'E')
                && i + 1 < bytes.len()
                && (bytes[i + 1] == b'+' || bytes[i + 1] == b'-')
                && i + 2 < bytes.len()
                && bytes[i + 2].is_ascii_digit()
                && !src[start..i].starts_with("0x")
            {
                i += 2;
                continue;
            }
            i += 1;
        } else if b == b'.'
            && !seen_dot
            && i + 1 < bytes.len()
            && bytes[i + 1].is_ascii_digit()
        {
            seen_dot = true;
            i += 1;
        } else {
            break;
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        lex(src).unwrap().iter().map(|t| t.text.to_string()).collect()
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(texts("a /* b /* c */ d */ e // f\ng"), vec!["a", "e", "g"]);
    }

    #[test]
    fn operators_group_like_rustc() {
        assert_eq!(texts("a -> b::c >>= d..=e"), vec!["a", "->", "b", "::", "c", ">>=", "d", "..=", "e"]);
    }

    #[test]
    fn lifetimes_vs_char_literals() {
        let toks = lex("&'a str, 'x', '\\n'").unwrap();
        assert_eq!(toks[1].kind, TokenKind::Lifetime);
        assert_eq!(toks[1].text, "'a");
        assert_eq!(toks[4].kind, TokenKind::Char);
        assert_eq!(toks[4].text, "'x'");
        assert_eq!(toks[6].kind, TokenKind::Char);
    }

    #[test]
    fn strings_and_raw_strings() {
        let toks = lex(r####"let s = r#"raw "x" here"#; let b = b"bytes";"####).unwrap();
        assert!(toks.iter().any(|t| t.kind == TokenKind::Str && t.text.starts_with("r#")));
        assert!(toks.iter().any(|t| t.kind == TokenKind::Str && t.text.starts_with("b\"")));
    }

    #[test]
    fn numbers_do_not_eat_range_dots() {
        assert_eq!(texts("0..10"), vec!["0", "..", "10"]);
        assert_eq!(texts("1.5e-3f64"), vec!["1.5e-3f64"]);
    }

    #[test]
    fn unterminated_string_errors() {
        assert!(lex("let s = \"oops").is_err());
    }
}
