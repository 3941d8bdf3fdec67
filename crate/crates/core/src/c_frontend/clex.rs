//! Tokenization of (preprocessed) C source: identifiers, literals and
//! punctuation with byte spans, plus comment span tracking so comments can
//! be re-attached to adjacent definitions.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CTokenKind {
    Ident,
    Number,
    Str,
    Char,
    Punct,
    /// A whole preprocessor directive line (including continuations).
    Directive,
}

#[derive(Debug, Clone, Copy)]
pub struct CToken<'a> {
    pub kind: CTokenKind,
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

impl<'a> CToken<'a> {
    pub fn is(&self, s: &str) -> bool {
        self.text == s
    }
}

#[derive(Debug, Default)]
pub struct CScan<'a> {
    pub tokens: Vec<CToken<'a>>,
    /// Byte spans of comments, in order.
    pub comments: Vec<(usize, usize)>,
}

pub fn scan(src: &str) -> CScan<'_> {
    let bytes = src.as_bytes();
    let mut out = CScan::default();
    let mut i = 0;
    let mut at_line_start = true;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c == '\n' {
            at_line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            let end = src[i..].find('\n').map(|o| i + o).unwrap_or(src.len());
            out.comments.push((i, end));
            i = end;
            continue;
        }
        if src[i..].starts_with("/*") {
            let end = src[i + 2..].find("*/").map(|o| i + o + 4).unwrap_or(src.len());
            out.comments.push((i, end));
            i = end;
            continue;
        }
        if c == '#' && at_line_start {
            // Directive line; honor backslash continuations.
            let mut end = i;
            loop {
                let line_end = src[end..].find('\n').map(|o| end + o).unwrap_or(src.len());
                let line = &src[end..line_end];
                if line.trim_end().ends_with('\\') && line_end < src.len() {
                    end = line_end + 1;
                } else {
                    end = line_end;
                    break;
                }
            }
            out.tokens.push(CToken { kind: CTokenKind::Directive, text: &src[i..end], start: i, end });
            i = end;
            continue;
        }
        at_line_start = false;
        if c == '"' {
            let mut j = i + 1;
            while j < bytes.len() {
                match bytes[j] {
                    b'\\' => j += 2,
                    b'"' => {
                        j += 1;
                        break;
                    }
                    _ => j += 1,
                }
            }
            out.tokens.push(CToken { kind: CTokenKind::Str, text: &src[i..j.min(src.len())], start: i, end: j.min(src.len()) });
            i = j.min(src.len());
            continue;
        }
        if c == '\'' {
            let mut j = i + 1;
            while j < bytes.len() {
                match bytes[j] {
                    b'\\' => j += 2,
                    b'\'' => {
                        j += 1;
                        break;
                    }
                    _ => j += 1,
                }
            }
            out.tokens.push(CToken { kind: CTokenKind::Char, text: &src[i..j.min(src.len())], start: i, end: j.min(src.len()) });
            i = j.min(src.len());
            continue;
        }
        if c == '_' || c.is_ascii_alphabetic() {
            let mut j = i;
            while j < bytes.len() && (bytes[j] == b'_' || (bytes[j] as char).is_ascii_alphanumeric()) {
                j += 1;
            }
            out.tokens.push(CToken { kind: CTokenKind::Ident, text: &src[i..j], start: i, end: j });
            i = j;
            continue;
        }
        if c.is_ascii_digit() {
            let mut j = i;
            while j < bytes.len() {
                let b = bytes[j];
                if b.is_ascii_alphanumeric() || b == b'.' || b == b'_' {
                    // Exponent signs in floats and hex floats.
                    if (b == b'e' || b == b'E' || b == b'p' || b == b'P')
                        && j + 1 < bytes.len()
                        && (bytes[j + 1] == b'+' || bytes[j + 1] == b'-')
                    {
                        j += 2;
                        continue;
                    }
                    j += 1;
                } else {
                    break;
                }
            }
            out.tokens.push(CToken { kind: CTokenKind::Number, text: &src[i..j], start: i, end: j });
            i = j;
            continue;
        }
        // Multi-char operators only matter where parsing cares; `->` is the
        // one dependency extraction needs to see as a unit.
        let len = if src[i..].starts_with("->") { 2 } else { 1 };
        out.tokens.push(CToken { kind: CTokenKind::Punct, text: &src[i..i + len], start: i, end: i + len });
        i += len;
    }
    out
}

pub const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else",
    "enum", "extern", "float", "for", "goto", "if", "inline", "int", "long", "register",
    "restrict", "return", "short", "signed", "sizeof", "static", "struct", "switch", "typedef",
    "union", "unsigned", "void", "volatile", "while", "_Bool", "_Complex", "_Noreturn",
    "_Static_assert", "_Thread_local", "_Alignas", "_Alignof", "_Atomic", "_Generic",
];

pub fn is_c_keyword(s: &str) -> bool {
    C_KEYWORDS.contains(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scans_tokens_and_comments() {
        let src = "/* lead */\nint f(void) { return 'a' + \"s\"[0]; } // tail";
        let s = scan(src);
        assert_eq!(s.comments.len(), 2);
        let idents: Vec<_> = s
            .tokens
            .iter()
            .filter(|t| t.kind == CTokenKind::Ident)
            .map(|t| t.text)
            .collect();
        assert_eq!(idents, vec!["int", "f", "void", "return"]);
    }

    #[test]
    fn directive_lines_are_single_tokens() {
        let src = "#define X \\\n  1\nint x = X;";
        let s = scan(src);
        assert_eq!(s.tokens[0].kind, CTokenKind::Directive);
        assert!(s.tokens[0].text.contains('1'));
        assert!(s.tokens.iter().any(|t| t.is("x")));
    }

    #[test]
    fn hash_inside_line_is_not_a_directive() {
        let src = "int a = 1 # 2;"; // not valid C, scanner only
        let s = scan(src);
        assert!(s.tokens.iter().all(|t| t.kind != CTokenKind::Directive));
    }

    #[test]
    fn arrow_is_one_token() {
        let s = scan("p->len");
        assert_eq!(s.tokens[1].text, "->");
    }
}
