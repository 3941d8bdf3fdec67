//! Parsing of Rust function signatures and struct layouts from source text.
//!
//! Harness generation and instrumentation only need the shape: name,
//! parameter names/types and the return type. Types are kept as strings.

use super::lexer::{lex, Token, TokenKind};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SigError {
    #[error("cannot parse function signature: {0}")]
    BadFunction(String),
    #[error("cannot parse struct layout: {0}")]
    BadStruct(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FnSig {
    pub name: String,
    pub params: Vec<Param>,
    /// Return type text, None for `()` / omitted.
    pub ret: Option<String>,
    pub is_unsafe: bool,
    pub is_extern_c: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: String,
}

impl FnSig {
    /// Renders `name(p1: T1, p2: T2) -> R` without qualifiers.
    pub fn render_plain(&self) -> String {
        let params = self
            .params
            .iter()
            .map(|p| format!("{}: {}", p.name, p.ty))
            .collect::<Vec<_>>()
            .join(", ");
        match &self.ret {
            Some(r) => format!("{}({}) -> {}", self.name, params, r),
            None => format!("{}({})", self.name, params),
        }
    }
}

/// Parses the first `fn` signature found in `src`. Bodies, trailing
/// semicolons and preceding attributes are tolerated and ignored.
pub fn parse_fn_sig(src: &str) -> Result<FnSig, SigError> {
    let tokens = lex(src).map_err(|e| SigError::BadFunction(e.to_string()))?;
    let fn_idx = tokens
        .iter()
        .position(|t| t.is("fn"))
        .ok_or_else(|| SigError::BadFunction("no `fn` keyword".into()))?;
    let mut is_unsafe = false;
    let mut is_extern_c = false;
    for t in &tokens[..fn_idx] {
        if t.is("unsafe") {
            is_unsafe = true;
        }
        if t.is("extern") {
            is_extern_c = true;
        }
    }
    let name_tok = tokens
        .get(fn_idx + 1)
        .filter(|t| t.kind == TokenKind::Ident)
        .ok_or_else(|| SigError::BadFunction("missing function name".into()))?;
    let open = fn_idx + 2;
    if !tokens.get(open).map(|t| t.is("(")).unwrap_or(false) {
        return Err(SigError::BadFunction(format!(
            "expected `(` after fn {}",
            name_tok.text
        )));
    }
    let close = match_delim(&tokens, open, "(", ")")
        .ok_or_else(|| SigError::BadFunction("unbalanced parameter list".into()))?;
    let params = split_params(&tokens[open + 1..close])?;
    // Return type: `-> T` up to `{`, `;` or `where`.
    let mut ret = None;
    let mut k = close + 1;
    if tokens.get(k).map(|t| t.is("->")).unwrap_or(false) {
        k += 1;
        let start = k;
        let mut depth = 0i32;
        while k < tokens.len() {
            let t = &tokens[k];
            if depth == 0 && (t.is("{") || t.is(";") || t.is("where")) {
                break;
            }
            match t.text {
                "(" | "[" | "<" => depth += 1,
                ")" | "]" | ">" => depth -= 1,
                _ => {}
            }
            k += 1;
        }
        let text = render_tokens(&tokens[start..k]);
        if !text.is_empty() && text != "()" {
            ret = Some(text);
        }
    }
    Ok(FnSig { name: name_tok.text.to_string(), params, ret, is_unsafe, is_extern_c })
}

fn split_params(tokens: &[Token<'_>]) -> Result<Vec<Param>, SigError> {
    let mut params = Vec::new();
    let mut depth = 0i32;
    let mut group_start = 0;
    let mut groups = Vec::new();
    for (i, t) in tokens.iter().enumerate() {
        match t.text {
            "(" | "[" | "<" => depth += 1,
            ")" | "]" | ">" => depth -= 1,
            "," if depth == 0 => {
                groups.push(&tokens[group_start..i]);
                group_start = i + 1;
            }
            _ => {}
        }
    }
    if group_start < tokens.len() {
        groups.push(&tokens[group_start..]);
    }
    for g in groups {
        if g.is_empty() {
            continue;
        }
        let colon = g
            .iter()
            .position(|t| t.is(":"))
            .ok_or_else(|| SigError::BadFunction("parameter without type".into()))?;
        let mut name_idx = colon;
        while name_idx > 0 && g[name_idx - 1].is("mut") {
            name_idx -= 1;
        }
        if name_idx == 0 {
            return Err(SigError::BadFunction("parameter without name".into()));
        }
        let name = g[name_idx - 1].text.to_string();
        params.push(Param { name, ty: render_tokens(&g[colon + 1..]) });
    }
    Ok(params)
}

fn match_delim(tokens: &[Token<'_>], open_idx: usize, open: &str, close: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, t) in tokens.iter().enumerate().skip(open_idx) {
        if t.is(open) {
            depth += 1;
        } else if t.is(close) {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Joins tokens with spaces except around tight punctuation, producing
/// readable type text like `*const libc::c_char` or `Option<&str>`.
pub fn render_tokens(tokens: &[Token<'_>]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let tight_before = matches!(t.text, "::" | "<" | ">" | "," | "(" | ")" | "]" | ";" | "'")
            || (t.is("[")
                && i > 0
                && (tokens[i - 1].kind == TokenKind::Ident || matches!(tokens[i - 1].text, "]" | ")")));
        let prev_tight =
            i > 0 && matches!(tokens[i - 1].text, "::" | "<" | "(" | "[" | "&" | "*" | "'");
        if !out.is_empty() && !tight_before && !prev_tight {
            out.push(' ');
        }
        out.push_str(t.text);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructLayout {
    pub name: String,
    pub fields: Vec<Param>,
    pub repr_c: bool,
}

/// Parses the first struct definition found in `src`.
pub fn parse_struct(src: &str) -> Result<StructLayout, SigError> {
    let tokens = lex(src).map_err(|e| SigError::BadStruct(e.to_string()))?;
    let kw = tokens
        .iter()
        .position(|t| t.is("struct"))
        .ok_or_else(|| SigError::BadStruct("no `struct` keyword".into()))?;
    let repr_c = src[..tokens[kw].start].contains("repr(C)");
    let name = tokens
        .get(kw + 1)
        .filter(|t| t.kind == TokenKind::Ident)
        .ok_or_else(|| SigError::BadStruct("missing struct name".into()))?
        .text
        .to_string();
    let open = tokens[kw + 1..]
        .iter()
        .position(|t| t.is("{"))
        .map(|o| o + kw + 1)
        .ok_or_else(|| SigError::BadStruct(format!("struct {name} has no field block")))?;
    let close = match_delim(&tokens, open, "{", "}")
        .ok_or_else(|| SigError::BadStruct("unbalanced struct body".into()))?;
    let body = &tokens[open + 1..close];
    // Fields are `vis? name: Type,` at depth 0.
    let mut fields = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut groups = Vec::new();
    for (i, t) in body.iter().enumerate() {
        match t.text {
            "(" | "[" | "<" | "{" => depth += 1,
            ")" | "]" | ">" | "}" => depth -= 1,
            "," if depth == 0 => {
                groups.push(&body[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < body.len() {
        groups.push(&body[start..]);
    }
    for g in groups {
        if g.is_empty() {
            continue;
        }
        let colon = g
            .iter()
            .position(|t| t.is(":"))
            .ok_or_else(|| SigError::BadStruct("field without type".into()))?;
        if colon == 0 {
            return Err(SigError::BadStruct("field without name".into()));
        }
        fields.push(Param {
            name: g[colon - 1].text.to_string(),
            ty: render_tokens(&g[colon + 1..]),
        });
    }
    Ok(StructLayout { name, fields, repr_c })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_extern_c_signature() {
        let sig = parse_fn_sig("pub unsafe extern \"C\" fn sum(xs: *const i32, n: usize) -> i32;").unwrap();
        assert_eq!(sig.name, "sum");
        assert!(sig.is_unsafe && sig.is_extern_c);
        assert_eq!(sig.params[0], Param { name: "xs".into(), ty: "*const i32".into() });
        assert_eq!(sig.params[1], Param { name: "n".into(), ty: "usize".into() });
        assert_eq!(sig.ret.as_deref(), Some("i32"));
    }

    #[test]
    fn parses_idiomatic_signature_with_generics() {
        let sig = parse_fn_sig("pub fn set_name(name: Option<&str>) {}").unwrap();
        assert_eq!(sig.params[0].ty, "Option<&str>");
        assert_eq!(sig.ret, None);
    }

    #[test]
    fn unit_return_is_none() {
        let sig = parse_fn_sig("fn f() -> () {}").unwrap();
        assert_eq!(sig.ret, None);
    }

    #[test]
    fn parses_repr_c_struct() {
        let s = parse_struct(
            "#[repr(C)]\npub struct CPoint {\n    pub x: i32,\n    pub y: i32,\n}",
        )
        .unwrap();
        assert_eq!(s.name, "CPoint");
        assert!(s.repr_c);
        assert_eq!(s.fields.len(), 2);
        assert_eq!(s.fields[1], Param { name: "y".into(), ty: "i32".into() });
    }

    #[test]
    fn qualified_pointer_types_render_cleanly() {
        let sig = parse_fn_sig("pub unsafe extern \"C\" fn set_name(name: *const libc::c_char);").unwrap();
        assert_eq!(sig.params[0].ty, "*const libc::c_char");
    }
}
