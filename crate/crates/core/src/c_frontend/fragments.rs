//! Splits a preprocessed translation unit into fragments: one per top-level
//! type, global variable, or function definition. Dependencies are resolved
//! lexically against the symbols the other fragments define.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::proc::{run_cmd, EnvPolicy};

use super::clex::{is_c_keyword, scan, CToken, CTokenKind};
use super::preprocess::CompileContext;
use super::FrontendError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FragmentKind {
    TypeDef,
    GlobalVar,
    Function,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodeFragment {
    pub kind: FragmentKind,
    pub name: String,
    /// Verbatim C text including adjacent comments.
    pub source_text: String,
    /// Canonical C declaration (functions only), e.g. `int atoi(const char *str)`.
    pub declared_signature: String,
    /// Names of fragments this one directly uses.
    pub deps: BTreeSet<String>,
    /// Standard streams referenced (stdin/stdout/stderr).
    pub uses_stdio: BTreeSet<String>,
    /// Library symbols referenced in call position; context for prompts,
    /// never graph edges.
    pub externals: BTreeSet<String>,
    /// Byte span in the preprocessed translation unit (including the
    /// attached comments), used for definition excision at relink time.
    pub span: (usize, usize),
    /// Set when the construct is recognized but not supported; the fragment
    /// is flagged, not dropped.
    pub unsupported: Option<String>,
    /// All symbols this fragment defines (its name, enumerators, typedef
    /// aliases); used for dependency resolution.
    pub defined_symbols: BTreeSet<String>,
}

/// Validates the source with the host compiler front end, then scans it
/// into fragments.
pub fn extract_fragments(
    preprocessed: &str,
    ctx: &CompileContext,
) -> Result<Vec<CodeFragment>, FrontendError> {
    validate_with_host(preprocessed, ctx)?;
    extract_fragments_unchecked(preprocessed)
}

/// Syntax-checks via `gcc -fsyntax-only`, attaching its diagnostics on failure.
pub fn validate_with_host(preprocessed: &str, ctx: &CompileContext) -> Result<(), FrontendError> {
    let scratch = std::env::temp_dir().join(format!(
        "oxidize-parse-{}-{}.c",
        std::process::id(),
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or_default()
    ));
    std::fs::write(&scratch, preprocessed).map_err(|e| FrontendError::Io {
        context: format!("scratch file {}", scratch.display()),
        source: e,
    })?;
    let mut args: Vec<String> = vec!["-fsyntax-only".into()];
    args.extend(ctx.extra_flags.iter().cloned());
    args.push(scratch.display().to_string());
    let argv: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
    let out = run_cmd("gcc", &argv, None, None, Some(Duration::from_secs(60)), EnvPolicy::Build, &[])
        .map_err(|e| FrontendError::ToolMissing {
            tool: "gcc".into(),
            hint: format!("install gcc to parse and relink C sources: {e}"),
        })?;
    let _ = std::fs::remove_file(&scratch);
    if !out.success() {
        return Err(FrontendError::ParseError { diagnostics: out.stderr_text() });
    }
    Ok(())
}

/// Scanner without the host syntax check; used by tests and by callers that
/// already validated the text.
pub fn extract_fragments_unchecked(src: &str) -> Result<Vec<CodeFragment>, FrontendError> {
    let scanned = scan(src);
    let tokens: Vec<CToken<'_>> = scanned
        .tokens
        .into_iter()
        .filter(|t| t.kind != CTokenKind::Directive)
        .collect();
    let mut fragments = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let item = parse_item(src, &tokens, i)?;
        i = item.next_index;
        if let Some(mut frag) = item.fragment {
            frag.span.0 = extend_span_over_comments(src, &scanned.comments, frag.span.0);
            frag.source_text = src[frag.span.0..frag.span.1].to_string();
            fragments.push(frag);
        }
    }
    let mut seen = BTreeSet::new();
    for f in &fragments {
        if !seen.insert(f.name.clone()) {
            return Err(FrontendError::DuplicateName { name: f.name.clone() });
        }
    }
    resolve_dependencies(src, &mut fragments);
    Ok(fragments)
}

struct ParsedItem {
    fragment: Option<CodeFragment>,
    next_index: usize,
}

fn parse_item(src: &str, tokens: &[CToken<'_>], start: usize) -> Result<ParsedItem, FrontendError> {
    // Scan the item's extent. The terminator is `;` at depth 0, or for a
    // function definition (top-level paren group, no `=`) the matching `}`
    // of its body. Type bodies and brace initializers run on to the `;`.
    let mut depth_paren = 0i32;
    let mut saw_eq = false;
    let mut saw_toplevel_paren = false;
    let mut first_brace: Option<usize> = None;
    let mut i = start;
    let mut end = None;
    while i < tokens.len() {
        let t = &tokens[i];
        match t.text {
            "(" | "[" => {
                if t.is("(") && depth_paren == 0 && first_brace.is_none() && !saw_eq {
                    saw_toplevel_paren = true;
                }
                depth_paren += 1;
            }
            ")" | "]" => depth_paren -= 1,
            "=" if depth_paren == 0 && first_brace.is_none() => saw_eq = true,
            "{" if depth_paren == 0 => {
                if first_brace.is_none() {
                    first_brace = Some(i);
                }
                let close = match_brace(tokens, i);
                if !saw_eq && saw_toplevel_paren {
                    // Function body ends the item.
                    end = Some(close);
                    break;
                }
                // Initializer or struct/union/enum body: continue to `;`.
                i = close;
            }
            ";" if depth_paren == 0 => {
                end = Some(i);
                break;
            }
            _ => {}
        }
        i += 1;
    }
    let Some(end) = end else {
        return Ok(ParsedItem { fragment: None, next_index: tokens.len() });
    };
    let span = (tokens[start].start, tokens[end].end);
    let next_index = end + 1;
    let header_end = first_brace.unwrap_or(end);
    let header = &tokens[start..header_end];
    if header.is_empty() {
        return Ok(ParsedItem { fragment: None, next_index });
    }

    let has_typedef = header.iter().any(|t| t.is("typedef"));
    let is_extern_decl = header.first().map(|t| t.is("extern")).unwrap_or(false) && !saw_eq;
    let type_def_head = head_is_type_keyword(header);

    let fragment = if has_typedef {
        Some(make_type_fragment(src, tokens, start, end, span, first_brace)?)
    } else if saw_toplevel_paren && !saw_eq && first_brace.is_some() {
        Some(make_function_fragment(src, tokens, start, first_brace.unwrap(), end, span)?)
    } else if type_def_head && first_brace.is_some() && !saw_eq {
        Some(make_type_fragment(src, tokens, start, end, span, first_brace)?)
    } else {
        make_global_or_skip(src, tokens, start, end, span, saw_eq, is_extern_decl, first_brace)
    };
    Ok(ParsedItem { fragment, next_index })
}

/// True when the declaration head (past storage qualifiers) opens with
/// struct/union/enum, i.e. `struct S { ... };` style definitions.
fn head_is_type_keyword(header: &[CToken<'_>]) -> bool {
    for t in header {
        match t.text {
            "static" | "const" | "extern" => continue,
            "struct" | "union" | "enum" => return true,
            _ => return false,
        }
    }
    false
}

fn make_type_fragment(
    src: &str,
    tokens: &[CToken<'_>],
    start: usize,
    end: usize,
    span: (usize, usize),
    first_brace: Option<usize>,
) -> Result<CodeFragment, FrontendError> {
    let mut defined = BTreeSet::new();
    let mut name = String::new();
    // Tag name: ident right after struct/union/enum.
    if let Some(kw) = tokens[start..end].iter().position(|t| matches!(t.text, "struct" | "union" | "enum")) {
        if let Some(tag) = tokens.get(start + kw + 1).filter(|t| t.kind == CTokenKind::Ident) {
            name = tag.text.to_string();
            defined.insert(name.clone());
        }
        // Enumerators are usable wherever the enum is.
        if tokens[start + kw].is("enum") {
            if let Some(open) = first_brace {
                let close = match_brace(tokens, open);
                let mut expect_name = true;
                for t in &tokens[open + 1..close] {
                    match t.text {
                        "," => expect_name = true,
                        "=" => expect_name = false,
                        _ => {
                            if expect_name && t.kind == CTokenKind::Ident {
                                defined.insert(t.text.to_string());
                                expect_name = false;
                            }
                        }
                    }
                }
            }
        }
    }
    // Typedef alias / trailing declarator: last ident before `;`, or for
    // function-pointer typedefs the ident inside the first paren group.
    let has_typedef = tokens[start..end].iter().any(|t| t.is("typedef"));
    if has_typedef {
        let tail_start = first_brace.map(|b| match_brace(tokens, b)).unwrap_or(start);
        if let Some(alias) = typedef_alias_name(&tokens[tail_start..end]) {
            defined.insert(alias.clone());
            if name.is_empty() {
                name = alias;
            } else {
                name = alias; // The alias is how other fragments refer to it.
            }
        }
    }
    let mut unsupported = None;
    if !has_typedef {
        if let Some(open) = first_brace {
            let close = match_brace(tokens, open);
            if tokens[close + 1..=end].iter().any(|t| t.kind == CTokenKind::Ident) {
                unsupported =
                    Some("type definition with trailing variable declarator".into());
            }
        }
    }
    if name.is_empty() {
        name = format!("__anon_type_{}", span.0);
        unsupported = Some("anonymous type definition without a tag or alias".into());
    }
    let _ = src;
    Ok(CodeFragment {
        kind: FragmentKind::TypeDef,
        name,
        source_text: String::new(),
        declared_signature: String::new(),
        deps: BTreeSet::new(),
        uses_stdio: BTreeSet::new(),
        externals: BTreeSet::new(),
        span,
        unsupported,
        defined_symbols: defined,
    })
}

fn typedef_alias_name(tail: &[CToken<'_>]) -> Option<String> {
    // Function-pointer alias: `(*name)` group.
    for (i, t) in tail.iter().enumerate() {
        if t.is("(") && tail.get(i + 1).map(|t| t.is("*")).unwrap_or(false) {
            if let Some(name) = tail.get(i + 2).filter(|t| t.kind == CTokenKind::Ident) {
                return Some(name.text.to_string());
            }
        }
    }
    // Plain alias: last ident before `;` (skipping array brackets).
    tail.iter()
        .rev()
        .find(|t| t.kind == CTokenKind::Ident && !is_c_keyword(t.text))
        .map(|t| t.text.to_string())
}

fn make_function_fragment(
    src: &str,
    tokens: &[CToken<'_>],
    start: usize,
    brace: usize,
    end: usize,
    span: (usize, usize),
) -> Result<CodeFragment, FrontendError> {
    // Name: identifier right before the parameter list's `(`. The parameter
    // list is the last top-level paren group before the body.
    let mut open_paren = None;
    let mut depth = 0i32;
    for (i, t) in tokens[start..brace].iter().enumerate() {
        match t.text {
            "(" => {
                if depth == 0 {
                    open_paren = Some(start + i);
                }
                depth += 1;
            }
            ")" => depth -= 1,
            _ => {}
        }
    }
    let open_paren = open_paren.ok_or_else(|| FrontendError::UnsupportedConstruct {
        name: "<unknown>".into(),
        reason: "brace body without a parameter list".into(),
    })?;
    let name_tok = tokens[start..open_paren]
        .iter()
        .rev()
        .find(|t| t.kind == CTokenKind::Ident)
        .ok_or_else(|| FrontendError::UnsupportedConstruct {
            name: "<unknown>".into(),
            reason: "cannot locate function name".into(),
        })?;
    let name = name_tok.text.to_string();
    // Canonical declaration: header text minus storage qualifiers.
    let close_paren = match_paren(tokens, open_paren);
    let sig_tokens: Vec<&str> = tokens[start..=close_paren]
        .iter()
        .map(|t| t.text)
        .filter(|t| *t != "static" && *t != "inline" && *t != "extern")
        .collect();
    let declared_signature = join_c_tokens(&sig_tokens);
    let body = &src[tokens[brace].start..tokens[end].end];
    let unsupported = if body.contains("__asm__") || body.contains("asm volatile") || body.contains(" asm ") {
        Some("inline assembly".into())
    } else {
        None
    };
    Ok(CodeFragment {
        kind: FragmentKind::Function,
        name: name.clone(),
        source_text: String::new(),
        declared_signature,
        deps: BTreeSet::new(),
        uses_stdio: BTreeSet::new(),
        externals: BTreeSet::new(),
        span,
        unsupported,
        defined_symbols: BTreeSet::from([name]),
    })
}

#[allow(clippy::too_many_arguments)]
fn make_global_or_skip(
    src: &str,
    tokens: &[CToken<'_>],
    start: usize,
    end: usize,
    span: (usize, usize),
    saw_eq: bool,
    is_extern_decl: bool,
    first_brace: Option<usize>,
) -> Option<CodeFragment> {
    let _ = src;
    if is_extern_decl {
        return None; // declaration, not a definition
    }
    // Forward declarations: a paren group and no initializer.
    let header_end = first_brace.unwrap_or(end);
    let has_parens = tokens[start..header_end].iter().any(|t| t.is("("));
    if has_parens && !saw_eq {
        return None;
    }
    // Declarator name: ident before `=`, `[`, or `;`.
    let stop = tokens[start..end]
        .iter()
        .position(|t| t.is("=") || t.is("["))
        .map(|p| start + p)
        .unwrap_or(end);
    let name = tokens[start..stop]
        .iter()
        .rev()
        .find(|t| t.kind == CTokenKind::Ident && !is_c_keyword(t.text))?
        .text
        .to_string();
    // Multiple declarators in one statement are flagged, not split.
    let mut depth = 0i32;
    let mut unsupported = None;
    for t in &tokens[start..end] {
        match t.text {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => depth -= 1,
            "," if depth == 0 => {
                unsupported = Some("multiple declarators in one global definition".into());
            }
            _ => {}
        }
    }
    Some(CodeFragment {
        kind: FragmentKind::GlobalVar,
        name: name.clone(),
        source_text: String::new(),
        declared_signature: String::new(),
        deps: BTreeSet::new(),
        uses_stdio: BTreeSet::new(),
        externals: BTreeSet::new(),
        span,
        unsupported,
        defined_symbols: BTreeSet::from([name]),
    })
}

fn match_brace(tokens: &[CToken<'_>], open: usize) -> usize {
    let mut depth = 0usize;
    let mut i = open;
    while i < tokens.len() {
        if tokens[i].is("{") {
            depth += 1;
        } else if tokens[i].is("}") {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
        i += 1;
    }
    tokens.len() - 1
}

fn match_paren(tokens: &[CToken<'_>], open: usize) -> usize {
    let mut depth = 0usize;
    let mut i = open;
    while i < tokens.len() {
        if tokens[i].is("(") {
            depth += 1;
        } else if tokens[i].is(")") {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
        i += 1;
    }
    tokens.len() - 1
}

/// Canonical single-line rendering: `int atoi(const char *str)`.
fn join_c_tokens(tokens: &[&str]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let prev = if i > 0 { tokens[i - 1] } else { "" };
        let tight_before = matches!(*t, "(" | ")" | "[" | "]" | "," | ";");
        let tight_after_prev = matches!(prev, "(" | "[" | "*");
        if !out.is_empty() && !tight_before && !tight_after_prev {
            out.push(' ');
        }
        out.push_str(t);
        if *t == "," {
            out.push(' ');
        }
    }
    out.replace(",  ", ", ")
}

/// Pulls the span start back over comment blocks that sit directly above
/// the definition (no blank line in between).
fn extend_span_over_comments(src: &str, comments: &[(usize, usize)], start: usize) -> usize {
    let mut cur = start;
    loop {
        let gap_start = comments
            .iter()
            .rev()
            .find(|(_, e)| *e <= cur && src[*e..cur].chars().all(|c| c.is_whitespace()))
            .filter(|(_, e)| src[*e..cur].matches('\n').count() <= 1);
        match gap_start {
            Some((s, _)) => {
                // Only attach comments that start at the beginning of a line.
                let line_start = src[..*s].rfind('\n').map(|p| p + 1).unwrap_or(0);
                if src[line_start..*s].chars().all(|c| c.is_whitespace()) {
                    cur = *s;
                } else {
                    break;
                }
            }
            None => break,
        }
    }
    cur
}

const STDIO_STREAMS: &[&str] = &["stdin", "stdout", "stderr"];

fn resolve_dependencies(src: &str, fragments: &mut [CodeFragment]) {
    let mut symbol_owner: BTreeMap<String, String> = BTreeMap::new();
    for f in fragments.iter() {
        for sym in &f.defined_symbols {
            symbol_owner.insert(sym.clone(), f.name.clone());
        }
    }
    for f in fragments.iter_mut() {
        let scanned = scan(&src[f.span.0..f.span.1]);
        let toks = &scanned.tokens;
        for (i, t) in toks.iter().enumerate() {
            if t.kind != CTokenKind::Ident || is_c_keyword(t.text) {
                continue;
            }
            // Skip member accesses: `x.field`, `p->field`.
            if i > 0 && (toks[i - 1].is(".") || toks[i - 1].is("->")) {
                continue;
            }
            if STDIO_STREAMS.contains(&t.text) {
                f.uses_stdio.insert(t.text.to_string());
                continue;
            }
            if let Some(owner) = symbol_owner.get(t.text) {
                let self_ref = *owner == f.name;
                if !self_ref {
                    f.deps.insert(owner.clone());
                } else if f.kind == FragmentKind::Function && i > 0 {
                    // A function mentioning its own name past the definition
                    // header is self-recursive.
                    let call_position = toks.get(i + 1).map(|n| n.is("(")).unwrap_or(false);
                    let in_body = src[f.span.0..f.span.0 + t.start].contains('{');
                    if call_position && in_body {
                        f.deps.insert(owner.clone());
                    }
                }
            } else if toks.get(i + 1).map(|n| n.is("(")).unwrap_or(false) {
                f.externals.insert(t.text.to_string());
            }
        }
    }
}
