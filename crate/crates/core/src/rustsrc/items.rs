//! Splits Rust source into top-level items for deduplication, renaming
//! and recombination of generated code.

use super::lexer::{lex, LexError, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemKind {
    Use,
    ExternBlock,
    Fn,
    Struct,
    Enum,
    Union,
    TypeAlias,
    Static,
    Const,
    Impl,
    Mod,
    Trait,
    Macro,
    Other,
}

#[derive(Debug, Clone)]
pub struct Item {
    pub kind: ItemKind,
    /// Item name where meaningful (fn/struct/static/...); empty otherwise.
    pub name: String,
    pub start: usize,
    pub end: usize,
    /// Whitespace-normalized token text, used as a dedup/equality key.
    pub normalized: String,
}

impl Item {
    pub fn text<'a>(&self, src: &'a str) -> &'a str {
        &src[self.start..self.end]
    }
}

/// Splits source into top-level items. Attributes and doc comments that
/// precede an item belong to it.
pub fn split_items(src: &str) -> Result<Vec<Item>, LexError> {
    let tokens = lex(src)?;
    let mut items = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let item_start_tok = i;
        // Attributes: `#[...]` or `#![...]` bind to the following item.
        while i < tokens.len() && tokens[i].is("#") {
            let mut j = i + 1;
            if j < tokens.len() && tokens[j].is("!") {
                j += 1;
            }
            if j < tokens.len() && tokens[j].is("[") {
                i = match_close(&tokens, j, "[", "]") + 1;
            } else {
                break;
            }
        }
        if i >= tokens.len() {
            break;
        }
        // Skip visibility and qualifiers to find the defining keyword.
        let mut j = i;
        while j < tokens.len() {
            let t = tokens[j].text;
            match t {
                "pub" => {
                    j += 1;
                    if j < tokens.len() && tokens[j].is("(") {
                        j = match_close(&tokens, j, "(", ")") + 1;
                    }
                }
                "unsafe" | "async" | "default" => j += 1,
                "extern" => {
                    // `extern "C" fn` qualifier vs `extern "C" { }` block.
                    let mut k = j + 1;
                    if k < tokens.len() && tokens[k].kind == TokenKind::Str {
                        k += 1;
                    }
                    if k < tokens.len() && tokens[k].is("{") {
                        let end = match_close(&tokens, k, "{", "}");
                        items.push(make_item(
                            &tokens,
                            item_start_tok,
                            end,
                            ItemKind::ExternBlock,
                            String::new(),
                        ));
                        i = end + 1;
                        j = usize::MAX;
                        break;
                    }
                    j = k;
                }
                _ => break,
            }
        }
        if j == usize::MAX {
            continue;
        }
        if j >= tokens.len() {
            break;
        }
        let kw = tokens[j].text;
        let (kind, named) = match kw {
            "use" => (ItemKind::Use, false),
            "fn" => (ItemKind::Fn, true),
            "struct" => (ItemKind::Struct, true),
            "enum" => (ItemKind::Enum, true),
            "union" => (ItemKind::Union, true),
            "type" => (ItemKind::TypeAlias, true),
            "static" => (ItemKind::Static, true),
            "const" => (ItemKind::Const, true),
            "impl" => (ItemKind::Impl, false),
            "mod" => (ItemKind::Mod, true),
            "trait" => (ItemKind::Trait, true),
            "macro_rules" => (ItemKind::Macro, true),
            _ => (ItemKind::Other, false),
        };
        let mut name = String::new();
        if named {
            let mut k = j + 1;
            if kind == ItemKind::Static && k < tokens.len() && tokens[k].is("mut") {
                k += 1;
            }
            if kind == ItemKind::Macro && k < tokens.len() && tokens[k].is("!") {
                k += 1;
            }
            if k < tokens.len() && tokens[k].kind == TokenKind::Ident {
                name = tokens[k].text.to_string();
            }
        }
        // An item ends at the first `;` or the matching `}` of its first
        // top-level brace (structs with bodies, fns, impls, mods, ...).
        let mut k = j;
        let end_tok = loop {
            if k >= tokens.len() {
                break tokens.len() - 1;
            }
            let t = &tokens[k];
            if t.is(";") {
                break k;
            }
            if t.is("{") {
                let close = match_close(&tokens, k, "{", "}");
                // `struct S { .. }` ends at `}`; so do fn bodies and blocks.
                break close;
            }
            if t.is("(") || t.is("[") {
                k = match_close(&tokens, k, t.text, matching(t.text)) + 1;
                continue;
            }
            if t.is("=") && kind != ItemKind::TypeAlias && kind != ItemKind::Static && kind != ItemKind::Const && kind != ItemKind::Use {
                // `= expr;` tail, scan to `;` below.
            }
            k += 1;
        };
        items.push(make_item(&tokens, item_start_tok, end_tok, kind, name));
        i = end_tok + 1;
    }
    Ok(items)
}

fn matching(open: &str) -> &'static str {
    match open {
        "(" => ")",
        "[" => "]",
        "{" => "}",
        _ => unreachable!(),
    }
}

/// Index of the token closing the delimiter opened at `open_idx`.
fn match_close(tokens: &[Token<'_>], open_idx: usize, open: &str, close: &str) -> usize {
    let mut depth = 0usize;
    let mut i = open_idx;
    while i < tokens.len() {
        if tokens[i].is(open) {
            depth += 1;
        } else if tokens[i].is(close) {
            depth -= 1;
            if depth == 0 {
                return i;
            }
        }
        i += 1;
    }
    tokens.len() - 1
}

fn make_item(
    tokens: &[Token<'_>],
    start_tok: usize,
    end_tok: usize,
    kind: ItemKind,
    name: String,
) -> Item {
    let start = tokens[start_tok].start;
    let end = tokens[end_tok.min(tokens.len() - 1)].end;
    let normalized = tokens[start_tok..=end_tok.min(tokens.len() - 1)]
        .iter()
        .map(|t| t.text)
        .collect::<Vec<_>>()
        .join(" ");
    Item { kind, name, start, end, normalized }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SRC: &str = r#"
use std::io::Write;

extern "C" {
    static mut stdin: *mut libc::FILE;
}

#[no_mangle]
pub unsafe extern "C" fn atoi(s: *const i8) -> i32 {
    let x = [1, 2, 3];
    x[0]
}

struct Point { x: i32, y: i32 }

static mut COUNTER: i32 = 0;
"#;

    #[test]
    fn splits_and_names_items() {
        let items = split_items(SRC).unwrap();
        let kinds: Vec<_> = items.iter().map(|i| (i.kind, i.name.as_str())).collect();
        assert_eq!(
            kinds,
            vec![
                (ItemKind::Use, ""),
                (ItemKind::ExternBlock, ""),
                (ItemKind::Fn, "atoi"),
                (ItemKind::Struct, "Point"),
                (ItemKind::Static, "COUNTER"),
            ]
        );
    }

    #[test]
    fn attributes_belong_to_items() {
        let items = split_items(SRC).unwrap();
        let f = &items[2];
        assert!(f.text(SRC).starts_with("#[no_mangle]"));
    }

    #[test]
    fn normalization_ignores_whitespace() {
        let a = split_items("fn f() { 1 + 2; }").unwrap();
        let b = split_items("fn f()   {\n    1 + 2;\n}").unwrap();
        assert_eq!(a[0].normalized, b[0].normalized);
    }

    #[test]
    fn tuple_struct_ends_at_semicolon() {
        let items = split_items("struct Wrap(i32);\nfn g() {}").unwrap();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].name, "Wrap");
        assert_eq!(items[1].name, "g");
    }
}
