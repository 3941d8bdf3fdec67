//! Lexer-level analysis of Rust source text: tokenization, top-level item
//! splitting, and signature/struct parsing. Everything operates on strings;
//! no syn/AST dependency so generated code can be rewritten byte-precisely.

pub mod items;
pub mod lexer;
pub mod sig;

pub use items::{split_items, Item, ItemKind};
pub use lexer::{lex, LexError, Token, TokenKind};
pub use sig::{parse_fn_sig, parse_struct, FnSig, Param, SigError, StructLayout};

/// Renames every word-boundary occurrence of identifier `from` to `to`.
/// Operates on lexed tokens so strings and comments are never touched.
pub fn rename_ident(src: &str, from: &str, to: &str) -> Result<String, LexError> {
    let tokens = lex(src)?;
    let mut out = String::with_capacity(src.len());
    let mut last = 0;
    for t in &tokens {
        if t.kind == TokenKind::Ident && t.text == from {
            out.push_str(&src[last..t.start]);
            out.push_str(to);
            last = t.end;
        }
    }
    out.push_str(&src[last..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rename_respects_word_boundaries_and_strings() {
        let src = "fn atoi(s: &str) -> i32 { atoi_helper(s); atoi(s) } // atoi\nconst M: &str = \"atoi\";";
        let out = rename_ident(src, "atoi", "atoi_idiomatic").unwrap();
        assert!(out.contains("fn atoi_idiomatic"));
        assert!(out.contains("atoi_idiomatic(s) }"));
        assert!(out.contains("atoi_helper"));
        assert!(out.contains("// atoi\n"));
        assert!(out.contains("\"atoi\""));
    }
}
