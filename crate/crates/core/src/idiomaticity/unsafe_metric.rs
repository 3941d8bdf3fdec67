//! Unsafe-code fraction: the ratio of lexical tokens inside `unsafe { .. }`
//! blocks or inside functions declared `unsafe` to all tokens of a program.
//! Comments never count on either side. The `unsafe` keyword and the region's
//! braces count as inside the region; nested regions are counted once.

use crate::rustsrc::lexer::{lex, LexError, Token, TokenKind};

/// Returns `(unsafe_tokens, total_tokens)`.
pub fn unsafe_token_counts(src: &str) -> Result<(usize, usize), LexError> {
    let tokens = lex(src)?;
    let total = tokens.len();
    if total == 0 {
        return Ok((0, 0));
    }
    let mut inside = vec![false; total];
    let mut i = 0;
    while i < tokens.len() {
        if tokens[i].kind == TokenKind::Ident && tokens[i].is("unsafe") {
            if let Some(end) = unsafe_region_end(&tokens, i) {
                for flag in inside.iter_mut().take(end + 1).skip(i) {
                    *flag = true;
                }
            }
        }
        i += 1;
    }
    Ok((inside.iter().filter(|f| **f).count(), total))
}

/// Fraction in [0, 1]; 0.0 for an empty program.
pub fn unsafe_fraction(src: &str) -> Result<f64, LexError> {
    let (unsafe_count, total) = unsafe_token_counts(src)?;
    if total == 0 {
        Ok(0.0)
    } else {
        Ok(unsafe_count as f64 / total as f64)
    }
}

/// Final token index (inclusive) of the region opened by the `unsafe`
/// keyword at `kw`, or None when the keyword heads neither a block nor a
/// function (e.g. `unsafe impl`).
fn unsafe_region_end(tokens: &[Token<'_>], kw: usize) -> Option<usize> {
    let next = tokens.get(kw + 1)?;
    if next.is("{") {
        return Some(match_brace(tokens, kw + 1));
    }
    // `unsafe fn`, `unsafe extern "C" fn`: the region spans the whole
    // declaration through the body brace (or the `;` of a bodyless decl).
    let mut j = kw + 1;
    while j < tokens.len() && (tokens[j].is("extern") || tokens[j].kind == TokenKind::Str) {
        j += 1;
    }
    if !tokens.get(j)?.is("fn") {
        return None;
    }
    let mut depth = 0usize;
    let mut k = j + 1;
    while k < tokens.len() {
        let t = &tokens[k];
        match t.text {
            "(" | "[" => depth += 1,
            ")" | "]" => depth = depth.saturating_sub(1),
            "{" if depth == 0 => return Some(match_brace(tokens, k)),
            ";" if depth == 0 => return Some(k),
            _ => {}
        }
        k += 1;
    }
    Some(tokens.len() - 1)
}

fn match_brace(tokens: &[Token<'_>], open_idx: usize) -> usize {
    let mut depth = 0usize;
    let mut i = open_idx;
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

#[cfg(test)]
mod tests {
    use super::*;

    // Exactly 20 tokens:
    // fn main ( ) { let p = & mut 7 ; unsafe { * p = 9 } }
    // Unsafe region `unsafe { * p = 9 }` is 7 tokens, so 7/20.
    const HAND_COUNTED: &str = "fn main() {\n    let p = &mut 7;\n    unsafe { *p = 9 }\n}\n";

    #[test]
    fn hand_counted_fixture_matches() {
        let (u, t) = unsafe_token_counts(HAND_COUNTED).unwrap();
        assert_eq!((u, t), (7, 20));
        assert_eq!(unsafe_fraction(HAND_COUNTED).unwrap(), 0.35);
    }

    #[test]
    fn no_unsafe_is_zero() {
        assert_eq!(unsafe_fraction("fn main() { println!(\"hi\"); }").unwrap(), 0.0);
        assert_eq!(unsafe_fraction("").unwrap(), 0.0);
    }

    #[test]
    fn single_unsafe_fn_dominates() {
        // unsafe fn bump ( p : * mut i32 ) { * p += 1 ; } -> 17 tokens, all inside.
        let src = "unsafe fn bump(p: *mut i32) {\n    *p += 1;\n}\n";
        let (u, t) = unsafe_token_counts(src).unwrap();
        assert_eq!((u, t), (17, 17));
        assert!(unsafe_fraction(src).unwrap() >= 0.9);
    }

    #[test]
    fn nested_unsafe_not_double_counted() {
        let src = "unsafe fn f() { unsafe { g() } }";
        let (u, t) = unsafe_token_counts(src).unwrap();
        assert_eq!(u, t);
        assert_eq!(unsafe_fraction(src).unwrap(), 1.0);
    }

    #[test]
    fn unsafe_extern_c_fn_counts() {
        let src = "pub unsafe extern \"C\" fn id(x: i32) -> i32 { x }\nfn safe() {}";
        let (u, t) = unsafe_token_counts(src).unwrap();
        // Region runs from `unsafe` through the closing brace; `pub` and the
        // trailing safe fn stay outside.
        assert_eq!(t, 22);
        assert_eq!(u, 15);
    }

    #[test]
    fn unsafe_impl_is_not_a_region() {
        let src = "unsafe impl Send for W {}\nfn f() { let x = 1; }";
        let (u, _) = unsafe_token_counts(src).unwrap();
        assert_eq!(u, 0);
    }

    #[test]
    fn comments_excluded_everywhere() {
        let with = "fn f() { /* unsafe { } */ let x = 1; // unsafe\n }";
        let without = "fn f() { let x = 1; }";
        assert_eq!(
            unsafe_token_counts(with).unwrap(),
            unsafe_token_counts(without).unwrap()
        );
    }
}
