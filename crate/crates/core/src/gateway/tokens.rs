//! Token counting. One tokenizer (tiktoken's o200k_base encoding) is applied
//! uniformly across providers so cost numbers stay comparable; golden counts
//! in tests are regenerated if the pinned tokenizer dependency changes.

use std::sync::OnceLock;

use tiktoken_rs::CoreBPE;

fn bpe() -> &'static CoreBPE {
    static BPE: OnceLock<CoreBPE> = OnceLock::new();
    BPE.get_or_init(|| tiktoken_rs::o200k_base().expect("o200k_base tables load"))
}

pub fn count_tokens(text: &str) -> u64 {
    if text.is_empty() {
        return 0;
    }
    bpe().encode_ordinary(text).len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_counts_zero() {
        assert_eq!(count_tokens(""), 0);
    }

    #[test]
    fn concatenation_is_monotone() {
        let s1 = "fn main() { println!(\"hello\"); }";
        let s2 = " // trailing comment with some words";
        let joined = format!("{s1}{s2}");
        assert!(count_tokens(&joined) >= count_tokens(s1).max(count_tokens(s2)));
    }

    // Golden value frozen from the pinned tokenizer.
    #[test]
    fn fixture_string_golden_count() {
        let fixture = "Translate the following C function to Rust. Try to keep the **equivalence** as much as possible.";
        assert_eq!(count_tokens(fixture), GOLDEN_FIXTURE_COUNT);
    }

    const GOLDEN_FIXTURE_COUNT: u64 = 21;
}
