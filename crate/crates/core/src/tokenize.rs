//! Word segmentation shared by indexing and querying.
//!
//! Text is split into UAX #29 words, each word is further split at the
//! punctuation that UAX #29 allows inside a word (`.` `'` `:` `,` `_` and
//! their typographic relatives), and every piece is lowercased. There is no
//! stemming and no stopword list; numeric tokens are kept.

use alloc::string::String;
use alloc::vec::Vec;

use unicode_segmentation::UnicodeSegmentation;

pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.unicode_words() {
        // a combining mark after a space forms a word with it (WB4)
        for piece in word.split(|c: char| is_inner_punctuation(c) || c.is_whitespace()) {
            if !piece.chars().any(char::is_alphanumeric) {
                continue;
            }
            let mut token = String::with_capacity(piece.len());
            for c in piece.chars() {
                token.extend(c.to_lowercase());
            }
            tokens.push(token);
        }
    }
    tokens
}

/// Characters with Word_Break = MidLetter, MidNum, MidNumLet, Single_Quote,
/// Double_Quote or ExtendNumLet that are not letters themselves.
fn is_inner_punctuation(c: char) -> bool {
    matches!(
        c,
        '.' | '\''
            | ':'
            | ','
            | ';'
            | '_'
            | '"'
            | '\u{00B7}'
            | '\u{0387}'
            | '\u{037E}'
            | '\u{055F}'
            | '\u{0589}'
            | '\u{05F4}'
            | '\u{060C}'
            | '\u{060D}'
            | '\u{066C}'
            | '\u{07F8}'
            | '\u{2018}'
            | '\u{2019}'
            | '\u{2024}'
            | '\u{2027}'
            | '\u{203F}'
            | '\u{2040}'
            | '\u{2044}'
            | '\u{2054}'
            | '\u{FE10}'
            | '\u{FE13}'
            | '\u{FE14}'
            | '\u{FE33}'
            | '\u{FE34}'
            | '\u{FE4D}'
            | '\u{FE4E}'
            | '\u{FE4F}'
            | '\u{FE50}'
            | '\u{FE52}'
            | '\u{FE54}'
            | '\u{FE55}'
            | '\u{FF07}'
            | '\u{FF0C}'
            | '\u{FF0E}'
            | '\u{FF1A}'
            | '\u{FF1B}'
            | '\u{FF3F}'
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("  ,;!? ").is_empty());
    }

    #[test]
    fn spacing_and_punctuation() {
        assert_eq!(
            tokenize("Deep   Learning, ArXiv!"),
            vec!["deep", "learning", "arxiv"]
        );
    }

    #[test]
    fn category_code_and_number() {
        assert_eq!(tokenize("cs.AI 2017"), vec!["cs", "ai", "2017"]);
    }

    #[test]
    fn identifiers() {
        assert_eq!(tokenize("1712.00001"), vec!["1712", "00001"]);
        assert_eq!(tokenize("cs/0112017"), vec!["cs", "0112017"]);
        assert_eq!(tokenize("hep-th"), vec!["hep", "th"]);
    }

    #[test]
    fn leading_space_before_combining_mark() {
        assert_eq!(tokenize(" \u{0BC6}"), vec!["\u{0BC6}"]);
    }

    #[test]
    fn unicode_letters() {
        assert_eq!(
            tokenize("Schrödinger ÉQUATION"),
            vec!["schrödinger", "équation"]
        );
        assert_eq!(tokenize("ΣΙΓΜΑ"), vec!["σιγμα"]);
        assert_eq!(tokenize("naïve’s x_y"), vec!["naïve", "s", "x", "y"]);
    }
}
