//! Built-in forbidden-word sets.

use crate::error::{Error, Result};
use crate::subshift::ForbiddenSet;
use crate::word::Word;

const B1: &str = include_str!("../data/b1.txt");
const B1_TREE: &str = include_str!("../data/b1_tree.txt");
const B2_EXTRA: &str = include_str!("../data/b2_extra.txt");
const X_EXTRA: &str = include_str!("../data/x_extra.txt");
const Y_EXTRA: &str = include_str!("../data/y_extra.txt");

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: &[&str] = &["B1", "B1-TREE", "B2", "B2-TREE", "X", "Y", "E2"];

/// Parse a word list: one or more words per line separated by whitespace or
/// commas; `#` starts a comment.
pub fn parse_word_list(text: &str) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|c: char| c.is_whitespace() || c == ',') {
            if tok.is_empty() {
                continue;
            }
            let w: Word = tok
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1)))?;
            out.push(w);
        }
    }
    Ok(out)
}

/// Raw (un-normalized) word list of a built-in set.
pub fn builtin_words(name: &str) -> Result<Vec<Word>> {
    let lists: &[&str] = match name.to_ascii_uppercase().as_str() {
        "B1" => &[B1],
        "B1-TREE" => &[B1_TREE],
        "B2" => &[B1, B2_EXTRA],
        "B2-TREE" => &[B1_TREE, B2_EXTRA],
        "X" => &[B1_TREE, X_EXTRA],
        "Y" => &[B1_TREE, Y_EXTRA],
        "E2" => &[],
        other => return Err(Error::Invalid(format!("unknown built-in set {other:?}"))),
    };
    let mut out = Vec::new();
    for l in lists {
        out.extend(parse_word_list(l)?);
    }
    Ok(out)
}

/// A built-in set over `{1,2}`, closed under reversal.
pub fn builtin(name: &str) -> Result<ForbiddenSet> {
    ForbiddenSet::new(2, &builtin_words(name)?, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_after_normalization() {
        assert_eq!(builtin("B1").unwrap().len(), 27);
        assert_eq!(builtin("B1").unwrap().max_len(), 17);
        assert_eq!(builtin("B2").unwrap().len(), 31);
        assert_eq!(builtin("X").unwrap().len(), 46);
        assert_eq!(builtin("Y").unwrap().len(), 48);
        assert!(builtin("E2").unwrap().is_empty());
        assert!(builtin("nope").is_err());
    }
}
