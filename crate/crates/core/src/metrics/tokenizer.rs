//! Token counting.
//!
//! The bundled [`HeuristicTokenizer`] approximates BPE tokenizers closely
//! enough for relative comparisons: word runs cost one token per four
//! characters (one token for words of up to two characters), and every
//! punctuation character is its own token.

/// Anything that can split text into tokens.
pub trait TokenCounter {
    /// Pieces whose concatenation is exactly `text`.
    fn segment(&self, text: &str) -> Vec<String>;

    fn count(&self, text: &str) -> usize {
        self.segment(text).len()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeuristicTokenizer;

const CHARS_PER_TOKEN: usize = 4;

#[derive(PartialEq, Eq, Clone, Copy)]
enum Class {
    Word,
    Space,
    Newline,
    Other,
}

fn class(c: char) -> Class {
    match c {
        'a'..='z' | 'A'..='Z' | '0'..='9' | '_' => Class::Word,
        '\n' => Class::Newline,
        c if c.is_whitespace() => Class::Space,
        _ => Class::Other,
    }
}

fn chunk_run(run: &str, out: &mut Vec<String>) {
    // Runs are ASCII here, so byte chunks are char chunks.
    let bytes = run.as_bytes();
    for piece in bytes.chunks(CHARS_PER_TOKEN) {
        out.push(String::from_utf8_lossy(piece).into_owned());
    }
}

impl TokenCounter for HeuristicTokenizer {
    fn segment(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        let mut chars = text.char_indices().peekable();
        while let Some((start, c)) = chars.next() {
            let k = class(c);
            match k {
                Class::Newline | Class::Other => out.push(c.to_string()),
                Class::Word | Class::Space => {
                    let mut end = start + c.len_utf8();
                    while let Some(&(i, d)) = chars.peek() {
                        if class(d) != k || (k == Class::Space && !d.is_ascii()) {
                            break;
                        }
                        end = i + d.len_utf8();
                        chars.next();
                    }
                    let run = &text[start..end];
                    if k == Class::Space && !run.is_ascii() {
                        // Exotic whitespace: one token per character.
                        out.extend(run.chars().map(String::from));
                    } else {
                        chunk_run(run, &mut out);
                    }
                }
            }
        }
        out
    }
}

/// Counts with the bundled tokenizer.
pub fn count_tokens(text: &str) -> usize {
    HeuristicTokenizer.count(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_counts() {
        assert_eq!(count_tokens(""), 0);
        assert_eq!(count_tokens("tc"), 1);
        assert_eq!(count_tokens("tc(180);"), 5);
        assert_eq!(count_tokens("Anything"), 2);
        assert_eq!(count_tokens("   "), 1);
        assert_eq!(count_tokens("     "), 2);
        assert_eq!(count_tokens("a\n\nb"), 4);
        assert_eq!(count_tokens("é"), 1);
    }

    #[test]
    fn segments_concatenate() {
        let t = "def scan(object_name):\n  for i in range(8):\u{3000}x";
        let seg = HeuristicTokenizer.segment(t);
        assert_eq!(seg.concat(), t);
        assert_eq!(seg.len(), count_tokens(t));
    }
}
