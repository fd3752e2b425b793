use std::collections::HashSet;

/// Keywords that can never be used as an abbreviation.
pub const RESERVED: &[&str] = &["rp", "replan"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no free one- or two-letter abbreviation for `{0}`")]
pub struct AbbrExhausted(pub String);

/// Candidate abbreviations in preference order, duplicates removed.
///
/// Multi-word names try the initials of the first two words, then the first
/// two letters of the first word, then the first letter. Single-word names
/// try the first letter first. Either way the tail of the ladder is the
/// first letter followed by each later letter of the name.
pub fn candidates(name: &str) -> Vec<String> {
    let words: Vec<&str> = name
        .split('_')
        .filter(|w| !w.is_empty())
        .collect();
    let letters: Vec<char> = name
        .chars()
        .filter(|c| c.is_ascii_alphabetic())
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let mut out: Vec<String> = Vec::new();
    let mut add = |s: String| {
        if !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase()) && !out.contains(&s) {
            out.push(s);
        }
    };
    let Some(&first) = letters.first() else {
        return out;
    };
    let initial = |w: &str| w.chars().find(|c| c.is_ascii_alphabetic()).map(|c| c.to_ascii_lowercase());
    if words.len() >= 2 {
        if let (Some(a), Some(b)) = (initial(words[0]), initial(words[1])) {
            add(format!("{a}{b}"));
        }
        let head: String = words[0]
            .chars()
            .filter(|c| c.is_ascii_alphabetic())
            .take(2)
            .map(|c| c.to_ascii_lowercase())
            .collect();
        if head.len() == 2 {
            add(head);
        }
        add(first.to_string());
    } else {
        add(first.to_string());
        if letters.len() >= 2 {
            add(format!("{first}{}", letters[1]));
        }
    }
    for c in &letters[1..] {
        add(format!("{first}{c}"));
    }
    out
}

/// First candidate not taken and not reserved.
pub fn generate_abbr(name: &str, taken: &HashSet<String>) -> Result<String, AbbrExhausted> {
    candidates(name)
        .into_iter()
        .find(|c| !taken.contains(c) && !RESERVED.contains(&c.as_str()))
        .ok_or_else(|| AbbrExhausted(name.to_string()))
}
