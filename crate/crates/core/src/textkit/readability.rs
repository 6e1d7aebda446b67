use super::TokenizedText;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReadabilityError {
    #[error("text has no words")]
    NoWords,
}

/// Vowel groups (y counts as a vowel), minus a silent final `e`, at least 1.
pub fn count_syllables(word: &str) -> usize {
    let w: Vec<char> = word.to_lowercase().chars().filter(|c| c.is_alphabetic()).collect();
    if w.is_empty() {
        return 1;
    }
    let vowel = |c: char| matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y');
    let mut groups = 0;
    let mut prev = false;
    for &c in &w {
        let v = vowel(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    let n = w.len();
    let silent_e = n >= 2 && w[n - 1] == 'e' && !vowel(w[n - 2]) && !(w[n - 2] == 'l' && n >= 3 && !vowel(w[n - 3]));
    if silent_e && groups > 1 {
        groups -= 1;
    }
    groups.max(1)
}

/// Flesch reading ease over the words and sentences of `t`.
pub fn flesch_reading_ease(t: &TokenizedText) -> Result<f64, ReadabilityError> {
    let words: Vec<&str> = t.words().map(|w| w.surface.as_str()).collect();
    if words.is_empty() {
        return Err(ReadabilityError::NoWords);
    }
    let sentences = t
        .sentences
        .iter()
        .filter(|s| t.tokens[(*s).clone()].iter().any(|tok| tok.is_word()))
        .count()
        .max(1);
    let syllables: usize = words.iter().map(|w| count_syllables(w)).sum();
    let wps = words.len() as f64 / sentences as f64;
    let spw = syllables as f64 / words.len() as f64;
    Ok(206.835 - 1.015 * wps - 84.6 * spw)
}
