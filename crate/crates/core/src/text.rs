//! Question and name normalization shared by the entity dictionary, the
//! linker and both text encoders.

/// Placeholder substituted for every linked entity mention.
pub const ENTITY_PLACEHOLDER: &str = "<ENT>";

/// Splits on whitespace, lowercases, and strips leading/trailing punctuation
/// from every token. Tokens that are pure punctuation disappear.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| {
            raw.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|t| !t.is_empty())
        .collect()
}

/// Dictionary key for a multi-token name: its tokens joined by one space.
pub fn name_key(name: &str) -> String {
    tokenize(name).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_punctuation_and_case() {
        assert_eq!(
            tokenize("Who directed Movie A?"),
            vec!["who", "directed", "movie", "a"]
        );
        assert_eq!(tokenize("V. Diesel"), vec!["v", "diesel"]);
        assert_eq!(tokenize("  ... !! "), Vec::<String>::new());
    }

    #[test]
    fn inner_punctuation_survives() {
        assert_eq!(tokenize("o'neil's x-men"), vec!["o'neil's", "x-men"]);
    }

    #[test]
    fn trailing_punctuation_is_invisible() {
        assert_eq!(tokenize("who wrote it"), tokenize("who wrote it ?!"));
    }
}
