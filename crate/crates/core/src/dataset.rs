//! Question-answer and relation-label files.

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};

/// One question with its entities, gold relation and gold answers, all by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QaExample {
    pub question: String,
    #[serde(default)]
    pub entities: Vec<String>,
    /// Empty when unknown, as in WikiMovies-format files.
    #[serde(default)]
    pub relation: String,
    pub answers: Vec<String>,
}

impl QaExample {
    pub fn is_multi_answer(&self) -> bool {
        self.answers.len() >= 2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationLabel {
    pub question: String,
    pub relation: String,
}

fn parse_jsonl<T: DeserializeOwned>(source: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let item = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}

/// Serializes one JSON object per line.
pub fn to_jsonl<T: Serialize>(items: &[T]) -> Result<String> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(item)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn parse_qa_jsonl(source: &str) -> Result<Vec<QaExample>> {
    let items: Vec<QaExample> = parse_jsonl(source)?;
    for (i, ex) in items.iter().enumerate() {
        if ex.answers.is_empty() {
            return Err(Error::Data(format!(
                "question {} (`{}`) has no answers",
                i + 1,
                ex.question
            )));
        }
    }
    Ok(items)
}

pub fn parse_relation_labels(source: &str) -> Result<Vec<RelationLabel>> {
    parse_jsonl(source)
}

/// `[n ]question TAB answer, answer, ...` lines. Entities and relation are
/// left empty; linking recovers the entities at answer time.
pub fn parse_wikimovies(source: &str) -> Result<Vec<QaExample>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (question, answers) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected `question<TAB>answers`".into(),
        })?;
        let question = match question.split_once(' ') {
            Some((n, rest)) if n.chars().all(|c| c.is_ascii_digit()) => rest,
            _ => question,
        };
        let answers: Vec<String> = answers
            .split(", ")
            .map(str::trim)
            .filter(|a| !a.is_empty())
            .map(String::from)
            .collect();
        if answers.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "no answers".into(),
            });
        }
        out.push(QaExample {
            question: question.trim().to_string(),
            entities: Vec::new(),
            relation: String::new(),
            answers,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsonl_round_trip() {
        let ex = vec![QaExample {
            question: "who wrote A".into(),
            entities: vec!["A".into()],
            relation: "written_by".into(),
            answers: vec!["1".into(), "6".into()],
        }];
        let text = to_jsonl(&ex).unwrap();
        assert_eq!(parse_qa_jsonl(&text).unwrap(), ex);
        assert!(ex[0].is_multi_answer());
    }

    #[test]
    fn bad_line_is_reported() {
        let src = "{\"question\":\"q\",\"answers\":[\"a\"]}\n{oops\n";
        assert!(matches!(parse_qa_jsonl(src), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(
            parse_qa_jsonl("{\"question\":\"q\",\"answers\":[]}"),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn relation_labels() {
        let l = parse_relation_labels("{\"question\":\"who wrote x\",\"relation\":\"written_by\"}\n").unwrap();
        assert_eq!(l[0].relation, "written_by");
    }

    #[test]
    fn wikimovies_lines() {
        let src = "1 what movies are about ginger rogers?\tTop Hat, Kitty Foyle, The Barkleys of Broadway\nwho directed Top Hat\tMark Sandrich\n";
        let q = parse_wikimovies(src).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q[0].question, "what movies are about ginger rogers?");
        assert_eq!(q[0].answers, vec!["Top Hat", "Kitty Foyle", "The Barkleys of Broadway"]);
        assert_eq!(q[1].question, "who directed Top Hat");
        assert!(parse_wikimovies("no tab here").is_err());
    }
}
