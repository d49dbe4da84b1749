use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::client::{ClientError, LanguageModelClient};
use super::{sample_category, SamplerState, TargetDistribution};
use crate::audit::indefinite_article;
use crate::demographic::{Gender, Race};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum YesNo {
    Yes,
    No,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderAnswer {
    Female,
    Male,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegulationAnswers {
    pub has_person_or_profession: YesNo,
    pub subject: String,
    pub demographic_specified: YesNo,
    pub gender: GenderAnswer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegulatedPrompt {
    pub original: String,
    pub injected: String,
    pub injected_race: Option<Race>,
    pub injected_gender: Option<Gender>,
    pub decision_trace: RegulationAnswers,
}

impl RegulatedPrompt {
    pub fn modified(&self) -> bool {
        self.injected != self.original
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegulationError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("malformed regulation response: cannot resolve {field} in {raw:?}")]
    Malformed { field: &'static str, raw: String },
    #[error("language model failed for prompt {prompt:?}: {source}")]
    Client { prompt: String, source: ClientError },
    #[error("subject {subject:?} does not occur in prompt {prompt:?}")]
    SubjectNotFound { subject: String, prompt: String },
}

/// Which noun class the first question asks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryWording {
    #[default]
    Profession,
    Person,
}

impl std::str::FromStr for QueryWording {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "profession" => Ok(QueryWording::Profession),
            "person" => Ok(QueryWording::Person),
            _ => Err(format!("unknown query wording {s:?} (expected profession or person)")),
        }
    }
}

pub(crate) const PROFESSION_PHRASE: &str = "profession or a social media influencer";
pub(crate) const PERSON_PHRASE: &str = "person";

/// The four-question query with the prompt quoted in place of X.
pub fn build_query(prompt: &str, wording: QueryWording) -> String {
    let phrase = match wording {
        QueryWording::Profession => PROFESSION_PHRASE,
        QueryWording::Person => PERSON_PHRASE,
    };
    format!(
        "For this text \"{prompt}\": 1) select using one word ['yes','no'] if text includes any {phrase} \
         2) find the subject practicing the job. \
         3) select using one word ['yes','no'] if the text includes any country, nationality, or race or ethnicity. \
         4) select using one word ['female', 'male', 'unknown'] the subject's gender"
    )
}

static MARKER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?:^|[\s(\[])([1-4])\s*[):.\]-]").unwrap());
static YES_NO: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(yes|no)\b").unwrap());
static GENDER: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(female|male|unknown)\b").unwrap());

/// Tolerant parse of a numbered answer list: the markers 1 to 4 are located
/// in order and each answer is read from the text up to the next marker.
pub fn parse_regulation(text: &str) -> Result<RegulationAnswers, RegulationError> {
    const FIELDS: [&str; 4] = ["has_person_or_profession", "subject", "demographic_specified", "gender"];
    let malformed = |k: usize| RegulationError::Malformed {
        field: FIELDS[k],
        raw: text.to_string(),
    };

    // (answer number, start of marker, end of marker)
    let mut found: Vec<(usize, usize)> = Vec::with_capacity(4);
    let mut from = 0;
    for k in 0..4 {
        let want = (b'1' + k as u8) as char;
        let hit = MARKER
            .captures_iter(&text[from..])
            .find(|c| c[1].starts_with(want))
            .ok_or_else(|| malformed(k))?;
        let g = hit.get(1).unwrap();
        let whole = hit.get(0).unwrap();
        found.push((from + g.start(), from + whole.end()));
        from += whole.end();
    }
    let segment = |k: usize| {
        let end = found.get(k + 1).map_or(text.len(), |m| m.0);
        &text[found[k].1..end]
    };

    let yes_no = |k: usize| -> Result<YesNo, RegulationError> {
        match YES_NO.captures(segment(k)).map(|c| c[1].to_ascii_lowercase()) {
            Some(w) if w == "yes" => Ok(YesNo::Yes),
            Some(_) => Ok(YesNo::No),
            None => Err(malformed(k)),
        }
    };
    let has_person = yes_no(0)?;
    let subject = segment(1)
        .trim()
        .trim_matches(|c: char| c == '"' || c == '\'' || c == '`')
        .trim_end_matches(['.', ',', ';'])
        .trim()
        .to_string();
    if has_person == YesNo::Yes && subject.is_empty() {
        return Err(malformed(1));
    }
    let demographic = yes_no(2)?;
    let gender = match GENDER.captures(segment(3)).map(|c| c[1].to_ascii_lowercase()) {
        Some(w) if w == "female" => GenderAnswer::Female,
        Some(w) if w == "male" => GenderAnswer::Male,
        Some(_) => GenderAnswer::Unknown,
        None => return Err(malformed(3)),
    };
    Ok(RegulationAnswers {
        has_person_or_profession: has_person,
        subject,
        demographic_specified: demographic,
        gender,
    })
}

fn strip_article(subject: &str) -> &str {
    let lower = subject.to_ascii_lowercase();
    for a in ["a ", "an ", "the "] {
        if lower.starts_with(a) {
            return subject[a.len()..].trim_start();
        }
    }
    subject
}

/// Byte offset of the first whole-word, case-insensitive occurrence.
fn find_word(haystack: &str, needle: &str) -> Option<usize> {
    let re = Regex::new(&format!(r"(?i)\b{}\b", regex::escape(needle))).ok()?;
    re.find(haystack).map(|m| m.start())
}

/// Inserts `words` before the subject and fixes a preceding "a"/"an".
fn inject(prompt: &str, subject: &str, words: &str) -> Result<String, RegulationError> {
    let bare = strip_article(subject);
    let at = find_word(prompt, bare).ok_or_else(|| RegulationError::SubjectNotFound {
        subject: subject.to_string(),
        prompt: prompt.to_string(),
    })?;
    let (head, tail) = prompt.split_at(at);
    let trimmed = head.trim_end();
    let word_start = trimmed.rfind(char::is_whitespace).map_or(0, |i| i + 1);
    let prev = &trimmed[word_start..];
    let head = if prev.eq_ignore_ascii_case("a") || prev.eq_ignore_ascii_case("an") {
        let mut article = indefinite_article(words).to_string();
        if prev.starts_with('A') {
            article[..1].make_ascii_uppercase();
        }
        format!("{}{}{}", &trimmed[..word_start], article, &head[trimmed.len()..])
    } else {
        head.to_string()
    };
    Ok(format!("{head}{words} {tail}"))
}

fn query_with_retry(client: &dyn LanguageModelClient, prompt: &str, query: &str) -> Result<String, RegulationError> {
    match client.query(query) {
        Ok(r) => Ok(r),
        Err(first) => {
            tracing::warn!(error = %first, "language model query failed, retrying once");
            client.query(query).map_err(|source| RegulationError::Client {
                prompt: prompt.to_string(),
                source,
            })
        }
    }
}

/// Asks the client the four questions about `prompt` and, when a person is
/// present without a stated demographic, inserts a race and/or gender drawn
/// from `target` directly before the subject.
pub fn regulate_prompt(
    prompt: &str,
    client: &dyn LanguageModelClient,
    target: &TargetDistribution,
    wording: QueryWording,
    state: &mut SamplerState,
) -> Result<RegulatedPrompt, RegulationError> {
    if prompt.trim().is_empty() {
        return Err(RegulationError::EmptyPrompt);
    }
    let raw = query_with_retry(client, prompt, &build_query(prompt, wording))?;
    let answers = parse_regulation(&raw)?;

    let race_missing = answers.demographic_specified == YesNo::No;
    let gender_missing = answers.gender == GenderAnswer::Unknown;
    let (race, gender) = if answers.has_person_or_profession == YesNo::No {
        (None, None)
    } else {
        match (race_missing, gender_missing) {
            (true, true) => {
                let cell = sample_category(&target.cells, state);
                (Some(cell.race), Some(cell.gender))
            }
            (true, false) => (Some(sample_category(&target.cells.race_marginal(), state)), None),
            (false, true) => (None, Some(sample_category(&target.cells.gender_marginal(), state))),
            (false, false) => (None, None),
        }
    };

    let words: Vec<&str> = race
        .map(Race::prompt_word)
        .into_iter()
        .chain(gender.map(Gender::prompt_word))
        .collect();
    let injected = if words.is_empty() {
        prompt.to_string()
    } else {
        inject(prompt, &answers.subject, &words.join(" "))?
    };
    Ok(RegulatedPrompt {
        original: prompt.to_string(),
        injected,
        injected_race: race,
        injected_gender: gender,
        decision_trace: answers,
    })
}
