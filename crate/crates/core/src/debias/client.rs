use std::time::Duration;

use regex::Regex;
use serde::Deserialize;
use serde_json::json;
use thiserror::Error;

use super::regulator::{PERSON_PHRASE, PROFESSION_PHRASE};
use crate::audit::PROFESSIONS;

pub const ENV_LLM_ENDPOINT: &str = "DEMAUDIT_LLM_ENDPOINT";
pub const ENV_LLM_API_KEY: &str = "DEMAUDIT_LLM_API_KEY";
pub const ENV_LLM_MODEL: &str = "DEMAUDIT_LLM_MODEL";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClientError {
    #[error("environment variable {0} is not set")]
    MissingEnv(&'static str),
    #[error("transport: {0}")]
    Transport(String),
    #[error("http status {0}")]
    Status(u16),
    #[error("unexpected response: {0}")]
    Response(String),
    #[error("query does not follow the regulation template")]
    UnrecognizedQuery,
}

/// Text in, text out.
pub trait LanguageModelClient: Send + Sync {
    fn query(&self, text: &str) -> Result<String, ClientError>;
}

/// OpenAI-style chat-completion endpoint, queried at temperature 0.
/// Configured only from the environment.
#[derive(Debug, Clone)]
pub struct ChatCompletionClient {
    endpoint: String,
    api_key: Option<String>,
    model: String,
    agent: ureq::Agent,
}

impl ChatCompletionClient {
    pub const DEFAULT_MODEL: &'static str = "gpt-4";

    pub fn from_env() -> Result<Self, ClientError> {
        let endpoint = std::env::var(ENV_LLM_ENDPOINT).map_err(|_| ClientError::MissingEnv(ENV_LLM_ENDPOINT))?;
        let api_key = std::env::var(ENV_LLM_API_KEY).ok().filter(|k| !k.is_empty());
        let model = std::env::var(ENV_LLM_MODEL).unwrap_or_else(|_| Self::DEFAULT_MODEL.to_string());
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        Ok(ChatCompletionClient {
            endpoint,
            api_key,
            model,
            agent,
        })
    }
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatMessage,
}

#[derive(Deserialize)]
struct ChatMessage {
    content: String,
}

impl LanguageModelClient for ChatCompletionClient {
    fn query(&self, text: &str) -> Result<String, ClientError> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": text}],
        });
        let mut req = self.agent.post(&self.endpoint);
        if let Some(k) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {k}"));
        }
        let mut resp = req.send_json(&body).map_err(|e| ClientError::Transport(e.to_string()))?;
        if resp.status() != 200 {
            return Err(ClientError::Status(resp.status().as_u16()));
        }
        let parsed: ChatResponse = resp
            .body_mut()
            .read_json()
            .map_err(|e| ClientError::Response(e.to_string()))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or_else(|| ClientError::Response("no choices".into()))
    }
}

const EXTRA_PROFESSIONS: [&str; 8] = [
    "salesperson",
    "math scientist",
    "mathematician",
    "model",
    "engineer",
    "scientist",
    "presenter",
    "guard",
];
const INFLUENCERS: [&str; 3] = ["social media influencer", "influencer", "content creator"];
const PERSON_NOUNS: [&str; 14] = [
    "person", "people", "man", "woman", "men", "women", "boy", "girl", "child", "kid", "guy", "lady", "individual",
    "human",
];
const RACE_WORDS: [&str; 60] = [
    "asian", "black", "white", "indian", "latino", "latina", "latinx", "hispanic", "middle eastern", "arab", "arabic",
    "african", "caucasian", "european", "american", "british", "english", "chinese", "japanese", "korean",
    "vietnamese", "thai", "filipino", "mexican", "brazilian", "colombian", "argentinian", "nigerian", "kenyan",
    "ethiopian", "egyptian", "iranian", "persian", "turkish", "lebanese", "saudi", "french", "german", "italian",
    "spanish", "russian", "irish", "swedish", "pakistani", "bangladeshi", "india", "china", "japan", "korea",
    "mexico", "brazil", "nigeria", "kenya", "egypt", "iran", "france", "germany", "italy", "spain", "usa",
];
const FEMALE_WORDS: [&str; 12] = [
    "female", "woman", "women", "girl", "lady", "she", "her", "mother", "actress", "waitress", "businesswoman",
    "feminine",
];
const MALE_WORDS: [&str; 12] = [
    "male", "man", "men", "boy", "guy", "he", "his", "father", "gentleman", "businessman", "masculine", "actor",
];

fn word_regex(words: &[&str]) -> Regex {
    let mut sorted: Vec<&str> = words.to_vec();
    // Longest first so alternation prefers "sushi chef" over "chef".
    sorted.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    let alt: Vec<String> = sorted.iter().map(|w| regex::escape(w).replace(' ', r"\s+")).collect();
    Regex::new(&format!(r"(?i)\b(?:{})\b", alt.join("|"))).expect("lexicon regex")
}

/// Offline keyword-table stand-in for the language model. Answers in the
/// canonical "1) yes 2) doctor 3) no 4) unknown" form.
#[derive(Debug, Clone)]
pub struct RuleBasedMock {
    professions: Regex,
    persons: Regex,
    races: Regex,
    female: Regex,
    male: Regex,
}

impl Default for RuleBasedMock {
    fn default() -> Self {
        let mut professions: Vec<String> = PROFESSIONS.iter().map(|(p, _)| p.to_lowercase()).collect();
        professions.extend(EXTRA_PROFESSIONS.iter().map(|s| s.to_string()));
        professions.extend(INFLUENCERS.iter().map(|s| s.to_string()));
        let professions: Vec<&str> = professions.iter().map(String::as_str).collect();
        RuleBasedMock {
            professions: word_regex(&professions),
            persons: word_regex(&PERSON_NOUNS),
            races: word_regex(&RACE_WORDS),
            female: word_regex(&FEMALE_WORDS),
            male: word_regex(&MALE_WORDS),
        }
    }
}

impl RuleBasedMock {
    /// Answers for one prompt text. `person_wording` also accepts generic
    /// person nouns as subjects.
    pub fn answer(&self, x: &str, person_wording: bool) -> String {
        // Leftmost match; the regex alternation already prefers the longest
        // term at a given position.
        let mut subject = self.professions.find(x);
        if person_wording {
            if let Some(p) = self.persons.find(x) {
                if subject.is_none_or(|s| p.start() < s.start()) {
                    subject = Some(p);
                }
            }
        }
        let Some(subject) = subject else {
            return "1) no 2) none 3) no 4) unknown".to_string();
        };
        let race = if self.races.is_match(x) { "yes" } else { "no" };
        let gender = match (self.female.is_match(x), self.male.is_match(x)) {
            (true, false) => "female",
            (false, true) => "male",
            _ => "unknown",
        };
        format!("1) yes 2) {} 3) {race} 4) {gender}", subject.as_str())
    }
}

impl LanguageModelClient for RuleBasedMock {
    fn query(&self, text: &str) -> Result<String, ClientError> {
        let body = text.strip_prefix("For this text \"").ok_or(ClientError::UnrecognizedQuery)?;
        let end = body.rfind("\": 1)").ok_or(ClientError::UnrecognizedQuery)?;
        let x = &body[..end];
        let rest = &body[end..];
        let person_wording = if rest.contains(PROFESSION_PHRASE) {
            false
        } else if rest.contains(&format!("any {PERSON_PHRASE} 2)")) {
            true
        } else {
            return Err(ClientError::UnrecognizedQuery);
        };
        Ok(self.answer(x, person_wording))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debias::regulator::{build_query, QueryWording};

    #[test]
    fn mock_answers() {
        let m = RuleBasedMock::default();
        assert_eq!(m.answer("a photo of a doctor", false), "1) yes 2) doctor 3) no 4) unknown");
        assert_eq!(m.answer("a photo of a Sushi Chef", false), "1) yes 2) Sushi Chef 3) no 4) unknown");
        assert_eq!(m.answer("a Nigerian female pilot", false), "1) yes 2) pilot 3) yes 4) female");
        assert_eq!(m.answer("sunset over mountains", false), "1) no 2) none 3) no 4) unknown");
        assert_eq!(m.answer("a man walking", false), "1) no 2) none 3) no 4) unknown");
        assert_eq!(m.answer("a man walking", true), "1) yes 2) man 3) no 4) male");
        assert_eq!(m.answer("a tiktoker dancing", false), "1) yes 2) tiktoker 3) no 4) unknown");
    }

    #[test]
    fn mock_reads_the_query() {
        let m = RuleBasedMock::default();
        let q = build_query("a photo of a nurse", QueryWording::Profession);
        assert_eq!(m.query(&q).unwrap(), "1) yes 2) nurse 3) no 4) unknown");
        let q = build_query("a woman reading", QueryWording::Person);
        assert_eq!(m.query(&q).unwrap(), "1) yes 2) woman 3) no 4) female");
        assert_eq!(m.query("hello").unwrap_err(), ClientError::UnrecognizedQuery);
    }

    #[test]
    fn every_profession_is_recognized() {
        let m = RuleBasedMock::default();
        for (p, _) in PROFESSIONS {
            let a = m.answer(&format!("a photo of a {}", p.to_lowercase()), false);
            assert_eq!(a, format!("1) yes 2) {} 3) no 4) unknown", p.to_lowercase()));
        }
    }
}
