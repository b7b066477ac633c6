use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use super::SelectorResponse;
use crate::planners::BehaviorOption;

/// Waypoints expected in a trajectory answer (8 s at 2 Hz).
pub const WAYPOINT_COUNT: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no offered behavior label found in the response")]
    NoLabelFound,
    #[error("malformed trajectory: {0}")]
    MalformedTrajectory(String),
}

/// Lowercased text with `_`/`-` turned into spaces and whitespace runs
/// collapsed, plus the byte offset in `text` of every normalized char.
fn normalize(text: &str) -> (Vec<char>, Vec<usize>) {
    let mut chars = Vec::with_capacity(text.len());
    let mut offsets = Vec::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        let c = if c == '_' || c == '-' || c.is_whitespace() { ' ' } else { c };
        if c == ' ' && chars.last() == Some(&' ') {
            continue;
        }
        for l in c.to_lowercase() {
            chars.push(l);
            offsets.push(i);
        }
    }
    (chars, offsets)
}

/// Start of the last whole-word occurrence of `needle` in `hay`.
fn rfind_word(hay: &[char], needle: &[char]) -> Option<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return None;
    }
    (0..=hay.len() - needle.len()).rev().find(|&i| {
        hay[i..i + needle.len()] == *needle
            && (i == 0 || !hay[i - 1].is_alphanumeric())
            && hay.get(i + needle.len()).map_or(true, |c| !c.is_alphanumeric())
    })
}

/// Picks the offered label occurring last in `text`; the text before it
/// becomes the rationale.
pub fn parse_behavior_response(text: &str, options: &[BehaviorOption]) -> Result<SelectorResponse, ParseError> {
    let (hay, offsets) = normalize(text);
    let best = options
        .iter()
        .filter_map(|o| {
            let needle: Vec<char> = o.label.phrase().chars().collect();
            rfind_word(&hay, &needle).map(|pos| (pos, needle.len(), o.label))
        })
        // the longer label wins when two start at the same place
        .max_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let (pos, _, label) = best.ok_or(ParseError::NoLabelFound)?;
    Ok(SelectorResponse { chosen_label: label, rationale: text[..offsets[pos]].trim().to_owned() })
}

fn pair_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let num = r"([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)";
        Regex::new(&format!(r"[\(\[]\s*{num}\s*,\s*{num}\s*[\)\]]")).expect("static regex")
    })
}

fn separator_only(s: &str) -> bool {
    s.chars().all(|c| c.is_whitespace() || matches!(c, ',' | ';' | '[' | ']' | '-' | '>'))
}

/// Extracts the first run of at least 16 `(x, y)` pairs and keeps the first 16.
pub fn parse_waypoints_response(text: &str) -> Result<Vec<(f64, f64)>, ParseError> {
    let mut run: Vec<(f64, f64)> = Vec::new();
    let mut last_end: Option<usize> = None;
    let mut longest = 0;
    for cap in pair_regex().captures_iter(text) {
        let m = cap.get(0).expect("whole match");
        let contiguous = last_end.map_or(false, |e| separator_only(&text[e..m.start()]));
        if !contiguous {
            run.clear();
        }
        let x: f64 = cap[1].parse().map_err(|_| ParseError::MalformedTrajectory(cap[1].to_owned()))?;
        let y: f64 = cap[2].parse().map_err(|_| ParseError::MalformedTrajectory(cap[2].to_owned()))?;
        run.push((x, y));
        last_end = Some(m.end());
        longest = longest.max(run.len());
        if run.len() == WAYPOINT_COUNT {
            if let Some(bad) = run.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
                return Err(ParseError::MalformedTrajectory(format!("non-finite waypoint {bad:?}")));
            }
            return Ok(run);
        }
    }
    Err(ParseError::MalformedTrajectory(format!(
        "expected {WAYPOINT_COUNT} consecutive pairs, longest run has {longest}"
    )))
}
