//! Accept/reject phrase detection shared by the termination rule and the reward oracles.

use regex::Regex;
use std::sync::LazyLock;

use crate::backends::OutcomeTag;
use crate::game::DialogueState;

static ACCEPT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:yes,?\s+i\s+would\s+like\s+to\s+make\s+that\s+trade|i'?m\s+willing\s+to\s+accept|i\s+am\s+willing\s+to\s+accept|i\s+accept|works\s+for\s+me|it'?s\s+a\s+deal|deal!)",
    )
    .expect("valid regex")
});

static REJECT: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(
        r"(?i)\b(?:i\s+do\s+not\s+want\s+to\s+do\s+this\s+trade|i\s+do\s+not\s+want\s+to\s+meet|don'?t\s+see\s+a\s+way\s+to\s+make\s+a\s+deal|no\s+deal\b|i\s+(?:reject|decline)\b)",
    )
    .expect("valid regex")
});

fn normalize_quotes(text: &str) -> String {
    text.replace(['\u{2019}', '\u{2018}'], "'")
}

pub fn is_rejection(text: &str) -> bool {
    REJECT.is_match(&normalize_quotes(text))
}

/// Acceptance phrase present and no rejection phrase.
pub fn is_acceptance(text: &str) -> bool {
    let text = normalize_quotes(text);
    ACCEPT.is_match(&text) && !REJECT.is_match(&text)
}

/// Outcome class of a finished transcript from its last reply.
pub fn outcome_of(transcript: &DialogueState) -> OutcomeTag {
    match transcript.replies().last() {
        Some((_, text)) if is_rejection(text) => OutcomeTag::Rejected,
        Some((_, text)) if is_acceptance(text) => OutcomeTag::Valid,
        _ => OutcomeTag::Incomplete,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recognises_template_replies() {
        assert!(is_acceptance("Hi Bob, Yes, I would like to make\nthat trade with you! Best, Suzy"));
        assert!(is_rejection("Hi Bob, No, I do not want to do this trade with\nyou. Thanks though, Suzy"));
        let incomplete = "Hi Bob, No, but would you accept a different\ntrade? Best, Suzy";
        assert!(!is_acceptance(incomplete));
        assert!(!is_rejection(incomplete));
    }

    #[test]
    fn recognises_worked_examples() {
        assert!(is_acceptance("I'm willing to accept two kiwis for one banana, if you're still interested."));
        assert!(is_rejection("I just don't see a way to make a deal that we can both be happy with."));
    }
}
