//! Text assets bundled with the library.

pub const DEBATE_TOPICS: &str = include_str!("../assets/debate_topics.txt");
pub const NAMES: &str = include_str!("../assets/names.txt");

pub const CLASSIFIER_DEBATE: &str = include_str!("../assets/classifier_debate.txt");
pub const CLASSIFIER_FRUIT: &str = include_str!("../assets/classifier_fruit.txt");
pub const CLASSIFIER_MEETING: &str = include_str!("../assets/classifier_meeting.txt");

pub const HEADER_FRUIT: &str = include_str!("../assets/header_fruit.txt");
pub const HEADER_MEETING: &str = include_str!("../assets/header_meeting.txt");
pub const HEADER_DEBATE: &str = include_str!("../assets/header_debate.txt");

pub const FRUIT_PROPOSAL: &str = include_str!("../assets/fruit_proposal.txt");
pub const FRUIT_VALID: &str = include_str!("../assets/fruit_valid.txt");
pub const FRUIT_REJECTED: &str = include_str!("../assets/fruit_rejected.txt");
pub const FRUIT_INCOMPLETE: &str = include_str!("../assets/fruit_incomplete.txt");
pub const MEETING_PROPOSAL: &str = include_str!("../assets/meeting_proposal.txt");
pub const MEETING_VALID: &str = include_str!("../assets/meeting_valid.txt");
pub const MEETING_REJECTED: &str = include_str!("../assets/meeting_rejected.txt");
pub const MEETING_INCOMPLETE: &str = include_str!("../assets/meeting_incomplete.txt");

pub const STUB_BANK_FRUIT: &str = include_str!("../assets/stub_bank_fruit.txt");
pub const STUB_BANK_MEETING: &str = include_str!("../assets/stub_bank_meeting.txt");
pub const STUB_BANK_DEBATE: &str = include_str!("../assets/stub_bank_debate.txt");

pub const REWARD_FRUIT: &str = include_str!("../assets/reward_fruit.txt");
pub const REWARD_MEETING: &str = include_str!("../assets/reward_meeting.txt");
pub const REWARD_DEBATE: &str = include_str!("../assets/reward_debate.txt");
pub const TERMINATOR: &str = include_str!("../assets/terminator.txt");
pub const PROPOSER_SUFFIX: &str = include_str!("../assets/proposer_suffix.txt");

/// Non-empty trimmed lines of an asset.
pub fn lines(asset: &str) -> Vec<String> {
    asset
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topic_list_has_twenty_entries() {
        let topics = lines(DEBATE_TOPICS);
        assert_eq!(topics.len(), 20);
        assert_eq!(topics[0], "Breakfast is the most important meal of the day.");
        assert_eq!(topics[19], "The government should pay for post secondary education.");
    }

    #[test]
    fn classifier_instructions_end_with_message_slot() {
        for text in [CLASSIFIER_DEBATE, CLASSIFIER_FRUIT, CLASSIFIER_MEETING] {
            assert!(text.trim_end().ends_with("Message:"));
        }
        assert!(CLASSIFIER_DEBATE.contains("Answer: ethos"));
        assert!(CLASSIFIER_FRUIT.contains("Answer: submissive"));
        assert!(CLASSIFIER_MEETING.contains("Answer: Thursday"));
    }

    #[test]
    fn stub_banks_are_nonempty() {
        for bank in [STUB_BANK_FRUIT, STUB_BANK_MEETING, STUB_BANK_DEBATE] {
            assert!(!lines(bank).is_empty());
        }
    }
}
