use regex::Regex;
use std::sync::LazyLock;

use super::config::{normalize_label, GameConfig, ANY_LABEL};
use super::state::DialogueState;
use super::GameError;

const BANNER_RULE: &str = "############################";

static PLACEHOLDER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\{([A-Za-z_][A-Za-z0-9_]*)\}").expect("valid regex"));

/// Fills `{name}` placeholders through `lookup`. Any name `lookup` cannot resolve is an error.
pub fn render_template<F>(template: &str, mut lookup: F) -> Result<String, GameError>
where
    F: FnMut(&str) -> Option<String>,
{
    let mut out = String::with_capacity(template.len() + 64);
    let mut last = 0;
    for caps in PLACEHOLDER.captures_iter(template) {
        let whole = caps.get(0).expect("match");
        let name = &caps[1];
        let value = lookup(name)
            .ok_or_else(|| GameError::Template(format!("unfilled placeholder `{{{name}}}`")))?;
        out.push_str(&template[last..whole.start()]);
        out.push_str(&value);
        last = whole.end();
    }
    out.push_str(&template[last..]);
    Ok(out)
}

/// One message framed by the domain banner.
pub fn render_message(config: &GameConfig, author: usize, text: &str) -> String {
    let from = &config.player_names[author];
    let to = &config.player_names[(author + 1) % config.num_players];
    format!(
        "{BANNER_RULE}\n{}:\nfrom: {from}\nto: {to}\n{BANNER_RULE}\n\n{text}\n\n",
        config.domain_id.message_banner()
    )
}

/// The public thread: every message so far, opening message first.
pub fn render_thread(config: &GameConfig, state: &DialogueState) -> String {
    state
        .messages()
        .map(|(author, text)| render_message(config, author, text))
        .collect()
}

/// Instruction text for one action; empty for the uninformative `any` label.
pub fn instruction_line(config: &GameConfig, action_index: usize) -> String {
    let label = &config.action_labels[action_index];
    if normalize_label(label) == ANY_LABEL {
        String::new()
    } else {
        format!("{}\n\n", config.instruction_template().replace("{action}", label.trim()))
    }
}

/// Prompt for `player` about to write a message under instruction `action_index`:
/// the public thread followed by the header filled with the player's private info.
pub fn format_prompt(
    config: &GameConfig,
    state: &DialogueState,
    player: usize,
    action_index: usize,
) -> Result<String, GameError> {
    if action_index >= config.num_actions() {
        return Err(GameError::IllegalAction(format!("action index {action_index} out of range")));
    }
    let private = &config.scenario.private_info[player];
    let header = render_template(&config.header_template, |name| match name {
        "instruction" => Some(instruction_line(config, action_index)),
        "sender" => Some(config.player_names[player].clone()),
        "receiver" => Some(config.player_names[(player + 1) % config.num_players].clone()),
        other => private.get(other).map(|v| v.render()),
    })?;
    let mut prompt = render_thread(config, state);
    prompt.push_str(&header);
    Ok(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_placeholder_is_an_error() {
        let err = render_template("hello {who}", |_| None).unwrap_err();
        assert!(matches!(err, GameError::Template(_)));
    }

    #[test]
    fn fills_all_placeholders() {
        let out = render_template("{a}-{b}-{a}", |n| Some(n.to_uppercase())).unwrap();
        assert_eq!(out, "A-B-A");
    }
}
