//! Bundled emoticon inventory.
//!
//! Western ASCII emoticons plus common emoji, split by polarity. Laughing
//! faces (including "face with tears of joy") are positive.

use std::collections::HashSet;
use std::sync::OnceLock;

pub const POSITIVE: &[&str] = &[
    ":)", ":-)", ":))", ":)))", ":]", "=)", ":}", ":o)", ":D", ":-D", "=D", "xD", "XD", ";)",
    ";-)", ";D", ":P", ":-P", ":p", ":-p", ";P", ";p", ":3", "<3", "^_^", "^^", "^.^", "(:", "☺",
    "♥", "❤", "😀", "😁", "😂", "🤣", "😃", "😄", "😅", "😆", "😉", "😊", "😋", "😎", "😍", "😘",
    "🥰", "😗", "😙", "😚", "🙂", "🤗", "🤩", "😜", "😝", "😛", "😏", "👍", "👏", "💪", "🎉", "💕",
    "💖", "💯", "🙌", "😹",
];

pub const NEGATIVE: &[&str] = &[
    ":(", ":-(", ":((", ":(((", ":[", "=(", ":'(", ":'-(", ":/", ":-/", ":\\", ":|", ":-|", ">:(",
    "D:", ":@", ":S", ":s", "-_-", "T_T", ";(", "☹", "💔", "😞", "😟", "😠", "😡", "😢", "😣",
    "😤", "😥", "😦", "😧", "😨", "😩", "😪", "😫", "😭", "😰", "😱", "😒", "🙄", "😑", "😐", "😕",
    "🙁", "👎", "🤮", "🤢", "😖", "😬", "🤦",
];

fn all() -> &'static HashSet<&'static str> {
    static ALL: OnceLock<HashSet<&'static str>> = OnceLock::new();
    ALL.get_or_init(|| POSITIVE.iter().chain(NEGATIVE).copied().collect())
}

/// Whether `token` is one of the bundled emoticons.
pub fn is_known(token: &str) -> bool {
    all().contains(token)
}
