//! Character classes shared by preprocessing and tokenization.

/// Arabic script blocks (base, supplement, extended-A, presentation forms).
pub fn is_arabic(c: char) -> bool {
    matches!(c,
        '\u{0600}'..='\u{06FF}'
        | '\u{0750}'..='\u{077F}'
        | '\u{08A0}'..='\u{08FF}'
        | '\u{FB50}'..='\u{FDFF}'
        | '\u{FE70}'..='\u{FEFF}')
}

pub fn is_arabic_letter(c: char) -> bool {
    is_arabic(c) && (c.is_alphabetic() || is_arabic_mark(c))
}

/// Arabic diacritics and the superscript alef. These are combining marks,
/// which `char::is_alphanumeric` rejects.
pub fn is_arabic_mark(c: char) -> bool {
    matches!(c, '\u{0610}'..='\u{061A}' | '\u{064B}'..='\u{065F}' | '\u{0670}' | '\u{06D6}'..='\u{06ED}')
}

pub fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic()
        && matches!(c,
            'A'..='Z' | 'a'..='z'
            | '\u{00C0}'..='\u{024F}'
            | '\u{1E00}'..='\u{1EFF}')
}

pub fn is_cjk(c: char) -> bool {
    matches!(c,
        '\u{3040}'..='\u{30FF}'
        | '\u{3400}'..='\u{4DBF}'
        | '\u{4E00}'..='\u{9FFF}'
        | '\u{AC00}'..='\u{D7AF}'
        | '\u{F900}'..='\u{FAFF}')
}

/// Pictographic emoji and related symbol ranges.
pub fn is_emoji(c: char) -> bool {
    matches!(c,
        '\u{1F300}'..='\u{1FAFF}'
        | '\u{2600}'..='\u{27BF}'
        | '\u{1F000}'..='\u{1F2FF}')
}

/// Emoji modifiers and joiners that attach to a preceding emoji.
pub fn is_emoji_component(c: char) -> bool {
    matches!(c, '\u{FE0F}' | '\u{200D}' | '\u{1F3FB}'..='\u{1F3FF}')
}

/// Characters that form words: letters, digits, underscore and combining
/// marks.
pub fn is_word_char(c: char) -> bool {
    (c.is_alphanumeric() && !is_emoji(c))
        || c == '_'
        || is_arabic_mark(c)
        || matches!(c, '\u{0300}'..='\u{036F}')
}
