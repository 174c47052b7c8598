//! Small text helpers shared by ingestion, template editing and the
//! response parsers.

/// Strips one leading bullet (`-`, `*`, `+`, `•`) or list number (`1.`,
/// `2)`, `(3)`) plus the whitespace after it.
pub fn strip_list_marker(line: &str) -> &str {
    let s = line.trim();
    for bullet in ['-', '*', '+', '•', '–'] {
        if let Some(rest) = s.strip_prefix(bullet) {
            if rest.is_empty() || rest.starts_with(char::is_whitespace) {
                return rest.trim_start();
            }
        }
    }
    let inner = s.strip_prefix('(').unwrap_or(s);
    let digits = inner.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 && digits <= 3 {
        let rest = &inner[digits..];
        for close in ['.', ')', ':'] {
            if let Some(after) = rest.strip_prefix(close) {
                if after.is_empty() || after.starts_with(char::is_whitespace) {
                    return after.trim_start();
                }
            }
        }
    }
    s
}

/// True when the line starts with a bullet or list number.
pub fn has_list_marker(line: &str) -> bool {
    let trimmed = line.trim();
    !trimmed.is_empty() && strip_list_marker(trimmed).len() != trimmed.len()
}

/// Removes text inside parentheses, including the parentheses.
pub fn without_parentheticals(text: &str) -> String {
    let mut depth = 0usize;
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' if depth > 0 => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}
