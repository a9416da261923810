//! Line-level plumbing shared by the automaton and strategy file formats:
//! `#` starts a comment, blank lines are skipped, everything else is
//! whitespace-tokenized.

/// Returns the meaningful lines of `text` as `(line_number, content)` pairs,
/// 1-based, with comments stripped and surrounding whitespace trimmed.
pub(crate) fn significant_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .filter_map(|(idx, raw)| {
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                None
            } else {
                Some((idx + 1, content))
            }
        })
        .collect()
}

/// Splits a `key: value` line, returning the value when the key matches.
pub(crate) fn keyed<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.strip_prefix(key)?;
    let rest = rest.trim_start();
    let rest = rest.strip_prefix(':')?;
    Some(rest.trim())
}
