//! Line tokenization shared by the calculus and network file parsers.

/// Splits one line into (1-based column, token) pairs, dropping everything
/// from the first `#` on. Columns count characters, not bytes.
pub(crate) fn tokenize(line: &str) -> Vec<(usize, &str)> {
    let body = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let mut col = 0usize;
    for (byte_idx, ch) in body.char_indices() {
        col += 1;
        if ch.is_whitespace() {
            if let Some((byte_start, start_col)) = start.take() {
                out.push((start_col, &body[byte_start..byte_idx]));
            }
        } else if start.is_none() {
            start = Some((byte_idx, col));
        }
    }
    if let Some((byte_start, start_col)) = start {
        out.push((start_col, &body[byte_start..]));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::tokenize;

    #[test]
    fn splits_on_whitespace_and_strips_comments() {
        assert_eq!(
            tokenize("compose a b = ( c )  # note"),
            vec![(1, "compose"), (9, "a"), (11, "b"), (13, "="), (15, "("), (17, "c"), (19, ")")]
        );
        assert_eq!(tokenize("# only a comment"), vec![]);
        assert_eq!(tokenize("   "), vec![]);
        assert_eq!(tokenize("\tx\ty"), vec![(2, "x"), (4, "y")]);
    }
}
