use crate::corpus::Direction;

use super::FeatureError;

/// Marker tokens placed before and after the first argument.
pub fn direction_markers(direction: Direction) -> (&'static str, &'static str) {
    match direction {
        Direction::Forward => ("}", ">"),
        Direction::Backward => ("{", "<"),
    }
}

/// Wraps the first argument in pseudo-directional marker tokens:
/// `} arg1 >` for `1>2` and `{ arg1 <` for `1<2`.
pub fn mark_direction(arg1_text: &str, direction: Direction) -> Result<String, FeatureError> {
    if arg1_text.is_empty() {
        return Err(FeatureError::EmptyArgument);
    }
    let (open, close) = direction_markers(direction);
    Ok(format!("{open} {arg1_text} {close}"))
}

/// Inverse of [`mark_direction`].
pub fn strip_direction(marked: &str) -> Option<(String, Direction)> {
    for direction in [Direction::Forward, Direction::Backward] {
        let (open, close) = direction_markers(direction);
        if let Some(inner) = marked
            .strip_prefix(open)
            .and_then(|s| s.strip_prefix(' '))
            .and_then(|s| s.strip_suffix(close))
            .and_then(|s| s.strip_suffix(' '))
        {
            return Some((inner.to_string(), direction));
        }
    }
    None
}
