//! Panic mode recovery.
//!
//! Starting from the error token, look for the topmost stack entry with a non-error action
//! for the current token. If no entry has one, skip the token and try again with the full
//! stack. Every stack entry is checked for every token, including the first.

use crate::lexer::Token;
use crate::lrtable::{Action, StateId, StateTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PanicResume {
    /// How many stack entries to keep.
    pub stack_len: usize,
    /// The token index at which parsing resumes.
    pub offset: usize,
}

/// Returns where to resume, or `None` if the input ran out first.
pub fn recover(
    table: &StateTable,
    stack: &[StateId],
    toks: &[Token],
    offset: usize,
) -> Option<PanicResume> {
    for (i, t) in toks.iter().enumerate().skip(offset) {
        for depth in (0..stack.len()).rev() {
            if table.action(stack[depth], t.kind) != Action::Error {
                return Some(PanicResume {
                    stack_len: depth + 1,
                    offset: i,
                });
            }
        }
    }
    None
}
