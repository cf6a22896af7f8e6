//! Sparse sum-of-terms text: `c*x^k + ...` with parenthesised coefficients.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub(crate) struct Term<'a> {
    pub negated: bool,
    /// Coefficient text without a trailing `*`; `None` means 1.
    pub coeff: Option<&'a str>,
    pub exp: usize,
}

/// Removes whitespace.
pub(crate) fn compact(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Splits at top-level `+`/`-`.
fn split_terms<'a>(input: &str, s: &'a str) -> Result<Vec<(bool, &'a str)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut negated = false;
    let bytes = s.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::parse(input, "unbalanced parentheses"));
                }
            }
            b'+' | b'-' if depth == 0 => {
                if i == start {
                    if i == 0 {
                        negated = b == b'-';
                        start = i + 1;
                        continue;
                    }
                    return Err(Error::parse(input, "empty term"));
                }
                out.push((negated, &s[start..i]));
                negated = b == b'-';
                start = i + 1;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(Error::parse(input, "unbalanced parentheses"));
    }
    if start >= s.len() {
        return Err(Error::parse(input, "empty term"));
    }
    out.push((negated, &s[start..]));
    Ok(out)
}

/// Parses `s` (already compacted or not) into terms in the variable `var`.
pub(crate) fn parse_sum(input: &str, var: char) -> Result<Vec<Term<'_>>> {
    if input.chars().any(char::is_whitespace) {
        return Err(Error::parse(input, "internal: expected compacted input"));
    }
    if input.is_empty() {
        return Err(Error::parse(input, "empty expression"));
    }
    split_terms(input, input)?
        .into_iter()
        .map(|(negated, term)| {
            let (coeff, exp) = split_monomial(input, term, var)?;
            Ok(Term {
                negated,
                coeff,
                exp,
            })
        })
        .collect()
}

/// Splits `coeff*var^k` into its coefficient text and exponent.
fn split_monomial<'a>(input: &str, term: &'a str, var: char) -> Result<(Option<&'a str>, usize)> {
    let digits_start = term.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    let (head, exp) = match term[..digits_start].strip_suffix('^') {
        Some(before) if digits_start < term.len() && before.ends_with(var) => {
            let exp = term[digits_start..]
                .parse::<usize>()
                .map_err(|_| Error::parse(input, "exponent out of range"))?;
            (&before[..before.len() - var.len_utf8()], exp)
        }
        Some(_) => return exp0(input, term, var),
        None => match term.strip_suffix(var) {
            Some(stripped) => (stripped, 1),
            None => return exp0(input, term, var),
        },
    };
    let head = head.strip_suffix('*').unwrap_or(head);
    if head.is_empty() {
        Ok((None, exp))
    } else {
        Ok((Some(head), exp))
    }
}

fn exp0<'a>(input: &str, term: &'a str, var: char) -> Result<(Option<&'a str>, usize)> {
    // a term without the variable is a pure coefficient; `var` must not hide inside at top level
    let mut depth = 0;
    for c in term.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            c if c == var && depth == 0 => {
                return Err(Error::parse(input, "malformed monomial"));
            }
            _ => {}
        }
    }
    Ok((Some(term), 0))
}

/// Strips one pair of enclosing parentheses if they wrap the whole string.
pub(crate) fn strip_parens(s: &str) -> &str {
    if s.starts_with('(') && s.ends_with(')') {
        let mut depth = 0;
        for (i, c) in s.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 && i != s.len() - 1 {
                        return s;
                    }
                }
                _ => {}
            }
        }
        &s[1..s.len() - 1]
    } else {
        s
    }
}
