//! Call-expression and literal parsing shared by the scenario DSL and
//! the agent action grammar.
//!
//! Call syntax is declarative, not code: `api_name(arg=value, ...)` with
//! JSON-style literals. Patches are `{path: value, ...}` objects whose
//! keys are dotted attribute paths.

use crate::executor::StatePatch;
use crate::registry::ApiCall;
use crate::state::AttrPath;
use crate::value::AttrValue;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

struct Cursor<'a> {
    text: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            text: text.as_bytes(),
            pos: 0,
            line: 1,
        }
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.bump();
        }
    }

    /// Skip spaces and tabs but stop at newlines.
    fn skip_inline_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r')) {
            self.bump();
        }
    }

    fn eat(&mut self, expected: u8) -> Result<(), ParseError> {
        match self.peek() {
            Some(c) if c == expected => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.err(format!(
                "expected `{}`, found `{}`",
                expected as char, c as char
            ))),
            None => Err(self.err(format!("expected `{}`, found end of input", expected as char))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.text.len()
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                self.bump();
            }
            _ => return Err(self.err("expected an identifier")),
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.bump();
        }
        Ok(std::str::from_utf8(&self.text[start..self.pos])
            .expect("identifier bytes are ascii")
            .to_string())
    }

    /// Identifier possibly containing dots (attribute paths).
    fn dotted_ident(&mut self) -> Result<String, ParseError> {
        let mut path = self.ident()?;
        while self.peek() == Some(b'.') {
            self.bump();
            path.push('.');
            path.push_str(&self.ident()?);
        }
        Ok(path)
    }

    fn string_literal(&mut self) -> Result<String, ParseError> {
        let quote = self.bump().expect("caller checked quote");
        let mut out = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => return Ok(out),
                Some(b'\\') => match self.bump() {
                    Some(b'n') => out.push('\n'),
                    Some(b't') => out.push('\t'),
                    Some(c @ (b'"' | b'\'' | b'\\')) => out.push(c as char),
                    Some(c) => {
                        return Err(self.err(format!("unsupported escape `\\{}`", c as char)))
                    }
                    None => return Err(self.err("unterminated string")),
                },
                Some(b'\n') | None => return Err(self.err("unterminated string")),
                Some(c) => out.push(c as char),
            }
        }
    }

    fn number(&mut self) -> Result<AttrValue, ParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some(b'+' | b'-')) {
            self.bump();
        }
        let mut is_real = false;
        while let Some(c) = self.peek() {
            match c {
                b'0'..=b'9' => {
                    self.bump();
                }
                b'.' | b'e' | b'E' => {
                    is_real = true;
                    self.bump();
                    if matches!(self.peek(), Some(b'+' | b'-')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let raw = std::str::from_utf8(&self.text[start..self.pos]).expect("ascii digits");
        if is_real {
            raw.parse::<f64>()
                .map(AttrValue::Real)
                .map_err(|_| self.err(format!("invalid number `{raw}`")))
        } else {
            raw.parse::<i64>()
                .map(AttrValue::Int)
                .map_err(|_| self.err(format!("invalid number `{raw}`")))
        }
    }

    fn literal(&mut self) -> Result<AttrValue, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'"' | b'\'') => Ok(AttrValue::Text(self.string_literal()?)),
            Some(b'[') => {
                self.bump();
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(b']') {
                    self.bump();
                    return Ok(AttrValue::List(items));
                }
                loop {
                    let item = self.literal()?;
                    if matches!(item, AttrValue::List(_)) {
                        return Err(self.err("nested lists are not supported"));
                    }
                    items.push(item);
                    self.skip_ws();
                    match self.peek() {
                        Some(b',') => {
                            self.bump();
                        }
                        Some(b']') => {
                            self.bump();
                            return Ok(AttrValue::List(items));
                        }
                        _ => return Err(self.err("expected `,` or `]` in list")),
                    }
                }
            }
            Some(c) if c.is_ascii_digit() || c == b'-' || c == b'+' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let word = self.ident()?;
                match word.as_str() {
                    "true" => Ok(AttrValue::Bool(true)),
                    "false" => Ok(AttrValue::Bool(false)),
                    "null" => Ok(AttrValue::Null),
                    other => Err(self.err(format!(
                        "unknown literal `{other}` (strings must be quoted)"
                    ))),
                }
            }
            Some(c) => Err(self.err(format!("unexpected character `{}`", c as char))),
            None => Err(self.err("expected a value, found end of input")),
        }
    }

    fn call(&mut self) -> Result<ApiCall, ParseError> {
        self.skip_ws();
        let name = self.ident()?;
        self.skip_inline_ws();
        self.eat(b'(')?;
        let mut args = BTreeMap::new();
        self.skip_ws();
        if self.peek() == Some(b')') {
            self.bump();
            return Ok(ApiCall {
                api_name: name,
                args,
            });
        }
        loop {
            self.skip_ws();
            let arg_name = self.ident()?;
            self.skip_ws();
            self.eat(b'=')?;
            let value = self.literal()?;
            if args.insert(arg_name.clone(), value).is_some() {
                return Err(self.err(format!("duplicate argument `{arg_name}`")));
            }
            self.skip_ws();
            match self.peek() {
                Some(b',') => {
                    self.bump();
                }
                Some(b')') => {
                    self.bump();
                    break;
                }
                _ => return Err(self.err("expected `,` or `)` in argument list")),
            }
        }
        Ok(ApiCall {
            api_name: name,
            args,
        })
    }
}

/// Parse one call expression; the whole input must be consumed.
pub fn parse_call(text: &str) -> Result<ApiCall, ParseError> {
    let mut cursor = Cursor::new(text);
    let call = cursor.call()?;
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.err("trailing characters after call"));
    }
    Ok(call)
}

/// Parse a block of call expressions separated by newlines or `;`.
pub fn parse_call_block(text: &str) -> Result<Vec<ApiCall>, ParseError> {
    let mut cursor = Cursor::new(text);
    let mut calls = Vec::new();
    loop {
        cursor.skip_ws();
        while matches!(cursor.peek(), Some(b';')) {
            cursor.bump();
            cursor.skip_ws();
        }
        if cursor.at_end() {
            break;
        }
        calls.push(cursor.call()?);
        cursor.skip_inline_ws();
        match cursor.peek() {
            None => break,
            Some(b'\n' | b';') => {
                cursor.bump();
            }
            Some(c) => {
                return Err(cursor.err(format!(
                    "expected newline or `;` between calls, found `{}`",
                    c as char
                )))
            }
        }
    }
    Ok(calls)
}

/// Parse a bracketed call list `[a(x=1), b()]`.
pub fn parse_bracketed_calls(text: &str) -> Result<Vec<ApiCall>, ParseError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.eat(b'[')?;
    let mut calls = Vec::new();
    cursor.skip_ws();
    if cursor.peek() == Some(b']') {
        cursor.bump();
    } else {
        loop {
            calls.push(cursor.call()?);
            cursor.skip_ws();
            match cursor.peek() {
                Some(b',') => {
                    cursor.bump();
                }
                Some(b']') => {
                    cursor.bump();
                    break;
                }
                _ => return Err(cursor.err("expected `,` or `]` in call list")),
            }
        }
    }
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.err("trailing characters after call list"));
    }
    Ok(calls)
}

/// Parse a patch object `{path: value, ...}`. Keys are dotted paths,
/// bare or quoted.
pub fn parse_patch(text: &str) -> Result<StatePatch, ParseError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.eat(b'{')?;
    let mut patch = StatePatch::new();
    cursor.skip_ws();
    if cursor.peek() == Some(b'}') {
        cursor.bump();
    } else {
        loop {
            cursor.skip_ws();
            let key = match cursor.peek() {
                Some(b'"' | b'\'') => cursor.string_literal()?,
                _ => cursor.dotted_ident()?,
            };
            cursor.skip_ws();
            cursor.eat(b':')?;
            let value = cursor.literal()?;
            if patch
                .assignments
                .insert(AttrPath(key.clone()), value)
                .is_some()
            {
                return Err(cursor.err(format!("duplicate path `{key}`")));
            }
            cursor.skip_ws();
            match cursor.peek() {
                Some(b',') => {
                    cursor.bump();
                }
                Some(b'}') => {
                    cursor.bump();
                    break;
                }
                _ => return Err(cursor.err("expected `,` or `}` in patch")),
            }
        }
    }
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.err("trailing characters after patch"));
    }
    Ok(patch)
}

/// Parse a device selection `[navigation, "door"]`.
pub fn parse_selection(text: &str) -> Result<Vec<String>, ParseError> {
    let mut cursor = Cursor::new(text);
    cursor.skip_ws();
    cursor.eat(b'[')?;
    let mut devices = Vec::new();
    cursor.skip_ws();
    if cursor.peek() == Some(b']') {
        cursor.bump();
    } else {
        loop {
            cursor.skip_ws();
            let name = match cursor.peek() {
                Some(b'"' | b'\'') => cursor.string_literal()?,
                _ => cursor.ident()?,
            };
            devices.push(name);
            cursor.skip_ws();
            match cursor.peek() {
                Some(b',') => {
                    cursor.bump();
                }
                Some(b']') => {
                    cursor.bump();
                    break;
                }
                _ => return Err(cursor.err("expected `,` or `]` in selection")),
            }
        }
    }
    cursor.skip_ws();
    if !cursor.at_end() {
        return Err(cursor.err("trailing characters after selection"));
    }
    Ok(devices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_calls_with_literals() {
        let call = parse_call(r#"door_lock_switch(switch=true)"#).unwrap();
        assert_eq!(call.api_name, "door_lock_switch");
        assert_eq!(call.args["switch"], AttrValue::Bool(true));

        let call = parse_call(
            r#"navigation_route_start(destination="Shanghai", midway='Nanjing')"#,
        )
        .unwrap();
        assert_eq!(call.args["destination"], AttrValue::text("Shanghai"));
        assert_eq!(call.args["midway"], AttrValue::text("Nanjing"));

        let call = parse_call(r#"radio_frequency_set(value=95.5)"#).unwrap();
        assert_eq!(call.args["value"], AttrValue::Real(95.5));

        let call = parse_call("search_module()").unwrap();
        assert!(call.args.is_empty());
    }

    #[test]
    fn call_block_splits_on_newlines_and_semicolons() {
        let calls = parse_call_block(
            "airConditioner_power_switch(switch=true)\n  airConditioner_temperature_set(value=20); door_status_set(status=\"closed\")",
        )
        .unwrap();
        assert_eq!(calls.len(), 3);
    }

    #[test]
    fn bracketed_calls() {
        let calls =
            parse_bracketed_calls(r#"[door_lock_switch(switch=true), search_module()]"#).unwrap();
        assert_eq!(calls.len(), 2);
        assert!(parse_bracketed_calls("[door_lock_switch(switch=true)] extra").is_err());
    }

    #[test]
    fn patch_object() {
        let patch = parse_patch(
            r#"{environment.volume: 80, "navigation.destination": "Shanghai", navigation.midway: null}"#,
        )
        .unwrap();
        assert_eq!(patch.assignments.len(), 3);
        assert_eq!(
            patch.assignments[&AttrPath::from("environment.volume")],
            AttrValue::Int(80)
        );
        assert_eq!(
            patch.assignments[&AttrPath::from("navigation.midway")],
            AttrValue::Null
        );
    }

    #[test]
    fn selection_list() {
        let devices = parse_selection(r#"[navigation, "door"]"#).unwrap();
        assert_eq!(devices, vec!["navigation", "door"]);
        assert!(parse_selection("[,]").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_call_block("a_b_c(x=1)\nbroken(").unwrap_err();
        assert_eq!(err.line, 2);
        let err = parse_patch("{x.y: }").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn unquoted_strings_rejected() {
        let err = parse_call("door_status_set(status=closed)").unwrap_err();
        assert!(err.message.contains("strings must be quoted"));
    }

    #[test]
    fn list_literals() {
        let call = parse_call(r#"x_y_z(items=["a", "b"])"#).unwrap();
        assert_eq!(
            call.args["items"],
            AttrValue::list_of_texts(["a", "b"])
        );
    }
}
