//! Parser for rules of the form `Q(x, y) <- R(x, z), S(z, y).`

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::ConjunctiveQuery;
use crate::error::{Error, Result};
use crate::relcore::Schema;

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.text[..pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        (line, column)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let (line, column) = self.location(pos);
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn describe_next(&self) -> String {
        match self.peek() {
            Some(c) => alloc::format!("`{c}`"),
            None => "end of input".to_string(),
        }
    }

    fn expect(&mut self, token: &str) -> Result<()> {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error_at(
                self.pos,
                alloc::format!("expected `{token}`, found {}", self.describe_next()),
            ))
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn identifier(&mut self, what: &str) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '"' || c == '\'' || c == '-' || c == '+' => {
                return Err(self.error_at(
                    start,
                    "constants are not supported in queries; use a variable",
                ));
            }
            Some(c) if c.is_alphabetic() || c == '_' => {}
            _ => {
                return Err(self.error_at(
                    start,
                    alloc::format!("expected {what}, found {}", self.describe_next()),
                ))
            }
        }
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn var_list(&mut self) -> Result<Vec<String>> {
        self.expect("(")?;
        let mut vars = Vec::new();
        if self.eat(")") {
            return Ok(vars);
        }
        loop {
            vars.push(self.identifier("a variable")?);
            if self.eat(")") {
                return Ok(vars);
            }
            self.expect(",")?;
        }
    }
}

/// Parses one rule. `:-` is accepted as an alternative to `<-`.
pub fn parse_cq(text: &str) -> Result<ConjunctiveQuery> {
    let mut c = Cursor { text, pos: 0 };
    let name = c.identifier("a query name")?;
    let head = c.var_list()?;
    c.skip_ws();
    if !(c.eat("<-") || c.eat(":-")) {
        return Err(c.error_at(c.pos, alloc::format!("expected `<-`, found {}", c.describe_next())));
    }
    let mut body: Vec<(String, Vec<String>)> = Vec::new();
    let mut atom_starts = Vec::new();
    loop {
        c.skip_ws();
        atom_starts.push(c.pos);
        let relation = c.identifier("a relation name")?;
        let vars = c.var_list()?;
        body.push((relation, vars));
        if c.eat(".") {
            break;
        }
        if !c.eat(",") {
            return Err(c.error_at(
                c.pos,
                alloc::format!("expected `,` or `.`, found {}", c.describe_next()),
            ));
        }
    }
    c.skip_ws();
    if c.pos != text.len() {
        return Err(c.error_at(c.pos, "unexpected input after the terminating `.`"));
    }
    ConjunctiveQuery::new(&name, &head, &body)
}

/// Parses a rule and checks it against a schema.
pub fn parse_cq_with_schema(text: &str, schema: &Schema) -> Result<ConjunctiveQuery> {
    let q = parse_cq(text)?;
    q.check_schema(schema)?;
    Ok(q)
}
