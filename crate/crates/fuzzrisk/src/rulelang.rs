//! The rule language: `IF <condition> THEN <output> IS <term> [WITH w]`.
//!
//! Conditions combine `variable IS term` atoms with `AND`, `OR`, `NOT`,
//! and parentheses. Precedence is NOT over AND over OR; AND and OR are
//! left-associative. `IS NOT` is accepted as sugar for a negated atom.
//! Keywords are case-insensitive; identifiers are case-sensitive and
//! match `[A-Za-z_][A-Za-z0-9_]*`. A `#` starts a comment that runs to
//! the end of the line.
//!
//! [`format_rule`] renders a canonical form (uppercase keywords, single
//! spaces, parentheses only where precedence demands them) such that
//! parsing the rendered text reproduces the same tree.

use crate::engine::{FuzzyModel, LinguisticVariable, VarKind};
use std::fmt;
use thiserror::Error;

/// Byte range of a token or node within the rule text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("col {}: unexpected character {found:?}", col + 1)]
    UnexpectedChar { col: usize, found: char },
    #[error("col {}: malformed number {text:?}", col + 1)]
    BadNumber { col: usize, text: String },
    #[error("col {}: expected {expected}, found {found}", col + 1)]
    Unexpected {
        col: usize,
        expected: &'static str,
        found: String,
    },
    #[error("col {}: rule weight must lie in (0, 1], got {weight}", col + 1)]
    BadWeight { col: usize, weight: f64 },
    #[error("rule is empty")]
    Empty,
}

impl ParseError {
    /// Zero-based byte offset of the error within the rule text.
    pub fn position(&self) -> usize {
        match *self {
            ParseError::UnexpectedChar { col, .. }
            | ParseError::BadNumber { col, .. }
            | ParseError::Unexpected { col, .. }
            | ParseError::BadWeight { col, .. } => col,
            ParseError::Empty => 0,
        }
    }
}

#[derive(Debug, Error)]
#[error("line {line}: {source}")]
pub struct RuleFileError {
    /// One-based line number within the file.
    pub line: usize,
    #[source]
    pub source: ParseError,
}

/// Antecedent syntax tree. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub enum Condition {
    Atom {
        variable: String,
        term: String,
        span: Span,
    },
    And {
        left: Box<Condition>,
        right: Box<Condition>,
        span: Span,
    },
    Or {
        left: Box<Condition>,
        right: Box<Condition>,
        span: Span,
    },
    Not {
        inner: Box<Condition>,
        span: Span,
    },
}

impl Condition {
    pub fn span(&self) -> Span {
        match *self {
            Condition::Atom { span, .. }
            | Condition::And { span, .. }
            | Condition::Or { span, .. }
            | Condition::Not { span, .. } => span,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Condition::Or { .. } => 1,
            Condition::And { .. } => 2,
            Condition::Not { .. } => 3,
            Condition::Atom { .. } => 4,
        }
    }
}

impl PartialEq for Condition {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (
                Condition::Atom {
                    variable: v1,
                    term: t1,
                    ..
                },
                Condition::Atom {
                    variable: v2,
                    term: t2,
                    ..
                },
            ) => v1 == v2 && t1 == t2,
            (
                Condition::And {
                    left: l1,
                    right: r1,
                    ..
                },
                Condition::And {
                    left: l2,
                    right: r2,
                    ..
                },
            )
            | (
                Condition::Or {
                    left: l1,
                    right: r1,
                    ..
                },
                Condition::Or {
                    left: l2,
                    right: r2,
                    ..
                },
            ) => l1 == l2 && r1 == r2,
            (Condition::Not { inner: i1, .. }, Condition::Not { inner: i2, .. }) => i1 == i2,
            _ => false,
        }
    }
}

/// Consequent: `variable IS term`.
#[derive(Debug, Clone, PartialEq)]
pub struct Consequent {
    pub variable: String,
    pub term: String,
    pub span: Span,
}

/// A parsed rule. Equality is structural over antecedent, consequent
/// names, and weight; spans and the expert tag are ignored.
#[derive(Debug, Clone)]
pub struct Rule {
    pub antecedent: Condition,
    pub consequent: Consequent,
    /// Rule weight in `(0, 1]`; 1 when no `WITH` clause is present.
    pub weight: f64,
    /// Provenance tag set by expert tooling; not part of the syntax.
    pub expert: Option<String>,
}

impl PartialEq for Rule {
    fn eq(&self, other: &Self) -> bool {
        self.antecedent == other.antecedent
            && self.consequent.variable == other.consequent.variable
            && self.consequent.term == other.consequent.term
            && self.weight == other.weight
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum TokenKind {
    If,
    Then,
    Is,
    And,
    Or,
    Not,
    With,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
enum Lexeme {
    Keyword(TokenKind),
    Ident(String),
    Number(f64),
}

#[derive(Debug, Clone)]
struct Token {
    lexeme: Lexeme,
    span: Span,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b'#' => break, // comment to end of line
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                tokens.push(Token {
                    lexeme: Lexeme::Keyword(TokenKind::LParen),
                    span: Span {
                        start: i,
                        end: i + 1,
                    },
                });
                i += 1;
            }
            b')' => {
                tokens.push(Token {
                    lexeme: Lexeme::Keyword(TokenKind::RParen),
                    span: Span {
                        start: i,
                        end: i + 1,
                    },
                });
                i += 1;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let span = Span { start, end: i };
                let lexeme = match () {
                    _ if word.eq_ignore_ascii_case("if") => Lexeme::Keyword(TokenKind::If),
                    _ if word.eq_ignore_ascii_case("then") => Lexeme::Keyword(TokenKind::Then),
                    _ if word.eq_ignore_ascii_case("is") => Lexeme::Keyword(TokenKind::Is),
                    _ if word.eq_ignore_ascii_case("and") => Lexeme::Keyword(TokenKind::And),
                    _ if word.eq_ignore_ascii_case("or") => Lexeme::Keyword(TokenKind::Or),
                    _ if word.eq_ignore_ascii_case("not") => Lexeme::Keyword(TokenKind::Not),
                    _ if word.eq_ignore_ascii_case("with") => Lexeme::Keyword(TokenKind::With),
                    _ => Lexeme::Ident(word.to_string()),
                };
                tokens.push(Token { lexeme, span });
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                let word = &text[start..i];
                // Grammar form: digits, optionally "." digits.
                let well_formed = match word.split_once('.') {
                    None => !word.is_empty(),
                    Some((int, frac)) => {
                        !int.is_empty()
                            && !frac.is_empty()
                            && int.bytes().all(|b| b.is_ascii_digit())
                            && frac.bytes().all(|b| b.is_ascii_digit())
                    }
                };
                let value: f64 = if well_formed {
                    word.parse().map_err(|_| ParseError::BadNumber {
                        col: start,
                        text: word.to_string(),
                    })?
                } else {
                    return Err(ParseError::BadNumber {
                        col: start,
                        text: word.to_string(),
                    });
                };
                tokens.push(Token {
                    lexeme: Lexeme::Number(value),
                    span: Span { start, end: i },
                });
            }
            _ => {
                // Resolve the full char for the message (non-ASCII safe).
                let found = text[i..].chars().next().unwrap();
                return Err(ParseError::UnexpectedChar { col: i, found });
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next_col(&self) -> usize {
        self.peek().map_or(self.text_len, |t| t.span.start)
    }

    fn found(&self) -> String {
        match self.peek() {
            Some(t) => match &t.lexeme {
                Lexeme::Keyword(k) => match k {
                    TokenKind::If => "IF".into(),
                    TokenKind::Then => "THEN".into(),
                    TokenKind::Is => "IS".into(),
                    TokenKind::And => "AND".into(),
                    TokenKind::Or => "OR".into(),
                    TokenKind::Not => "NOT".into(),
                    TokenKind::With => "WITH".into(),
                    TokenKind::LParen => "\"(\"".into(),
                    TokenKind::RParen => "\")\"".into(),
                },
                Lexeme::Ident(name) => format!("identifier {name:?}"),
                Lexeme::Number(n) => format!("number {n}"),
            },
            None => "end of rule".to_string(),
        }
    }

    fn eat_keyword(&mut self, kind: TokenKind) -> bool {
        if let Some(Token {
            lexeme: Lexeme::Keyword(k),
            ..
        }) = self.peek()
        {
            if *k == kind {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_keyword(&mut self, kind: TokenKind, expected: &'static str) -> Result<Span, ParseError> {
        if let Some(token) = self.peek() {
            if token.lexeme == Lexeme::Keyword(kind) {
                let span = token.span;
                self.pos += 1;
                return Ok(span);
            }
        }
        Err(ParseError::Unexpected {
            col: self.next_col(),
            expected,
            found: self.found(),
        })
    }

    fn expect_ident(&mut self, expected: &'static str) -> Result<(String, Span), ParseError> {
        if let Some(Token {
            lexeme: Lexeme::Ident(name),
            span,
        }) = self.peek()
        {
            let result = (name.clone(), *span);
            self.pos += 1;
            return Ok(result);
        }
        Err(ParseError::Unexpected {
            col: self.next_col(),
            expected,
            found: self.found(),
        })
    }

    fn condition(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.conjunction()?;
        while self.eat_keyword(TokenKind::Or) {
            let right = self.conjunction()?;
            let span = left.span().join(right.span());
            left = Condition::Or {
                left: Box::new(left),
                right: Box::new(right),
                span,
            };
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Condition, ParseError> {
        let mut left = self.unary()?;
        while self.eat_keyword(TokenKind::And) {
            let right = self.unary()?;
            let span = left.span().join(right.span());
            left = Condition::And {
                left: Box::new(left),
                right: Box::new(right),
                span,
            };
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Condition, ParseError> {
        if let Some(token) = self.peek() {
            match token.lexeme {
                Lexeme::Keyword(TokenKind::Not) => {
                    let not_span = token.span;
                    self.pos += 1;
                    let inner = self.unary()?;
                    let span = not_span.join(inner.span());
                    return Ok(Condition::Not {
                        inner: Box::new(inner),
                        span,
                    });
                }
                Lexeme::Keyword(TokenKind::LParen) => {
                    self.pos += 1;
                    let inner = self.condition()?;
                    self.expect_keyword(TokenKind::RParen, "closing parenthesis")?;
                    return Ok(inner);
                }
                _ => {}
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Condition, ParseError> {
        let (variable, var_span) = self.expect_ident("a variable name")?;
        self.expect_keyword(TokenKind::Is, "IS")?;
        // `x IS NOT t` desugars to NOT (x IS t).
        let negated = self.eat_keyword(TokenKind::Not);
        let (term, term_span) = self.expect_ident("a term name")?;
        let span = var_span.join(term_span);
        let atom = Condition::Atom {
            variable,
            term,
            span,
        };
        if negated {
            Ok(Condition::Not {
                inner: Box::new(atom),
                span,
            })
        } else {
            Ok(atom)
        }
    }
}

/// Parses a single rule statement.
pub fn parse(text: &str) -> Result<Rule, ParseError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser {
        tokens: &tokens,
        pos: 0,
        text_len: text.len(),
    };
    p.expect_keyword(TokenKind::If, "IF")?;
    let antecedent = p.condition()?;
    p.expect_keyword(TokenKind::Then, "THEN")?;
    let (variable, var_span) = p.expect_ident("an output variable name")?;
    p.expect_keyword(TokenKind::Is, "IS")?;
    let (term, term_span) = p.expect_ident("an output term name")?;
    let consequent = Consequent {
        variable,
        term,
        span: var_span.join(term_span),
    };
    let mut weight = 1.0;
    if p.eat_keyword(TokenKind::With) {
        let col = p.next_col();
        match p.peek() {
            Some(Token {
                lexeme: Lexeme::Number(value),
                ..
            }) => {
                weight = *value;
                p.pos += 1;
                if !(weight > 0.0 && weight <= 1.0) {
                    return Err(ParseError::BadWeight { col, weight });
                }
            }
            _ => {
                return Err(ParseError::Unexpected {
                    col,
                    expected: "a weight in (0, 1]",
                    found: p.found(),
                })
            }
        }
    }
    if p.peek().is_some() {
        return Err(ParseError::Unexpected {
            col: p.next_col(),
            expected: "end of rule",
            found: p.found(),
        });
    }
    Ok(Rule {
        antecedent,
        consequent,
        weight,
        expert: None,
    })
}

/// Parses a rule file: one rule per non-blank line, `#` comments.
pub fn parse_rule_file(text: &str) -> Result<Vec<Rule>, RuleFileError> {
    let mut rules = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let stripped = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let rule = parse(line).map_err(|source| RuleFileError {
            line: idx + 1,
            source,
        })?;
        rules.push(rule);
    }
    Ok(rules)
}

fn write_condition(out: &mut String, cond: &Condition, min_prec: u8) {
    let prec = cond.precedence();
    let parens = prec < min_prec;
    if parens {
        out.push('(');
    }
    match cond {
        Condition::Atom { variable, term, .. } => {
            out.push_str(variable);
            out.push_str(" IS ");
            out.push_str(term);
        }
        Condition::And { left, right, .. } => {
            // Left-associative: a right-hand child of equal precedence
            // needs parentheses to survive a round trip.
            write_condition(out, left, prec);
            out.push_str(" AND ");
            write_condition(out, right, prec + 1);
        }
        Condition::Or { left, right, .. } => {
            write_condition(out, left, prec);
            out.push_str(" OR ");
            write_condition(out, right, prec + 1);
        }
        Condition::Not { inner, .. } => {
            out.push_str("NOT ");
            write_condition(out, inner, prec);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Renders the canonical text of a condition (minimal parentheses).
pub fn format_condition(cond: &Condition) -> String {
    let mut out = String::new();
    write_condition(&mut out, cond, 0);
    out
}

/// Renders the canonical text of a rule; `parse(format_rule(r))`
/// reproduces `r` up to spans and the expert tag.
pub fn format_rule(rule: &Rule) -> String {
    let mut out = String::from("IF ");
    write_condition(&mut out, &rule.antecedent, 0);
    out.push_str(" THEN ");
    out.push_str(&rule.consequent.variable);
    out.push_str(" IS ");
    out.push_str(&rule.consequent.term);
    if rule.weight != 1.0 {
        out.push_str(" WITH ");
        // Shortest decimal that round-trips; the lexer accepts it back.
        out.push_str(&format!("{}", rule.weight));
    }
    out
}

/// A validation finding for one rule against a model's declarations.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DiagnosticKind {
    UnknownVariable { name: String },
    UnknownTerm { variable: String, term: String },
    /// An output variable used inside the antecedent.
    AntecedentNotInput { name: String },
    /// An input variable used as the consequent.
    ConsequentNotOutput { name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let col = self.span.start + 1;
        match &self.kind {
            DiagnosticKind::UnknownVariable { name } => {
                write!(f, "col {col}: unknown variable {name:?}")
            }
            DiagnosticKind::UnknownTerm { variable, term } => {
                write!(f, "col {col}: variable {variable:?} has no term {term:?}")
            }
            DiagnosticKind::AntecedentNotInput { name } => {
                write!(
                    f,
                    "col {col}: {name:?} is an output variable and cannot appear in a condition"
                )
            }
            DiagnosticKind::ConsequentNotOutput { name } => {
                write!(
                    f,
                    "col {col}: {name:?} is an input variable and cannot be assigned by THEN"
                )
            }
        }
    }
}

fn check_atoms<'a>(
    cond: &Condition,
    lookup: &impl Fn(&str) -> Option<&'a LinguisticVariable>,
    out: &mut Vec<Diagnostic>,
) {
    match cond {
        Condition::Atom {
            variable,
            term,
            span,
        } => match lookup(variable) {
            None => out.push(Diagnostic {
                kind: DiagnosticKind::UnknownVariable {
                    name: variable.clone(),
                },
                span: *span,
            }),
            Some(var) if var.kind() == VarKind::Output => out.push(Diagnostic {
                kind: DiagnosticKind::AntecedentNotInput {
                    name: variable.clone(),
                },
                span: *span,
            }),
            Some(var) => {
                if var.term(term).is_none() {
                    out.push(Diagnostic {
                        kind: DiagnosticKind::UnknownTerm {
                            variable: variable.clone(),
                            term: term.clone(),
                        },
                        span: *span,
                    });
                }
            }
        },
        Condition::And { left, right, .. } | Condition::Or { left, right, .. } => {
            check_atoms(left, lookup, out);
            check_atoms(right, lookup, out);
        }
        Condition::Not { inner, .. } => check_atoms(inner, lookup, out),
    }
}

/// Checks every name in the rule against bare declarations, before a
/// model exists; returns one diagnostic per violation, in source order.
pub fn validate_against(
    rule: &Rule,
    inputs: &[LinguisticVariable],
    outputs: &[LinguisticVariable],
) -> Vec<Diagnostic> {
    let lookup = |name: &str| {
        inputs
            .iter()
            .chain(outputs)
            .find(|v| v.name() == name)
    };
    let mut out = Vec::new();
    check_atoms(&rule.antecedent, &lookup, &mut out);
    let consequent = &rule.consequent;
    match lookup(&consequent.variable) {
        None => out.push(Diagnostic {
            kind: DiagnosticKind::UnknownVariable {
                name: consequent.variable.clone(),
            },
            span: consequent.span,
        }),
        Some(var) if var.kind() == VarKind::Input => out.push(Diagnostic {
            kind: DiagnosticKind::ConsequentNotOutput {
                name: consequent.variable.clone(),
            },
            span: consequent.span,
        }),
        Some(var) => {
            if var.term(&consequent.term).is_none() {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnknownTerm {
                        variable: consequent.variable.clone(),
                        term: consequent.term.clone(),
                    },
                    span: consequent.span,
                });
            }
        }
    }
    out
}

/// Checks every name in the rule against the model's declarations;
/// returns one diagnostic per violation, in source order.
pub fn validate(rule: &Rule, model: &FuzzyModel) -> Vec<Diagnostic> {
    validate_against(rule, model.inputs(), model.outputs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(variable: &str, term: &str) -> Condition {
        Condition::Atom {
            variable: variable.to_string(),
            term: term.to_string(),
            span: Span { start: 0, end: 0 },
        }
    }

    fn and(left: Condition, right: Condition) -> Condition {
        let span = left.span().join(right.span());
        Condition::And {
            left: Box::new(left),
            right: Box::new(right),
            span,
        }
    }

    fn or(left: Condition, right: Condition) -> Condition {
        let span = left.span().join(right.span());
        Condition::Or {
            left: Box::new(left),
            right: Box::new(right),
            span,
        }
    }

    fn not(inner: Condition) -> Condition {
        let span = inner.span();
        Condition::Not {
            inner: Box::new(inner),
            span,
        }
    }

    #[test]
    fn parses_a_two_input_conjunction() {
        let rule = parse("IF hardness IS high AND speed IS low THEN wear IS mild").unwrap();
        assert_eq!(rule.antecedent, and(atom("hardness", "high"), atom("speed", "low")));
        assert_eq!(rule.consequent.variable, "wear");
        assert_eq!(rule.consequent.term, "mild");
        assert_eq!(rule.weight, 1.0);
    }

    #[test]
    fn parses_single_atom_rule() {
        let rule = parse("IF x IS low THEN y IS low").unwrap();
        assert_eq!(rule.antecedent, atom("x", "low"));
        assert_eq!(rule.consequent.variable, "y");
        assert_eq!(rule.consequent.term, "low");
    }

    #[test]
    fn keywords_are_case_insensitive() {
        let a = parse("if x is low then y is low").unwrap();
        let b = parse("IF x IS low THEN y IS low").unwrap();
        let c = parse("If x Is low Then y Is low").unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn identifiers_are_case_sensitive() {
        let a = parse("IF X IS low THEN y IS low").unwrap();
        let b = parse("IF x IS low THEN y IS low").unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn precedence_binds_not_then_and_then_or() {
        let rule = parse("IF a IS p OR b IS q AND NOT c IS r THEN y IS t").unwrap();
        let expected = or(atom("a", "p"), and(atom("b", "q"), not(atom("c", "r"))));
        assert_eq!(rule.antecedent, expected);
    }

    #[test]
    fn and_and_or_are_left_associative() {
        let rule = parse("IF a IS p AND b IS q AND c IS r THEN y IS t").unwrap();
        let expected = and(and(atom("a", "p"), atom("b", "q")), atom("c", "r"));
        assert_eq!(rule.antecedent, expected);

        let rule = parse("IF a IS p OR b IS q OR c IS r THEN y IS t").unwrap();
        let expected = or(or(atom("a", "p"), atom("b", "q")), atom("c", "r"));
        assert_eq!(rule.antecedent, expected);
    }

    #[test]
    fn parentheses_override_precedence() {
        let rule = parse("IF (a IS p OR b IS q) AND c IS r THEN y IS t").unwrap();
        let expected = and(or(atom("a", "p"), atom("b", "q")), atom("c", "r"));
        assert_eq!(rule.antecedent, expected);
    }

    #[test]
    fn is_not_desugars_to_negated_atom() {
        let sugar = parse("IF x IS NOT low THEN y IS high").unwrap();
        let plain = parse("IF NOT x IS low THEN y IS high").unwrap();
        assert_eq!(sugar.antecedent, not(atom("x", "low")));
        assert_eq!(sugar, plain);
    }

    #[test]
    fn double_negation_parses_without_parens() {
        let rule = parse("IF NOT NOT x IS low THEN y IS low").unwrap();
        assert_eq!(rule.antecedent, not(not(atom("x", "low"))));
    }

    #[test]
    fn with_clause_sets_weight() {
        let rule = parse("IF x IS low THEN y IS low WITH 0.75").unwrap();
        assert_eq!(rule.weight, 0.75);
        assert!(parse("IF x IS low THEN y IS low WITH 0").is_err());
        assert!(parse("IF x IS low THEN y IS low WITH 1.5").is_err());
        assert!(parse("IF x IS low THEN y IS low WITH").is_err());
    }

    #[test]
    fn comments_and_whitespace_are_ignored() {
        let rule = parse("IF   x IS low THEN y IS low   # because reasons").unwrap();
        assert_eq!(rule.antecedent, atom("x", "low"));
    }

    #[test]
    fn error_positions_point_at_the_offending_token() {
        let err = parse("IF x IS low THEN y IS").unwrap_err();
        assert_eq!(err.position(), 21);
        let err = parse("IF x low THEN y IS t").unwrap_err();
        assert_eq!(err.position(), 5);
        let err = parse("IF x IS low THEN y IS t extra").unwrap_err();
        assert_eq!(err.position(), 24);
        let err = parse("IF x IS low THEN y IS t WITH 2").unwrap_err();
        assert!(matches!(err, ParseError::BadWeight { .. }));
        let err = parse("IF x ? low THEN y IS t").unwrap_err();
        assert!(matches!(err, ParseError::UnexpectedChar { col: 5, found: '?' }));
    }

    #[test]
    fn rejects_missing_pieces() {
        assert!(parse("").is_err());
        assert!(parse("   # only a comment").is_err());
        assert!(parse("x IS low THEN y IS low").is_err());
        assert!(parse("IF x IS low y IS low").is_err());
        assert!(parse("IF (x IS low THEN y IS low").is_err());
        assert!(parse("IF x IS low THEN y IS low)").is_err());
    }

    #[test]
    fn format_uses_minimal_parentheses() {
        let rule = parse("IF ((a IS p)) OR (b IS q AND NOT (c IS r)) THEN y IS t").unwrap();
        assert_eq!(
            format_rule(&rule),
            "IF a IS p OR b IS q AND NOT c IS r THEN y IS t"
        );
        // Right-nested AND must keep its grouping.
        let rule = parse("IF a IS p AND (b IS q AND c IS r) THEN y IS t").unwrap();
        assert_eq!(
            format_rule(&rule),
            "IF a IS p AND (b IS q AND c IS r) THEN y IS t"
        );
        // OR under AND keeps parentheses; AND under OR drops them.
        let rule = parse("IF (a IS p OR b IS q) AND c IS r THEN y IS t").unwrap();
        assert_eq!(
            format_rule(&rule),
            "IF (a IS p OR b IS q) AND c IS r THEN y IS t"
        );
    }

    #[test]
    fn format_emits_weight_only_when_not_one() {
        let rule = parse("IF x IS low THEN y IS low WITH 0.5").unwrap();
        assert_eq!(format_rule(&rule), "IF x IS low THEN y IS low WITH 0.5");
        let rule = parse("IF x IS low THEN y IS low WITH 1.0").unwrap();
        assert_eq!(format_rule(&rule), "IF x IS low THEN y IS low");
    }

    #[test]
    fn rule_file_parses_lines_and_reports_line_numbers() {
        let text = "# wear model\n\nIF x IS low THEN y IS low\nIF x IS high THEN y IS high # cap\n";
        let rules = parse_rule_file(text).unwrap();
        assert_eq!(rules.len(), 2);

        let err = parse_rule_file("IF x IS low THEN y IS low\nIF broken\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
