use std::fmt;

use serde::Serialize;

use super::SyntaxError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TokenKind {
    Name,
    Number,
    Op,
    Keyword,
    Newline,
    Indent,
    Dedent,
    Eof,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub col: u32,
}

impl Token {
    fn new(kind: TokenKind, text: impl Into<String>, line: u32, col: u32) -> Self {
        Token { kind, text: text.into(), line, col }
    }

    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.is(TokenKind::Op, text)
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Newline => f.write_str("end of line"),
            TokenKind::Indent => f.write_str("indent"),
            TokenKind::Dedent => f.write_str("dedent"),
            TokenKind::Eof => f.write_str("end of input"),
            _ => write!(f, "`{}`", self.text),
        }
    }
}

/// Reserved words. Only some of them are part of the supported subset; the
/// parser reports the rest as unsupported constructs.
pub const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del", "elif",
    "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal", "not", "or",
    "pass", "raise", "return", "try", "while", "with", "yield",
];

// longest first so that `//` wins over `/`
const OPERATORS: &[&str] = &[
    "**=", "//=", "==", "!=", "<=", ">=", "//", "**", "+=", "-=", "*=", "/=", "%=", "->", "+", "-", "*", "/", "%", "<",
    ">", "=", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "@", "&", "|", "^", "~",
];

/// Splits source text into tokens, synthesizing INDENT/DEDENT from leading
/// whitespace. Newlines inside parentheses are ignored.
pub fn tokenize(source: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut tokens = Vec::new();
    let mut indents: Vec<String> = vec![String::new()];
    let mut depth = 0usize;
    let mut last_line = 0u32;
    let mut last_col = 1u32;

    for (idx, raw_line) in source.lines().enumerate() {
        let line_no = idx as u32 + 1;
        let chars: Vec<char> = raw_line.chars().collect();
        let mut i = 0;

        if depth == 0 {
            let indent: String = chars.iter().take_while(|c| **c == ' ' || **c == '\t').collect();
            let rest = &chars[indent.chars().count()..];
            if rest.is_empty() || rest[0] == '#' || rest.iter().all(|c| c.is_whitespace()) {
                continue;
            }
            let col = indent.chars().count() as u32 + 1;
            let top = indents.last().unwrap().clone();
            if indent != top {
                if indent.starts_with(&top) {
                    indents.push(indent.clone());
                    tokens.push(Token::new(TokenKind::Indent, indent.clone(), line_no, 1));
                } else if top.starts_with(&indent) {
                    while indents.last().unwrap().len() > indent.len() {
                        indents.pop();
                        tokens.push(Token::new(TokenKind::Dedent, "", line_no, col));
                    }
                    if *indents.last().unwrap() != indent {
                        return Err(SyntaxError::new(line_no, col, "unindent does not match any outer indentation level"));
                    }
                } else {
                    return Err(SyntaxError::new(line_no, 1, "inconsistent use of tabs and spaces in indentation"));
                }
            }
            i = indent.chars().count();
        }

        while i < chars.len() {
            let c = chars[i];
            let col = i as u32 + 1;
            if c == ' ' || c == '\t' || c == '\r' || c == '\x0c' {
                i += 1;
                continue;
            }
            if c == '#' {
                break;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let kind = if KEYWORDS.contains(&word.as_str()) { TokenKind::Keyword } else { TokenKind::Name };
                tokens.push(Token::new(kind, word, line_no, col));
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == '.' || chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                    return Err(SyntaxError::new(line_no, col, "unsupported construct: only decimal integer literals are allowed"));
                }
                tokens.push(Token::new(TokenKind::Number, chars[start..i].iter().collect::<String>(), line_no, col));
                continue;
            }
            if c == '"' || c == '\'' {
                return Err(SyntaxError::new(line_no, col, "unsupported construct: string literals"));
            }
            if c == '\\' {
                return Err(SyntaxError::new(line_no, col, "unsupported construct: line continuation"));
            }
            let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
            match OPERATORS.iter().find(|op| rest.starts_with(**op)) {
                Some(op) => {
                    match *op {
                        "(" | "[" | "{" => depth += 1,
                        ")" | "]" | "}" => depth = depth.saturating_sub(1),
                        _ => {}
                    }
                    tokens.push(Token::new(TokenKind::Op, *op, line_no, col));
                    i += op.len();
                }
                None => return Err(SyntaxError::new(line_no, col, format!("illegal character {c:?}"))),
            }
        }

        last_line = line_no;
        last_col = chars.len() as u32 + 1;
        if depth == 0 && tokens.last().is_some_and(|t| t.kind != TokenKind::Newline) {
            tokens.push(Token::new(TokenKind::Newline, "", line_no, last_col));
        }
    }

    // an unclosed bracket leaves the last logical line open; the parser then
    // fails at EOF
    if depth == 0 && tokens.last().is_some_and(|t| t.kind != TokenKind::Newline && t.kind != TokenKind::Dedent) {
        tokens.push(Token::new(TokenKind::Newline, "", last_line, last_col));
    }
    let eof_line = last_line.max(1);
    while indents.len() > 1 {
        indents.pop();
        tokens.push(Token::new(TokenKind::Dedent, "", eof_line, last_col));
    }
    tokens.push(Token::new(TokenKind::Eof, "", eof_line, last_col));
    Ok(tokens)
}
