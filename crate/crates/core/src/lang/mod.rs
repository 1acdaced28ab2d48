//! Tokenizer and parser for the supported Python subset.

pub mod ast;
pub mod parser;
pub mod pretty;
pub mod token;

use std::collections::{BTreeMap, BTreeSet};

pub use ast::{Line, Module, Stmt, StmtKind};
pub use token::{tokenize, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}:{col}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl SyntaxError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        SyntaxError { line, col, message: message.into() }
    }
}

/// Which source lines carry a statement, and the outermost statement on each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LineTable {
    pub executable: BTreeSet<Line>,
    pub statement_at: BTreeMap<Line, Stmt>,
}

impl LineTable {
    pub fn build(module: &Module) -> Self {
        let mut table = LineTable::default();
        table.visit(&module.body);
        table
    }

    fn visit(&mut self, body: &[Stmt]) {
        for s in body {
            self.executable.insert(s.line);
            self.statement_at.entry(s.line).or_insert_with(|| s.clone());
            match &s.kind {
                StmtKind::FunctionDef(def) => self.visit(&def.body),
                StmtKind::While { body, .. } => self.visit(body),
                StmtKind::If { then, orelse, .. } => {
                    self.visit(then);
                    self.visit(orelse);
                }
                _ => {}
            }
        }
    }

    pub fn is_executable(&self, line: Line) -> bool {
        self.executable.contains(&line)
    }
}

pub fn parse(tokens: &[Token]) -> Result<(Module, LineTable), SyntaxError> {
    let module = parser::Parser::new(tokens).parse_module()?;
    let table = LineTable::build(&module);
    Ok((module, table))
}

pub fn parse_source(source: &str) -> Result<(Module, LineTable), SyntaxError> {
    parse(&tokenize(source)?)
}

#[cfg(test)]
mod tests {
    use super::ast::*;
    use super::*;

    const VARIATION_1: &str = include_str!("../../tests/fixtures/variation1.py");
    const VARIATION_2: &str = include_str!("../../tests/fixtures/variation2.py");

    #[test]
    fn variation_one_shape() {
        let (m, table) = parse_source(VARIATION_1).unwrap();
        let defs: Vec<_> = m
            .body
            .iter()
            .filter_map(|s| match &s.kind {
                StmtKind::FunctionDef(d) => Some(d.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(defs.len(), 3);
        assert_eq!(defs[0].name, "accumulate");
        assert_eq!(defs[0].params, ["combiner", "base", "n", "term"]);
        assert!(defs[0].locals.contains("total") && defs[0].locals.contains("i"));
        assert!(matches!(m.body.last().unwrap().kind, StmtKind::Expr(_)));
        assert_eq!(m.body.len(), 4);
        assert_eq!(table.executable.iter().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4, 5, 6, 7, 9, 10, 12, 13, 15]);
    }

    #[test]
    fn variation_two_while_condition() {
        let (m, _) = parse_source(VARIATION_2).unwrap();
        let StmtKind::FunctionDef(def) = &m.body[0].kind else { panic!() };
        let StmtKind::While { cond, .. } = &def.body[1].kind else { panic!() };
        let ExprKind::Not(inner) = &cond.kind else { panic!("{cond:?}") };
        let ExprKind::Call { callee, args } = &inner.kind else { panic!() };
        assert_eq!(callee.kind, ExprKind::Name("stop_fn".into()));
        assert_eq!(args.len(), 1);
        assert_eq!(args[0].kind, ExprKind::Name("value".into()));
    }

    #[test]
    fn unclosed_paren_fails_at_eof() {
        let err = parse_source("x = (").unwrap_err();
        assert!(err.message.contains("end of input"), "{err}");
        assert_eq!(err.line, 1);
    }

    #[test]
    fn precedence() {
        let (m, _) = parse_source("x = not a == b + c * -d or e and f\n").unwrap();
        let StmtKind::Assign { value, .. } = &m.body[0].kind else { panic!() };
        let ExprKind::BoolOp { op: BoolOp::Or, lhs, rhs } = &value.kind else { panic!() };
        assert!(matches!(rhs.kind, ExprKind::BoolOp { op: BoolOp::And, .. }));
        let ExprKind::Not(cmp) = &lhs.kind else { panic!() };
        let ExprKind::Compare { op: CmpOp::Eq, rhs: sum, .. } = &cmp.kind else { panic!() };
        let ExprKind::BinOp { op: BinOp::Add, rhs: prod, .. } = &sum.kind else { panic!() };
        let ExprKind::BinOp { op: BinOp::Mul, rhs: neg, .. } = &prod.kind else { panic!() };
        assert!(matches!(neg.kind, ExprKind::Neg(_)));
    }

    #[test]
    fn elif_nests() {
        let (m, table) = parse_source("if a:\n    x = 1\nelif b:\n    x = 2\nelse:\n    x = 3\n").unwrap();
        let StmtKind::If { orelse, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(orelse.len(), 1);
        assert_eq!(orelse[0].line, 3);
        assert!(matches!(orelse[0].kind, StmtKind::If { .. }));
        assert!(!table.is_executable(5));
    }

    #[test]
    fn inline_suites() {
        let (m, table) = parse_source("while 1 == 1: x = 1\n").unwrap();
        let StmtKind::While { body, .. } = &m.body[0].kind else { panic!() };
        assert_eq!(body[0].line, 1);
        assert_eq!(table.statement_at[&1].kind.name(), "while");
    }

    #[test]
    fn unsupported_constructs() {
        let cases = [
            ("x = a / b\n", "division"),
            ("x = a ** 2\n", "**"),
            ("x = [1]\n", "lists"),
            ("for i in x:\n    pass\n", "for"),
            ("class A:\n    pass\n", "class"),
            ("import os\n", "import"),
            ("x += 1\n", "augmented"),
            ("f(a=1)\n", "keyword"),
            ("def f():\n    def g():\n        pass\n", "nested"),
            ("x = 'a'\n", "string"),
            ("x = a < b < c\n", "chained"),
        ];
        for (src, needle) in cases {
            let err = parse_source(src).unwrap_err();
            assert!(err.message.contains(needle), "{src:?}: {err}");
        }
    }

    #[test]
    fn other_errors() {
        assert!(parse_source("return 1\n").unwrap_err().message.contains("outside function"));
        assert!(parse_source("x = 99999999999999999999\n").unwrap_err().message.contains("range"));
        assert!(parse_source("def f(a, a):\n    pass\n").unwrap_err().message.contains("duplicate"));
        assert!(parse_source("if x:\nx = 1\n").unwrap_err().message.contains("indented block"));
        assert!(parse_source("f(1) = 2\n").unwrap_err().message.contains("assign"));
        let err = parse_source("x = 1 +\n").unwrap_err();
        assert_eq!((err.line, err.col), (1, 8));
    }
}
