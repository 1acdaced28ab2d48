use std::collections::BTreeSet;
use std::sync::Arc;

use super::ast::*;
use super::token::{Token, TokenKind};
use super::SyntaxError;

/// Recursive-descent parser over a token stream from [`super::tokenize`].
pub struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
    in_function: bool,
}

type PResult<T> = Result<T, SyntaxError>;

fn unsupported(tok: &Token, what: &str) -> SyntaxError {
    SyntaxError::new(tok.line, tok.col, format!("unsupported construct: {what}"))
}

impl<'a> Parser<'a> {
    pub fn new(tokens: &'a [Token]) -> Self {
        assert!(tokens.last().is_some_and(|t| t.kind == TokenKind::Eof), "token stream must end with EOF");
        Parser { tokens, pos: 0, in_function: false }
    }

    pub fn parse_module(mut self) -> PResult<Module> {
        let mut body = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            body.push(self.statement()?);
        }
        Ok(Module { body })
    }

    fn peek(&self) -> &'a Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &'a Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &'a Token {
        let t = &self.tokens[self.pos];
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, expected: &str) -> SyntaxError {
        let t = self.peek();
        SyntaxError::new(t.line, t.col, format!("expected {expected}, found {t}"))
    }

    fn expect_op(&mut self, op: &str) -> PResult<&'a Token> {
        if self.peek().is_op(op) {
            Ok(self.advance())
        } else {
            Err(self.error_here(&format!("`{op}`")))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind, what: &str) -> PResult<&'a Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error_here(what))
        }
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let tok = self.peek();
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "def" => return self.function_def(),
                "while" => return self.while_stmt(),
                "if" => return self.if_stmt(),
                "elif" | "else" => return Err(SyntaxError::new(tok.line, tok.col, format!("`{}` without matching `if`", tok.text))),
                _ => {}
            }
        }
        if tok.kind == TokenKind::Indent {
            return Err(SyntaxError::new(tok.line, tok.col, "unexpected indent"));
        }
        let stmt = self.simple_statement()?;
        self.expect_kind(TokenKind::Newline, "end of line")?;
        Ok(stmt)
    }

    fn simple_statement(&mut self) -> PResult<Stmt> {
        let tok = self.peek();
        let line = tok.line;
        if tok.kind == TokenKind::Keyword {
            match tok.text.as_str() {
                "return" => {
                    if !self.in_function {
                        return Err(SyntaxError::new(tok.line, tok.col, "'return' outside function"));
                    }
                    self.advance();
                    let value = if self.peek().kind == TokenKind::Newline { None } else { Some(self.expression()?) };
                    return Ok(Stmt { line, kind: StmtKind::Return(value) });
                }
                "pass" => {
                    self.advance();
                    return Ok(Stmt { line, kind: StmtKind::Pass });
                }
                "True" | "False" | "None" | "not" => {}
                other => return Err(unsupported(tok, &format!("`{other}`"))),
            }
        }
        if tok.kind == TokenKind::Name && self.peek_at(1).is_op("=") {
            let target = self.advance().text.clone();
            self.advance();
            let value = self.expression()?;
            return Ok(Stmt { line, kind: StmtKind::Assign { target, value } });
        }
        let expr = self.expression()?;
        let next = self.peek();
        if next.kind == TokenKind::Op {
            match next.text.as_str() {
                "=" => return Err(SyntaxError::new(next.line, next.col, "cannot assign to expression")),
                "+=" | "-=" | "*=" | "//=" | "%=" | "/=" | "**=" => return Err(unsupported(next, "augmented assignment")),
                ";" => return Err(unsupported(next, "multiple statements on one line")),
                _ => {}
            }
        }
        Ok(Stmt { line, kind: StmtKind::Expr(expr) })
    }

    fn suite(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if self.peek().kind != TokenKind::Newline {
            let stmt = self.simple_statement()?;
            self.expect_kind(TokenKind::Newline, "end of line")?;
            return Ok(vec![stmt]);
        }
        self.advance();
        self.expect_kind(TokenKind::Indent, "an indented block")?;
        let mut body = Vec::new();
        while self.peek().kind != TokenKind::Dedent && self.peek().kind != TokenKind::Eof {
            body.push(self.statement()?);
        }
        self.expect_kind(TokenKind::Dedent, "end of block")?;
        Ok(body)
    }

    fn function_def(&mut self) -> PResult<Stmt> {
        let def_tok = self.advance();
        if self.in_function {
            return Err(unsupported(def_tok, "nested function definitions"));
        }
        let name = self.expect_kind(TokenKind::Name, "function name")?.text.clone();
        self.expect_op("(")?;
        let mut params: Vec<String> = Vec::new();
        while !self.peek().is_op(")") {
            let p = self.expect_kind(TokenKind::Name, "parameter name")?;
            if params.contains(&p.text) {
                return Err(SyntaxError::new(p.line, p.col, format!("duplicate argument `{}` in function definition", p.text)));
            }
            if self.peek().is_op("=") {
                return Err(unsupported(self.peek(), "default parameter values"));
            }
            params.push(p.text.clone());
            if !self.peek().is_op(")") {
                self.expect_op(",")?;
            }
        }
        self.expect_op(")")?;
        self.in_function = true;
        let body = self.suite();
        self.in_function = false;
        let body = body?;

        let mut locals: BTreeSet<String> = params.iter().cloned().collect();
        collect_assigned(&body, &mut locals);
        let def = FunctionDef { name, params, body, line: def_tok.line, locals };
        Ok(Stmt { line: def_tok.line, kind: StmtKind::FunctionDef(Arc::new(def)) })
    }

    fn while_stmt(&mut self) -> PResult<Stmt> {
        let line = self.advance().line;
        let cond = self.expression()?;
        let body = self.suite()?;
        if self.peek().is_keyword("else") {
            return Err(unsupported(self.peek(), "`while ... else`"));
        }
        Ok(Stmt { line, kind: StmtKind::While { cond, body } })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let line = self.advance().line;
        let cond = self.expression()?;
        let then = self.suite()?;
        let orelse = if self.peek().is_keyword("elif") {
            vec![self.if_stmt()?]
        } else if self.peek().is_keyword("else") {
            self.advance();
            self.suite()?
        } else {
            Vec::new()
        };
        Ok(Stmt { line, kind: StmtKind::If { cond, then, orelse } })
    }

    pub fn expression(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek().is_keyword("or") {
            let line = self.advance().line;
            let rhs = self.and_expr()?;
            lhs = Expr { line, kind: ExprKind::BoolOp { op: BoolOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.not_expr()?;
        while self.peek().is_keyword("and") {
            let line = self.advance().line;
            let rhs = self.not_expr()?;
            lhs = Expr { line, kind: ExprKind::BoolOp { op: BoolOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
        Ok(lhs)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.peek().is_keyword("not") {
            let line = self.advance().line;
            let inner = self.not_expr()?;
            return Ok(Expr { line, kind: ExprKind::Not(Box::new(inner)) });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let Some(op) = cmp_op(self.peek()) else {
            if self.peek().is_keyword("in") || self.peek().is_keyword("is") {
                return Err(unsupported(self.peek(), &format!("`{}` operator", self.peek().text)));
            }
            return Ok(lhs);
        };
        let line = self.advance().line;
        let rhs = self.additive()?;
        if cmp_op(self.peek()).is_some() {
            return Err(unsupported(self.peek(), "chained comparison"));
        }
        Ok(Expr { line, kind: ExprKind::Compare { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } })
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek().text.as_str() {
                "+" if self.peek().kind == TokenKind::Op => BinOp::Add,
                "-" if self.peek().kind == TokenKind::Op => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let line = self.advance().line;
            let rhs = self.multiplicative()?;
            lhs = Expr { line, kind: ExprKind::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let tok = self.peek();
            let op = match tok.text.as_str() {
                _ if tok.kind != TokenKind::Op => return Ok(lhs),
                "*" => BinOp::Mul,
                "//" => BinOp::FloorDiv,
                "%" => BinOp::Mod,
                "/" => return Err(unsupported(tok, "true division `/` (use `//`)")),
                "@" => return Err(unsupported(tok, "`@` operator")),
                _ => return Ok(lhs),
            };
            let line = self.advance().line;
            let rhs = self.unary()?;
            lhs = Expr { line, kind: ExprKind::BinOp { op, lhs: Box::new(lhs), rhs: Box::new(rhs) } };
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        if tok.is_op("-") {
            let line = self.advance().line;
            let inner = self.unary()?;
            return Ok(Expr { line, kind: ExprKind::Neg(Box::new(inner)) });
        }
        if tok.is_op("+") || tok.is_op("~") {
            return Err(unsupported(tok, &format!("unary `{}`", tok.text)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.atom()?;
        loop {
            let tok = self.peek();
            if tok.is_op("(") {
                let line = self.advance().line;
                let mut args = Vec::new();
                while !self.peek().is_op(")") {
                    args.push(self.expression()?);
                    if self.peek().is_op("=") {
                        return Err(unsupported(self.peek(), "keyword arguments"));
                    }
                    if !self.peek().is_op(")") {
                        self.expect_op(",")?;
                    }
                }
                self.expect_op(")")?;
                expr = Expr { line, kind: ExprKind::Call { callee: Box::new(expr), args } };
            } else if tok.is_op("**") {
                return Err(unsupported(tok, "`**` operator"));
            } else if tok.is_op(".") {
                return Err(unsupported(tok, "attribute access"));
            } else if tok.is_op("[") {
                return Err(unsupported(tok, "subscripts"));
            } else {
                return Ok(expr);
            }
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        let line = tok.line;
        let kind = match tok.kind {
            TokenKind::Name => ExprKind::Name(tok.text.clone()),
            TokenKind::Number => {
                let v = tok
                    .text
                    .parse::<i64>()
                    .map_err(|_| SyntaxError::new(tok.line, tok.col, "integer literal out of 64-bit range"))?;
                ExprKind::Int(v)
            }
            TokenKind::Keyword if tok.text == "True" => ExprKind::Bool(true),
            TokenKind::Keyword if tok.text == "False" => ExprKind::Bool(false),
            TokenKind::Keyword if tok.text == "None" => ExprKind::NoneLit,
            TokenKind::Keyword if tok.text == "lambda" => return Err(unsupported(tok, "`lambda`")),
            TokenKind::Op if tok.text == "(" => {
                self.advance();
                if self.peek().is_op(")") {
                    return Err(unsupported(self.peek(), "tuples"));
                }
                let inner = self.expression()?;
                if self.peek().is_op(",") {
                    return Err(unsupported(self.peek(), "tuples"));
                }
                self.expect_op(")")?;
                return Ok(inner);
            }
            TokenKind::Op if tok.text == "[" => return Err(unsupported(tok, "lists")),
            TokenKind::Op if tok.text == "{" => return Err(unsupported(tok, "dicts and sets")),
            _ => return Err(self.error_here("an expression")),
        };
        self.advance();
        Ok(Expr { line, kind })
    }
}

fn cmp_op(tok: &Token) -> Option<CmpOp> {
    if tok.kind != TokenKind::Op {
        return None;
    }
    Some(match tok.text.as_str() {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        ">" => CmpOp::Gt,
        ">=" => CmpOp::Ge,
        "==" => CmpOp::Eq,
        "!=" => CmpOp::Ne,
        _ => return None,
    })
}

fn collect_assigned(body: &[Stmt], out: &mut BTreeSet<String>) {
    for s in body {
        match &s.kind {
            StmtKind::Assign { target, .. } => {
                out.insert(target.clone());
            }
            StmtKind::While { body, .. } => collect_assigned(body, out),
            StmtKind::If { then, orelse, .. } => {
                collect_assigned(then, out);
                collect_assigned(orelse, out);
            }
            _ => {}
        }
    }
}
