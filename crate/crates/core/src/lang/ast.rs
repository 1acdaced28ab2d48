use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

pub type Line = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub line: Line,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    FunctionDef(Arc<FunctionDef>),
    While { cond: Expr, body: Vec<Stmt> },
    If { cond: Expr, then: Vec<Stmt>, orelse: Vec<Stmt> },
    Assign { target: String, value: Expr },
    Return(Option<Expr>),
    Expr(Expr),
    Pass,
}

impl StmtKind {
    pub fn name(&self) -> &'static str {
        match self {
            StmtKind::FunctionDef(_) => "def",
            StmtKind::While { .. } => "while",
            StmtKind::If { .. } => "if",
            StmtKind::Assign { .. } => "assign",
            StmtKind::Return(_) => "return",
            StmtKind::Expr(_) => "expr",
            StmtKind::Pass => "pass",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<Stmt>,
    pub line: Line,
    /// Parameters plus every name assigned anywhere in the body.
    pub locals: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub line: Line,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Name(String),
    Int(i64),
    Bool(bool),
    NoneLit,
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Compare { op: CmpOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    BoolOp { op: BoolOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { callee: Box<Expr>, args: Vec<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    FloorDiv,
    Mod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolOp {
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
        }
    }
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

impl BoolOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BoolOp::And => "and",
            BoolOp::Or => "or",
        }
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::pretty::print_module(self))
    }
}

impl Module {
    /// Copy with every line number set to zero, for structural comparison.
    pub fn without_lines(&self) -> Module {
        Module { body: strip_block(&self.body) }
    }
}

fn strip_block(body: &[Stmt]) -> Vec<Stmt> {
    body.iter().map(strip_stmt).collect()
}

fn strip_stmt(s: &Stmt) -> Stmt {
    let kind = match &s.kind {
        StmtKind::FunctionDef(def) => StmtKind::FunctionDef(Arc::new(FunctionDef {
            name: def.name.clone(),
            params: def.params.clone(),
            body: strip_block(&def.body),
            line: 0,
            locals: def.locals.clone(),
        })),
        StmtKind::While { cond, body } => StmtKind::While { cond: strip_expr(cond), body: strip_block(body) },
        StmtKind::If { cond, then, orelse } => {
            StmtKind::If { cond: strip_expr(cond), then: strip_block(then), orelse: strip_block(orelse) }
        }
        StmtKind::Assign { target, value } => StmtKind::Assign { target: target.clone(), value: strip_expr(value) },
        StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(strip_expr)),
        StmtKind::Expr(e) => StmtKind::Expr(strip_expr(e)),
        StmtKind::Pass => StmtKind::Pass,
    };
    Stmt { line: 0, kind }
}

fn strip_expr(e: &Expr) -> Expr {
    let b = |x: &Expr| Box::new(strip_expr(x));
    let kind = match &e.kind {
        ExprKind::BinOp { op, lhs, rhs } => ExprKind::BinOp { op: *op, lhs: b(lhs), rhs: b(rhs) },
        ExprKind::Compare { op, lhs, rhs } => ExprKind::Compare { op: *op, lhs: b(lhs), rhs: b(rhs) },
        ExprKind::BoolOp { op, lhs, rhs } => ExprKind::BoolOp { op: *op, lhs: b(lhs), rhs: b(rhs) },
        ExprKind::Not(x) => ExprKind::Not(b(x)),
        ExprKind::Neg(x) => ExprKind::Neg(b(x)),
        ExprKind::Call { callee, args } => ExprKind::Call { callee: b(callee), args: args.iter().map(strip_expr).collect() },
        other => other.clone(),
    };
    Expr { line: 0, kind }
}
