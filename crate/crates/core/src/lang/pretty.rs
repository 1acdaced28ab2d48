use super::ast::*;

const INDENT: &str = "    ";

pub fn print_module(module: &Module) -> String {
    let mut out = String::new();
    print_block(&module.body, 0, &mut out);
    out
}

fn print_block(body: &[Stmt], level: usize, out: &mut String) {
    for s in body {
        print_stmt(s, level, out);
    }
}

fn print_stmt(s: &Stmt, level: usize, out: &mut String) {
    let pad = INDENT.repeat(level);
    match &s.kind {
        StmtKind::FunctionDef(def) => {
            out.push_str(&format!("{pad}def {}({}):\n", def.name, def.params.join(", ")));
            print_block(&def.body, level + 1, out);
        }
        StmtKind::While { cond, body } => {
            out.push_str(&format!("{pad}while {}:\n", print_expr(cond)));
            print_block(body, level + 1, out);
        }
        StmtKind::If { .. } => print_if(s, &pad, level, "if", out),
        StmtKind::Assign { target, value } => out.push_str(&format!("{pad}{target} = {}\n", print_expr(value))),
        StmtKind::Return(None) => out.push_str(&format!("{pad}return\n")),
        StmtKind::Return(Some(e)) => out.push_str(&format!("{pad}return {}\n", print_expr(e))),
        StmtKind::Expr(e) => out.push_str(&format!("{pad}{}\n", print_expr(e))),
        StmtKind::Pass => out.push_str(&format!("{pad}pass\n")),
    }
}

fn print_if(s: &Stmt, pad: &str, level: usize, keyword: &str, out: &mut String) {
    let StmtKind::If { cond, then, orelse } = &s.kind else { unreachable!() };
    out.push_str(&format!("{pad}{keyword} {}:\n", print_expr(cond)));
    print_block(then, level + 1, out);
    match orelse.as_slice() {
        [] => {}
        [nested] if matches!(nested.kind, StmtKind::If { .. }) => print_if(nested, pad, level, "elif", out),
        _ => {
            out.push_str(&format!("{pad}else:\n"));
            print_block(orelse, level + 1, out);
        }
    }
}

// binding strength, loosest first
const OR: u8 = 1;
const AND: u8 = 2;
const NOT: u8 = 3;
const CMP: u8 = 4;
const ADD: u8 = 5;
const MUL: u8 = 6;
const UNARY: u8 = 7;
const ATOM: u8 = 8;

fn precedence(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::BoolOp { op: BoolOp::Or, .. } => OR,
        ExprKind::BoolOp { op: BoolOp::And, .. } => AND,
        ExprKind::Not(_) => NOT,
        ExprKind::Compare { .. } => CMP,
        ExprKind::BinOp { op: BinOp::Add | BinOp::Sub, .. } => ADD,
        ExprKind::BinOp { .. } => MUL,
        ExprKind::Neg(_) => UNARY,
        ExprKind::Int(v) if *v < 0 => UNARY,
        _ => ATOM,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let text = print_expr(e);
    if precedence(e) < min {
        format!("({text})")
    } else {
        text
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Name(n) => n.clone(),
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Bool(true) => "True".into(),
        ExprKind::Bool(false) => "False".into(),
        ExprKind::NoneLit => "None".into(),
        ExprKind::BinOp { op, lhs, rhs } => {
            let p = precedence(e);
            format!("{} {} {}", wrap(lhs, p), op.symbol(), wrap(rhs, p + 1))
        }
        ExprKind::Compare { op, lhs, rhs } => format!("{} {} {}", wrap(lhs, ADD), op.symbol(), wrap(rhs, ADD)),
        ExprKind::BoolOp { op, lhs, rhs } => {
            let p = precedence(e);
            format!("{} {} {}", wrap(lhs, p), op.symbol(), wrap(rhs, p + 1))
        }
        ExprKind::Not(x) => format!("not {}", wrap(x, NOT)),
        ExprKind::Neg(x) => format!("-{}", wrap(x, UNARY)),
        ExprKind::Call { callee, args } => {
            let args: Vec<String> = args.iter().map(print_expr).collect();
            format!("{}({})", wrap(callee, ATOM), args.join(", "))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse_source;

    #[test]
    fn round_trip_corpus() {
        for src in [include_str!("../../tests/fixtures/variation1.py"), include_str!("../../tests/fixtures/variation2.py")] {
            let (m, _) = parse_source(src).unwrap();
            let printed = m.to_string();
            let (again, _) = parse_source(&printed).unwrap();
            assert_eq!(m.without_lines(), again.without_lines());
        }
    }

    #[test]
    fn parenthesizes_only_when_needed() {
        let (m, _) = parse_source("x = (a - (b - c)) * (d + e) // -(f)\ny = (not a) and (b or c)\n").unwrap();
        assert_eq!(m.to_string(), "x = (a - (b - c)) * (d + e) // -f\ny = not a and (b or c)\n");
    }
}
