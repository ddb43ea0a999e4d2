use std::fmt::{self, Write};

use super::ast::*;
use super::table::{ClassTable, Program};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(&mut s, self);
        f.write_str(&s)
    }
}

fn write_receiver(out: &mut String, e: &Expr) {
    if matches!(e, Expr::Assign(..)) {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    out.push('(');
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a);
    }
    out.push(')');
}

fn write_stmts(out: &mut String, e: &Expr) {
    match e {
        Expr::Block(ty, x, init, body) => {
            if let Some(t) = ty {
                let _ = write!(out, "{t} {x} = ");
            }
            write_expr(out, init);
            out.push_str("; ");
            write_stmts(out, body);
        }
        other => write_expr(out, other),
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Var(x) => out.push_str(x),
        Expr::Const(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Field(r, fld) => {
            write_receiver(out, r);
            let _ = write!(out, ".{fld}");
        }
        Expr::Assign(r, fld, v) => {
            write_receiver(out, r);
            let _ = write!(out, ".{fld} = ");
            write_expr(out, v);
        }
        Expr::New(c, args) => {
            let _ = write!(out, "new {c}");
            write_args(out, args);
        }
        Expr::Call(r, m, args) => {
            write_receiver(out, r);
            let _ = write!(out, ".{m}");
            write_args(out, args);
        }
        Expr::Block(..) => {
            out.push('{');
            write_stmts(out, e);
            out.push('}');
        }
    }
}

fn write_method(out: &mut String, m: &MethodDecl) {
    let _ = write!(out, "  {} {}", m.ret, m.name);
    match (&m.recv_coeff, m.recv_mod) {
        (Some(c), Modifier::Mut) => {
            let _ = write!(out, "[^{c}]");
        }
        (Some(c), md) => {
            let _ = write!(out, "[{md}^{c}]");
        }
        (None, Modifier::Mut) => {}
        (None, md) => {
            let _ = write!(out, "[{md}]");
        }
    }
    out.push('(');
    for (i, p) in m.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}", p.ty);
        if let Some(c) = &p.coeff {
            let _ = write!(out, "^{c}");
        }
        let _ = write!(out, " {}", p.name);
    }
    out.push_str(") { ");
    write_stmts(out, &m.body);
    out.push_str(" }\n");
}

impl fmt::Display for ClassTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for c in self.classes() {
            let _ = writeln!(out, "class {} {{", c.name);
            for fd in &c.fields {
                let _ = writeln!(out, "  {} {};", fd.ty, fd.name);
            }
            for m in &c.methods {
                write_method(&mut out, m);
            }
            out.push_str("}\n");
        }
        f.write_str(&out)
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{};", self.table)?;
        let mut out = String::new();
        write_stmts(&mut out, &self.main);
        writeln!(f, "{out}")
    }
}
