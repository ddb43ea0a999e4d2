use indexmap::IndexMap;

use super::Subject;
use crate::lang::{ClassDecl, ClassTable, Expr};

/// One-step reductions of `e`: replace a node by one of its children, or a
/// block by its body. Listed smallest first.
fn smaller(e: &Expr) -> Vec<Expr> {
    let mut out: Vec<Expr> = children(e).into_iter().cloned().collect();
    match e {
        Expr::Var(_) | Expr::Const(_) => {}
        Expr::Field(r, f) => out.extend(
            smaller(r)
                .into_iter()
                .map(|r| Expr::Field(Box::new(r), f.clone())),
        ),
        Expr::Assign(r, f, v) => {
            out.extend(
                smaller(r)
                    .into_iter()
                    .map(|r| Expr::Assign(Box::new(r), f.clone(), v.clone())),
            );
            out.extend(
                smaller(v)
                    .into_iter()
                    .map(|v| Expr::Assign(r.clone(), f.clone(), Box::new(v))),
            );
        }
        Expr::New(c, args) => {
            for i in 0..args.len() {
                for a in smaller(&args[i]) {
                    let mut args = args.clone();
                    args[i] = a;
                    out.push(Expr::New(c.clone(), args));
                }
            }
        }
        Expr::Call(r, m, args) => {
            out.extend(
                smaller(r)
                    .into_iter()
                    .map(|r| Expr::Call(Box::new(r), m.clone(), args.clone())),
            );
            for i in 0..args.len() {
                for a in smaller(&args[i]) {
                    let mut args = args.clone();
                    args[i] = a;
                    out.push(Expr::Call(r.clone(), m.clone(), args));
                }
            }
        }
        Expr::Block(t, x, i, b) => {
            out.extend(
                smaller(i)
                    .into_iter()
                    .map(|i| Expr::Block(t.clone(), x.clone(), Box::new(i), b.clone())),
            );
            out.extend(
                smaller(b)
                    .into_iter()
                    .map(|b| Expr::Block(t.clone(), x.clone(), i.clone(), Box::new(b))),
            );
        }
    }
    out.sort_by_key(Expr::size);
    out
}

fn children(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Var(_) | Expr::Const(_) => vec![],
        Expr::Field(r, _) => vec![r],
        Expr::Assign(r, _, v) => vec![r, v],
        Expr::New(_, args) => args.iter().collect(),
        Expr::Call(r, _, args) => std::iter::once(&**r).chain(args).collect(),
        Expr::Block(_, _, i, b) => vec![i, b],
    }
}

fn with_body(table: &ClassTable, class: &str, method: usize, body: Expr) -> ClassTable {
    let mut classes: IndexMap<String, ClassDecl> = table
        .classes()
        .map(|c| (c.name.clone(), c.clone()))
        .collect();
    classes.get_mut(class).expect("class").methods[method].body = body;
    ClassTable::new(classes)
}

fn without_method(table: &ClassTable, class: &str, method: usize) -> ClassTable {
    let mut classes: IndexMap<String, ClassDecl> = table
        .classes()
        .map(|c| (c.name.clone(), c.clone()))
        .collect();
    classes
        .get_mut(class)
        .expect("class")
        .methods
        .remove(method);
    ClassTable::new(classes)
}

fn candidates(s: &Subject) -> Vec<Subject> {
    let mut out: Vec<Subject> = smaller(&s.main)
        .into_iter()
        .map(|main| Subject { main, ..s.clone() })
        .collect();
    for c in s.table.classes() {
        for (k, md) in c.methods.iter().enumerate() {
            out.push(Subject {
                table: without_method(&s.table, &c.name, k),
                ..s.clone()
            });
            for body in smaller(&md.body) {
                out.push(Subject {
                    table: with_body(&s.table, &c.name, k, body),
                    ..s.clone()
                });
            }
        }
    }
    out
}

/// Greedily shrink `s` while `fails` keeps holding: drop methods, replace
/// expressions (statements and arguments included) by sub-expressions.
/// `fails` should include the precondition, since candidates need not type.
pub fn shrink(s: &Subject, fails: impl Fn(&Subject) -> bool) -> Subject {
    let mut cur = s.clone();
    'outer: for _ in 0..500 {
        for cand in candidates(&cur) {
            if fails(&cand) {
                cur = cand;
                continue 'outer;
            }
        }
        break;
    }
    cur
}
