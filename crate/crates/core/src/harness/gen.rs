use std::collections::BTreeSet;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Subject, System};
use crate::algebra::LinkGen;
use crate::interp::{Memory, Object, Value};
use crate::lang::{ClassDecl, ClassTable, Expr, FieldDecl, MethodDecl, Modifier, Param, Pos, Type};
use crate::modifiers::{check_table_mod, combine, subtype, type_configuration_mod, ModMap, Mode};
use crate::sharing::{check_table, type_configuration, CheckError, Judgment};

/// Size knobs for generated programs.
#[derive(Clone, Copy, Debug)]
pub struct GenOptions {
    /// Top-level statements in the main expression.
    pub statements: usize,
    /// Nesting bound for sub-expressions.
    pub depth: usize,
    /// References in the initial memory (at least one per class).
    pub refs: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            statements: 4,
            depth: 3,
            refs: 5,
        }
    }
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn class_name(i: usize) -> String {
    ((b'A' + i as u8) as char).to_string()
}

/// A class table of 2–4 classes with fields only. Fields may point to any
/// class, so memories can be cyclic.
pub fn gen_classes(rng: &mut impl Rng, system: System) -> ClassTable {
    let n = rng.gen_range(2..=4);
    let mut classes = IndexMap::new();
    for i in 0..n {
        let nf = rng.gen_range(1..=3);
        let fields = (0..nf)
            .map(|k| {
                let ty = if rng.gen_bool(0.3) {
                    Type::Int
                } else {
                    let j = if i > 0 && rng.gen_bool(0.6) {
                        rng.gen_range(0..i)
                    } else {
                        rng.gen_range(0..n)
                    };
                    let m = if system == System::Modifiers && rng.gen_bool(0.2) {
                        Modifier::Imm
                    } else {
                        Modifier::Mut
                    };
                    Type::Class(class_name(j), m)
                };
                FieldDecl {
                    ty,
                    name: format!("f{k}"),
                }
            })
            .collect();
        let name = class_name(i);
        classes.insert(
            name.clone(),
            ClassDecl {
                name,
                fields,
                methods: vec![],
                pos: Pos::default(),
            },
        );
    }
    ClassTable::new(classes)
}

/// A memory over `table` with at least `n` references, one per class at
/// least. In modifier mode each reference is `mut` or `imm`, and every field
/// points to a reference of exactly the modifier the field requires.
pub fn gen_memory(
    rng: &mut impl Rng,
    table: &ClassTable,
    system: System,
    n: usize,
) -> (Memory, ModMap) {
    let names: Vec<String> = table.classes().map(|c| c.name.clone()).collect();
    let mut refs: Vec<(String, String, Modifier)> = Vec::new();
    for k in 0..n.max(names.len()) {
        let class = if k < names.len() {
            names[k].clone()
        } else {
            names.choose(rng).expect("classes").clone()
        };
        let m = if system == System::Modifiers && rng.gen_bool(0.3) {
            Modifier::Imm
        } else {
            Modifier::Mut
        };
        refs.push((format!("x{k}"), class, m));
    }
    let mut mem = Memory::new();
    let mut i = 0;
    while i < refs.len() {
        let (r, class, m) = refs[i].clone();
        let mut fields = Vec::new();
        for fd in table.fields(&class).expect("generated class") {
            match &fd.ty {
                Type::Int => fields.push(Value::Int(rng.gen_range(0..10))),
                Type::Class(d, fm) => {
                    let want = combine(*fm, m).expect("mut and imm combine");
                    let candidates: Vec<&String> = refs
                        .iter()
                        .filter(|(_, c, mm)| c == d && *mm == want)
                        .map(|(x, _, _)| x)
                        .collect();
                    let target = match candidates.choose(rng) {
                        Some(x) => (*x).clone(),
                        None => {
                            let x = format!("x{}", refs.len());
                            refs.push((x.clone(), d.clone(), want));
                            x
                        }
                    };
                    fields.push(Value::Ref(target));
                }
            }
        }
        mem.insert(r, Object::new(class, fields));
        i += 1;
    }
    let mods = refs.into_iter().map(|(r, _, m)| (r, m)).collect();
    (mem, mods)
}

type Scope = Vec<(String, Type)>;

struct ExprGen<'r, R: Rng> {
    rng: &'r mut R,
    table: ClassTable,
    system: System,
    fresh: usize,
    /// Methods already accepted, callable from later bodies.
    methods: Vec<(String, MethodDecl)>,
}

impl<R: Rng> ExprGen<'_, R> {
    fn class_types(&self) -> Vec<String> {
        self.table.classes().map(|c| c.name.clone()).collect()
    }

    fn fits(&self, have: &Type, want: &Type) -> bool {
        match self.system {
            System::Sharing => have.erase() == want.erase(),
            System::Modifiers => subtype(have, want),
        }
    }

    fn binder_mod(&mut self) -> Modifier {
        if self.system == System::Sharing {
            return Modifier::Mut;
        }
        *[
            Modifier::Mut,
            Modifier::Mut,
            Modifier::Mut,
            Modifier::Read,
            Modifier::Imm,
            Modifier::Caps,
        ]
        .choose(self.rng)
        .expect("nonempty")
    }

    fn random_type(&mut self, allow_int: bool) -> Type {
        if allow_int && self.rng.gen_bool(0.2) {
            return Type::Int;
        }
        let c = self
            .class_types()
            .choose(self.rng)
            .expect("classes")
            .clone();
        Type::Class(c, self.binder_mod())
    }

    fn var(&mut self, scope: &Scope, want: &Type) -> Option<Expr> {
        let ok: Vec<&String> = scope
            .iter()
            .filter(|(_, t)| self.fits(t, want))
            .map(|(x, _)| x)
            .collect();
        ok.choose(self.rng).map(|x| Expr::var((*x).clone()))
    }

    /// Fields of any class whose declared type matches `want` up to erasure.
    fn fields_of_type(&self, want: &Type) -> Vec<(String, String, Type)> {
        let mut out = Vec::new();
        for c in self.table.classes() {
            for fd in &c.fields {
                if fd.ty.erase() == want.erase() {
                    out.push((c.name.clone(), fd.name.clone(), fd.ty.clone()));
                }
            }
        }
        out
    }

    fn receiver_mod(&self, want: &Type) -> Modifier {
        match want.modifier() {
            Some(m @ (Modifier::Read | Modifier::Imm)) => m,
            _ => Modifier::Mut,
        }
    }

    fn expr(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        if want.is_prim() && (depth == 0 || self.rng.gen_bool(0.4)) {
            return Some(Expr::Const(self.rng.gen_range(0..10)));
        }
        if depth == 0 || self.rng.gen_bool(0.3) {
            if let Some(v) = self.var(scope, want) {
                return Some(v);
            }
            if depth == 0 {
                return None;
            }
        }
        let mut kinds = vec![0u8, 1, 2, 3, 4, 5];
        kinds.shuffle(self.rng);
        for k in kinds {
            let got = match k {
                0 => self.var(scope, want),
                1 => self.field(scope, want, depth),
                2 => self.new_obj(scope, want, depth),
                3 => self.call(scope, want, depth),
                4 => self.assign(scope, want, depth),
                _ => self.block(scope, want, depth),
            };
            if got.is_some() {
                return got;
            }
        }
        None
    }

    fn field(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        let cands = self.fields_of_type(want);
        let (c, f, _) = cands.choose(self.rng)?.clone();
        let recv = Type::Class(c, self.receiver_mod(want));
        let r = self.expr(scope, &recv, depth - 1)?;
        Some(Expr::Field(Box::new(r), f))
    }

    fn new_obj(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        let c = want.class_name()?.to_string();
        let fields = self.table.fields(&c).ok()?.to_vec();
        let mut args = Vec::new();
        for fd in fields {
            args.push(self.expr(scope, &fd.ty, depth - 1)?);
        }
        Some(Expr::New(c, args))
    }

    fn call(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        let cands: Vec<(String, MethodDecl)> = self
            .methods
            .iter()
            .filter(|(_, md)| md.ret.erase() == want.erase())
            .cloned()
            .collect();
        let (c, md) = cands.choose(self.rng)?.clone();
        let r = self.expr(scope, &Type::Class(c, md.recv_mod), depth - 1)?;
        let mut args = Vec::new();
        for p in &md.params {
            args.push(self.expr(scope, &p.ty, depth - 1)?);
        }
        Some(Expr::Call(Box::new(r), md.name.clone(), args))
    }

    fn assign(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        let cands = self.fields_of_type(want);
        let (c, f, fty) = cands.choose(self.rng)?.clone();
        let r = self.expr(scope, &Type::Class(c, Modifier::Mut), depth - 1)?;
        let v = self.expr(scope, &fty, depth - 1)?;
        Some(Expr::Assign(Box::new(r), f, Box::new(v)))
    }

    fn block(&mut self, scope: &Scope, want: &Type, depth: usize) -> Option<Expr> {
        let t = self.random_type(true);
        let init = self.expr(scope, &t, depth - 1)?;
        let x = format!("v{}", self.fresh);
        self.fresh += 1;
        let mut inner = scope.clone();
        inner.push((x.clone(), t.clone()));
        let body = self.expr(&inner, want, depth - 1)?;
        Some(Expr::Block(Some(t), x, Box::new(init), Box::new(body)))
    }

    /// An assignment or call evaluated for its effect.
    fn effect(&mut self, scope: &Scope, depth: usize) -> Option<Expr> {
        let t = self.random_type(true).with_modifier(Modifier::Mut);
        if self.rng.gen_bool(0.5) {
            self.assign(scope, &t, depth)
        } else {
            self.call(scope, &t, depth)
        }
    }

    /// `n` statements (declarations or effects) followed by a final
    /// expression of type `want`.
    fn statements(&mut self, scope: &Scope, want: &Type, n: usize, depth: usize) -> Option<Expr> {
        if n == 0 {
            return self.expr(scope, want, depth);
        }
        if self.rng.gen_bool(0.5) {
            if let Some(eff) = self.effect(scope, depth) {
                let rest = self.statements(scope, want, n - 1, depth)?;
                return Some(Expr::seq(eff, rest));
            }
        }
        let t = self.random_type(true);
        let init = self.expr(scope, &t, depth)?;
        let x = format!("v{}", self.fresh);
        self.fresh += 1;
        let mut inner = scope.clone();
        inner.push((x.clone(), t.clone()));
        let rest = self.statements(&inner, want, n - 1, depth)?;
        Some(Expr::Block(Some(t), x, Box::new(init), Box::new(rest)))
    }

    fn table_checks(&self, table: &ClassTable) -> bool {
        let mut gen = LinkGen::new();
        match self.system {
            System::Sharing => check_table(table, &mut gen).is_ok(),
            System::Modifiers => check_table_mod(table, &mut gen).is_ok(),
        }
    }

    /// Add up to two methods per class. Bodies call only methods accepted
    /// earlier, so the call graph is acyclic. A candidate method is kept
    /// only if the table still checks.
    fn add_methods(&mut self) {
        let names = self.class_types();
        for c in names {
            let count = self.rng.gen_range(0..=2);
            for k in 0..count {
                for _ in 0..4 {
                    let recv_mod = if self.system == System::Modifiers && self.rng.gen_bool(0.3) {
                        Modifier::Read
                    } else {
                        Modifier::Mut
                    };
                    let np = self.rng.gen_range(0..=2);
                    let params: Vec<Param> = (0..np)
                        .map(|i| Param {
                            ty: self.random_type(true),
                            name: format!("p{i}"),
                            coeff: None,
                        })
                        .collect();
                    let ret = self.random_type(true).with_modifier(Modifier::Mut);
                    let mut scope: Scope = vec![("this".into(), Type::Class(c.clone(), recv_mod))];
                    scope.extend(params.iter().map(|p| (p.name.clone(), p.ty.clone())));
                    let Some(body) = self.expr(&scope, &ret, 2) else {
                        continue;
                    };
                    let md = MethodDecl {
                        name: format!("m{k}"),
                        ret,
                        recv_mod,
                        recv_coeff: None,
                        params,
                        body,
                        pos: Pos::default(),
                    };
                    let candidate = with_method(&self.table, &c, md.clone());
                    if self.table_checks(&candidate) {
                        self.table = candidate;
                        self.methods.push((c.clone(), md));
                        break;
                    }
                }
            }
        }
    }
}

fn with_method(table: &ClassTable, class: &str, md: MethodDecl) -> ClassTable {
    let mut classes: IndexMap<String, ClassDecl> = table
        .classes()
        .map(|c| (c.name.clone(), c.clone()))
        .collect();
    classes
        .get_mut(class)
        .expect("class exists")
        .methods
        .push(md);
    ClassTable::new(classes)
}

/// A random configuration: class table with methods, initial memory and a
/// main expression over the memory's references. Not necessarily typed.
pub fn gen_subject(seed: u64, system: System, opts: GenOptions) -> Subject {
    let mut rng = rng_for(seed);
    let table = gen_classes(&mut rng, system);
    let (mem, mods) = gen_memory(&mut rng, &table, system, opts.refs);
    let imm_seeds: BTreeSet<String> = mods
        .iter()
        .filter(|(_, m)| **m == Modifier::Imm)
        .map(|(r, _)| r.clone())
        .collect();
    let scope: Scope = mem
        .iter()
        .map(|(r, o)| (r.clone(), Type::Class(o.class.clone(), mods[r])))
        .collect();
    let mut g = ExprGen {
        rng: &mut rng,
        table,
        system,
        fresh: 0,
        methods: vec![],
    };
    g.add_methods();
    let mut main = None;
    for _ in 0..8 {
        let want = g.random_type(true).with_modifier(Modifier::Mut);
        main = g.statements(&scope, &want, opts.statements, opts.depth);
        if main.is_some() {
            break;
        }
    }
    let main = main.unwrap_or(Expr::Const(0));
    Subject {
        table: g.table,
        main,
        mem,
        imm_seeds,
    }
}

/// Type the initial configuration of `s` under `system`, returning the
/// judgment of its expression part. With modifiers, `expected` is the type
/// the expression is checked against (for instance `caps C`).
pub fn check_subject(
    s: &Subject,
    system: System,
    expected: Option<&Type>,
) -> Result<Judgment, CheckError> {
    let mut gen = LinkGen::new();
    match system {
        System::Sharing => {
            let t = check_table(&s.table, &mut gen)?;
            Ok(type_configuration(&t, &s.main, &s.mem, &mut gen)?.expr)
        }
        System::Modifiers => {
            let t = check_table_mod(&s.table, &mut gen)?;
            let c = type_configuration_mod(
                &t,
                &s.main,
                &s.mem,
                &s.imm_seeds,
                expected,
                Mode::Source,
                &mut gen,
            )?;
            Ok(c.expr)
        }
    }
}

/// Whether the configuration of `s` types under `system`.
pub fn subject_types(s: &Subject, system: System) -> bool {
    check_subject(s, system, None).is_ok()
}

/// The first typed subject from the seed stream `seed, seed + 2⁴⁰, …`,
/// with the number of candidates tried.
pub fn gen_typed_subject(seed: u64, system: System, opts: GenOptions) -> Option<(Subject, usize)> {
    (0..64u64).find_map(|attempt| {
        let s = gen_subject(seed.wrapping_add(attempt << 40), system, opts);
        subject_types(&s, system).then_some((s, attempt as usize + 1))
    })
}
