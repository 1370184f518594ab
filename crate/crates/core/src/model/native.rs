//! The line-oriented native model language.
//!
//! ```text
//! model counter
//! var v0 v1 v2
//! input en
//! init v0=1
//! next v0 := !v0
//! next v1 := v0 ^ v1
//! next v2 := v2 ^ (v0 & v1)
//! ```
//!
//! Precedence, tightest first: `!`, `&`, `^`, `|`, `==`. All binary
//! operators are left-associative. Unparenthesized chains of `&` or `|`
//! become a single n-ary node; `^` and `==` fold left.

use std::collections::HashMap;
use std::fmt::Write;

use super::{ExprId, ExprNode, ExprPool, Model, ModelBuilder, ParseError, ParseErrorKind, VarId, VarKind};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    Xnor,
    Eq,
    Assign,
    LParen,
    RParen,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '$' | '[' | ']')
}

fn tokenize(line_no: usize, line: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let (tok, len) = match c {
            '!' => (Tok::Not, 1),
            '&' => (Tok::And, 1),
            '|' => (Tok::Or, 1),
            '^' => (Tok::Xor, 1),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '=' if chars.get(i + 1) == Some(&'=') => (Tok::Xnor, 2),
            '=' => (Tok::Eq, 1),
            ':' if chars.get(i + 1) == Some(&'=') => (Tok::Assign, 2),
            '0' | '1' if !chars.get(i + 1).is_some_and(|c| is_ident_char(*c)) => {
                (Tok::Const(c == '1'), 1)
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => {
                return Err(ParseError::new(
                    line_no,
                    col,
                    ParseErrorKind::Syntax(format!("unexpected character `{other}`")),
                ))
            }
        };
        out.push(Spanned { tok, col });
        i += len;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Ast {
    Const(bool),
    Name(String, usize),
    Not(Box<Ast>),
    And(Vec<Ast>),
    Or(Vec<Ast>),
    Xor(Box<Ast>, Box<Ast>),
    Xnor(Box<Ast>, Box<Ast>),
}

struct ExprParser<'a> {
    toks: &'a [Spanned],
    pos: usize,
    line: usize,
    end_col: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |s| s.col)
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col(), ParseErrorKind::Syntax(msg.into()))
    }

    fn xnor(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.or()?;
        while self.peek() == Some(&Tok::Xnor) {
            self.pos += 1;
            let rhs = self.or()?;
            lhs = Ast::Xnor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Ast, ParseError> {
        let mut items = vec![self.xor()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            items.push(self.xor()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Ast::Or(items) })
    }

    fn xor(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Xor) {
            self.pos += 1;
            let rhs = self.and()?;
            lhs = Ast::Xor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Ast, ParseError> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Ast::And(items) })
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        let col = self.col();
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(Ast::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Const(b)) => {
                self.pos += 1;
                Ok(Ast::Const(b))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Ast::Name(name, col))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.xnor()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => Err(self.err("expected an operand")),
            None => Err(self.err("unexpected end of expression")),
        }
    }
}

struct NextClause {
    line: usize,
    col: usize,
    target: String,
    body: Ast,
}

fn lower(
    ast: &Ast,
    pool: &mut ExprPool,
    names: &HashMap<String, VarId>,
    line: usize,
) -> Result<ExprId, ParseError> {
    let rec = |a: &Ast, pool: &mut ExprPool| lower(a, pool, names, line);
    Ok(match ast {
        Ast::Const(b) => pool.constant(*b),
        Ast::Name(n, col) => match names.get(n) {
            Some(&v) => pool.var(v),
            None => {
                return Err(ParseError::new(line, *col, ParseErrorKind::Undeclared(n.clone())))
            }
        },
        Ast::Not(c) => {
            let c = rec(c, pool)?;
            pool.not(c)
        }
        Ast::And(cs) => {
            let ids = cs.iter().map(|c| rec(c, pool)).collect::<Result<_, _>>()?;
            pool.and(ids)
        }
        Ast::Or(cs) => {
            let ids = cs.iter().map(|c| rec(c, pool)).collect::<Result<_, _>>()?;
            pool.or(ids)
        }
        Ast::Xor(a, b) => {
            let a = rec(a, pool)?;
            let b = rec(b, pool)?;
            pool.xor(a, b)
        }
        Ast::Xnor(a, b) => {
            let a = rec(a, pool)?;
            let b = rec(b, pool)?;
            pool.xnor(a, b)
        }
    })
}

/// Parses the native model language into a validated [`Model`].
pub fn parse_native(text: &str) -> Result<Model, ParseError> {
    let mut name = String::from("unnamed");
    let mut decls: Vec<(String, VarKind, usize, usize)> = Vec::new();
    let mut inits: Vec<(String, bool, usize, usize)> = Vec::new();
    let mut nexts: Vec<NextClause> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(line, raw)?;
        let Some(first) = toks.first() else { continue };
        let syntax = |col: usize, msg: &str| {
            ParseError::new(line, col, ParseErrorKind::Syntax(msg.to_string()))
        };
        let end_col = raw.chars().count() + 1;
        let keyword = match &first.tok {
            Tok::Ident(k) => k.as_str(),
            _ => return Err(syntax(first.col, "expected a keyword")),
        };
        match keyword {
            "model" => match toks.as_slice() {
                [_, Spanned { tok: Tok::Ident(n), .. }] => name = n.clone(),
                _ => return Err(syntax(first.col, "expected `model <name>`")),
            },
            "var" | "input" => {
                let kind = if keyword == "var" { VarKind::State } else { VarKind::Input };
                if toks.len() < 2 {
                    return Err(syntax(end_col, "expected at least one name"));
                }
                for t in &toks[1..] {
                    match &t.tok {
                        Tok::Ident(n) => decls.push((n.clone(), kind, line, t.col)),
                        _ => return Err(syntax(t.col, "expected a variable name")),
                    }
                }
            }
            "init" => {
                let rest = &toks[1..];
                if rest.is_empty() || rest.len() % 3 != 0 {
                    return Err(syntax(end_col, "expected `init <name>=<0|1> ...`"));
                }
                for chunk in rest.chunks(3) {
                    match (&chunk[0].tok, &chunk[1].tok, &chunk[2].tok) {
                        (Tok::Ident(n), Tok::Eq, Tok::Const(b)) => {
                            inits.push((n.clone(), *b, line, chunk[0].col))
                        }
                        _ => return Err(syntax(chunk[0].col, "expected `<name>=<0|1>`")),
                    }
                }
            }
            "next" => {
                let (target, tcol) = match toks.get(1) {
                    Some(Spanned { tok: Tok::Ident(n), col }) => (n.clone(), *col),
                    Some(t) => return Err(syntax(t.col, "expected a variable name")),
                    None => return Err(syntax(end_col, "expected a variable name")),
                };
                match toks.get(2) {
                    Some(Spanned { tok: Tok::Assign, .. }) => {}
                    Some(t) => return Err(syntax(t.col, "expected `:=`")),
                    None => return Err(syntax(end_col, "expected `:=`")),
                }
                let mut p = ExprParser {
                    toks: &toks[3..],
                    pos: 0,
                    line,
                    end_col,
                };
                let body = p.xnor()?;
                if p.pos != p.toks.len() {
                    return Err(p.err("trailing tokens after expression"));
                }
                nexts.push(NextClause {
                    line,
                    col: tcol,
                    target,
                    body,
                });
            }
            other => {
                return Err(syntax(first.col, &format!("unknown keyword `{other}`")));
            }
        }
    }

    let mut builder = ModelBuilder::new(name);
    let mut names: HashMap<String, VarId> = HashMap::new();
    let mut missing: Vec<(String, usize, usize, VarId)> = Vec::new();
    for (n, kind, line, col) in decls {
        if names.contains_key(&n) {
            return Err(ParseError::new(line, col, ParseErrorKind::Duplicate(n)));
        }
        if kind == VarKind::State {
            missing.push((n.clone(), line, col, names.len()));
        }
        let id = match kind {
            VarKind::State => builder.state(n.clone()),
            VarKind::Input => builder.input(n.clone()),
        };
        names.insert(n, id);
    }
    let mut has_next: HashMap<VarId, ()> = HashMap::new();
    for clause in &nexts {
        let v = *names.get(&clause.target).ok_or_else(|| {
            ParseError::new(clause.line, clause.col, ParseErrorKind::Undeclared(clause.target.clone()))
        })?;
        if builder.kind(v) == VarKind::Input {
            return Err(ParseError::new(
                clause.line,
                clause.col,
                ParseErrorKind::Syntax(format!("`{}` is an input and has no next-state function", clause.target)),
            ));
        }
        if has_next.insert(v, ()).is_some() {
            return Err(ParseError::new(
                clause.line,
                clause.col,
                ParseErrorKind::Duplicate(format!("next {}", clause.target)),
            ));
        }
        let root = lower(&clause.body, builder.pool(), &names, clause.line)?;
        builder.set_next(v, root);
    }
    if let Some((n, line, col, _)) = missing.into_iter().find(|m| !has_next.contains_key(&m.3)) {
        return Err(ParseError::new(line, col, ParseErrorKind::MissingNext(n)));
    }
    for (n, b, line, col) in inits {
        let v = *names
            .get(&n)
            .ok_or_else(|| ParseError::new(line, col, ParseErrorKind::Undeclared(n.clone())))?;
        if builder.kind(v) != VarKind::State {
            return Err(ParseError::new(
                line,
                col,
                ParseErrorKind::Syntax(format!("`{n}` is an input and has no initial value")),
            ));
        }
        builder.set_init(v, b);
    }

    builder
        .build()
        .map_err(|e| ParseError::new(0, 0, ParseErrorKind::Model(e)))
}

// Binding strength used by the printer; higher binds tighter.
fn prec(node: &ExprNode) -> u8 {
    match node {
        ExprNode::Xnor(_) => 0,
        ExprNode::Or(_) => 1,
        ExprNode::Xor(_) => 2,
        ExprNode::And(_) => 3,
        ExprNode::Not(_) | ExprNode::Nand(_) | ExprNode::Nor(_) => 4,
        ExprNode::Const(_) | ExprNode::Var(_) => 5,
        ExprNode::Buff(_) => 5,
    }
}

fn write_expr(m: &Model, id: ExprId, min_prec: u8, out: &mut String) {
    let pool = m.pool();
    let node = pool.get(id);
    if let ExprNode::Buff(c) = node {
        return write_expr(m, *c, min_prec, out);
    }
    let p = prec(node);
    let paren = p < min_prec;
    if paren {
        out.push('(');
    }
    let join = |cs: &[ExprId], op: &str, child_min: u8, out: &mut String| {
        for (i, c) in cs.iter().enumerate() {
            if i > 0 {
                out.push_str(op);
            }
            write_expr(m, *c, child_min, out);
        }
    };
    match node {
        ExprNode::Const(b) => out.push(if *b { '1' } else { '0' }),
        ExprNode::Var(v) => out.push_str(&m.variable(*v).name),
        ExprNode::Not(c) => {
            out.push('!');
            write_expr(m, *c, 4, out);
        }
        // n-ary children of the same operator must stay parenthesized or
        // they would flatten on re-parse
        ExprNode::And(cs) => join(cs, " & ", 4, out),
        ExprNode::Or(cs) => join(cs, " | ", 2, out),
        ExprNode::Nand(cs) => {
            out.push_str("!(");
            join(cs, " & ", 4, out);
            out.push(')');
        }
        ExprNode::Nor(cs) => {
            out.push_str("!(");
            join(cs, " | ", 2, out);
            out.push(')');
        }
        ExprNode::Xor([a, b]) => {
            write_expr(m, *a, 2, out);
            out.push_str(" ^ ");
            write_expr(m, *b, 3, out);
        }
        ExprNode::Xnor([a, b]) => {
            write_expr(m, *a, 0, out);
            out.push_str(" == ");
            write_expr(m, *b, 1, out);
        }
        ExprNode::Buff(_) => unreachable!(),
    }
    if paren {
        out.push(')');
    }
}

/// Renders a model in the native language. Nand/nor print as negated
/// and/or and buffers print as their operand, so those node kinds do not
/// survive a round trip structurally (the function is preserved).
pub fn print_native(m: &Model) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "model {}", m.name());
    let vars = m.variables();
    let mut i = 0;
    while i < vars.len() {
        let kind = vars[i].kind;
        let kw = if kind == VarKind::State { "var" } else { "input" };
        out.push_str(kw);
        while i < vars.len() && vars[i].kind == kind {
            out.push(' ');
            out.push_str(&vars[i].name);
            i += 1;
        }
        out.push('\n');
    }
    let ones: Vec<_> = m.state_vars().filter(|&v| m.init(v)).collect();
    if !ones.is_empty() {
        out.push_str("init");
        for v in ones {
            let _ = write!(out, " {}=1", m.variable(v).name);
        }
        out.push('\n');
    }
    for v in m.state_vars() {
        let _ = write!(out, "next {} := ", m.variable(v).name);
        write_expr(m, m.next(v).expect("state variable"), 0, &mut out);
        out.push('\n');
    }
    out
}
