//! Parser for the `.lit` litmus format.
//!
//! ```text
//! name: LB
//! locations: x y
//! thread 1:
//!   a := y
//!   x := 1
//! thread 2:
//!   b := x
//!   y := 1
//! exists (a=1 /\ b=1)
//! expected: reachable
//! ```
//!
//! Statements are one per line (or `;`-separated). `if β then S [else S] fi`,
//! `while β do S od`, `either S or S end` and `loop S end` are accepted and
//! desugared into the core `choice`/`iterate`/`asm` constructors:
//! `while β do S` becomes `(asm β; S)*; asm !β`.
//!
//! The `locations:` line is optional. When absent, an identifier is treated
//! as a shared location iff it is assigned in one thread and mentioned in
//! another (or assigned in several threads); every other identifier is a
//! thread-local register. Declare locations explicitly for single-thread
//! tests that need them.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::ast::*;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, col {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

fn err<T>(line: usize, col: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, col, msg: msg.into() })
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(Val),
    Sym(&'static str),
    Newline,
}

#[derive(Debug, Clone)]
struct SpTok {
    tok: Tok,
    line: usize,
    col: usize,
}

fn strip_comment(line: &str) -> &str {
    let cut = line.find('#').unwrap_or(line.len());
    let cut2 = line.find("//").unwrap_or(line.len());
    &line[..cut.min(cut2)]
}

/// Tokenize statement text spanning several source lines, keeping positions.
fn lex(lines: &[(usize, String)]) -> Result<Vec<SpTok>, ParseError> {
    let mut out = Vec::new();
    for (line_no, text) in lines {
        let bytes = text.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(SpTok {
                    tok: Tok::Ident(text[start..i].to_string()),
                    line: *line_no,
                    col,
                });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                    i += 1;
                }
                let n: Val = text[start..i]
                    .parse()
                    .map_err(|_| ParseError {
                        line: *line_no,
                        col,
                        msg: "integer literal out of range".into(),
                    })?;
                out.push(SpTok { tok: Tok::Int(n), line: *line_no, col });
                continue;
            }
            let two = if i + 1 < bytes.len() { &text[i..i + 2] } else { "" };
            let sym = match two {
                ":=" => Some(":="),
                "!=" => Some("!="),
                "<=" => Some("<="),
                ">=" => Some(">="),
                "==" => Some("=="),
                "/\\" => Some("/\\"),
                "\\/" => Some("\\/"),
                "&&" => Some("&&"),
                "||" => Some("||"),
                _ => None,
            };
            if let Some(s) = sym {
                out.push(SpTok { tok: Tok::Sym(s), line: *line_no, col });
                i += 2;
                continue;
            }
            let sym1 = match c {
                '=' => "=",
                '<' => "<",
                '>' => ">",
                '+' => "+",
                '-' => "-",
                '*' => "*",
                '(' => "(",
                ')' => ")",
                ';' => ";",
                '!' => "!",
                ',' => ",",
                _ => {
                    return err(*line_no, col, format!("unexpected character '{c}'"));
                }
            };
            out.push(SpTok { tok: Tok::Sym(sym1), line: *line_no, col });
            i += 1;
        }
        out.push(SpTok { tok: Tok::Newline, line: *line_no, col: text.len() + 1 });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Statement grammar over tokens (pre-resolution)
// ---------------------------------------------------------------------------

/// Parsed statement before location/register resolution: assignments keep
/// their raw left-hand identifier and expression right-hand side.
#[derive(Debug, Clone)]
enum PStmt {
    Skip,
    Dmb,
    Asm(PBExpr),
    Assign(String, PExpr, usize, usize),
    Seq(Box<PStmt>, Box<PStmt>),
    Choice(Box<PStmt>, Box<PStmt>),
    Iterate(Box<PStmt>),
    If(PBExpr, Box<PStmt>, Option<Box<PStmt>>),
    While(PBExpr, Box<PStmt>),
}

#[derive(Debug, Clone)]
enum PExpr {
    Const(Val),
    Ident(String, usize, usize),
    Bin(BinOp, Box<PExpr>, Box<PExpr>),
}

#[derive(Debug, Clone)]
enum PBExpr {
    Cmp(CmpOp, PExpr, PExpr),
    And(Box<PBExpr>, Box<PBExpr>),
    Or(Box<PBExpr>, Box<PBExpr>),
    Not(Box<PBExpr>),
}

struct P {
    toks: Vec<SpTok>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((0, 0))
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat_sym_text(&mut self, s: &str) -> bool {
        if let Some(Tok::Sym(t)) = self.peek() {
            if *t == s {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if let Some(Tok::Ident(t)) = self.peek() {
            if t == kw {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            let (l, c) = self.here();
            err(l, c, format!("expected '{kw}'"))
        }
    }

    fn skip_seps(&mut self) {
        while matches!(self.peek(), Some(Tok::Newline) | Some(Tok::Sym(";"))) {
            self.pos += 1;
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn starts_item(&self) -> bool {
        match self.peek() {
            Some(Tok::Ident(id)) => {
                !matches!(id.as_str(), "or" | "end" | "fi" | "od" | "else" | "then" | "do")
            }
            _ => false,
        }
    }

    /// seq := item ((';'|NL)+ item)*
    fn parse_seq(&mut self) -> Result<PStmt, ParseError> {
        self.skip_seps();
        let mut items = Vec::new();
        loop {
            if !self.starts_item() {
                break;
            }
            items.push(self.parse_item()?);
            let before = self.pos;
            self.skip_seps();
            if self.pos == before {
                break; // no separator: stop (e.g. before 'fi')
            }
        }
        let (l, c) = self.here();
        let mut it = items.into_iter().rev();
        match it.next() {
            None => err(l, c, "expected a statement"),
            Some(last) => Ok(it.fold(last, |acc, s| PStmt::Seq(Box::new(s), Box::new(acc)))),
        }
    }

    fn parse_item(&mut self) -> Result<PStmt, ParseError> {
        let (l, c) = self.here();
        if self.eat_kw("skip") {
            return Ok(PStmt::Skip);
        }
        if self.eat_kw("dmb") {
            return Ok(PStmt::Dmb);
        }
        if self.eat_kw("asm") {
            let b = self.parse_bexpr()?;
            let _ = (l, c);
            return Ok(PStmt::Asm(b));
        }
        if self.eat_kw("if") {
            let b = self.parse_bexpr()?;
            self.expect_kw("then")?;
            let s1 = self.parse_seq()?;
            let s2 = if self.eat_kw("else") { Some(Box::new(self.parse_seq()?)) } else { None };
            self.expect_kw("fi")?;
            return Ok(PStmt::If(b, Box::new(s1), s2));
        }
        if self.eat_kw("while") {
            let b = self.parse_bexpr()?;
            self.expect_kw("do")?;
            let s = self.parse_seq()?;
            self.expect_kw("od")?;
            return Ok(PStmt::While(b, Box::new(s)));
        }
        if self.eat_kw("either") {
            let s1 = self.parse_seq()?;
            self.expect_kw("or")?;
            let s2 = self.parse_seq()?;
            self.expect_kw("end")?;
            return Ok(PStmt::Choice(Box::new(s1), Box::new(s2)));
        }
        if self.eat_kw("loop") {
            let s = self.parse_seq()?;
            self.expect_kw("end")?;
            return Ok(PStmt::Iterate(Box::new(s)));
        }
        // assignment
        match self.bump() {
            Some(Tok::Ident(id)) => {
                if !self.eat_sym_text(":=") {
                    let (l2, c2) = self.here();
                    return err(l2, c2, "expected ':='");
                }
                let (l2, c2) = self.here();
                if !matches!(self.peek(), Some(Tok::Int(_)) | Some(Tok::Ident(_)) | Some(Tok::Sym("(")))
                {
                    return err(l2, c2, "expected a value after ':='");
                }
                let e = self.parse_expr()?;
                Ok(PStmt::Assign(id, e, l, c))
            }
            _ => err(l, c, "expected a statement"),
        }
    }

    // expr := term (('+'|'-') term)* ; term := factor ('*' factor)*
    fn parse_expr(&mut self) -> Result<PExpr, ParseError> {
        let mut e = self.parse_term()?;
        loop {
            let op = if self.eat_sym_text("+") {
                BinOp::Add
            } else if self.eat_sym_text("-") {
                BinOp::Sub
            } else {
                break;
            };
            let rhs = self.parse_term()?;
            e = PExpr::Bin(op, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_term(&mut self) -> Result<PExpr, ParseError> {
        let mut e = self.parse_factor()?;
        while self.eat_sym_text("*") {
            let rhs = self.parse_factor()?;
            e = PExpr::Bin(BinOp::Mul, Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_factor(&mut self) -> Result<PExpr, ParseError> {
        let (l, c) = self.here();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(PExpr::Const(n)),
            Some(Tok::Ident(id)) => Ok(PExpr::Ident(id, l, c)),
            Some(Tok::Sym("(")) => {
                let e = self.parse_expr()?;
                if !self.eat_sym_text(")") {
                    let (l2, c2) = self.here();
                    return err(l2, c2, "expected ')'");
                }
                Ok(e)
            }
            _ => err(l, c, "expected an expression"),
        }
    }

    // bexpr := band (('\/'|'||') band)*
    fn parse_bexpr(&mut self) -> Result<PBExpr, ParseError> {
        let mut e = self.parse_band()?;
        while self.eat_sym_text("\\/") || self.eat_sym_text("||") {
            let rhs = self.parse_band()?;
            e = PBExpr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_band(&mut self) -> Result<PBExpr, ParseError> {
        let mut e = self.parse_batom()?;
        while self.eat_sym_text("/\\") || self.eat_sym_text("&&") {
            let rhs = self.parse_batom()?;
            e = PBExpr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn parse_batom(&mut self) -> Result<PBExpr, ParseError> {
        if self.eat_sym_text("!") {
            let e = self.parse_batom()?;
            return Ok(PBExpr::Not(Box::new(e)));
        }
        // '(' may open a parenthesized boolean expression or an arithmetic
        // sub-expression of a comparison; try the boolean reading first.
        if matches!(self.peek(), Some(Tok::Sym("("))) {
            let save = self.pos;
            self.pos += 1;
            if let Ok(e) = self.parse_bexpr() {
                if self.eat_sym_text(")") {
                    return Ok(e);
                }
            }
            self.pos = save;
        }
        self.parse_cmp()
    }

    fn parse_cmp(&mut self) -> Result<PBExpr, ParseError> {
        let a = self.parse_expr()?;
        let (l, c) = self.here();
        let (op, swap) = if self.eat_sym_text("=") || self.eat_sym_text("==") {
            (CmpOp::Eq, false)
        } else if self.eat_sym_text("!=") {
            (CmpOp::Ne, false)
        } else if self.eat_sym_text("<=") {
            (CmpOp::Le, false)
        } else if self.eat_sym_text("<") {
            (CmpOp::Lt, false)
        } else if self.eat_sym_text(">=") {
            (CmpOp::Le, true)
        } else if self.eat_sym_text(">") {
            (CmpOp::Lt, true)
        } else {
            return err(l, c, "expected a comparison operator");
        };
        let b = self.parse_expr()?;
        Ok(if swap { PBExpr::Cmp(op, b, a) } else { PBExpr::Cmp(op, a, b) })
    }
}

// ---------------------------------------------------------------------------
// Top level
// ---------------------------------------------------------------------------

struct RawTest {
    name: Option<String>,
    declared_locs: Option<BTreeSet<String>>,
    threads: Vec<(u32, Vec<(usize, String)>, usize)>, // id, body lines, header line
    outcome_line: Option<(usize, String)>,
    expected: Expected,
}

fn split_sections(text: &str) -> Result<RawTest, ParseError> {
    let mut raw = RawTest {
        name: None,
        declared_locs: None,
        threads: Vec::new(),
        outcome_line: None,
        expected: Expected::Unspecified,
    };
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("name:") {
            raw.name = Some(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = line.strip_prefix("locations:") {
            let locs = rest
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.to_string())
                .collect();
            raw.declared_locs = Some(locs);
            continue;
        }
        if let Some(rest) = line.strip_prefix("thread") {
            let rest = rest.trim();
            if let Some(id_text) = rest.strip_suffix(':') {
                let id: u32 = id_text.trim().parse().map_err(|_| ParseError {
                    line: line_no,
                    col: 1,
                    msg: format!("bad thread id '{}'", id_text.trim()),
                })?;
                raw.threads.push((id, Vec::new(), line_no));
                continue;
            }
            return err(line_no, 1, "thread header must end with ':'");
        }
        if line.starts_with("exists") {
            if raw.outcome_line.is_some() {
                return err(line_no, 1, "duplicate 'exists' clause");
            }
            raw.outcome_line = Some((line_no, line.to_string()));
            continue;
        }
        if let Some(rest) = line.strip_prefix("expected:") {
            raw.expected = match rest.trim() {
                "reachable" => Expected::Reachable,
                "unreachable" => Expected::Unreachable,
                other => {
                    return err(line_no, 1, format!("unknown expected verdict '{other}'"));
                }
            };
            continue;
        }
        match raw.threads.last_mut() {
            Some((_, body, _)) => body.push((line_no, line.to_string())),
            None => return err(line_no, 1, "statement outside any thread"),
        }
    }
    Ok(raw)
}

/// Raw identifier usage per thread, for location inference.
fn scan_idents(stmt: &PStmt, assigned: &mut BTreeSet<String>, used: &mut BTreeSet<String>) {
    fn expr_idents(e: &PExpr, used: &mut BTreeSet<String>) {
        match e {
            PExpr::Const(_) => {}
            PExpr::Ident(id, _, _) => {
                used.insert(id.clone());
            }
            PExpr::Bin(_, a, b) => {
                expr_idents(a, used);
                expr_idents(b, used);
            }
        }
    }
    fn bexpr_idents(b: &PBExpr, used: &mut BTreeSet<String>) {
        match b {
            PBExpr::Cmp(_, a, c) => {
                expr_idents(a, used);
                expr_idents(c, used);
            }
            PBExpr::And(a, c) | PBExpr::Or(a, c) => {
                bexpr_idents(a, used);
                bexpr_idents(c, used);
            }
            PBExpr::Not(a) => bexpr_idents(a, used),
        }
    }
    match stmt {
        PStmt::Skip | PStmt::Dmb => {}
        PStmt::Asm(b) => bexpr_idents(b, used),
        PStmt::Assign(id, e, _, _) => {
            assigned.insert(id.clone());
            expr_idents(e, used);
        }
        PStmt::Seq(a, b) | PStmt::Choice(a, b) => {
            scan_idents(a, assigned, used);
            scan_idents(b, assigned, used);
        }
        PStmt::Iterate(a) => scan_idents(a, assigned, used),
        PStmt::If(b, s1, s2) => {
            bexpr_idents(b, used);
            scan_idents(s1, assigned, used);
            if let Some(s2) = s2 {
                scan_idents(s2, assigned, used);
            }
        }
        PStmt::While(b, s) => {
            bexpr_idents(b, used);
            scan_idents(s, assigned, used);
        }
    }
}

struct Resolver<'a> {
    locs: &'a BTreeSet<String>,
}

impl Resolver<'_> {
    fn expr(&self, e: &PExpr) -> Result<Expr, ParseError> {
        match e {
            PExpr::Const(k) => Ok(Expr::Const(*k)),
            PExpr::Ident(id, l, c) => {
                if self.locs.contains(id) {
                    return err(*l, *c, format!("location '{id}' used in an expression; expressions range over registers only"));
                }
                Ok(Expr::Reg(Reg::new(id.clone())))
            }
            PExpr::Bin(op, a, b) => {
                Ok(Expr::Bin(*op, Box::new(self.expr(a)?), Box::new(self.expr(b)?)))
            }
        }
    }

    fn bexpr(&self, b: &PBExpr) -> Result<BExpr, ParseError> {
        match b {
            PBExpr::Cmp(op, a, c) => Ok(BExpr::Cmp(*op, self.expr(a)?, self.expr(c)?)),
            PBExpr::And(a, c) => {
                Ok(BExpr::And(Box::new(self.bexpr(a)?), Box::new(self.bexpr(c)?)))
            }
            PBExpr::Or(a, c) => {
                Ok(BExpr::Or(Box::new(self.bexpr(a)?), Box::new(self.bexpr(c)?)))
            }
            PBExpr::Not(a) => Ok(BExpr::Not(Box::new(self.bexpr(a)?))),
        }
    }

    fn stmt(&self, s: &PStmt) -> Result<Statement, ParseError> {
        match s {
            PStmt::Skip => Ok(Statement::Skip),
            PStmt::Dmb => Ok(Statement::Dmb),
            PStmt::Asm(b) => Ok(Statement::Asm(self.bexpr(b)?)),
            PStmt::Assign(id, e, l, c) => {
                if self.locs.contains(id) {
                    // store: rhs must be a constant or a register
                    match e {
                        PExpr::Const(k) => {
                            Ok(Statement::Store(Loc::new(id.clone()), StoreRv::Const(*k)))
                        }
                        PExpr::Ident(r, rl, rc) => {
                            if self.locs.contains(r) {
                                err(*rl, *rc, "memory-to-memory copy is not a statement; go through a register")
                            } else {
                                Ok(Statement::Store(
                                    Loc::new(id.clone()),
                                    StoreRv::Reg(Reg::new(r.clone())),
                                ))
                            }
                        }
                        PExpr::Bin(..) => err(
                            *l,
                            *c,
                            "a store's value must be a constant or a register",
                        ),
                    }
                } else {
                    match e {
                        PExpr::Ident(r, _, _) if self.locs.contains(r) => {
                            Ok(Statement::Load(Reg::new(id.clone()), Loc::new(r.clone())))
                        }
                        _ => Ok(Statement::RegAssign(Reg::new(id.clone()), self.expr(e)?)),
                    }
                }
            }
            PStmt::Seq(a, b) => Ok(Statement::seq(self.stmt(a)?, self.stmt(b)?)),
            PStmt::Choice(a, b) => Ok(Statement::choice(self.stmt(a)?, self.stmt(b)?)),
            PStmt::Iterate(a) => Ok(Statement::Iterate(Box::new(self.stmt(a)?))),
            PStmt::If(b, s1, s2) => {
                let cond = self.bexpr(b)?;
                let left = Statement::seq(Statement::Asm(cond.clone()), self.stmt(s1)?);
                let right = match s2 {
                    Some(s2) => {
                        Statement::seq(Statement::Asm(cond.negate()), self.stmt(s2)?)
                    }
                    None => Statement::Asm(cond.negate()),
                };
                Ok(Statement::choice(left, right))
            }
            PStmt::While(b, s) => {
                // while β do S  =  (asm β; S)*; asm !β
                let cond = self.bexpr(b)?;
                let body = Statement::seq(Statement::Asm(cond.clone()), self.stmt(s)?);
                Ok(Statement::seq(
                    Statement::Iterate(Box::new(body)),
                    Statement::Asm(cond.negate()),
                ))
            }
        }
    }
}

/// Parse a `.lit` source into a validated [`LitmusTest`].
pub fn parse_litmus(text: &str) -> Result<LitmusTest, ParseError> {
    let raw = split_sections(text)?;
    if raw.threads.is_empty() {
        return err(1, 1, "no threads in test");
    }

    // Parse every thread body into the pre-resolution AST.
    let mut pstmts: Vec<(u32, PStmt, usize)> = Vec::new();
    for (id, body, header_line) in &raw.threads {
        let pstmt = if body.is_empty() {
            PStmt::Skip
        } else {
            let toks = lex(body)?;
            let mut p = P { toks, pos: 0 };
            let s = p.parse_seq()?;
            p.skip_seps();
            if !p.at_end() {
                let (l, c) = p.here();
                return err(l, c, "trailing input after statement");
            }
            s
        };
        pstmts.push((*id, pstmt, *header_line));
    }

    // Thread ids distinct and contiguous 1..n.
    let mut ids: Vec<u32> = pstmts.iter().map(|(id, _, _)| *id).collect();
    ids.sort_unstable();
    for (i, id) in ids.iter().enumerate() {
        if *id != (i + 1) as u32 {
            let (bad, _, line) = &pstmts[0];
            let _ = bad;
            return err(*line, 1, "thread ids must be distinct and contiguous 1..n");
        }
    }
    pstmts.sort_by_key(|(id, _, _)| *id);

    // Determine shared locations.
    let mut per_thread: Vec<(BTreeSet<String>, BTreeSet<String>)> = Vec::new();
    for (_, s, _) in &pstmts {
        let mut assigned = BTreeSet::new();
        let mut used = BTreeSet::new();
        scan_idents(s, &mut assigned, &mut used);
        per_thread.push((assigned, used));
    }
    let locs: BTreeSet<String> = match &raw.declared_locs {
        Some(l) => l.clone(),
        None => {
            let mut inferred = BTreeSet::new();
            for (i, (assigned, _)) in per_thread.iter().enumerate() {
                for id in assigned {
                    let elsewhere = per_thread.iter().enumerate().any(|(j, (a, u))| {
                        j != i && (a.contains(id) || u.contains(id))
                    });
                    if elsewhere {
                        inferred.insert(id.clone());
                    }
                }
            }
            inferred
        }
    };

    // Resolve statements.
    let resolver = Resolver { locs: &locs };
    let mut threads = Vec::new();
    for (id, s, _) in &pstmts {
        threads.push((ThreadId(*id), resolver.stmt(s)?));
    }

    // Register disjointness across threads.
    let mut owner: BTreeMap<Reg, ThreadId> = BTreeMap::new();
    for (tid, s) in &threads {
        for r in s.registers() {
            if let Some(prev) = owner.insert(r.clone(), *tid) {
                if prev != *tid {
                    return err(
                        1,
                        1,
                        format!("register '{r}' used by both thread {prev} and thread {tid}"),
                    );
                }
            }
        }
    }

    // Outcome predicate.
    let (outcome_line_no, outcome_text) = raw
        .outcome_line
        .ok_or(ParseError { line: 1, col: 1, msg: "missing 'exists' clause".into() })?;
    let outcome = parse_outcome(
        outcome_line_no,
        &outcome_text,
        &owner,
        &locs,
    )?;

    let mut locations: BTreeSet<Loc> = locs.iter().map(|s| Loc::new(s.clone())).collect();
    for (_, s) in &threads {
        locations.extend(s.locations());
    }

    Ok(LitmusTest {
        name: raw.name.unwrap_or_else(|| "unnamed".to_string()),
        threads,
        outcome,
        expected: raw.expected,
        locations,
    })
}

fn parse_outcome(
    line_no: usize,
    text: &str,
    regs: &BTreeMap<Reg, ThreadId>,
    locs: &BTreeSet<String>,
) -> Result<OutcomePredicate, ParseError> {
    let rest = text.strip_prefix("exists").unwrap().trim();
    let toks = lex(&[(line_no, rest.to_string())])?;
    let mut p = P { toks, pos: 0 };
    if !p.eat_sym_text("(") {
        let (l, c) = p.here();
        return err(l, c, "expected '(' after 'exists'");
    }
    let mut clauses = Vec::new();
    loop {
        let (l, c) = p.here();
        let id = match p.bump() {
            Some(Tok::Ident(id)) => id,
            _ => return err(l, c, "expected an identifier in outcome"),
        };
        if !(p.eat_sym_text("=") || p.eat_sym_text("==")) {
            let (l2, c2) = p.here();
            return err(l2, c2, "expected '=' in outcome clause");
        }
        let neg = p.eat_sym_text("-");
        let (l3, c3) = p.here();
        let k = match p.bump() {
            Some(Tok::Int(k)) => {
                if neg {
                    -k
                } else {
                    k
                }
            }
            _ => return err(l3, c3, "expected an integer in outcome clause"),
        };
        if locs.contains(&id) {
            clauses.push(OutcomeClause::Mem(Loc::new(id), k));
        } else if regs.contains_key(&Reg::new(id.clone())) {
            clauses.push(OutcomeClause::Reg(Reg::new(id), k));
        } else {
            return err(l, c, format!("unknown identifier '{id}' in outcome"));
        }
        if p.eat_sym_text("/\\") || p.eat_sym_text("&&") {
            continue;
        }
        break;
    }
    if !p.eat_sym_text(")") {
        let (l, c) = p.here();
        return err(l, c, "expected ')' closing the outcome");
    }
    Ok(OutcomePredicate { clauses })
}

// ---------------------------------------------------------------------------
// Pretty printer (canonical form; parse ∘ pretty is the identity on the AST)
// ---------------------------------------------------------------------------

pub fn pretty(test: &LitmusTest) -> String {
    let mut out = String::new();
    out.push_str(&format!("name: {}\n", test.name));
    if !test.locations.is_empty() {
        let names: Vec<&str> = test.locations.iter().map(|l| l.0.as_str()).collect();
        out.push_str(&format!("locations: {}\n", names.join(" ")));
    }
    for (tid, s) in &test.threads {
        out.push_str(&format!("thread {}:\n", tid));
        pretty_stmt(s, 1, &mut out);
    }
    out.push_str(&format!("exists ({})\n", test.outcome));
    match test.expected {
        Expected::Reachable => out.push_str("expected: reachable\n"),
        Expected::Unreachable => out.push_str("expected: unreachable\n"),
        Expected::Unspecified => {}
    }
    out
}

fn indent(n: usize, out: &mut String) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

fn pretty_stmt(s: &Statement, depth: usize, out: &mut String) {
    match s {
        Statement::Seq(a, b) => {
            pretty_stmt(a, depth, out);
            pretty_stmt(b, depth, out);
        }
        Statement::Skip => {
            indent(depth, out);
            out.push_str("skip\n");
        }
        Statement::Dmb => {
            indent(depth, out);
            out.push_str("dmb\n");
        }
        Statement::Load(a, x) => {
            indent(depth, out);
            out.push_str(&format!("{a} := {x}\n"));
        }
        Statement::Store(x, rv) => {
            indent(depth, out);
            out.push_str(&format!("{x} := {rv}\n"));
        }
        Statement::RegAssign(a, e) => {
            indent(depth, out);
            out.push_str(&format!("{a} := {e}\n"));
        }
        Statement::Asm(b) => {
            indent(depth, out);
            out.push_str(&format!("asm {b}\n"));
        }
        Statement::Choice(a, b) => {
            indent(depth, out);
            out.push_str("either\n");
            pretty_stmt(a, depth + 1, out);
            indent(depth, out);
            out.push_str("or\n");
            pretty_stmt(b, depth + 1, out);
            indent(depth, out);
            out.push_str("end\n");
        }
        Statement::Iterate(a) => {
            indent(depth, out);
            out.push_str("loop\n");
            pretty_stmt(a, depth + 1, out);
            indent(depth, out);
            out.push_str("end\n");
        }
    }
}
