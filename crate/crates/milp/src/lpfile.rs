//! CPLEX-style LP text format: writer, a reader for the subset the writer
//! emits (plus common variations), and the `name value` solution listing
//! used to bring results back from an external solver.
//!
//! Names outside `[A-Za-z0-9_]` are escaped as `.hh` per byte; a leading
//! non-letter is always escaped, and a mangled name that would start with
//! `.` gets a `_` prefix. The scheme is reversible.

use std::fmt::Write as _;
use std::time::Duration;

use crate::error::LpFileError;
use crate::model::{MilpModel, Sense, VarKind};
use crate::solution::{MipSolution, SolveStatus};

const LINE_WIDTH: usize = 100;

pub fn mangle(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, b) in name.bytes().enumerate() {
        let keep = if i == 0 {
            b.is_ascii_alphabetic()
        } else {
            b.is_ascii_alphanumeric() || b == b'_'
        };
        if keep {
            out.push(b as char);
        } else {
            let _ = write!(out, ".{b:02x}");
        }
    }
    if out.starts_with('.') {
        out.insert(0, '_');
    }
    out
}

pub fn demangle(name: &str) -> Option<String> {
    let body = name.strip_prefix('_').unwrap_or(name);
    let bytes = body.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'.' {
            let hex = body.get(i + 1..i + 3)?;
            out.push(u8::from_str_radix(hex, 16).ok()?);
            i += 3;
        } else {
            out.push(bytes[i]);
            i += 1;
        }
    }
    String::from_utf8(out).ok()
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn write_expr(out: &mut String, indent: usize, terms: impl Iterator<Item = (f64, String)>) {
    let mut line_len = indent;
    let mut first = true;
    for (coef, name) in terms {
        let sign = if coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        let piece = if mag == 1.0 {
            format!("{sign} {name}")
        } else {
            format!("{sign} {} {name}", fmt_num(mag))
        };
        let piece = if first && coef >= 0.0 {
            piece[2..].to_string()
        } else {
            piece
        };
        if !first && line_len + piece.len() + 1 > LINE_WIDTH {
            out.push('\n');
            out.push_str(&" ".repeat(indent));
            line_len = indent;
        } else if !first {
            out.push(' ');
            line_len += 1;
        }
        line_len += piece.len();
        out.push_str(&piece);
        first = false;
    }
    if first {
        out.push('0');
    }
}

/// Renders `model` in LP format.
pub fn export_lp_file(model: &MilpModel) -> String {
    let names: Vec<String> = model.vars().iter().map(|v| mangle(&v.name)).collect();
    let mut out = String::new();
    out.push_str("\\ generated by vnfpr-milp\n");
    out.push_str("Minimize\n obj: ");
    let obj = model.objective();
    let terms = obj
        .coefs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(j, &c)| (c, names[j].clone()));
    write_expr(&mut out, 6, terms);
    if obj.constant != 0.0 {
        let sign = if obj.constant < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", fmt_num(obj.constant.abs()));
    }
    out.push_str("\nSubject To\n");
    for (i, c) in model.constraints().iter().enumerate() {
        let label = if c.name.is_empty() {
            format!("c{i}")
        } else {
            mangle(&c.name)
        };
        let _ = write!(out, " {label}: ");
        let indent = label.len() + 3;
        write_expr(&mut out, indent, c.terms.iter().map(|&(v, a)| (a, names[v.0].clone())));
        let _ = writeln!(out, " {} {}", c.sense, fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (v, name) in model.vars().iter().zip(&names) {
        if v.kind == VarKind::Binary {
            continue;
        }
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {name} = {}", fmt_num(v.lower));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", fmt_num(v.lower), fmt_num(v.upper));
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " {name} >= {}", fmt_num(v.lower));
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", fmt_num(v.upper));
            }
        }
    }
    let generals: Vec<&String> = model
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Integer)
        .map(|(_, n)| n)
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for n in generals {
            let _ = writeln!(out, " {n}");
        }
    }
    let binaries: Vec<(&String, f64, f64)> = model
        .vars()
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(v, n)| (n, v.lower, v.upper))
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for (n, _, _) in &binaries {
            let _ = writeln!(out, " {n}");
        }
    }
    // Binaries with tightened bounds need them restated after the section.
    let fixed: Vec<_> = binaries.iter().filter(|b| b.1 > 0.0 || b.2 < 1.0).collect();
    if !fixed.is_empty() {
        out.push_str("Bounds\n");
        for (n, l, u) in fixed {
            let _ = writeln!(out, " {} <= {n} <= {}", fmt_num(*l), fmt_num(*u));
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    Some(match l.as_str() {
        "minimize" | "minimise" | "min" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." => Section::Constraints,
        "bounds" | "bound" => Section::Bounds,
        "generals" | "general" | "gen" | "integers" => Section::Generals,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "end" => Section::End,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Op(char),
    Cmp(Sense),
    Colon,
}

fn tokenize(s: &str, line: usize) -> Result<Vec<Tok>, LpFileError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    while i < b.len() {
        let c = b[i] as char;
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' || c == '-' {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == ':' {
            out.push(Tok::Colon);
            i += 1;
        } else if c == '<' || c == '>' || c == '=' {
            let mut j = i + 1;
            if j < b.len() && (b[j] == b'=' || b[j] == b'<' || b[j] == b'>') {
                j += 1;
            }
            let op = &s[i..j];
            let sense = match op {
                "<" | "<=" | "=<" => Sense::Le,
                ">" | ">=" | "=>" => Sense::Ge,
                "=" | "==" => Sense::Eq,
                _ => {
                    return Err(LpFileError::Syntax {
                        line,
                        msg: format!("bad operator `{op}`"),
                    })
                }
            };
            out.push(Tok::Cmp(sense));
            i = j;
        } else if c.is_ascii_digit() || c == '.' && b.get(i + 1).is_some_and(|d| d.is_ascii_digit()) {
            let mut j = i;
            while j < b.len() {
                let d = b[j] as char;
                let exp_sign = (d == '+' || d == '-') && j > i && matches!(b[j - 1], b'e' | b'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    j += 1;
                } else {
                    break;
                }
            }
            let v: f64 = s[i..j].parse().map_err(|_| LpFileError::Syntax {
                line,
                msg: format!("bad number `{}`", &s[i..j]),
            })?;
            out.push(Tok::Num(v));
            i = j;
        } else {
            let mut j = i;
            while j < b.len() {
                let d = b[j] as char;
                if d.is_whitespace() || matches!(d, '+' | '-' | ':' | '<' | '>' | '=') {
                    break;
                }
                j += 1;
            }
            let word = &s[i..j];
            match word.to_ascii_lowercase().as_str() {
                "inf" | "infinity" => out.push(Tok::Num(f64::INFINITY)),
                _ => out.push(Tok::Name(word.to_string())),
            }
            i = j;
        }
    }
    Ok(out)
}

/// Parses a linear expression. Returns the terms and a constant.
fn parse_expr(toks: &[Tok], line: usize) -> Result<(Vec<(String, f64)>, f64), LpFileError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for t in toks {
        match t {
            Tok::Op('+') => {}
            Tok::Op('-') => sign = -sign,
            Tok::Num(v) => {
                if let Some(c) = coef {
                    constant += sign * c;
                    sign = 1.0;
                }
                coef = Some(*v);
            }
            Tok::Name(n) => {
                terms.push((n.clone(), sign * coef.take().unwrap_or(1.0)));
                sign = 1.0;
            }
            other => {
                return Err(LpFileError::Syntax {
                    line,
                    msg: format!("unexpected token {other:?}"),
                })
            }
        }
    }
    if let Some(c) = coef {
        constant += sign * c;
    }
    Ok((terms, constant))
}

/// Reads an LP file into a model. Variable and row names are demangled.
pub fn parse_lp_file(text: &str) -> Result<MilpModel, LpFileError> {
    let mut model = MilpModel::new();
    let mut section = Section::None;
    let mut pending = String::new();
    let mut pending_line = 0;
    let mut rows: Vec<(usize, String)> = Vec::new();
    let mut obj_text = String::new();
    let mut bounds: Vec<(usize, String)> = Vec::new();
    let mut generals = Vec::new();
    let mut binaries = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            if section == Section::Constraints && !pending.trim().is_empty() {
                rows.push((pending_line, std::mem::take(&mut pending)));
            }
            section = s;
            continue;
        }
        match section {
            Section::Objective => {
                obj_text.push(' ');
                obj_text.push_str(line);
            }
            Section::Constraints => {
                // A row ends once it has a comparison and a right-hand side;
                // continuation lines start with an operator or a term.
                let starts_new = line.contains(':') || pending.trim().is_empty();
                if starts_new && !pending.trim().is_empty() {
                    rows.push((pending_line, std::mem::take(&mut pending)));
                }
                if pending.trim().is_empty() {
                    pending_line = lineno;
                }
                pending.push(' ');
                pending.push_str(line);
                if line.contains(['<', '>', '=']) {
                    rows.push((pending_line, std::mem::take(&mut pending)));
                }
            }
            Section::Bounds => bounds.push((lineno, line.trim().to_string())),
            Section::Generals => generals.extend(line.split_whitespace().map(str::to_string)),
            Section::Binaries => binaries.extend(line.split_whitespace().map(str::to_string)),
            Section::End => break,
            Section::None => {
                return Err(LpFileError::Syntax {
                    line: lineno,
                    msg: "content before the objective section".into(),
                })
            }
        }
    }

    let mut var_id = |model: &mut MilpModel, raw: &str, line: usize| -> Result<crate::VarId, LpFileError> {
        let name = demangle(raw).ok_or_else(|| LpFileError::Syntax {
            line,
            msg: format!("bad name `{raw}`"),
        })?;
        match model.var_by_name(&name) {
            Some(v) => Ok(v),
            None => Ok(model.add_continuous(name, 0.0, f64::INFINITY)?),
        }
    };

    // Objective.
    let toks = tokenize(&obj_text, 0)?;
    let body = match toks.iter().position(|t| *t == Tok::Colon) {
        Some(p) => &toks[p + 1..],
        None => &toks[..],
    };
    let (terms, constant) = parse_expr(body, 0)?;
    for (n, c) in terms {
        let v = var_id(&mut model, &n, 0)?;
        model.add_objective(v, c);
    }
    model.set_objective_constant(constant);

    // Rows.
    let mut parsed_rows = Vec::new();
    for (i, (lineno, row)) in rows.iter().enumerate() {
        let toks = tokenize(row, *lineno)?;
        let (name, body) = match toks.iter().position(|t| *t == Tok::Colon) {
            Some(p) => match &toks[..p] {
                [Tok::Name(n)] => (demangle(n).unwrap_or_else(|| n.clone()), &toks[p + 1..]),
                _ => {
                    return Err(LpFileError::Syntax {
                        line: *lineno,
                        msg: "bad row label".into(),
                    })
                }
            },
            None => (format!("c{i}"), &toks[..]),
        };
        let Some(cmp) = body.iter().position(|t| matches!(t, Tok::Cmp(_))) else {
            return Err(LpFileError::Syntax {
                line: *lineno,
                msg: "row without comparison".into(),
            });
        };
        let Tok::Cmp(sense) = body[cmp] else { unreachable!() };
        let (lhs, lc) = parse_expr(&body[..cmp], *lineno)?;
        let (rhs_terms, rc) = parse_expr(&body[cmp + 1..], *lineno)?;
        if !rhs_terms.is_empty() {
            return Err(LpFileError::Syntax {
                line: *lineno,
                msg: "variables on the right-hand side".into(),
            });
        }
        let mut terms = Vec::with_capacity(lhs.len());
        for (n, c) in lhs {
            terms.push((var_id(&mut model, &n, *lineno)?, c));
        }
        parsed_rows.push((name, terms, sense, rc - lc));
    }
    for (name, terms, sense, rhs) in parsed_rows {
        model.add_constraint(name, terms, sense, rhs)?;
    }

    for raw in &generals {
        let v = var_id(&mut model, raw, 0)?;
        model.set_kind(v, VarKind::Integer);
    }
    for raw in &binaries {
        let v = var_id(&mut model, raw, 0)?;
        model.set_kind(v, VarKind::Binary);
        model.set_bounds(v, 0.0, 1.0);
    }

    // Bounds are applied last so a restated binary bound wins.
    for (lineno, b) in &bounds {
        apply_bound(&mut model, b, *lineno, &mut var_id)?;
    }
    model.validate()?;
    Ok(model)
}

fn apply_bound(
    model: &mut MilpModel,
    text: &str,
    line: usize,
    var_id: &mut impl FnMut(&mut MilpModel, &str, usize) -> Result<crate::VarId, LpFileError>,
) -> Result<(), LpFileError> {
    let toks = tokenize(text, line)?;
    let err = |msg: &str| LpFileError::Syntax {
        line,
        msg: msg.to_string(),
    };
    // Fold a leading sign into the following number.
    let mut folded: Vec<Tok> = Vec::new();
    let mut neg = false;
    for t in toks {
        match t {
            Tok::Op('-') => neg = !neg,
            Tok::Op('+') => {}
            Tok::Num(v) => {
                folded.push(Tok::Num(if neg { -v } else { v }));
                neg = false;
            }
            other => folded.push(other),
        }
    }
    match folded.as_slice() {
        [Tok::Name(n), Tok::Name(kw)] if kw.eq_ignore_ascii_case("free") => {
            let v = var_id(model, n, line)?;
            model.set_bounds(v, f64::NEG_INFINITY, f64::INFINITY);
        }
        [Tok::Num(l), Tok::Cmp(Sense::Le), Tok::Name(n), Tok::Cmp(Sense::Le), Tok::Num(u)] => {
            let v = var_id(model, n, line)?;
            model.set_bounds(v, *l, *u);
        }
        [Tok::Name(n), Tok::Cmp(s), Tok::Num(b)] => {
            let v = var_id(model, n, line)?;
            let var = model.var(v).clone();
            match s {
                Sense::Le => model.set_bounds(v, var.lower, *b),
                Sense::Ge => model.set_bounds(v, *b, var.upper),
                Sense::Eq => model.set_bounds(v, *b, *b),
            }
        }
        [Tok::Num(b), Tok::Cmp(s), Tok::Name(n)] => {
            let v = var_id(model, n, line)?;
            let var = model.var(v).clone();
            match s {
                Sense::Le => model.set_bounds(v, *b, var.upper),
                Sense::Ge => model.set_bounds(v, var.lower, *b),
                Sense::Eq => model.set_bounds(v, *b, *b),
            }
        }
        _ => return Err(err("unrecognised bound")),
    }
    Ok(())
}

/// Writes a solution listing: a `status` header, an `objective` line and
/// one `name value` line per variable.
pub fn export_solution(model: &MilpModel, sol: &MipSolution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status {}", sol.status);
    if sol.has_point() {
        let _ = writeln!(out, "objective {:?}", sol.objective);
        for (v, x) in model.vars().iter().zip(&sol.values) {
            let _ = writeln!(out, "{} {:?}", mangle(&v.name), x);
        }
    }
    out
}

/// Parses a solution listing against `model`. Variables absent from the
/// listing are taken as 0; unknown names are an error.
pub fn import_solution(model: &MilpModel, text: &str) -> Result<MipSolution, LpFileError> {
    let mut status = None;
    let mut values = vec![0.0; model.num_vars()];
    let mut any_value = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(key), Some(val), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(LpFileError::Syntax {
                line: idx + 1,
                msg: "expected `name value`".into(),
            });
        };
        if status.is_none() {
            if !key.eq_ignore_ascii_case("status") {
                return Err(LpFileError::MissingStatus);
            }
            status = Some(
                val.parse::<SolveStatus>()
                    .map_err(LpFileError::BadStatus)?,
            );
            continue;
        }
        if key.eq_ignore_ascii_case("objective") {
            continue;
        }
        let name = demangle(key).ok_or_else(|| LpFileError::UnknownVariable(key.to_string()))?;
        let id = model
            .var_by_name(&name)
            .ok_or_else(|| LpFileError::UnknownVariable(name.clone()))?;
        values[id.0] = val.parse().map_err(|_| LpFileError::Syntax {
            line: idx + 1,
            msg: format!("bad value `{val}`"),
        })?;
        any_value = true;
    }
    let status = status.ok_or(LpFileError::MissingStatus)?;
    let has_point = any_value || matches!(status, SolveStatus::Optimal);
    let (values, objective) = if has_point {
        let obj = model.objective_value(&values);
        (values, obj)
    } else {
        (Vec::new(), f64::INFINITY)
    };
    Ok(MipSolution {
        status,
        objective,
        bound: if status == SolveStatus::Optimal { objective } else { f64::NEG_INFINITY },
        values,
        node_count: 0,
        wall_time: Duration::ZERO,
        bound_trace: Vec::new(),
    })
}
