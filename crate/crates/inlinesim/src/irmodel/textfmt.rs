//! Canonical text format for module files.
//!
//! One module per file, line-oriented key/value records:
//!
//! ```text
//! module-format 1
//! module m0001
//! function f000 linkage=internal size=12 blocks=3 cond=1 params=2 savings=2,0
//! call c000 caller=f000 callee=f003 const=10
//! call c001 caller=f000 callee=f007 const=-
//! ```
//!
//! The grammar is strict: fixed field order, single spaces, canonical
//! integers, `-` for empty lists, every line newline-terminated. Any text the
//! parser accepts therefore reprints byte-identically (`print ∘ parse` is the
//! identity on valid files). Semantic invariants are not the parser's job;
//! [`ModuleGraph::validate`] reports those.

use std::fmt::Write as _;

use thiserror::Error;

use super::{CallSite, CallSiteId, FunctionDef, FunctionId, Linkage, ModuleGraph};

pub const MODULE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, message: message.into() })
}

/// Renders a module in canonical form.
pub fn print_module(m: &ModuleGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "module-format {MODULE_FORMAT_VERSION}");
    let _ = writeln!(out, "module {}", m.id());
    for f in m.functions() {
        let _ = writeln!(
            out,
            "function {} linkage={} size={} blocks={} cond={} params={} savings={}",
            f.id,
            f.linkage,
            f.size,
            f.basic_block_count,
            f.conditional_block_count,
            f.param_count(),
            int_list(&f.param_savings),
        );
        for cs in &f.call_sites {
            let _ = writeln!(
                out,
                "call {} caller={} callee={} const={}",
                cs.id,
                cs.caller,
                cs.callee,
                bit_list(&cs.const_args),
            );
        }
    }
    out
}

fn int_list(xs: &[i64]) -> String {
    if xs.is_empty() {
        "-".to_owned()
    } else {
        xs.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
    }
}

fn bit_list(xs: &[bool]) -> String {
    if xs.is_empty() {
        "-".to_owned()
    } else {
        xs.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Parses a canonical module file.
pub fn parse_module(text: &str) -> Result<ModuleGraph, ParseError> {
    if !text.ends_with('\n') {
        return err(text.lines().count().max(1), "file must end with a newline");
    }
    let mut lines = text.split_terminator('\n').enumerate().map(|(i, l)| (i + 1, l));

    let (n, header) = lines.next().ok_or(ParseError {
        line: 1,
        message: "empty file".to_owned(),
    })?;
    let version = parse_directive(n, header, "module-format")?;
    if version != MODULE_FORMAT_VERSION.to_string() {
        return err(n, format!("unsupported module format version `{version}`"));
    }

    let (n, module_line) = match lines.next() {
        Some(l) => l,
        None => return err(2, "missing `module <id>` line"),
    };
    let module_id = parse_directive(n, module_line, "module")?;
    check_ident(n, &module_id)?;

    let mut functions: Vec<FunctionDef> = Vec::new();
    for (n, line) in lines {
        let tokens: Vec<&str> = line.split(' ').collect();
        if tokens.iter().any(|t| t.is_empty()) {
            return err(n, "malformed spacing");
        }
        match tokens[0] {
            "function" => {
                if tokens.len() != 8 {
                    return err(n, "function line needs 8 fields");
                }
                check_ident(n, tokens[1])?;
                let linkage = match field(n, tokens[2], "linkage")? {
                    "internal" => Linkage::Internal,
                    "external" => Linkage::External,
                    other => return err(n, format!("unknown linkage `{other}`")),
                };
                let size = parse_int(n, field(n, tokens[3], "size")?)?;
                let blocks = parse_int(n, field(n, tokens[4], "blocks")?)?;
                let cond = parse_int(n, field(n, tokens[5], "cond")?)?;
                let params: i64 = parse_int(n, field(n, tokens[6], "params")?)?;
                let savings = parse_int_list(n, field(n, tokens[7], "savings")?)?;
                if savings.len() as i64 != params {
                    return err(
                        n,
                        format!("params={} but savings lists {} entries", params, savings.len()),
                    );
                }
                functions.push(FunctionDef {
                    id: FunctionId::new(tokens[1]),
                    linkage,
                    size,
                    basic_block_count: blocks,
                    conditional_block_count: cond,
                    param_savings: savings,
                    call_sites: Vec::new(),
                });
            }
            "call" => {
                if tokens.len() != 5 {
                    return err(n, "call line needs 5 fields");
                }
                check_ident(n, tokens[1])?;
                let caller = field(n, tokens[2], "caller")?;
                check_ident(n, caller)?;
                let callee = field(n, tokens[3], "callee")?;
                check_ident(n, callee)?;
                let const_args = parse_bit_list(n, field(n, tokens[4], "const")?)?;
                let owner = match functions.last_mut() {
                    Some(f) => f,
                    None => return err(n, "call line before any function"),
                };
                owner.call_sites.push(CallSite {
                    id: CallSiteId::new(tokens[1]),
                    caller: FunctionId::new(caller),
                    callee: FunctionId::new(callee),
                    const_args,
                });
            }
            other => return err(n, format!("unknown record `{other}`")),
        }
    }

    ModuleGraph::new(module_id, functions)
        .map_err(|e| ParseError { line: 1, message: e.to_string() })
}

fn parse_directive(line_no: usize, line: &str, keyword: &str) -> Result<String, ParseError> {
    match line.split_once(' ') {
        Some((k, v)) if k == keyword && !v.is_empty() && !v.contains(' ') => Ok(v.to_owned()),
        _ => err(line_no, format!("expected `{keyword} <value>`")),
    }
}

fn field<'a>(line_no: usize, token: &'a str, key: &str) -> Result<&'a str, ParseError> {
    match token.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => err(line_no, format!("expected `{key}=<value>`")),
    }
}

fn check_ident(line_no: usize, s: &str) -> Result<(), ParseError> {
    let ok = !s.is_empty()
        && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'));
    if ok {
        Ok(())
    } else {
        err(line_no, format!("invalid identifier `{s}`"))
    }
}

fn parse_int(line_no: usize, s: &str) -> Result<i64, ParseError> {
    let v: i64 = s
        .parse()
        .map_err(|_| ParseError { line: line_no, message: format!("invalid integer `{s}`") })?;
    // Canonical spelling only, so reprinting reproduces the input bytes.
    if v.to_string() != s {
        return err(line_no, format!("non-canonical integer `{s}`"));
    }
    Ok(v)
}

fn parse_int_list(line_no: usize, s: &str) -> Result<Vec<i64>, ParseError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.split(',').map(|tok| parse_int(line_no, tok)).collect()
}

fn parse_bit_list(line_no: usize, s: &str) -> Result<Vec<bool>, ParseError> {
    if s == "-" {
        return Ok(Vec::new());
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => err(line_no, format!("invalid const mask char `{other}`")),
        })
        .collect()
}
