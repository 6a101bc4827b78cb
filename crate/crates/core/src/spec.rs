//! Textual lingo specifications such as `sharp(xor:8)` or
//! `hor(xorbseq,dnc;bias=1,5;d0=0,[0,0])`. Whitespace is ignored.

use crate::auth::{authenticating_with_width, DEFAULT_NAT_WIDTH};
use crate::compose::{functional, horizontal, HorizontalSpec};
use crate::error::{Error, Result};
use crate::lingo::{dnc_lingo, reverse_dnc_lingo, xor_bseq_lingo, xor_lingo, Lingo};
use crate::sharp::sharp;
use crate::value::Value;

/// Settings a specification cannot express on its own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecContext {
    /// Identifier space for `auth(...)` when the spec gives no `oids=`.
    pub oids: Vec<String>,
}

impl Default for SpecContext {
    fn default() -> SpecContext {
        SpecContext { oids: vec!["alice".into(), "bob".into()] }
    }
}

pub fn parse_lingo(spec: &str) -> Result<Lingo> {
    parse_lingo_with(spec, &SpecContext::default())
}

pub fn parse_lingo_with(spec: &str, ctx: &SpecContext) -> Result<Lingo> {
    let compact: String = spec.chars().filter(|c| !c.is_whitespace()).collect();
    parse(&compact, ctx)
}

fn parse_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse(msg.into()))
}

fn parse(s: &str, ctx: &SpecContext) -> Result<Lingo> {
    if let Some(n) = s.strip_prefix("xor:") {
        return xor_lingo(number(n, "xor width")?);
    }
    match s {
        "xorbseq" => return Ok(xor_bseq_lingo()),
        "dnc" => return Ok(dnc_lingo()),
        "rdnc" => return Ok(reverse_dnc_lingo()),
        _ => {}
    }
    let Some(open) = s.find('(') else {
        return parse_err(format!("unknown lingo {s:?}"));
    };
    let Some(inner) = s[open + 1..].strip_suffix(')') else {
        return parse_err(format!("missing closing parenthesis in {s:?}"));
    };
    balanced(inner)?;
    match &s[..open] {
        "sharp" => sharp(parse(inner, ctx)?),
        "fun" => match split_top(inner, ',').as_slice() {
            [a, b] => functional(parse(a, ctx)?, parse(b, ctx)?),
            _ => parse_err(format!("fun takes two lingos: {s:?}")),
        },
        "auth" => parse_auth(inner, ctx),
        "hor" => parse_hor(inner, ctx),
        other => parse_err(format!("unknown constructor {other:?}")),
    }
}

fn parse_auth(inner: &str, ctx: &SpecContext) -> Result<Lingo> {
    let parts = split_top(inner, ',');
    let base = parse(parts[0], ctx)?;
    let (mut j, mut k, mut w, mut oids) = (None, None, DEFAULT_NAT_WIDTH, ctx.oids.clone());
    for opt in &parts[1..] {
        match key_value(opt)? {
            ("j", v) => j = Some(number(v, "j")?),
            ("k", v) => k = Some(number(v, "k")?),
            ("w", v) => w = number(v, "w")?,
            ("oids", v) => oids = v.split('|').map(str::to_string).collect(),
            (key, _) => return parse_err(format!("unknown auth option {key:?}")),
        }
    }
    let (Some(j), Some(k)) = (j, k) else {
        return parse_err("auth needs both j= and k=");
    };
    authenticating_with_width(base, j, k, oids, w)
}

fn parse_hor(inner: &str, ctx: &SpecContext) -> Result<Lingo> {
    let sections = split_top(inner, ';');
    let lingos = split_top(sections[0], ',').into_iter().map(|p| parse(p, ctx)).collect::<Result<Vec<_>>>()?;
    let mut spec = HorizontalSpec::fair(lingos);
    for section in &sections[1..] {
        match key_value(section)? {
            ("bias", v) => {
                spec.bias = v.split(',').map(|b| number::<u64>(b, "bias weight")).collect::<Result<_>>()?;
            }
            ("d0", v) => {
                let values = split_top(v, ',');
                if values.len() != spec.branches.len() {
                    return parse_err(format!("{} defaults for {} lingos", values.len(), spec.branches.len()));
                }
                for ((lingo, d0), text) in spec.branches.iter_mut().zip(values) {
                    *d0 = lingo
                        .d2()
                        .coerce(Value::parse_literal(text)?)
                        .map_err(|e| Error::Composition(e.to_string()))?;
                }
            }
            (key, _) => return parse_err(format!("unknown hor option {key:?}")),
        }
    }
    horizontal(spec)
}

fn key_value(s: &str) -> Result<(&str, &str)> {
    s.split_once('=').ok_or_else(|| Error::Parse(format!("expected key=value, got {s:?}")))
}

fn number<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse(format!("{what} {s:?} is not a number")))
}

fn balanced(s: &str) -> Result<()> {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if depth < 0 {
            return parse_err(format!("unbalanced brackets in {s:?}"));
        }
    }
    if depth != 0 {
        return parse_err(format!("unbalanced brackets in {s:?}"));
    }
    Ok(())
}

/// Splits on `sep` outside any brackets.
fn split_top(s: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&s[start..i]);
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}
