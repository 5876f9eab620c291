//! Line-oriented model files.
//!
//! ```text
//! [system]
//! name = bridge
//! n = 5
//! structure = max(min(x1, x4), min(x2, x5), min(x1, x3, x5), min(x2, x3, x4))
//! [components]
//! 1 = exp(1)
//! ...
//! [dependence]
//! kind = independent
//! [metadata]
//! source = handbook
//! ```
//!
//! `table = <bits>` may replace `structure`; character `k` is `v(A)` for the
//! subset with bit pattern `k`. Blank lines and lines starting with `#` are
//! ignored. Dependence keys per kind:
//!
//! * `bayes`: `g = <law>` (or `g.1`, `g.2`, ... for several independent factors)
//!   and per component `rate.<i> = <expression in u>` or `law.<i> = <family>`.
//! * `prephase`: `G = <law>` and per component `rate.<i>` or `decay.<i>`.
//! * `bounds`: `bound.<j> = upper|lower, scope={i,...}, life=<law>` and optional
//!   `q.<i> = <expression over x<i> and q<j>>`.
//!
//! Components are listed under `[components]` for `independent` and `bounds`
//! only; under `bayes` and `prephase` their laws live in `[dependence]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::bounds::{apply_bounds_with, BoundKind, BoundSpec};
use crate::dependence::{ConditionalLaw, FactorModel, PrePhaseModel};
use crate::distribution::DistributionSpec;
use crate::error::{Error, ParseError, Result};
use crate::lattice::{LatticeExpr, NormalForm, SetFunction, Subset, MAX_UNITS};

use super::expr::{parse_expr_with, ExprOptions};
use super::lexer::{Cursor, Tok};
use super::rate::{parse_sum, RateExpr};

#[derive(Debug, Clone, PartialEq)]
pub enum Structure {
    Expr(LatticeExpr),
    Table(SetFunction),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BoundsModel {
    pub bounds: Vec<BoundSpec>,
    /// Explicit `q_i` replacing the default interaction of component `i`.
    pub interactions: BTreeMap<usize, LatticeExpr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dependence {
    Independent,
    Bayes(FactorModel),
    PrePhase(PrePhaseModel),
    Bounds(BoundsModel),
}

impl Dependence {
    pub fn kind(&self) -> &'static str {
        match self {
            Dependence::Independent => "independent",
            Dependence::Bayes(_) => "bayes",
            Dependence::PrePhase(_) => "prephase",
            Dependence::Bounds(_) => "bounds",
        }
    }

    fn lists_components(&self) -> bool {
        matches!(self, Dependence::Independent | Dependence::Bounds(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemModel {
    pub name: String,
    pub n: usize,
    pub structure: Structure,
    /// Marginal laws; empty for `bayes` and `prephase`.
    pub components: Vec<DistributionSpec>,
    pub dependence: Dependence,
    pub metadata: BTreeMap<String, String>,
}

impl SystemModel {
    pub fn new(
        name: impl Into<String>,
        n: usize,
        structure: Structure,
        components: Vec<DistributionSpec>,
        dependence: Dependence,
    ) -> Result<Self> {
        let model = Self {
            name: name.into(),
            n,
            structure,
            components,
            dependence,
            metadata: BTreeMap::new(),
        };
        model.validate()?;
        Ok(model)
    }

    /// Checks every cross-field invariant.
    pub fn validate(&self) -> Result<()> {
        if !valid_text(&self.name) {
            return Err(Error::Model(format!("invalid name {:?}", self.name)));
        }
        if self.n == 0 || self.n > MAX_UNITS {
            return Err(Error::Model(format!("n = {} outside 1..={MAX_UNITS}", self.n)));
        }
        match &self.structure {
            Structure::Expr(e) => {
                e.validate(self.n)?;
                if e.has_constants() {
                    return Err(Error::ConstantInBinary);
                }
                let used = e.variables();
                if used != Subset::full(self.n) {
                    let missing = Subset::full(self.n).members().find(|&i| !used.contains(i));
                    return Err(Error::Model(format!(
                        "structure does not reference component {}",
                        missing.unwrap_or(0)
                    )));
                }
            }
            Structure::Table(v) if v.n() != self.n => {
                return Err(Error::Model(format!("table has {} components, n = {}", v.n(), self.n)));
            }
            Structure::Table(_) => {}
        }
        if self.dependence.lists_components() {
            if self.components.len() != self.n {
                return Err(Error::Model(format!(
                    "{} component laws for n = {}",
                    self.components.len(),
                    self.n
                )));
            }
            for d in &self.components {
                d.validate()?;
            }
        } else if !self.components.is_empty() {
            return Err(Error::Model(format!(
                "{} models take component laws from the dependence section",
                self.dependence.kind()
            )));
        }
        match &self.dependence {
            Dependence::Independent => {}
            Dependence::Bayes(fm) if fm.n() != self.n => {
                return Err(Error::Model(format!("{} conditional laws for n = {}", fm.n(), self.n)));
            }
            Dependence::PrePhase(pm) if pm.n() != self.n => {
                return Err(Error::Model(format!("{} decay laws for n = {}", pm.n(), self.n)));
            }
            Dependence::Bayes(_) | Dependence::PrePhase(_) => {}
            Dependence::Bounds(b) => {
                apply_bounds_with(&self.expr()?, self.n, &b.bounds, &b.interactions)?;
            }
        }
        for (k, v) in &self.metadata {
            if !valid_key(k) || !valid_text(v) {
                return Err(Error::Model(format!("invalid metadata entry {k:?} = {v:?}")));
            }
        }
        Ok(())
    }

    pub fn set_function(&self) -> Result<SetFunction> {
        match &self.structure {
            Structure::Expr(e) => e.to_set_function(self.n),
            Structure::Table(v) => Ok(v.clone()),
        }
    }

    /// The structure as an expression; tables become their disjunctive normal form.
    pub fn expr(&self) -> Result<LatticeExpr> {
        match &self.structure {
            Structure::Expr(e) => Ok(e.clone()),
            Structure::Table(v) => {
                v.require_semicoherent()?;
                LatticeExpr::from_set_function(v, NormalForm::Disjunctive)
            }
        }
    }
}

fn valid_text(s: &str) -> bool {
    !s.is_empty() && s.trim() == s && !s.contains(['\n', '\r'])
}

fn valid_key(s: &str) -> bool {
    !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'.' || b == b'-')
}

struct Entry {
    key: String,
    value: String,
    line: usize,
    key_offset: usize,
    value_offset: usize,
}

struct Section {
    name: String,
    line: usize,
    offset: usize,
    entries: Vec<Entry>,
}

const SECTIONS: [&str; 4] = ["system", "components", "dependence", "metadata"];

fn split_sections(text: &str) -> Result<Vec<Section>, ParseError> {
    let mut sections: Vec<Section> = Vec::new();
    let mut offset = 0;
    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line_start = offset;
        offset += raw.len() + 1;
        let lead = raw.len() - raw.trim_start().len();
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(inner) = line.strip_prefix('[') {
            let name = inner
                .strip_suffix(']')
                .ok_or_else(|| ParseError::new(line_start + lead, "unterminated section header").at_line(line_no))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ParseError::new(line_start + lead, format!("unknown section [{name}]")).at_line(line_no));
            }
            if let Some(prev) = sections.iter().find(|s| s.name == name) {
                return Err(ParseError::new(
                    line_start + lead,
                    format!("section [{name}] repeated (first at line {})", prev.line),
                )
                .at_line(line_no));
            }
            sections.push(Section {
                name: name.to_string(),
                line: line_no,
                offset: line_start + lead,
                entries: Vec::new(),
            });
            continue;
        }
        let Some(section) = sections.last_mut() else {
            return Err(ParseError::new(line_start + lead, "entry before the first section header").at_line(line_no));
        };
        let Some(eq) = raw.find('=') else {
            return Err(ParseError::new(line_start + lead, "expected 'key = value'")
                .at_line(line_no)
                .in_field(section.name.clone()));
        };
        let key = raw[..eq].trim();
        let value_raw = &raw[eq + 1..];
        let value = value_raw.trim();
        let value_offset = line_start + eq + 1 + (value_raw.len() - value_raw.trim_start().len());
        let field = format!("{}.{key}", section.name);
        if key.is_empty() {
            return Err(ParseError::new(line_start + lead, "missing key").at_line(line_no).in_field(section.name.clone()));
        }
        if value.is_empty() {
            return Err(ParseError::new(value_offset, "missing value").at_line(line_no).in_field(field));
        }
        if let Some(prev) = section.entries.iter().find(|e| e.key == key) {
            return Err(ParseError::new(
                line_start + lead,
                format!("duplicate key (first at line {})", prev.line),
            )
            .at_line(line_no)
            .in_field(field));
        }
        section.entries.push(Entry {
            key: key.to_string(),
            value: value.to_string(),
            line: line_no,
            key_offset: line_start + lead,
            value_offset,
        });
    }
    Ok(sections)
}

impl Entry {
    fn field(&self, section: &str) -> String {
        format!("{section}.{}", self.key)
    }

    /// Re-anchors a parse error from the value text into the file.
    fn value_error(&self, section: &str, e: ParseError) -> ParseError {
        ParseError {
            offset: self.value_offset + e.offset,
            line: Some(self.line),
            field: Some(self.field(section)),
            message: e.message,
        }
    }

    fn error(&self, section: &str, message: impl Into<String>) -> ParseError {
        ParseError::new(self.value_offset, message)
            .at_line(self.line)
            .in_field(self.field(section))
    }

    fn key_error(&self, section: &str, message: impl Into<String>) -> ParseError {
        ParseError::new(self.key_offset, message)
            .at_line(self.line)
            .in_field(self.field(section))
    }
}

/// Parses `exp(r)`, `uniform(a, b)`, `weibull(k, s)` or `const(c)`.
pub fn parse_distribution(text: &str) -> Result<DistributionSpec, ParseError> {
    let mut cur = Cursor::new(text)?;
    let d = distribution_tokens(&mut cur)?;
    cur.expect_end()?;
    Ok(d)
}

fn distribution_tokens(cur: &mut Cursor) -> Result<DistributionSpec, ParseError> {
    let start = cur.offset();
    let name = match cur.next().map(|t| t.tok) {
        Some(Tok::Ident(name)) => name,
        _ => return Err(ParseError::new(start, "expected exp(...), uniform(...), weibull(...) or const(...)")),
    };
    let arity = match name.as_str() {
        "exp" | "const" => 1,
        "uniform" | "weibull" => 2,
        other => return Err(ParseError::new(start, format!("unknown distribution '{other}'"))),
    };
    cur.expect(Tok::LParen, "'('")?;
    let mut args = Vec::new();
    loop {
        let at = cur.offset();
        match cur.next().map(|t| t.tok) {
            Some(Tok::Number(x)) => args.push(x),
            Some(Tok::Ident(s)) if s == "inf" => args.push(f64::INFINITY),
            None => return Err(ParseError::new(at, "unexpected end of input, expected a number")),
            Some(_) => return Err(ParseError::new(at, "expected a nonnegative number")),
        }
        if cur.peek() == Some(&Tok::Comma) {
            cur.next();
        } else {
            break;
        }
    }
    cur.expect(Tok::RParen, "')'")?;
    if args.len() != arity {
        return Err(ParseError::new(start, format!("{name} takes {arity} parameter(s), got {}", args.len())));
    }
    let d = match name.as_str() {
        "exp" => DistributionSpec::exponential(args[0]),
        "const" => DistributionSpec::deterministic(args[0]),
        "uniform" => DistributionSpec::uniform(args[0], args[1]),
        _ => DistributionSpec::weibull(args[0], args[1]),
    };
    d.map_err(|e| ParseError::new(start, e.to_string()))
}

/// Parses a conditional family whose parameters are rate expressions in `u`.
pub fn parse_law(text: &str) -> Result<ConditionalLaw, ParseError> {
    let mut cur = Cursor::new(text)?;
    let start = cur.offset();
    let name = match cur.next().map(|t| t.tok) {
        Some(Tok::Ident(name)) => name,
        _ => return Err(ParseError::new(start, "expected exp(...), uniform(...), weibull(...) or const(...)")),
    };
    let arity = match name.as_str() {
        "exp" | "const" => 1,
        "uniform" | "weibull" => 2,
        other => return Err(ParseError::new(start, format!("unknown family '{other}'"))),
    };
    cur.expect(Tok::LParen, "'('")?;
    let mut args: Vec<RateExpr> = vec![parse_sum(&mut cur)?];
    while cur.peek() == Some(&Tok::Comma) {
        cur.next();
        args.push(parse_sum(&mut cur)?);
    }
    cur.expect(Tok::RParen, "',' or ')'")?;
    cur.expect_end()?;
    if args.len() != arity {
        return Err(ParseError::new(start, format!("{name} takes {arity} parameter(s), got {}", args.len())));
    }
    let mut it = args.into_iter();
    let mut next = || it.next().unwrap();
    Ok(match name.as_str() {
        "exp" => ConditionalLaw::Exponential { rate: next() },
        "const" => ConditionalLaw::Deterministic { value: next() },
        "uniform" => ConditionalLaw::Uniform { lo: next(), hi: next() },
        _ => ConditionalLaw::Weibull {
            shape: next(),
            scale: next(),
        },
    })
}

/// Parses `upper|lower, scope={i,...}, life=<law>`.
fn parse_bound_value(id: usize, text: &str) -> Result<BoundSpec, ParseError> {
    let mut cur = Cursor::new(text)?;
    let start = cur.offset();
    let kind = match cur.next().map(|t| t.tok) {
        Some(Tok::Ident(s)) if s == "upper" => BoundKind::Upper,
        Some(Tok::Ident(s)) if s == "lower" => BoundKind::Lower,
        _ => return Err(ParseError::new(start, "expected 'upper' or 'lower'")),
    };
    let mut scope: Option<Subset> = None;
    let mut life: Option<DistributionSpec> = None;
    while cur.peek() == Some(&Tok::Comma) {
        cur.next();
        let at = cur.offset();
        let key = match cur.next().map(|t| t.tok) {
            Some(Tok::Ident(k)) if k == "scope" || k == "life" => k,
            _ => return Err(ParseError::new(at, "expected 'scope=' or 'life='")),
        };
        cur.expect(Tok::Eq, "'='")?;
        if key == "scope" {
            if scope.is_some() {
                return Err(ParseError::new(at, "scope given twice"));
            }
            cur.expect(Tok::LBrace, "'{'")?;
            let mut set = Subset::EMPTY;
            loop {
                let at = cur.offset();
                match cur.next().map(|t| t.tok) {
                    Some(Tok::Number(x)) if x.fract() == 0.0 && x >= 1.0 && x <= MAX_UNITS as f64 => {
                        let i = x as usize;
                        if set.contains(i) {
                            return Err(ParseError::new(at, format!("component {i} listed twice")));
                        }
                        set = set.with(i);
                    }
                    Some(Tok::Number(x)) => {
                        return Err(ParseError::new(at, format!("{x} is not a component index in 1..={MAX_UNITS}")))
                    }
                    _ => return Err(ParseError::new(at, "expected a component index")),
                }
                if cur.peek() == Some(&Tok::Comma) {
                    cur.next();
                } else {
                    break;
                }
            }
            cur.expect(Tok::RBrace, "',' or '}'")?;
            scope = Some(set);
        } else {
            if life.is_some() {
                return Err(ParseError::new(at, "life given twice"));
            }
            life = Some(distribution_tokens(&mut cur)?);
        }
    }
    cur.expect_end()?;
    let scope = scope.ok_or_else(|| ParseError::new(text.len(), "missing scope={...}"))?;
    let life = life.ok_or_else(|| ParseError::new(text.len(), "missing life=..."))?;
    BoundSpec::new(id, kind, scope, life).map_err(|e| ParseError::new(0, e.to_string()))
}

/// `prefix.<k>` with a positive index.
fn indexed_key(key: &str, prefix: &str) -> Option<usize> {
    let rest = key.strip_prefix(prefix)?.strip_prefix('.')?;
    super::lexer::indexed(&format!("k{rest}"), "k")
}

fn positive_index(key: &str) -> Option<usize> {
    super::lexer::indexed(&format!("k{key}"), "k")
}

/// Parses a model file given as raw bytes (which must be UTF-8).
pub fn parse_model_bytes(bytes: &[u8]) -> Result<SystemModel, ParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_model(text),
        Err(e) => Err(ParseError::new(e.valid_up_to(), "input is not valid UTF-8")),
    }
}

pub fn parse_model(text: &str) -> Result<SystemModel, ParseError> {
    let sections = split_sections(text)?;
    let find = |name: &str| sections.iter().find(|s| s.name == name);

    let system = find("system").ok_or_else(|| ParseError::new(text.len(), "missing [system] section"))?;
    let mut name = None;
    let mut n = None;
    let mut structure_entry = None;
    for e in &system.entries {
        match e.key.as_str() {
            "name" => name = Some(e.value.clone()),
            "n" => {
                let v = e
                    .value
                    .parse::<usize>()
                    .ok()
                    .filter(|&v| (1..=MAX_UNITS).contains(&v))
                    .ok_or_else(|| e.error("system", format!("expected an integer in 1..={MAX_UNITS}")))?;
                n = Some(v);
            }
            "structure" | "table" => {
                if structure_entry.is_some() {
                    return Err(e.key_error("system", "give either structure or table, not both"));
                }
                structure_entry = Some(e);
            }
            _ => return Err(e.key_error("system", "unknown key")),
        }
    }
    let missing = |what: &str| {
        ParseError::new(system.offset, format!("missing {what}"))
            .at_line(system.line)
            .in_field(format!("system.{what}"))
    };
    let name = name.ok_or_else(|| missing("name"))?;
    let n = n.ok_or_else(|| missing("n"))?;
    let se = structure_entry.ok_or_else(|| missing("structure"))?;
    let structure = if se.key == "table" {
        let bits = se.value.as_bytes();
        if bits.len() != 1 << n {
            return Err(se.error("system", format!("table for n = {n} needs {} digits, got {}", 1usize << n, bits.len())));
        }
        let mut values = Vec::with_capacity(bits.len());
        for (k, &b) in bits.iter().enumerate() {
            match b {
                b'0' => values.push(false),
                b'1' => values.push(true),
                _ => {
                    return Err(se.value_error("system", ParseError::new(k, "table digits must be 0 or 1")));
                }
            }
        }
        Structure::Table(SetFunction::new(n, values).map_err(|e| se.error("system", e.to_string()))?)
    } else {
        let expr = parse_expr_with(&se.value, ExprOptions::PLAIN).map_err(|e| se.value_error("system", e))?;
        if expr.max_var() > n {
            return Err(se.error("system", format!("reference to undeclared component x{} (n = {n})", expr.max_var())));
        }
        Structure::Expr(expr)
    };

    let dep_section = find("dependence");
    let kind = match dep_section {
        None => "independent".to_string(),
        Some(s) => s
            .entries
            .iter()
            .find(|e| e.key == "kind")
            .map(|e| e.value.clone())
            .ok_or_else(|| {
                ParseError::new(s.offset, "missing kind")
                    .at_line(s.line)
                    .in_field("dependence.kind")
            })?,
    };
    let lists_components = kind == "independent" || kind == "bounds";

    let mut components = Vec::new();
    match (find("components"), lists_components) {
        (Some(s), true) => {
            let mut slots: Vec<Option<DistributionSpec>> = vec![None; n];
            for e in &s.entries {
                let i = positive_index(&e.key).ok_or_else(|| e.key_error("components", "expected a component index"))?;
                if i > n {
                    return Err(e.key_error("components", format!("reference to undeclared component {i} (n = {n})")));
                }
                slots[i - 1] = Some(parse_distribution(&e.value).map_err(|err| e.value_error("components", err))?);
            }
            for (k, slot) in slots.into_iter().enumerate() {
                components.push(slot.ok_or_else(|| {
                    ParseError::new(s.offset, format!("component {} has no lifetime law", k + 1))
                        .at_line(s.line)
                        .in_field(format!("components.{}", k + 1))
                })?);
            }
        }
        (None, true) => {
            return Err(ParseError::new(text.len(), "missing [components] section").in_field("components"));
        }
        (Some(s), false) => {
            return Err(ParseError::new(s.offset, format!("{kind} models give component laws in [dependence]"))
                .at_line(s.line)
                .in_field("components"));
        }
        (None, false) => {}
    }

    let dependence = match dep_section {
        None => Dependence::Independent,
        Some(s) => parse_dependence(s, &kind, n)?,
    };

    let mut metadata = BTreeMap::new();
    if let Some(s) = find("metadata") {
        for e in &s.entries {
            if !valid_key(&e.key) {
                return Err(e.key_error("metadata", "keys may use letters, digits, '_', '.' and '-'"));
            }
            metadata.insert(e.key.clone(), e.value.clone());
        }
    }

    let model = SystemModel {
        name,
        n,
        structure,
        components,
        dependence,
        metadata,
    };
    model.validate().map_err(|e| {
        let (offset, line, field) = match dep_section {
            Some(s) if !matches!(model.dependence, Dependence::Independent) => (s.offset, s.line, "dependence"),
            _ => (system.offset, system.line, "system"),
        };
        ParseError::new(offset, e.to_string()).at_line(line).in_field(field)
    })?;
    Ok(model)
}

fn parse_dependence(s: &Section, kind: &str, n: usize) -> Result<Dependence, ParseError> {
    const SEC: &str = "dependence";
    let header_error = |message: String| ParseError::new(s.offset, message).at_line(s.line).in_field(SEC);
    let kind_entry = s.entries.iter().find(|e| e.key == "kind").expect("kind checked by caller");
    let entries = s.entries.iter().filter(|e| e.key != "kind");
    let model_error = |e: Error| header_error(e.to_string());

    // Per-component laws shared by bayes (`rate`/`law`) and prephase (`rate`/`decay`).
    let collect_laws = |law_key: &str, factor_key: &str| -> Result<(BTreeMap<usize, DistributionSpec>, Option<DistributionSpec>, Vec<ConditionalLaw>), ParseError> {
        let mut factors = BTreeMap::new();
        let mut single = None;
        let mut laws: Vec<Option<ConditionalLaw>> = vec![None; n];
        for e in entries.clone() {
            if e.key == factor_key {
                single = Some(parse_distribution(&e.value).map_err(|err| e.value_error(SEC, err))?);
            } else if let Some(k) = indexed_key(&e.key, factor_key).filter(|_| factor_key == "g") {
                factors.insert(k, parse_distribution(&e.value).map_err(|err| e.value_error(SEC, err))?);
            } else if let Some(i) = indexed_key(&e.key, "rate").or_else(|| indexed_key(&e.key, law_key)) {
                if i > n {
                    return Err(e.key_error(SEC, format!("reference to undeclared component {i} (n = {n})")));
                }
                if laws[i - 1].is_some() {
                    return Err(e.key_error(SEC, format!("component {i} has two laws")));
                }
                let law = if e.key.starts_with("rate.") {
                    ConditionalLaw::exponential(RateExpr::parse(&e.value).map_err(|err| e.value_error(SEC, err))?)
                } else {
                    parse_law(&e.value).map_err(|err| e.value_error(SEC, err))?
                };
                laws[i - 1] = Some(law);
            } else {
                return Err(e.key_error(SEC, format!("unknown key for kind = {kind}")));
            }
        }
        let laws = laws
            .into_iter()
            .enumerate()
            .map(|(k, l)| l.ok_or_else(|| header_error(format!("component {} has no rate.{} or {law_key}.{}", k + 1, k + 1, k + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((factors, single, laws))
    };

    match kind {
        "independent" => {
            if let Some(e) = entries.clone().next() {
                return Err(e.key_error(SEC, "kind = independent takes no further keys"));
            }
            Ok(Dependence::Independent)
        }
        "bayes" => {
            let (indexed, single, laws) = collect_laws("law", "g")?;
            let factors = match (single, indexed.is_empty()) {
                (Some(g), true) => vec![g],
                (None, false) => {
                    let m = indexed.len();
                    if indexed.keys().copied().ne(1..=m) {
                        return Err(header_error(format!("factor keys must be g.1 .. g.{m}")));
                    }
                    indexed.into_values().collect()
                }
                (Some(_), false) => return Err(header_error("use either g or g.<k>, not both".into())),
                (None, true) => return Err(header_error("missing factor density g".into())),
            };
            FactorModel::new(factors, laws).map(Dependence::Bayes).map_err(model_error)
        }
        "prephase" => {
            let (_, single, laws) = collect_laws("decay", "G")?;
            let g = single.ok_or_else(|| header_error("missing pre-phase law G".into()))?;
            PrePhaseModel::new(g, laws).map(Dependence::PrePhase).map_err(model_error)
        }
        "bounds" => {
            let mut bounds = Vec::new();
            let mut ids = BTreeSet::new();
            let mut interactions = BTreeMap::new();
            for e in entries {
                if let Some(j) = indexed_key(&e.key, "bound") {
                    if !ids.insert(j) {
                        return Err(e.key_error(SEC, format!("duplicate bound identifier {j}")));
                    }
                    let b = parse_bound_value(j, &e.value).map_err(|err| e.value_error(SEC, err))?;
                    if let Some(i) = b.scope.members().find(|&i| i > n) {
                        return Err(e.error(SEC, format!("reference to undeclared component {i} (n = {n})")));
                    }
                    bounds.push(b);
                } else if let Some(i) = indexed_key(&e.key, "q") {
                    if i > n {
                        return Err(e.key_error(SEC, format!("reference to undeclared component {i} (n = {n})")));
                    }
                    let q = parse_expr_with(&e.value, ExprOptions::BOUNDS).map_err(|err| e.value_error(SEC, err))?;
                    interactions.insert(i, q);
                } else {
                    return Err(e.key_error(SEC, "unknown key for kind = bounds"));
                }
            }
            if bounds.is_empty() {
                return Err(header_error("kind = bounds needs at least one bound.<j>".into()));
            }
            bounds.sort_by_key(|b| b.id);
            for (k, b) in bounds.iter().enumerate() {
                if b.id != k + 1 {
                    return Err(header_error(format!("bound ids must be 1..={}, found {}", bounds.len(), b.id)));
                }
            }
            Ok(Dependence::Bounds(BoundsModel { bounds, interactions }))
        }
        other => Err(ParseError::new(kind_entry.value_offset, format!("unknown kind '{other}'"))
            .at_line(kind_entry.line)
            .in_field("dependence.kind")),
    }
}

fn law_line(out: &mut String, prefix: &str, i: usize, law: &ConditionalLaw) {
    match law {
        ConditionalLaw::Exponential { rate } => writeln!(out, "rate.{i} = {rate}"),
        other => writeln!(out, "{prefix}.{i} = {other}"),
    }
    .unwrap();
}

pub fn serialize_model(model: &SystemModel) -> String {
    let mut out = String::new();
    out.push_str("[system]\n");
    writeln!(out, "name = {}", model.name).unwrap();
    writeln!(out, "n = {}", model.n).unwrap();
    match &model.structure {
        Structure::Expr(e) => writeln!(out, "structure = {e}").unwrap(),
        Structure::Table(v) => {
            let bits: String = v.table().iter().map(|&b| if b { '1' } else { '0' }).collect();
            writeln!(out, "table = {bits}").unwrap();
        }
    }
    if !model.components.is_empty() {
        out.push_str("[components]\n");
        for (k, d) in model.components.iter().enumerate() {
            writeln!(out, "{} = {d}", k + 1).unwrap();
        }
    }
    out.push_str("[dependence]\n");
    writeln!(out, "kind = {}", model.dependence.kind()).unwrap();
    match &model.dependence {
        Dependence::Independent => {}
        Dependence::Bayes(fm) => {
            if let [g] = fm.factors() {
                writeln!(out, "g = {g}").unwrap();
            } else {
                for (k, g) in fm.factors().iter().enumerate() {
                    writeln!(out, "g.{} = {g}", k + 1).unwrap();
                }
            }
            for (k, law) in fm.laws().iter().enumerate() {
                law_line(&mut out, "law", k + 1, law);
            }
        }
        Dependence::PrePhase(pm) => {
            writeln!(out, "G = {}", pm.prephase()).unwrap();
            for (k, law) in pm.decay().iter().enumerate() {
                law_line(&mut out, "decay", k + 1, law);
            }
        }
        Dependence::Bounds(b) => {
            for bound in &b.bounds {
                let scope: Vec<String> = bound.scope.members().map(|i| i.to_string()).collect();
                writeln!(
                    out,
                    "bound.{} = {}, scope={{{}}}, life={}",
                    bound.id,
                    bound.kind,
                    scope.join(","),
                    bound.life
                )
                .unwrap();
            }
            for (i, q) in &b.interactions {
                writeln!(out, "q.{i} = {q}").unwrap();
            }
        }
    }
    if !model.metadata.is_empty() {
        out.push_str("[metadata]\n");
        for (k, v) in &model.metadata {
            writeln!(out, "{k} = {v}").unwrap();
        }
    }
    out
}
