//! The `.feta` specification language.
//!
//! ```text
//! features lock, unlock;
//! feature_model lock xor unlock;
//!
//! component User {
//!   input confirm;
//!   output join, leave;
//!   init 0;
//!   0 -> 1 by join! when lock;
//!   1 -> 2 by confirm? when lock;
//!   2 -> 0 by leave!;
//! }
//!
//! system Access = { u1: User, u2: User, s: Server };
//!
//! sync {
//!   confirm: [1,1] -> [1,1];
//!   join, leave: [1,1] -> [1,1] when lock;
//!   default [1,*] -> [1,1];
//! }
//! ```
//!
//! A transition without `when` is guarded by `true`. The `!`/`?` suffix on
//! transition actions is optional and must agree with the alphabet
//! declarations. Sync rules are tried in order; the first whose guard holds
//! and whose action list covers the action decides its type.

mod elaborate;

use std::fmt;

use serde::Serialize;

use crate::logic::FeatureExpr;
use crate::syntax::{tokenize, Pos, SyntaxError, Tok, Tokens};

pub use elaborate::{elaborate, ElaborateOptions, Spec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub col: usize,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, line: pos.line, col: pos.col, code, message: message.into() }
    }

    pub fn warning(pos: Pos, code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, line: pos.line, col: pos.col, code, message: message.into() }
    }

    pub fn is_fatal(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {sev}[{}]: {}", self.line, self.col, self.code, self.message)
    }
}

impl From<SyntaxError> for Diagnostic {
    fn from(e: SyntaxError) -> Self {
        Diagnostic::error(e.pos, "syntax", e.message)
    }
}

/// A value with its source position. Equality ignores the position.
#[derive(Debug, Clone)]
pub struct Located<T> {
    pub value: T,
    pub pos: Pos,
}

impl<T> Located<T> {
    pub fn new(value: T, pos: Pos) -> Self {
        Located { value, pos }
    }
}

impl<T: PartialEq> PartialEq for Located<T> {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl<T: Eq> Eq for Located<T> {}

type Name = Located<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Input,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionDecl {
    pub source: Name,
    pub target: Name,
    pub action: Name,
    pub direction: Option<Direction>,
    pub guard: Option<Located<FeatureExpr>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentDecl {
    pub name: Name,
    pub inputs: Vec<Name>,
    pub outputs: Vec<Name>,
    pub states: Vec<Name>,
    pub initial: Vec<Name>,
    pub transitions: Vec<TransitionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemDecl {
    pub name: Name,
    /// `(instance name, component type)`
    pub members: Vec<(Name, Name)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalDecl {
    pub min: u32,
    /// `None` for `*`.
    pub max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncRuleDecl {
    /// `None` for a `default` rule.
    pub actions: Option<Vec<Name>>,
    pub senders: Located<IntervalDecl>,
    pub receivers: Located<IntervalDecl>,
    pub guard: Option<Located<FeatureExpr>>,
}

#[derive(Debug, Clone)]
pub struct SyncBlock {
    pub pos: Pos,
    pub rules: Vec<SyncRuleDecl>,
}

impl PartialEq for SyncBlock {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl Eq for SyncBlock {}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpecDocument {
    pub features: Vec<Name>,
    pub feature_model: Option<Located<FeatureExpr>>,
    pub components: Vec<ComponentDecl>,
    pub system: Option<SystemDecl>,
    pub sync: Option<SyncBlock>,
}

/// Parses a specification. Structural problems (syntax errors, missing or
/// repeated sections, duplicate state ids) are reported as diagnostics.
pub fn parse(text: &str) -> Result<SpecDocument, Vec<Diagnostic>> {
    let toks = match tokenize(text) {
        Ok(t) => t,
        Err(e) => return Err(vec![e.into()]),
    };
    let mut p = Parser { toks: Tokens::new(toks), diags: Vec::new(), doc: SpecDocument::default() };
    p.document();
    if p.diags.iter().any(Diagnostic::is_fatal) {
        Err(p.diags)
    } else {
        Ok(p.doc)
    }
}

struct Parser {
    toks: Tokens,
    diags: Vec<Diagnostic>,
    doc: SpecDocument,
}

impl Parser {
    fn document(&mut self) {
        let mut seen_features = false;
        loop {
            let pos = self.toks.pos();
            let result = match &self.toks.peek().tok {
                Tok::Eof => break,
                Tok::Word(w) => match w.as_str() {
                    "features" => {
                        if seen_features {
                            self.diags.push(Diagnostic::error(pos, "duplicate", "features declared twice"));
                        }
                        seen_features = true;
                        self.features()
                    }
                    "feature_model" => self.feature_model(pos),
                    "component" => self.component(),
                    "system" => self.system(pos),
                    "sync" => self.sync(pos),
                    other => Err(SyntaxError::new(
                        pos,
                        format!(
                            "expected `features`, `feature_model`, `component`, `system` or `sync`, found `{other}`"
                        ),
                    )),
                },
                other => Err(SyntaxError::new(pos, format!("unexpected {other}"))),
            };
            if let Err(e) = result {
                self.diags.push(e.into());
                self.toks.recover();
                // A stray `}` would otherwise stall the loop.
                self.toks.eat(&Tok::RBrace);
            }
        }
        let end = self.toks.pos();
        if self.doc.feature_model.is_none() {
            self.diags.push(Diagnostic::error(end, "missing-section", "missing feature model"));
        }
        if self.doc.system.is_none() {
            self.diags.push(Diagnostic::error(end, "missing-section", "missing system declaration"));
        }
        if self.doc.sync.is_none() {
            self.diags.push(Diagnostic::error(end, "missing-section", "missing sync block"));
        }
    }

    fn name(&mut self, what: &str) -> Result<Name, SyntaxError> {
        let (w, pos) = self.toks.expect_word(what)?;
        Ok(Located::new(w, pos))
    }

    fn name_list(&mut self, what: &str) -> Result<Vec<Name>, SyntaxError> {
        let mut out = vec![self.name(what)?];
        while self.toks.eat(&Tok::Comma) {
            out.push(self.name(what)?);
        }
        Ok(out)
    }

    fn features(&mut self) -> Result<(), SyntaxError> {
        self.toks.next();
        if !self.toks.eat(&Tok::Semi) {
            let names = self.name_list("feature name")?;
            self.doc.features.extend(names);
            self.toks.expect(Tok::Semi)?;
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Located<FeatureExpr>, SyntaxError> {
        let pos = self.toks.pos();
        Ok(Located::new(self.toks.parse_expr()?, pos))
    }

    fn feature_model(&mut self, pos: Pos) -> Result<(), SyntaxError> {
        self.toks.next();
        let e = self.expr()?;
        self.toks.expect(Tok::Semi)?;
        if self.doc.feature_model.is_some() {
            self.diags.push(Diagnostic::error(pos, "duplicate", "feature model declared twice"));
        }
        self.doc.feature_model = Some(e);
        Ok(())
    }

    fn component(&mut self) -> Result<(), SyntaxError> {
        self.toks.next();
        let name = self.name("component name")?;
        self.toks.expect(Tok::LBrace)?;
        let mut decl = ComponentDecl {
            name,
            inputs: Vec::new(),
            outputs: Vec::new(),
            states: Vec::new(),
            initial: Vec::new(),
            transitions: Vec::new(),
        };
        while !self.toks.eat(&Tok::RBrace) {
            if self.toks.peek().tok == Tok::Eof {
                return Err(SyntaxError::new(self.toks.pos(), "unterminated component block"));
            }
            if let Err(e) = self.component_item(&mut decl) {
                self.diags.push(e.into());
                self.toks.recover();
            }
        }
        let mut seen: Vec<&Name> = Vec::new();
        for s in &decl.states {
            if seen.iter().any(|x| x.value == s.value) {
                self.diags.push(Diagnostic::error(
                    s.pos,
                    "duplicate",
                    format!("duplicate state `{}` in component `{}`", s.value, decl.name.value),
                ));
            }
            seen.push(s);
        }
        self.doc.components.push(decl);
        Ok(())
    }

    fn component_item(&mut self, decl: &mut ComponentDecl) -> Result<(), SyntaxError> {
        let keyword_list = |p: &mut Self, what: &str| -> Result<Vec<Name>, SyntaxError> {
            p.toks.next();
            let names = p.name_list(what)?;
            p.toks.expect(Tok::Semi)?;
            Ok(names)
        };
        // A keyword introduces a declaration unless it is used as a state
        // name, which the following `->` gives away.
        let is_keyword = |p: &Self, w: &str| p.toks.at_word(w) && p.toks.peek_at(1).tok != Tok::Arrow;
        if is_keyword(self, "input") {
            decl.inputs.extend(keyword_list(self, "action name")?);
        } else if is_keyword(self, "output") {
            decl.outputs.extend(keyword_list(self, "action name")?);
        } else if is_keyword(self, "states") {
            decl.states.extend(keyword_list(self, "state name")?);
        } else if is_keyword(self, "init") {
            decl.initial.extend(keyword_list(self, "state name")?);
        } else {
            let source = self.name("state name")?;
            self.toks.expect(Tok::Arrow)?;
            let target = self.name("state name")?;
            if !self.toks.eat_word("by") {
                let t = self.toks.peek();
                return Err(SyntaxError::new(t.pos, format!("expected `by`, found {}", t.tok)));
            }
            let action = self.name("action name")?;
            let direction = if self.toks.eat(&Tok::Bang) {
                Some(Direction::Output)
            } else if self.toks.eat(&Tok::Question) {
                Some(Direction::Input)
            } else {
                None
            };
            let guard = if self.toks.eat_word("when") { Some(self.expr()?) } else { None };
            self.toks.expect(Tok::Semi)?;
            decl.transitions.push(TransitionDecl { source, target, action, direction, guard });
        }
        Ok(())
    }

    fn system(&mut self, pos: Pos) -> Result<(), SyntaxError> {
        self.toks.next();
        let name = self.name("system name")?;
        self.toks.expect(Tok::Eq)?;
        self.toks.expect(Tok::LBrace)?;
        let mut members = Vec::new();
        if !self.toks.eat(&Tok::RBrace) {
            loop {
                let instance = self.name("component instance name")?;
                self.toks.expect(Tok::Colon)?;
                let kind = self.name("component name")?;
                members.push((instance, kind));
                if self.toks.eat(&Tok::RBrace) {
                    break;
                }
                self.toks.expect(Tok::Comma)?;
            }
        }
        self.toks.eat(&Tok::Semi);
        if self.doc.system.is_some() {
            self.diags.push(Diagnostic::error(pos, "duplicate", "system declared twice"));
        }
        self.doc.system = Some(SystemDecl { name, members });
        Ok(())
    }

    fn interval(&mut self) -> Result<Located<IntervalDecl>, SyntaxError> {
        let pos = self.toks.expect(Tok::LBracket)?;
        let min = self.number()?;
        self.toks.expect(Tok::Comma)?;
        let max = if self.toks.eat(&Tok::Star) { None } else { Some(self.number()?) };
        self.toks.expect(Tok::RBracket)?;
        Ok(Located::new(IntervalDecl { min, max }, pos))
    }

    fn number(&mut self) -> Result<u32, SyntaxError> {
        let (w, pos) = self.toks.expect_word("number")?;
        w.parse().map_err(|_| SyntaxError::new(pos, format!("expected number, found `{w}`")))
    }

    fn sync(&mut self, pos: Pos) -> Result<(), SyntaxError> {
        self.toks.next();
        self.toks.expect(Tok::LBrace)?;
        let mut rules = Vec::new();
        while !self.toks.eat(&Tok::RBrace) {
            if self.toks.peek().tok == Tok::Eof {
                return Err(SyntaxError::new(self.toks.pos(), "unterminated sync block"));
            }
            match self.sync_rule() {
                Ok(rule) => rules.push(rule),
                Err(e) => {
                    self.diags.push(e.into());
                    self.toks.recover();
                }
            }
        }
        if self.doc.sync.is_some() {
            self.diags.push(Diagnostic::error(pos, "duplicate", "sync block declared twice"));
        }
        self.doc.sync = Some(SyncBlock { pos, rules });
        Ok(())
    }

    fn sync_rule(&mut self) -> Result<SyncRuleDecl, SyntaxError> {
        let actions = if self.toks.eat_word("default") {
            None
        } else {
            let names = self.name_list("action name")?;
            self.toks.expect(Tok::Colon)?;
            Some(names)
        };
        let senders = self.interval()?;
        self.toks.expect(Tok::Arrow)?;
        let receivers = self.interval()?;
        let guard = if self.toks.eat_word("when") { Some(self.expr()?) } else { None };
        self.toks.expect(Tok::Semi)?;
        Ok(SyncRuleDecl { actions, senders, receivers, guard })
    }
}

fn join(names: &[Name]) -> String {
    names.iter().map(|n| n.value.as_str()).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for IntervalDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(m) => write!(f, "[{},{}]", self.min, m),
            None => write!(f, "[{},*]", self.min),
        }
    }
}

/// Canonical layout; parsing the output yields an equal document.
impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.features.is_empty() {
            writeln!(f, "features {};", join(&self.features))?;
        }
        if let Some(fm) = &self.feature_model {
            writeln!(f, "feature_model {};", fm.value)?;
        }
        for c in &self.components {
            writeln!(f, "\ncomponent {} {{", c.name.value)?;
            for (kw, list) in
                [("input", &c.inputs), ("output", &c.outputs), ("states", &c.states), ("init", &c.initial)]
            {
                if !list.is_empty() {
                    writeln!(f, "  {kw} {};", join(list))?;
                }
            }
            for t in &c.transitions {
                let dir = match t.direction {
                    Some(Direction::Output) => "!",
                    Some(Direction::Input) => "?",
                    None => "",
                };
                write!(f, "  {} -> {} by {}{dir}", t.source.value, t.target.value, t.action.value)?;
                if let Some(g) = &t.guard {
                    write!(f, " when {}", g.value)?;
                }
                writeln!(f, ";")?;
            }
            writeln!(f, "}}")?;
        }
        if let Some(s) = &self.system {
            let members: Vec<String> = s.members.iter().map(|(i, k)| format!("{}: {}", i.value, k.value)).collect();
            writeln!(f, "\nsystem {} = {{ {} }};", s.name.value, members.join(", "))?;
        }
        if let Some(sync) = &self.sync {
            writeln!(f, "\nsync {{")?;
            for r in &sync.rules {
                match &r.actions {
                    Some(names) => write!(f, "  {}: ", join(names))?,
                    None => write!(f, "  default ")?,
                }
                write!(f, "{} -> {}", r.senders.value, r.receivers.value)?;
                if let Some(g) = &r.guard {
                    write!(f, " when {}", g.value)?;
                }
                writeln!(f, ";")?;
            }
            writeln!(f, "}}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn running_example_parses() {
        let doc = parse(corpus::ACCESS_MANAGEMENT).unwrap();
        assert_eq!(doc.components.len(), 2);
        assert_eq!(doc.system.as_ref().unwrap().members.len(), 3);
        assert_eq!(doc.sync.as_ref().unwrap().rules.len(), 3);
    }

    #[test]
    fn empty_input_lacks_a_feature_model() {
        let diags = parse("").unwrap_err();
        assert!(diags.iter().any(|d| d.is_fatal() && d.message == "missing feature model"));
    }

    #[test]
    fn duplicate_states_are_fatal() {
        let text = "feature_model true; component C { states a, b, a; init a; } system S = { c: C }; sync { }";
        let diags = parse(text).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, "duplicate");
        assert_eq!((diags[0].line, diags[0].col), (1, 48));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let text = "feature_model true;\ncomponent C {\n  a -> b join;\n}\nsystem S = { c: C };\nsync {}\n";
        let diags = parse(text).unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!((diags[0].line, diags[0].col), (3, 10));
        assert!(diags[0].message.contains("expected `by`"));
    }

    #[test]
    fn keywords_can_name_states() {
        let text = "feature_model true; component C { output a; init init; init -> states by a; } \
                    system S = { c: C }; sync { default [1,1] -> [0,0]; }";
        let doc = parse(text).unwrap();
        assert_eq!(doc.components[0].transitions[0].target.value, "states");
    }

    #[test]
    fn printing_is_a_fixpoint() {
        for (_, text) in corpus::ALL {
            let doc = parse(text).unwrap();
            let printed = doc.to_string();
            let again = parse(&printed).unwrap();
            assert_eq!(again, doc);
            assert_eq!(again.to_string(), printed);
        }
    }
}
