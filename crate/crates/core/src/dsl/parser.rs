use std::collections::HashMap;

use super::lexer::{tokenize, Tok, Token};
use super::{is_reserved, ParseDiagnostic, ParseOutcome, Severity, SourceSpan};
use crate::dynamics::{DynamicSpec, Expr, Interpolation, TimeSeries};
use crate::model::{
    validate_model, AlertAggregator, CompareOp, Component, Dynamic, Event, Locus, Model, Predicate, State,
    Transition, INITIAL_STATE,
};

type PResult<T> = Result<T, ParseDiagnostic>;

#[derive(Default)]
struct SpanTable {
    loci: HashMap<Locus, SourceSpan>,
    symbols: HashMap<(Locus, String), SourceSpan>,
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<ParseDiagnostic>,
    spans: SpanTable,
    model: Model,
    current: Option<usize>,
    saw_statement: bool,
}

pub(super) fn parse(src: &str) -> ParseOutcome {
    let (toks, lex_diags) = tokenize(src);
    let mut p = Parser {
        src,
        toks,
        pos: 0,
        diags: lex_diags,
        spans: SpanTable::default(),
        model: Model::new("model"),
        current: None,
        saw_statement: false,
    };
    while p.pos < p.toks.len() {
        if p.peek_is_end() {
            p.pos += 1;
            continue;
        }
        if let Err(d) = p.statement() {
            p.diags.push(d);
            p.skip_statement();
        }
    }
    p.finish()
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn peek_is_end(&self) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::End, .. }) | None)
    }

    fn peek_ident(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(s), .. }) if s == kw)
    }

    fn peek_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == sym)
    }

    fn here(&self) -> SourceSpan {
        self.peek()
            .or_else(|| self.toks.last())
            .map(|t| t.span)
            .unwrap_or(SourceSpan::new(1, 1, 0))
    }

    fn next(&mut self) -> PResult<Token> {
        let t = self
            .peek()
            .cloned()
            .ok_or_else(|| ParseDiagnostic::error("unexpected end of document", self.here()))?;
        self.pos += 1;
        Ok(t)
    }

    fn unexpected(&self, what: &str) -> ParseDiagnostic {
        match self.peek() {
            Some(Token { tok: Tok::End, span, .. }) => {
                ParseDiagnostic::error(format!("expected {what}, found end of statement"), *span)
            }
            Some(t) => ParseDiagnostic::error(format!("expected {what}, found `{}`", describe(&t.tok)), t.span),
            None => ParseDiagnostic::error(format!("expected {what}"), self.here()),
        }
    }

    fn skip_statement(&mut self) {
        while !self.peek_is_end() {
            self.pos += 1;
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.peek_ident(kw) {
            Ok(self.next()?.span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn expect_sym(&mut self, sym: &str) -> PResult<SourceSpan> {
        if self.peek_sym(sym) {
            Ok(self.next()?.span)
        } else {
            Err(self.unexpected(&format!("`{sym}`")))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(s), span, .. }) => {
                let (s, span) = (s.clone(), *span);
                self.pos += 1;
                Ok((s, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    /// A declared name: an identifier that is not a keyword.
    fn name(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        let (s, span) = self.ident(what)?;
        if is_reserved(&s) {
            return Err(ParseDiagnostic::error(format!("`{s}` is a reserved word"), span));
        }
        Ok((s, span))
    }

    /// State reference: a name or `.` for the initial pseudo-state.
    fn state_ref(&mut self) -> PResult<(String, SourceSpan)> {
        if self.peek_sym(".") {
            let span = self.next()?.span;
            return Ok((INITIAL_STATE.to_string(), span));
        }
        self.name("state name or `.`")
    }

    fn number(&mut self, what: &str) -> PResult<(f64, SourceSpan)> {
        let neg = if self.peek_sym("-") { Some(self.next()?.span) } else { None };
        match self.peek() {
            Some(Token { tok: Tok::Number(text), span, .. }) => {
                let v: f64 = text.parse().expect("lexer yields decimal digits");
                let mut span = *span;
                self.pos += 1;
                if let Some(n) = neg {
                    span = SourceSpan::new(n.line, n.column, span.column + span.length - n.column);
                    return Ok((-v, span));
                }
                Ok((v, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn natural(&mut self, what: &str) -> PResult<(u32, SourceSpan)> {
        match self.peek() {
            Some(Token { tok: Tok::Number(text), span, .. }) => {
                let span = *span;
                let v = text
                    .parse::<u32>()
                    .map_err(|_| ParseDiagnostic::error(format!("{what} must be a natural number"), span))?;
                self.pos += 1;
                Ok((v, span))
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn end_statement(&mut self) -> PResult<()> {
        if self.peek_is_end() {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected("end of statement"))
        }
    }

    fn component_mut(&mut self, kw_span: SourceSpan, kw: &str) -> PResult<&mut Component> {
        match self.current {
            Some(i) => Ok(&mut self.model.components[i]),
            None => Err(ParseDiagnostic::error(format!("`{kw}` must appear inside a component block"), kw_span)),
        }
    }

    fn statement(&mut self) -> PResult<()> {
        let (kw, span) = self.ident("a statement keyword")?;
        let first = !self.saw_statement;
        self.saw_statement = true;
        match kw.as_str() {
            "model" => {
                if !first {
                    return Err(ParseDiagnostic::error("`model` header must be the first statement", span));
                }
                self.model_header()
            }
            "dynamic" => {
                self.current = None;
                self.dynamic()
            }
            "component" => self.component(),
            "event" => {
                self.current = None;
                self.event()
            }
            "state" => self.state(span),
            "in" | "out" => self.ports(span, kw == "out"),
            "transition" => self.transition(span),
            _ => Err(ParseDiagnostic::error(format!("unknown statement `{kw}`"), span)),
        }
    }

    fn model_header(&mut self) -> PResult<()> {
        let (name, span) = self.name("model name")?;
        self.model.name = name;
        self.spans.loci.insert(Locus::Model, span);
        if self.peek_ident("alert") {
            self.pos += 1;
            let (agg, span) = self.ident("`min` or `max`")?;
            self.model.alert = match agg.as_str() {
                "min" => AlertAggregator::Min,
                "max" => AlertAggregator::Max,
                _ => return Err(ParseDiagnostic::error(format!("unknown alert aggregator `{agg}`"), span)),
            };
        }
        self.end_statement()
    }

    fn dynamic(&mut self) -> PResult<()> {
        let (name, name_span) = self.name("dynamic name")?;
        self.expect_sym("=")?;
        let (kind, kind_span) = self.ident("`expr`, `poisson` or `series`")?;
        let mut consumable = false;
        let spec = match kind.as_str() {
            "expr" => {
                let tok = self.next()?;
                let Tok::Str(text) = &tok.tok else {
                    self.pos -= 1;
                    return Err(self.unexpected("a quoted expression"));
                };
                let expr = Expr::parse(text).map_err(|e| {
                    let col = tok.span.column + 1 + text[..e.offset].chars().count();
                    ParseDiagnostic::error(
                        format!("in expression: {}", e.message),
                        SourceSpan::new(tok.span.line, col, e.len),
                    )
                })?;
                DynamicSpec::Expression(expr)
            }
            "poisson" => {
                self.expect_sym("(")?;
                self.expect_keyword("rate")?;
                self.expect_sym("=")?;
                let (rate, _) = self.number("rate")?;
                self.expect_sym(")")?;
                if self.peek_ident("consumable") {
                    self.pos += 1;
                    consumable = true;
                }
                DynamicSpec::PoissonCounter { rate }
            }
            "series" => {
                self.expect_sym("(")?;
                let (interp, span) = self.ident("`hold` or `linear`")?;
                let interpolation = Interpolation::from_keyword(&interp)
                    .ok_or_else(|| ParseDiagnostic::error(format!("unknown interpolation `{interp}`"), span))?;
                self.expect_sym(")")?;
                self.expect_sym("[")?;
                let mut samples = Vec::new();
                if !self.peek_sym("]") {
                    loop {
                        let (t, _) = self.number("sample time")?;
                        self.expect_sym(":")?;
                        let (v, _) = self.number("sample value")?;
                        samples.push((t, v));
                        if !self.peek_sym(",") {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                self.expect_sym("]")?;
                DynamicSpec::TimeSeries(TimeSeries { samples, interpolation })
            }
            _ => return Err(ParseDiagnostic::error(format!("unknown dynamic kind `{kind}`"), kind_span)),
        };
        self.end_statement()?;
        self.spans.loci.insert(Locus::Dynamic(name.clone()), name_span);
        self.model.dynamics.push(Dynamic { name, spec, consumable });
        Ok(())
    }

    fn component(&mut self) -> PResult<()> {
        let (name, span) = self.name("component name")?;
        self.end_statement()?;
        self.spans.loci.insert(Locus::Component(name.clone()), span);
        self.model.components.push(Component::new(name));
        self.current = Some(self.model.components.len() - 1);
        Ok(())
    }

    fn state(&mut self, kw: SourceSpan) -> PResult<()> {
        let (name, span) = self.state_ref()?;
        self.expect_keyword("priority")?;
        let (prio, _) = self.natural("priority")?;
        self.end_statement()?;
        let c = self.component_mut(kw, "state")?;
        let cname = c.name.clone();
        if name == INITIAL_STATE {
            if c.initial_priority.replace(prio).is_some() {
                return Err(ParseDiagnostic::error("initial state priority set twice", span));
            }
            return Ok(());
        }
        c.states.push(State { name: name.clone(), priority: prio });
        self.spans.loci.insert(Locus::State { component: cname, state: name }, span);
        Ok(())
    }

    fn ports(&mut self, kw: SourceSpan, output: bool) -> PResult<()> {
        let mut names = vec![self.name("port name")?];
        while self.peek_sym(",") {
            self.pos += 1;
            names.push(self.name("port name")?);
        }
        self.end_statement()?;
        let cname = self.component_mut(kw, if output { "out" } else { "in" })?.name.clone();
        for (p, span) in &names {
            let locus = Locus::Port { component: cname.clone(), port: p.clone() };
            self.spans.symbols.insert((locus.clone(), p.clone()), *span);
            self.spans.loci.insert(locus, *span);
        }
        let c = self.component_mut(kw, "in")?;
        for (p, _) in names {
            if output {
                c.outputs.push(p);
            } else {
                c.inputs.push(p);
            }
        }
        Ok(())
    }

    fn transition(&mut self, kw: SourceSpan) -> PResult<()> {
        self.component_mut(kw, "transition")?;
        let (name, name_span) = self.name("transition name")?;
        self.expect_keyword("from")?;
        let (source, source_span) = self.state_ref()?;
        self.expect_keyword("to")?;
        let (target, target_span) = self.state_ref()?;
        let mut t = Transition::new(name.clone(), source.clone(), target.clone());
        let mut symbols = vec![(source, source_span), (target, target_span)];
        let mut seen: Vec<&str> = Vec::new();
        while !self.peek_is_end() {
            let (clause, span) = self.ident("a transition clause (`when`, `do`, `time`, `prio`, `prob`)")?;
            let clause: &'static str = match clause.as_str() {
                "when" => "when",
                "do" => "do",
                "time" => "time",
                "prio" => "prio",
                "prob" => "prob",
                other => return Err(ParseDiagnostic::error(format!("unknown transition clause `{other}`"), span)),
            };
            if seen.contains(&clause) {
                return Err(ParseDiagnostic::error(format!("duplicate `{clause}` clause"), span));
            }
            seen.push(clause);
            match clause {
                "when" => t.trigger = self.predicate(&mut symbols)?,
                "do" => {
                    self.expect_sym("{")?;
                    if !self.peek_sym("}") {
                        loop {
                            let (p, span) = self.name("port name")?;
                            symbols.push((p.clone(), span));
                            t.action.push(p);
                            if !self.peek_sym(",") {
                                break;
                            }
                            self.pos += 1;
                        }
                    }
                    self.expect_sym("}")?;
                }
                "time" => t.time = self.number("transition time")?.0,
                "prio" => t.priority = self.natural("transition priority")?.0,
                _ => t.probability = self.number("probability")?.0,
            }
        }
        self.end_statement()?;
        let c = self.component_mut(kw, "transition")?;
        let locus = Locus::Transition {
            component: c.name.clone(),
            transition: name,
        };
        c.transitions.push(t);
        for (sym, span) in symbols {
            self.spans.symbols.entry((locus.clone(), sym)).or_insert(span);
        }
        self.spans.loci.insert(locus, name_span);
        Ok(())
    }

    fn port_path(&mut self) -> PResult<(String, SourceSpan)> {
        let (first, span) = self.name("port or component.port")?;
        if !self.peek_sym(".") {
            return Ok((first, span));
        }
        self.pos += 1;
        let (port, pspan) = self.name("port name")?;
        let owned = self
            .model
            .component(&first)
            .map(|c| c.inputs.iter().chain(&c.outputs).any(|p| *p == port));
        match owned {
            None => Err(ParseDiagnostic::error(format!("unknown component `{first}`"), span)),
            Some(false) => Err(ParseDiagnostic::error(
                format!("component `{first}` has no port `{port}`"),
                pspan,
            )),
            Some(true) => Ok((port, pspan)),
        }
    }

    fn event(&mut self) -> PResult<()> {
        let (name, name_span) = self.name("event name")?;
        self.expect_keyword("from")?;
        let (source, sspan) = self.port_path()?;
        self.expect_keyword("to")?;
        let (target, tspan) = self.port_path()?;
        let weight = if self.peek_ident("weight") {
            self.pos += 1;
            self.number("weight")?.0
        } else {
            1.0
        };
        self.end_statement()?;
        let locus = Locus::Event(name.clone());
        self.spans.symbols.insert((locus.clone(), source.clone()), sspan);
        self.spans.symbols.entry((locus.clone(), target.clone())).or_insert(tspan);
        self.spans.loci.insert(locus, name_span);
        self.model.events.push(Event { name, source, target, weight });
        Ok(())
    }

    // predicate := conj ('or' conj)*
    fn predicate(&mut self, symbols: &mut Vec<(String, SourceSpan)>) -> PResult<Predicate> {
        let mut terms = vec![self.conjunction(symbols)?];
        while self.peek_ident("or") {
            self.pos += 1;
            terms.push(self.conjunction(symbols)?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Predicate::Or(terms) })
    }

    fn conjunction(&mut self, symbols: &mut Vec<(String, SourceSpan)>) -> PResult<Predicate> {
        let mut terms = vec![self.negation(symbols)?];
        while self.peek_ident("and") {
            self.pos += 1;
            terms.push(self.negation(symbols)?);
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Predicate::And(terms) })
    }

    fn negation(&mut self, symbols: &mut Vec<(String, SourceSpan)>) -> PResult<Predicate> {
        if self.peek_ident("not") {
            self.pos += 1;
            return Ok(Predicate::negate(self.negation(symbols)?));
        }
        self.atom(symbols)
    }

    fn atom(&mut self, symbols: &mut Vec<(String, SourceSpan)>) -> PResult<Predicate> {
        if self.peek_sym("(") {
            self.pos += 1;
            let p = self.predicate(symbols)?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let (id, span) = self.ident("a port, comparison, `true`, `false` or `(`")?;
        match id.as_str() {
            "true" => return Ok(Predicate::True),
            "false" => return Ok(Predicate::False),
            "all" | "any" => {
                self.expect_sym("(")?;
                let mut children = Vec::new();
                if !self.peek_sym(")") {
                    loop {
                        children.push(self.predicate(symbols)?);
                        if !self.peek_sym(",") {
                            break;
                        }
                        self.pos += 1;
                    }
                }
                self.expect_sym(")")?;
                return Ok(if id == "all" { Predicate::And(children) } else { Predicate::Or(children) });
            }
            _ if is_reserved(&id) => {
                return Err(ParseDiagnostic::error(format!("unexpected keyword `{id}` in trigger"), span))
            }
            _ => {}
        }
        symbols.push((id.clone(), span));
        let op = match self.peek() {
            Some(Token { tok: Tok::Sym(s), .. }) => CompareOp::from_symbol(s),
            _ => None,
        };
        let Some(op) = op else {
            return Ok(Predicate::PortRef(id));
        };
        self.pos += 1;
        let (value, _) = self.number("a number to compare against")?;
        Ok(Predicate::DynCompare { dynamic: id, op, value })
    }

    fn locate(&self, locus: &Locus, symbol: Option<&str>) -> SourceSpan {
        symbol
            .and_then(|s| self.spans.symbols.get(&(locus.clone(), s.to_string())))
            .or_else(|| self.spans.loci.get(locus))
            .copied()
            .unwrap_or_else(|| {
                let len = self.src.lines().next().map_or(0, |l| l.chars().count());
                SourceSpan::new(1, 1, len)
            })
    }

    fn finish(mut self) -> ParseOutcome {
        let syntax_ok = !self.diags.iter().any(|d| d.severity == Severity::Error);
        if syntax_ok {
            for v in validate_model(&self.model) {
                let span = self.locate(&v.locus, v.symbol.as_deref());
                self.diags.push(ParseDiagnostic::error(v.message, span));
            }
        }
        if !self.diags.iter().any(|d| d.severity == Severity::Error) {
            for c in &self.model.components {
                if !c.transitions.iter().any(|t| t.source == INITIAL_STATE) {
                    let span = self.locate(&Locus::Component(c.name.clone()), None);
                    self.diags.push(ParseDiagnostic::warning(
                        format!("component `{}` has no transition out of the initial state", c.name),
                        span,
                    ));
                }
            }
        }
        let model = if self.diags.iter().any(|d| d.severity == Severity::Error) {
            None
        } else {
            Some(self.model)
        };
        self.diags.sort_by_key(|d| (d.span.line, d.span.column));
        ParseOutcome {
            model,
            diagnostics: self.diags,
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) | Tok::Number(s) => s.clone(),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Sym(s) => s.to_string(),
        Tok::End => "end of statement".into(),
    }
}
