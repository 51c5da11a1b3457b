//! Line-oriented text formats for automata, event registries, projects and
//! matrices, plus report rendering.
//!
//! Automaton file:
//!
//! ```text
//! automaton M1
//! event a1 controllable
//! event b1 uncontrollable
//! state idle initial marked
//! state work
//! trans idle a1 work
//! trans work b1 idle
//! ```
//!
//! `#` starts a comment. Declarations may appear in any order. An `event`
//! line without a kind refers to an event already in the registry (for
//! instance from a shared `events.des` holding only `event` lines).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::automata::{Alphabet, Automaton, AutomatonBuilder, Event, EventRegistry};
use crate::clustering::MclParams;
use crate::error::{Error, Result};
use crate::hierarchy::{HierarchyResult, RunReport};
use crate::project::Project;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// A whitespace-separated token with its 1-based column.
#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Non-empty lines with comments removed, as `(line number, tokens)`.
fn tokenize(text: &str) -> Vec<(usize, Vec<Token<'_>>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let line = raw.split('#').next().unwrap_or("");
            let mut tokens = Vec::new();
            let mut start = None;
            for (pos, ch) in line.char_indices().chain([(line.len(), ' ')]) {
                match (ch.is_whitespace(), start) {
                    (false, None) => start = Some(pos),
                    (true, Some(s)) => {
                        tokens.push(Token {
                            text: &line[s..pos],
                            column: line[..s].chars().count() + 1,
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
            (!tokens.is_empty()).then_some((i + 1, tokens))
        })
        .collect()
}

struct Ctx<'a> {
    origin: &'a str,
}

impl Ctx<'_> {
    fn err(&self, line: usize, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            path: self.origin.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn arity(&self, line: usize, tokens: &[Token<'_>], min: usize, max: usize) -> Result<()> {
        if tokens.len() < min {
            let col = tokens.last().map_or(1, |t| t.column + t.text.len());
            return Err(self.err(line, col, format!("`{}` expects more fields", tokens[0].text)));
        }
        if tokens.len() > max {
            let t = tokens[max];
            return Err(self.err(line, t.column, format!("unexpected `{}`", t.text)));
        }
        Ok(())
    }

    fn kind(&self, line: usize, t: Token<'_>) -> Result<bool> {
        match t.text {
            "controllable" => Ok(true),
            "uncontrollable" => Ok(false),
            other => Err(self.err(
                line,
                t.column,
                format!("expected `controllable` or `uncontrollable`, found `{other}`"),
            )),
        }
    }
}

/// Parses `event` lines into `reg`.
pub fn parse_registry(text: &str, origin: &str, reg: &mut EventRegistry) -> Result<()> {
    let ctx = Ctx { origin };
    for (line, tokens) in tokenize(text) {
        if tokens[0].text != "event" {
            return Err(ctx.err(
                line,
                tokens[0].column,
                format!("unknown directive `{}`", tokens[0].text),
            ));
        }
        ctx.arity(line, &tokens, 3, 3)?;
        let controllable = ctx.kind(line, tokens[2])?;
        reg.declare(tokens[1].text, controllable, format!("{origin}:{line}"))?;
    }
    Ok(())
}

pub fn load_registry(path: &Path, reg: &mut EventRegistry) -> Result<()> {
    parse_registry(&read(path)?, &path.display().to_string(), reg)
}

pub fn parse_automaton(text: &str, origin: &str, reg: &mut EventRegistry) -> Result<Automaton> {
    let ctx = Ctx { origin };
    let lines = tokenize(text);
    let mut name: Option<String> = None;
    let mut alphabet = Alphabet::new();
    let mut state_ids: HashMap<&str, usize> = HashMap::new();
    let mut states: Vec<(&str, bool)> = Vec::new();
    let mut initial: Option<(usize, usize)> = None;
    let mut trans: Vec<(usize, [Token<'_>; 3])> = Vec::new();

    for (line, tokens) in &lines {
        let line = *line;
        let head = tokens[0];
        match head.text {
            "automaton" => {
                ctx.arity(line, tokens, 2, 2)?;
                if name.is_some() {
                    return Err(ctx.err(line, head.column, "second `automaton` line"));
                }
                name = Some(tokens[1].text.to_string());
            }
            "event" => {
                ctx.arity(line, tokens, 2, 3)?;
                let ev = if let Some(&k) = tokens.get(2) {
                    let controllable = ctx.kind(line, k)?;
                    reg.declare(tokens[1].text, controllable, format!("{origin}:{line}"))?
                } else {
                    reg.lookup(tokens[1].text).ok_or_else(|| {
                        ctx.err(
                            line,
                            tokens[1].column,
                            format!("event `{}` has no kind and is not in the registry", tokens[1].text),
                        )
                    })?
                };
                alphabet.insert(ev);
            }
            "state" => {
                ctx.arity(line, tokens, 2, 4)?;
                let sname = tokens[1].text;
                if state_ids.contains_key(sname) {
                    return Err(ctx.err(line, tokens[1].column, format!("state `{sname}` declared twice")));
                }
                let id = states.len();
                let mut marked = false;
                for t in &tokens[2..] {
                    match t.text {
                        "initial" => {
                            if let Some((_, first)) = initial {
                                return Err(ctx.err(
                                    line,
                                    t.column,
                                    format!("second initial state (first on line {first})"),
                                ));
                            }
                            initial = Some((id, line));
                        }
                        "marked" => marked = true,
                        other => {
                            return Err(ctx.err(
                                line,
                                t.column,
                                format!("expected `initial` or `marked`, found `{other}`"),
                            ))
                        }
                    }
                }
                state_ids.insert(sname, id);
                states.push((sname, marked));
            }
            "trans" => {
                ctx.arity(line, tokens, 4, 4)?;
                trans.push((line, [tokens[1], tokens[2], tokens[3]]));
            }
            other => return Err(ctx.err(line, head.column, format!("unknown directive `{other}`"))),
        }
    }

    let name = name.ok_or_else(|| ctx.err(1, 1, "missing `automaton <name>` line"))?;
    if !states.is_empty() && initial.is_none() {
        return Err(ctx.err(1, 1, format!("automaton {name} has no initial state")));
    }
    let mut b = AutomatonBuilder::new(name.clone(), alphabet.clone());
    for &(_, marked) in &states {
        b.add_state(marked);
    }
    if let Some((q0, _)) = initial {
        b.set_initial(q0);
    }
    let mut seen: HashMap<(usize, Event), (usize, usize)> = HashMap::new();
    for (line, [src, ev, dst]) in trans {
        let state = |t: Token<'_>| {
            state_ids
                .get(t.text)
                .copied()
                .ok_or_else(|| ctx.err(line, t.column, format!("undeclared state `{}`", t.text)))
        };
        let (s, d) = (state(src)?, state(dst)?);
        let e = reg.lookup(ev.text).filter(|e| alphabet.contains(*e)).ok_or_else(|| {
            ctx.err(
                line,
                ev.column,
                format!("event `{}` is not in the alphabet of {name}", ev.text),
            )
        })?;
        match seen.get(&(s, e)) {
            Some(&(other, _)) if other == d => continue,
            Some(&(_, first)) => {
                return Err(Error::Nondeterministic {
                    automaton: name.clone(),
                    state: format!("{} ({origin}:{first} and line {line})", src.text),
                    event: ev.text.to_string(),
                })
            }
            None => {
                seen.insert((s, e), (d, line));
            }
        }
        b.add_transition(s, e, d)?;
    }
    b.build()
}

pub fn load_automaton(path: &Path, reg: &mut EventRegistry) -> Result<Automaton> {
    parse_automaton(&read(path)?, &path.display().to_string(), reg)
}

/// Serializes `a` with events sorted by name and states named `s<id>`.
pub fn write_automaton(a: &Automaton, reg: &EventRegistry) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "automaton {}", a.name());
    let mut events: Vec<Event> = a.alphabet().iter().collect();
    events.sort_by(|x, y| reg.name(*x).cmp(reg.name(*y)));
    for e in &events {
        let kind = if e.is_controllable() {
            "controllable"
        } else {
            "uncontrollable"
        };
        let _ = writeln!(out, "event {} {kind}", reg.name(*e));
    }
    for q in 0..a.num_states() {
        let _ = write!(out, "state s{q}");
        if a.initial() == Some(q) {
            out.push_str(" initial");
        }
        if a.is_marked(q) {
            out.push_str(" marked");
        }
        out.push('\n');
    }
    for q in 0..a.num_states() {
        let mut ts: Vec<(&str, usize)> = a.transitions_from(q).iter().map(|&(e, r)| (reg.name(e), r)).collect();
        ts.sort();
        for (e, r) in ts {
            let _ = writeln!(out, "trans s{q} {e} s{r}");
        }
    }
    out
}

pub fn save_automaton(path: &Path, a: &Automaton, reg: &EventRegistry) -> Result<()> {
    write(path, &write_automaton(a, reg))
}

/// MCL settings as given in a project file; unset fields take defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamOverrides {
    pub alpha: Option<u32>,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub prune: Option<f64>,
    pub max_iters: Option<usize>,
}

impl ParamOverrides {
    /// Fields of `other` that are set win.
    pub fn overridden_by(&self, other: &ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            alpha: other.alpha.or(self.alpha),
            beta: other.beta.or(self.beta),
            epsilon: other.epsilon.or(self.epsilon),
            prune: other.prune.or(self.prune),
            max_iters: other.max_iters.or(self.max_iters),
        }
    }

    pub fn resolve(&self) -> Result<MclParams> {
        let beta = self
            .beta
            .ok_or_else(|| Error::Validation("beta is required (flag --beta or `param beta`)".into()))?;
        let mut p = MclParams::new(beta);
        if let Some(a) = self.alpha {
            p.alpha = a;
        }
        if let Some(e) = self.epsilon {
            p.epsilon = e;
        }
        if let Some(x) = self.prune {
            p.prune = x;
        }
        if let Some(m) = self.max_iters {
            p.max_iters = m;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct ProjectFile {
    pub path: PathBuf,
    pub registries: Vec<PathBuf>,
    pub components: Vec<PathBuf>,
    pub specs: Vec<PathBuf>,
    pub matrices: Vec<PathBuf>,
    pub params: ParamOverrides,
    pub output: Option<PathBuf>,
}

/// Parses a project file. Relative paths are resolved against `base`.
///
/// ```text
/// events events.des
/// component M1.des
/// spec B.des
/// param beta 4
/// output out
/// ```
pub fn parse_project(text: &str, origin: &str, base: &Path) -> Result<ProjectFile> {
    let ctx = Ctx { origin };
    let mut pf = ProjectFile {
        path: PathBuf::from(origin),
        registries: Vec::new(),
        components: Vec::new(),
        specs: Vec::new(),
        matrices: Vec::new(),
        params: ParamOverrides::default(),
        output: None,
    };
    for (line, tokens) in tokenize(text) {
        let head = tokens[0];
        let path = |t: Token<'_>| base.join(t.text);
        match head.text {
            "events" | "component" | "spec" | "matrix" | "output" => {
                ctx.arity(line, &tokens, 2, 2)?;
                let p = path(tokens[1]);
                match head.text {
                    "events" => pf.registries.push(p),
                    "component" => pf.components.push(p),
                    "spec" => pf.specs.push(p),
                    "matrix" => pf.matrices.push(p),
                    _ => pf.output = Some(p),
                }
            }
            "param" => {
                ctx.arity(line, &tokens, 3, 3)?;
                let v = tokens[2];
                let bad = |what: &str| ctx.err(line, v.column, format!("`{}` is not a valid {what}", v.text));
                match tokens[1].text {
                    "alpha" => pf.params.alpha = Some(v.text.parse().map_err(|_| bad("integer"))?),
                    "beta" => pf.params.beta = Some(v.text.parse().map_err(|_| bad("number"))?),
                    "epsilon" => pf.params.epsilon = Some(v.text.parse().map_err(|_| bad("number"))?),
                    "prune" => pf.params.prune = Some(v.text.parse().map_err(|_| bad("number"))?),
                    "max_iters" => pf.params.max_iters = Some(v.text.parse().map_err(|_| bad("integer"))?),
                    other => return Err(ctx.err(line, tokens[1].column, format!("unknown parameter `{other}`"))),
                }
            }
            other => return Err(ctx.err(line, head.column, format!("unknown directive `{other}`"))),
        }
    }
    Ok(pf)
}

pub fn read_project_file(path: &Path) -> Result<ProjectFile> {
    let base = path.parent().unwrap_or(Path::new("."));
    parse_project(&read(path)?, &path.display().to_string(), base)
}

impl ProjectFile {
    /// Loads every referenced automaton into one registry. A project without
    /// components or specifications is rejected.
    pub fn load(&self) -> Result<Project> {
        if self.components.is_empty() || self.specs.is_empty() {
            let mut missing = Vec::new();
            if self.components.is_empty() {
                missing.push("component");
            }
            if self.specs.is_empty() {
                missing.push("spec");
            }
            return Err(Error::Validation(format!(
                "missing automata: {} declares no {} files",
                self.path.display(),
                missing.join(" or ")
            )));
        }
        let mut registry = EventRegistry::new();
        for r in &self.registries {
            load_registry(r, &mut registry)?;
        }
        let components = self
            .components
            .iter()
            .map(|p| load_automaton(p, &mut registry))
            .collect::<Result<Vec<_>>>()?;
        let specs = self
            .specs
            .iter()
            .map(|p| load_automaton(p, &mut registry))
            .collect::<Result<Vec<_>>>()?;
        let mut names: HashMap<&str, usize> = HashMap::new();
        for a in components.iter().chain(&specs) {
            *names.entry(a.name()).or_default() += 1;
        }
        if let Some((dup, _)) = names.iter().find(|(_, &c)| c > 1) {
            return Err(Error::Validation(format!("automaton name {dup} is used twice")));
        }
        Ok(Project {
            registry,
            components,
            specs,
        })
    }
}

/// Rows of whitespace-separated decimals; must be square.
pub fn parse_matrix(text: &str, origin: &str) -> Result<DMatrix<f64>> {
    let ctx = Ctx { origin };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, tokens) in tokenize(text) {
        let row = tokens
            .iter()
            .map(|t| {
                t.text
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| ctx.err(line, t.column, format!("`{}` is not a number", t.text)))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(ctx.err(
                    line,
                    1,
                    format!("row has {} entries, expected {}", row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    let n = rows.len();
    if n == 0 {
        return Err(Error::Matrix(format!("{origin}: no rows")));
    }
    if rows[0].len() != n {
        return Err(Error::Matrix(format!(
            "{origin}: {n} rows of {} entries is not square",
            rows[0].len()
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub fn load_matrix(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

/// Deterministic plain-text report; timings are left out.
pub fn render_report(result: &HierarchyResult) -> String {
    let r: &RunReport = &result.report;
    let mut out = String::new();
    let _ = writeln!(out, "supervisors {}", result.supervisors.len());
    for s in &result.supervisors {
        let _ = writeln!(
            out,
            "  {} states={} transitions={}",
            s.automaton.name(),
            s.automaton.num_states(),
            s.automaton.num_transitions()
        );
    }
    let _ = writeln!(out, "coordinators {}", result.coordinators.len());
    for c in &result.coordinators {
        let _ = writeln!(
            out,
            "  {} level={} states={} transitions={}",
            c.automaton.name(),
            c.level,
            c.automaton.num_states(),
            c.automaton.num_transitions()
        );
    }
    for name in &r.unenforceable {
        let _ = writeln!(out, "unenforceable {name}");
    }
    for l in &r.levels {
        let _ = writeln!(
            out,
            "level {} clusters={} coordinators={}",
            l.level,
            l.clusters,
            l.coordinators()
        );
        let _ = writeln!(
            out,
            "  entities={} forced_merge={}",
            l.entities,
            if l.forced_merge { "yes" } else { "no" }
        );
        for (k, c) in l.cluster_reports.iter().enumerate() {
            let co = c
                .coordinator
                .as_ref()
                .map_or("-".to_string(), |(n, s)| format!("{n}:{s}"));
            let abs = c.abstraction_states.map_or("-".to_string(), |s| s.to_string());
            let _ = writeln!(
                out,
                "  cluster {k} members={} states={} coordinator={co} interface={} extended={} abstraction={abs}",
                c.members.join(","),
                c.cluster_states,
                c.interface_events,
                c.extension_events,
            );
        }
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning {w}");
    }
    out
}

/// Writes every supervisor and coordinator as `<name>.des` and the report as
/// `report.txt` into `dir`. Returns the written paths in order.
pub fn write_outputs(dir: &Path, result: &HierarchyResult, reg: &EventRegistry) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for art in result.supervisors.iter().chain(&result.coordinators) {
        let p = dir.join(format!("{}.des", art.automaton.name()));
        save_automaton(&p, &art.automaton, reg)?;
        written.push(p);
    }
    let p = dir.join("report.txt");
    write(&p, &render_report(result))?;
    written.push(p);
    Ok(written)
}
