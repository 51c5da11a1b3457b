//! Small hand-built projects used by tests, benches and the bundled examples.

use crate::automata::{Alphabet, Automaton, AutomatonBuilder, EventRegistry};
use crate::project::Project;

/// Builds an automaton over already-declared events. States are `0..states`,
/// state 0 is initial. Panics on malformed input.
pub fn build(
    reg: &EventRegistry,
    name: &str,
    events: &[&str],
    states: usize,
    marked: &[usize],
    trans: &[(usize, &str, usize)],
) -> Automaton {
    let lookup = |n: &str| reg.lookup(n).unwrap_or_else(|| panic!("undeclared event {n}"));
    let alphabet: Alphabet = events.iter().map(|n| lookup(n)).collect();
    let mut b = AutomatonBuilder::new(name, alphabet);
    b.add_states(states);
    if states > 0 {
        b.set_initial(0);
    }
    for &q in marked {
        b.set_marked(q, true);
    }
    for &(src, e, dst) in trans {
        b.add_transition(src, lookup(e), dst).expect("fixture transition");
    }
    b.build().expect("fixture automaton")
}

/// `idle -start-> work -finish-> idle`, idle marked.
fn machine(reg: &EventRegistry, name: &str, start: &str, finish: &str) -> Automaton {
    build(reg, name, &[start, finish], 2, &[0], &[(0, start, 1), (1, finish, 0)])
}

/// One-slot buffer filled by `fill` and emptied by `drain`.
fn buffer(reg: &EventRegistry, name: &str, fill: &str, drain: &str) -> Automaton {
    build(reg, name, &[fill, drain], 2, &[0], &[(0, fill, 1), (1, drain, 0)])
}

/// Two machines linked by a one-slot buffer. Starts (`a*`) are controllable,
/// finishes (`b*`) uncontrollable.
pub fn small_factory() -> Project {
    transfer_line(2)
}

/// `n` machines in series with `n - 1` one-slot buffers between them.
pub fn transfer_line(n: usize) -> Project {
    assert!(n >= 2);
    let mut reg = EventRegistry::new();
    for i in 1..=n {
        reg.controllable(&format!("a{i}"));
        reg.uncontrollable(&format!("b{i}"));
    }
    let components = (1..=n)
        .map(|i| machine(&reg, &format!("M{i}"), &format!("a{i}"), &format!("b{i}")))
        .collect();
    let specs = (1..n)
        .map(|i| {
            let name = if n == 2 { "B".to_string() } else { format!("B{i}") };
            buffer(&reg, &name, &format!("b{i}"), &format!("a{}", i + 1))
        })
        .collect();
    Project {
        registry: reg,
        components,
        specs,
    }
}

/// `n` philosophers around `n` forks, each taking the left fork then the
/// right one. The fork mutexes are individually enforceable but jointly
/// deadlock, so a coordinator is required.
pub fn dining_philosophers(n: usize) -> Project {
    assert!(n >= 2);
    let mut reg = EventRegistry::new();
    for i in 0..n {
        reg.controllable(&format!("t{i}l"));
        reg.controllable(&format!("t{i}r"));
        reg.uncontrollable(&format!("p{i}"));
    }
    let components = (0..n)
        .map(|i| {
            let (l, r, p) = (format!("t{i}l"), format!("t{i}r"), format!("p{i}"));
            build(
                &reg,
                &format!("PH{i}"),
                &[&l, &r, &p],
                3,
                &[0],
                &[(0, &l, 1), (1, &r, 2), (2, &p, 0)],
            )
        })
        .collect();
    let specs = (0..n)
        .map(|j| {
            let prev = (j + n - 1) % n;
            let (own, own_put) = (format!("t{j}l"), format!("p{j}"));
            let (nb, nb_put) = (format!("t{prev}r"), format!("p{prev}"));
            build(
                &reg,
                &format!("F{j}"),
                &[&own, &own_put, &nb, &nb_put],
                3,
                &[0],
                &[(0, &own, 1), (1, &own_put, 0), (0, &nb, 2), (2, &nb_put, 0)],
            )
        })
        .collect();
    Project {
        registry: reg,
        components,
        specs,
    }
}

/// Two decentralized supervisors that conflict: `T1` marks only after `x`,
/// `T2` disables `x` once its private `b` has occurred.
pub fn conflicting_pair() -> (EventRegistry, Automaton, Automaton) {
    let mut reg = EventRegistry::new();
    reg.controllable("x");
    reg.controllable("b");
    let t1 = build(&reg, "T1", &["x"], 2, &[1], &[(0, "x", 1)]);
    let t2 = build(&reg, "T2", &["x", "b"], 2, &[0, 1], &[(0, "x", 0), (0, "b", 1)]);
    (reg, t1, t2)
}

/// A project whose two decentralized supervisors reproduce
/// [`conflicting_pair`]. With `b_controllable = false` the conflict cannot be
/// resolved.
pub fn conflicting_project(b_controllable: bool) -> Project {
    let mut reg = EventRegistry::new();
    reg.controllable("x");
    if b_controllable {
        reg.controllable("b");
    } else {
        reg.uncontrollable("b");
    }
    let gx = build(&reg, "GX", &["x"], 1, &[0], &[(0, "x", 0)]);
    let gb = build(&reg, "GB", &["b"], 1, &[0], &[(0, "b", 0)]);
    let e1 = build(&reg, "E1", &["x"], 2, &[1], &[(0, "x", 1)]);
    let e2 = build(
        &reg,
        "E2",
        &["x", "b"],
        2,
        &[0, 1],
        &[(0, "x", 0), (0, "b", 1), (1, "b", 1)],
    );
    Project {
        registry: reg,
        components: vec![gx, gb],
        specs: vec![e1, e2],
    }
}

/// Entity names of the AGV case study in the row/column order of
/// [`AGV_STOCHASTIC_MATRIX`].
pub const AGV_ENTITY_NAMES: [&str; 9] = ["Z1", "Z2", "Z3", "Z4", "WS13", "WS14", "WS2", "WS3", "IPS"];

/// The published column-stochastic matrix of the AGV case study, as printed
/// (four decimals).
#[rustfmt::skip]
pub const AGV_STOCHASTIC_MATRIX: [[f64; 9]; 9] = [
    [0.2500, 0.1250, 0.1111, 0.0,    0.0,    0.0,    0.1667, 0.1111, 0.2500],
    [0.1250, 0.2500, 0.1111, 0.0,    0.1667, 0.0,    0.1667, 0.1111, 0.1250],
    [0.1250, 0.1250, 0.2222, 0.1429, 0.0,    0.1429, 0.0,    0.2222, 0.1250],
    [0.0,    0.0,    0.1111, 0.2857, 0.1667, 0.2857, 0.0,    0.1111, 0.0   ],
    [0.0,    0.1250, 0.0,    0.1429, 0.3333, 0.1429, 0.1667, 0.0,    0.0   ],
    [0.0,    0.0,    0.1111, 0.2857, 0.1667, 0.2857, 0.0,    0.1111, 0.0   ],
    [0.1250, 0.1250, 0.0,    0.0,    0.1667, 0.0,    0.3333, 0.0,    0.1250],
    [0.1250, 0.1250, 0.2222, 0.1429, 0.0,    0.1429, 0.0,    0.2222, 0.1250],
    [0.2500, 0.1250, 0.1111, 0.0,    0.0,    0.0,    0.1667, 0.1111, 0.2500],
];

/// The AGV matrix in the plain-text matrix format.
pub fn agv_matrix_text() -> String {
    let mut out = String::from("# AGV case study: column-stochastic matrix M\n");
    out.push_str(&format!("# order: {}\n", AGV_ENTITY_NAMES.join(" ")));
    for row in AGV_STOCHASTIC_MATRIX {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.4}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
