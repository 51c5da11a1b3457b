//! Supremal controllable sublanguage, decentralized supervisors and
//! coordinators.

use rayon::prelude::*;

use crate::automata::{
    coreachable_within, is_nonblocking, restrict, sync_all, sync_product_with_origins, trim, Alphabet, Automaton,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ArtifactKind {
    Decentralized,
    Coordinator,
    Cluster,
    Abstraction,
}

impl ArtifactKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ArtifactKind::Decentralized => "decentralized",
            ArtifactKind::Coordinator => "coordinator",
            ArtifactKind::Cluster => "cluster",
            ArtifactKind::Abstraction => "abstraction",
        }
    }
}

/// A synthesized automaton together with where it sits in the hierarchy.
#[derive(Debug, Clone)]
pub struct SupervisorArtifact {
    pub automaton: Automaton,
    pub kind: ArtifactKind,
    pub enforced_spec: Option<String>,
    pub level: usize,
}

impl SupervisorArtifact {
    pub fn is_empty(&self) -> bool {
        self.automaton.is_empty()
    }
}

/// The synchronous product of the components sharing at least one event with
/// `spec`.
pub fn local_plant(spec: &Automaton, components: &[Automaton]) -> Result<Automaton> {
    if components.is_empty() {
        return Err(Error::Precondition("no plant components given".into()));
    }
    let sharing: Vec<&Automaton> = components
        .iter()
        .filter(|g| !g.alphabet().is_disjoint(spec.alphabet()))
        .collect();
    let name = format!("G_{}", spec.name());
    match sync_all(sharing) {
        Some(plant) => Ok(plant.with_name(name)),
        None => Err(Error::NoSharingComponent {
            spec: spec.name().to_string(),
        }),
    }
}

/// Trim automaton whose marked language is `supC(Lm(plant) ∥ Lm(spec))`,
/// controllability taken with respect to `plant`.
///
/// Product states are pruned until stable: a state goes if it cannot reach a
/// kept marked state, or if the plant enables an uncontrollable event there
/// that the product either blocks or sends to a pruned state.
pub fn sup_con(plant: &Automaton, spec: &Automaton) -> Automaton {
    let (product, origins) = sync_product_with_origins(plant, spec);
    let name = format!("supC({}, {})", plant.name(), spec.name());
    if product.is_empty() {
        return product.with_name(name);
    }
    let n = product.num_states();
    let mut good = vec![true; n];
    loop {
        let mut changed = false;

        let coreach = coreachable_within(&product, &good);
        for q in 0..n {
            if good[q] && !coreach[q] {
                good[q] = false;
                changed = true;
            }
        }

        for q in 0..n {
            if !good[q] {
                continue;
            }
            let plant_state = origins[q].0;
            let bad = plant
                .transitions_from(plant_state)
                .iter()
                .filter(|(e, _)| e.is_uncontrollable())
                .any(|&(e, _)| !product.step(q, e).is_some_and(|r| good[r]));
            if bad {
                good[q] = false;
                changed = true;
            }
        }

        if !changed {
            break;
        }
    }
    trim(&restrict(&product, &good)).with_name(name)
}

/// Outcome of level-0 synthesis.
#[derive(Debug, Clone)]
pub struct Decentralized {
    /// One supervisor per specification, in input order. Empty supervisors are
    /// kept here but flagged in `unenforceable`.
    pub supervisors: Vec<SupervisorArtifact>,
    /// Names of specifications whose supervisor came out empty.
    pub unenforceable: Vec<String>,
}

/// `SUP_i = supC(G_{E_i} ∥ E_i)` for every specification.
pub fn synth_decentralized(components: &[Automaton], specs: &[Automaton]) -> Result<Decentralized> {
    let supervisors = specs
        .par_iter()
        .map(|spec| {
            let plant = local_plant(spec, components)?;
            Ok(SupervisorArtifact {
                automaton: sup_con(&plant, spec).with_name(format!("SUP_{}", spec.name())),
                kind: ArtifactKind::Decentralized,
                enforced_spec: Some(spec.name().to_string()),
                level: 0,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let unenforceable = supervisors
        .iter()
        .filter(|s| s.is_empty())
        .filter_map(|s| s.enforced_spec.clone())
        .collect();
    Ok(Decentralized {
        supervisors,
        unenforceable,
    })
}

/// Whether the synchronous product of `entities` is nonblocking.
pub fn nonconflicting<'a, I>(entities: I) -> bool
where
    I: IntoIterator<Item = &'a Automaton>,
{
    sync_all(entities).is_none_or(|p| is_nonblocking(&p))
}

/// `supC((∥ Lm(T_i)) ∥ Σ_l*)` with `Σ_l` the union of the entity alphabets.
pub fn synth_coordinator(entities: &[&Automaton], name: &str, level: usize) -> Result<SupervisorArtifact> {
    let plant = sync_all(entities.iter().copied())
        .ok_or_else(|| Error::Precondition("coordinator over an empty entity list".into()))?;
    let sigma: Alphabet = entities.iter().fold(Alphabet::new(), |acc, t| acc.union(t.alphabet()));
    let universal = Automaton::universal(format!("{}*", name), sigma.clone());
    let coordinator = sup_con(&plant, &universal).with_name(name).extend_alphabet(&sigma);
    if coordinator.is_empty() {
        return Err(Error::UnresolvableConflict {
            members: entities.iter().map(|t| t.name()).collect::<Vec<_>>().join(", "),
        });
    }
    Ok(SupervisorArtifact {
        automaton: coordinator,
        kind: ArtifactKind::Coordinator,
        enforced_spec: None,
        level,
    })
}
