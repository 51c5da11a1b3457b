//! Level-by-level hierarchical synthesis: decentralized supervisors, then
//! cluster, coordinate and abstract until a single cluster remains, then a
//! final top-level check.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::abstraction::{extend_to_observer, interface_alphabet, AbstractionSpec};
use crate::automata::{is_nonblocking, sync_all, sync_product, Alphabet, Automaton};
use crate::clustering::{markov_clustering, MclParams, Partition};
use crate::error::{Error, Result};
use crate::project::Project;
use crate::synthesis::{synth_coordinator, synth_decentralized, ArtifactKind, SupervisorArtifact};

pub const TOO_LARGE_BETA: &str = "beta is too large and should be decreased";

/// Arena node of the supervisor hierarchy. Leaves are decentralized
/// supervisors; cluster nodes carry the released abstraction and point at
/// their members and, if one was needed, their coordinator.
#[derive(Debug, Clone)]
pub struct HierarchyNode {
    pub artifact: SupervisorArtifact,
    pub children: Vec<usize>,
    pub cluster_id: usize,
    pub level: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterReport {
    pub members: Vec<String>,
    pub cluster_states: usize,
    /// Name and state count of the coordinator, if the cluster conflicted.
    pub coordinator: Option<(String, usize)>,
    pub interface_events: usize,
    /// Events added to the interface to obtain an observer.
    pub extension_events: usize,
    /// `None` when the abstraction has an empty alphabet and was dropped.
    pub abstraction_states: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelReport {
    pub level: usize,
    pub entities: usize,
    pub clusters: usize,
    pub forced_merge: bool,
    pub cluster_reports: Vec<ClusterReport>,
}

impl LevelReport {
    pub fn coordinators(&self) -> usize {
        self.cluster_reports.iter().filter(|c| c.coordinator.is_some()).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub levels: Vec<LevelReport>,
    pub unenforceable: Vec<String>,
    pub warnings: Vec<String>,
    /// Wall-clock per phase; not part of any deterministic output.
    pub timings: Vec<(String, Duration)>,
}

#[derive(Debug, Clone)]
pub struct HierarchyResult {
    pub supervisors: Vec<SupervisorArtifact>,
    pub coordinators: Vec<SupervisorArtifact>,
    pub report: RunReport,
    pub nodes: Vec<HierarchyNode>,
}

/// What one level produced for one block of the partition.
#[derive(Debug, Clone)]
pub struct BlockOutcome {
    pub coordinator: Option<SupervisorArtifact>,
    pub abstraction: Option<SupervisorArtifact>,
    pub report: ClusterReport,
}

/// Partition of the entities for the next level. At most two entities form a
/// single cluster. Entities sharing nothing with any component are kept as
/// singletons outside the clustering.
pub fn cluster_entities(
    entity_alphabets: &[&Alphabet],
    component_alphabets: &[&Alphabet],
    params: &MclParams,
) -> Result<Partition> {
    let n = entity_alphabets.len();
    if n <= 2 {
        return Ok(Partition::single(n));
    }
    let (related, unrelated): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| component_alphabets.iter().any(|c| !c.is_disjoint(entity_alphabets[i])));
    let mut blocks: Vec<Vec<usize>> = unrelated.iter().map(|&i| vec![i]).collect();
    if !related.is_empty() {
        let sub: Vec<&Alphabet> = related.iter().map(|&i| entity_alphabets[i]).collect();
        let p = markov_clustering(&sub, component_alphabets, params)?;
        blocks.extend(p.blocks().iter().map(|b| b.iter().map(|&k| related[k]).collect()));
    }
    Partition::new(blocks, n)
}

/// Composes, coordinates and abstracts every block of `partition`.
///
/// Coordinators come back named `CO_<level>_<block>`; the caller renumbers
/// them. Blocks are processed concurrently and returned in block order.
pub fn level_step(entities: &[SupervisorArtifact], partition: &Partition, level: usize) -> Result<Vec<BlockOutcome>> {
    partition
        .blocks()
        .par_iter()
        .enumerate()
        .map(|(k, block)| {
            let members: Vec<&Automaton> = block.iter().map(|&i| &entities[i].automaton).collect();
            let externals: Vec<&Alphabet> = (0..entities.len())
                .filter(|i| !block.contains(i))
                .map(|i| entities[i].automaton.alphabet())
                .collect();
            block_step(&members, externals, level, k)
        })
        .collect()
}

fn block_step(members: &[&Automaton], externals: Vec<&Alphabet>, level: usize, k: usize) -> Result<BlockOutcome> {
    let clu_name = format!("CLU_{level}_{k}");
    let mut clu = sync_all(members.iter().copied())
        .ok_or_else(|| Error::Invariant("empty cluster".into()))?
        .with_name(clu_name.clone());
    let coordinator = if is_nonblocking(&clu) {
        None
    } else {
        let co = synth_coordinator(members, &format!("CO_{level}_{k}"), level)?;
        clu = sync_product(&clu, &co.automaton).with_name(clu_name.clone());
        Some(co)
    };
    if !is_nonblocking(&clu) {
        return Err(Error::Invariant(format!("{clu_name} is blocking after coordination")));
    }
    let interface = interface_alphabet(clu.alphabet(), externals);
    let observable = extend_to_observer(&clu, &interface)?;
    let mut report = ClusterReport {
        members: members.iter().map(|m| m.name().to_string()).collect(),
        cluster_states: clu.num_states(),
        coordinator: coordinator
            .as_ref()
            .map(|c| (c.automaton.name().to_string(), c.automaton.num_states())),
        interface_events: interface.len(),
        extension_events: observable.len() - interface.len(),
        abstraction_states: None,
    };
    let abstraction = if observable.is_empty() {
        None
    } else {
        let spec = AbstractionSpec::new(clu, observable)?;
        if !spec.verified_observer {
            return Err(Error::Invariant(format!("{clu_name}: observer extension failed")));
        }
        let abs = spec.release()?.with_name(format!("ABS_{level}_{k}"));
        report.abstraction_states = Some(abs.num_states());
        Some(SupervisorArtifact {
            automaton: abs,
            kind: ArtifactKind::Abstraction,
            enforced_spec: None,
            level,
        })
    };
    Ok(BlockOutcome {
        coordinator,
        abstraction,
        report,
    })
}

fn timed<T>(timings: &mut Vec<(String, Duration)>, phase: String, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    timings.push((phase, start.elapsed()));
    out
}

/// Runs the full hierarchical synthesis on `project`.
///
/// Empty decentralized supervisors are reported and excluded. A conflict no
/// coordinator can resolve is an error. If clustering leaves every entity in
/// its own cluster, all entities are merged into one and a warning is issued.
pub fn run_algorithm1(project: &Project, params: &MclParams) -> Result<HierarchyResult> {
    params.validate()?;
    let mut report = RunReport::default();
    let mut nodes: Vec<HierarchyNode> = Vec::new();
    let mut coordinators: Vec<SupervisorArtifact> = Vec::new();

    let dec = timed(&mut report.timings, "decentralized synthesis".into(), || {
        synth_decentralized(&project.components, &project.specs)
    })?;
    for name in &dec.unenforceable {
        report.warnings.push(format!(
            "specification {name} is unenforceable; its supervisor is empty and excluded"
        ));
    }
    report.unenforceable = dec.unenforceable.clone();

    let spec_alphabet = |s: &SupervisorArtifact| {
        let name = s.enforced_spec.as_deref().expect("decentralized");
        project
            .specs
            .iter()
            .find(|e| e.name() == name)
            .expect("spec of supervisor")
            .alphabet()
            .clone()
    };
    let supervisors: Vec<SupervisorArtifact> = dec.supervisors.into_iter().filter(|s| !s.is_empty()).collect();
    let mut entities: Vec<SupervisorArtifact> = supervisors.clone();
    let mut dmm_alphabets: Vec<Alphabet> = entities.iter().map(spec_alphabet).collect();
    let mut entity_nodes: Vec<usize> = Vec::new();
    for (i, s) in supervisors.iter().enumerate() {
        entity_nodes.push(nodes.len());
        nodes.push(HierarchyNode {
            artifact: s.clone(),
            children: Vec::new(),
            cluster_id: i,
            level: 0,
        });
    }
    let component_alphabets: Vec<&Alphabet> = project.components.iter().map(|g| g.alphabet()).collect();

    let mut level = 1;
    while !entities.is_empty() {
        let alphabets: Vec<&Alphabet> = dmm_alphabets.iter().collect();
        let mut partition = timed(&mut report.timings, format!("level {level} clustering"), || {
            cluster_entities(&alphabets, &component_alphabets, params)
        })?;
        let mut forced_merge = false;
        if partition.len() >= 2 && partition.len() == entities.len() {
            forced_merge = true;
            partition = Partition::single(entities.len());
            report.warnings.push(format!(
                "level {level}: no clustering progress; {TOO_LARGE_BETA}; all entities merged"
            ));
        }

        if partition.len() == 1 {
            let members: Vec<&Automaton> = entities.iter().map(|e| &e.automaton).collect();
            let (product_states, coordinator) = timed(&mut report.timings, "final check".into(), || {
                let product = sync_all(members.iter().copied()).expect("non-empty");
                if is_nonblocking(&product) {
                    Ok((product.num_states(), None))
                } else {
                    Ok((product.num_states(), Some(synth_coordinator(&members, "", level)?)))
                }
            })?;
            let co = coordinator.map(|c| rename(c, coordinators.len() + 1));
            let mut cluster = ClusterReport {
                members: members.iter().map(|m| m.name().to_string()).collect(),
                cluster_states: product_states,
                coordinator: None,
                interface_events: 0,
                extension_events: 0,
                abstraction_states: None,
            };
            if let Some(co) = co {
                cluster.coordinator = Some((co.automaton.name().to_string(), co.automaton.num_states()));
                nodes.push(HierarchyNode {
                    artifact: co.clone(),
                    children: entity_nodes.clone(),
                    cluster_id: 0,
                    level,
                });
                coordinators.push(co);
            }
            report.levels.push(LevelReport {
                level,
                entities: entities.len(),
                clusters: 1,
                forced_merge,
                cluster_reports: vec![cluster],
            });
            break;
        }

        let outcomes = timed(
            &mut report.timings,
            format!("level {level} coordination and abstraction"),
            || level_step(&entities, &partition, level),
        )?;
        let mut next_entities = Vec::new();
        let mut next_nodes = Vec::new();
        let mut cluster_reports = Vec::new();
        for (k, (block, mut out)) in partition.blocks().iter().zip(outcomes).enumerate() {
            let mut children: Vec<usize> = block.iter().map(|&i| entity_nodes[i]).collect();
            if let Some(co) = out.coordinator.take() {
                let co = rename(co, coordinators.len() + 1);
                out.report.coordinator = Some((co.automaton.name().to_string(), co.automaton.num_states()));
                nodes.push(HierarchyNode {
                    artifact: co.clone(),
                    children: children.clone(),
                    cluster_id: k,
                    level,
                });
                children.push(nodes.len() - 1);
                coordinators.push(co);
            }
            if let Some(abs) = out.abstraction {
                next_nodes.push(nodes.len());
                nodes.push(HierarchyNode {
                    artifact: abs.clone(),
                    children,
                    cluster_id: k,
                    level,
                });
                next_entities.push(abs);
            }
            cluster_reports.push(out.report);
        }
        report.levels.push(LevelReport {
            level,
            entities: entities.len(),
            clusters: partition.len(),
            forced_merge,
            cluster_reports,
        });
        dmm_alphabets = next_entities.iter().map(|e| e.automaton.alphabet().clone()).collect();
        entities = next_entities;
        entity_nodes = next_nodes;
        level += 1;
    }

    Ok(HierarchyResult {
        supervisors,
        coordinators,
        report,
        nodes,
    })
}

fn rename(mut co: SupervisorArtifact, index: usize) -> SupervisorArtifact {
    co.automaton = co.automaton.with_name(format!("CO_{index}"));
    co
}
