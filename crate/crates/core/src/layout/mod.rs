//! Planarity-preserving force-directed relaxation of a triangulation.
//!
//! Each iteration reads a frozen snapshot of all positions, computes every
//! node's displacement independently (in parallel), and writes into a second
//! buffer that is swapped in afterwards. A node's displacement is confined to
//! its side of the three midsegment ("limiting") lines of each incident
//! triangle, which is enough to keep every triangle's orientation even when
//! all three corners move at once.

mod forces;
mod kdtree;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use forces::{node_edge_force, repulsive_force, spring_force};
pub use kdtree::KdTree;

use crate::geom::Vec2;
use crate::mesh::{limiting_lines, TriMesh};

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("layout parameter {name} = {value} is out of range ({expected})")]
    InvalidParam {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("relax parameter {0} is outside [0, 1]")]
    TOutOfRange(f64),
}

/// Force-model and annealing constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutParams {
    /// Repulsive scaling constant `C` (node-node and node-edge).
    pub repulsion: f64,
    pub spring_scale: f64,
    /// Desired edge length `D`.
    pub edge_length: f64,
    /// Softening `η`; also the keep-out distance from limiting lines.
    pub eta: f64,
    pub initial_temp: f64,
    /// Temperature decay `λ` per iteration.
    pub decay: f64,
    pub iterations: usize,
    /// Barnes–Hut opening ratio.
    pub theta: f64,
}

impl LayoutParams {
    /// Defaults scaled to a desired edge length `d`.
    pub fn for_edge_length(d: f64) -> LayoutParams {
        LayoutParams {
            repulsion: d * d,
            spring_scale: 1.0,
            edge_length: d,
            eta: 1e-4 * d,
            initial_temp: d,
            decay: 0.99,
            iterations: 500,
            theta: 0.5,
        }
    }

    /// Defaults for a mesh: `D` is its median initial edge length.
    pub fn defaults_for(mesh: &TriMesh) -> LayoutParams {
        let d = mesh.median_edge_length();
        LayoutParams::for_edge_length(if d > 0.0 { d } else { 1.0 })
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let positive = [
            ("repulsion", self.repulsion),
            ("springScale", self.spring_scale),
            ("edgeLength", self.edge_length),
            ("eta", self.eta),
            ("initialTemp", self.initial_temp),
            ("theta", self.theta),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(LayoutError::InvalidParam {
                    name,
                    value,
                    expected: "> 0",
                });
            }
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(LayoutError::InvalidParam {
                name: "decay",
                value: self.decay,
                expected: "in (0, 1)",
            });
        }
        Ok(())
    }
}

/// Partial parameter set; unset fields fall back to [`LayoutParams::defaults_for`].
///
/// An overridden edge length also rescales the defaults derived from it
/// (repulsion, softening, initial temperature).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct LayoutOverrides {
    pub iterations: Option<usize>,
    #[serde(alias = "decay")]
    pub lambda: Option<f64>,
    #[serde(alias = "initialTemp")]
    pub temp: Option<f64>,
    pub edge_length: Option<f64>,
    pub repulsion: Option<f64>,
    pub spring_scale: Option<f64>,
    pub eta: Option<f64>,
    pub theta: Option<f64>,
}

impl LayoutOverrides {
    pub fn resolve(&self, mesh: &TriMesh) -> Result<LayoutParams, LayoutError> {
        let mut p = match self.edge_length {
            Some(d) => LayoutParams::for_edge_length(d),
            None => LayoutParams::defaults_for(mesh),
        };
        if let Some(v) = self.iterations {
            p.iterations = v;
        }
        if let Some(v) = self.lambda {
            p.decay = v;
        }
        if let Some(v) = self.temp {
            p.initial_temp = v;
        }
        if let Some(v) = self.repulsion {
            p.repulsion = v;
        }
        if let Some(v) = self.spring_scale {
            p.spring_scale = v;
        }
        if let Some(v) = self.eta {
            p.eta = v;
        }
        if let Some(v) = self.theta {
            p.theta = v;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Scale `proposed` so that node `node` stays at least `eta` away from every
/// limiting line of every incident triangle, measured against `positions`.
///
/// The whole vector is scaled by one factor in `[0, 1]`; its direction is kept.
pub fn clamp_displacement(
    node: usize,
    proposed: Vec2,
    mesh: &TriMesh,
    positions: &[Vec2],
    eta: f64,
) -> Vec2 {
    if proposed == Vec2::ZERO {
        return proposed;
    }
    let v = positions[node];
    let mut scale = 1.0f64;
    for (a, b) in mesh.fan_triangles(node) {
        let Ok(lines) = limiting_lines([v, positions[a], positions[b]]) else {
            return Vec2::ZERO;
        };
        for line in &lines {
            let sd = line.signed_distance(v);
            let toward = if sd > 0.0 { -line.normal } else { line.normal };
            let approach = proposed.dot(toward);
            if approach > 0.0 {
                let allowed = (sd.abs() - eta).max(0.0);
                scale = scale.min(allowed / approach);
            }
        }
    }
    proposed * scale.clamp(0.0, 1.0)
}

/// Net force on `node` from the snapshot `positions`.
pub fn net_force(
    node: usize,
    mesh: &TriMesh,
    positions: &[Vec2],
    tree: &KdTree,
    params: &LayoutParams,
) -> Vec2 {
    let v = positions[node];
    let mut f = tree_repulsion(node, positions, tree, params);
    for &u in mesh.neighbors(node) {
        f += spring_force(v, positions[u], params);
    }
    for (a, b) in mesh.fan_triangles(node) {
        f += node_edge_force(v, positions[a], positions[b], params);
    }
    f
}

/// Barnes–Hut estimate of the repulsion on `node`; `tree` must be built over `positions`.
pub fn tree_repulsion(node: usize, positions: &[Vec2], tree: &KdTree, params: &LayoutParams) -> Vec2 {
    let (c, eta) = (params.repulsion, params.eta);
    tree.accumulate(positions[node], node, params.theta, |d, mass| {
        let r = d.norm();
        d * (mass * c / (r * r * r + eta))
    })
}

/// Exact O(n) repulsion sum on one node; reference for the tree approximation.
pub fn exact_repulsion(node: usize, positions: &[Vec2], params: &LayoutParams) -> Vec2 {
    positions
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != node)
        .fold(Vec2::ZERO, |acc, (_, &p)| {
            acc + repulsive_force(positions[node], p, params)
        })
}

/// Mutable layout progress over a mesh.
#[derive(Debug, Clone)]
pub struct LayoutState {
    pub mesh: TriMesh,
    pub iteration: usize,
    pub temperature: f64,
    /// Final positions once [`layout_run`] completes; the original positions before that.
    pub relaxed: Vec<Vec2>,
    params: LayoutParams,
    back: Vec<Vec2>,
}

impl LayoutState {
    /// Start from the mesh's original positions.
    pub fn new(mut mesh: TriMesh, params: LayoutParams) -> Result<LayoutState, LayoutError> {
        params.validate()?;
        mesh.current = mesh.original.clone();
        let relaxed = mesh.original.clone();
        let back = mesh.original.clone();
        Ok(LayoutState {
            mesh,
            iteration: 0,
            temperature: params.initial_temp,
            relaxed,
            params,
            back,
        })
    }

    pub fn params(&self) -> &LayoutParams {
        &self.params
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.mesh.current
    }

    /// One annealing iteration: parallel force evaluation from a frozen
    /// snapshot, temperature cap, planarity clamp, then buffer swap.
    pub fn step(&mut self) {
        let params = self.params;
        let temp = self.temperature;
        let mesh = &self.mesh;
        let snapshot = &mesh.current;
        let tree = KdTree::build(snapshot);
        self.back
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, out)| {
                let mut d = net_force(i, mesh, snapshot, &tree, &params);
                if !d.is_finite() {
                    d = Vec2::ZERO;
                }
                let len = d.norm();
                if len > temp {
                    d = d * (temp / len);
                }
                *out = snapshot[i] + clamp_displacement(i, d, mesh, snapshot, params.eta);
            });
        std::mem::swap(&mut self.mesh.current, &mut self.back);
        self.iteration += 1;
        self.temperature = params.initial_temp * params.decay.powi(self.iteration as i32);
    }

    /// Record the current positions as the relaxed layout.
    pub fn finish(&mut self) {
        self.relaxed = self.mesh.current.clone();
    }
}

/// Run the configured number of iterations and record the relaxed positions.
pub fn layout_run(mesh: TriMesh, params: LayoutParams) -> Result<LayoutState, LayoutError> {
    layout_run_with(mesh, params, |_| {})
}

/// [`layout_run`] with a callback after every step.
pub fn layout_run_with<F>(
    mesh: TriMesh,
    params: LayoutParams,
    mut on_step: F,
) -> Result<LayoutState, LayoutError>
where
    F: FnMut(&LayoutState),
{
    let mut state = LayoutState::new(mesh, params)?;
    for _ in 0..params.iterations {
        state.step();
        on_step(&state);
    }
    state.finish();
    Ok(state)
}

/// Blend between the original (`t = 0`) and relaxed (`t = 1`) positions.
pub fn interpolate_layout(state: &LayoutState, t: f64) -> Result<Vec<Vec2>, LayoutError> {
    interpolate_positions(&state.mesh.original, &state.relaxed, t)
}

pub fn interpolate_positions(
    original: &[Vec2],
    relaxed: &[Vec2],
    t: f64,
) -> Result<Vec<Vec2>, LayoutError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(LayoutError::TOutOfRange(t));
    }
    Ok(original
        .iter()
        .zip(relaxed)
        .map(|(&q, &p)| {
            if t == 1.0 {
                p
            } else {
                q * (1.0 - t) + p * t
            }
        })
        .collect())
}
