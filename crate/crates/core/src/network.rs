//! Networks of scalar first-order nodes with actuated edges.
//!
//! Node `i` obeys `ẋᵢ = aᵢxᵢ + bᵢuᵢ + Σ_edges ±u_e`, where each undirected
//! edge carries one input that moves material from one endpoint to the
//! other. The plant is `A = diag(aᵢ)` and `B` holds one column per node with
//! `bᵢ ≠ 0` followed by one incidence column per edge.
//!
//! Edge orientation: the endpoint whose id sorts first (byte-wise string
//! order) gets `+1`, the other `−1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;
use crate::lti::{PiGains, StateSpace};
use crate::scalar::Scalar;
use crate::synthesis::{DiffusivePlant, SynthesisError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    /// Self-dynamics, negative.
    pub a: f64,
    /// Local actuation gain; zero for a node without its own input.
    #[serde(default)]
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NetworkError {
    #[error("network has no nodes")]
    Empty,
    #[error("node {id}: self-dynamics a = {a} must be negative and finite")]
    NonNegativeDynamics { id: String, a: f64 },
    #[error("node {id}: actuation b = {b} must be finite")]
    NonFiniteActuation { id: String, b: f64 },
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    #[error("edge ({0:?}, {1:?}) references unknown node {2:?}")]
    UnknownNode(String, String, String),
    #[error("self-loop at node {0:?}")]
    SelfLoop(String),
    #[error("duplicate edge ({0:?}, {1:?})")]
    DuplicateEdge(String, String),
    #[error("gain k must be positive and finite, got {0}")]
    InvalidGain(f64),
}

/// Connected components in node order, and which of them lack actuation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    pub components: Vec<Vec<String>>,
    /// Indices into `components` with every `b = 0`. Any such component
    /// leaves controller integrators that the loop cannot stabilize.
    pub unactuated: Vec<usize>,
}

impl Topology {
    pub fn is_synthesizable(&self) -> bool {
        self.unactuated.is_empty()
    }
}

/// What drives one column of `B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnLabel {
    Node { id: String },
    /// `first` receives `+1`.
    Edge { first: String, second: String },
}

impl std::fmt::Display for ColumnLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ColumnLabel::Node { id } => write!(f, "u_{id}"),
            ColumnLabel::Edge { first, second } => write!(f, "u_{first}_{second}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetworkPlant<T> {
    pub a: Matrix<T>,
    pub b: Matrix<T>,
    pub columns: Vec<ColumnLabel>,
    pub topology: Topology,
}

impl NetworkSpec {
    fn index(&self) -> BTreeMap<&str, usize> {
        self.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect()
    }

    /// Edges as node-index pairs, oriented smaller id first.
    fn oriented_edges(&self) -> Vec<(usize, usize)> {
        let idx = self.index();
        self.edges
            .iter()
            .map(|(u, v)| {
                let (f, s) = if u <= v { (u, v) } else { (v, u) };
                (idx[f.as_str()], idx[s.as_str()])
            })
            .collect()
    }

    pub fn validate(&self) -> Result<Topology, NetworkError> {
        if self.nodes.is_empty() {
            return Err(NetworkError::Empty);
        }
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !(n.a < 0.0) || !n.a.is_finite() {
                return Err(NetworkError::NonNegativeDynamics { id: n.id.clone(), a: n.a });
            }
            if !n.b.is_finite() {
                return Err(NetworkError::NonFiniteActuation { id: n.id.clone(), b: n.b });
            }
            if !seen.insert(n.id.as_str()) {
                return Err(NetworkError::DuplicateNode(n.id.clone()));
            }
        }
        let mut pairs = BTreeSet::new();
        for (u, v) in &self.edges {
            for end in [u, v] {
                if !seen.contains(end.as_str()) {
                    return Err(NetworkError::UnknownNode(u.clone(), v.clone(), end.clone()));
                }
            }
            if u == v {
                return Err(NetworkError::SelfLoop(u.clone()));
            }
            let key = if u <= v { (u, v) } else { (v, u) };
            if !pairs.insert(key) {
                return Err(NetworkError::DuplicateEdge(u.clone(), v.clone()));
            }
        }
        Ok(self.topology())
    }

    fn topology(&self) -> Topology {
        let n = self.nodes.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for (i, j) in self.oriented_edges() {
            let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = root(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut members: Vec<Vec<usize>> = groups.into_values().collect();
        members.sort_by_key(|g| g[0]);
        let unactuated = members
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().all(|&i| self.nodes[i].b == 0.0))
            .map(|(c, _)| c)
            .collect();
        Topology {
            components: members
                .into_iter()
                .map(|g| g.into_iter().map(|i| self.nodes[i].id.clone()).collect())
                .collect(),
            unactuated,
        }
    }
}

pub fn build_plant<T: Scalar>(spec: &NetworkSpec) -> Result<NetworkPlant<T>, NetworkError> {
    let topology = spec.validate()?;
    let n = spec.nodes.len();
    let a = Matrix::from_diag(&spec.nodes.iter().map(|nd| T::lit(nd.a)).collect::<Vec<_>>());
    let mut columns = Vec::new();
    let mut entries: Vec<Vec<(usize, T)>> = Vec::new();
    for (i, nd) in spec.nodes.iter().enumerate() {
        if nd.b != 0.0 {
            columns.push(ColumnLabel::Node { id: nd.id.clone() });
            entries.push(vec![(i, T::lit(nd.b))]);
        }
    }
    for (i, j) in spec.oriented_edges() {
        columns.push(ColumnLabel::Edge {
            first: spec.nodes[i].id.clone(),
            second: spec.nodes[j].id.clone(),
        });
        entries.push(vec![(i, T::one()), (j, -T::one())]);
    }
    let mut b = Matrix::zeros(n, columns.len());
    for (c, col) in entries.iter().enumerate() {
        for &(i, v) in col {
            b[(i, c)] = v;
        }
    }
    Ok(NetworkPlant { a, b, columns, topology })
}

/// Local law of a node with its own actuator:
/// `u_i = b·(z_i·z_coeff − e_i·e_coeff)` with `z_coeff = 1/a_i`,
/// `e_coeff = 1/a_i²`, `z_i = ∫e_i`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeLaw {
    pub id: String,
    pub column: usize,
    pub b: f64,
    pub z_coeff: f64,
    pub e_coeff: f64,
}

/// Law of edge `(first, second)`, using only quantities at its endpoints:
/// `u = z_first·z_first_coeff − e_first·e_first_coeff
///    − z_second·z_second_coeff + e_second·e_second_coeff`
/// with coefficients `(1/a_i, 1/a_i², 1/a_j, 1/a_j²)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeLaw {
    pub first: String,
    pub second: String,
    pub column: usize,
    pub z_first_coeff: f64,
    pub e_first_coeff: f64,
    pub z_second_coeff: f64,
    pub e_second_coeff: f64,
}

/// Per-node integrators `ż_i = e_i` and the listed local laws. The applied
/// input is `global_sign · k · law`; with `e = r − x` the sign is `−1`, which
/// makes the assembled controller equal `Kp + Ki/s` of the synthesis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecentralizedLaw {
    pub k: f64,
    pub global_sign: f64,
    pub nodes: Vec<NodeLaw>,
    pub edges: Vec<EdgeLaw>,
}

impl DecentralizedLaw {
    /// Gain matrices acting on `e`, columns in node order and rows in the
    /// column order of [`build_plant`].
    pub fn assemble<T: Scalar>(&self, node_ids: &[String]) -> PiGains<T> {
        let idx: BTreeMap<&str, usize> = node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let m = self.nodes.len() + self.edges.len();
        let n = node_ids.len();
        let mut kp = Matrix::zeros(m, n);
        let mut ki = Matrix::zeros(m, n);
        let scale = self.global_sign * self.k;
        for law in &self.nodes {
            let i = idx[law.id.as_str()];
            kp[(law.column, i)] = T::lit(-scale * law.b * law.e_coeff);
            ki[(law.column, i)] = T::lit(scale * law.b * law.z_coeff);
        }
        for law in &self.edges {
            let (i, j) = (idx[law.first.as_str()], idx[law.second.as_str()]);
            kp[(law.column, i)] = T::lit(-scale * law.e_first_coeff);
            ki[(law.column, i)] = T::lit(scale * law.z_first_coeff);
            kp[(law.column, j)] = T::lit(scale * law.e_second_coeff);
            ki[(law.column, j)] = T::lit(-scale * law.z_second_coeff);
        }
        PiGains { kp, ki }
    }
}

pub fn decentralized_realization(spec: &NetworkSpec, k: f64) -> Result<DecentralizedLaw, NetworkError> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(NetworkError::InvalidGain(k));
    }
    spec.validate()?;
    let mut column = 0;
    let mut nodes = Vec::new();
    for nd in &spec.nodes {
        if nd.b != 0.0 {
            nodes.push(NodeLaw {
                id: nd.id.clone(),
                column,
                b: nd.b,
                z_coeff: 1.0 / nd.a,
                e_coeff: 1.0 / (nd.a * nd.a),
            });
            column += 1;
        }
    }
    let edges = spec
        .oriented_edges()
        .into_iter()
        .enumerate()
        .map(|(e, (i, j))| {
            let (ai, aj) = (spec.nodes[i].a, spec.nodes[j].a);
            EdgeLaw {
                first: spec.nodes[i].id.clone(),
                second: spec.nodes[j].id.clone(),
                column: column + e,
                z_first_coeff: 1.0 / ai,
                e_first_coeff: 1.0 / (ai * ai),
                z_second_coeff: 1.0 / aj,
                e_second_coeff: 1.0 / (aj * aj),
            }
        })
        .collect();
    Ok(DecentralizedLaw {
        k,
        global_sign: -1.0,
        nodes,
        edges,
    })
}

/// Static edge law `u = x_first·first_coeff + x_second·second_coeff` with
/// coefficients `(1/a_i, −1/a_j)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaselineEdge {
    pub first: String,
    pub second: String,
    pub first_coeff: f64,
    pub second_coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProportionalBaseline {
    pub edges: Vec<BaselineEdge>,
}

impl ProportionalBaseline {
    /// `#edges × #nodes` gain with `u = K·x`.
    pub fn gain_matrix<T: Scalar>(&self, node_ids: &[String]) -> Matrix<T> {
        let idx: BTreeMap<&str, usize> = node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut k = Matrix::zeros(self.edges.len(), node_ids.len());
        for (r, e) in self.edges.iter().enumerate() {
            k[(r, idx[e.first.as_str()])] = T::lit(e.first_coeff);
            k[(r, idx[e.second.as_str()])] = T::lit(e.second_coeff);
        }
        k
    }
}

pub fn proportional_baseline(spec: &NetworkSpec) -> Result<ProportionalBaseline, NetworkError> {
    spec.validate()?;
    let edges = spec
        .oriented_edges()
        .into_iter()
        .map(|(i, j)| BaselineEdge {
            first: spec.nodes[i].id.clone(),
            second: spec.nodes[j].id.clone(),
            first_coeff: 1.0 / spec.nodes[i].a,
            second_coeff: -1.0 / spec.nodes[j].a,
        })
        .collect();
    Ok(ProportionalBaseline { edges })
}

/// Cascade realization of `(sI − A)⁻¹(sI + k·BBᵀA⁻²)⁻¹`:
///
/// ```text
/// η̇ = −k·BBᵀA⁻² η + r,   ż = A z + η,   output z
/// ```
///
/// `−k·BBᵀA⁻²` is Metzler for network plants, so the impulse response is
/// entrywise non-negative. It is Hurwitz only when `BBᵀ` is invertible.
pub fn closed_loop_r_to_z<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, k: T) -> Result<StateSpace<T>, SynthesisError> {
    let plant = DiffusivePlant::new(a, b)?;
    if !(k > T::zero()) || !k.is_finite() {
        return Err(SynthesisError::InvalidGain(k.to_f64_lossy()));
    }
    let n = a.rows();
    let ainv2 = &plant.a_inv * &plant.a_inv;
    let m = (&(b * &b.transpose()) * &ainv2).scale(-k);
    let big_a = Matrix::block(&[&[Some(&m), None], &[Some(&Matrix::identity(n)), Some(a)]]);
    let big_b = Matrix::identity(n).vstack(&Matrix::zeros(n, n));
    let big_c = Matrix::zeros(n, n).hstack(&Matrix::identity(n));
    Ok(StateSpace::new(big_a, big_b, big_c, Matrix::zeros(n, n))?)
}

/// Whether `Kp` and `Ki` vanish (below `tol`) wherever `Bᵀ` is zero.
pub fn preserves_structure<T: Scalar>(gains: &PiGains<T>, b: &Matrix<T>, tol: T) -> bool {
    let bt = b.transpose();
    if gains.kp.shape() != bt.shape() || gains.ki.shape() != bt.shape() {
        return false;
    }
    (0..bt.rows()).all(|i| {
        (0..bt.cols()).all(|j| bt[(i, j)] != T::zero() || (gains.kp[(i, j)].abs() < tol && gains.ki[(i, j)].abs() < tol))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::freq_eval;

    fn node(id: &str, a: f64, b: f64) -> NodeSpec {
        NodeSpec { id: id.into(), a, b }
    }

    fn two_buffers() -> NetworkSpec {
        NetworkSpec {
            nodes: vec![node("1", -1.0, 1.0), node("2", -2.0, 0.0)],
            edges: vec![("2".into(), "1".into())],
        }
    }

    #[test]
    fn two_buffer_plant() {
        let p = build_plant::<f64>(&two_buffers()).unwrap();
        assert_eq!(p.a, Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]).unwrap());
        assert_eq!(p.b, Matrix::from_rows(&[[1.0, 1.0], [0.0, -1.0]]).unwrap());
        assert_eq!(p.columns[1].to_string(), "u_1_2");
        assert!(p.topology.is_synthesizable());
    }

    #[test]
    fn single_node() {
        let spec = NetworkSpec {
            nodes: vec![node("x", -3.0, 2.0)],
            edges: vec![],
        };
        let p = build_plant::<f64>(&spec).unwrap();
        assert_eq!((p.a[(0, 0)], p.b[(0, 0)]), (-3.0, 2.0));
        let law = decentralized_realization(&spec, 1.0).unwrap();
        assert_eq!(law.nodes[0].z_coeff, -1.0 / 3.0);
        assert!(proportional_baseline(&spec).unwrap().edges.is_empty());
    }

    #[test]
    fn unactuated_component_is_flagged() {
        let spec = NetworkSpec {
            nodes: vec![node("1", -1.0, 1.0), node("2", -1.0, 0.0)],
            edges: vec![],
        };
        let t = spec.validate().unwrap();
        assert_eq!(t.components.len(), 2);
        assert_eq!(t.unactuated, vec![1]);
        assert!(!t.is_synthesizable());
    }

    #[test]
    fn invalid_specs() {
        let mut s = two_buffers();
        s.nodes[1].a = 0.5;
        assert!(matches!(s.validate(), Err(NetworkError::NonNegativeDynamics { .. })));
        let mut s = two_buffers();
        s.edges.push(("1".into(), "2".into()));
        assert!(matches!(s.validate(), Err(NetworkError::DuplicateEdge(..))));
        let mut s = two_buffers();
        s.edges.push(("1".into(), "1".into()));
        assert!(matches!(s.validate(), Err(NetworkError::SelfLoop(_))));
        let mut s = two_buffers();
        s.edges.push(("1".into(), "9".into()));
        assert!(matches!(s.validate(), Err(NetworkError::UnknownNode(..))));
        let mut s = two_buffers();
        s.nodes.push(node("1", -1.0, 0.0));
        assert!(matches!(s.validate(), Err(NetworkError::DuplicateNode(_))));
        assert!(decentralized_realization(&two_buffers(), 0.0).is_err());
    }

    #[test]
    fn buffer_edge_law_and_baseline() {
        let law = decentralized_realization(&two_buffers(), 1.0).unwrap();
        let e = &law.edges[0];
        assert_eq!(
            (e.z_first_coeff, e.e_first_coeff, e.z_second_coeff, e.e_second_coeff),
            (-1.0, 1.0, -0.5, 0.25)
        );
        let base = proportional_baseline(&two_buffers()).unwrap();
        assert_eq!((base.edges[0].first_coeff, base.edges[0].second_coeff), (-1.0, 0.5));
    }

    #[test]
    fn scalar_r_to_z_is_squared_lag() {
        let one = Matrix::<f64>::from_rows(&[[1.0]]).unwrap();
        let sys = closed_loop_r_to_z(&Matrix::<f64>::from_rows(&[[-1.0]]).unwrap(), &one, 1.0).unwrap();
        for w in [0.0, 0.3, 2.0] {
            let g = freq_eval(&sys, w).unwrap()[(0, 0)];
            let expect = num_complex::Complex::new(1.0, w).powi(-2);
            assert!((g - expect).norm() < 1e-14);
        }
        assert!(closed_loop_r_to_z(&Matrix::<f64>::from_rows(&[[-1.0]]).unwrap(), &one, 0.0).is_err());
    }
}
