//! DAG cell search-space families: validation, uniform sampling, exact
//! counting, exhaustive enumeration of small spaces, and canonical
//! genotype serialization.
//!
//! Two families exist. `single` cells give every node one predecessor and
//! one operation; node `i` (1..=N) may read from nodes `0..i`, where index
//! 0 is the cell input stem. `dual` cells give every node two
//! (predecessor, operation) pairs; node `i` has internal index `i + 1` and
//! may read from `0..=i`, where indices 0 and 1 are the two input stems.
//! Dual pairs are stored in canonical order, sorted by (predecessor,
//! position of the op in the space's op list).

use crate::numcore::{fnv1a64, Rng};
use crate::{Error, Result};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Edge operation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Tanh,
    Relu,
    Sigmoid,
    Identity,
    Zero,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Tanh => "tanh",
            OpKind::Relu => "relu",
            OpKind::Sigmoid => "sigmoid",
            OpKind::Identity => "identity",
            OpKind::Zero => "zero",
        }
    }

    pub fn parse(tag: &str) -> Result<OpKind> {
        match tag {
            "tanh" => Ok(OpKind::Tanh),
            "relu" => Ok(OpKind::Relu),
            "sigmoid" => Ok(OpKind::Sigmoid),
            "identity" => Ok(OpKind::Identity),
            "zero" => Ok(OpKind::Zero),
            other => Err(Error::Parse(format!("unknown op tag {other:?}"))),
        }
    }
}

/// Cell family: one or two (predecessor, op) pairs per node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Single,
    Dual,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Single => "single",
            Family::Dual => "dual",
        }
    }

    pub fn parse(tag: &str) -> Result<Family> {
        match tag {
            "single" => Ok(Family::Single),
            "dual" => Ok(Family::Dual),
            other => Err(Error::Parse(format!("unknown family {other:?}"))),
        }
    }
}

/// A DAG cell search-space definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    pub family: Family,
    pub num_nodes: usize,
    pub ops: Vec<OpKind>,
    pub num_cells: usize,
}

/// One named invariant violation from [`validate_space`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

#[derive(Serialize)]
struct SpaceDoc<'a> {
    family: &'a str,
    n: usize,
    ops: Vec<&'a str>,
    num_cells: usize,
}

impl SearchSpace {
    pub fn new(family: Family, num_nodes: usize, ops: Vec<OpKind>, num_cells: usize) -> Self {
        SearchSpace { family, num_nodes, ops, num_cells }
    }

    /// The four-op single-input space with one cell; `n` nodes.
    pub fn single(n: usize) -> Self {
        SearchSpace::new(
            Family::Single,
            n,
            vec![OpKind::Tanh, OpKind::Relu, OpKind::Sigmoid, OpKind::Identity],
            1,
        )
    }

    pub fn op_index(&self, op: OpKind) -> Option<usize> {
        self.ops.iter().position(|&o| o == op)
    }

    /// Byte-stable canonical document, hashable for manifests.
    pub fn canonical_doc(&self) -> String {
        let doc = SpaceDoc {
            family: self.family.as_str(),
            n: self.num_nodes,
            ops: self.ops.iter().map(|o| o.as_str()).collect(),
            num_cells: self.num_cells,
        };
        serde_json::to_string(&doc).expect("space doc serializes")
    }

    /// Hash of the canonical document; owning-space marker on genotypes.
    pub fn space_id(&self) -> String {
        format!("{:016x}", fnv1a64(&self.canonical_doc()))
    }

    /// Number of predecessor choices for node `i` (1-based).
    fn pred_choices(&self, i: usize) -> usize {
        match self.family {
            Family::Single => i,
            Family::Dual => i + 1,
        }
    }
}

/// Per-node architecture decision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeDecision {
    /// (predecessor, op).
    Single(usize, OpKind),
    /// Two (predecessor, op) pairs in canonical order.
    Dual([(usize, OpKind); 2]),
}

/// One sampled genotype: per-cell, per-node decisions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Architecture {
    pub space_id: String,
    pub cells: Vec<Vec<NodeDecision>>,
}

/// Sorts a dual pair by (pred, op position in the space's op list).
/// Node aggregation is commutative, so pair order carries no meaning.
pub fn canonical_pair(
    space: &SearchSpace,
    a: (usize, OpKind),
    b: (usize, OpKind),
) -> [(usize, OpKind); 2] {
    let key = |p: (usize, OpKind)| (p.0, space.op_index(p.1).unwrap_or(usize::MAX));
    if key(a) <= key(b) {
        [a, b]
    } else {
        [b, a]
    }
}

/// Checks every [`SearchSpace`] invariant; returns all violations rather
/// than stopping at the first.
pub fn validate_space(space: &SearchSpace) -> Vec<Violation> {
    let mut v = Vec::new();
    if space.num_nodes < 1 {
        v.push(Violation {
            field: "num_nodes".into(),
            rule: "must be >= 1".into(),
        });
    }
    if space.ops.is_empty() {
        v.push(Violation {
            field: "ops".into(),
            rule: "must contain at least one op".into(),
        });
    }
    for (i, op) in space.ops.iter().enumerate() {
        if space.ops[..i].contains(op) {
            v.push(Violation {
                field: "ops".into(),
                rule: format!("duplicate op {}", op.as_str()),
            });
        }
    }
    if !(space.num_cells == 1 || space.num_cells == 2) {
        v.push(Violation {
            field: "num_cells".into(),
            rule: "must be 1 or 2".into(),
        });
    }
    if space.family == Family::Single {
        if space.num_cells != 1 {
            v.push(Violation {
                field: "num_cells".into(),
                rule: "single-input family requires num_cells = 1".into(),
            });
        }
        if space.ops.contains(&OpKind::Zero) {
            v.push(Violation {
                field: "ops".into(),
                rule: "zero forbidden in single-input op list".into(),
            });
        }
    }
    v
}

fn require_valid(space: &SearchSpace) -> Result<()> {
    let violations = validate_space(space);
    if violations.is_empty() {
        Ok(())
    } else {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        Err(Error::InvalidSpace(msgs.join("; ")))
    }
}

/// Validates an architecture against its owning space. Total and
/// order-independent: every decision is checked.
pub fn validate_architecture(space: &SearchSpace, arch: &Architecture) -> Result<()> {
    require_valid(space)?;
    if arch.space_id != space.space_id() {
        return Err(Error::Parse(format!(
            "architecture belongs to space {} not {}",
            arch.space_id,
            space.space_id()
        )));
    }
    if arch.cells.len() != space.num_cells {
        return Err(Error::Parse(format!(
            "expected {} cells, found {}",
            space.num_cells,
            arch.cells.len()
        )));
    }
    for (c, cell) in arch.cells.iter().enumerate() {
        if cell.len() != space.num_nodes {
            return Err(Error::Parse(format!(
                "cell {c}: expected {} nodes, found {}",
                space.num_nodes,
                cell.len()
            )));
        }
        for (idx, decision) in cell.iter().enumerate() {
            let i = idx + 1;
            let bound = space.pred_choices(i);
            let check_pair = |pred: usize, op: OpKind| -> Result<()> {
                if pred >= bound {
                    return Err(Error::Parse(format!(
                        "cell {c} node {i}: predecessor out of range ({pred} >= {bound})"
                    )));
                }
                if space.op_index(op).is_none() {
                    return Err(Error::Parse(format!(
                        "cell {c} node {i}: op {} not in space",
                        op.as_str()
                    )));
                }
                Ok(())
            };
            match (space.family, decision) {
                (Family::Single, NodeDecision::Single(pred, op)) => check_pair(*pred, *op)?,
                (Family::Dual, NodeDecision::Dual(pairs)) => {
                    for &(pred, op) in pairs {
                        check_pair(pred, op)?;
                    }
                    if canonical_pair(space, pairs[0], pairs[1]) != *pairs {
                        return Err(Error::Parse(format!(
                            "cell {c} node {i}: dual pair not in canonical order"
                        )));
                    }
                }
                _ => {
                    return Err(Error::Parse(format!(
                        "cell {c} node {i}: decision form does not match family"
                    )))
                }
            }
        }
    }
    Ok(())
}

/// Draws one architecture uniformly. Each decision is drawn independently
/// and uniformly over its choice set using only the supplied stream, in
/// documented order: cells first, nodes within a cell, predecessor before
/// op (dual: first pair, then second, then canonicalized).
pub fn sample_architecture(space: &SearchSpace, rng: &mut Rng) -> Result<Architecture> {
    require_valid(space)?;
    let k = space.ops.len() as u64;
    let mut cells = Vec::with_capacity(space.num_cells);
    for _ in 0..space.num_cells {
        let mut cell = Vec::with_capacity(space.num_nodes);
        for i in 1..=space.num_nodes {
            let bound = space.pred_choices(i) as u64;
            match space.family {
                Family::Single => {
                    let pred = rng.uniform_int(bound)? as usize;
                    let op = space.ops[rng.uniform_int(k)? as usize];
                    cell.push(NodeDecision::Single(pred, op));
                }
                Family::Dual => {
                    let a = (rng.uniform_int(bound)? as usize, space.ops[rng.uniform_int(k)? as usize]);
                    let b = (rng.uniform_int(bound)? as usize, space.ops[rng.uniform_int(k)? as usize]);
                    cell.push(NodeDecision::Dual(canonical_pair(space, a, b)));
                }
            }
        }
        cells.push(cell);
    }
    Ok(Architecture { space_id: space.space_id(), cells })
}

/// Exact architecture count. Single-input: `prod_i (i * |ops|)`.
/// Dual-input per cell: `prod_i T((i+1) * |ops|)` with `T(k) = k(k+1)/2`
/// (unordered pair with repetition, matching canonical pair order);
/// total is the per-cell count raised to `num_cells`.
pub fn count_architectures(space: &SearchSpace) -> Result<BigUint> {
    require_valid(space)?;
    let k = BigUint::from(space.ops.len());
    let mut per_cell = BigUint::from(1u32);
    for i in 1..=space.num_nodes {
        let m = BigUint::from(space.pred_choices(i)) * &k;
        match space.family {
            Family::Single => per_cell *= m,
            Family::Dual => {
                let t = &m * (&m + BigUint::from(1u32)) / BigUint::from(2u32);
                per_cell *= t;
            }
        }
    }
    Ok(per_cell.pow(space.num_cells as u32))
}

/// Emits every distinct architecture exactly once, in lexicographic order
/// of decisions. Refuses when the space holds more than `limit`.
pub fn enumerate_architectures(space: &SearchSpace, limit: u64) -> Result<Vec<Architecture>> {
    let count = count_architectures(space)?;
    if count > BigUint::from(limit) {
        return Err(Error::TooManyArchitectures {
            count: count.to_string(),
            limit,
        });
    }

    // Per-node choice lists in lexicographic order of (pred, op index)
    // or of canonical pairs.
    let mut node_choices: Vec<Vec<NodeDecision>> = Vec::new();
    for i in 1..=space.num_nodes {
        let bound = space.pred_choices(i);
        let mut choices = Vec::new();
        match space.family {
            Family::Single => {
                for pred in 0..bound {
                    for &op in &space.ops {
                        choices.push(NodeDecision::Single(pred, op));
                    }
                }
            }
            Family::Dual => {
                let mut combos = Vec::new();
                for pred in 0..bound {
                    for &op in &space.ops {
                        combos.push((pred, op));
                    }
                }
                for a in 0..combos.len() {
                    for b in a..combos.len() {
                        choices.push(NodeDecision::Dual([combos[a], combos[b]]));
                    }
                }
            }
        }
        node_choices.push(choices);
    }

    // Odometer over (cell, node) with the first position most significant.
    let positions = space.num_cells * space.num_nodes;
    let radix: Vec<usize> = (0..positions)
        .map(|p| node_choices[p % space.num_nodes].len())
        .collect();
    let total: usize = radix.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; positions];
    let space_id = space.space_id();
    loop {
        let mut cells = Vec::with_capacity(space.num_cells);
        for c in 0..space.num_cells {
            let cell: Vec<NodeDecision> = (0..space.num_nodes)
                .map(|n| node_choices[n][digits[c * space.num_nodes + n]].clone())
                .collect();
            cells.push(cell);
        }
        out.push(Architecture { space_id: space_id.clone(), cells });

        // increment, least-significant last
        let mut p = positions;
        loop {
            if p == 0 {
                return Ok(out);
            }
            p -= 1;
            digits[p] += 1;
            if digits[p] < radix[p] {
                break;
            }
            digits[p] = 0;
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Single(usize, String),
    Dual((usize, String), (usize, String)),
}

#[derive(Serialize)]
struct GenotypeDocRef<'a> {
    family: &'a str,
    n: usize,
    ops: Vec<&'a str>,
    cells: Vec<Vec<NodeDoc>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GenotypeDocOwned {
    family: String,
    n: usize,
    ops: Vec<String>,
    cells: Vec<Vec<NodeDoc>>,
}

/// Canonical single-line genotype text: keys in the fixed order
/// `family, n, ops, cells`; no whitespace; dual nodes carry two
/// `[pred, op]` pairs. Byte-stable, so the text can be hashed.
pub fn serialize_genotype(space: &SearchSpace, arch: &Architecture) -> Result<String> {
    validate_architecture(space, arch)?;
    let cells = arch
        .cells
        .iter()
        .map(|cell| {
            cell.iter()
                .map(|d| match d {
                    NodeDecision::Single(pred, op) => NodeDoc::Single(*pred, op.as_str().into()),
                    NodeDecision::Dual(pairs) => NodeDoc::Dual(
                        (pairs[0].0, pairs[0].1.as_str().into()),
                        (pairs[1].0, pairs[1].1.as_str().into()),
                    ),
                })
                .collect()
        })
        .collect();
    let doc = GenotypeDocRef {
        family: space.family.as_str(),
        n: space.num_nodes,
        ops: space.ops.iter().map(|o| o.as_str()).collect(),
        cells,
    };
    Ok(serde_json::to_string(&doc).expect("genotype doc serializes"))
}

/// Parses canonical genotype text back into the owning space and the
/// architecture. Rejects unknown ops, out-of-range predecessors, and
/// wrong node counts.
pub fn parse_genotype(text: &str) -> Result<(SearchSpace, Architecture)> {
    let doc: GenotypeDocOwned =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("genotype json: {e}")))?;
    let family = Family::parse(&doc.family)?;
    let ops = doc
        .ops
        .iter()
        .map(|t| OpKind::parse(t))
        .collect::<Result<Vec<_>>>()?;
    let num_cells = doc.cells.len();
    let space = SearchSpace::new(family, doc.n, ops, num_cells);
    let cells = doc
        .cells
        .into_iter()
        .map(|cell| {
            cell.into_iter()
                .map(|nd| match nd {
                    NodeDoc::Single(pred, op) => Ok(NodeDecision::Single(pred, OpKind::parse(&op)?)),
                    NodeDoc::Dual((p0, o0), (p1, o1)) => Ok(NodeDecision::Dual([
                        (p0, OpKind::parse(&o0)?),
                        (p1, OpKind::parse(&o1)?),
                    ])),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let arch = Architecture { space_id: space.space_id(), cells };
    validate_architecture(&space, &arch)?;
    Ok((space, arch))
}
