//! On-disk witness format shared by `solve`, `oracle decide` and `oracle verify`.

use serde::{Deserialize, Serialize};
use transversal::collection::GraphCollection;
use transversal::embedding::RainbowEmbedding;
use transversal::factors::{FactorSpec, FtFactor};
use transversal::graph::Graph;
use transversal::oracle::{verify_transversal, TransversalMode, TransversalViolation};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEdge {
    pub u: usize,
    pub v: usize,
    pub colour: usize,
}

/// A template, its host vertices and the colour of every template edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub kind: String,
    pub mode: TransversalMode,
    /// Whether the template must cover every host vertex.
    pub spanning: bool,
    pub template_order: usize,
    pub vertex_map: Vec<usize>,
    pub edges: Vec<WitnessEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factor: Option<FtFactor>,
}

impl Witness {
    pub fn from_embedding(kind: &str, mode: TransversalMode, spanning: bool, template: &Graph, emb: &RainbowEmbedding) -> Self {
        let edges = template
            .edges()
            .into_iter()
            .map(|(u, v)| WitnessEdge { u, v, colour: emb.colour(u, v).unwrap_or(usize::MAX) })
            .collect();
        Witness {
            kind: kind.into(),
            mode,
            spanning,
            template_order: template.order(),
            vertex_map: emb.vertex_map.clone(),
            edges,
            factor: None,
        }
    }

    pub fn from_factor(kind: &str, spec: &FactorSpec, factor: &FtFactor, patterns: Option<&[Vec<usize>]>) -> Self {
        let (template, emb) = factor.to_embedding(&spec.f);
        let mode = match patterns {
            Some(p) => TransversalMode::Patterned {
                r: spec.r(),
                patterns: factor
                    .copies
                    .iter()
                    .map(|c| c.pattern.and_then(|i| p.get(i)).cloned().unwrap_or_default())
                    .collect(),
            },
            None => TransversalMode::Factor { r: spec.r(), t: spec.t },
        };
        let mut w = Self::from_embedding(kind, mode, true, &template, &emb);
        w.factor = Some(factor.clone());
        w
    }

    pub fn template(&self) -> Graph {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.u, e.v)).collect();
        Graph::from_edges(self.template_order, &edges)
    }

    pub fn embedding(&self) -> RainbowEmbedding {
        let mut emb = RainbowEmbedding::new(self.vertex_map.clone());
        for e in &self.edges {
            emb.set_colour(e.u, e.v, e.colour);
        }
        emb
    }

    pub fn verify(&self, coll: &GraphCollection) -> Result<(), TransversalViolation> {
        if let Some(e) = self.edges.iter().find(|e| e.u.max(e.v) >= self.template_order || e.u == e.v) {
            return Err(TransversalViolation::ExtraEdge { u: e.u, v: e.v });
        }
        if self.spanning && self.template_order != coll.n() {
            return Err(TransversalViolation::NotSpanning { covered: self.template_order, n: coll.n() });
        }
        verify_transversal(coll, &self.embedding(), &self.template(), &self.mode)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("witness serializes");
        s.push('\n');
        s
    }
}
