//! Multiway decision trees over encoded features.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{CategoryMaps, EncodedDataset, Encoding};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf { leaf: u32 },
    /// One child per category of `feature`, in category order.
    Split { feature: u32, children: Vec<TreeNode> },
}

impl TreeNode {
    pub fn splits(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { children, .. } => 1 + children.iter().map(TreeNode::splits).sum::<usize>(),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { children, .. } => children.iter().map(TreeNode::leaves).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { children, .. } => 1 + children.iter().map(TreeNode::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Proven optimal.
    Solved,
    /// Best tree found before the search stopped.
    Anytime,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub lambda: f64,
    #[serde(rename = "encoding_scheme")]
    pub encoding: Encoding,
    pub provenance: Provenance,
    #[serde(rename = "category_maps")]
    pub maps: CategoryMaps,
    pub splits: usize,
    pub root: TreeNode,
}

/// Objective, accuracy and split count of a tree on a dataset.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub objective: f64,
    pub accuracy: f64,
    pub splits: usize,
    /// Sum over leaves of the majority-class count of the rows reaching the
    /// leaf, divided by `n`.
    pub leaf_majority: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "dot" => Ok(ExportFormat::Dot),
            _ => Err(Error::UnknownFormat(s.to_string())),
        }
    }
}

impl DecisionTree {
    pub fn new(root: TreeNode, lambda: f64, encoding: Encoding, provenance: Provenance, maps: CategoryMaps) -> Self {
        DecisionTree {
            splits: root.splits(),
            lambda,
            encoding,
            provenance,
            maps,
            root,
        }
    }

    pub fn leaf(class: u32, lambda: f64, encoding: Encoding, maps: CategoryMaps) -> Self {
        Self::new(TreeNode::Leaf { leaf: class }, lambda, encoding, Provenance::Solved, maps)
    }

    /// Checks split counts, child arity, feature and class ranges and that
    /// no feature repeats along a path.
    pub fn validate(&self) -> Result<()> {
        if self.splits != self.root.splits() {
            return Err(Error::Mismatch(format!(
                "tree declares {} splits but has {}",
                self.splits,
                self.root.splits()
            )));
        }
        let mut used = Vec::new();
        self.validate_node(&self.root, &mut used)
    }

    fn validate_node(&self, node: &TreeNode, used: &mut Vec<u32>) -> Result<()> {
        match node {
            TreeNode::Leaf { leaf } => {
                if *leaf as usize >= self.maps.classes.len() {
                    return Err(Error::Mismatch(format!("leaf predicts unknown class {leaf}")));
                }
                Ok(())
            }
            TreeNode::Split { feature, children } => {
                let f = *feature as usize;
                if f >= self.maps.n_features() {
                    return Err(Error::Mismatch(format!("split on unknown feature {feature}")));
                }
                if used.contains(feature) {
                    return Err(Error::Mismatch(format!("feature {feature} repeats along a path")));
                }
                let expected = self.maps.feature_categories(f);
                if children.len() != expected {
                    return Err(Error::Mismatch(format!(
                        "split on feature {feature} has {} children, expected {expected}",
                        children.len()
                    )));
                }
                used.push(*feature);
                for c in children {
                    self.validate_node(c, used)?;
                }
                used.pop();
                Ok(())
            }
        }
    }

    /// Class index predicted for one encoded datum.
    pub fn predict(&self, datum: &[u32]) -> Result<u32> {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return Ok(*leaf),
                TreeNode::Split { feature, children } => {
                    let f = *feature as usize;
                    let value = *datum.get(f).ok_or_else(|| {
                        Error::Mismatch(format!("datum has {} features, tree uses feature {f}", datum.len()))
                    })?;
                    node = children.get(value as usize).ok_or(Error::FeatureRange {
                        feature: f,
                        value,
                        categories: children.len(),
                    })?;
                }
            }
        }
    }

    /// Class label predicted for one row of raw category text, given in the
    /// order of the model's feature columns.
    pub fn predict_text(&self, row: usize, values: &[&str]) -> Result<&str> {
        let encoded = self.maps.encode_row(row, values)?;
        Ok(self.maps.class_label(self.predict(&encoded)? as usize))
    }

    /// Evaluates the tree with its own penalty.
    pub fn evaluate(&self, dataset: &EncodedDataset) -> Result<Evaluation> {
        self.evaluate_with(dataset, self.lambda)
    }

    pub fn evaluate_with(&self, dataset: &EncodedDataset, lambda: f64) -> Result<Evaluation> {
        let n = dataset.n();
        let mut leaf_counts: Vec<Vec<usize>> = Vec::new();
        let mut correct = 0usize;
        let mut row = vec![0u32; dataset.q()];
        for r in 0..n {
            for (f, v) in row.iter_mut().enumerate() {
                *v = dataset.value(r, f);
            }
            let (leaf_index, class) = self.locate(&row)?;
            let label = dataset.labels()[r];
            if class == label {
                correct += 1;
            }
            if leaf_counts.len() <= leaf_index {
                leaf_counts.resize(leaf_index + 1, Vec::new());
            }
            let counts = &mut leaf_counts[leaf_index];
            if counts.len() <= label as usize {
                counts.resize(label as usize + 1, 0);
            }
            counts[label as usize] += 1;
        }
        let majority: usize = leaf_counts.iter().map(|c| c.iter().copied().max().unwrap_or(0)).sum();
        let accuracy = correct as f64 / n as f64;
        Ok(Evaluation {
            objective: accuracy - lambda * self.splits as f64,
            accuracy,
            splits: self.splits,
            leaf_majority: majority as f64 / n as f64,
        })
    }

    /// Depth-first index of the leaf reached by `datum`, and its class.
    fn locate(&self, datum: &[u32]) -> Result<(usize, u32)> {
        let mut node = &self.root;
        let mut index = 0;
        loop {
            match node {
                TreeNode::Leaf { leaf } => return Ok((index, *leaf)),
                TreeNode::Split { feature, children } => {
                    let f = *feature as usize;
                    let value = *datum.get(f).ok_or_else(|| {
                        Error::Mismatch(format!("datum has {} features, tree uses feature {f}", datum.len()))
                    })?;
                    let v = value as usize;
                    if v >= children.len() {
                        return Err(Error::FeatureRange {
                            feature: f,
                            value,
                            categories: children.len(),
                        });
                    }
                    index += children[..v].iter().map(TreeNode::leaves).sum::<usize>();
                    node = &children[v];
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tree: DecisionTree = serde_json::from_str(text)?;
        tree.validate()?;
        Ok(tree)
    }

    /// Graphviz digraph. Internal nodes show the feature name, leaves the
    /// class label, edges the category text.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph tree {\n  node [shape=box, fontname=\"Helvetica\"];\n");
        let mut next = 0usize;
        self.dot_node(&self.root, &mut next, &mut out);
        out.push_str("}\n");
        out
    }

    fn dot_node(&self, node: &TreeNode, next: &mut usize, out: &mut String) -> usize {
        let id = *next;
        *next += 1;
        match node {
            TreeNode::Leaf { leaf } => {
                let label = self.maps.classes.get(*leaf as usize).map_or_else(|| leaf.to_string(), Clone::clone);
                let _ = writeln!(out, "  n{id} [label=\"{}\", shape=ellipse];", escape(&label));
            }
            TreeNode::Split { feature, children } => {
                let f = *feature as usize;
                let _ = writeln!(out, "  n{id} [label=\"{}\"];", escape(&self.maps.feature_name(f)));
                for (j, child) in children.iter().enumerate() {
                    let child_id = self.dot_node(child, next, out);
                    let _ = writeln!(
                        out,
                        "  n{id} -> n{child_id} [label=\"{}\"];",
                        escape(&self.maps.category_label(f, j))
                    );
                }
            }
        }
        id
    }

    pub fn export(&self, format: ExportFormat) -> Result<String> {
        match format {
            ExportFormat::Json => self.to_json(),
            ExportFormat::Dot => Ok(self.to_dot()),
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
