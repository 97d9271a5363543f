use std::collections::HashMap;
use std::fmt::{self, Write as _};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::store::{NodeId, Store};
use crate::syntax::{quote_atom, quote_string, Desc, DescBody};
use crate::type_system::TypeHierarchy;

/// An owned copy of a feature structure, detached from any store.
///
/// Nodes are numbered in depth-first preorder from the root with features
/// visited in declaration order, so isomorphic structures extract to equal
/// values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fs {
    pub root: usize,
    pub nodes: Vec<FsNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FsNode {
    pub id: usize,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub string: Option<String>,
    #[serde(default, skip_serializing_if = "IndexMap::is_empty")]
    pub features: IndexMap<String, usize>,
}

impl<'g> Store<'g> {
    pub fn extract(&self, n: NodeId) -> Fs {
        let types = self.types();
        let mut index: HashMap<NodeId, usize> = HashMap::new();
        let mut nodes: Vec<FsNode> = Vec::new();
        let mut stack = vec![(self.deref(n), None::<(usize, String)>)];
        // explicit stack keeps deep lists off the call stack; children are
        // pushed in reverse so they pop in feature order
        while let Some((m, parent)) = stack.pop() {
            let m = self.deref(m);
            let id = match index.get(&m) {
                Some(&id) => id,
                None => {
                    let id = nodes.len();
                    index.insert(m, id);
                    nodes.push(FsNode {
                        id,
                        ty: types.name(self.type_of(m)).to_string(),
                        string: self.text(m).map(str::to_string),
                        features: IndexMap::new(),
                    });
                    let feats = self.features(m);
                    for (f, v) in feats.into_iter().rev() {
                        stack.push((v, Some((id, types.feature_name(f).to_string()))));
                    }
                    id
                }
            };
            if let Some((p, f)) = parent {
                nodes[p].features.insert(f, id);
            }
        }
        Fs { root: 0, nodes }
    }

    pub fn extract_all(&self, ns: &[NodeId]) -> Vec<Fs> {
        ns.iter().map(|n| self.extract(*n)).collect()
    }

    /// Rebuilds an extracted structure inside this store.
    pub fn load_fs(&mut self, fs: &Fs) -> Result<NodeId, crate::error::Fail> {
        self.build(&fs.to_desc())
    }
}

impl Fs {
    pub fn root_node(&self) -> &FsNode {
        &self.nodes[self.root]
    }

    pub fn node(&self, i: usize) -> &FsNode {
        &self.nodes[i]
    }

    /// Follows a `:`-separated path.
    pub fn get(&self, path: &str) -> Option<usize> {
        let mut cur = self.root;
        if path.is_empty() {
            return Some(cur);
        }
        for f in path.split([':', '|']) {
            cur = *self.nodes[cur].features.get(f.trim())?;
        }
        Some(cur)
    }

    pub fn type_at(&self, path: &str) -> Option<&str> {
        self.get(path).map(|i| self.nodes[i].ty.as_str())
    }

    pub fn string_at(&self, path: &str) -> Option<&str> {
        self.get(path).and_then(|i| self.nodes[i].string.as_deref())
    }

    /// The substructure at `path`, renumbered from its own root.
    pub fn sub(&self, path: &str) -> Option<Fs> {
        let start = self.get(path)?;
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut nodes: Vec<FsNode> = Vec::new();
        let mut stack = vec![(start, None::<(usize, String)>)];
        while let Some((m, parent)) = stack.pop() {
            let id = match index.get(&m) {
                Some(&id) => id,
                None => {
                    let id = nodes.len();
                    index.insert(m, id);
                    let src = &self.nodes[m];
                    nodes.push(FsNode {
                        id,
                        ty: src.ty.clone(),
                        string: src.string.clone(),
                        features: IndexMap::new(),
                    });
                    for (f, &v) in src.features.iter().rev() {
                        stack.push((v, Some((id, f.clone()))));
                    }
                    id
                }
            };
            if let Some((p, f)) = parent {
                nodes[p].features.insert(f, id);
            }
        }
        Some(Fs { root: 0, nodes })
    }

    /// Whether two paths lead to the same node.
    pub fn shared(&self, p: &str, q: &str) -> bool {
        matches!((self.get(p), self.get(q)), (Some(a), Some(b)) if a == b)
    }

    fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.nodes.len()];
        deg[self.root] += 1;
        for n in &self.nodes {
            for &c in n.features.values() {
                deg[c] += 1;
            }
        }
        deg
    }

    /// Description with `#n` tags on shared nodes; builds back to an
    /// isomorphic structure.
    pub fn to_desc(&self) -> Desc {
        let deg = self.in_degrees();
        let mut tags: HashMap<usize, u32> = HashMap::new();
        self.desc_of(self.root, &deg, &mut tags)
    }

    fn desc_of(&self, i: usize, deg: &[usize], tags: &mut HashMap<usize, u32>) -> Desc {
        if let Some(&t) = tags.get(&i) {
            return Desc {
                tag: Some(t),
                body: DescBody::Any,
            };
        }
        let tag = if deg[i] > 1 {
            let t = tags.len() as u32 + 1;
            tags.insert(i, t);
            Some(t)
        } else {
            None
        };
        let n = &self.nodes[i];
        let body = match &n.string {
            Some(s) => DescBody::Str(s.clone()),
            None => DescBody::Avm {
                ty: Some(n.ty.clone()),
                feats: n
                    .features
                    .iter()
                    .map(|(f, &c)| (vec![f.clone()], self.desc_of(c, deg, tags)))
                    .collect(),
            },
        };
        Desc { tag, body }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("feature structures serialize")
    }

    pub fn from_json(s: &str) -> Result<Fs, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Attribute-value matrix with numbered coreference tags.
    pub fn to_avm(&self) -> String {
        let deg = self.in_degrees();
        let mut tags = HashMap::new();
        let mut out = String::new();
        self.avm(self.root, 0, &deg, &mut tags, &mut out);
        out.push('\n');
        out
    }

    fn avm(
        &self,
        i: usize,
        col: usize,
        deg: &[usize],
        tags: &mut HashMap<usize, usize>,
        out: &mut String,
    ) {
        if let Some(t) = tags.get(&i) {
            let _ = write!(out, "#{t}");
            return;
        }
        let mut col = col;
        if deg[i] > 1 {
            let t = tags.len() + 1;
            tags.insert(i, t);
            let label = format!("#{t} ");
            col += label.chars().count();
            out.push_str(&label);
        }
        let n = &self.nodes[i];
        if let Some(s) = &n.string {
            out.push_str(&quote_string(s));
            return;
        }
        if n.features.is_empty() {
            out.push_str(&quote_atom(&n.ty));
            return;
        }
        let _ = write!(out, "[{}", quote_atom(&n.ty));
        let width = n.features.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        for (f, &c) in &n.features {
            out.push('\n');
            out.push_str(&" ".repeat(col + 1));
            let _ = write!(out, "{f:width$} ");
            self.avm(c, col + 1 + width + 1, deg, tags, out);
        }
        out.push(']');
    }

    /// Whether `self` subsumes `other`: every type, string and coreference
    /// in `self` is matched in `other`. Features absent from `other` are
    /// treated as unconstrained nodes of their appropriate type.
    pub fn subsumes(&self, other: &Fs, types: &TypeHierarchy) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Target {
            Real(usize),
            Virtual,
        }
        let mut map: HashMap<usize, Target> = HashMap::new();
        let mut stack = vec![(self.root, Target::Real(other.root), None::<crate::type_system::TypeId>)];
        while let Some((g, target, vty)) = stack.pop() {
            if let Some(prev) = map.get(&g) {
                if *prev != target || target == Target::Virtual {
                    return false;
                }
                continue;
            }
            map.insert(g, target);
            let gn = &self.nodes[g];
            let Some(gty) = types.lookup(&gn.ty) else {
                return false;
            };
            match target {
                Target::Real(s) => {
                    let sn = &other.nodes[s];
                    let Some(sty) = types.lookup(&sn.ty) else {
                        return false;
                    };
                    if !types.is_subtype(sty, gty) {
                        return false;
                    }
                    if gn.string.is_some() && gn.string != sn.string {
                        return false;
                    }
                    for (f, &gc) in &gn.features {
                        match sn.features.get(f) {
                            Some(&sc) => stack.push((gc, Target::Real(sc), None)),
                            None => {
                                let Some(fid) = types.feature(f) else {
                                    return false;
                                };
                                let Some(r) = types.approp_value(sty, fid) else {
                                    return false;
                                };
                                stack.push((gc, Target::Virtual, Some(r)));
                            }
                        }
                    }
                }
                Target::Virtual => {
                    let vt = vty.expect("virtual targets carry a type");
                    if !types.is_subtype(vt, gty) || gn.string.is_some() {
                        return false;
                    }
                    for (f, &gc) in &gn.features {
                        let Some(fid) = types.feature(f) else {
                            return false;
                        };
                        let Some(r) = types.approp_value(vt, fid) else {
                            return false;
                        };
                        stack.push((gc, Target::Virtual, Some(r)));
                    }
                }
            }
        }
        true
    }

    /// Mutual subsumption.
    pub fn equivalent(&self, other: &Fs, types: &TypeHierarchy) -> bool {
        self.subsumes(other, types) && other.subsumes(self, types)
    }
}

impl fmt::Display for Fs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_avm().trim_end())
    }
}
