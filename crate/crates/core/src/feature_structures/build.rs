use std::collections::HashMap;

use super::store::{NodeId, Store, Task};
use crate::error::{EngineError, Fail};
use crate::syntax::{Desc, DescBody};

impl<'g> Store<'g> {
    /// Builds a licensed structure from a description.
    pub fn build(&mut self, d: &Desc) -> Result<NodeId, Fail> {
        let mut tags = HashMap::new();
        self.build_with(d, &mut tags)
    }

    /// Like [`Store::build`], sharing coreference tags across calls.
    pub fn build_with(&mut self, d: &Desc, tags: &mut HashMap<u32, NodeId>) -> Result<NodeId, Fail> {
        self.transact(|s| s.build_inner(d, tags))
    }

    pub fn build_str(&mut self, text: &str) -> Result<NodeId, Fail> {
        let d = crate::syntax::parse_desc(text).map_err(|e| EngineError::Mode(e.to_string()))?;
        self.build(&d)
    }

    pub(crate) fn build_inner(
        &mut self,
        d: &Desc,
        tags: &mut HashMap<u32, NodeId>,
    ) -> Result<NodeId, Fail> {
        let n = self.top();
        self.run()?;
        self.build_at(n, d, tags)
    }

    /// Adds the description to an existing node, so that untyped
    /// substructure takes the type appropriate for its slot.
    fn build_at(&mut self, node: NodeId, d: &Desc, tags: &mut HashMap<u32, NodeId>) -> Result<NodeId, Fail> {
        let types = self.types();
        if let Some(tag) = d.tag {
            match tags.get(&tag) {
                Some(&prev) => self.push(Task::Unify(prev, node)),
                None => {
                    tags.insert(tag, node);
                }
            }
            self.run()?;
        }
        match &d.body {
            DescBody::Any => {}
            DescBody::Str(s) => {
                let v = self.new_string(s);
                self.push(Task::License(v));
                self.push(Task::Unify(node, v));
            }
            DescBody::Avm { ty, feats } => {
                if let Some(name) = ty {
                    self.push(Task::Coerce(node, types.type_id(name)?));
                }
                self.run()?;
                for (path, sub) in feats {
                    let p = path
                        .iter()
                        .map(|f| types.feature(f).ok_or_else(|| EngineError::UnknownFeature(f.clone())))
                        .collect::<Result<Vec<_>, _>>()?;
                    let at = self.path_get_inner(node, &p)?;
                    self.build_at(at, sub, tags)?;
                }
            }
            DescBody::List { items, tail } => {
                let feature = |name: &str| types.feature(name).ok_or_else(|| EngineError::UnknownFeature(name.into()));
                let (first, rest) = (feature("first")?, feature("rest")?);
                let nelist = types.type_id("nelist")?;
                let elist = types.type_id("elist")?;
                let mut cur = node;
                for item in items {
                    self.push(Task::Coerce(cur, nelist));
                    self.run()?;
                    let at = self.path_get_inner(cur, &[first])?;
                    self.build_at(at, item, tags)?;
                    cur = self.path_get_inner(cur, &[rest])?;
                }
                match tail {
                    Some(t) => {
                        self.build_at(cur, t, tags)?;
                    }
                    None => self.push(Task::Coerce(cur, elist)),
                }
            }
        }
        self.run()?;
        Ok(self.deref(node))
    }
}
