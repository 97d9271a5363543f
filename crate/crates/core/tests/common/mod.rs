//! Random well-typed descriptions over the demo hierarchy.

#![allow(dead_code)]

use morphounify_core::{demo, Desc, DescBody, Engine, Fs, Grammar, TypeHierarchy, TypeId, STRING, TOP};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn grammar() -> Grammar {
    Grammar::parse(demo::GRAMMAR, "grammar.tfs").unwrap()
}

pub fn engine() -> Engine {
    Engine::demo()
}

pub struct DescGen<'a> {
    types: &'a TypeHierarchy,
    rng: ChaCha8Rng,
    tags: Vec<(u32, TypeId)>,
}

impl<'a> DescGen<'a> {
    pub fn new(types: &'a TypeHierarchy, seed: u64) -> Self {
        DescGen {
            types,
            rng: ChaCha8Rng::seed_from_u64(seed),
            tags: Vec::new(),
        }
    }

    fn subtype(&mut self, t: TypeId) -> TypeId {
        let mut cur = t;
        loop {
            let kids = self.types.children(cur);
            if kids.is_empty() || self.rng.gen_bool(0.35) {
                return cur;
            }
            cur = kids[self.rng.gen_range(0..kids.len())];
        }
    }

    fn desc(&mut self, t: TypeId, depth: usize) -> Desc {
        if t == STRING {
            let pool = ["rat", "sag", "+t", "a"];
            return Desc::string(pool[self.rng.gen_range(0..pool.len())]);
        }
        let c = self.subtype(t);
        if self.rng.gen_bool(0.1) {
            if let Some(&(k, _)) = self.tags.iter().find(|(_, ty)| *ty == c) {
                return Desc { tag: Some(k), body: DescBody::Any };
            }
        }
        let mut feats = Vec::new();
        if depth > 0 {
            let approp: Vec<_> = self.types.approp(c).iter().map(|(&f, &v)| (f, v)).collect();
            for (f, v) in approp {
                if self.rng.gen_bool(0.5) {
                    feats.push((vec![self.types.feature_name(f).to_string()], self.desc(v, depth - 1)));
                }
            }
        }
        let tag = if self.rng.gen_bool(0.15) {
            let k = self.tags.len() as u32 + 1;
            self.tags.push((k, c));
            Some(k)
        } else {
            None
        };
        Desc {
            tag,
            body: DescBody::Avm { ty: Some(self.types.name(c).to_string()), feats },
        }
    }

    /// Two descriptions below a common random type.
    pub fn pair(&mut self, depth: usize) -> (Desc, Desc) {
        let all: Vec<TypeId> = self.types.types().filter(|&t| t != TOP && t != STRING).collect();
        let t = all[self.rng.gen_range(0..all.len())];
        self.tags.clear();
        let a = self.desc(t, depth);
        self.tags.clear();
        let b = self.desc(t, depth);
        (a, b)
    }
}

/// Every feature present is appropriate and every value is within its
/// restriction.
pub fn well_typed(fs: &Fs, types: &TypeHierarchy) -> Result<(), String> {
    for n in &fs.nodes {
        let t = types.lookup(&n.ty).ok_or(format!("unknown type {}", n.ty))?;
        for (f, &c) in &n.features {
            let fid = types.feature(f).ok_or(format!("unknown feature {f}"))?;
            let r = types
                .approp_value(t, fid)
                .ok_or(format!("{f} not appropriate for {}", n.ty))?;
            let ct = types.lookup(&fs.nodes[c].ty).unwrap();
            if !types.is_subtype(ct, r) {
                return Err(format!("{}.{f} is {}, outside {}", n.ty, fs.nodes[c].ty, types.name(r)));
            }
        }
    }
    Ok(())
}
