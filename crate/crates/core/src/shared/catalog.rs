use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::clustering::Aabb;
use crate::distributed::header_of;
use crate::shared::SharedTree;
use crate::wire::{ClusterId, SharedHeader};

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub header: SharedHeader,
    /// Known once the children's headers have been seen.
    pub children: Option<Vec<ClusterId>>,
    /// Position in the local tree for clusters owned by this node.
    pub local: Option<usize>,
}

/// Every cluster of one shared tree that this node knows about, keyed by id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Catalog {
    map: BTreeMap<ClusterId, CatalogEntry>,
}

impl Catalog {
    /// Path clusters, their children's headers and the whole local tree.
    pub fn new(tree: &SharedTree) -> Self {
        let mut cat = Self::default();
        for c in &tree.path {
            let ids = c.children.iter().map(|h| h.header.id).collect();
            cat.map.insert(
                c.header.header.id,
                CatalogEntry {
                    header: c.header.clone(),
                    children: Some(ids),
                    local: None,
                },
            );
            for h in &c.children {
                cat.map.entry(h.header.id).or_insert_with(|| CatalogEntry {
                    header: h.clone(),
                    children: None,
                    local: None,
                });
            }
        }
        let local = &tree.local;
        for c in 0..local.len() {
            let id = ClusterId::local(tree.rank, c);
            cat.map.insert(
                id,
                CatalogEntry {
                    header: SharedHeader {
                        header: header_of(local, tree.rank, c),
                        shareholders: alloc::vec![tree.rank],
                    },
                    children: Some(
                        local.node(c).children.iter().map(|&ch| ClusterId::local(tree.rank, ch)).collect(),
                    ),
                    local: Some(c),
                },
            );
        }
        cat
    }

    pub fn get(&self, id: ClusterId) -> Option<&CatalogEntry> {
        self.map.get(&id)
    }

    pub fn entry(&self, id: ClusterId) -> &CatalogEntry {
        self.map.get(&id).unwrap_or_else(|| panic!("cluster {id} is not known here"))
    }

    pub fn bbox(&self, id: ClusterId) -> &Aabb {
        &self.entry(id).header.header.bbox
    }

    pub fn shareholders(&self, id: ClusterId) -> &[usize] {
        &self.entry(id).header.shareholders
    }

    pub fn holds(&self, id: ClusterId, node: usize) -> bool {
        self.shareholders(id).binary_search(&node).is_ok()
    }

    pub fn manager(&self, id: ClusterId) -> usize {
        self.entry(id).header.manager()
    }

    pub fn announced(&self, id: ClusterId) -> usize {
        self.entry(id).header.header.child_count as usize
    }

    pub fn children(&self, id: ClusterId) -> Option<&[ClusterId]> {
        self.entry(id).children.as_deref()
    }

    pub fn child_headers(&self, id: ClusterId) -> Vec<SharedHeader> {
        self.children(id)
            .unwrap_or(&[])
            .iter()
            .map(|&c| self.entry(c).header.clone())
            .collect()
    }

    /// Records the children of `id`; a second delivery of the same children
    /// is ignored.
    pub fn insert_children(&mut self, id: ClusterId, headers: Vec<SharedHeader>) {
        let parent = self.map.get_mut(&id).expect("parent known");
        if parent.children.is_some() {
            return;
        }
        parent.children = Some(headers.iter().map(|h| h.header.id).collect());
        for h in headers {
            self.map.entry(h.header.id).or_insert(CatalogEntry {
                header: h,
                children: None,
                local: None,
            });
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ClusterId, &CatalogEntry)> {
        self.map.iter()
    }
}
