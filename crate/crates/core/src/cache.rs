//! Per-page score cache, so mode and threshold changes never rescore.

use std::collections::HashMap;
use std::sync::Arc;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::dom::ElementTree;
use crate::scoring::ScoreMap;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PageKey {
    pub session: String,
    pub page: String,
}

#[derive(Debug)]
pub struct CachedPage {
    pub tree: Arc<ElementTree>,
    /// Digest of `tree` when it was scored.
    pub digest: String,
    pub scores: Arc<ScoreMap>,
}

#[derive(Debug, Default)]
pub struct ScoreCache {
    pages: RwLock<HashMap<PageKey, Arc<CachedPage>>>,
}

impl ScoreCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&self, key: PageKey, tree: ElementTree, scores: ScoreMap) -> Arc<CachedPage> {
        let digest = tree.digest();
        let page = Arc::new(CachedPage { tree: Arc::new(tree), digest, scores: Arc::new(scores) });
        self.pages.write().insert(key, page.clone());
        page
    }

    pub fn get(&self, key: &PageKey) -> Option<Arc<CachedPage>> {
        self.pages.read().get(key).cloned()
    }

    pub fn remove(&self, key: &PageKey) -> Option<Arc<CachedPage>> {
        self.pages.write().remove(key)
    }

    /// Drops every page of `session`; returns how many were dropped.
    pub fn invalidate_session(&self, session: &str) -> usize {
        let mut pages = self.pages.write();
        let before = pages.len();
        pages.retain(|k, _| k.session != session);
        before - pages.len()
    }

    pub fn len(&self) -> usize {
        self.pages.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.pages.read().is_empty()
    }
}
