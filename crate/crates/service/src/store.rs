//! Content-addressed pose store with a byte budget and LRU eviction.

use std::sync::{Arc, Mutex};

use lru::LruCache;
use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn content_id(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug)]
struct Inner {
    entries: LruCache<String, Arc<Vec<u8>>>,
    bytes: usize,
}

#[derive(Debug)]
pub struct PoseStore {
    inner: Mutex<Inner>,
    budget: usize,
}

impl PoseStore {
    pub fn new(budget: usize) -> Self {
        Self {
            inner: Mutex::new(Inner {
                entries: LruCache::unbounded(),
                bytes: 0,
            }),
            budget,
        }
    }

    /// Stores `bytes` and returns its id. The newest entry is always kept,
    /// even when it alone exceeds the budget.
    pub fn insert(&self, bytes: Vec<u8>) -> String {
        let id = content_id(&bytes);
        let mut inner = self.inner.lock().expect("pose store poisoned");
        if inner.entries.get(&id).is_some() {
            return id;
        }
        inner.bytes += bytes.len();
        inner.entries.put(id.clone(), Arc::new(bytes));
        while inner.bytes > self.budget && inner.entries.len() > 1 {
            if let Some((_, evicted)) = inner.entries.pop_lru() {
                inner.bytes -= evicted.len();
            }
        }
        id
    }

    pub fn get(&self, id: &str) -> Option<Arc<Vec<u8>>> {
        self.inner.lock().expect("pose store poisoned").entries.get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().expect("pose store poisoned").entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bytes currently held.
    pub fn size(&self) -> usize {
        self.inner.lock().expect("pose store poisoned").bytes
    }
}
