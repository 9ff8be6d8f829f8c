//! Immutable parent pointer trees ("cactus stacks").
//!
//! Each node points only at its parent, so many stacks can share a common prefix. Nodes live
//! in a [`Bump`] arena and are freed together when the arena is dropped, which keeps both
//! pushing and tearing down a large search cheap. Every node caches its length and a hash of
//! the whole path to the root, which makes hashing O(1) and lets most unequal comparisons
//! finish immediately.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

pub use bumpalo::Bump;

struct Node<'a, T> {
    val: T,
    parent: Option<&'a Node<'a, T>>,
    len: usize,
    hash: u64,
}

pub struct Cactus<'a, T> {
    node: Option<&'a Node<'a, T>>,
}

impl<T> Clone for Cactus<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Cactus<'_, T> {}

impl<T> Default for Cactus<'_, T> {
    fn default() -> Self {
        Cactus { node: None }
    }
}

impl<'a, T> Cactus<'a, T> {
    /// An empty cactus.
    pub fn new() -> Self {
        Cactus { node: None }
    }

    pub fn is_empty(&self) -> bool {
        self.node.is_none()
    }

    pub fn len(&self) -> usize {
        self.node.map_or(0, |n| n.len)
    }

    /// The value at the top (the most recently added node).
    pub fn val(&self) -> Option<&'a T> {
        self.node.map(|n| &n.val)
    }

    /// The cactus without its top node, or `None` if empty.
    pub fn parent(&self) -> Option<Cactus<'a, T>> {
        self.node.map(|n| Cactus { node: n.parent })
    }

    /// Values from the top down to the root.
    pub fn vals(&self) -> Vals<'a, T> {
        Vals { next: self.node }
    }

    pub fn ptr_eq(&self, other: &Cactus<'a, T>) -> bool {
        match (self.node, other.node) {
            (Some(a), Some(b)) => std::ptr::eq(a, b),
            (None, None) => true,
            _ => false,
        }
    }

    fn path_hash(&self) -> u64 {
        self.node.map_or(0, |n| n.hash)
    }
}

impl<'a, T: Hash> Cactus<'a, T> {
    /// A new cactus with `val` on top of `self`, allocated in `arena`. `self` is unchanged.
    pub fn child(&self, arena: &'a Bump, val: T) -> Cactus<'a, T> {
        let mut h = DefaultHasher::new();
        self.path_hash().hash(&mut h);
        val.hash(&mut h);
        let node = arena.alloc(Node {
            val,
            parent: self.node,
            len: self.len() + 1,
            hash: h.finish(),
        });
        Cactus { node: Some(node) }
    }
}

impl<'a, T: Hash + Clone> Cactus<'a, T> {
    /// Builds a cactus from a bottom-to-top slice.
    pub fn from_slice(arena: &'a Bump, vals: &[T]) -> Cactus<'a, T> {
        vals.iter()
            .fold(Cactus::new(), |c, v| c.child(arena, v.clone()))
    }

    /// The values as a bottom-to-top vector.
    pub fn to_vec(&self) -> Vec<T> {
        let mut v: Vec<T> = self.vals().cloned().collect();
        v.reverse();
        v
    }
}

pub struct Vals<'a, T> {
    next: Option<&'a Node<'a, T>>,
}

impl<'a, T> Iterator for Vals<'a, T> {
    type Item = &'a T;

    fn next(&mut self) -> Option<&'a T> {
        let n = self.next?;
        self.next = n.parent;
        Some(&n.val)
    }
}

impl<T: PartialEq> PartialEq for Cactus<'_, T> {
    fn eq(&self, other: &Self) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        if self.len() != other.len() || self.path_hash() != other.path_hash() {
            return false;
        }
        let (mut a, mut b) = (self.node, other.node);
        while let (Some(x), Some(y)) = (a, b) {
            if std::ptr::eq(x, y) {
                return true;
            }
            if x.val != y.val {
                return false;
            }
            a = x.parent;
            b = y.parent;
        }
        true
    }
}

impl<T: Eq> Eq for Cactus<'_, T> {}

impl<T> Hash for Cactus<'_, T> {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.path_hash().hash(state);
    }
}

impl<T: fmt::Debug> fmt::Debug for Cactus<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut v: Vec<&T> = self.vals().collect();
        v.reverse();
        f.debug_list().entries(v).finish()
    }
}
