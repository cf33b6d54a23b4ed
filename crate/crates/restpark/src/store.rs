//! Immutable in-memory triple store answering all eight triple-pattern
//! shapes through three sorted indexes (SPO, POS, OSP), with pagination.
//!
//! The primary index is the deduplicated triple list itself, sorted in
//! subject-predicate-object order; a triple's position in it serves as its
//! id. The POS and OSP indexes are permutations of those ids. Because ids
//! are assigned in SPO order, sorting any id set numerically restores SPO
//! order, so every query route yields the same deterministic ordering.

use std::cmp::Ordering;
use std::ops::Range;

use thiserror::Error;

use crate::term::{Term, Triple, TriplePattern};

/// Page size applied when a request leaves it unspecified.
pub const DEFAULT_PAGE_SIZE: usize = 100;
/// Upper bound on `page_size`; larger requests are rejected.
pub const MAX_PAGE_SIZE: usize = 10000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PageError {
    #[error("page must be at least 1")]
    PageZero,
    #[error("page_size must be between 1 and {MAX_PAGE_SIZE}")]
    SizeOutOfRange,
}

/// A 1-based page selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageRequest {
    page: usize,
    page_size: usize,
}

impl PageRequest {
    pub fn new(page: usize, page_size: usize) -> Result<Self, PageError> {
        if page < 1 {
            return Err(PageError::PageZero);
        }
        if page_size < 1 || page_size > MAX_PAGE_SIZE {
            return Err(PageError::SizeOutOfRange);
        }
        Ok(PageRequest { page, page_size })
    }

    pub fn page(&self) -> usize {
        self.page
    }

    pub fn page_size(&self) -> usize {
        self.page_size
    }
}

impl Default for PageRequest {
    fn default() -> Self {
        PageRequest {
            page: 1,
            page_size: DEFAULT_PAGE_SIZE,
        }
    }
}

/// One page of matches plus enough bookkeeping to walk the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageResult {
    pub triples: Vec<Triple>,
    pub total_count: usize,
    pub page: usize,
    pub page_size: usize,
    pub has_next: bool,
}

/// Deduplicated, immutable triple collection with SPO/POS/OSP indexes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleStore {
    /// Sorted SPO; position in this vector is the triple's id.
    triples: Vec<Triple>,
    /// Ids sorted by (predicate, object, subject).
    pos: Vec<u32>,
    /// Ids sorted by (object, subject, predicate).
    osp: Vec<u32>,
}

fn pos_key(t: &Triple) -> (&Term, &Term, &Term) {
    (t.predicate(), t.object(), t.subject())
}

fn osp_key(t: &Triple) -> (&Term, &Term, &Term) {
    (t.object(), t.subject(), t.predicate())
}

impl TripleStore {
    /// Build from any triple list; duplicates collapse. Building twice from
    /// the same multiset yields identical stores.
    pub fn build(triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut triples: Vec<Triple> = triples.into_iter().collect();
        triples.sort();
        triples.dedup();
        assert!(
            u32::try_from(triples.len()).is_ok(),
            "store capacity is u32-indexed"
        );
        let mut pos: Vec<u32> = (0..triples.len() as u32).collect();
        pos.sort_by(|a, b| pos_key(&triples[*a as usize]).cmp(&pos_key(&triples[*b as usize])));
        let mut osp: Vec<u32> = (0..triples.len() as u32).collect();
        osp.sort_by(|a, b| osp_key(&triples[*a as usize]).cmp(&osp_key(&triples[*b as usize])));
        TripleStore { triples, pos, osp }
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// All triples in SPO order.
    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    /// Every match, in SPO order.
    pub fn match_pattern(&self, pattern: &TriplePattern) -> Vec<Triple> {
        match self.select(pattern) {
            Selection::Span(range) => self.triples[range].to_vec(),
            Selection::Ids(ids) => ids
                .into_iter()
                .map(|id| self.triples[id as usize].clone())
                .collect(),
        }
    }

    /// `|match_pattern|` without materializing the matches.
    pub fn count_pattern(&self, pattern: &TriplePattern) -> usize {
        match self.select(pattern) {
            Selection::Span(range) => range.len(),
            Selection::Ids(ids) => ids.len(),
        }
    }

    /// The `[(page-1)*size, page*size)` slice of `match_pattern`, with the
    /// full count. Pages past the end are empty, never an error.
    pub fn match_page(&self, pattern: &TriplePattern, req: PageRequest) -> PageResult {
        let (total_count, triples) = match self.select(pattern) {
            Selection::Span(range) => {
                let total = range.len();
                let start = range.start.saturating_add((req.page - 1) * req.page_size);
                let end = start.saturating_add(req.page_size).min(range.end);
                let slice = if start >= range.end {
                    &[][..]
                } else {
                    &self.triples[start..end]
                };
                (total, slice.to_vec())
            }
            Selection::Ids(ids) => {
                let total = ids.len();
                let start = (req.page - 1).saturating_mul(req.page_size).min(total);
                let end = start.saturating_add(req.page_size).min(total);
                let page: Vec<Triple> = ids[start..end]
                    .iter()
                    .map(|id| self.triples[*id as usize].clone())
                    .collect();
                (total, page)
            }
        };
        PageResult {
            triples,
            total_count,
            page: req.page,
            page_size: req.page_size,
            has_next: req.page.saturating_mul(req.page_size) < total_count,
        }
    }

    /// Pick an index by bound positions and resolve to either a contiguous
    /// SPO span or an ascending id list (both SPO-ordered).
    fn select(&self, pattern: &TriplePattern) -> Selection {
        if !pattern.is_satisfiable() {
            return Selection::Span(0..0);
        }
        let (s, p, o) = (pattern.subject(), pattern.predicate(), pattern.object());
        match (s, p, o) {
            // Subject bound: a prefix of the SPO order is contiguous.
            (Some(s), Some(p), Some(o)) => {
                Selection::Span(self.spo_range(&[Some(s), Some(p), Some(o)]))
            }
            (Some(s), Some(p), None) => Selection::Span(self.spo_range(&[Some(s), Some(p), None])),
            (Some(s), None, None) => Selection::Span(self.spo_range(&[Some(s), None, None])),
            (None, None, None) => Selection::Span(0..self.triples.len()),
            // Subject and object without predicate: scan the subject span.
            (Some(s), None, Some(o)) => {
                let range = self.spo_range(&[Some(s), None, None]);
                Selection::Ids(
                    (range.start..range.end)
                        .filter(|i| self.triples[*i].object() == o)
                        .map(|i| i as u32)
                        .collect(),
                )
            }
            // Predicate bound, subject unbound: POS prefix.
            (None, Some(p), o) => {
                let range = index_range(&self.pos, &self.triples, pos_key, &[Some(p), o, None]);
                Selection::Ids(sorted_ids(&self.pos[range]))
            }
            // Object only: OSP prefix.
            (None, None, Some(o)) => {
                let range = index_range(&self.osp, &self.triples, osp_key, &[Some(o), None, None]);
                Selection::Ids(sorted_ids(&self.osp[range]))
            }
        }
    }

    /// Contiguous range of the SPO-sorted triples matching a key prefix.
    fn spo_range(&self, prefix: &[Option<&Term>; 3]) -> Range<usize> {
        let cmp = |t: &Triple| prefix_cmp(&[t.subject(), t.predicate(), t.object()], prefix);
        let start = self.triples.partition_point(|t| cmp(t) == Ordering::Less);
        let end = self
            .triples
            .partition_point(|t| cmp(t) != Ordering::Greater);
        start..end
    }
}

enum Selection {
    /// Contiguous id range in the SPO index.
    Span(Range<usize>),
    /// Explicit ids, ascending (= SPO order).
    Ids(Vec<u32>),
}

/// Compare a triple's key against a bound-prefix: unbound slots always
/// compare equal, so the partition points bracket exactly the prefix group.
fn prefix_cmp(key: &[&Term; 3], prefix: &[Option<&Term>; 3]) -> Ordering {
    for (have, want) in key.iter().zip(prefix) {
        if let Some(want) = want {
            let ord = (*have).cmp(*want);
            if ord != Ordering::Equal {
                return ord;
            }
        }
    }
    Ordering::Equal
}

fn index_range<'a>(
    index: &[u32],
    triples: &'a [Triple],
    key: fn(&'a Triple) -> (&'a Term, &'a Term, &'a Term),
    prefix: &[Option<&Term>; 3],
) -> Range<usize> {
    let cmp = |id: &u32| {
        let (a, b, c) = key(&triples[*id as usize]);
        prefix_cmp(&[a, b, c], prefix)
    };
    let start = index.partition_point(|id| cmp(id) == Ordering::Less);
    let end = index.partition_point(|id| cmp(id) != Ordering::Greater);
    start..end
}

fn sorted_ids(ids: &[u32]) -> Vec<u32> {
    let mut ids = ids.to_vec();
    ids.sort_unstable();
    ids
}
