//! Sparse user-object attention records.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::{Error, ObjectId, Result, UserId};

/// An attention level on the 5-point scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub const MIN: Level = Level(1);
    pub const MID: Level = Level(3);
    pub const MAX: Level = Level(5);

    pub fn new(level: i64) -> Result<Self> {
        if (1..=5).contains(&level) {
            Ok(Level(level as u8))
        } else {
            Err(Error::InvalidLevel(level))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }
}

impl TryFrom<i64> for Level {
    type Error = Error;

    fn try_from(value: i64) -> Result<Self> {
        Level::new(value)
    }
}

/// Observed `(user, object, level)` triples, at most one per pair.
///
/// Records carry the dimensions of the matrix they were sampled from so a
/// model fitted on them can score objects nobody has observed yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseAttentionRecords {
    num_users: usize,
    num_objects: usize,
    entries: BTreeMap<(UserId, ObjectId), Level>,
}

impl SparseAttentionRecords {
    pub fn new(num_users: usize, num_objects: usize) -> Self {
        Self {
            num_users,
            num_objects,
            entries: BTreeMap::new(),
        }
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_objects(&self) -> usize {
        self.num_objects
    }

    pub fn insert(&mut self, user: UserId, object: ObjectId, level: Level) -> Result<()> {
        if user >= self.num_users {
            return Err(Error::IndexOutOfRange {
                what: "user",
                index: user,
                len: self.num_users,
            });
        }
        if object >= self.num_objects {
            return Err(Error::IndexOutOfRange {
                what: "object",
                index: object,
                len: self.num_objects,
            });
        }
        if self.entries.contains_key(&(user, object)) {
            return Err(Error::DuplicateRecord { user, object });
        }
        self.entries.insert((user, object), level);
        Ok(())
    }

    /// Adds every record of `other`; fails on the first overlapping pair.
    pub fn merge(&mut self, other: &SparseAttentionRecords) -> Result<()> {
        for (user, object, level) in other.iter() {
            self.insert(user, object, level)?;
        }
        Ok(())
    }

    pub fn get(&self, user: UserId, object: ObjectId) -> Option<Level> {
        self.entries.get(&(user, object)).copied()
    }

    pub fn contains(&self, user: UserId, object: ObjectId) -> bool {
        self.entries.contains_key(&(user, object))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Records in ascending `(user, object)` order.
    pub fn iter(&self) -> impl Iterator<Item = (UserId, ObjectId, Level)> + '_ {
        self.entries.iter().map(|(&(u, o), &l)| (u, o, l))
    }

    /// Records of one user in ascending object order.
    pub fn user_records(&self, user: UserId) -> impl Iterator<Item = (ObjectId, Level)> + '_ {
        self.entries
            .range((user, 0)..(user, usize::MAX))
            .map(|(&(_, o), &l)| (o, l))
    }

    pub fn objects_of(&self, user: UserId) -> Vec<ObjectId> {
        self.user_records(user).map(|(o, _)| o).collect()
    }
}
