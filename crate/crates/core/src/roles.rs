use std::fmt;

use serde::{Deserialize, Serialize};

/// The three key attributes a miner needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Case,
    Activity,
    Timestamp,
}

impl Role {
    pub const ALL: [Role; 3] = [Role::Case, Role::Activity, Role::Timestamp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Case => "case",
            Role::Activity => "activity",
            Role::Timestamp => "timestamp",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A (case-id, activity, timestamp) column assignment.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Combo {
    pub case: String,
    pub activity: String,
    pub timestamp: String,
}

impl Combo {
    pub fn new(case: impl Into<String>, activity: impl Into<String>, timestamp: impl Into<String>) -> Self {
        Self {
            case: case.into(),
            activity: activity.into(),
            timestamp: timestamp.into(),
        }
    }

    pub fn get(&self, role: Role) -> &str {
        match role {
            Role::Case => &self.case,
            Role::Activity => &self.activity,
            Role::Timestamp => &self.timestamp,
        }
    }

    /// The role a column plays in this combo, if any.
    pub fn role_of(&self, column: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|&r| self.get(r) == column)
    }

    pub fn is_distinct(&self) -> bool {
        self.case != self.activity && self.case != self.timestamp && self.activity != self.timestamp
    }
}

impl fmt::Display for Combo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.case, self.activity, self.timestamp)
    }
}
