//! Ordered symbol tables.
//!
//! Every polynomial in the kernel refers to variables by their index in a
//! [`VariableSet`]. The index order is the canonical monomial order, so the
//! layout is fixed: `t < x1..xN < v1..vN < u < p1..pN < E0`, followed by any
//! symbols appended with [`VariableSet::extend`]. Extending never moves an
//! existing symbol, which lets an expression built against a set be reused
//! unchanged against any of its extensions.

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use super::ExprError;

/// Index of a symbol inside a [`VariableSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Names that can never be declared as variables.
pub const RESERVED: [&str; 2] = ["i", "exp"];

/// The registered constant symbol appearing in every set.
pub const E0_NAME: &str = "E0";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableSet {
    names: Vec<String>,
    lookup: HashMap<String, Var>,
    n: usize,
}

impl VariableSet {
    /// Standard layout with `t`, `x1..xN`, `v1..vN`, `u`, `p1..pN`, `E0`.
    pub fn new(n: usize) -> Result<Self, ExprError> {
        Self::with_names("t", "x", "v", n)
    }

    /// Same layout with custom names for the time symbol and the position and
    /// velocity families (e.g. `y1..yN`, `w1..wN` for transformed systems).
    pub fn with_names(
        time: &str,
        position_prefix: &str,
        velocity_prefix: &str,
        n: usize,
    ) -> Result<Self, ExprError> {
        if n == 0 {
            return Err(ExprError::InvalidVariableSet(
                "at least one particle is required".into(),
            ));
        }
        let mut names = Vec::with_capacity(3 * n + 3);
        names.push(time.to_string());
        names.extend((1..=n).map(|k| format!("{position_prefix}{k}")));
        names.extend((1..=n).map(|k| format!("{velocity_prefix}{k}")));
        names.push("u".to_string());
        names.extend((1..=n).map(|k| format!("p{k}")));
        names.push(E0_NAME.to_string());
        let mut set = VariableSet {
            names: Vec::new(),
            lookup: HashMap::new(),
            n,
        };
        for name in names {
            set.push(name)?;
        }
        Ok(set)
    }

    fn push(&mut self, name: String) -> Result<Var, ExprError> {
        if !is_identifier(&name) {
            return Err(ExprError::InvalidVariableSet(format!(
                "`{name}` is not a valid identifier"
            )));
        }
        if RESERVED.contains(&name.as_str()) {
            return Err(ExprError::InvalidVariableSet(format!(
                "`{name}` is reserved"
            )));
        }
        if self.lookup.contains_key(&name) {
            return Err(ExprError::InvalidVariableSet(format!(
                "duplicate symbol `{name}`"
            )));
        }
        let var = Var(self.names.len() as u32);
        self.lookup.insert(name.clone(), var);
        self.names.push(name);
        Ok(var)
    }

    /// Returns a copy with `extra` appended after every existing symbol.
    pub fn extend<S: AsRef<str>>(&self, extra: &[S]) -> Result<Self, ExprError> {
        let mut set = self.clone();
        for name in extra {
            set.push(name.as_ref().to_string())?;
        }
        Ok(set)
    }

    /// Number of particles (degrees of freedom).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn time(&self) -> Var {
        Var(0)
    }

    pub fn position(&self, k: usize) -> Var {
        assert!(k < self.n, "position index {k} out of range");
        Var(1 + k as u32)
    }

    pub fn velocity(&self, k: usize) -> Var {
        assert!(k < self.n, "velocity index {k} out of range");
        Var((1 + self.n + k) as u32)
    }

    pub fn wave(&self) -> Var {
        Var((1 + 2 * self.n) as u32)
    }

    pub fn momentum(&self, k: usize) -> Var {
        assert!(k < self.n, "momentum index {k} out of range");
        Var((2 + 2 * self.n + k) as u32)
    }

    pub fn e0(&self) -> Var {
        Var((2 + 3 * self.n) as u32)
    }

    pub fn positions(&self) -> Vec<Var> {
        (0..self.n).map(|k| self.position(k)).collect()
    }

    pub fn velocities(&self) -> Vec<Var> {
        (0..self.n).map(|k| self.velocity(k)).collect()
    }

    pub fn momenta(&self) -> Vec<Var> {
        (0..self.n).map(|k| self.momentum(k)).collect()
    }

    /// Indices of the appended (non-standard) symbols.
    pub fn extras(&self) -> Range<usize> {
        (3 + 3 * self.n)..self.names.len()
    }

    pub fn get(&self, name: &str) -> Option<Var> {
        self.lookup.get(name).copied()
    }

    pub fn name(&self, var: Var) -> &str {
        &self.names[var.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// True when `other` is this set or an extension of it.
    pub fn is_prefix_of(&self, other: &VariableSet) -> bool {
        self.n == other.n
            && self.names.len() <= other.names.len()
            && self.names.iter().zip(&other.names).all(|(a, b)| a == b)
    }

    /// Same symbol layout, possibly different names.
    pub fn same_layout(&self, other: &VariableSet) -> bool {
        self.n == other.n && self.names.len() == other.names.len()
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.names.join(", "))
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_layout_follows_canonical_order() {
        let vars = VariableSet::new(2).unwrap();
        let names: Vec<&str> = vars.names().iter().map(String::as_str).collect();
        assert_eq!(names, ["t", "x1", "x2", "v1", "v2", "u", "p1", "p2", "E0"]);
        assert_eq!(vars.name(vars.velocity(1)), "v2");
        assert_eq!(vars.name(vars.e0()), "E0");
        assert!(vars.extras().is_empty());
    }

    #[test]
    fn extension_keeps_indices() {
        let vars = VariableSet::new(3).unwrap();
        let ext = vars.extend(&["a1", "a2", "a3"]).unwrap();
        assert!(vars.is_prefix_of(&ext));
        assert_eq!(ext.get("x2"), vars.get("x2"));
        assert_eq!(ext.get("a1"), Some(Var(vars.len() as u32)));
    }

    #[test]
    fn rejects_bad_sets() {
        assert!(VariableSet::new(0).is_err());
        let vars = VariableSet::new(1).unwrap();
        assert!(vars.extend(&["x1"]).is_err());
        assert!(vars.extend(&["i"]).is_err());
        assert!(vars.extend(&["1a"]).is_err());
        assert!(vars.extend(&["a_b"]).is_err());
    }
}
