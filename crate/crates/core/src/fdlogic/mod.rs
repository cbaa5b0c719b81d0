//! Functional dependencies over contextual families: rule-based derivation,
//! counterexample construction and a bounded semantic oracle.
//!
//! Transitivity is not sound once relations are only locally consistent.
//! The derivation engine replaces it with the cycle rule and the contextual
//! chain rule, and restricts every intermediate step to variables that
//! already occur together in one of the premises or the goal.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::relation::{VarSet, Variable};

mod closure;
mod counterexample;
mod derive;
mod oracle;

pub use closure::{
    chain_rule_derives, classical_closure, cycle_rule_derives, derivation_closure,
    reflexivity_expand,
};
pub use counterexample::build_counterexample;
pub use derive::{derives, Derivation, DerivationTrace, Justification, Step};
pub use oracle::{semantic_entails_oracle, OracleBounds, OracleVerdict};

/// A functional dependency `lhs -> rhs`. Both sides are nonempty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fd {
    lhs: VarSet,
    rhs: VarSet,
}

impl Fd {
    /// Panics if either side is empty; see [`Fd::try_new`].
    pub fn new(lhs: VarSet, rhs: VarSet) -> Self {
        Fd::try_new(lhs, rhs).expect("both sides of an FD must be nonempty")
    }

    pub fn try_new(lhs: VarSet, rhs: VarSet) -> Result<Self> {
        if lhs.is_empty() || rhs.is_empty() {
            return Err(Error::Unsupported(
                "functional dependencies need nonempty sides".into(),
            ));
        }
        Ok(Fd { lhs, rhs })
    }

    pub fn unary(x: &str, y: &str) -> Self {
        Fd::new(VarSet::of([x]), VarSet::of([y]))
    }

    pub(crate) fn pair(x: &Variable, y: &Variable) -> Self {
        Fd {
            lhs: std::iter::once(x.clone()).collect(),
            rhs: std::iter::once(y.clone()).collect(),
        }
    }

    /// The context dependency `vars -> vars`.
    pub fn cd(vars: VarSet) -> Self {
        Fd::new(vars.clone(), vars)
    }

    pub fn lhs(&self) -> &VarSet {
        &self.lhs
    }

    pub fn rhs(&self) -> &VarSet {
        &self.rhs
    }

    pub fn vars(&self) -> VarSet {
        self.lhs.union(&self.rhs)
    }

    pub fn is_unary(&self) -> bool {
        self.lhs.len() == 1 && self.rhs.len() == 1
    }

    pub fn is_cd(&self) -> bool {
        self.lhs == self.rhs
    }

    /// `rhs ⊆ lhs`: derivable by reflexivity alone.
    pub fn is_trivial(&self) -> bool {
        self.rhs.is_subset(&self.lhs)
    }

    /// `(x, y)` for a unary FD `x -> y`.
    pub fn as_unary(&self) -> Option<(&Variable, &Variable)> {
        if self.is_unary() {
            Some((self.lhs.iter().next()?, self.rhs.iter().next()?))
        } else {
            None
        }
    }
}

impl fmt::Display for Fd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let words = |s: &VarSet| s.iter().map(Variable::name).collect::<Vec<_>>().join(" ");
        if self.is_cd() {
            write!(f, "cd {}", words(&self.lhs))
        } else {
            write!(f, "{} -> {}", words(&self.lhs), words(&self.rhs))
        }
    }
}

/// Parses `A B -> C` or `cd A B C`. Variables are identifiers made of
/// letters, digits, `_` and `'`, not starting with a digit.
impl FromStr for Fd {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let side = |text: &str| -> std::result::Result<VarSet, String> {
            let mut out = VarSet::new();
            for w in text.split_whitespace() {
                if !is_identifier(w) {
                    return Err(format!("`{w}` is not a variable name"));
                }
                out.insert(Variable::new(w));
            }
            if out.is_empty() {
                return Err("expected at least one variable".into());
            }
            Ok(out)
        };
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("cd").filter(|r| r.starts_with(char::is_whitespace)) {
            return Ok(Fd::cd(side(rest)?));
        }
        let (l, r) = s
            .split_once("->")
            .ok_or_else(|| "expected `A -> B` or `cd A B`".to_string())?;
        Ok(Fd::new(side(l)?, side(r)?))
    }
}

pub(crate) fn is_identifier(w: &str) -> bool {
    let mut chars = w.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
}

/// Which inference rules a derivation may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleSet {
    /// Reflexivity and the cycle rule.
    Cr,
    /// Reflexivity, the cycle rule and the contextual chain rule.
    Full,
    /// Armstrong's axioms: reflexivity, augmentation, transitivity.
    Classical,
    /// Reflexivity, augmentation and the contextual chain rule.
    Nra,
}

impl fmt::Display for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleSet::Cr => "cr",
            RuleSet::Full => "full",
            RuleSet::Classical => "classical",
            RuleSet::Nra => "nra",
        })
    }
}

impl FromStr for RuleSet {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cr" => Ok(RuleSet::Cr),
            "full" => Ok(RuleSet::Full),
            "classical" => Ok(RuleSet::Classical),
            "nra" => Ok(RuleSet::Nra),
            _ => Err(format!(
                "unknown rule set `{s}` (expected cr, full, classical or nra)"
            )),
        }
    }
}

/// Parses one FD per nonblank line, ignoring `#` comments.
pub fn parse_fds(text: &str) -> std::result::Result<Vec<Fd>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fd: Fd = line.parse().map_err(|e| format!("line {}: {e}", no + 1))?;
        if !out.contains(&fd) {
            out.push(fd);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        let xy = Fd::unary("x", "y");
        assert!(xy.is_unary() && !xy.is_cd());
        assert_eq!(xy.vars(), VarSet::of(["x", "y"]));
        let c = Fd::cd(VarSet::of(["x", "y", "z"]));
        assert!(c.is_cd() && !c.is_unary() && c.is_trivial());
        let xx = Fd::unary("x", "x");
        assert!(xx.is_cd() && xx.is_unary());
        assert!(Fd::try_new(VarSet::new(), VarSet::of(["x"])).is_err());
    }

    #[test]
    fn parse_and_display() {
        let fd: Fd = "A B -> C".parse().unwrap();
        assert_eq!(fd, Fd::new(VarSet::of(["A", "B"]), VarSet::of(["C"])));
        assert_eq!(fd.to_string(), "A B -> C");
        let cd: Fd = "cd z y x".parse().unwrap();
        assert_eq!(cd.to_string(), "cd x y z");
        assert_eq!("x -> x".parse::<Fd>().unwrap().to_string(), "cd x");
        assert!("x -> ".parse::<Fd>().is_err());
        assert!("x y".parse::<Fd>().is_err());
        assert!("1x -> y".parse::<Fd>().is_err());
        assert_eq!("b' -> c".parse::<Fd>().unwrap(), Fd::unary("b'", "c"));
        let cdx: Fd = "cdx -> y".parse().unwrap();
        assert_eq!(cdx, Fd::unary("cdx", "y"));
    }

    #[test]
    fn parse_many_dedupes() {
        let fds = parse_fds("x -> y # first\n\n y -> z\nx -> y\ncd x y z\n").unwrap();
        assert_eq!(fds.len(), 3);
        assert!(parse_fds("x -> y\n oops\n").unwrap_err().starts_with("line 2"));
    }
}
