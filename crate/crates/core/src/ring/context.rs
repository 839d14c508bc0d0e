use serde::{Deserialize, Serialize};

/// Names and layout of the polynomial variables.
///
/// Variables are laid out as `x1..xn, p1..pn` (the `2n` differentiable
/// coordinates), then the free parameters, then any extra symbols (used by
/// the closed-form oracle for `sin`, `cos`, `exp` values).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VarContext {
    pub n: usize,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub extra: Vec<String>,
}

impl VarContext {
    pub fn new(n: usize, params: Vec<String>) -> Self {
        VarContext { n, params, extra: Vec::new() }
    }

    /// Number of differentiable coordinates, `2n`.
    pub fn nder(&self) -> usize {
        2 * self.n
    }

    pub fn nvars(&self) -> usize {
        2 * self.n + self.params.len() + self.extra.len()
    }

    pub fn name(&self, i: usize) -> String {
        let n = self.n;
        if i < n {
            format!("x{}", i + 1)
        } else if i < 2 * n {
            format!("p{}", i - n + 1)
        } else if i < 2 * n + self.params.len() {
            self.params[i - 2 * n].clone()
        } else {
            self.extra[i - 2 * n - self.params.len()].clone()
        }
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.nvars()).map(|i| self.name(i)).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        if let Some(i) = coordinate_index(name, 'x') {
            return (i >= 1 && i <= self.n).then(|| i - 1);
        }
        if let Some(i) = coordinate_index(name, 'p') {
            return (i >= 1 && i <= self.n).then(|| self.n + i - 1);
        }
        if let Some(k) = self.params.iter().position(|p| p == name) {
            return Some(2 * self.n + k);
        }
        self.extra.iter().position(|p| p == name).map(|k| 2 * self.n + self.params.len() + k)
    }

    /// Name of the derivation along coordinate `i`, e.g. `dx1` or `dp2`.
    pub fn der_name(&self, i: usize) -> String {
        format!("d{}", self.name(i))
    }

    pub fn with_extra(&self, extra: Vec<String>) -> Self {
        VarContext { n: self.n, params: self.params.clone(), extra }
    }
}

/// `x12` -> Some(12) for prefix 'x'.
pub(crate) fn coordinate_index(name: &str, prefix: char) -> Option<usize> {
    let rest = name.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) || rest.starts_with('0') {
        return None;
    }
    rest.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let ctx = VarContext::new(2, vec!["a".into(), "b".into()]);
        assert_eq!(ctx.names(), ["x1", "x2", "p1", "p2", "a", "b"]);
        assert_eq!(ctx.index_of("p2"), Some(3));
        assert_eq!(ctx.index_of("b"), Some(5));
        assert_eq!(ctx.index_of("x3"), None);
        assert_eq!(ctx.der_name(2), "dp1");
    }
}
