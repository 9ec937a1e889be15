use crate::error::{Error, Result};

use super::process::PairProcess;

/// Largest space [`sparsest_partition`] will enumerate.
pub const MAX_BRUTE_FORCE: usize = 10;

/// `ν(S) = Σ_{x∈S, x'∉S} p₊(x, x') / Σ_{x∈S} q(x)`.
pub fn dirichlet_conductance(process: &PairProcess, subset: &[usize]) -> Result<f64> {
    let n = process.len();
    let mut member = vec![false; n];
    for &x in subset {
        if x >= n {
            return Err(Error::IndexOutOfRange { index: x, len: n });
        }
        member[x] = true;
    }
    let size = member.iter().filter(|m| **m).count();
    if size == 0 || size == n {
        return Err(Error::InvalidParameter("subset must be nonempty and proper".into()));
    }
    Ok(conductance(process, &member))
}

fn conductance(process: &PairProcess, member: &[bool]) -> f64 {
    let joint = process.joint();
    let n = member.len();
    let mut cut = 0.0;
    let mut mass = 0.0;
    for x in (0..n).filter(|&x| member[x]) {
        mass += process.marginal()[x];
        for y in (0..n).filter(|&y| !member[y]) {
            cut += joint.get(x, y);
        }
    }
    cut / mass
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparsestPartition {
    /// `ρ_i`.
    pub value: f64,
    /// Block index per item for a minimizing partition (first found).
    pub assignment: Vec<usize>,
}

/// `ρ_i = min over partitions into i nonempty blocks of max_j ν(S_j)`, by
/// enumerating restricted-growth strings.
pub fn sparsest_partition(process: &PairProcess, parts: usize) -> Result<SparsestPartition> {
    let n = process.len();
    if n > MAX_BRUTE_FORCE {
        return Err(Error::BudgetExceeded(format!("{n} items exceed the brute-force limit of {MAX_BRUTE_FORCE}")));
    }
    if parts == 0 || parts > n {
        return Err(Error::InvalidParameter(format!("cannot split {n} items into {parts} blocks")));
    }
    let mut best: Option<SparsestPartition> = None;
    let mut a = vec![0usize; n];
    let mut member = vec![false; n];
    loop {
        let blocks = a.iter().max().unwrap() + 1;
        if blocks == parts {
            let value = if parts == 1 {
                0.0
            } else {
                (0..parts)
                    .map(|b| {
                        for (m, &v) in member.iter_mut().zip(&a) {
                            *m = v == b;
                        }
                        conductance(process, &member)
                    })
                    .fold(0.0, f64::max)
            };
            if best.as_ref().is_none_or(|b| value < b.value) {
                best = Some(SparsestPartition { value, assignment: a.clone() });
            }
        }
        if !next_restricted_growth(&mut a) {
            break;
        }
    }
    Ok(best.expect("at least one partition into `parts` blocks exists"))
}

/// Advances `a` to the next restricted-growth string (`a[0] = 0`,
/// `a[i] ≤ 1 + max(a[..i])`); false after the last.
fn next_restricted_growth(a: &mut [usize]) -> bool {
    let n = a.len();
    for i in (1..n).rev() {
        let prefix_max = a[..i].iter().copied().max().unwrap();
        if a[i] <= prefix_max {
            a[i] += 1;
            for v in a[i + 1..].iter_mut() {
                *v = 0;
            }
            return true;
        }
    }
    false
}
