//! Graded multi-index tables shared by all jets of a given variable count.
//!
//! Monomials are enumerated degree by degree with a fixed ordering inside
//! each degree, so the table for order `k` is a prefix of the table for any
//! order above `k`. Jets of different truncation orders can therefore share
//! coefficient indices without remapping.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Highest truncation order the engine will build tables for.
pub const MAX_ORDER: usize = 12;

pub(crate) struct Layout {
    nvars: usize,
    order: usize,
    exps: Vec<u8>,
    degree: Vec<u8>,
    degree_start: Vec<usize>,
    /// `mul_rows[i][j]` is the index of `exps[i] + exps[j]` for every `j`
    /// whose degree keeps the sum within `order`.
    mul_rows: Vec<Vec<u32>>,
    /// `raise[v][i]` is the index of `exps[i] + e_v` for `deg(i) < order`.
    raise: Vec<Vec<u32>>,
    factorial: Vec<f64>,
}

impl Layout {
    fn build(nvars: usize, order: usize) -> Layout {
        let mut exps: Vec<u8> = Vec::new();
        let mut degree = Vec::new();
        let mut degree_start = Vec::with_capacity(order + 2);
        let mut current = vec![0u8; nvars];
        for d in 0..=order {
            degree_start.push(degree.len());
            push_monomials(&mut current, 0, d, &mut exps, &mut degree);
        }
        degree_start.push(degree.len());
        let count = degree.len();

        let mut lookup: HashMap<Vec<u8>, u32> = HashMap::with_capacity(count);
        for i in 0..count {
            lookup.insert(exps[i * nvars..(i + 1) * nvars].to_vec(), i as u32);
        }

        let mut scratch = vec![0u8; nvars];
        let mut mul_rows = Vec::with_capacity(count);
        for i in 0..count {
            let room = order - degree[i] as usize;
            let limit = degree_start[room + 1];
            let a = &exps[i * nvars..(i + 1) * nvars];
            let mut row = Vec::with_capacity(limit);
            for j in 0..limit {
                let b = &exps[j * nvars..(j + 1) * nvars];
                for v in 0..nvars {
                    scratch[v] = a[v] + b[v];
                }
                row.push(lookup[&scratch]);
            }
            mul_rows.push(row);
        }

        let below = degree_start[order];
        let mut raise = Vec::with_capacity(nvars);
        for v in 0..nvars {
            let mut col = Vec::with_capacity(below);
            for i in 0..below {
                scratch.copy_from_slice(&exps[i * nvars..(i + 1) * nvars]);
                scratch[v] += 1;
                col.push(lookup[&scratch]);
            }
            raise.push(col);
        }

        let factorial = (0..count)
            .map(|i| {
                exps[i * nvars..(i + 1) * nvars]
                    .iter()
                    .map(|&e| (1..=e as u32).map(f64::from).product::<f64>())
                    .product()
            })
            .collect();

        Layout {
            nvars,
            order,
            exps,
            degree,
            degree_start,
            mul_rows,
            raise,
            factorial,
        }
    }

    pub(crate) fn nvars(&self) -> usize {
        self.nvars
    }

    pub(crate) fn order(&self) -> usize {
        self.order
    }

    /// Number of monomials of total degree at most `order`.
    pub(crate) fn count(&self, order: usize) -> usize {
        self.degree_start[order + 1]
    }

    pub(crate) fn degree(&self, i: usize) -> usize {
        self.degree[i] as usize
    }

    pub(crate) fn exponents(&self, i: usize) -> &[u8] {
        &self.exps[i * self.nvars..(i + 1) * self.nvars]
    }

    pub(crate) fn mul_row(&self, i: usize) -> &[u32] {
        &self.mul_rows[i]
    }

    pub(crate) fn raise(&self, v: usize) -> &[u32] {
        &self.raise[v]
    }

    pub(crate) fn factorial(&self, i: usize) -> f64 {
        self.factorial[i]
    }

    /// Index of a multi-index, if it lies within this table.
    pub(crate) fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() != self.nvars {
            return None;
        }
        let d: usize = alpha.iter().map(|&e| e as usize).sum();
        if d > self.order {
            return None;
        }
        (self.degree_start[d]..self.degree_start[d + 1]).find(|&i| self.exponents(i) == alpha)
    }
}

fn push_monomials(
    current: &mut [u8],
    var: usize,
    remaining: usize,
    exps: &mut Vec<u8>,
    degree: &mut Vec<u8>,
) {
    if var + 1 == current.len() {
        current[var] = remaining as u8;
        exps.extend_from_slice(current);
        degree.push(current.iter().map(|&e| e as usize).sum::<usize>() as u8);
        return;
    }
    for e in (0..=remaining).rev() {
        current[var] = e as u8;
        push_monomials(current, var + 1, remaining - e, exps, degree);
    }
}

/// Returns a table for `nvars` variables covering at least `order`.
pub(crate) fn layout(nvars: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(existing) = guard.get(&nvars) {
        if existing.order() >= order {
            return Arc::clone(existing);
        }
    }
    let built = Arc::new(Layout::build(nvars, order));
    guard.insert(nvars, Arc::clone(&built));
    built
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn counts_match_binomials() {
        for nvars in 1..=6 {
            let l = Layout::build(nvars, 5);
            for k in 0..=5 {
                assert_eq!(l.count(k), binomial(nvars + k, k));
            }
        }
    }

    #[test]
    fn lower_orders_are_prefixes() {
        let small = Layout::build(4, 3);
        let big = Layout::build(4, 6);
        for i in 0..small.count(3) {
            assert_eq!(small.exponents(i), big.exponents(i));
        }
    }

    #[test]
    fn mul_table_adds_exponents() {
        let l = Layout::build(3, 4);
        for i in 0..l.count(4) {
            let row = l.mul_row(i);
            for (j, &p) in row.iter().enumerate() {
                let sum: Vec<u8> = l
                    .exponents(i)
                    .iter()
                    .zip(l.exponents(j))
                    .map(|(a, b)| a + b)
                    .collect();
                assert_eq!(l.exponents(p as usize), sum.as_slice());
            }
        }
    }
}
