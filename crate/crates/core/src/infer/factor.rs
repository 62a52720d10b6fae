use crate::graph::{Assignment, Cpt, VariableId};

/// Entries below this trigger renormalization into `log_scale`.
const UNDERFLOW_GUARD: f64 = 1e-100;

/// Nonnegative table over binary variables.
///
/// `scope` is ascending; bit `k` of a table index is the value of
/// `scope[k]`. Represented values are `table[i] * exp(log_scale)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    pub scope: Vec<VariableId>,
    pub table: Vec<f64>,
    pub log_scale: f64,
}

impl Factor {
    pub fn new(scope: Vec<VariableId>, table: Vec<f64>) -> Self {
        debug_assert!(scope.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(table.len(), 1 << scope.len());
        Factor {
            scope,
            table,
            log_scale: 0.0,
        }
    }

    pub fn constant(value: f64) -> Self {
        Factor::new(Vec::new(), vec![value])
    }

    /// `p(owner | parents)` as a factor over owner and parents.
    pub fn from_cpt(cpt: &Cpt) -> Self {
        let mut scope = cpt.parents.clone();
        let owner_pos = scope.binary_search(&cpt.owner).unwrap_err();
        scope.insert(owner_pos, cpt.owner);
        let table = (0..1usize << scope.len())
            .map(|code| {
                let mut row = 0;
                let mut k = 0;
                for (pos, _) in scope.iter().enumerate() {
                    if pos == owner_pos {
                        continue;
                    }
                    row |= ((code >> pos) & 1) << k;
                    k += 1;
                }
                let p1 = cpt.table[row];
                if (code >> owner_pos) & 1 == 1 {
                    p1
                } else {
                    1.0 - p1
                }
            })
            .collect();
        Factor::new(scope, table)
    }

    pub fn contains(&self, v: VariableId) -> bool {
        self.scope.binary_search(&v).is_ok()
    }

    /// Fixes the evidence variables in scope and drops them.
    pub fn reduce(&self, evidence: &Assignment) -> Factor {
        let fixed: Vec<(usize, bool)> = self
            .scope
            .iter()
            .enumerate()
            .filter_map(|(pos, v)| evidence.get(*v).map(|b| (pos, b)))
            .collect();
        if fixed.is_empty() {
            return self.clone();
        }
        let free: Vec<usize> = (0..self.scope.len()).filter(|p| !fixed.iter().any(|(f, _)| f == p)).collect();
        let base: usize = fixed.iter().map(|&(pos, b)| (b as usize) << pos).sum();
        let table = (0..1usize << free.len())
            .map(|code| {
                let idx = free
                    .iter()
                    .enumerate()
                    .fold(base, |acc, (k, &pos)| acc | (((code >> k) & 1) << pos));
                self.table[idx]
            })
            .collect();
        Factor {
            scope: free.iter().map(|&p| self.scope[p]).collect(),
            table,
            log_scale: self.log_scale,
        }
    }

    pub fn product(&self, other: &Factor) -> Factor {
        let mut scope: Vec<VariableId> = self.scope.iter().chain(&other.scope).copied().collect();
        scope.sort_unstable();
        scope.dedup();
        let pos_in = |f: &Factor| -> Vec<Option<usize>> {
            scope.iter().map(|v| f.scope.binary_search(v).ok()).collect()
        };
        let (pa, pb) = (pos_in(self), pos_in(other));
        let table = (0..1usize << scope.len())
            .map(|code| {
                let (mut ia, mut ib) = (0, 0);
                for k in 0..scope.len() {
                    let bit = (code >> k) & 1;
                    if let Some(p) = pa[k] {
                        ia |= bit << p;
                    }
                    if let Some(p) = pb[k] {
                        ib |= bit << p;
                    }
                }
                self.table[ia] * other.table[ib]
            })
            .collect();
        let mut out = Factor {
            scope,
            table,
            log_scale: self.log_scale + other.log_scale,
        };
        out.rescale();
        out
    }

    pub fn sum_out(&self, v: VariableId) -> Factor {
        let Ok(pos) = self.scope.binary_search(&v) else {
            return self.clone();
        };
        let low_mask = (1usize << pos) - 1;
        let table = (0..1usize << (self.scope.len() - 1))
            .map(|code| {
                let idx0 = (code & low_mask) | ((code & !low_mask) << 1);
                self.table[idx0] + self.table[idx0 | (1 << pos)]
            })
            .collect();
        let mut scope = self.scope.clone();
        scope.remove(pos);
        let mut out = Factor {
            scope,
            table,
            log_scale: self.log_scale,
        };
        out.rescale();
        out
    }

    fn rescale(&mut self) {
        let max = self.table.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 && max < UNDERFLOW_GUARD {
            for x in &mut self.table {
                *x /= max;
            }
            self.log_scale += max.ln();
        }
    }

    /// Sum of the represented values, in log space.
    pub fn ln_total(&self) -> f64 {
        self.table.iter().sum::<f64>().ln() + self.log_scale
    }

    pub fn normalized(&self) -> Factor {
        let total: f64 = self.table.iter().sum();
        Factor {
            scope: self.scope.clone(),
            table: self.table.iter().map(|x| x / total).collect(),
            log_scale: 0.0,
        }
    }

    /// Table entry for the given values of the scope variables.
    pub fn value(&self, assignment: &Assignment) -> f64 {
        let code = self
            .scope
            .iter()
            .enumerate()
            .fold(0, |acc, (k, v)| acc | ((assignment.get(*v).unwrap_or(false) as usize) << k));
        self.table[code] * self.log_scale.exp()
    }
}
