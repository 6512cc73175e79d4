use super::CostVector;
use crate::error::{invalid, Error, Result};

/// One charged evaluation of a task set at a common location.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    /// 0 for the initial design, then the optimisation step number.
    pub iteration: usize,
    pub tasks: Vec<usize>,
    pub location: Vec<f64>,
    /// Observed values, aligned with `tasks`.
    pub values: Vec<f64>,
}

/// Exact record of evaluations and their cost against a budget.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationLedger {
    entries: Vec<LedgerEntry>,
    costs: CostVector,
    spent: f64,
    budget: f64,
    counts: Vec<usize>,
}

impl EvaluationLedger {
    /// `budget` caps the total spend, initial design included.
    pub fn new(costs: CostVector, budget: f64) -> Result<Self> {
        if !(budget > 0.0 && budget.is_finite()) {
            return invalid(format!("budget must be positive, got {budget}"));
        }
        let n = costs.len();
        Ok(Self { entries: Vec::new(), costs, spent: 0.0, budget, counts: vec![0; n] })
    }

    pub fn costs(&self) -> &CostVector {
        &self.costs
    }

    pub fn spent(&self) -> f64 {
        self.spent
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn remaining(&self) -> f64 {
        self.budget - self.spent
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Number of evaluations of each task so far.
    pub fn per_task_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn fits(&self, tasks: &[usize]) -> bool {
        self.costs.of(tasks) <= self.remaining() + 1e-12 * self.budget
    }

    /// Charges `tasks` and appends the entry, refusing anything over budget.
    pub fn record(&mut self, entry: LedgerEntry) -> Result<()> {
        if entry.tasks.is_empty() || entry.tasks.len() != entry.values.len() {
            return invalid("ledger entry needs one value per evaluated task");
        }
        if let Some(t) = entry.tasks.iter().find(|t| **t >= self.costs.len()) {
            return invalid(format!("task {t} out of range"));
        }
        let mut sorted = entry.tasks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != entry.tasks.len() {
            return invalid("a task appears twice in one evaluation");
        }
        let cost = self.costs.of(&entry.tasks);
        if !self.fits(&entry.tasks) {
            return Err(Error::BudgetExhausted { remaining: self.remaining(), required: cost });
        }
        self.spent += cost;
        for &t in &entry.tasks {
            self.counts[t] += 1;
        }
        self.entries.push(entry);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(tasks: Vec<usize>) -> LedgerEntry {
        let values = vec![0.0; tasks.len()];
        LedgerEntry { iteration: 1, tasks, location: vec![0.0], values }
    }

    #[test]
    fn charges_exact_costs() {
        let mut l = EvaluationLedger::new(CostVector::new(vec![1.0, 5.0]).unwrap(), 12.0).unwrap();
        l.record(entry(vec![0])).unwrap();
        l.record(entry(vec![1])).unwrap();
        l.record(entry(vec![0, 1])).unwrap();
        assert_eq!(l.spent(), 12.0);
        assert_eq!(l.per_task_counts(), &[2, 2]);
        assert!(matches!(l.record(entry(vec![0])), Err(Error::BudgetExhausted { .. })));
        assert_eq!(l.entries().len(), 3);
    }

    #[test]
    fn rejects_bad_entries() {
        let mut l = EvaluationLedger::new(CostVector::unit(2), 10.0).unwrap();
        assert!(l.record(entry(vec![2])).is_err());
        assert!(l.record(entry(vec![0, 0])).is_err());
        assert!(EvaluationLedger::new(CostVector::unit(2), 0.0).is_err());
    }
}
