use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An (epsilon, delta) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyBudget {
    pub epsilon: f64,
    pub delta: f64,
}

impl PrivacyBudget {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be positive and finite, got {epsilon}")));
        }
        if !(0.0..1.0).contains(&delta) {
            return Err(Error::InvalidParameter(format!("delta must lie in [0, 1), got {delta}")));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn pure(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.0)
    }
}

/// Basic composition: epsilons and deltas add.
pub fn compose_budget(stages: &[PrivacyBudget]) -> Result<PrivacyBudget> {
    if stages.is_empty() {
        return Err(Error::InvalidParameter("cannot compose an empty stage list".into()));
    }
    let (epsilon, delta) = stages
        .iter()
        .fold((0.0, 0.0), |(e, d), s| (e + s.epsilon, d + s.delta));
    Ok(PrivacyBudget { epsilon, delta })
}

/// Fractions of the total epsilon given to each pipeline stage.
///
/// Count estimation and feature selection are pure epsilon-DP, so all of delta
/// goes to the regression stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    pub model_count_fraction: f64,
    pub selection_fraction: f64,
    pub regression_fraction: f64,
}

/// Per-stage budgets; a stage with a zero fraction is `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageBudgets {
    pub model_count: Option<PrivacyBudget>,
    pub selection: Option<PrivacyBudget>,
    pub regression: PrivacyBudget,
}

impl StageBudgets {
    /// Stages in the order the pipeline spends them.
    pub fn stages(&self) -> Vec<PrivacyBudget> {
        self.model_count
            .into_iter()
            .chain(self.selection)
            .chain(std::iter::once(self.regression))
            .collect()
    }
}

impl BudgetSplit {
    pub const STAGE_FRACTION: f64 = 0.05;

    pub fn new(model_count: f64, selection: f64, regression: f64) -> Result<Self> {
        let parts = [model_count, selection, regression];
        if parts.iter().any(|f| !(*f >= 0.0)) || !(regression > 0.0) {
            return Err(Error::InvalidParameter("budget fractions must be nonnegative with a positive regression share".into()));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("budget fractions sum to {}, not 1", parts.iter().sum::<f64>())));
        }
        Ok(Self {
            model_count_fraction: model_count,
            selection_fraction: selection,
            regression_fraction: regression,
        })
    }

    /// 5% per auxiliary stage that is present, the remainder to regression.
    pub fn for_stages(model_count: bool, selection: bool) -> Self {
        let mc = if model_count { Self::STAGE_FRACTION } else { 0.0 };
        let sel = if selection { Self::STAGE_FRACTION } else { 0.0 };
        Self {
            model_count_fraction: mc,
            selection_fraction: sel,
            regression_fraction: 1.0 - mc - sel,
        }
    }

    /// Splits `total`. The regression share is the floating-point residual,
    /// moved by a few ulps (and, if rounding ties make that impossible, the
    /// auxiliary shares too) until the stages compose to `total` bit for bit.
    pub fn allocate(&self, total: PrivacyBudget) -> StageBudgets {
        let scaled = |f: f64| (f > 0.0).then(|| f * total.epsilon);
        let (base_mc, base_sel) = (scaled(self.model_count_fraction), scaled(self.selection_fraction));
        let compose = |mc: Option<f64>, sel: Option<f64>, reg: f64| {
            mc.into_iter().chain(sel).chain(std::iter::once(reg)).fold(0.0, |acc, e| acc + e)
        };
        const SHIFTS: [i32; 5] = [0, 1, -1, 2, -2];
        for mc_shift in SHIFTS {
            for sel_shift in SHIFTS {
                let mc = base_mc.map(|e| nudge(e, mc_shift));
                let sel = base_sel.map(|e| nudge(e, sel_shift));
                let residual = total.epsilon - compose(mc, sel, 0.0);
                for reg_shift in [0i32, 1, -1, 2, -2, 3, -3] {
                    let reg = nudge(residual, reg_shift);
                    if compose(mc, sel, reg) == total.epsilon {
                        let pure = |epsilon| PrivacyBudget { epsilon, delta: 0.0 };
                        return StageBudgets {
                            model_count: mc.map(pure),
                            selection: sel.map(pure),
                            regression: PrivacyBudget { epsilon: reg, delta: total.delta },
                        };
                    }
                }
            }
        }
        unreachable!("no ulp adjustment composes to {}", total.epsilon)
    }
}

fn nudge(mut v: f64, ulps: i32) -> f64 {
    for _ in 0..ulps.unsigned_abs() {
        v = if ulps > 0 { v.next_up() } else { v.next_down() };
    }
    v
}

/// Record of every stage a pipeline spent budget on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub entries: Vec<LedgerEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub stage: String,
    pub epsilon: f64,
    pub delta: f64,
}

impl Ledger {
    pub fn record(&mut self, stage: &str, budget: PrivacyBudget) {
        self.entries.push(LedgerEntry { stage: stage.to_string(), epsilon: budget.epsilon, delta: budget.delta });
    }

    pub fn composed(&self) -> Result<PrivacyBudget> {
        let stages: Vec<PrivacyBudget> = self
            .entries
            .iter()
            .map(|e| PrivacyBudget { epsilon: e.epsilon, delta: e.delta })
            .collect();
        compose_budget(&stages)
    }

    /// Fails unless the stages compose exactly (bitwise) to `total`.
    pub fn verify(&self, total: PrivacyBudget) -> Result<()> {
        let c = self.composed()?;
        if c.epsilon.to_bits() != total.epsilon.to_bits() || c.delta.to_bits() != total.delta.to_bits() {
            return Err(Error::LedgerViolation {
                epsilon: c.epsilon,
                delta: c.delta,
                expected_epsilon: total.epsilon,
                expected_delta: total.delta,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn composition_examples() {
        let a = PrivacyBudget::new(0.5, 1e-5).unwrap();
        let c = compose_budget(&[a, a]).unwrap();
        assert_eq!(c, PrivacyBudget { epsilon: 1.0, delta: 2e-5 });
        assert_eq!(compose_budget(&[a]).unwrap(), a);
        assert!(compose_budget(&[]).is_err());
    }

    #[test]
    fn default_split_composes_to_total() {
        let total = PrivacyBudget::new(3f64.ln(), 1e-5).unwrap();
        let stages = BudgetSplit::for_stages(true, true).allocate(total);
        assert!((stages.model_count.unwrap().epsilon - 0.05 * 3f64.ln()).abs() < 1e-15);
        assert_eq!(stages.selection.unwrap().delta, 0.0);
        assert_eq!(stages.regression.delta, 1e-5);
        assert_eq!(compose_budget(&stages.stages()).unwrap(), total);
    }

    #[test]
    fn split_validation() {
        assert!(BudgetSplit::new(0.05, 0.05, 0.9).is_ok());
        assert!(BudgetSplit::new(0.5, 0.6, 0.1).is_err());
        assert!(BudgetSplit::new(0.5, 0.5, 0.0).is_err());
        assert!(PrivacyBudget::new(0.0, 0.0).is_err());
        assert!(PrivacyBudget::new(1.0, 1.0).is_err());
    }

    #[test]
    fn ledger_detects_mismatch() {
        let total = PrivacyBudget::new(1.0, 1e-5).unwrap();
        let mut ledger = Ledger::default();
        ledger.record("a", PrivacyBudget::new(0.5, 0.0).unwrap());
        ledger.record("b", PrivacyBudget::new(0.5, 1e-5).unwrap());
        ledger.verify(total).unwrap();
        ledger.record("c", PrivacyBudget::new(0.1, 0.0).unwrap());
        assert!(matches!(ledger.verify(total), Err(Error::LedgerViolation { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(5000))]
        #[test]
        fn allocation_is_bit_exact(eps in 1e-6f64..1e3, delta in 0.0f64..0.1, mc: bool, sel: bool) {
            let total = PrivacyBudget::new(eps, delta).unwrap();
            let stages = BudgetSplit::for_stages(mc, sel).allocate(total);
            let composed = compose_budget(&stages.stages()).unwrap();
            prop_assert_eq!(composed.epsilon.to_bits(), eps.to_bits());
            prop_assert_eq!(composed.delta.to_bits(), delta.to_bits());
        }
    }
}
