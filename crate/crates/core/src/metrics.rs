//! Control cost (IAE) and normalized CPU energy accounting.

use crate::error::{Error, Result};

/// Integral of absolute error for one loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LoopCost {
    pub iae: f64,
}

/// Running `∫ α² dt` together with the time it covers.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyAccumulator {
    pub integral_e: f64,
    pub elapsed: f64,
}

impl EnergyAccumulator {
    /// Time-average normalized energy, zero before any time has elapsed.
    pub fn average(&self) -> f64 {
        if self.elapsed > 0.0 {
            self.integral_e / self.elapsed
        } else {
            0.0
        }
    }
}

/// Normalized energy `α²` at speed `alpha`.
pub fn instantaneous_energy(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "speed must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(alpha * alpha)
}

/// Energy at the minimum feasible speed for tasks `(c_nom, h)`: `(Σ c/h)²`.
pub fn energy_of_periods(tasks: &[(f64, f64)]) -> Result<f64> {
    if let Some(&(_, h)) = tasks.iter().find(|(_, h)| !(*h > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "period must be positive, got {h}"
        )));
    }
    let omega: f64 = tasks.iter().map(|(c, h)| c / h).sum();
    if omega > 1.0 {
        return Err(Error::Infeasible {
            workload: omega,
            time: f64::NAN,
        });
    }
    Ok(omega * omega)
}

/// Adds a constant-speed segment exactly.
pub fn accumulate(acc: &mut EnergyAccumulator, alpha: f64, dt: f64) {
    debug_assert!(dt >= 0.0);
    acc.integral_e += alpha * alpha * dt;
    acc.elapsed += dt;
}

/// Trapezoidal IAE increment between two absolute-error samples `dt` apart.
pub fn accumulate_iae(cost: &mut LoopCost, e_abs_start: f64, e_abs_end: f64, dt: f64) {
    debug_assert!(dt >= 0.0);
    cost.iae += 0.5 * (e_abs_start + e_abs_end) * dt;
}

/// `J_SUM = Σ J_i`
pub fn total_cost(costs: &[LoopCost]) -> f64 {
    costs.iter().map(|c| c.iae).sum()
}

/// Difference of two normalized energies in percentage points.
pub fn percentage_point_decrease(baseline: f64, candidate: f64) -> f64 {
    100.0 * (baseline - candidate)
}

/// Relative change of `candidate` against `baseline`, in percent.
pub fn relative_increase(baseline: f64, candidate: f64) -> f64 {
    100.0 * (candidate - baseline) / baseline
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instantaneous_energy_examples() {
        assert!((instantaneous_energy(0.9).unwrap() - 0.81).abs() < 1e-15);
        assert_eq!(instantaneous_energy(1.0).unwrap(), 1.0);
        assert!((instantaneous_energy(0.957937).unwrap() - 0.917643).abs() < 1e-6);
        assert!(instantaneous_energy(0.0).is_err());
        assert!(instantaneous_energy(1.01).is_err());
    }

    #[test]
    fn energy_of_periods_examples() {
        assert!((energy_of_periods(&[(4.0, 10.0), (5.0, 10.0)]).unwrap() - 0.81).abs() < 1e-12);
        let corner = energy_of_periods(&[(4.0, 20.0), (5.0, 30.0)]).unwrap();
        assert!((corner - 121.0 / 900.0).abs() < 1e-15);
        // (4/15 + 5/20)² = (31/60)²
        let mid = energy_of_periods(&[(4.0, 15.0), (5.0, 20.0)]).unwrap();
        assert!((mid - 961.0 / 3600.0).abs() < 1e-15);
        assert!(energy_of_periods(&[(8.0, 10.0), (5.0, 10.0)]).is_err());
        assert!(energy_of_periods(&[(1.0, 0.0)]).is_err());
    }

    #[test]
    fn accumulation() {
        let mut acc = EnergyAccumulator::default();
        accumulate(&mut acc, 0.5, 2.0);
        assert_eq!(acc.integral_e, 0.5);
        assert_eq!(acc.average(), 0.25);

        let mut cost = LoopCost::default();
        accumulate_iae(&mut cost, 1.0, 1.0, 1.0);
        assert_eq!(cost.iae, 1.0);
        accumulate_iae(&mut cost, 0.0, 1.0, 1.0);
        assert_eq!(cost.iae, 1.5);
    }

    #[test]
    fn average_lies_between_extremes() {
        let mut acc = EnergyAccumulator::default();
        let speeds = [0.3, 0.9, 0.5, 0.25];
        for (i, a) in speeds.iter().enumerate() {
            accumulate(&mut acc, *a, 0.1 * (i + 1) as f64);
        }
        assert!(acc.average() >= 0.25 * 0.25 && acc.average() <= 0.81);
        let mut flat = EnergyAccumulator::default();
        for _ in 0..7 {
            accumulate(&mut flat, 0.6, 0.3);
        }
        assert!((flat.average() - 0.36).abs() < 1e-15);
    }

    #[test]
    fn totals_and_report_conventions() {
        let costs: Vec<_> = [0.3, 0.3, 0.4, 0.4]
            .iter()
            .map(|&iae| LoopCost { iae })
            .collect();
        assert!((total_cost(&costs) - 1.4).abs() < 1e-15);
        assert_eq!(total_cost(&costs[..1]), 0.3);
        // Reported savings are differences of percentages, not ratios.
        for (base, cand, dec) in [
            (0.918, 0.480, 43.8),
            (0.918, 0.260, 65.8),
            (0.918, 0.159, 75.9),
            (0.918, 0.117, 80.1),
            (0.579, 0.109, 47.0),
        ] {
            assert!((percentage_point_decrease(base, cand) - dec).abs() < 1e-9);
        }
        assert!((relative_increase(7.591, 7.978) - 5.098).abs() < 1e-3);
    }
}
