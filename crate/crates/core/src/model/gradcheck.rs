//! Central finite differences against the analytic gradient.

use ndarray::ArrayView2;
use serde::Serialize;

use super::{backward, forward_cached, loss, DropoutMasks, ModelParams};
use crate::error::Result;
use crate::graph::{LabelAssignment, Propagator};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    /// Parameter group and flat index of the worst entry.
    pub worst: String,
    pub parameters: usize,
}

/// Relative error per entry is `|a - n| / max(|a|, |n|, 1e-7)`, so entries
/// whose true gradient is essentially zero are judged on absolute error.
#[allow(clippy::too_many_arguments)]
pub fn gradient_check<O: Propagator + ?Sized>(
    params: &ModelParams,
    op: &O,
    x: ArrayView2<'_, f64>,
    labels: &LabelAssignment,
    mask: &[usize],
    eta: f64,
    masks: &DropoutMasks,
    step: f64,
) -> Result<GradientCheck> {
    let (_, analytic) = backward(params, op, x, labels, mask, eta, masks)?;
    let objective = |p: &ModelParams| -> Result<f64> {
        let cache = forward_cached(p, op, x, masks)?;
        loss(&cache.logits, labels, mask, p, eta)
    };

    let mut report = GradientCheck {
        max_relative_error: 0.0,
        worst: String::new(),
        parameters: 0,
    };
    let mut probe = params.clone();
    let mut visit = |group: &str,
                     index: usize,
                     analytic: f64,
                     probe: &mut ModelParams,
                     slot: fn(&mut ModelParams) -> &mut [f64]|
     -> Result<()> {
        let original = slot(probe)[index];
        slot(probe)[index] = original + step;
        let up = objective(probe)?;
        slot(probe)[index] = original - step;
        let down = objective(probe)?;
        slot(probe)[index] = original;
        let numeric = (up - down) / (2.0 * step);
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-7);
        report.parameters += 1;
        if rel > report.max_relative_error || report.worst.is_empty() {
            report.max_relative_error = report.max_relative_error.max(rel);
            report.worst =
                format!("{group}[{index}] analytic {analytic:.6e} numeric {numeric:.6e}");
        }
        Ok(())
    };

    let groups: [(&str, Vec<f64>, fn(&mut ModelParams) -> &mut [f64]); 5] = [
        ("w1", analytic.w1.iter().copied().collect(), |p| {
            p.w1.as_slice_mut().expect("standard layout")
        }),
        ("b1", analytic.b1.to_vec(), |p| {
            p.b1.as_slice_mut().expect("contiguous")
        }),
        ("w2", analytic.w2.iter().copied().collect(), |p| {
            p.w2.as_slice_mut().expect("standard layout")
        }),
        ("b2", analytic.b2.to_vec(), |p| {
            p.b2.as_slice_mut().expect("contiguous")
        }),
        ("filter", analytic.filter.clone(), |p| {
            p.filter.coefficients.as_mut_slice()
        }),
    ];
    for (group, values, slot) in groups {
        for (index, &a) in values.iter().enumerate() {
            visit(group, index, a, &mut probe, slot)?;
        }
    }
    Ok(report)
}
