//! Dörfler marking and convergence rates.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::math;

/// Smallest set `S` (greedy on descending `η²`, ties to the lower id) with
/// `Σ_S η² ≥ θ² Σ η²`. Returns sorted ids; all-zero indicators give an empty set.
pub fn dorfler_mark(eta: &[f64], theta: f64) -> Result<Vec<usize>> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid!(
            "marking fraction must lie in (0, 1] (got {theta})"
        ));
    }
    if let Some(bad) = eta.iter().position(|e| !(*e >= 0.0) || !e.is_finite()) {
        return Err(invalid!("indicator {bad} is negative or not finite"));
    }
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| {
        let (ea, eb) = (eta[a] * eta[a], eta[b] * eta[b]);
        eb.partial_cmp(&ea).unwrap().then(a.cmp(&b))
    });
    // summing in the same order keeps θ = 1 exact
    let total: f64 = order.iter().map(|&i| eta[i] * eta[i]).sum();
    if total == 0.0 {
        return Ok(Vec::new());
    }
    let target = theta * theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &i in &order {
        if acc >= target {
            break;
        }
        acc += eta[i] * eta[i];
        marked.push(i);
    }
    marked.sort_unstable();
    Ok(marked)
}

/// `log(e_i/e_{i+1}) / log(h_i/h_{i+1})` for consecutive levels; `None` where
/// an error is zero or not finite or the sizes coincide.
pub fn eoc(errors: &[f64], h: &[f64]) -> Result<Vec<Option<f64>>> {
    if errors.len() != h.len() {
        return Err(invalid!(
            "eoc needs one mesh size per error ({} vs {})",
            errors.len(),
            h.len()
        ));
    }
    if errors.len() < 2 {
        return Err(invalid!("eoc needs at least two levels"));
    }
    Ok(errors
        .windows(2)
        .zip(h.windows(2))
        .map(|(e, h)| {
            let ok = |x: f64| x > 0.0 && x.is_finite();
            if ok(e[0]) && ok(e[1]) && ok(h[0]) && ok(h[1]) && h[0] != h[1] {
                Some(math::ln(e[0] / e[1]) / math::ln(h[0] / h[1]))
            } else {
                None
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn examples() {
        assert_eq!(dorfler_mark(&[4.0, 3.0, 2.0, 1.0], 0.7).unwrap(), vec![0]);
        assert_eq!(
            dorfler_mark(&[1.0, 0.0, 2.0, 0.5], 1.0).unwrap(),
            vec![0, 2, 3]
        );
        for n in 1..40 {
            let m = dorfler_mark(&vec![1.5; n], 0.5).unwrap();
            assert_eq!(m.len(), (n as f64 * 0.25).ceil() as usize);
            assert_eq!(m, (0..m.len()).collect::<Vec<_>>());
        }
        assert!(dorfler_mark(&[0.0, 0.0], 0.5).unwrap().is_empty());
        assert!(dorfler_mark(&[1.0], 0.0).is_err());
        assert!(dorfler_mark(&[1.0], 1.5).is_err());
    }

    #[test]
    fn rates() {
        let r = eoc(&[0.1, 0.025], &[1.0, 0.5]).unwrap();
        assert!((r[0].unwrap() - 2.0).abs() < 1e-14);
        let r = eoc(&[0.3, 0.3, 0.0], &[1.0, 0.5, 0.25]).unwrap();
        assert_eq!(r[0], Some(0.0));
        assert_eq!(r[1], None);
        assert!(eoc(&[1.0], &[1.0]).is_err());
    }
}
