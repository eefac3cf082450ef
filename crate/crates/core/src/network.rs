//! Spin network data model.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::units::UnitConvention;
use crate::{Error, Result};

/// An unordered site pair stored as `(low, high)`.
pub type Pair = (usize, usize);

#[inline]
pub(crate) fn ordered(i: usize, j: usize) -> Pair {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// A network of spin-1/2 sites with chemical shifts and pairwise couplings.
///
/// Shifts and couplings are stored as angular frequencies (rad/s). The
/// network is immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinNetwork {
    labels: Vec<String>,
    shifts: Vec<f64>,
    couplings: BTreeMap<Pair, f64>,
}

/// Incremental construction of a [`SpinNetwork`] from Hz values.
#[derive(Debug, Default, Clone)]
pub struct NetworkBuilder {
    labels: Vec<String>,
    shifts_hz: Vec<f64>,
    couplings_hz: Vec<(usize, usize, f64)>,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a site and returns its index.
    pub fn site(&mut self, label: &str, shift_hz: f64) -> usize {
        self.labels.push(label.to_string());
        self.shifts_hz.push(shift_hz);
        self.labels.len() - 1
    }

    pub fn couple(&mut self, i: usize, j: usize, j_hz: f64) -> &mut Self {
        self.couplings_hz.push((i, j, j_hz));
        self
    }

    /// Couples two sites by label. Unknown labels are reported at build time.
    pub fn couple_labels(&mut self, a: &str, b: &str, j_hz: f64) -> &mut Self {
        let len = self.labels.len();
        let find = |l: &str| self.labels.iter().position(|x| x == l).unwrap_or(len);
        let (i, j) = (find(a), find(b));
        self.couple(i, j, j_hz)
    }

    pub fn build(&self) -> Result<SpinNetwork> {
        SpinNetwork::from_hz(
            self.labels.clone(),
            &self.shifts_hz,
            self.couplings_hz.iter().copied(),
        )
    }
}

impl SpinNetwork {
    /// Builds and validates a network from Hz-valued shifts and couplings.
    pub fn from_hz(
        labels: Vec<String>,
        shifts_hz: &[f64],
        couplings_hz: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::TooFewSites(n));
        }
        if shifts_hz.len() != n {
            return Err(Error::SiteOutOfRange {
                index: shifts_hz.len().min(n),
                len: n,
            });
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        for (l, s) in labels.iter().zip(shifts_hz) {
            if !s.is_finite() {
                return Err(Error::NonFinite(format!("shift of `{l}`")));
            }
        }
        let mut couplings = BTreeMap::new();
        for (i, j, hz) in couplings_hz {
            for idx in [i, j] {
                if idx >= n {
                    return Err(Error::SiteOutOfRange { index: idx, len: n });
                }
            }
            if i == j {
                return Err(Error::SelfCoupling(labels[i].clone()));
            }
            if !hz.is_finite() {
                return Err(Error::NonFinite(format!(
                    "coupling {}-{}",
                    labels[i], labels[j]
                )));
            }
            let key = ordered(i, j);
            if couplings.insert(key, UnitConvention::angular(hz)).is_some() {
                return Err(Error::DuplicatePair {
                    a: labels[i].clone(),
                    b: labels[j].clone(),
                });
            }
        }
        Ok(Self {
            labels,
            shifts: shifts_hz.iter().map(|&s| UnitConvention::angular(s)).collect(),
            couplings,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: a valid network has at least two sites.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Chemical shift ΔΩ_i in rad/s.
    pub fn shift(&self, i: usize) -> f64 {
        self.shifts[i]
    }

    pub fn shifts(&self) -> &[f64] {
        &self.shifts
    }

    pub fn shift_hz(&self, i: usize) -> f64 {
        UnitConvention::hz(self.shifts[i])
    }

    /// Coupling in rad/s, if the pair is coupled.
    pub fn coupling(&self, i: usize, j: usize) -> Option<f64> {
        self.couplings.get(&ordered(i, j)).copied()
    }

    pub fn coupling_hz(&self, i: usize, j: usize) -> Option<f64> {
        self.coupling(i, j).map(UnitConvention::hz)
    }

    pub fn is_coupled(&self, i: usize, j: usize) -> bool {
        self.couplings.contains_key(&ordered(i, j))
    }

    /// Coupled pairs in ascending `(low, high)` order with their angular
    /// coupling constants.
    pub fn couplings(&self) -> impl Iterator<Item = (Pair, f64)> + '_ {
        self.couplings.iter().map(|(&p, &j)| (p, j))
    }

    pub fn coupling_count(&self) -> usize {
        self.couplings.len()
    }

    /// Largest |J| in rad/s (0 for an uncoupled network).
    pub fn max_coupling(&self) -> f64 {
        self.couplings.values().fold(0.0, |m, j| m.max(j.abs()))
    }

    pub(crate) fn check_site(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// `|ΔΩ_i − ΔΩ_j|` in rad/s.
    pub fn shift_difference(&self, i: usize, j: usize) -> Result<f64> {
        self.check_site(i)?;
        self.check_site(j)?;
        if i == j {
            return Err(Error::IdenticalSites(self.labels[i].clone()));
        }
        Ok((self.shifts[i] - self.shifts[j]).abs())
    }

    /// Same network seen from a carrier moved by `offset` rad/s: every shift
    /// has `offset` subtracted. Couplings are untouched.
    pub fn rereferenced(&self, offset: f64) -> Self {
        Self {
            labels: self.labels.clone(),
            shifts: self.shifts.iter().map(|s| s - offset).collect(),
            couplings: self.couplings.clone(),
        }
    }

    /// Restriction to the listed pairs; shifts are kept, all other couplings
    /// are dropped.
    pub fn with_couplings_only(&self, keep: &[Pair]) -> Self {
        let couplings = self
            .couplings
            .iter()
            .filter(|(p, _)| keep.iter().any(|&(a, b)| ordered(a, b) == **p))
            .map(|(&p, &j)| (p, j))
            .collect();
        Self {
            labels: self.labels.clone(),
            shifts: self.shifts.clone(),
            couplings,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::TAU;

    fn two_site() -> SpinNetwork {
        let mut b = NetworkBuilder::new();
        let a = b.site("A", 0.0);
        let c = b.site("B", 1000.0);
        b.couple(a, c, 50.0);
        b.build().unwrap()
    }

    #[test]
    fn two_site_difference() {
        let net = two_site();
        let d = net.shift_difference(0, 1).unwrap();
        assert!((d - TAU * 1000.0).abs() < 1e-9);
        assert!((UnitConvention::hz(d) - 1000.0).abs() < 1e-12);
        assert_eq!(net.coupling_hz(1, 0), Some(50.0));
    }

    #[test]
    fn rejects_self_coupling() {
        let mut b = NetworkBuilder::new();
        b.site("A", 0.0);
        b.site("B", 10.0);
        b.couple(0, 0, 5.0);
        assert_eq!(b.build(), Err(Error::SelfCoupling("A".into())));
    }

    #[test]
    fn rejects_reversed_duplicate() {
        let mut b = NetworkBuilder::new();
        b.site("A", 0.0);
        b.site("B", 10.0);
        b.couple(0, 1, 5.0).couple(1, 0, 5.0);
        assert!(matches!(b.build(), Err(Error::DuplicatePair { .. })));
    }

    #[test]
    fn rejects_out_of_range_and_tiny() {
        let mut b = NetworkBuilder::new();
        b.site("A", 0.0);
        assert_eq!(b.build(), Err(Error::TooFewSites(1)));
        b.site("B", 1.0);
        b.couple(0, 2, 1.0);
        assert!(matches!(b.build(), Err(Error::SiteOutOfRange { index: 2, .. })));
    }

    #[test]
    fn equal_shifts_give_zero_difference() {
        let net = SpinNetwork::from_hz(vec!["A".into(), "B".into()], &[5.0, 5.0], []).unwrap();
        assert_eq!(net.shift_difference(0, 1).unwrap(), 0.0);
        assert!(matches!(net.shift_difference(1, 1), Err(Error::IdenticalSites(_))));
        assert!(matches!(net.shift_difference(0, 7), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn leucine_alpha_beta_period() {
        // |Δν_α − Δν_β| = 1408 Hz gives 2πħ/Δ ≈ 0.71 ms.
        let net = SpinNetwork::from_hz(
            vec!["Ca".into(), "Cb".into()],
            &[1408.0, 0.0],
            [(0, 1, 35.0)],
        )
        .unwrap();
        let tau = UnitConvention::period(net.shift_difference(0, 1).unwrap());
        assert!((tau - 0.71e-3).abs() / 0.71e-3 < 0.005);
    }

    #[test]
    fn beta_gamma_difference() {
        let net = SpinNetwork::from_hz(vec!["Cb".into(), "Cg".into()], &[0.0, -2062.0], []).unwrap();
        let d = net.shift_difference(0, 1).unwrap();
        assert!((d - TAU * 2062.0).abs() < 1e-9);
        let tau = 8.0 * UnitConvention::period(d);
        assert!((tau - 3.88e-3).abs() / 3.88e-3 < 0.005);
    }

    proptest::proptest! {
        #[test]
        fn shift_difference_symmetric(a in -1e5f64..1e5, b in -1e5f64..1e5) {
            let net = SpinNetwork::from_hz(vec!["A".into(), "B".into()], &[a, b], []).unwrap();
            let d1 = net.shift_difference(0, 1).unwrap();
            let d2 = net.shift_difference(1, 0).unwrap();
            proptest::prop_assert_eq!(d1, d2);
            proptest::prop_assert!(d1 >= 0.0);
        }
    }
}
