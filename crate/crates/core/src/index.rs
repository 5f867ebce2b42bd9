//! Integer evaluators for the Fredholm index formulas.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexData {
    /// `Q` has dimension `2n - 1`.
    pub n: i64,
    pub g: i64,
    pub s_plus: usize,
    pub s_minus: usize,
    /// `c_1(w^* xi)` against the fixed trivialization; 0 for the models here.
    #[serde(default)]
    pub c1: i64,
    #[serde(default)]
    pub mu_plus: Vec<i64>,
    #[serde(default)]
    pub mu_minus: Vec<i64>,
    #[serde(default)]
    pub m_plus: Vec<i64>,
    #[serde(default)]
    pub m_minus: Vec<i64>,
}

impl IndexData {
    pub fn closed(n: i64, g: i64) -> Self {
        Self { n, g, s_plus: 0, s_minus: 0, c1: 0, mu_plus: vec![], mu_minus: vec![], m_plus: vec![], m_minus: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(LabError::InvalidIndexData(format!("n must be at least 1, got {}", self.n)));
        }
        if self.g < 0 {
            return Err(LabError::InvalidIndexData(format!("genus must be nonnegative, got {}", self.g)));
        }
        for (name, len, s) in [
            ("mu_plus", self.mu_plus.len(), self.s_plus),
            ("mu_minus", self.mu_minus.len(), self.s_minus),
            ("m_plus", self.m_plus.len(), self.s_plus),
            ("m_minus", self.m_minus.len(), self.s_minus),
        ] {
            if len != s {
                return Err(LabError::InvalidIndexData(format!("{name} has {len} entries for {s} punctures")));
            }
        }
        check_multiplicities(&self.m_plus, &self.m_minus)
    }
}

fn check_multiplicities(plus: &[i64], minus: &[i64]) -> Result<()> {
    match plus.iter().chain(minus).find(|m| **m < 1) {
        Some(m) => Err(LabError::InvalidIndexData(format!("multiplicities must be at least 1, got {m}"))),
        None => Ok(()),
    }
}

/// `2n(1 - g)`.
pub fn closed_index(n: i64, g: i64) -> Result<i64> {
    IndexData::closed(n, g).validate()?;
    Ok(2 * n * (1 - g))
}

/// `2 sum m+ + 2 sum m- - 2g`.
pub fn dbar_index(m_plus: &[i64], m_minus: &[i64], g: i64) -> Result<i64> {
    check_multiplicities(m_plus, m_minus)?;
    Ok(2 * m_plus.iter().sum::<i64>() + 2 * m_minus.iter().sum::<i64>() - 2 * g)
}

/// `n(2 - 2g - s+ - s-) + 2 c1 + (s+ + s-) + sum mu+ - sum mu-`. The
/// `(s+ + s-)` summand is the extension by the asymptotic `(R, d/dtheta)`
/// directions at the punctures.
pub fn pi_index(d: &IndexData) -> Result<i64> {
    d.validate()?;
    let s = (d.s_plus + d.s_minus) as i64;
    Ok(d.n * (2 - 2 * d.g - s) + 2 * d.c1 + s + d.mu_plus.iter().sum::<i64>() - d.mu_minus.iter().sum::<i64>())
}

/// `n(2 - 2g - s+ - s-) + 2 c1 + sum mu+ - sum mu- + sum (2m+ + 1) +
/// sum (2m- + 1) - 2g`, evaluated term by term as printed.
pub fn full_index(d: &IndexData) -> Result<i64> {
    d.validate()?;
    let s = (d.s_plus + d.s_minus) as i64;
    let ends: i64 = d.m_plus.iter().chain(&d.m_minus).map(|m| 2 * m + 1).sum();
    Ok(d.n * (2 - 2 * d.g - s) + 2 * d.c1 + d.mu_plus.iter().sum::<i64>() - d.mu_minus.iter().sum::<i64>() + ends
        - 2 * d.g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub closed_index: Option<i64>,
    pub dbar_index: i64,
    pub pi_index: i64,
    pub full_index: i64,
}

/// All four values; `closed_index` only when there are no punctures.
pub fn index_report(d: &IndexData) -> Result<IndexReport> {
    Ok(IndexReport {
        closed_index: if d.s_plus + d.s_minus == 0 { Some(closed_index(d.n, d.g)?) } else { None },
        dbar_index: dbar_index(&d.m_plus, &d.m_minus, d.g)?,
        pi_index: pi_index(d)?,
        full_index: full_index(d)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_positive(n: i64, g: i64, mu: i64, m: i64) -> IndexData {
        IndexData { n, g, s_plus: 1, s_minus: 0, c1: 0, mu_plus: vec![mu], mu_minus: vec![], m_plus: vec![m], m_minus: vec![] }
    }

    #[test]
    fn closed_values() {
        assert_eq!(closed_index(2, 0).unwrap(), 4);
        assert_eq!(closed_index(2, 1).unwrap(), 0);
        // 2 * 3 * (1 - 2)
        assert_eq!(closed_index(3, 2).unwrap(), -6);
        assert!(closed_index(0, 0).is_err());
    }

    #[test]
    fn dbar_values() {
        assert_eq!(dbar_index(&[1], &[], 0).unwrap(), 2);
        assert_eq!(dbar_index(&[2, 1], &[1], 1).unwrap(), 6);
        assert_eq!(dbar_index(&[], &[], 0).unwrap(), 0);
        assert!(dbar_index(&[0], &[], 0).is_err());
    }

    #[test]
    fn pi_and_full_values() {
        assert_eq!(pi_index(&one_positive(2, 0, 3, 1)).unwrap(), 6);
        assert_eq!(full_index(&one_positive(2, 0, 3, 1)).unwrap(), 8);
        let two = IndexData {
            n: 2,
            g: 1,
            s_plus: 1,
            s_minus: 1,
            c1: 0,
            mu_plus: vec![2],
            mu_minus: vec![2],
            m_plus: vec![1],
            m_minus: vec![1],
        };
        assert_eq!(pi_index(&two).unwrap(), -2);
        let mut closed = IndexData::closed(2, 0);
        assert_eq!(full_index(&closed).unwrap(), 4);
        closed.c1 = 3;
        assert_eq!(pi_index(&closed).unwrap(), 2 * 2 + 2 * 3);
    }

    #[test]
    fn length_mismatch_rejected() {
        let mut d = one_positive(2, 0, 3, 1);
        d.mu_plus.push(1);
        assert!(matches!(pi_index(&d), Err(LabError::InvalidIndexData(_))));
    }

    fn index_data() -> impl Strategy<Value = IndexData> {
        (1i64..6, 0i64..4, 0usize..5, 0usize..5, -5i64..6).prop_flat_map(|(n, g, sp, sm, c1)| {
            (
                prop::collection::vec(-20i64..21, sp),
                prop::collection::vec(-20i64..21, sm),
                prop::collection::vec(1i64..6, sp),
                prop::collection::vec(1i64..6, sm),
            )
                .prop_map(move |(mu_plus, mu_minus, m_plus, m_minus)| IndexData {
                    n,
                    g,
                    s_plus: sp,
                    s_minus: sm,
                    c1,
                    mu_plus,
                    mu_minus,
                    m_plus,
                    m_minus,
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn full_splits_into_pi_and_dbar(d in index_data()) {
            let split = pi_index(&d).unwrap() + dbar_index(&d.m_plus, &d.m_minus, d.g).unwrap();
            prop_assert_eq!(full_index(&d).unwrap(), split);
        }

        #[test]
        fn closed_case_degenerates_in_genus_zero(n in 1i64..8) {
            prop_assert_eq!(full_index(&IndexData::closed(n, 0)).unwrap(), closed_index(n, 0).unwrap());
        }

        // without punctures the Riemann-Roch piece contributes -2g instead of
        // the closed-surface 2(1 - g), so the two formulas drift apart by 2g
        #[test]
        fn closed_case_offset_in_higher_genus(n in 1i64..8, g in 0i64..5) {
            prop_assert_eq!(full_index(&IndexData::closed(n, g)).unwrap() - closed_index(n, g).unwrap(), -2 * g);
        }
    }
}
