//! One-way MANOVA for 2-dimensional observations via Wilks' Λ.

use serde::{Deserialize, Serialize};

use crate::special::f_survival;
use crate::StatsError;

/// det(W) at or below this fraction of W₁₁·W₂₂ is treated as singular.
const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateGroup {
    pub label: String,
    pub observations: Vec<[f64; 2]>,
}

impl BivariateGroup {
    pub fn new(label: impl Into<String>, observations: Vec<[f64; 2]>) -> Self {
        Self { label: label.into(), observations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManovaResult {
    pub wilks_lambda: f64,
    pub f_approx: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    /// Within-group SSCP, row-major.
    pub within: [[f64; 2]; 2],
    /// Between-group SSCP, row-major.
    pub between: [[f64; 2]; 2],
}

fn det(m: [[f64; 2]; 2]) -> f64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn centroid(obs: &[[f64; 2]]) -> [f64; 2] {
    let n = obs.len() as f64;
    let s = obs.iter().fold([0.0, 0.0], |acc, o| [acc[0] + o[0], acc[1] + o[1]]);
    [s[0] / n, s[1] / n]
}

fn outer_add(m: &mut [[f64; 2]; 2], d: [f64; 2], weight: f64) {
    for r in 0..2 {
        for c in 0..2 {
            m[r][c] += weight * d[r] * d[c];
        }
    }
}

/// Wilks' Λ with Rao's F, exact for two response variables:
/// F = ((1 - √Λ)/√Λ)·((N - g - 1)/(g - 1)) on (2(g - 1), 2(N - g - 1)) df.
pub fn one_way_manova(groups: &[BivariateGroup]) -> Result<ManovaResult, StatsError> {
    let g = groups.len();
    if g < 2 {
        return Err(StatsError::InsufficientData(format!("need at least 2 groups, got {g}")));
    }
    if let Some(empty) = groups.iter().find(|gr| gr.observations.is_empty()) {
        return Err(StatsError::InsufficientData(format!("group {:?} is empty", empty.label)));
    }
    let n: usize = groups.iter().map(|gr| gr.observations.len()).sum();
    if n <= g + 1 {
        return Err(StatsError::InsufficientData(format!("need N > g + 1, got N = {n}, g = {g}")));
    }
    if groups.iter().flat_map(|gr| &gr.observations).flatten().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidParameter("non-finite observation".into()));
    }

    let all: Vec<[f64; 2]> = groups.iter().flat_map(|gr| gr.observations.iter().copied()).collect();
    let grand = centroid(&all);
    let mut within = [[0.0; 2]; 2];
    let mut between = [[0.0; 2]; 2];
    for gr in groups {
        let m = centroid(&gr.observations);
        for o in &gr.observations {
            outer_add(&mut within, [o[0] - m[0], o[1] - m[1]], 1.0);
        }
        outer_add(&mut between, [m[0] - grand[0], m[1] - grand[1]], gr.observations.len() as f64);
    }

    let det_w = det(within);
    if det_w <= SINGULAR_TOL * within[0][0] * within[1][1] || within[0][0] <= 0.0 || within[1][1] <= 0.0 {
        return Err(StatsError::SingularWithin);
    }
    let total = [
        [within[0][0] + between[0][0], within[0][1] + between[0][1]],
        [within[1][0] + between[1][0], within[1][1] + between[1][1]],
    ];
    let wilks_lambda = (det_w / det(total)).clamp(f64::MIN_POSITIVE, 1.0);
    let root = wilks_lambda.sqrt();
    let (gf, nf) = (g as f64, n as f64);
    let f_approx = ((1.0 - root) / root * ((nf - gf - 1.0) / (gf - 1.0))).max(0.0);
    let df1 = 2.0 * (gf - 1.0);
    let df2 = 2.0 * (nf - gf - 1.0);
    Ok(ManovaResult { wilks_lambda, f_approx, df1, df2, p: f_survival(f_approx, df1, df2)?, within, between })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn hand_built_three_groups() {
        let groups = vec![
            BivariateGroup::new("a", vec![[1.0, 2.0], [2.0, 4.0], [3.0, 3.0]]),
            BivariateGroup::new("b", vec![[4.0, 4.0], [5.0, 6.0], [6.0, 5.0]]),
            BivariateGroup::new("c", vec![[2.0, 7.0], [3.0, 9.0], [4.0, 8.0]]),
        ];
        // Centroids (2,3), (5,5), (3,8); grand (10/3, 16/3).
        // Each group's deviations are (-1,-1),(0,1),(1,0): W = 3·[[2,1],[1,2]] = [[6,3],[3,6]].
        // B = 3·Σ (m - grand)(m - grand)ᵀ = [[14, 5], [5, 38]].
        let r = one_way_manova(&groups).unwrap();
        let expect_w = [[6.0, 3.0], [3.0, 6.0]];
        let expect_b = [[14.0, 5.0], [5.0, 38.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((r.within[i][j] - expect_w[i][j]).abs() < 1e-12);
                assert!((r.between[i][j] - expect_b[i][j]).abs() < 1e-12);
            }
        }
        let lambda = 27.0 / (20.0 * 44.0 - 64.0);
        assert!((r.wilks_lambda - lambda).abs() < 1e-12);
        let f = (1.0 - lambda.sqrt()) / lambda.sqrt() * (5.0 / 2.0);
        assert!((r.f_approx - f).abs() < 1e-10);
        assert_eq!((r.df1, r.df2), (4.0, 10.0));
    }

    #[test]
    fn equal_centroids_give_lambda_one() {
        let cloud = [[0.0, 1.0], [1.0, 0.0], [-1.0, 0.5], [0.5, -1.5]];
        let groups = vec![BivariateGroup::new("a", cloud.to_vec()), BivariateGroup::new("b", cloud.to_vec())];
        let r = one_way_manova(&groups).unwrap();
        assert!((r.wilks_lambda - 1.0).abs() < 1e-12);
        assert!(r.f_approx.abs() < 1e-9);
        assert!((r.p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn separated_groups_are_significant() {
        let mut rng = rand_pcg::Pcg32::seed_from_u64(7);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut make = |c: f64| (0..20).map(|_| [c + noise.sample(&mut rng), c + noise.sample(&mut rng)]).collect();
        let groups = vec![BivariateGroup::new("a", make(0.0)), BivariateGroup::new("b", make(10.0))];
        assert!(one_way_manova(&groups).unwrap().p < 0.001);
    }

    #[test]
    fn singular_and_insufficient() {
        let line = |off: f64| (0..4).map(|i| [i as f64 + off, 2.0 * (i as f64 + off)]).collect();
        let r = one_way_manova(&[BivariateGroup::new("a", line(0.0)), BivariateGroup::new("b", line(5.0))]);
        assert!(matches!(r, Err(StatsError::SingularWithin)));
        let r = one_way_manova(&[BivariateGroup::new("a", vec![[0.0, 0.0]]), BivariateGroup::new("b", vec![[1.0, 1.0]])]);
        assert!(matches!(r, Err(StatsError::InsufficientData(_))));
    }

    proptest! {
        #[test]
        fn lambda_invariant_under_linear_maps(
            seed in any::<u64>(),
            m in prop::array::uniform4(-3.0f64..3.0),
            shift in prop::array::uniform2(-50.0f64..50.0),
        ) {
            let d = m[0] * m[3] - m[1] * m[2];
            prop_assume!(d.abs() > 0.1);
            let mut rng = rand_pcg::Pcg32::seed_from_u64(seed);
            let noise = Normal::new(0.0, 1.0).unwrap();
            let groups: Vec<BivariateGroup> = (0..3)
                .map(|g| BivariateGroup::new(
                    g.to_string(),
                    (0..6).map(|_| [g as f64 + noise.sample(&mut rng), noise.sample(&mut rng) - g as f64]).collect(),
                ))
                .collect();
            let mapped: Vec<BivariateGroup> = groups
                .iter()
                .map(|gr| BivariateGroup::new(
                    gr.label.clone(),
                    gr.observations.iter().map(|o| [m[0] * o[0] + m[1] * o[1] + shift[0], m[2] * o[0] + m[3] * o[1] + shift[1]]).collect(),
                ))
                .collect();
            let a = one_way_manova(&groups).unwrap();
            let b = one_way_manova(&mapped).unwrap();
            prop_assert!((a.wilks_lambda - b.wilks_lambda).abs() < 1e-8);
        }
    }
}
