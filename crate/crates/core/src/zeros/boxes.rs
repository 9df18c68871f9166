use serde::{Deserialize, Serialize};

use super::{Rect, ZeroSet};

/// A list of rectangles in which zeros are counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub boxes: Vec<Rect>,
}

impl BoxGrid {
    pub fn new(boxes: Vec<Rect>) -> Self {
        Self { boxes }
    }

    /// `count` boxes of height `height` stacked upward from `t_min`.
    pub fn stacked(beta_min: f64, beta_max: f64, t_min: f64, height: f64, count: usize) -> Self {
        Self::new(
            (0..count)
                .map(|i| {
                    let t0 = t_min + height * i as f64;
                    Rect::new(beta_min, beta_max, t0, t0 + height)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxStat {
    pub rect: Rect,
    pub exact: u32,
    pub approximate: u32,
    /// `|eta_e - eta_a| / eta_e`, absent when the box holds no exact zero.
    pub delta_eta: Option<f64>,
}

/// Relative discrepancy between exact and approximate zero counts per box.
pub fn delta_eta(exact: &ZeroSet, approximate: &ZeroSet, grid: &BoxGrid) -> Vec<BoxStat> {
    grid.boxes
        .iter()
        .map(|rect| {
            let e = exact.count_in(rect);
            let a = approximate.count_in(rect);
            BoxStat {
                rect: *rect,
                exact: e,
                approximate: a,
                delta_eta: (e > 0).then(|| (e as f64 - a as f64).abs() / e as f64),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::ComplexTime;
    use crate::zeros::Zero;

    #[test]
    fn counts_and_ratios() {
        let z = |b, t| Zero::exact(ComplexTime::new(b, t), 1);
        let exact = ZeroSet::new(vec![z(0.0, 0.5), z(0.1, 0.7), z(0.0, 1.5)]);
        let approx = ZeroSet::new(vec![z(0.0, 0.6), z(0.0, 2.5)]);
        let grid = BoxGrid::stacked(-1.0, 1.0, 0.0, 1.0, 3);
        let s = delta_eta(&exact, &approx, &grid);
        assert_eq!(s[0].delta_eta, Some(0.5));
        assert_eq!(s[1].delta_eta, Some(1.0));
        assert_eq!(s[2].delta_eta, None);
        assert_eq!(s[2].approximate, 1);
    }
}
