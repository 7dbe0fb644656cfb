//! The three-marginal, three-point planar instance without a Monge solution.
//!
//! Coordinates are kept as the published decimal strings and parsed on load.

use crate::measures::Instance;

pub const EXAMPLE_ONE: [[[&str; 2]; 3]; 3] = [
    [["0.4417", "-4.7665"], ["-0.27748", "1.0397"], ["1.4826", "4.7896"]],
    [["-2.1054", "-3.9784"], ["3.5763", "-1.8988"], ["3.328", "-1.558"]],
    [["-3.6728", "0.23451"], ["1.6988", "-2.2917"], ["-1.1644", "-2.386"]],
];

/// Published optimal transport cost, rounded to three decimals.
pub const EXAMPLE_ONE_LP_VALUE: f64 = 68.027;

/// Published minimal Monge cost, rounded to three decimals.
pub const EXAMPLE_ONE_MMC: f64 = 68.065;

/// Support of the published optimal coupling (1-based tuples, weight 1/6 each).
pub const EXAMPLE_ONE_OPTIMAL_SUPPORT: [[usize; 3]; 6] = [
    [1, 1, 3],
    [1, 2, 2],
    [2, 1, 1],
    [2, 2, 3],
    [3, 3, 1],
    [3, 3, 2],
];

/// Support of the best Monge coupling (1-based tuples, weight 1/3 each).
pub const EXAMPLE_ONE_MONGE_SUPPORT: [[usize; 3]; 3] = [[1, 1, 3], [2, 2, 2], [3, 3, 1]];

pub fn example_one() -> Instance {
    let points = EXAMPLE_ONE
        .iter()
        .map(|marginal| {
            marginal
                .iter()
                .map(|atom| atom.iter().map(|s| s.parse::<f64>().unwrap()).collect())
                .collect()
        })
        .collect();
    Instance::from_points(points).expect("fixture is a valid instance")
}
