//! Behavior abstraction and the novelty / distance metrics.
//!
//! A behavior is the deduplicated sequence of 3x3-cell region ids visited
//! during an episode, with `k*` tokens marking press actions performed in
//! region `k`, serialized like `13-13*-12-11`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::maze::{DistanceField, Position};
use crate::scalar::Scalar;

/// Partition of the grid into squares of `SQUARE` x `SQUARE` cells, with
/// row-major region ids starting at 1. Edge squares may be smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionPartition {
    width: usize,
    height: usize,
    cols: usize,
    rows: usize,
}

const SQUARE: usize = 3;

impl RegionPartition {
    pub fn new(width: usize, height: usize) -> Self {
        RegionPartition {
            width,
            height,
            cols: width.div_ceil(SQUARE),
            rows: height.div_ceil(SQUARE),
        }
    }

    pub fn region_count(&self) -> usize {
        self.cols * self.rows
    }

    /// 1-based row-major id of the square containing the cell.
    pub fn region_of(&self, pos: Position) -> Result<usize> {
        if pos.x >= self.width || pos.y >= self.height {
            return Err(Error::OutOfBounds(pos.x, pos.y));
        }
        Ok((pos.y / SQUARE) * self.cols + pos.x / SQUARE + 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Token {
    region: usize,
    pressed: bool,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pressed {
            write!(f, "{}*", self.region)
        } else {
            write!(f, "{}", self.region)
        }
    }
}

/// Token sequence of one episode; consecutive duplicates are suppressed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BehaviorTrace {
    tokens: Vec<Token>,
}

impl BehaviorTrace {
    pub fn new() -> Self {
        BehaviorTrace::default()
    }

    pub fn enter_region(&mut self, region: usize) {
        self.push(Token {
            region,
            pressed: false,
        });
    }

    pub fn press_in_region(&mut self, region: usize) {
        self.push(Token {
            region,
            pressed: true,
        });
    }

    fn push(&mut self, token: Token) {
        if self.tokens.last() != Some(&token) {
            self.tokens.push(token);
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn into_string(self) -> String {
        self.to_string()
    }
}

impl fmt::Display for BehaviorTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str("-")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// Unique behaviors divided by the episode budget.
pub fn novelty_score<S: Scalar, T: AsRef<str>>(behaviors: &[T], n_episodes: usize) -> S {
    assert!(n_episodes > 0);
    let unique: HashSet<&str> = behaviors.iter().map(|b| b.as_ref()).collect();
    S::from_usize_lossy(unique.len()) / S::from_usize_lossy(n_episodes)
}

/// Two-regime distance score in [0, 2] from the trial-minimum distance.
///
/// A minimum at or beyond the door distance means the agent never entered
/// the goal room and scores `1 + min / max_dist`; otherwise the score is
/// `min / max_dist_second_room`.
pub fn distance_measure<S: Scalar>(trial_min_distance: i32, field: &DistanceField) -> S {
    debug_assert!(trial_min_distance >= 0);
    let min = S::from_i32(trial_min_distance).expect("distance fits scalar");
    if trial_min_distance >= field.door_distance {
        S::one() + min / S::from_i32(field.max_dist).unwrap()
    } else if trial_min_distance == 0 {
        S::zero()
    } else {
        min / S::from_i32(field.max_dist_second_room).unwrap()
    }
}

/// True if the trial minimum distance is strictly inside the goal room.
/// The boundary (exactly the door distance) counts as not entered.
pub fn entered_second_room(trial_min_distance: i32, field: &DistanceField) -> bool {
    trial_min_distance < field.door_distance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maze::MazeMap;

    #[test]
    fn region_ids_are_row_major() {
        let p = RegionPartition::new(23, 23);
        assert_eq!(p.region_of(Position::new(0, 0)).unwrap(), 1);
        assert_eq!(p.region_of(Position::new(3, 0)).unwrap(), 2);
        assert_eq!(p.region_of(Position::new(0, 3)).unwrap(), 9);
        assert_eq!(p.region_count(), 64);
    }

    #[test]
    fn all_cells_map_by_floor_division() {
        let p = RegionPartition::new(23, 23);
        let mut seen = HashSet::new();
        for y in 0..23 {
            for x in 0..23 {
                let id = p.region_of(Position::new(x, y)).unwrap();
                assert_eq!(id, (y / 3) * 8 + x / 3 + 1);
                seen.insert(id);
            }
        }
        assert_eq!(seen.len(), 64);
    }

    #[test]
    fn out_of_bounds_cell_is_an_error() {
        let p = RegionPartition::new(23, 23);
        assert!(p.region_of(Position::new(23, 0)).is_err());
    }

    #[test]
    fn trace_matches_printed_form() {
        let mut t = BehaviorTrace::new();
        t.enter_region(13);
        t.press_in_region(13);
        t.enter_region(12);
        assert_eq!(t.to_string(), "13-13*-12");
    }

    #[test]
    fn staying_put_adds_a_single_token() {
        let mut t = BehaviorTrace::new();
        for _ in 0..50 {
            t.enter_region(7);
        }
        assert_eq!(t.to_string(), "7");
    }

    #[test]
    fn repeated_press_in_region_dedups() {
        let mut t = BehaviorTrace::new();
        t.enter_region(10);
        t.press_in_region(10);
        t.press_in_region(10);
        assert_eq!(t.to_string(), "10-10*");
        // leaving and pressing again is a new event
        t.enter_region(11);
        t.enter_region(10);
        t.press_in_region(10);
        assert_eq!(t.to_string(), "10-10*-11-10-10*");
    }

    #[test]
    fn novelty_counts_unique_behaviors() {
        let same = vec!["1-2-3"; 500];
        assert_eq!(novelty_score::<f64, _>(&same, 500), 0.002);
        let distinct: Vec<String> = (0..500).map(|i| format!("1-{i}")).collect();
        assert_eq!(novelty_score::<f64, _>(&distinct, 500), 1.0);
    }

    #[test]
    fn novelty_matches_independent_dedup() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let n = rng.random_range(1..200usize);
            let behaviors: Vec<String> = (0..n)
                .map(|_| format!("b{}", rng.random_range(0..30u32)))
                .collect();
            let mut sorted = behaviors.clone();
            sorted.sort();
            sorted.dedup();
            let expect = sorted.len() as f64 / n as f64;
            assert_eq!(novelty_score::<f64, _>(&behaviors, n), expect);
        }
    }

    fn corridor_field() -> DistanceField {
        let doc = "name: corridor\nheading1: E\n\n#######\n#1...B#\n#####D#\n#G....#\n#######\n";
        let map = MazeMap::parse(doc).unwrap();
        DistanceField::compute(&map).unwrap()
    }

    #[test]
    fn distance_measure_regimes() {
        let field = corridor_field();
        // door_distance 5, max_dist 10, max_dist_second_room 4
        assert_eq!(distance_measure::<f64>(0, &field), 0.0);
        assert_eq!(distance_measure::<f64>(10, &field), 2.0);
        assert_eq!(distance_measure::<f64>(2, &field), 0.5);
        assert_eq!(distance_measure::<f64>(7, &field), 1.7);
        // boundary counts as not entered
        assert_eq!(distance_measure::<f64>(5, &field), 1.5);
        assert!(!entered_second_room(5, &field));
        assert!(entered_second_room(4, &field));
    }

    #[test]
    fn distance_measure_separates_regimes() {
        let field = corridor_field();
        let mut inside: Vec<f64> = (0..field.door_distance)
            .map(|d| distance_measure(d, &field))
            .collect();
        let outside: Vec<f64> = (field.door_distance..=field.max_dist)
            .map(|d| distance_measure(d, &field))
            .collect();
        inside.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(inside.iter().all(|&v| v <= 1.0));
        assert!(outside.iter().all(|&v| v > 1.0 && v <= 2.0));
        // weakly monotone within each regime
        assert!(inside.windows(2).all(|w| w[0] <= w[1]));
        assert!(outside.windows(2).all(|w| w[0] <= w[1]));
    }
}
