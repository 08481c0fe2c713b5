//! Level schemes: how `(l_n, u_n)` windows grow with the level index.

/// The weight windows `J_n = { alpha : l_n <= beta(alpha) <= u_n }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelScheme {
    /// `u_n = M^n`, `l_n = M^(n-1)`; the simultaneous-approximation and
    /// linear-forms constructions want `M >= 2^(2d+3)`.
    MAdic { m: u64 },
    /// `l_n = u_n = n`: one weight per level, as in shrinking targets and
    /// the desk-scale level-set experiments.
    PerIndex,
}

impl LevelScheme {
    /// `(l_n, u_n)` for `n >= 1`; saturates at `u64::MAX` for levels far
    /// beyond anything enumerable (cap checks then refuse downstream).
    pub fn bounds(&self, n: u32) -> (u64, u64) {
        match self {
            LevelScheme::MAdic { m } => (
                m.checked_pow(n.saturating_sub(1)).unwrap_or(u64::MAX),
                m.checked_pow(n).unwrap_or(u64::MAX),
            ),
            LevelScheme::PerIndex => (n as u64, n as u64),
        }
    }

    pub fn upper(&self, n: u32) -> u64 {
        self.bounds(n).1
    }

    /// `u_n` as a double; overflows to infinity so that decaying rates
    /// evaluate to zero far down the tail.
    pub fn upper_f64(&self, n: u32) -> f64 {
        match self {
            LevelScheme::MAdic { m } => libm::pow(*m as f64, n as f64),
            LevelScheme::PerIndex => n as f64,
        }
    }

    /// Smallest `M` the m-adic constructions accept for `d` factors.
    pub fn min_m(d: usize) -> u64 {
        1u64 << (2 * d + 3)
    }
}
