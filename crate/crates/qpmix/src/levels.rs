//! Joint level space of a set of discrete variables.

/// Mixed-radix index space over the joint levels of an ordered list of
/// discrete variables. The first variable is the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelSpace {
    cards: Vec<usize>,
}

impl LevelSpace {
    pub fn new(cards: Vec<usize>) -> Self {
        debug_assert!(cards.iter().all(|&c| c >= 1));
        Self { cards }
    }

    pub fn n_vars(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// Number of joint levels; 1 for the empty variable list.
    pub fn len(&self) -> usize {
        self.cards.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // the empty product space still has the single empty cell
    }

    /// Same as [`len`](Self::len) but saturating, for guarding against
    /// enormous joint spaces before allocating anything.
    pub fn len_saturating(&self) -> usize {
        self.cards
            .iter()
            .try_fold(1usize, |acc, &c| acc.checked_mul(c))
            .unwrap_or(usize::MAX)
    }

    /// Cell index of a joint level assignment.
    pub fn index(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), self.cards.len());
        let mut idx = 0;
        for (l, &c) in levels.iter().zip(&self.cards) {
            debug_assert!(*l < c);
            idx = idx * c + l;
        }
        idx
    }

    /// Joint level assignment of a cell index.
    pub fn levels(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.cards.len()];
        for (slot, &c) in out.iter_mut().zip(&self.cards).rev() {
            *slot = idx % c;
            idx /= c;
        }
        out
    }

    /// Project a cell index onto the sub-space of the variables at
    /// `positions` (positions into this space's variable list, ascending).
    pub fn project(&self, idx: usize, positions: &[usize]) -> usize {
        let levels = self.levels(idx);
        let sub = LevelSpace::new(positions.iter().map(|&p| self.cards[p]).collect());
        sub.index(&positions.iter().map(|&p| levels[p]).collect::<Vec<_>>())
    }
}
