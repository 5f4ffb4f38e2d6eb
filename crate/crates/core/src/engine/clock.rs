use rand::Rng;
use rand_distr::Exp1;

/// Nodes whose clocks still ring, with O(1) insert and remove.
#[derive(Debug, Clone)]
pub struct ActiveSet {
    nodes: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl ActiveSet {
    pub fn full(n: usize) -> ActiveSet {
        ActiveSet {
            nodes: (0..n as u32).collect(),
            pos: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.pos[node] != ABSENT
    }

    pub fn get(&self, idx: usize) -> usize {
        self.nodes[idx] as usize
    }

    pub fn remove(&mut self, node: usize) {
        let at = self.pos[node];
        if at == ABSENT {
            return;
        }
        let last = *self.nodes.last().expect("non-empty when a member exists");
        self.nodes.swap_remove(at as usize);
        if last as usize != node {
            self.pos[last as usize] = at;
        }
        self.pos[node] = ABSENT;
    }

    pub fn insert(&mut self, node: usize) {
        if self.pos[node] != ABSENT {
            return;
        }
        self.pos[node] = self.nodes.len() as u32;
        self.nodes.push(node as u32);
    }
}

/// Superposition of unit-rate Poisson clocks over the active nodes.
#[derive(Debug, Clone, Copy, Default)]
pub struct EventClock {
    pub time: f64,
}

impl EventClock {
    /// Advances to the next ring: the gap is exponential with rate equal to
    /// the number of active nodes and the ringing node is uniform among them.
    /// Consumes exactly two draws (gap, then node).
    pub fn next_event<R: Rng>(&mut self, active: &ActiveSet, rng: &mut R) -> (f64, usize) {
        debug_assert!(!active.is_empty());
        let gap: f64 = rng.sample(Exp1);
        self.time += gap / active.len() as f64;
        let node = active.get(rng.random_range(0..active.len()));
        (self.time, node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn active_set_ops() {
        let mut a = ActiveSet::full(5);
        a.remove(2);
        a.remove(4);
        a.remove(2);
        assert_eq!(a.len(), 3);
        assert!(!a.contains(2) && a.contains(0));
        let mut members: Vec<usize> = (0..a.len()).map(|i| a.get(i)).collect();
        members.sort();
        assert_eq!(members, vec![0, 1, 3]);
        a.insert(4);
        a.insert(4);
        assert_eq!(a.len(), 4);
        for x in [0, 1, 3, 4] {
            a.remove(x);
        }
        assert!(a.is_empty());
    }

    #[test]
    fn single_active_node_always_rings() {
        let mut a = ActiveSet::full(10);
        for x in (0..10).filter(|&x| x != 7) {
            a.remove(x);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut c = EventClock::default();
        let mut last = 0.0;
        for _ in 0..100 {
            let (t, node) = c.next_event(&a, &mut rng);
            assert_eq!(node, 7);
            assert!(t > last);
            last = t;
        }
    }

    #[test]
    fn deterministic_sequence() {
        let a = ActiveSet::full(50);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut c = EventClock::default();
            (0..200).map(|_| c.next_event(&a, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn mean_gap_is_one_over_n() {
        let n = 1000;
        let a = ActiveSet::full(n);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut c = EventClock::default();
        let events = 200_000;
        for _ in 0..events {
            c.next_event(&a, &mut rng);
        }
        let mean = c.time / events as f64;
        assert!((mean * n as f64 - 1.0).abs() < 0.01, "mean gap {mean}");
    }
}
