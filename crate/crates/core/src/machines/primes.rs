/// Primes in increasing order, sieved on demand.
#[derive(Debug, Clone, Default)]
pub struct PrimeTable {
    primes: Vec<u64>,
    limit: u64,
}

impl PrimeTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// All primes `<= limit`.
    pub fn up_to(limit: u64) -> Self {
        let mut t = Self::new();
        t.sieve(limit);
        t
    }

    fn sieve(&mut self, limit: u64) {
        if limit <= self.limit {
            return;
        }
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        self.primes = primes;
        self.limit = limit;
    }

    /// The `i`-th prime, 1-based (`nth(1) == 2`).
    pub fn nth(&mut self, i: usize) -> u64 {
        assert!(i >= 1);
        while self.primes.len() < i {
            let next = (self.limit.max(16)) * 2;
            self.sieve(next);
        }
        self.primes[i - 1]
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}
