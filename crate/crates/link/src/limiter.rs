use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Token bucket: `rate` tokens per second, holding at most `capacity`.
#[derive(Debug)]
pub struct TokenBucket {
    rate: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(rate: f64, capacity: f64) -> Self {
        assert!(rate > 0.0 && capacity >= 1.0, "rate must be positive and capacity at least 1");
        TokenBucket { rate, capacity, state: Mutex::new((capacity, Instant::now())) }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Take a token at `now`, or report how long until one is available.
    pub fn try_acquire_at(&self, now: Instant) -> Result<(), Duration> {
        let mut state = self.state.lock().expect("limiter lock");
        let (tokens, last) = *state;
        let elapsed = now.saturating_duration_since(last).as_secs_f64();
        let tokens = (tokens + elapsed * self.rate).min(self.capacity);
        if tokens >= 1.0 {
            *state = (tokens - 1.0, now.max(last));
            Ok(())
        } else {
            *state = (tokens, now.max(last));
            Err(Duration::from_secs_f64((1.0 - tokens) / self.rate))
        }
    }

    /// Block until a token is available.
    pub fn acquire(&self) {
        while let Err(wait) = self.try_acquire_at(Instant::now()) {
            std::thread::sleep(wait);
        }
    }
}

impl Default for TokenBucket {
    /// 2 requests per second, no bursts beyond one.
    fn default() -> Self {
        TokenBucket::new(2.0, 1.0)
    }
}
