//! Time sources and request pacing.

use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

/// Microsecond clock that can also wait.
pub trait Clock {
    fn now_us(&self) -> u64;
    fn sleep_us(&mut self, us: u64);
}

/// Wall-clock time: Unix microseconds at start plus monotonic elapsed time.
#[derive(Debug)]
pub struct SystemClock {
    origin_us: u64,
    start: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        let origin_us = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_micros() as u64)
            .unwrap_or(0);
        SystemClock {
            origin_us,
            start: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_us(&self) -> u64 {
        self.origin_us + self.start.elapsed().as_micros() as u64
    }

    fn sleep_us(&mut self, us: u64) {
        std::thread::sleep(Duration::from_micros(us));
    }
}

/// Virtual time starting at zero; sleeping advances it instantly. Stub and
/// replay runs use it so their logs are reproducible byte for byte.
#[derive(Debug, Default, Clone)]
pub struct LogicalClock {
    now: u64,
}

impl LogicalClock {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Clock for LogicalClock {
    fn now_us(&self) -> u64 {
        self.now
    }

    fn sleep_us(&mut self, us: u64) {
        self.now += us;
    }
}

/// Spaces consecutive requests at least `1 / rate` seconds apart.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    interval_us: u64,
    next_us: Option<u64>,
}

impl RateLimiter {
    /// `rate` is requests per second and must be positive.
    pub fn new(rate: f64) -> Self {
        RateLimiter {
            interval_us: (1e6 / rate).ceil() as u64,
            next_us: None,
        }
    }

    pub fn interval_us(&self) -> u64 {
        self.interval_us
    }

    /// Waits for the next free slot and returns the time it was taken.
    pub fn acquire(&mut self, clock: &mut dyn Clock) -> u64 {
        if let Some(next) = self.next_us {
            let now = clock.now_us();
            if now < next {
                clock.sleep_us(next - now);
            }
        }
        let stamp = clock.now_us();
        self.next_us = Some(stamp + self.interval_us);
        stamp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logical_clock_advances_only_by_sleeping() {
        let mut c = LogicalClock::new();
        assert_eq!(c.now_us(), 0);
        c.sleep_us(250);
        assert_eq!(c.now_us(), 250);
    }

    #[test]
    fn limiter_spaces_requests() {
        let mut c = LogicalClock::new();
        let mut rl = RateLimiter::new(4.0);
        let stamps: Vec<u64> = (0..4).map(|_| rl.acquire(&mut c)).collect();
        assert_eq!(stamps, [0, 250_000, 500_000, 750_000]);
    }

    #[test]
    fn limiter_does_not_wait_when_already_late() {
        let mut c = LogicalClock::new();
        let mut rl = RateLimiter::new(10.0);
        rl.acquire(&mut c);
        c.sleep_us(1_000_000);
        assert_eq!(rl.acquire(&mut c), 1_000_000);
    }
}
