use std::sync::atomic::{AtomicBool, Ordering};
use std::thread;
use std::time::{Duration, Instant};

/// Motion limits that force a replan once exceeded within one plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Policy {
    pub enabled: bool,
    pub max_rotation_deg: f64,
    pub max_forward_cm: f64,
}

impl Default for Policy {
    fn default() -> Self {
        Self {
            enabled: false,
            max_rotation_deg: 180.0,
            max_forward_cm: 1000.0,
        }
    }
}

impl Policy {
    pub fn enabled() -> Self {
        Self {
            enabled: true,
            ..Self::default()
        }
    }
}

/// Shared run state: an abort flag any thread may set, plus the policy.
#[derive(Debug, Default)]
pub struct RunControl {
    aborted: AtomicBool,
    policy: Policy,
}

impl RunControl {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_policy(policy: Policy) -> Self {
        Self {
            aborted: AtomicBool::new(false),
            policy,
        }
    }

    /// The current skill still finishes; nothing is dispatched afterwards.
    pub fn abort(&self) {
        self.aborted.store(true, Ordering::SeqCst);
    }

    pub fn is_aborted(&self) -> bool {
        self.aborted.load(Ordering::SeqCst)
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn set_policy(&mut self, policy: Policy) {
        self.policy = policy;
    }
}

/// Mission time source.
#[derive(Debug, Clone)]
pub enum MissionClock {
    /// Simulated time. `pace` sleeps that many real seconds per simulated
    /// second so live viewers can follow along.
    Sim { now: Duration, pace: Option<f64> },
    /// Real time since `origin`; simulated skill durations are slept.
    Wall { origin: Instant },
}

impl Default for MissionClock {
    fn default() -> Self {
        Self::sim()
    }
}

impl MissionClock {
    pub fn sim() -> Self {
        MissionClock::Sim {
            now: Duration::ZERO,
            pace: None,
        }
    }

    pub fn paced(pace: f64) -> Self {
        MissionClock::Sim {
            now: Duration::ZERO,
            pace: (pace > 0.0).then_some(pace),
        }
    }

    pub fn wall() -> Self {
        MissionClock::Wall {
            origin: Instant::now(),
        }
    }

    pub fn is_sim(&self) -> bool {
        matches!(self, MissionClock::Sim { .. })
    }

    pub fn now(&self) -> Duration {
        match self {
            MissionClock::Sim { now, .. } => *now,
            MissionClock::Wall { origin } => origin.elapsed(),
        }
    }

    pub fn advance(&mut self, d: Duration) {
        match self {
            MissionClock::Sim { now, pace } => {
                *now += d;
                if let Some(p) = pace {
                    thread::sleep(d.mul_f64(*p));
                }
            }
            MissionClock::Wall { .. } => thread::sleep(d),
        }
    }

    /// Moves forward to `t`; never goes backwards.
    pub fn wait_until(&mut self, t: Duration) {
        let now = self.now();
        if t > now {
            self.advance(t - now);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sim_clock() {
        let mut c = MissionClock::sim();
        c.advance(Duration::from_millis(500));
        c.wait_until(Duration::from_millis(200));
        assert_eq!(c.now(), Duration::from_millis(500));
        c.wait_until(Duration::from_secs(1));
        assert_eq!(c.now(), Duration::from_secs(1));
    }

    #[test]
    fn abort_flag() {
        let ctl = RunControl::new();
        assert!(!ctl.is_aborted());
        ctl.abort();
        ctl.abort();
        assert!(ctl.is_aborted());
    }
}
