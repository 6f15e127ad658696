//! State-based radio energy accounting.

use crate::config::PowerModel;

/// State of a half-duplex radio. It is in transmitter mode only while
/// sending; otherwise its receiver is listening.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadioState {
    Idle,
    Busy,
    Receiving,
    Transmitting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub state: RadioState,
    pub start_ns: u64,
    pub end_ns: u64,
}

/// State history of one node covering `[0, end)` without gaps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Timeline(pub Vec<Segment>);

/// One transmission burst on the shared medium: the PLCP preamble up to
/// `payload_start_ns`, then the frame body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AirFrame {
    pub sender: usize,
    pub start_ns: u64,
    pub payload_start_ns: u64,
    pub end_ns: u64,
}

impl Timeline {
    fn push(&mut self, state: RadioState, start_ns: u64, end_ns: u64) {
        if end_ns <= start_ns {
            return;
        }
        if let Some(last) = self.0.last_mut() {
            if last.state == state && last.end_ns == start_ns {
                last.end_ns = end_ns;
                return;
            }
        }
        self.0.push(Segment { state, start_ns, end_ns });
    }

    /// Every node hears every burst: busy during the preamble, receiving
    /// during the body. Gaps between bursts are idle. `frames` must not
    /// overlap and must be in time order.
    pub fn from_air(node: usize, frames: &[AirFrame], window_ns: u64) -> Self {
        let mut t = Timeline::default();
        let mut cursor = 0;
        for f in frames.iter().filter(|f| f.start_ns < window_ns) {
            let end = f.end_ns.min(window_ns);
            t.push(RadioState::Idle, cursor, f.start_ns);
            if f.sender == node {
                t.push(RadioState::Transmitting, f.start_ns, end);
            } else {
                let body = f.payload_start_ns.min(end);
                t.push(RadioState::Busy, f.start_ns, body);
                t.push(RadioState::Receiving, body, end);
            }
            cursor = end;
        }
        t.push(RadioState::Idle, cursor, window_ns);
        t
    }

    pub fn is_contiguous(&self) -> bool {
        self.0.first().is_none_or(|s| s.start_ns == 0) && self.0.windows(2).all(|w| w[0].end_ns == w[1].start_ns)
    }

    pub fn duration_in(&self, state: RadioState) -> u64 {
        self.0.iter().filter(|s| s.state == state).map(|s| s.end_ns - s.start_ns).sum()
    }
}

/// Joules drawn over the timeline: Σ power × duration.
pub fn energy_account(power: &PowerModel, t: &Timeline) -> f64 {
    debug_assert!(t.is_contiguous());
    let mw_ns: f64 = t
        .0
        .iter()
        .map(|s| {
            let p = match s.state {
                RadioState::Idle => power.rx_idle,
                RadioState::Busy => power.rx_busy,
                RadioState::Receiving => power.rx_receiving,
                RadioState::Transmitting => power.tx_transmitting,
            };
            p * (s.end_ns - s.start_ns) as f64
        })
        .sum();
    // mW · ns = 1e-12 J
    mw_ns * 1e-12
}
