//! Post-RAR phase: the four-step Msg-3/Msg-4 exchange and the two-step
//! early-data completion.

use rand::Rng;

use crate::rng::StreamRng;
use crate::time::{Ticks, TimingParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Msg34Outcome {
    Connected { msg3_tx: u32, msg4_tx: u32, msg3_end: Ticks, msg4_end: Ticks },
    /// HARQ exhaustion or contention-resolution timeout; the attempt fails at `at`.
    AttemptFailed { at: Ticks, msg3_tx: u32, msg4_tx: u32, reason: Msg34Failure },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Msg34Failure {
    Msg3Harq,
    Msg4Harq,
    ContentionResolutionTimer,
}

/// Non-adaptive HARQ: each transmission takes its message time and fails
/// independently with `fail_prob`, up to `max_harq` transmissions.
fn harq(start: Ticks, duration: Ticks, fail_prob: f64, max_harq: u32, rng: &mut StreamRng) -> (bool, u32, Ticks) {
    let mut t = start;
    for tx in 1..=max_harq {
        t += duration;
        if rng.random::<f64>() >= fail_prob {
            return (true, tx, t);
        }
    }
    (false, max_harq, t)
}

/// Runs Msg 3 then Msg 4 from the RAR delivery time. The span from the
/// start of Msg 3 to the end of Msg 4 must fit in the contention-resolution
/// timer.
pub fn msg34_exchange(rar_at: Ticks, timing: &TimingParams, fail_prob: f64, max_harq: u32, rng: &mut StreamRng) -> Msg34Outcome {
    let deadline = rar_at + timing.contention_resolution_timer;
    let (ok3, msg3_tx, msg3_end) = harq(rar_at, timing.t_msg3, fail_prob, max_harq, rng);
    if !ok3 {
        return Msg34Outcome::AttemptFailed { at: msg3_end, msg3_tx, msg4_tx: 0, reason: Msg34Failure::Msg3Harq };
    }
    let (ok4, msg4_tx, msg4_end) = harq(msg3_end, timing.t_msg4, fail_prob, max_harq, rng);
    if msg4_end > deadline {
        return Msg34Outcome::AttemptFailed { at: deadline, msg3_tx, msg4_tx, reason: Msg34Failure::ContentionResolutionTimer };
    }
    if !ok4 {
        return Msg34Outcome::AttemptFailed { at: msg4_end, msg3_tx, msg4_tx, reason: Msg34Failure::Msg4Harq };
    }
    Msg34Outcome::Connected { msg3_tx, msg4_tx, msg3_end, msg4_end }
}

/// Per-component access delay of a successful device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DelayBreakdown {
    /// Arrival to the start of the successful Msg 1, including failed attempts.
    pub wait: Ticks,
    pub msg1: Ticks,
    /// Msg-1 end to RAR delivery, including any RAR-capacity spill.
    pub msg2: Ticks,
    pub msg3: Ticks,
    pub msg4: Ticks,
}

impl DelayBreakdown {
    pub fn total(&self) -> Ticks {
        self.wait + self.msg1 + self.msg2 + self.msg3 + self.msg4
    }
}

/// Two-step completion: the device is connected when the EDT Msg 2
/// arrives, so `t_total = t_wait + t_msg1 + t_msg2`.
pub fn apply_edt(arrival: Ticks, msg1_start: Ticks, msg1_end: Ticks, rar_at: Ticks) -> DelayBreakdown {
    DelayBreakdown { wait: msg1_start - arrival, msg1: msg1_end - msg1_start, msg2: rar_at - msg1_end, msg3: Ticks::ZERO, msg4: Ticks::ZERO }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{RandomSource, Stream};
    use crate::time::{Numerology, SlotSymbols, SubcarrierSpacing};

    fn rng(seed: u64) -> StreamRng {
        RandomSource::new(seed).stream(Stream::Harq)
    }

    #[test]
    fn clean_exchange_adds_msg3_and_msg4() {
        let t = TimingParams::default();
        match msg34_exchange(Ticks(1000), &t, 0.0, 5, &mut rng(1)) {
            Msg34Outcome::Connected { msg3_tx, msg4_tx, msg4_end, .. } => {
                assert_eq!((msg3_tx, msg4_tx), (1, 1));
                assert_eq!((msg4_end - Ticks(1000)).as_ms(), 10.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certain_loss_exhausts_msg3() {
        let t = TimingParams::default();
        let out = msg34_exchange(Ticks::ZERO, &t, 1.0, 5, &mut rng(1));
        assert_eq!(out, Msg34Outcome::AttemptFailed { at: Ticks::from_whole_ms(25), msg3_tx: 5, msg4_tx: 0, reason: Msg34Failure::Msg3Harq });
    }

    #[test]
    fn msg3_exhaustion_rate() {
        // 0.5^5 = 1/32 makes the rate measurable; 0.1^5 follows the same path.
        let t = TimingParams::default();
        let mut r = rng(2);
        let n = 200_000;
        let fails = (0..n)
            .filter(|_| matches!(msg34_exchange(Ticks::ZERO, &t, 0.5, 5, &mut r), Msg34Outcome::AttemptFailed { reason: Msg34Failure::Msg3Harq, .. }))
            .count();
        let rate = fails as f64 / n as f64;
        assert!((rate - 0.5f64.powi(5)).abs() < 0.002, "{rate}");
    }

    #[test]
    fn contention_timer_bounds_span() {
        // Five Msg-3 and five Msg-4 transmissions take 50 ms > 48 ms.
        let t = TimingParams::default();
        let mut r = rng(3);
        let mut seen = false;
        for _ in 0..200_000 {
            match msg34_exchange(Ticks::ZERO, &t, 0.6, 5, &mut r) {
                Msg34Outcome::AttemptFailed { reason: Msg34Failure::ContentionResolutionTimer, at, msg3_tx, msg4_tx } => {
                    assert_eq!(at, Ticks::from_whole_ms(48));
                    assert_eq!(msg3_tx + msg4_tx, 10);
                    seen = true;
                }
                Msg34Outcome::Connected { msg4_end, .. } => assert!(msg4_end <= Ticks::from_whole_ms(48)),
                _ => {}
            }
        }
        assert!(seen);
    }

    #[test]
    fn edt_breakdown() {
        let d = apply_edt(Ticks::ZERO, Ticks::from_ms(2.5), Ticks::from_ms(3.5), Ticks::from_ms(6.5));
        assert_eq!(d.total().as_ms(), 6.5);
        assert_eq!((d.wait.as_ms(), d.msg1.as_ms(), d.msg2.as_ms()), (2.5, 1.0, 3.0));
    }

    #[test]
    fn edt_scales_with_numerology() {
        let n = Numerology::new(SubcarrierSpacing::Khz60, SlotSymbols::Seven);
        let t = crate::time::scale_timing(&TimingParams::default(), n);
        let d = apply_edt(Ticks::ZERO, Ticks::ZERO, t.t_msg1, t.t_msg1 + t.t_msg2);
        assert_eq!(d.total().as_ms(), 4.0 * 0.25);
    }
}
