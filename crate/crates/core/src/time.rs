//! Simulation clock and 5G NR numerology scaling.
//!
//! Time is kept as an integer count of ticks at 1/56 ms. Every numerology
//! scale factor has the form `sym / (7 * k)` with `k` in {1, 2, 4, 8}, so an
//! integer number of milliseconds always scales to an integer number of
//! ticks and event ordering never depends on floating-point rounding.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use crate::error::Error;

/// Clock resolution.
pub const TICKS_PER_MS: i64 = 56;

/// A point in simulated time or a duration, in ticks of 1/56 ms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Ticks(pub i64);

impl Ticks {
    pub const ZERO: Ticks = Ticks(0);

    /// Rounds to the nearest tick.
    pub fn from_ms(ms: f64) -> Ticks {
        Ticks((ms * TICKS_PER_MS as f64).round() as i64)
    }

    pub const fn from_whole_ms(ms: i64) -> Ticks {
        Ticks(ms * TICKS_PER_MS)
    }

    pub fn as_ms(self) -> f64 {
        self.0 as f64 / TICKS_PER_MS as f64
    }

    /// Smallest multiple of `period` that is `>= self`.
    pub fn ceil_to(self, period: Ticks) -> Ticks {
        debug_assert!(period.0 > 0);
        Ticks(self.0.div_euclid(period.0) * period.0 + if self.0.rem_euclid(period.0) == 0 { 0 } else { period.0 })
    }

    /// Largest multiple of `period` that is `<= self`.
    pub fn floor_to(self, period: Ticks) -> Ticks {
        debug_assert!(period.0 > 0);
        Ticks(self.0.div_euclid(period.0) * period.0)
    }
}

impl Add for Ticks {
    type Output = Ticks;
    fn add(self, rhs: Ticks) -> Ticks {
        Ticks(self.0 + rhs.0)
    }
}

impl AddAssign for Ticks {
    fn add_assign(&mut self, rhs: Ticks) {
        self.0 += rhs.0;
    }
}

impl Sub for Ticks {
    type Output = Ticks;
    fn sub(self, rhs: Ticks) -> Ticks {
        Ticks(self.0 - rhs.0)
    }
}

impl Mul<i64> for Ticks {
    type Output = Ticks;
    fn mul(self, rhs: i64) -> Ticks {
        Ticks(self.0 * rhs)
    }
}

impl fmt::Display for Ticks {
    /// Milliseconds with four decimals; stable across platforms.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.4}", self.as_ms())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubcarrierSpacing {
    Khz15,
    Khz30,
    Khz60,
    Khz120,
}

impl SubcarrierSpacing {
    pub const ALL: [SubcarrierSpacing; 4] = [Self::Khz15, Self::Khz30, Self::Khz60, Self::Khz120];

    pub fn khz(self) -> u32 {
        match self {
            Self::Khz15 => 15,
            Self::Khz30 => 30,
            Self::Khz60 => 60,
            Self::Khz120 => 120,
        }
    }

    pub fn from_khz(khz: u32) -> Result<Self, Error> {
        match khz {
            15 => Ok(Self::Khz15),
            30 => Ok(Self::Khz30),
            60 => Ok(Self::Khz60),
            120 => Ok(Self::Khz120),
            other => Err(Error::Domain(format!("subcarrier spacing {other} kHz is not one of 15/30/60/120"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotSymbols {
    Seven,
    Four,
    Two,
}

impl SlotSymbols {
    pub const ALL: [SlotSymbols; 3] = [Self::Seven, Self::Four, Self::Two];

    pub fn count(self) -> u32 {
        match self {
            Self::Seven => 7,
            Self::Four => 4,
            Self::Two => 2,
        }
    }

    pub fn from_count(n: u32) -> Result<Self, Error> {
        match n {
            7 => Ok(Self::Seven),
            4 => Ok(Self::Four),
            2 => Ok(Self::Two),
            other => Err(Error::Domain(format!("{other} symbols per slot is not one of 7/4/2"))),
        }
    }
}

/// Frame-timing configuration: subcarrier spacing and symbols per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Numerology {
    pub subcarrier_spacing: SubcarrierSpacing,
    pub symbols_per_slot: SlotSymbols,
}

impl Default for Numerology {
    /// LTE: 15 kHz, 7 symbols.
    fn default() -> Self {
        Numerology { subcarrier_spacing: SubcarrierSpacing::Khz15, symbols_per_slot: SlotSymbols::Seven }
    }
}

impl Numerology {
    pub fn new(subcarrier_spacing: SubcarrierSpacing, symbols_per_slot: SlotSymbols) -> Self {
        Numerology { subcarrier_spacing, symbols_per_slot }
    }

    /// Exact scale factor as `(numerator, denominator)`.
    pub fn scale_ratio(&self) -> (i64, i64) {
        (15 * self.symbols_per_slot.count() as i64, 7 * self.subcarrier_spacing.khz() as i64)
    }

    /// Scales a baseline duration. Exact for any whole number of baseline
    /// milliseconds; other values are rounded half-up to the nearest tick.
    pub fn scale(&self, base: Ticks) -> Ticks {
        let (num, den) = self.scale_ratio();
        let scaled = base.0 * num;
        Ticks((2 * scaled + den).div_euclid(2 * den))
    }
}

/// `(15 / scs) * (symbols / 7)`; 1.0 for LTE.
pub fn time_scale(numerology: Numerology) -> f64 {
    let (num, den) = numerology.scale_ratio();
    num as f64 / den as f64
}

/// Control-plane durations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TimingParams {
    pub t_msg1: Ticks,
    pub t_msg2: Ticks,
    pub t_msg3: Ticks,
    pub t_msg4: Ticks,
    pub ra_period: Ticks,
    pub rar_window: Ticks,
    pub bi_max: Ticks,
    pub contention_resolution_timer: Ticks,
    pub sib2_period: Ticks,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            t_msg1: Ticks::from_whole_ms(1),
            t_msg2: Ticks::from_whole_ms(3),
            t_msg3: Ticks::from_whole_ms(5),
            t_msg4: Ticks::from_whole_ms(5),
            ra_period: Ticks::from_whole_ms(5),
            rar_window: Ticks::from_whole_ms(5),
            bi_max: Ticks::from_whole_ms(20),
            contention_resolution_timer: Ticks::from_whole_ms(48),
            sib2_period: Ticks::from_whole_ms(80),
        }
    }
}

impl TimingParams {
    pub fn map(&self, f: impl Fn(Ticks) -> Ticks) -> TimingParams {
        TimingParams {
            t_msg1: f(self.t_msg1),
            t_msg2: f(self.t_msg2),
            t_msg3: f(self.t_msg3),
            t_msg4: f(self.t_msg4),
            ra_period: f(self.ra_period),
            rar_window: f(self.rar_window),
            bi_max: f(self.bi_max),
            contention_resolution_timer: f(self.contention_resolution_timer),
            sib2_period: f(self.sib2_period),
        }
    }
}

/// Applies the numerology scale factor to every duration.
pub fn scale_timing(base: &TimingParams, numerology: Numerology) -> TimingParams {
    base.map(|t| numerology.scale(t))
}
