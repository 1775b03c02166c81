//! Age thresholds such as `90d` or `6m`.

use std::fmt;
use std::str::FromStr;

use chrono::TimeDelta;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DurationUnit {
    Days,
    Weeks,
    /// 30 days.
    Months,
    /// 365 days.
    Years,
}

impl DurationUnit {
    fn days(self) -> i64 {
        match self {
            DurationUnit::Days => 1,
            DurationUnit::Weeks => 7,
            DurationUnit::Months => 30,
            DurationUnit::Years => 365,
        }
    }

    fn suffix(self) -> char {
        match self {
            DurationUnit::Days => 'd',
            DurationUnit::Weeks => 'w',
            DurationUnit::Months => 'm',
            DurationUnit::Years => 'y',
        }
    }
}

/// A positive whole number of days, weeks, months or years.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AgeThreshold {
    amount: u32,
    unit: DurationUnit,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`{input}` is not a duration (expected a positive integer followed by d, w, m or y, e.g. 90d)")]
pub struct DurationError {
    pub input: String,
}

impl DurationError {
    pub fn code(&self) -> &'static str {
        "bad-duration"
    }
}

impl AgeThreshold {
    pub fn new(amount: u32, unit: DurationUnit) -> Option<AgeThreshold> {
        (amount > 0).then_some(AgeThreshold { amount, unit })
    }

    pub fn days(days: u32) -> Option<AgeThreshold> {
        AgeThreshold::new(days, DurationUnit::Days)
    }

    pub fn amount(&self) -> u32 {
        self.amount
    }

    pub fn unit(&self) -> DurationUnit {
        self.unit
    }

    pub fn total_days(&self) -> i64 {
        i64::from(self.amount) * self.unit.days()
    }

    pub fn as_delta(&self) -> TimeDelta {
        TimeDelta::days(self.total_days())
    }
}

impl FromStr for AgeThreshold {
    type Err = DurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DurationError {
            input: s.to_string(),
        };
        let trimmed = s.trim();
        let unit = match trimmed.chars().last().ok_or_else(err)? {
            'd' => DurationUnit::Days,
            'w' => DurationUnit::Weeks,
            'm' => DurationUnit::Months,
            'y' => DurationUnit::Years,
            _ => return Err(err()),
        };
        let digits = &trimmed[..trimmed.len() - 1];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let amount: u32 = digits.parse().map_err(|_| err())?;
        // Keep the day count inside chrono's range.
        if amount == 0 || i64::from(amount) * unit.days() > 1_000_000 {
            return Err(err());
        }
        Ok(AgeThreshold { amount, unit })
    }
}

impl fmt::Display for AgeThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.amount, self.unit.suffix())
    }
}
