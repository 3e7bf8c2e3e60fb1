//! Subscriber profiles: the covariates carried by every subscriber record.

use alloc::string::String;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub const ALL: [Gender; 3] = [Gender::Male, Gender::Female, Gender::Unknown];

    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "male" => Some(Gender::Male),
            "female" => Some(Gender::Female),
            "unknown" => Some(Gender::Unknown),
            _ => None,
        }
    }
}

/// Five-level ordinal wage band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Wage {
    VeryLow,
    Low,
    Average,
    High,
    VeryHigh,
}

impl Wage {
    pub const ALL: [Wage; 5] = [Wage::VeryLow, Wage::Low, Wage::Average, Wage::High, Wage::VeryHigh];

    pub fn as_str(self) -> &'static str {
        match self {
            Wage::VeryLow => "very_low",
            Wage::Low => "low",
            Wage::Average => "average",
            Wage::High => "high",
            Wage::VeryHigh => "very_high",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "very_low" => Some(Wage::VeryLow),
            "low" => Some(Wage::Low),
            "average" => Some(Wage::Average),
            "high" => Some(Wage::High),
            "very_high" => Some(Wage::VeryHigh),
            _ => None,
        }
    }
}

/// Handset radio technology generation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhoneTech {
    G2,
    G25,
    G3,
    G35,
    Other,
}

impl PhoneTech {
    pub const ALL: [PhoneTech; 5] =
        [PhoneTech::G2, PhoneTech::G25, PhoneTech::G3, PhoneTech::G35, PhoneTech::Other];

    pub fn as_str(self) -> &'static str {
        match self {
            PhoneTech::G2 => "2G",
            PhoneTech::G25 => "2.5G",
            PhoneTech::G3 => "3G",
            PhoneTech::G35 => "3.5G",
            PhoneTech::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "2G" => Some(PhoneTech::G2),
            "2.5G" => Some(PhoneTech::G25),
            "3G" => Some(PhoneTech::G3),
            "3.5G" => Some(PhoneTech::G35),
            "other" => Some(PhoneTech::Other),
            _ => None,
        }
    }
}

/// One subscriber's static covariates, frozen at the pre-release snapshot.
///
/// `phone_age` and `tenure` are in years; the panel converts tenure to months.
#[derive(Debug, Clone, PartialEq)]
pub struct SubscriberProfile {
    pub id: String,
    pub gender: Gender,
    pub wage: Wage,
    pub prepaid: bool,
    pub phone_tech: PhoneTech,
    pub mobile_internet: bool,
    pub phone_age: f64,
    pub tenure: f64,
    pub region: String,
}

impl SubscriberProfile {
    /// Field-range validation; categorical values are enforced by the enums.
    pub fn validate(&self) -> core::result::Result<(), &'static str> {
        if self.phone_age.is_nan() || self.phone_age < 0.0 {
            return Err("phone_age must be nonnegative");
        }
        if self.tenure.is_nan() || self.tenure < 0.0 {
            return Err("tenure must be nonnegative");
        }
        if self.id.is_empty() {
            return Err("empty subscriber id");
        }
        if self.region.is_empty() {
            return Err("empty region code");
        }
        Ok(())
    }
}
