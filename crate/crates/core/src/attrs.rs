//! Binary attribute vectors for community fitting.
//!
//! Each ego-network member is encoded as a fixed-length 0/1 vector with block
//! layout: gender one-hot (3), wage one-hot (5), prepaid (1), phone technology
//! one-hot (5), mobile internet (1), then a region one-hot over the regions
//! present in that ego-network, sorted lexicographically. Region width thus
//! varies across ego-networks but is constant within one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::profile::{Gender, PhoneTech, SubscriberProfile, Wage};
use crate::{CoreError, Result};

pub const GENDER_OFFSET: usize = 0;
pub const WAGE_OFFSET: usize = 3;
pub const PREPAID_OFFSET: usize = 8;
pub const TECH_OFFSET: usize = 9;
pub const MOBILE_INTERNET_OFFSET: usize = 14;
pub const REGION_OFFSET: usize = 15;

/// Bit layout of the attribute vectors for one ego-network.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    /// Regions present in the ego-network, sorted; region bit i is
    /// `REGION_OFFSET + i`.
    pub regions: Vec<String>,
}

impl AttributeSchema {
    pub fn len(&self) -> usize {
        REGION_OFFSET + self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the fixed blocks are always present
    }

    /// Human-readable name of each bit position.
    pub fn bit_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.len());
        for g in Gender::ALL {
            names.push(alloc::format!("gender={}", g.as_str()));
        }
        for w in Wage::ALL {
            names.push(alloc::format!("wage={}", w.as_str()));
        }
        names.push("prepaid".to_string());
        for t in PhoneTech::ALL {
            names.push(alloc::format!("phone={}", t.as_str()));
        }
        names.push("mobile_internet".to_string());
        for r in &self.regions {
            names.push(alloc::format!("region={r}"));
        }
        names
    }

    fn encode(&self, p: &SubscriberProfile) -> Vec<u8> {
        let mut bits = alloc::vec![0u8; self.len()];
        let g = Gender::ALL.iter().position(|&x| x == p.gender).unwrap();
        bits[GENDER_OFFSET + g] = 1;
        let w = Wage::ALL.iter().position(|&x| x == p.wage).unwrap();
        bits[WAGE_OFFSET + w] = 1;
        bits[PREPAID_OFFSET] = p.prepaid as u8;
        let t = PhoneTech::ALL.iter().position(|&x| x == p.phone_tech).unwrap();
        bits[TECH_OFFSET + t] = 1;
        bits[MOBILE_INTERNET_OFFSET] = p.mobile_internet as u8;
        let r = self.regions.binary_search(&p.region).unwrap();
        bits[REGION_OFFSET + r] = 1;
        bits
    }
}

/// Decoded categorical view of one attribute vector (inverse of `binarize`
/// up to the fields the encoding carries).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodedAttrs {
    pub gender: Gender,
    pub wage: Wage,
    pub prepaid: bool,
    pub phone_tech: PhoneTech,
    pub mobile_internet: bool,
    pub region: String,
}

/// Encode every ego-network member; errors name the first member without a
/// profile.
pub fn binarize(
    profiles: &BTreeMap<String, SubscriberProfile>,
    member_ids: &[String],
) -> Result<(AttributeSchema, Vec<Vec<u8>>)> {
    let mut regions: BTreeSet<String> = BTreeSet::new();
    for id in member_ids {
        let p = profiles
            .get(id)
            .ok_or_else(|| CoreError::MissingProfile(id.clone()))?;
        regions.insert(p.region.clone());
    }
    let schema = AttributeSchema { regions: regions.into_iter().collect() };
    let vectors = member_ids
        .iter()
        .map(|id| schema.encode(&profiles[id]))
        .collect();
    Ok((schema, vectors))
}

/// Invert one attribute vector against its schema.
pub fn decode(schema: &AttributeSchema, bits: &[u8]) -> Option<DecodedAttrs> {
    let one_hot = |off: usize, len: usize| -> Option<usize> {
        let block = &bits[off..off + len];
        let mut set = None;
        for (i, &b) in block.iter().enumerate() {
            if b == 1 {
                if set.is_some() {
                    return None;
                }
                set = Some(i);
            }
        }
        set
    };
    Some(DecodedAttrs {
        gender: Gender::ALL[one_hot(GENDER_OFFSET, 3)?],
        wage: Wage::ALL[one_hot(WAGE_OFFSET, 5)?],
        prepaid: bits[PREPAID_OFFSET] == 1,
        phone_tech: PhoneTech::ALL[one_hot(TECH_OFFSET, 5)?],
        mobile_internet: bits[MOBILE_INTERNET_OFFSET] == 1,
        region: schema.regions[one_hot(REGION_OFFSET, schema.regions.len())?].clone(),
    })
}
