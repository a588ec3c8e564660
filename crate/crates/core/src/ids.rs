//! Hierarchical identifiers: bids, the projects a bid fans out to, and
//! commissioned units.
//!
//! Bid ids read `<programme><yy>-<round>/<sequence>`, e.g. `FFA15-1/129` is
//! the 129th bid of the first round in 2015 under the pilot programme. A
//! project id appends the project index: `SOL17-2/048-3`.

use core::fmt;
use core::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Programme {
    /// Ground-mounted pilot tenders (2015-2016).
    Ffa,
    /// Solar tenders under the 2017 act.
    Sol,
}

impl Programme {
    pub fn token(self) -> &'static str {
        match self {
            Programme::Ffa => "FFA",
            Programme::Sol => "SOL",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BidId {
    pub programme: Programme,
    pub year: u8,
    pub round: u32,
    pub sequence: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectId {
    pub bid: BidId,
    pub index: u32,
}

pub const UNIT_ID_LEN: usize = 33;

/// Register key of a commissioned unit: exactly 33 decimal digits.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId([u8; UNIT_ID_LEN]);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdField {
    Programme,
    Year,
    Round,
    Sequence,
    Index,
    UnitId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdError {
    /// The text does not have the overall shape of the id.
    Malformed,
    /// A component is present but invalid.
    Field(IdField),
    /// A project id without its `-<index>` suffix.
    MissingIndex,
}

impl fmt::Display for IdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IdError::Malformed => f.write_str("malformed identifier"),
            IdError::Field(field) => {
                let name = match field {
                    IdField::Programme => "programme",
                    IdField::Year => "year",
                    IdField::Round => "round",
                    IdField::Sequence => "sequence",
                    IdField::Index => "project index",
                    IdField::UnitId => "unit id",
                };
                write!(f, "invalid {name}")
            }
            IdError::MissingIndex => f.write_str("project id lacks a -<index> suffix"),
        }
    }
}

impl core::error::Error for IdError {}

fn positive(s: &str, field: IdField) -> Result<u32, IdError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(IdError::Field(field));
    }
    match s.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(IdError::Field(field)),
    }
}

impl BidId {
    pub fn new(programme: Programme, year: u8, round: u32, sequence: u32) -> Result<Self, IdError> {
        if year > 99 {
            return Err(IdError::Field(IdField::Year));
        }
        if round == 0 {
            return Err(IdError::Field(IdField::Round));
        }
        if sequence == 0 {
            return Err(IdError::Field(IdField::Sequence));
        }
        Ok(BidId { programme, year, round, sequence })
    }
}

impl FromStr for BidId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, sequence) = s.split_once('/').ok_or(IdError::Malformed)?;
        let (prefix, round) = head.split_once('-').ok_or(IdError::Malformed)?;
        if prefix.len() != 5 || !prefix.is_char_boundary(3) {
            return Err(IdError::Malformed);
        }
        let (token, year) = prefix.split_at(3);
        let programme = match token {
            "FFA" => Programme::Ffa,
            "SOL" => Programme::Sol,
            _ => return Err(IdError::Field(IdField::Programme)),
        };
        if !year.bytes().all(|b| b.is_ascii_digit()) {
            return Err(IdError::Field(IdField::Year));
        }
        let year: u8 = year.parse().map_err(|_| IdError::Field(IdField::Year))?;
        BidId::new(
            programme,
            year,
            positive(round, IdField::Round)?,
            positive(sequence, IdField::Sequence)?,
        )
    }
}

impl fmt::Display for BidId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:02}-{}/{:03}", self.programme.token(), self.year, self.round, self.sequence)
    }
}

impl ProjectId {
    pub fn new(bid: BidId, index: u32) -> Result<Self, IdError> {
        if index == 0 {
            return Err(IdError::Field(IdField::Index));
        }
        Ok(ProjectId { bid, index })
    }
}

impl FromStr for ProjectId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        // the bid part contains a '-' of its own, so look only after the '/'
        let slash = s.find('/').ok_or(IdError::Malformed)?;
        let dash = s[slash..].find('-').ok_or(IdError::MissingIndex)? + slash;
        let bid: BidId = s[..dash].parse()?;
        ProjectId::new(bid, positive(&s[dash + 1..], IdField::Index)?)
    }
}

impl fmt::Display for ProjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.bid, self.index)
    }
}

impl UnitId {
    pub fn as_str(&self) -> &str {
        // only ASCII digits are ever stored
        core::str::from_utf8(&self.0).unwrap_or("")
    }

    /// Deterministic unit id from a serial number, zero-padded to 33 digits.
    pub fn from_serial(serial: u128) -> Self {
        let mut digits = [b'0'; UNIT_ID_LEN];
        let mut n = serial;
        for slot in digits.iter_mut().rev() {
            *slot = b'0' + (n % 10) as u8;
            n /= 10;
        }
        UnitId(digits)
    }
}

impl FromStr for UnitId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != UNIT_ID_LEN || !bytes.iter().all(u8::is_ascii_digit) {
            return Err(IdError::Field(IdField::UnitId));
        }
        let mut digits = [0u8; UNIT_ID_LEN];
        digits.copy_from_slice(bytes);
        Ok(UnitId(digits))
    }
}

impl fmt::Display for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Debug for UnitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "UnitId({})", self.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn parses_bid_ids() {
        let id: BidId = "FFA15-1/129".parse().unwrap();
        assert_eq!(id, BidId { programme: Programme::Ffa, year: 15, round: 1, sequence: 129 });
        let id: BidId = "SOL17-2/048".parse().unwrap();
        assert_eq!(id, BidId { programme: Programme::Sol, year: 17, round: 2, sequence: 48 });
        assert_eq!(id.to_string(), "SOL17-2/048");
    }

    #[test]
    fn rejects_bad_bid_ids() {
        assert_eq!("XYZ99/1".parse::<BidId>(), Err(IdError::Malformed));
        assert_eq!("XYZ99-1/001".parse::<BidId>(), Err(IdError::Field(IdField::Programme)));
        assert_eq!("FFAx5-1/001".parse::<BidId>(), Err(IdError::Field(IdField::Year)));
        assert_eq!("FFA15-0/001".parse::<BidId>(), Err(IdError::Field(IdField::Round)));
        assert_eq!("FFA15-1/abc".parse::<BidId>(), Err(IdError::Field(IdField::Sequence)));
        assert_eq!("FFA15-1/000".parse::<BidId>(), Err(IdError::Field(IdField::Sequence)));
    }

    #[test]
    fn parses_project_ids() {
        let p: ProjectId = "SOL17-2/048-3".parse().unwrap();
        assert_eq!(p.bid.to_string(), "SOL17-2/048");
        assert_eq!(p.index, 3);
        let p: ProjectId = "FFA15-1/129-1".parse().unwrap();
        assert_eq!(p.index, 1);
        assert_eq!("SOL17-2/048".parse::<ProjectId>(), Err(IdError::MissingIndex));
        assert_eq!("SOL17-2/048-0".parse::<ProjectId>(), Err(IdError::Field(IdField::Index)));
    }

    #[test]
    fn unit_ids_are_33_digits() {
        let ok = "123456789012345678901234567890123";
        assert_eq!(ok.parse::<UnitId>().unwrap().as_str(), ok);
        assert!(ok[..32].parse::<UnitId>().is_err());
        assert!("12345678901234567890123456789012a".parse::<UnitId>().is_err());
        assert_eq!(UnitId::from_serial(42).as_str().len(), UNIT_ID_LEN);
    }

    fn bid_strategy() -> impl Strategy<Value = BidId> {
        (prop_oneof![Just(Programme::Ffa), Just(Programme::Sol)], 0u8..100, 1u32..50, 1u32..5000)
            .prop_map(|(programme, year, round, sequence)| BidId { programme, year, round, sequence })
    }

    proptest! {
        #[test]
        fn bid_id_round_trip(id in bid_strategy()) {
            let text = id.to_string();
            prop_assert_eq!(text.parse::<BidId>().unwrap(), id);
            prop_assert_eq!(text.parse::<BidId>().unwrap().to_string(), text);
        }

        #[test]
        fn project_id_round_trip(bid in bid_strategy(), index in 1u32..1000) {
            let p = ProjectId { bid, index };
            prop_assert_eq!(format!("{p}").parse::<ProjectId>().unwrap(), p);
        }
    }
}
