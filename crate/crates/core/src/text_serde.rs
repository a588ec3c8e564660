//! Serde support for types whose canonical form is their display string.

use core::fmt;
use core::marker::PhantomData;
use core::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::calendar::{Date, YearMonth};
use crate::ids::{BidId, ProjectId, UnitId};
use crate::linkage::Reliability;
use crate::price::Price;
use crate::registers::{GermanState, PostalCode, PricingRule, TariffCategory};

struct FromStrVisitor<T>(PhantomData<T>, &'static str);

impl<T> Visitor<'_> for FromStrVisitor<T>
where
    T: FromStr,
{
    type Value = T;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.1)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<T, E> {
        v.parse().map_err(|_| E::invalid_value(de::Unexpected::Str(v), &self))
    }

    // bare numbers in self-describing formats, e.g. `ceiling = 8.91` in TOML
    fn visit_f64<E: de::Error>(self, v: f64) -> Result<T, E> {
        self.visit_str(&alloc::format!("{v}"))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<T, E> {
        self.visit_str(&alloc::format!("{v}"))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<T, E> {
        self.visit_str(&alloc::format!("{v}"))
    }
}

macro_rules! text_serde {
    ($ty:ty, $what:literal) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                d.deserialize_str(FromStrVisitor(PhantomData, $what))
            }
        }
    };
}

text_serde!(Date, "an ISO date (YYYY-MM-DD)");
text_serde!(YearMonth, "a year-month (YYYY-MM)");
text_serde!(Price, "a decimal price in ct/kWh");
text_serde!(PricingRule, "pay_as_bid or uniform_price");
text_serde!(BidId, "a bid id such as FFA15-1/129");
text_serde!(ProjectId, "a project id such as SOL17-2/048-3");
text_serde!(UnitId, "a 33-digit unit id");
text_serde!(PostalCode, "a five-digit postal code");
text_serde!(GermanState, "a German state");
text_serde!(TariffCategory, "market_premium or side_payment");
text_serde!(Reliability, "a reliability class");
