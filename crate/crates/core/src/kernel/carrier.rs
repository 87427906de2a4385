use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A subset of a base carrier, encoded as a little-endian bitmask: bit `i`
/// is set iff the element at position `i` belongs to the subset.
pub type Mask = u64;

/// Largest base carrier whose subsets fit in a [`Mask`].
pub const MAX_MASK_CARRIER: usize = Mask::BITS as usize;

/// Default cap on base carriers whose full powerset gets materialised.
pub const DEFAULT_POWERSET_CAP: usize = 12;

/// An ordered, finite set of labelled elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Carrier {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl Carrier {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(name.clone()));
            }
        }
        Ok(Carrier { names, index })
    }

    /// A carrier labelled `prefix0, prefix1, ...`.
    pub fn numbered(prefix: &str, size: usize) -> Self {
        Carrier::new((0..size).map(|i| format!("{prefix}{i}"))).expect("numbered labels are unique")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.position(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Mask with every element of the carrier set.
    pub fn full_mask(&self) -> Mask {
        full_mask(self.len())
    }

    /// Renders a subset as `{x,y}` using member labels in carrier order.
    pub fn format_subset(&self, mask: Mask) -> String {
        let members: Vec<&str> = members(mask).map(|i| self.name(i)).collect();
        format!("{{{}}}", members.join(","))
    }

    /// Parses `{x,y}` (or `{}`) into a mask.
    pub fn parse_subset(&self, text: &str) -> Result<Mask> {
        let inner = text
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::Parse(format!("expected a subset like {{x,y}}, got `{text}`")))?;
        let mut mask = 0;
        for label in inner.split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let i = self.require(label)?;
            if i >= MAX_MASK_CARRIER {
                return Err(Error::CapExceeded {
                    size: self.len(),
                    cap: MAX_MASK_CARRIER,
                });
            }
            mask |= 1 << i;
        }
        Ok(mask)
    }
}

impl TryFrom<Vec<String>> for Carrier {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Carrier::new(names)
    }
}

impl From<Carrier> for Vec<String> {
    fn from(c: Carrier) -> Self {
        c.names
    }
}

pub fn full_mask(size: usize) -> Mask {
    if size >= MAX_MASK_CARRIER {
        Mask::MAX
    } else {
        (1 << size) - 1
    }
}

/// Positions of the set bits of `mask`, ascending.
pub fn members(mask: Mask) -> impl Iterator<Item = usize> {
    let mut rest = mask;
    std::iter::from_fn(move || {
        if rest == 0 {
            None
        } else {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(i)
        }
    })
}

/// Checks that `mask` only uses the first `size` bits.
pub fn check_mask(mask: Mask, size: usize) -> Result<()> {
    if mask & !full_mask(size) != 0 {
        Err(Error::MaskOutOfRange { mask, size })
    } else {
        Ok(())
    }
}

/// All `2^size` masks in numeric order, refusing carriers above `cap`.
pub fn all_subsets(size: usize, cap: usize) -> Result<Vec<Mask>> {
    if size > cap || size >= MAX_MASK_CARRIER {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok((0..(1u64 << size)).collect())
}
