use serde::{Deserialize, Serialize};

use super::Outcome;
use crate::stamp::Stamp;

/// A single timestamped value; newer stamps win, everything else is a no-op.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwRegister<T> {
    value: T,
    stamp: Stamp,
}

impl<T> LwwRegister<T> {
    pub fn new(value: T, stamp: Stamp) -> Self {
        LwwRegister { value, stamp }
    }

    pub fn value(&self) -> &T {
        &self.value
    }

    pub fn stamp(&self) -> Stamp {
        self.stamp
    }

    /// Replace the value iff `stamp` is strictly newer than the current one.
    pub fn update(&mut self, value: T, stamp: Stamp) -> Outcome {
        if stamp > self.stamp {
            self.value = value;
            self.stamp = stamp;
            Outcome::Applied
        } else {
            Outcome::Nop
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newer_update_applies() {
        let mut r = LwwRegister::new(10, Stamp::at(0));
        assert_eq!(r.update(15, Stamp::at(1)), Outcome::Applied);
        assert_eq!((*r.value(), r.stamp()), (15, Stamp::at(1)));
    }

    #[test]
    fn older_update_is_nop() {
        let mut r = LwwRegister::new(20, Stamp::at(2));
        assert_eq!(r.update(15, Stamp::at(1)), Outcome::Nop);
        assert_eq!((*r.value(), r.stamp()), (20, Stamp::at(2)));
    }

    #[test]
    fn equal_stamp_is_nop() {
        let mut r = LwwRegister::new(20, Stamp::at(2));
        assert_eq!(r.update(20, Stamp::at(2)), Outcome::Nop);
        assert_eq!(r.update(99, Stamp::at(2)), Outcome::Nop);
        assert_eq!(*r.value(), 20);
    }
}
