use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num};

/// Numbers the cost and decision code can run on: `f64` for runs and
/// `Ratio<i64>` where exact comparison matters.
pub trait Scalar: Clone + PartialOrd + Debug + Display + Num + FromPrimitive {
    fn from_count(n: u32) -> Self {
        <Self as FromPrimitive>::from_u32(n).expect("every scalar represents small integers")
    }

    fn ratio(num: i64, den: i64) -> Self {
        let n = <Self as FromPrimitive>::from_i64(num).expect("every scalar represents small integers");
        let d = <Self as FromPrimitive>::from_i64(den).expect("every scalar represents small integers");
        n / d
    }
}

impl<T: Clone + PartialOrd + Debug + Display + Num + FromPrimitive> Scalar for T {}
