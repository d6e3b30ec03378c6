//! Mappings of raw OER signals and learner ratings onto the unit interval.

use crate::error::{Error, Result};
use crate::model::NativeRate;
use crate::scalar::Scalar;

/// Reciprocal of a 1-based position in a repository's search results.
pub fn ranking_position_score<T: Scalar>(position: i64) -> Result<T> {
    if position < 1 {
        return Err(Error::validation("ranking_position", format!("position must be >= 1, got {position}")));
    }
    Ok(T::one() / T::lit(position as f64))
}

/// Maps a 1..=5 satisfaction rating affinely onto [0,1].
pub fn normalize_rating<T: Scalar>(rating: i64) -> Result<T> {
    if !(1..=5).contains(&rating) {
        return Err(Error::validation("rating", format!("{rating} outside 1..=5")));
    }
    Ok(T::lit((rating - 1) as f64) / T::lit(4.0))
}

/// Min-max scaling of a duration against the corpus range for its media kind.
/// The length is clamped into the range first; a degenerate range yields 0.5.
pub fn normalize_length<T: Scalar>(length: T, min: T, max: T) -> Result<T> {
    if length < T::zero() || length.is_nan() {
        return Err(Error::validation("length", format!("{length} is negative")));
    }
    if !(min <= max) {
        return Err(Error::validation("corpus_stats", format!("min {min} > max {max}")));
    }
    if max == min {
        return Ok(T::lit(0.5));
    }
    let clamped = length.max(min).min(max);
    Ok(((clamped - min) / (max - min)).clamp_unit())
}

/// Stars over five, or the like share of all votes. No votes at all is neutral.
pub fn native_rate_to_unit<T: Scalar>(rate: &NativeRate) -> Result<T> {
    rate.validate()?;
    Ok(match *rate {
        NativeRate::Stars { stars } => T::lit(stars / 5.0),
        NativeRate::LikeDislike { likes, dislikes } => {
            let total = likes + dislikes;
            if total == 0 {
                T::lit(0.5)
            } else {
                T::lit(likes as f64) / T::lit(total as f64)
            }
        }
    })
}
