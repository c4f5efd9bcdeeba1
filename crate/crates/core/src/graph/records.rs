use serde::{Deserialize, Serialize};

use super::RelationType;
use crate::error::{Error, Result};

/// Ratings at or below this value map to [`RelationType::LowRating`] and are
/// not relevant at evaluation time.
pub const RATING_THRESHOLD: f64 = 3.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub user: String,
    pub item: String,
    pub rating: f64,
}

impl RatingRecord {
    pub fn new(user: impl Into<String>, item: impl Into<String>, rating: f64) -> Self {
        Self {
            user: user.into(),
            item: item.into(),
            rating,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AspectOpinionRecord {
    pub user: String,
    pub item: String,
    pub aspect: String,
    pub polarity: f64,
}

impl AspectOpinionRecord {
    pub fn new(
        user: impl Into<String>,
        item: impl Into<String>,
        aspect: impl Into<String>,
        polarity: f64,
    ) -> Self {
        Self {
            user: user.into(),
            item: item.into(),
            aspect: aspect.into(),
            polarity,
        }
    }
}

/// Canonical aspect node key: trimmed and lowercased.
pub fn normalize_aspect(aspect: &str) -> String {
    aspect.trim().to_lowercase()
}

pub fn is_relevant(rating: f64) -> bool {
    rating > RATING_THRESHOLD
}

/// Maps a 5-point rating to its rating relation.
///
/// `index` only labels the diagnostic when the rating is out of range.
pub fn map_rating_to_relation(rating: f64, index: usize) -> Result<RelationType> {
    if !(1.0..=5.0).contains(&rating) {
        return Err(Error::RatingOutOfRange {
            index,
            value: rating,
        });
    }
    Ok(if rating <= RATING_THRESHOLD {
        RelationType::LowRating
    } else {
        RelationType::HighRating
    })
}

pub fn map_polarity_to_relation(polarity: f64, index: usize) -> Result<RelationType> {
    if !polarity.is_finite() {
        return Err(Error::NonFinitePolarity {
            index,
            value: polarity,
        });
    }
    Ok(if polarity == 0.0 {
        RelationType::DoesNotCare
    } else if polarity > 0.0 {
        RelationType::Like
    } else {
        RelationType::Dislike
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rating_threshold() {
        assert_eq!(map_rating_to_relation(3.0, 0).unwrap(), RelationType::LowRating);
        assert_eq!(map_rating_to_relation(1.0, 0).unwrap(), RelationType::LowRating);
        assert_eq!(map_rating_to_relation(5.0, 0).unwrap(), RelationType::HighRating);
        assert_eq!(map_rating_to_relation(3.5, 0).unwrap(), RelationType::HighRating);
    }

    #[test]
    fn rating_out_of_range_names_record() {
        let err = map_rating_to_relation(5.5, 7).unwrap_err();
        assert!(matches!(err, Error::RatingOutOfRange { index: 7, value } if value == 5.5));
        assert!(map_rating_to_relation(0.0, 0).is_err());
        assert!(map_rating_to_relation(f64::NAN, 0).is_err());
    }

    #[test]
    fn polarity_sign() {
        assert_eq!(map_polarity_to_relation(0.0, 0).unwrap(), RelationType::DoesNotCare);
        assert_eq!(map_polarity_to_relation(-0.0, 0).unwrap(), RelationType::DoesNotCare);
        assert_eq!(map_polarity_to_relation(0.7, 0).unwrap(), RelationType::Like);
        assert_eq!(map_polarity_to_relation(-0.7, 0).unwrap(), RelationType::Dislike);
        assert!(map_polarity_to_relation(f64::INFINITY, 3).is_err());
        assert!(map_polarity_to_relation(f64::NAN, 3).is_err());
    }

    #[test]
    fn aspect_normalization() {
        assert_eq!(normalize_aspect("  Battery Life "), "battery life");
    }
}
