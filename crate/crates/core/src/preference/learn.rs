//! Fitting a learner's preference vector to their satisfaction ratings.
//!
//! The objective is the summed absolute residual `sum_o |P.X_o - Y_o|` with
//! `Y_o` the rating mapped onto [0,1]. It is minimized by projected
//! subgradient descent over the box [0,1]^DIM.

use serde::{Deserialize, Serialize};

use super::vector::{FeatureVector, PreferenceVector, DIM};
use crate::error::{Error, Result};
use crate::model::{RatedRecommendation, RecStatus};
use crate::normalize::normalize_rating;
use crate::scalar::Scalar;

/// Rated feature vectors of one learner, oldest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingHistory<T> {
    pub items: Vec<(FeatureVector<T>, T)>,
}

impl<T: Scalar> TrainingHistory<T> {
    pub fn new() -> Self {
        TrainingHistory { items: Vec::new() }
    }

    pub fn push(&mut self, x: FeatureVector<T>, y: T) {
        self.items.push((x, y));
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Finished recommendations of the given learner in issue order, using the
    /// feature vector snapshot taken when each was issued.
    pub fn from_recommendations<'a>(
        learner_id: &str,
        recs: impl IntoIterator<Item = &'a RatedRecommendation>,
    ) -> Result<Self> {
        let mut finished: Vec<&RatedRecommendation> =
            recs.into_iter().filter(|r| r.learner_id == learner_id && r.status == RecStatus::Finished).collect();
        finished.sort_by(|a, b| a.issued_at.cmp(&b.issued_at).then_with(|| a.rec_id.cmp(&b.rec_id)));
        let mut h = TrainingHistory::new();
        for r in finished {
            let rating = r.rating.ok_or_else(|| Error::validation("rating", "finished without rating"))?;
            h.push(r.feature_vector.cast(), normalize_rating(rating as i64)?);
        }
        Ok(h)
    }
}

pub fn loss<T: Scalar>(p: &PreferenceVector<T>, history: &TrainingHistory<T>) -> T {
    history.items.iter().map(|(x, y)| (p.dot(x) - *y).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UpdateParams {
    /// Largest step taken for any single rated item.
    pub step: f64,
    pub epochs: usize,
    /// Stop when one epoch improves the loss by less than this.
    pub tol: f64,
}

impl Default for UpdateParams {
    fn default() -> Self {
        UpdateParams { step: 0.05, epochs: 50, tol: 1e-6 }
    }
}

impl UpdateParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("preference.step must be positive, got {}", self.step)));
        }
        if !(self.tol >= 0.0) {
            return Err(Error::Config(format!("preference.tol must be >= 0, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome<T> {
    pub preference: PreferenceVector<T>,
    pub initial_loss: T,
    pub final_loss: T,
    /// Loss after each accepted epoch, starting with the initial loss.
    pub trace: Vec<T>,
}

/// Backtracking gives up once the step has been halved this many times.
const MAX_HALVINGS: u32 = 40;

/// One pass over the history in order. Each item moves P along the negative
/// subgradient of its own term `|P.X - Y|`, by at most `step` and never past
/// the point where that residual reaches zero, then projects onto [0,1].
fn epoch_pass<T: Scalar>(p: &PreferenceVector<T>, history: &TrainingHistory<T>, step: T) -> PreferenceVector<T> {
    let mut w: [T; DIM] = *p.values();
    for (x, y) in &history.items {
        let r = crate::scalar::dot(&w, &x.values) - *y;
        if r == T::zero() {
            continue;
        }
        let nx = x.norm_squared();
        if nx == T::zero() {
            continue;
        }
        let t = step.min(r.abs() / nx) * r.signum();
        for (wi, &xi) in w.iter_mut().zip(&x.values) {
            *wi = (*wi - t * xi).clamp_unit();
        }
    }
    PreferenceVector::clamped(w)
}

/// Projected subgradient descent on the absolute-residual loss.
///
/// An epoch that would raise the loss is retried with half the step, so the
/// loss never increases from one epoch to the next and the returned loss is at
/// most the initial one. Empty history returns `p` unchanged.
pub fn update_preference<T: Scalar>(
    p: &PreferenceVector<T>,
    history: &TrainingHistory<T>,
    params: &UpdateParams,
) -> UpdateOutcome<T> {
    let initial = loss(p, history);
    let mut out = UpdateOutcome { preference: *p, initial_loss: initial, final_loss: initial, trace: vec![initial] };
    if history.is_empty() {
        return out;
    }
    let tol = T::lit(params.tol);
    let mut step = T::lit(params.step);
    let mut current = *p;
    let mut current_loss = initial;

    'epochs: for _ in 0..params.epochs {
        let mut halvings = 0;
        let (candidate, candidate_loss) = loop {
            let c = epoch_pass(&current, history, step);
            let l = loss(&c, history);
            if l <= current_loss {
                break (c, l);
            }
            halvings += 1;
            if halvings > MAX_HALVINGS {
                break 'epochs;
            }
            step = step / T::lit(2.0);
        };
        let improvement = current_loss - candidate_loss;
        current = candidate;
        current_loss = candidate_loss;
        out.trace.push(current_loss);
        if improvement < tol {
            break;
        }
    }
    out.preference = current;
    out.final_loss = current_loss;
    out
}
