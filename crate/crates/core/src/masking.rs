//! Keyed selection of masked positions and the per-step temporary texts.

use crate::error::{Result, StegoError};
use crate::key::SecretKey;
use crate::text::{slot_is_maskable, Slot, TokenSequence};

pub use crate::text::is_maskable;

/// Masked positions `i_1 < ... < i_s` selected at interval `f`.
///
/// Among the maskable positions of the text (ranked 0, 1, 2, ... from the
/// left), exactly those with `rank % interval == offset` are selected.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaskPlan {
    indices: Vec<usize>,
    interval: usize,
    offset: usize,
}

impl MaskPlan {
    /// Plan with explicit positions, for callers that pick positions
    /// themselves. Indices are sorted and deduplicated.
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        MaskPlan {
            indices,
            interval: 1,
            offset: 0,
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn interval(&self) -> usize {
        self.interval
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

pub fn plan_offset(interval: usize, key: &SecretKey) -> usize {
    (key.mask_hash() % interval as u64) as usize
}

pub fn plan_masks(text: &TokenSequence, interval: usize, key: &SecretKey) -> Result<MaskPlan> {
    if interval == 0 {
        return Err(StegoError::Config("masking interval must be >= 1".into()));
    }
    let offset = plan_offset(interval, key);
    Ok(plan_with_offset(text, interval, offset))
}

pub(crate) fn plan_with_offset(text: &TokenSequence, interval: usize, offset: usize) -> MaskPlan {
    let indices = text
        .iter()
        .enumerate()
        .filter(|(_, slot)| slot_is_maskable(slot))
        .enumerate()
        .filter(|(rank, _)| rank % interval == offset)
        .map(|(_, (index, _))| index)
        .collect();
    MaskPlan {
        indices,
        interval,
        offset,
    }
}

/// Temporary text for 0-based step `step`: positions from `step` onward in
/// the plan are masked, earlier planned positions keep whatever `work` holds.
pub fn temporary_text(work: &TokenSequence, plan: &MaskPlan, step: usize) -> Result<TokenSequence> {
    if step >= plan.len() {
        return Err(StegoError::StepOutOfRange {
            step,
            steps: plan.len(),
        });
    }
    let mut temp = work.clone();
    for &index in &plan.indices[step..] {
        temp.set(index, Slot::Mask)?;
    }
    Ok(temp)
}
