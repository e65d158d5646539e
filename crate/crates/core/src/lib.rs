//! Anti-spoofing evaluation toolkit.
//!
//! * [`protocol`]: protocol and score file formats.
//! * [`metrics`]: DET curves, EER, ASV operating point, β and the minimum
//!   normalized tandem detection cost function (t-DCF).
//! * [`features`]: CQCC and LFCC front-ends.
//! * [`gmm`]: diagonal-covariance GMM back-end trained with EM.
//! * [`pa_sim`]: image-source replay simulation for physical access.

pub mod features;
pub mod gmm;
pub mod metrics;
pub mod pa_sim;
pub mod protocol;
