//! Metric approximate subgroups: rough covers, the counting lemmas,
//! growth across scales, commensurable subgroups and filtrations.

mod cover;
mod filtration;
mod lemmas;
mod scales;
mod subgroup;

pub use cover::{
    commensurable, is_metric_approx_subgroup, rough_cover, ApproxSubgroupCheck, CenterPool, Commensurability,
    CoverCertificate,
};
pub use lemmas::{
    discretisation_counting_check, disjoint_translate_family, infinitesimal_chain_check, local_packing_check,
    product_thickening_chain, thickening_radii, TranslateFamily,
};
pub use scales::{dyadic_power_floor, growth_condition, select_scales, GrowthReport, GrowthTarget, ScaleSelection};
pub use filtration::{filtration_check, Filtration, FiltrationReport, PropertyCase, PropertyResult};
pub use subgroup::{find_commensurable_subgroup, SubgroupCandidate, SubgroupSearch, MAX_GENERATORS, MAX_SUBGROUPS};
