//! Partitions, symmetric-group characters (Murnaghan–Nakayama), stable
//! characters, Pieri and its inverse, finite-group data, wreath-product
//! characters, and the label expectations `E_η[·]`.

pub mod groups;
pub mod partitions;
pub mod symmetric;
pub mod wreath;

pub use groups::{all_perms, parse_group, CmSpec, FiniteGroupTable, GroupSpec, Perm};
pub use partitions::{parse_partition, partitions_of, Partition};
pub use symmetric::{
    class_data, induced_character_value, inverse_pieri_lhs, inverse_pieri_rhs, mn_character,
    mn_stable, pieri_decompose,
};
pub use wreath::{
    cycle_image_paths, e_eta_cm, e_eta_cm_generic, e_eta_table, winding_vector,
    wreath_character_eval, wreath_dim_poly, PartitionMap, Payload,
};
