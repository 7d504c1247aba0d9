//! Ground-truth deformation oracle: Euler-Bernoulli beams for bridges,
//! a Winkler foundation for foam, and the sample/dataset generators built
//! on top of them.

mod beam;
mod dataset;
mod foam;
mod material;
mod scene;

pub use beam::{beam_deflection, beam_deflection_fd, BeamSpec, DeflectionProfile, LoadCase};
pub use dataset::{
    generate_dataset, meta_path, read_meta, write_meta, Dataset, DatasetConfig, Family,
    GeneratedDataset, SampleMeta, Split,
};
pub use foam::{apply_settlement, foam_indentation, Footprint, PressurePatch};
pub use material::{
    MaterialKind, MaterialSpec, ALUMINIUM_MODULUS, FOAM_FOUNDATION_MODULUS, FOAM_MODULUS,
    PLYWOOD_MODULUS,
};
pub use scene::{
    generate_sample, BeamScene, BinTable, FoamScene, Sample, Scene, WheelContact, WheelKind,
    GRAVITY, PAYLOAD_MASS, ROBOT_MASS,
};
