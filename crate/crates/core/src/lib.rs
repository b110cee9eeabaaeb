//! Design of birefringent phase-matched nonlinear waveguides and simulation
//! of the photon-pair and heralded single-photon statistics they produce.

pub mod analysis;
pub mod dispersion;
pub mod kvfile;
pub mod montecarlo;
pub mod phasematch;
pub mod photonstats;
pub mod report;
pub mod roots;

pub use analysis::{analyze, AnalysisOptions, AnalysisReport};
pub use dispersion::{load_material, DispersionError, MaterialDispersion, PropagationAngle};
pub use montecarlo::{generate_tags, Channel, PerChannel, SimError, SourceModel, TagStream};
pub use phasematch::{PhaseMatchError, PhaseMatchSolution, WaveguideConfig};
pub use photonstats::{CountRates, Estimate, LossBudget, SpdcMetrics, StatsError};
