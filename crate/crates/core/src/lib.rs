//! Association policies for heterogeneous wireless networks.
//!
//! Users of several radio-condition classes arrive at a network of
//! overlapping systems (for instance HSDPA and LTE) and pick a system based
//! on aggregated load information broadcast by the network. This crate
//! builds the continuous-time Markov chain induced by any such policy,
//! derives each user's expected transferred volume from absorbing-chain
//! solves, and searches the policy space for global optima and pure Nash
//! equilibria. On top of that it lets the operator tune the broadcast
//! thresholds to minimize blocking at equilibrium, and it ships an
//! independent discrete-event simulator used to cross-check the analysis.
//!
//! ```
//! use hetassoc::{fixtures, AggregationScheme, Game, GameOptions, NashMode, StateSpace};
//!
//! let config = fixtures::small_hetnet();
//! let space = StateSpace::enumerate(&config).unwrap();
//! let scheme = AggregationScheme::from_config(&config);
//! let game = Game::new(&space, &scheme, GameOptions::default()).unwrap();
//! let nash = game.find_nash(NashMode::BestResponse).unwrap();
//! for eq in &nash.equilibria {
//!     assert!(game.certify(&eq.policy).unwrap().holds);
//! }
//! ```

pub mod aggregation;
pub mod config;
pub mod control;
pub mod ctmc;
pub mod error;
pub mod exec;
pub mod fixtures;
pub mod game;
mod linalg;
pub mod report;
pub mod rule;
pub mod sim;
pub mod state_space;
pub mod sweep;
pub mod transient;

pub use aggregation::{label_of, system_load, AggregationScheme, Labeling, LoadLabel, LoadLevel};
pub use config::{load_config, ClassSpec, NetworkConfig, SharingScope, SystemSpec};
pub use control::{optimize_thresholds, threshold_lattice, ControlOptions, ControlResult, SelectionRule};
pub use ctmc::{
    blocking_by_label, build_generator, overall_blocking, solve_steady_state, BlockingNumerator,
    Generator, SteadyState,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use game::{
    evaluate_baseline, BaselineReport, DeviationPayoff, Game, GameOptions, NashMode, NashSearch,
    PolicyEvaluation,
};
pub use rule::{AdmissionMode, AssignmentRule, Baseline, Policy};
pub use sim::{cross_check, simulate, CrossCheck, SimOptions, SimReport};
pub use state_space::{is_feasible, throughput, NetworkState, StateSpace};
pub use transient::{solve_volume, UtilityTable};
