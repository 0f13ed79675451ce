//! Bell nonlocality with two dichotomic settings per party: observables,
//! correlators and behaviors, Bell functionals, exact local-polytope
//! membership, see-saw optimization and the nonlocality search.

pub mod behavior;
pub mod chsh;
pub mod correlators;
pub mod functional;
pub mod lp;
pub mod observable;
pub mod plane;
pub mod polytope;
pub mod search;
pub mod seesaw;

pub use behavior::{behavior, BehaviorTable};
pub use chsh::{
    chsh_value, gme_witness_s, heralded_tripartite_i, horodecki_chsh_max, max_chsh, optimize_gme_witness, tripartite_i,
    GmeSettings, GmeWitness, HorodeckiResult,
};
pub use correlators::{correlators, PairTensor};
pub use functional::{BellFunctional, Term};
pub use observable::{DichotomicObservable, MeasurementScenario};
pub use polytope::{local_polytope_membership, LocalDecomposition, Membership, NonlocalWitness};
pub use search::{nonlocality_search, search, NonlocalCertificate, SearchConfig, SearchGoal, SearchOutcome, SearchReport};
pub use seesaw::seesaw_maximize;
