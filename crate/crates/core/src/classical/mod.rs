//! Classical clock and pointer models in phase space.

mod coupling;
mod integrate;
mod internal;
mod kick;
mod margins;
mod model;
mod records;

pub use coupling::CouplingFunction;
pub use integrate::{integrate, Event, EventKind, Method, Parameter, Trajectory, EVENT_TOLERANCE};
pub use internal::{
    arnold_compare, internal_pointer_curve, internal_time_map, ArnoldComparison, InternalTimeMap, PointerCurve,
    PointerCurveModel,
};
pub use kick::classical_kick;
pub use margins::{
    approximate_margin, coupling_position_margin, energy_duration_margin, measurement_margins, observable_margin,
    pointer_product_margin, ApproximateInputs, CouplingPositionInputs, EnergyDurationInputs, Margin, MarginInputs,
    MeasurementReport, ObservableInputs, PointerProductInputs, DEFAULT_GOOD_THRESHOLD,
};
pub use model::{PairLabel, PhaseObservable, PhasePoint, ScenarioModel, SystemHamiltonian};
pub use records::{
    theta_arrival_record, total_energy_ideal, total_energy_real, EnergyRecord, ThetaRecord, THETA_CONVENTION,
};
