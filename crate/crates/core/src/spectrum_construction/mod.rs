//! Building `w_1, w_2, …` step by step and checking each step independently.

mod engine;
mod schedule;
mod theta;
mod verify;

pub use engine::{construct, inductive_step, seed_construction, ConstructionState, StepRecord};
pub use schedule::{make_schedule, validate_step, ParameterSchedule, Phi, ScheduleMode, StepParams};
pub use theta::theta_enclosure;
pub use verify::{
    condition4_certified, condition4_enumerated, condition5_certified, condition5_enumerated, is_condition4_point,
    offset_sq, radius_minus_sq, radius_sq, section_points, verify_conditions, CertMode, CondStatus, ConditionReport,
    ConditionResult,
};
