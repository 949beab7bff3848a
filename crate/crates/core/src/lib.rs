//! Turn an instruction plus a scene annotation into a PDDL problem
//! description, plan for it, repair it from planner feedback, and score
//! the result against ground truth.

pub mod pddl;
pub mod planner;
pub mod validator;
pub mod scene;
pub mod backends;
pub mod dataset;
pub mod par;
pub mod pipeline;
pub mod metrics;
