//! Experiment runner, file formats and reports for `orderbound`.

pub mod commands;
pub mod config;
pub mod io;
pub mod report;

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const ERROR: i32 = 1;
    /// The problem has no feasible point.
    pub const INFEASIBLE: i32 = 2;
}

/// Maps an error to its exit code by looking for an infeasibility cause.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let infeasible = err.chain().any(|e| {
        matches!(
            e.downcast_ref::<orderbound::Error>(),
            Some(orderbound::Error::Infeasible(_) | orderbound::Error::InfeasibleRow { .. })
        )
    });
    if infeasible {
        exit::INFEASIBLE
    } else {
        exit::ERROR
    }
}
