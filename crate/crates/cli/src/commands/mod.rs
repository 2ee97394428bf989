pub mod numeric;
pub mod symbolic;

use crate::args::{Cli, Command, Suite};
use crate::config::Outcome;
use crate::report::Report;

pub fn run(cli: &Cli) -> Outcome<Report> {
    let seed = cli.seed;
    let mut report = match &cli.command {
        Command::Table(a) => symbolic::table(a)?,
        Command::Critical(a) => symbolic::critical(a)?,
        Command::Derive(a) => symbolic::derive(a)?,
        Command::Principal(a) => symbolic::principal(a)?,
        Command::Verify { suite } => match suite {
            Suite::Invariance(a) => numeric::invariance(a, seed)?,
            Suite::Vanishing(a) => numeric::vanishing(a, seed)?,
            Suite::Eigenvalue(a) => numeric::eigenvalue(a, seed)?,
            Suite::Convergence(a) => numeric::convergence(a, seed)?,
        },
        Command::ProbeDim4(a) => numeric::probe_dim4(a, seed)?,
        Command::ProbeDim6(a) => numeric::probe_dim6(a, seed)?,
    };
    report.seed = seed;
    Ok(report)
}
