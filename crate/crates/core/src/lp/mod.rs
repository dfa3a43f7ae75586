pub mod relaxation;
pub mod simplex;

pub use relaxation::{solve_relaxation, support_graph, ClientDecomposition, DualSolution, FractionalSolution, LpOutput, SupportGraph};
