pub mod algebra;
pub mod expansion;
pub mod tiling;
pub mod spectrum;
pub mod output;
pub mod pipeline;
