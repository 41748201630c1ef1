//! Batch front end: channel spec strings, sweep configs with CSV resume,
//! and line-plot SVG rendering.

mod csvio;
mod plot;
mod presets;
mod spec;
mod sweep;

pub use csvio::{emit_rows, format_sig12, parse_rows, read_csv, CSV_HEADER};
pub use plot::render_plot;
pub use presets::{preset, preset_names};
pub use spec::{parse_channel_spec, ChannelSpec};
pub use sweep::{run_sweep, ResultRow, SweepConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("render error: {0}")]
    Render(String),

    #[error(transparent)]
    Comb(#[from] qstrat_comb::CombError),

    #[error(transparent)]
    Program(#[from] qstrat_programs::ProgramError),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
