//! Episode orchestration, training schedules and the cross-play league.

pub mod episode;
pub mod league;
pub mod record;
pub mod replay;
pub mod train;

pub use episode::{run_episode, EpisodeRecord, EpisodeSeeds, MatchSpec, PartySummary, StepEntry};
pub use league::{
    episode_seeds, league_specs, run_league, run_match, GeneratorSource, LeagueConfig, LeagueError, PolicyKind,
    PolicyPool,
};
pub use record::{read_records, to_jsonl, write_record, RecordError};
pub use replay::{extract_sequences, render_trace, Fixture, FixtureError, DISCOVERY_LOOP};
pub use train::{train_bandit, train_ppo, CurveRow, TrainConfig, TrainError, TrainedBandit, TrainedPpo};
