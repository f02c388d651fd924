//! Bidding clubs for first-price auctions.
//!
//! A bidding club is a coordinator-run coalition: members declare their
//! valuations to the coordinator, which keeps only the highest declaration,
//! forwards a shaded bid to the main auction and collects a side payment from
//! the member if that bid wins. The crate provides
//!
//! - valuation and participant-count distributions, including the club-induced
//!   posterior over the number of bidders ([`distributions`]),
//! - symmetric equilibrium bids for a known and for a stochastic number of
//!   bidders ([`bid_engine`]),
//! - first-price, participation-revelation and composed mechanisms plus a
//!   common-random-numbers best-response search ([`mechanisms`]),
//! - the coordinator protocol ([`club_protocol`]),
//! - environment sampling ([`environment`]),
//! - Monte Carlo and exact verification experiments ([`experiments`]),
//! - config loading, reporting and table export for the `bidclub` binary ([`cli`]).

pub mod bid_engine;
pub mod cli;
pub mod club_protocol;
pub mod distributions;
pub mod environment;
mod error;
pub mod experiments;
pub mod mechanisms;
pub mod quadrature;
pub mod rng;

pub use bid_engine::{BidEngine, BidFunction, CountModel, MixtureRule};
pub use club_protocol::{ClubState, Coordinator, Response, Settlement};
pub use distributions::{ClubSizeDistribution, CountDistribution, ValuationDistribution};
pub use environment::{AgentType, AuctionInstance, EnvironmentConfig};
pub use error::{Error, Result};
pub use mechanisms::{AgentId, AuctionOutcome, Bid, PaymentRule};
