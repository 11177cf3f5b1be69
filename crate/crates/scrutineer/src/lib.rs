//! Secure tallying for score-based voting rules.
//!
//! Voters split their ballots into additive secret shares, one per tallier;
//! the talliers aggregate the shares and run an honest-majority multiparty
//! computation that validates each hidden ballot and outputs the K winning
//! candidates. Nobody — voter, tallier, or observer — sees another ballot,
//! an intermediate value, or a final score.
//!
//! Module map:
//! - [`field`]: exact arithmetic in `Z_p`, tuned for Mersenne primes
//! - [`sharing`]: additive D-of-D ballot sharing and Shamir threshold shares
//! - [`rules`]: the five score rules behind one strategy trait, plus the
//!   plaintext tally/winner oracle and the on-disk formats
//! - [`transport`]: framed, MAC-authenticated channels (in-memory and TCP)
//! - [`mpc`]: the shared-circuit engine (multiply, open, compare, validate
//!   primitives) with full round/gate/byte accounting
//! - [`protocol`]: the end-to-end election: submission, validation,
//!   aggregation, resharing and secure top-K selection
//! - [`stats`]: chi-square helpers backing the secrecy checks

pub mod field;
pub mod mpc;
pub mod protocol;
pub mod rules;
pub mod sharing;
pub mod stats;
pub mod transport;
