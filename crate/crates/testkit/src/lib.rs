//! Shared fixtures for lore's test suites.

pub mod fixture;
pub mod oracle;
pub mod scenario;
pub mod strategies;

pub use fixture::{FixtureRepo, EPOCH};

/// The reference Lore commit message, byte for byte.
pub const TOKEN_REFRESH_MESSAGE: &str = "\
Prevent silent session drops during long-running operations

The auth service returns inconsistent status codes on token
expiry, so the interceptor catches all 4xx responses and
triggers an inline refresh.

Constraint: Auth service does not support token introspection
Constraint: Must not add latency to non-expired-token paths
Rejected: Extend token TTL to 24h | security policy violation
Rejected: Background refresh on timer | race condition
Confidence: high
Scope-risk: narrow
Reversibility: clean
Directive: Error handling is intentionally broad (all 4xx)
  -- do not narrow without verifying upstream behavior
Tested: Single expired token refresh (unit)
Not-tested: Auth service cold-start > 500ms behavior
";
