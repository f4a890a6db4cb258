//! KKT residuals, certificate sequences and numerical checks of the
//! identities behind the convergence analysis.

mod certificates;
mod identities;
mod residual;

pub use certificates::{
    certificate_bundle, chain_identity_residuals, check_descent_inequality, write_certificate_csv, CertificateRecord,
    DescentSlack, ReferencePoint,
};
pub use identities::{check_operator_identities, identity_violations, IdentityReport};
pub use residual::{kkt_residual, kkt_residual_terms, objective_value};

pub(crate) use residual::residual_parts;
