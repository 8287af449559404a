mod common;

use common::{gradient_check_architecture, FD_TOLERANCE};
use updrs_core::architectures::ArchitectureId;

#[test]
fn backprop_matches_central_differences() {
    for arch in ArchitectureId::ALL {
        let r = gradient_check_architecture(arch, 20);
        println!(
            "{arch}: max relative error {:.3e} over {} parameters",
            r.max_relative_error, r.parameters
        );
        assert!(r.max_relative_error < FD_TOLERANCE, "{arch}: {r:?}");
    }
}
