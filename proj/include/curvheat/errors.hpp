#pragma once

#include <stdexcept>
#include <string>

namespace curvheat {

// Bad numeric input (non-finite values, out-of-range parameters).
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// Result not representable (overflow of an exp-scale intermediate).
struct range_error : std::range_error {
    using std::range_error::range_error;
};

// Structured input failed schema or invariant checks (manifests, configs).
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ill-conditioned linear algebra (non-PD Gram matrix, rank-deficient fit).
struct conditioning_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numerical cross-check between two independent routes failed.
struct oracle_error : std::logic_error {
    using std::logic_error::logic_error;
};

// A verified inequality or decay order does not hold.
struct verification_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace curvheat
