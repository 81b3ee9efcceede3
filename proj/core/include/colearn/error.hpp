#pragma once

#include <stdexcept>
#include <string>

namespace colearn {

// Base class for everything thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration: unknown keys, invalid values, malformed config files.
// CLI exit code 1.
struct config_error : error {
    using error::error;
};

// Dataset ingestion problems: missing files, parse failures, cache
// mismatches. CLI exit code 2.
struct data_error : error {
    using error::error;
};

// API misuse caught at runtime: empty batches, empty metric inputs.
struct usage_error : error {
    using error::error;
};

// Shape disagreements between a parameter vector and the architecture it
// claims to belong to, including fingerprint mismatches on deserialization.
struct architecture_error : error {
    using error::error;
};

}  // namespace colearn
