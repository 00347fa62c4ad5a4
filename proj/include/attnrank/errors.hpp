#pragma once

#include <stdexcept>
#include <string>

namespace attnrank {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// shape or size disagreement between operands
struct DimensionError : Error {
    using Error::Error;
};

// non-finite values where finite ones are required
struct NumericError : Error {
    using Error::Error;
};

// invalid configuration value (bounds, ratios, sizes)
struct ConfigError : Error {
    using Error::Error;
};

// malformed, empty or inconsistent data
struct DataError : Error {
    using Error::Error;
};

// file read/write failure
struct IoError : Error {
    using Error::Error;
};

// loss became non-finite; message names the epoch and batch
struct TrainingDiverged : Error {
    int epoch;
    int batch;
    TrainingDiverged(int epoch_, int batch_, const std::string& what_)
        : Error(what_), epoch(epoch_), batch(batch_) {}
};

// gradient check could not be run (e.g. non-deterministic loss)
struct CheckInvalidError : Error {
    using Error::Error;
};

}  // namespace attnrank
