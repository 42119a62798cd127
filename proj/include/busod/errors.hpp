#pragma once

#include <stdexcept>
#include <string>

namespace busod {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration: missing files, degenerate geometry, invalid thresholds.
struct ConfigError : Error {
    using Error::Error;
};

// Input records violate the declared schema (dimension drift, bad CSV row).
struct InputSchemaError : Error {
    using Error::Error;
};

// Well-formed input that is internally inconsistent.
struct DataError : Error {
    using Error::Error;
};

struct OcrParseError : Error {
    explicit OcrParseError(const std::string& raw)
        : Error("unparseable overlay string: \"" + raw + "\""), raw_string(raw) {}
    std::string raw_string;
};

struct TimelineUnresolvable : DataError {
    using DataError::DataError;
};

struct ClockInconsistency : DataError {
    using DataError::DataError;
};

struct DegenerateEmbedding : DataError {
    using DataError::DataError;
};

struct HybridStreamMissing : DataError {
    using DataError::DataError;
};

struct MissingQueueRegion : ConfigError {
    using ConfigError::ConfigError;
};

struct MetricUnavailable : DataError {
    using DataError::DataError;
};

}  // namespace busod
