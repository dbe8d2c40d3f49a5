#pragma once

#include <stdexcept>
#include <string>

namespace ild {

/// Input file missing or unreadable, or output could not be written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schema file is malformed or does not match the input columns.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A data cell could not be encoded under the schema.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Metric requested on a dataset with no observations.
class UndefinedMetricError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// ROC quantities requested on a dataset that has only one class.
class DegenerateClassError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Caller broke a precondition (length mismatch, unsorted points, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

}  // namespace detail
}  // namespace ild
