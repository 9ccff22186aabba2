#pragma once

#include <stdexcept>
#include <string>

namespace relsv {

/// Base class for every error raised by the engine.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operands or profiles that do not fit together (mismatched truncation,
/// wrong regime, out-of-range index).
class structural_error : public error {
public:
    using error::error;
};

class unsupported_parameter : public error {
public:
    using error::error;
};

/// A negative power of t survived where the non-equivariant limit was taken.
class limit_error : public error {
public:
    using error::error;
};

/// A configured enumeration or table bound was exceeded.
class resource_error : public error {
public:
    using error::error;
};

class calibration_error : public error {
public:
    using error::error;
};

class incomplete_table : public error {
public:
    using error::error;
};

class rank_deficient : public error {
public:
    using error::error;
};

class inconsistent_system : public error {
public:
    using error::error;
};

class consistency_error : public error {
public:
    using error::error;
};

} // namespace relsv
