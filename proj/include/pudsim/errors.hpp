// Exception hierarchy shared across the simulator.  Every error raised by the
// library derives from pudsim::Error so callers can catch one type at the CLI
// boundary; the subtypes distinguish bad configuration, illegal command
// sequences, and operation plans that cannot be realized on the device.
#pragma once

#include <stdexcept>
#include <string>

namespace pudsim {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration: unknown preset, out-of-range parameter, malformed
// config file, unsupported environment point.
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Illegal command for the current bank state (e.g. READ while precharged,
// REFRESH while a row is open).
struct CommandError : Error {
  explicit CommandError(const std::string& what) : Error(what) {}
};

// An operation plan that cannot be realized: unsupported activation count,
// no room for the requested replication, addresses out of range.
struct PlanError : Error {
  explicit PlanError(const std::string& what) : Error(what) {}
};

}  // namespace pudsim
