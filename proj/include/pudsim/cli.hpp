// Command-line front end.  The entry point lives in the library so tests
// can drive the full tool in-process and compare output trees byte for
// byte.
//
// Subcommands: simulate, sweep, characterize, bench, destroy, discover.
// Exit codes: 0 success, 1 simulation/runtime failure, 2 usage or
// configuration error.
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pudsim/harness.hpp"

namespace pudsim::cli {

int run(const std::vector<std::string>& args);

// 64-bit FNV-1a, used for the manifest's config hash.
std::uint64_t fnv1a64(std::string_view text);

// Resolve a --profile argument: preset name, JSON file path, or a JSON
// file named <arg>.json under $PUDSIM_PROFILE_DIR.
DeviceProfile load_profile_arg(const std::string& arg);

// The full default characterization plan (16 banks x 3 subarrays x 100
// groups over the five activation counts).
SweepConfig default_characterization_config();

}  // namespace pudsim::cli
