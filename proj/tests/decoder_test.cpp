// Hierarchical row decoder: predecode slicing, latch union, expansion law.
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "pudsim/decoder.hpp"
#include "pudsim/errors.hpp"
#include "pudsim/profile.hpp"
#include "pudsim/rng.hpp"

using namespace pudsim;

namespace {

// Independent oracle: the rows driven by the union of two activations are
// every combination that picks each predecoder field's value from either
// address, restricted to the populated region.
std::set<int> brute_force_union(const DeviceProfile& p, int a, int b) {
  const FieldValues fa = predecode(p, a);
  const FieldValues fb = predecode(p, b);
  const int nfields = static_cast<int>(fa.size());
  std::set<int> rows;
  for (int mask = 0; mask < (1 << nfields); ++mask) {
    FieldValues pick(fa.size());
    for (int f = 0; f < nfields; ++f) pick[f] = (mask >> f) & 1 ? fb[f] : fa[f];
    const int row = compose_local(p, pick);
    if (row < p.rows_per_subarray) rows.insert(row);
  }
  return rows;
}

int differing_fields(const DeviceProfile& p, int a, int b) {
  const FieldValues fa = predecode(p, a);
  const FieldValues fb = predecode(p, b);
  int k = 0;
  for (std::size_t f = 0; f < fa.size(); ++f) k += fa[f] != fb[f] ? 1 : 0;
  return k;
}

}  // namespace

TEST_CASE("split and join addresses") {
  const DeviceProfile p = make_profile("mfrH-512");
  const AddressParts parts = split_address(p, 1234);
  CHECK(parts.subarray == 2);
  CHECK(parts.local == 210);
  CHECK(join_address(p, parts) == 1234);
  CHECK_THROWS_AS(split_address(p, -1), PlanError);
  CHECK_THROWS_AS(split_address(p, 65536), PlanError);
}

TEST_CASE("rows behind the last complete subarray are not addressable") {
  const DeviceProfile p = make_profile("mfrH-640");
  CHECK(split_address(p, 102 * 640 - 1).subarray == 101);
  CHECK_THROWS_AS(split_address(p, 102 * 640), PlanError);  // partial tail
}

TEST_CASE("predecode slices the local address least significant field first") {
  const DeviceProfile p = make_profile("mfrH-512");
  CHECK(predecode(p, 127) == FieldValues{1, 3, 3, 3, 0});
  CHECK(predecode(p, 128) == FieldValues{0, 0, 0, 0, 1});
  CHECK(predecode(p, 0) == FieldValues{0, 0, 0, 0, 0});
  CHECK(predecode(p, 511) == FieldValues{1, 3, 3, 3, 3});
  CHECK_THROWS_AS(predecode(p, 512), PlanError);
  CHECK_THROWS_AS(predecode(p, -1), PlanError);
}

TEST_CASE("compose inverts predecode over the whole window") {
  for (const char* name : {"mfrH-512", "mfrH-640", "demo-8"}) {
    const DeviceProfile p = make_profile(name);
    for (int local = 0; local < p.decoder_window_rows; ++local) {
      CHECK(compose_local(p, predecode(p, local)) == local);
    }
  }
  const DeviceProfile p = make_profile("demo-8");
  CHECK_THROWS_AS(compose_local(p, FieldValues{0, 0, 0}), PlanError);
}

TEST_CASE("single activation latches one value per field") {
  const DeviceProfile p = make_profile("mfrH-512");
  const LatchState latch = latch_single(p, 127);
  CHECK(latch.fields.size() == 5);
  CHECK(latch.drive_count() == 1);
  CHECK(expand_activation(p, latch) == std::vector<int>{127});
  CHECK(expand_activation(p, LatchState{}).empty());
}

TEST_CASE("latch merge keeps existing values and ignores duplicates") {
  const DeviceProfile p = make_profile("mfrH-512");
  LatchState latch = latch_single(p, 127);
  latch_merge(latch, predecode(p, 127));
  CHECK(latch.drive_count() == 1);
  latch_merge(latch, predecode(p, 128));
  CHECK(latch.drive_count() == 32);  // every field differs between 127 and 128
  LatchState other = latch_single(p, 0);
  CHECK_THROWS_AS(latch_merge(other, FieldValues{0, 0}), PlanError);
}

TEST_CASE("frozen union examples") {
  const DeviceProfile p = make_profile("mfrH-512");
  const std::vector<int> rows = union_rows(p, 127, 128);
  CHECK(rows.size() == 32);
  CHECK(std::binary_search(rows.begin(), rows.end(), 127));
  CHECK(std::binary_search(rows.begin(), rows.end(), 128));

  const DeviceProfile demo = make_profile("demo-8");
  CHECK(union_rows(demo, 0, 7) == std::vector<int>{0, 1, 6, 7});
  CHECK(union_rows(demo, 3, 3) == std::vector<int>{3});
  CHECK(union_rows(demo, 0, 1) == std::vector<int>{0, 1});
}

TEST_CASE("union size is two to the number of differing fields (exhaustive demo-8)") {
  const DeviceProfile p = make_profile("demo-8");
  for (int a = 0; a < 8; ++a) {
    for (int b = 0; b < 8; ++b) {
      const std::vector<int> rows = union_rows(p, a, b);
      CHECK(rows.size() == (1u << differing_fields(p, a, b)));
      const std::set<int> expected = brute_force_union(p, a, b);
      CHECK(std::set<int>(rows.begin(), rows.end()) == expected);
    }
  }
}

TEST_CASE("union matches the brute-force field-combination oracle (sampled mfrH-512)") {
  const DeviceProfile p = make_profile("mfrH-512");
  Rng rng(2024);
  for (int i = 0; i < 2000; ++i) {
    const int a = static_cast<int>(rng.below(512));
    const int b = static_cast<int>(rng.below(512));
    const std::vector<int> rows = union_rows(p, a, b);
    CHECK(rows.size() == (1u << differing_fields(p, a, b)));
    CHECK(std::set<int>(rows.begin(), rows.end()) == brute_force_union(p, a, b));
  }
}

TEST_CASE("expansion drops rows past the populated region") {
  const DeviceProfile p = make_profile("mfrH-640");
  // 0 and 1023 differ in all five fields; combinations with the top field
  // at 3 land at >= 768 and do not exist.
  const std::vector<int> rows = union_rows(p, 0, 1023);
  CHECK(rows.size() == 16);
  for (int r : rows) CHECK(r < 640);
  // A pair whose expansion stays inside the populated region keeps all 32.
  const std::vector<int> full = union_rows(p, 0, 341);  // fields {1,1,1,1,1}
  CHECK(full.size() == 32);
  for (int r : full) CHECK(r < 640);
}

TEST_CASE("find_pair_for_count returns exact activation counts") {
  Rng rng(7);
  for (const char* name : {"mfrH-512", "mfrH-640", "mfrM-1024"}) {
    const DeviceProfile p = make_profile(name);
    for (int n : {1, 2, 4, 8, 16, 32}) {
      const ApaPair pair = find_pair_for_count(p, 1, n, rng);
      const AddressParts first = split_address(p, pair.first_row);
      const AddressParts second = split_address(p, pair.second_row);
      CHECK(first.subarray == 1);
      CHECK(second.subarray == 1);
      CHECK(union_rows(p, first.local, second.local).size() == static_cast<std::size_t>(n));
    }
  }
}

TEST_CASE("find_pair_for_count on the toy decoder") {
  const DeviceProfile p = make_profile("demo-8");
  Rng rng(3);
  for (int n : {1, 2, 4}) {
    const ApaPair pair = find_pair_for_count(p, 0, n, rng);
    CHECK(union_rows(p, pair.first_row, pair.second_row).size() ==
          static_cast<std::size_t>(n));
  }
  CHECK_THROWS_AS(find_pair_for_count(p, 0, 8, rng), PlanError);   // only 2 fields
  CHECK_THROWS_AS(find_pair_for_count(p, 0, 3, rng), PlanError);   // not a power of two
  CHECK_THROWS_AS(find_pair_for_count(p, 99, 2, rng), PlanError);  // bad subarray
}
