#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "qahyst/dynamics.hpp"

namespace qahyst {

/// One persisted readout: slice index, per-sample seed and packed spin signs.
struct SampleRecord {
  std::uint32_t slice_index = 0;
  std::uint64_t seed = 0;
  SpinConfiguration config;
};

/// Binary raw-sample file, little-endian:
///   "QAHS" | u32 version (1) | u32 spin_count
///   repeated: u32 slice_index | u64 seed | ceil(spin_count / 8) bytes,
///             bit (i % 8) of byte (i / 8) set when spin i is +1.
class SampleWriter {
 public:
  SampleWriter(const std::string& path, std::size_t spin_count);
  void append(const SampleRecord& record);
  void append(const SampleSet& set, std::size_t max_records);
  void flush();

 private:
  std::ofstream out_;
  std::size_t spin_count_;
};

std::vector<SampleRecord> read_samples(const std::string& path);

/// Records of one slice, in file order.
std::vector<SpinConfiguration> samples_for_slice(const std::vector<SampleRecord>& records, std::uint32_t slice_index);

}  // namespace qahyst
