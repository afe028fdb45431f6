#include "qahyst/sample_io.hpp"

#include <array>
#include <cstring>

#include <fmt/format.h>

#include "qahyst/errors.hpp"

namespace qahyst {

namespace {

constexpr char kMagic[4] = {'Q', 'A', 'H', 'S'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T value) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<char>((value >> (8 * k)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <class T>
bool get(std::istream& in, T& value) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  value = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) value |= static_cast<T>(bytes[k]) << (8 * k);
  return true;
}

}  // namespace

SampleWriter::SampleWriter(const std::string& path, std::size_t spin_count)
    : out_(path, std::ios::binary | std::ios::trunc), spin_count_(spin_count) {
  if (!out_) throw IoError("cannot open sample file '" + path + "' for writing");
  out_.write(kMagic, 4);
  put<std::uint32_t>(out_, kVersion);
  put<std::uint32_t>(out_, static_cast<std::uint32_t>(spin_count));
}

void SampleWriter::append(const SampleRecord& r) {
  if (r.config.size() != spin_count_) throw ValidationError("sample length does not match file spin count");
  put<std::uint32_t>(out_, r.slice_index);
  put<std::uint64_t>(out_, r.seed);
  std::vector<char> packed((spin_count_ + 7) / 8, 0);
  for (std::size_t i = 0; i < spin_count_; ++i)
    if (r.config.spins[i] > 0) packed[i / 8] = static_cast<char>(packed[i / 8] | (1 << (i % 8)));
  out_.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!out_) throw IoError("write to sample file failed");
}

void SampleWriter::append(const SampleSet& set, std::size_t max_records) {
  for (std::size_t k = 0; k < set.samples.size() && k < max_records; ++k)
    append(SampleRecord{static_cast<std::uint32_t>(set.slice_index), set.seeds[k], set.samples[k]});
}

void SampleWriter::flush() {
  out_.flush();
  if (!out_) throw IoError("flush of sample file failed");
}

std::vector<SampleRecord> read_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open sample file '" + path + "'");
  char magic[4];
  std::uint32_t version = 0, n = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw ParseError("not a raw sample file: " + path);
  if (!get(in, version) || version != kVersion) throw ParseError(fmt::format("unsupported sample file version {}", version));
  if (!get(in, n) || n == 0) throw ParseError("sample file has no spin count");

  std::vector<SampleRecord> out;
  std::vector<unsigned char> packed((n + 7) / 8);
  for (;;) {
    SampleRecord r;
    if (!get(in, r.slice_index)) break;
    if (!get(in, r.seed) || !in.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size())))
      throw ParseError(fmt::format("truncated record {} in {}", out.size(), path));
    r.config.spins.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.config.spins[i] = (packed[i / 8] >> (i % 8)) & 1 ? 1 : -1;
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<SpinConfiguration> samples_for_slice(const std::vector<SampleRecord>& records, std::uint32_t slice_index) {
  std::vector<SpinConfiguration> out;
  for (const auto& r : records)
    if (r.slice_index == slice_index) out.push_back(r.config);
  return out;
}

}  // namespace qahyst
