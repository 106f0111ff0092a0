#include "polykin/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace polykin {

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian; big-endian hosts need byte swaps");

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("snapshot: truncated file");
  return v;
}

constexpr char kMagic[4] = {'P', 'K', 'S', 'N'};

}  // namespace

void Snapshot::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("snapshot: cannot open " + path);
  out.write(kMagic, 4);
  put<std::uint32_t>(out, version);
  put<std::uint64_t>(out, config_hash);
  put<double>(out, t);
  put<std::uint32_t>(out, std::uint32_t(arrays.size()));
  for (const auto& [name, arr] : arrays) {
    put<std::uint32_t>(out, std::uint32_t(name.size()));
    out.write(name.data(), std::streamsize(name.size()));
    put<std::uint32_t>(out, std::uint32_t(arr.dims.size()));
    std::uint64_t total = 1;
    for (auto d : arr.dims) {
      put<std::uint64_t>(out, d);
      total *= d;
    }
    if (total != arr.data.size())
      throw std::runtime_error("snapshot: dims/data mismatch for " + name);
    out.write(reinterpret_cast<const char*>(arr.data.data()),
              std::streamsize(arr.data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("snapshot: write failure on " + path);
}

Snapshot Snapshot::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("snapshot: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("snapshot: bad magic in " + path);
  Snapshot s;
  s.version = get<std::uint32_t>(in);
  if (s.version != 1)
    throw std::runtime_error("snapshot: unsupported version in " + path);
  s.config_hash = get<std::uint64_t>(in);
  s.t = get<double>(in);
  auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    auto name_len = get<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    auto ndims = get<std::uint32_t>(in);
    Array arr;
    std::uint64_t total = 1;
    for (std::uint32_t d = 0; d < ndims; ++d) {
      arr.dims.push_back(get<std::uint64_t>(in));
      total *= arr.dims.back();
    }
    arr.data.resize(total);
    in.read(reinterpret_cast<char*>(arr.data.data()),
            std::streamsize(total * sizeof(double)));
    if (!in) throw std::runtime_error("snapshot: truncated array in " + path);
    s.arrays.emplace(std::move(name), std::move(arr));
  }
  return s;
}

}  // namespace polykin
