#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace polykin {

/// Binary state snapshot: magic "PKSN", version 1, little-endian payload of
/// named f64 arrays. Round trips are bit-identical.
struct Snapshot {
  std::uint32_t version = 1;
  std::uint64_t config_hash = 0;
  double t = 0.0;

  struct Array {
    std::vector<std::uint64_t> dims;
    std::vector<double> data;
  };
  std::map<std::string, Array> arrays;

  void save(const std::string& path) const;
  static Snapshot load(const std::string& path);
};

}  // namespace polykin
