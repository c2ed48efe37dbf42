#include "gifrank/common.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace gifrank {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint32_t fnv1a32(std::string_view bytes) {
  std::uint32_t h = 2166136261U;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 16777619U;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view stage_name) {
  return splitmix64(splitmix64(global_seed) ^ fnv1a64(stage_name));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("cannot open " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw Error("cannot write " + tmp);
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      throw Error("short write to " + tmp);
    }
  }
  std::filesystem::rename(tmp, path);
}

std::size_t Rng::uniform_index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_index: empty range");
  }
  const std::uint64_t range = n;
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % range + 1) % range;
  std::uint64_t x = engine_();
  while (x > limit) {
    x = engine_();
  }
  return static_cast<std::size_t>(x % range);
}

std::uint64_t schema_hash(const std::vector<std::string>& schema) {
  std::uint64_t h = fnv1a64("");
  for (const auto& name : schema) {
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  return h;
}

}  // namespace gifrank
