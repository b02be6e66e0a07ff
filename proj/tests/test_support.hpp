#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "honeyfilter/corpus.hpp"

namespace testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(HF_FIXTURES) / name;
}

// Fresh directory under the build tree, removed first if it exists.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::path(HF_SCRATCH) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline honeyfilter::PasswordCorpus fixture_corpus(std::size_t limit = 0) {
  auto c = honeyfilter::load_passwords(fixture("public_style.txt"));
  if (limit && c.entries.size() > limit) c.entries.resize(limit);
  return c;
}

}  // namespace testing
