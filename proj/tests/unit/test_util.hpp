#pragma once

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "segnmt/rnnenc.hpp"

namespace segnmt::test {

inline GruEncDecParams tiny_model(std::size_t src_vocab, std::size_t tgt_vocab,
                                  std::uint64_t seed, std::size_t hidden = 6,
                                  std::size_t embedding = 4, double scale = 0.5) {
  ModelDims dims{embedding, hidden, src_vocab, tgt_vocab};
  return GruEncDecParams::uniform(dims, scale, seed);
}

// Fresh directory under the system temp path, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("segnmt_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace segnmt::test
