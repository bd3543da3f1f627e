#pragma once

#include <filesystem>
#include <functional>

#include <gtest/gtest.h>
#include <fstream>
#include <random>
#include <string>
#include <unistd.h>

#include "trollguard/error.hpp"
#include "trollguard/random.hpp"

namespace tgtest {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("trollguard-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Code of the trollguard::Error thrown by f; records a failure when nothing is thrown.
inline trollguard::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const trollguard::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "nothing thrown";
  return trollguard::ErrorCode::Io;
}

}  // namespace tgtest
