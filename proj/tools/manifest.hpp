#ifndef PVSTAT_TOOLS_MANIFEST_HPP
#define PVSTAT_TOOLS_MANIFEST_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <mutex>
#include <string>
#include <vector>

#include <boost/version.hpp>
#include <openssl/evp.h>

#include "pvstat/io.hpp"
#include "pvstat/version.hpp"

namespace pvstat::cli {

inline std::string sha256_hex(const std::string& data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Collects every artifact a run writes; the manifest itself is written last.
class RunManifest {
public:
  RunManifest(std::filesystem::path out_dir, std::string command, io::json parameters)
      : out_dir_(std::move(out_dir)), command_(std::move(command)), parameters_(std::move(parameters)),
        started_(utc_timestamp()) {}

  void add_seed(std::uint64_t seed) {
    std::lock_guard lock(mutex_);
    seeds_.push_back(seed);
  }

  /// Atomically writes `content` to out_dir/relative and records its hash.
  void emit(const std::string& relative, const std::string& content) {
    io::write_atomic(out_dir_ / relative, content);
    std::lock_guard lock(mutex_);
    outputs_.push_back({relative, sha256_hex(content), content.size()});
  }

  std::filesystem::path write(const std::string& status) {
    std::lock_guard lock(mutex_);
    std::sort(outputs_.begin(), outputs_.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    std::sort(seeds_.begin(), seeds_.end());
    io::json outputs = io::json::array();
    for (const auto& o : outputs_) outputs.push_back({{"path", o.path}, {"sha256", o.sha256}, {"bytes", o.bytes}});
    io::json j = {{"command", command_},
                  {"parameters", parameters_},
                  {"seeds", seeds_},
                  {"versions",
                   {{"pvstat", pvstat::version},
                    {"compiler", compiler()},
                    {"boost", BOOST_LIB_VERSION},
                    {"cxx_standard", long(__cplusplus)}}},
                  {"started", started_},
                  {"finished", utc_timestamp()},
                  {"status", status},
                  {"outputs", outputs}};
    const auto path = out_dir_ / "manifest.json";
    io::write_atomic(path, j.dump(2) + '\n');
    return path;
  }

private:
  struct Output {
    std::string path;
    std::string sha256;
    std::size_t bytes;
  };

  static std::string compiler() {
#if defined(__clang__)
    return std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
    return std::string("gcc ") + __VERSION__;
#else
    return "unknown";
#endif
  }

  std::filesystem::path out_dir_;
  std::string command_;
  io::json parameters_;
  std::string started_;
  std::vector<std::uint64_t> seeds_;
  std::vector<Output> outputs_;
  std::mutex mutex_;
};

} // namespace pvstat::cli

#endif // PVSTAT_TOOLS_MANIFEST_HPP
