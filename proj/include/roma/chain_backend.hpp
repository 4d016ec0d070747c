#pragma once

// Chain backends anchor raw payloads. The ledger computes hash linkage
// itself; a backend only has to store payloads durably and hand them back in
// append order.

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "roma/crypto.hpp"
#include "roma/error.hpp"

namespace roma {

class ChainBackend {
 public:
  virtual ~ChainBackend() = default;

  /// Stores the payload durably; returns an opaque transaction reference.
  virtual std::string append(std::string_view payload) = 0;

  /// All payloads in append order.
  virtual std::vector<std::string> fetch_all() const = 0;

  virtual std::string name() const = 0;
};

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<char>((v >> shift) & 0xff));
}

inline std::uint64_t get_be(std::string_view in, std::size_t pos, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v = v << 8 | static_cast<std::uint8_t>(in[pos + static_cast<std::size_t>(i)]);
  return v;
}

inline std::string local_tx_ref(std::size_t n, std::string_view payload) {
  return "local:" + std::to_string(n) + ":" + sha256_hex(payload).substr(0, 16);
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

/// Appends bytes and forces them to stable storage.
inline void durable_append(std::FILE* f, std::string_view bytes, const std::string& what) {
  if (std::fwrite(bytes.data(), 1, bytes.size(), f) != bytes.size() || std::fflush(f) != 0 ||
      ::fsync(::fileno(f)) != 0) {
    fail(ErrorKind::kBackend, "write to " + what + " failed");
  }
}

inline std::string read_file(const std::filesystem::path& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) return {};
  std::string out;
  char buf[1 << 16];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f.get())) > 0) out.append(buf, n);
  return out;
}

}  // namespace detail

class MemoryChain : public ChainBackend {
 public:
  std::string append(std::string_view payload) override {
    std::lock_guard lock(mu_);
    payloads_.emplace_back(payload);
    return detail::local_tx_ref(payloads_.size() - 1, payload);
  }

  std::vector<std::string> fetch_all() const override {
    std::lock_guard lock(mu_);
    return payloads_;
  }

  std::string name() const override { return "memory"; }

 private:
  mutable std::mutex mu_;
  std::vector<std::string> payloads_;
};

/// Simulated local chain: payloads in a file as 4-byte big-endian length
/// followed by the bytes.
class FileChain : public ChainBackend {
 public:
  explicit FileChain(std::filesystem::path path) : path_(std::move(path)) {
    count_ = decode(detail::read_file(path_)).size();
    file_.reset(std::fopen(path_.c_str(), "ab"));
    if (!file_) fail(ErrorKind::kBackend, "cannot open chain file " + path_.string());
  }

  std::string append(std::string_view payload) override {
    std::lock_guard lock(mu_);
    std::string record;
    detail::put_u32(record, static_cast<std::uint32_t>(payload.size()));
    record.append(payload);
    detail::durable_append(file_.get(), record, path_.string());
    return detail::local_tx_ref(count_++, payload);
  }

  std::vector<std::string> fetch_all() const override {
    std::lock_guard lock(mu_);
    return decode(detail::read_file(path_));
  }

  std::string name() const override { return "file:" + path_.string(); }

 private:
  static std::vector<std::string> decode(std::string_view bytes) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos + 4 <= bytes.size()) {
      const std::size_t len = detail::get_be(bytes, pos, 4);
      if (pos + 4 + len > bytes.size()) break;
      out.emplace_back(bytes.substr(pos + 4, len));
      pos += 4 + len;
    }
    if (pos != bytes.size()) fail(ErrorKind::kCorrupt, "chain file has a truncated record");
    return out;
  }

  std::filesystem::path path_;
  mutable std::mutex mu_;
  detail::FilePtr file_;
  std::size_t count_ = 0;
};

}  // namespace roma
