#pragma once

// Append-only, hash-chained research ledger.
//
//   payload_hash = SHA-256(payload)
//   entry_hash   = SHA-256(prev_hash || payload_hash)
//   prev_hash(0) = 32 zero bytes
//
// Entries persist to a ledger file of length-prefixed binary records and are
// anchored on a ChainBackend. There is deliberately no API to rewrite or
// drop an entry.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/chain_backend.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"
#include "roma/memo.hpp"
#include "roma/time.hpp"

namespace roma {

struct ChunkInfo {
  int part = 1;
  int of = 1;

  bool operator==(const ChunkInfo&) const = default;
};

struct LedgerEntry {
  std::uint64_t index = 0;
  std::string payload;
  ChunkInfo chunk;
  Digest payload_hash{};
  Digest prev_hash{};
  Digest entry_hash{};
  std::int64_t appended_at = 0;
  std::string tx_ref;  // backend reference; not covered by the hash

  bool operator==(const LedgerEntry&) const = default;
};

inline constexpr Digest kGenesisPrevHash{};

/// Chunk position declared by a payload's header; raw payloads count as 1/1.
inline ChunkInfo chunk_info_of(std::string_view payload) {
  if (payload.empty() || payload[0] != '@') return {};
  try {
    const ChunkHeader h = parse_chunk_header(payload);
    return {h.part, h.of};
  } catch (const ParseError&) {
    return {};
  }
}

inline LedgerEntry make_entry(std::uint64_t index, std::string payload, const Digest& prev_hash,
                              std::int64_t appended_at) {
  LedgerEntry e;
  e.index = index;
  e.chunk = chunk_info_of(payload);
  e.payload_hash = sha256(payload);
  e.prev_hash = prev_hash;
  e.entry_hash = sha256_concat(e.prev_hash, e.payload_hash);
  e.payload = std::move(payload);
  e.appended_at = appended_at;
  return e;
}

struct VerifyResult {
  bool ok = true;
  std::size_t first_bad_index = 0;
  std::size_t entries_checked = 0;

  static VerifyResult good(std::size_t n) { return {true, 0, n}; }
  static VerifyResult bad(std::size_t i) { return {false, i, i}; }
};

inline VerifyResult verify_chain(std::span<const LedgerEntry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LedgerEntry& e = entries[i];
    const Digest& expected_prev = i == 0 ? kGenesisPrevHash : entries[i - 1].entry_hash;
    if (e.index != i || e.prev_hash != expected_prev || sha256(e.payload) != e.payload_hash ||
        sha256_concat(e.prev_hash, e.payload_hash) != e.entry_hash ||
        chunk_info_of(e.payload) != e.chunk) {
      return VerifyResult::bad(i);
    }
  }
  return VerifyResult::good(entries.size());
}

// ---------------------------------------------------------------------------
// Binary ledger file: per record a 4-byte big-endian body length, then
//   u64 index | u32 part | u32 of | payload_hash[32] | prev_hash[32] |
//   entry_hash[32] | i64 appended_at | u32 len + tx_ref | u32 len + payload

inline std::string encode_record(const LedgerEntry& e) {
  std::string body;
  detail::put_u64(body, e.index);
  detail::put_u32(body, static_cast<std::uint32_t>(e.chunk.part));
  detail::put_u32(body, static_cast<std::uint32_t>(e.chunk.of));
  for (const Digest* d : {&e.payload_hash, &e.prev_hash, &e.entry_hash}) {
    body.append(reinterpret_cast<const char*>(d->data()), d->size());
  }
  detail::put_u64(body, static_cast<std::uint64_t>(e.appended_at));
  detail::put_u32(body, static_cast<std::uint32_t>(e.tx_ref.size()));
  body += e.tx_ref;
  detail::put_u32(body, static_cast<std::uint32_t>(e.payload.size()));
  body += e.payload;
  std::string out;
  detail::put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

struct LedgerFileContents {
  std::vector<LedgerEntry> entries;
  // Index of the first record that could not be decoded, if any.
  std::optional<std::size_t> damaged_at;
};

inline LedgerFileContents decode_ledger_bytes(std::string_view bytes) {
  LedgerFileContents out;
  std::size_t pos = 0;
  auto damaged = [&] { out.damaged_at = out.entries.size(); };
  while (pos < bytes.size()) {
    if (pos + 4 > bytes.size()) return damaged(), out;
    const std::size_t len = detail::get_be(bytes, pos, 4);
    if (len > bytes.size() - pos - 4) return damaged(), out;
    std::string_view body = bytes.substr(pos + 4, len);
    pos += 4 + len;

    constexpr std::size_t kFixed = 8 + 4 + 4 + 32 * 3 + 8 + 4;
    if (body.size() < kFixed) return damaged(), out;
    LedgerEntry e;
    std::size_t p = 0;
    e.index = detail::get_be(body, p, 8);
    p += 8;
    e.chunk.part = static_cast<int>(detail::get_be(body, p, 4));
    p += 4;
    e.chunk.of = static_cast<int>(detail::get_be(body, p, 4));
    p += 4;
    for (Digest* d : {&e.payload_hash, &e.prev_hash, &e.entry_hash}) {
      std::copy(body.begin() + static_cast<std::ptrdiff_t>(p),
                body.begin() + static_cast<std::ptrdiff_t>(p + 32), d->begin());
      p += 32;
    }
    e.appended_at = static_cast<std::int64_t>(detail::get_be(body, p, 8));
    p += 8;
    const std::size_t tx_len = detail::get_be(body, p, 4);
    p += 4;
    if (tx_len > body.size() - p || body.size() - p - tx_len < 4) return damaged(), out;
    e.tx_ref = std::string(body.substr(p, tx_len));
    p += tx_len;
    const std::size_t payload_len = detail::get_be(body, p, 4);
    p += 4;
    if (payload_len != body.size() - p) return damaged(), out;
    e.payload = std::string(body.substr(p));
    out.entries.push_back(std::move(e));
  }
  return out;
}

inline LedgerFileContents load_ledger_file(const std::filesystem::path& path) {
  return decode_ledger_bytes(detail::read_file(path));
}

/// Verification over file contents: an undecodable record counts as the
/// first bad index when nothing earlier fails.
inline VerifyResult verify_contents(const LedgerFileContents& contents) {
  VerifyResult r = verify_chain(contents.entries);
  if (r.ok && contents.damaged_at) return VerifyResult::bad(*contents.damaged_at);
  return r;
}

// ---------------------------------------------------------------------------
// JSON-lines interchange form: one entry object per line, payload in base64.

inline Json entry_to_json(const LedgerEntry& e) {
  return {{"appended_at", format_utc(e.appended_at)},
          {"chunk", {e.chunk.part, e.chunk.of}},
          {"entry_hash", to_hex(e.entry_hash)},
          {"index", e.index},
          {"payload_b64", base64_encode(e.payload)},
          {"payload_hash", to_hex(e.payload_hash)},
          {"prev_hash", to_hex(e.prev_hash)},
          {"tx_ref", e.tx_ref}};
}

inline LedgerEntry entry_from_json(const Json& j) {
  try {
    LedgerEntry e;
    e.index = j.at("index").get<std::uint64_t>();
    e.chunk = {j.at("chunk").at(0).get<int>(), j.at("chunk").at(1).get<int>()};
    e.appended_at = parse_utc(j.at("appended_at").get<std::string>());
    e.tx_ref = j.at("tx_ref").get<std::string>();
    auto payload = base64_decode(j.at("payload_b64").get<std::string>());
    auto ph = digest_from_hex(j.at("payload_hash").get<std::string>());
    auto prev = digest_from_hex(j.at("prev_hash").get<std::string>());
    auto eh = digest_from_hex(j.at("entry_hash").get<std::string>());
    if (!payload || !ph || !prev || !eh) fail(ErrorKind::kValidation, "bad ledger JSON encoding");
    e.payload = std::move(*payload);
    e.payload_hash = *ph;
    e.prev_hash = *prev;
    e.entry_hash = *eh;
    return e;
  } catch (const Json::exception& ex) {
    fail(ErrorKind::kValidation, std::string("bad ledger JSON entry: ") + ex.what());
  }
}

inline std::string to_jsonl(std::span<const LedgerEntry> entries) {
  std::string out;
  for (const auto& e : entries) out += canonical_dump(entry_to_json(e)) + "\n";
  return out;
}

inline std::vector<LedgerEntry> from_jsonl(std::string_view text) {
  std::vector<LedgerEntry> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty()) out.push_back(entry_from_json(parse_json_bytes(line)));
    pos = nl + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------

struct LedgerOptions {
  std::unique_ptr<ChainBackend> backend;               // defaults to MemoryChain
  Clock clock;                                         // defaults to system clock
  std::optional<std::filesystem::path> ledger_file;    // in-memory when absent
};

/// Single writer, concurrent readers. Appends are serialized; readers see a
/// consistent prefix.
class Ledger {
 public:
  explicit Ledger(LedgerOptions options = {})
      : backend_(options.backend ? std::move(options.backend) : std::make_unique<MemoryChain>()),
        clock_(options.clock ? std::move(options.clock) : system_clock()),
        path_(std::move(options.ledger_file)) {
    if (path_) {
      LedgerFileContents contents = load_ledger_file(*path_);
      status_ = verify_contents(contents);
      entries_ = std::move(contents.entries);
      file_.reset(std::fopen(path_->c_str(), "ab"));
      if (!file_) fail(ErrorKind::kBackend, "cannot open ledger file " + path_->string());
    }
  }

  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  /// Anchors the payload on the backend, then records the linked entry.
  /// Backend failures propagate and leave the ledger unchanged.
  LedgerEntry append_entry(std::string payload) {
    std::unique_lock lock(mu_);
    if (!status_.ok) throw CorruptLedgerError(status_.first_bad_index);
    const Digest prev = entries_.empty() ? kGenesisPrevHash : entries_.back().entry_hash;
    LedgerEntry e = make_entry(entries_.size(), std::move(payload), prev, clock_());
    e.tx_ref = backend_->append(e.payload);
    if (file_) detail::durable_append(file_.get(), encode_record(e), path_->string());
    entries_.push_back(e);
    return e;
  }

  /// Appends a chunk set back to back so the chunks stay contiguous.
  std::vector<LedgerEntry> append_payloads(const std::vector<std::string>& payloads) {
    std::vector<LedgerEntry> out;
    out.reserve(payloads.size());
    for (const auto& p : payloads) out.push_back(append_entry(p));
    return out;
  }

  std::vector<LedgerEntry> entries() const {
    std::shared_lock lock(mu_);
    return entries_;
  }

  std::vector<LedgerEntry> entries_since(std::size_t first) const {
    std::shared_lock lock(mu_);
    if (first >= entries_.size()) return {};
    return {entries_.begin() + static_cast<std::ptrdiff_t>(first), entries_.end()};
  }

  std::size_t size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
  }

  /// Full recomputation over every entry (plus any undecodable file record).
  VerifyResult verify() const {
    std::shared_lock lock(mu_);
    VerifyResult r = verify_chain(entries_);
    if (r.ok && !status_.ok) return status_;
    return r;
  }

  /// True when the backend holds exactly this ledger's payloads, in order.
  bool anchored() const {
    std::shared_lock lock(mu_);
    const auto remote = backend_->fetch_all();
    if (remote.size() != entries_.size()) return false;
    for (std::size_t i = 0; i < remote.size(); ++i) {
      if (remote[i] != entries_[i].payload) return false;
    }
    return true;
  }

  const ChainBackend& backend() const { return *backend_; }

 private:
  mutable std::shared_mutex mu_;
  std::unique_ptr<ChainBackend> backend_;
  Clock clock_;
  std::optional<std::filesystem::path> path_;
  detail::FilePtr file_;
  std::vector<LedgerEntry> entries_;
  VerifyResult status_;
};

}  // namespace roma
