#pragma once

// Session memo: the unit of research data anchored on the ledger, plus its
// canonical encoding and chunking into size-limited payloads.
//
// Every payload starts with a header line
//
//   @<part>/<of>:<sha256 hex of the full canonical document>\n
//
// followed by a slice of the canonical bytes. Concatenating the slices of
// parts 1..of reproduces the canonical document exactly; the digest ties the
// parts together and makes any single corrupted byte detectable on decode.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"
#include "roma/imi.hpp"
#include "roma/roles.hpp"
#include "roma/rounds.hpp"
#include "roma/time.hpp"

namespace roma {

inline constexpr int kMemoVersion = 1;
inline constexpr std::size_t kDefaultChunkLimit = 566;
inline constexpr std::size_t kMinChunkLimit = 128;
inline constexpr std::size_t kMaxFeedbackBytes = 4096;

struct MemoEntry {
  Role role = Role::kSolo;
  double motivation = 1.0;  // 1-10 scale, quantized to 1e-6
  std::vector<int> imi;     // raw answers as submitted
  std::vector<int> reversed_items;
  int revisions = 0;

  bool operator==(const MemoEntry&) const = default;
};

struct MemoRound {
  int index = 1;
  double actual_minutes = kDefaultRoundMinutes;
  std::vector<MemoEntry> entries;  // aligned with SessionMemo::participant_hashes

  bool operator==(const MemoRound&) const = default;
};

struct SessionMemo {
  int version = kMemoVersion;
  std::string session_id;
  SessionType session_type = SessionType::kSolo;
  std::vector<std::string> participant_hashes;
  std::vector<MemoRound> rounds;
  std::map<std::string, std::string> feedback;
  bool ai_assist = false;
  std::string finalized_at;
  // ROMA cluster of each participant at scheduling time, when assessed.
  std::map<std::string, Cluster> clusters;

  bool operator==(const SessionMemo&) const = default;
};

inline bool is_valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 128) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '-' || c == '_' || c == '.';
  });
}

inline void validate(const SessionMemo& m) {
  auto bad = [](const std::string& what) { fail(ErrorKind::kValidation, "memo: " + what); };
  if (m.version != kMemoVersion) bad("unsupported version " + std::to_string(m.version));
  if (!is_valid_session_id(m.session_id)) bad("invalid session_id");
  const std::size_t n = m.session_type == SessionType::kPair ? 2 : 1;
  if (m.participant_hashes.size() != n) bad("participant count does not match session type");
  for (const auto& h : m.participant_hashes) {
    if (!is_lower_hex_digest(h)) bad("participant ids must be SHA-256 hex digests");
  }
  if (n == 2 && m.participant_hashes[0] == m.participant_hashes[1]) bad("duplicate participant");
  if (m.rounds.size() != kRoundsPerSession) bad("exactly 6 rounds required");
  for (std::size_t i = 0; i < m.rounds.size(); ++i) {
    const MemoRound& r = m.rounds[i];
    if (r.index != static_cast<int>(i) + 1) bad("round indices must run 1..6");
    if (!(r.actual_minutes >= kMinRoundMinutes && r.actual_minutes <= kMaxRoundMinutes)) {
      bad("round minutes outside [12,18]");
    }
    if (r.actual_minutes != quantize6(r.actual_minutes)) bad("round minutes exceed 6 decimals");
    if (r.entries.size() != n) bad("round entries must match participants");
    for (const MemoEntry& e : r.entries) {
      if (m.session_type == SessionType::kSolo ? e.role != Role::kSolo : !is_pair_role(e.role)) {
        bad("role does not fit session type");
      }
      const auto flags = flags_from_indices(e.reversed_items);
      if (e.motivation != quantize6(imi_motivation(e.imi, flags))) {
        bad("motivation does not match IMI items in round " + std::to_string(r.index));
      }
      if (e.revisions < 0) bad("negative revision count");
    }
    if (n == 2 && r.entries[0].role == r.entries[1].role) bad("pair roles must differ");
  }
  std::set<std::string> ids(m.participant_hashes.begin(), m.participant_hashes.end());
  if (m.feedback.size() != ids.size()) bad("feedback required from every participant");
  for (const auto& [who, text] : m.feedback) {
    if (!ids.count(who)) bad("feedback from a non-participant");
    if (text.size() > kMaxFeedbackBytes) bad("feedback exceeds 4096 bytes");
    if (!is_valid_utf8(text)) bad("feedback is not valid UTF-8");
  }
  for (const auto& [who, c] : m.clusters) {
    (void)c;
    if (!ids.count(who)) bad("cluster for a non-participant");
  }
  (void)parse_utc(m.finalized_at);
}

inline Json to_json(const SessionMemo& m) {
  Json rounds = Json::array();
  for (const auto& r : m.rounds) {
    Json entries = Json::array();
    for (const auto& e : r.entries) {
      entries.push_back({{"imi", e.imi},
                         {"motivation", e.motivation},
                         {"reversed", e.reversed_items},
                         {"revisions", e.revisions},
                         {"role", std::string(to_string(e.role))}});
    }
    rounds.push_back({{"entries", entries}, {"index", r.index}, {"minutes", r.actual_minutes}});
  }
  Json clusters = Json::object();
  for (const auto& [who, c] : m.clusters) clusters[who] = static_cast<int>(c);
  Json feedback = Json::object();
  for (const auto& [who, text] : m.feedback) feedback[who] = text;
  return {{"ai_assist", m.ai_assist},
          {"clusters", clusters},
          {"feedback", feedback},
          {"finalized_at", m.finalized_at},
          {"kind", "session"},
          {"participants", m.participant_hashes},
          {"rounds", rounds},
          {"session_id", m.session_id},
          {"session_type", std::string(to_string(m.session_type))},
          {"version", m.version}};
}

namespace detail {

inline const Json& require(const Json& obj, const char* key, Json::value_t type) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorKind::kValidation, std::string("memo: missing field ") + key);
  const bool ok = it->type() == type ||
                  (type == Json::value_t::number_float && it->is_number()) ||
                  (type == Json::value_t::number_integer && it->is_number_integer());
  if (!ok) fail(ErrorKind::kValidation, std::string("memo: wrong type for ") + key);
  return *it;
}

inline void require_keys(const Json& obj, std::initializer_list<const char*> keys) {
  if (!obj.is_object() || obj.size() != keys.size()) {
    fail(ErrorKind::kValidation, "memo: unexpected object shape");
  }
  for (const char* k : keys) {
    if (!obj.contains(k)) fail(ErrorKind::kValidation, std::string("memo: missing field ") + k);
  }
}

inline std::vector<int> int_list(const Json& arr) {
  std::vector<int> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer()) fail(ErrorKind::kValidation, "memo: expected integer list");
    out.push_back(v.get<int>());
  }
  return out;
}

}  // namespace detail

inline SessionMemo memo_from_json(const Json& j) {
  using detail::require;
  using V = Json::value_t;
  detail::require_keys(j, {"ai_assist", "clusters", "feedback", "finalized_at", "kind",
                           "participants", "rounds", "session_id", "session_type", "version"});
  if (require(j, "kind", V::string) != "session") {
    fail(ErrorKind::kValidation, "memo: not a session memo");
  }
  SessionMemo m;
  m.version = require(j, "version", V::number_integer).get<int>();
  if (m.version != kMemoVersion) {
    fail(ErrorKind::kValidation, "memo: unsupported version " + std::to_string(m.version));
  }
  m.ai_assist = require(j, "ai_assist", V::boolean).get<bool>();
  m.session_id = require(j, "session_id", V::string).get<std::string>();
  m.session_type = parse_session_type(require(j, "session_type", V::string).get<std::string>());
  m.finalized_at = require(j, "finalized_at", V::string).get<std::string>();
  for (const auto& p : require(j, "participants", V::array)) {
    if (!p.is_string()) fail(ErrorKind::kValidation, "memo: participant ids must be strings");
    m.participant_hashes.push_back(p.get<std::string>());
  }
  for (const auto& [who, text] : require(j, "feedback", V::object).items()) {
    if (!text.is_string()) fail(ErrorKind::kValidation, "memo: feedback must be text");
    m.feedback[who] = text.get<std::string>();
  }
  for (const auto& [who, c] : require(j, "clusters", V::object).items()) {
    if (!c.is_number_integer()) fail(ErrorKind::kValidation, "memo: cluster must be 1..3");
    m.clusters[who] = cluster_from_number(c.get<int>());
  }
  for (const auto& r : require(j, "rounds", V::array)) {
    detail::require_keys(r, {"entries", "index", "minutes"});
    MemoRound round;
    round.index = require(r, "index", V::number_integer).get<int>();
    round.actual_minutes = require(r, "minutes", V::number_float).get<double>();
    for (const auto& e : require(r, "entries", V::array)) {
      detail::require_keys(e, {"imi", "motivation", "reversed", "revisions", "role"});
      MemoEntry entry;
      entry.role = parse_role(require(e, "role", V::string).get<std::string>());
      entry.motivation = require(e, "motivation", V::number_float).get<double>();
      entry.imi = detail::int_list(require(e, "imi", V::array));
      entry.reversed_items = detail::int_list(require(e, "reversed", V::array));
      entry.revisions = require(e, "revisions", V::number_integer).get<int>();
      round.entries.push_back(std::move(entry));
    }
    m.rounds.push_back(std::move(round));
  }
  validate(m);
  return m;
}

struct ChunkHeader {
  int part = 1;
  int of = 1;
  std::string digest_hex;
  std::size_t length = 0;  // header bytes including the newline
};

namespace detail {

inline std::size_t digit_count(std::size_t n) {
  std::size_t d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

inline std::string chunk_header(std::size_t part, std::size_t of, const std::string& digest) {
  return "@" + std::to_string(part) + "/" + std::to_string(of) + ":" + digest + "\n";
}

// Parses a positive decimal without leading zeros starting at pos.
inline int parse_positive(std::string_view s, std::size_t& pos) {
  const std::size_t start = pos;
  long long v = 0;
  while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9' && pos - start < 9) {
    v = v * 10 + (s[pos] - '0');
    ++pos;
  }
  if (pos == start || s[start] == '0') throw ParseError("bad chunk number", start);
  return static_cast<int>(v);
}

}  // namespace detail

inline ChunkHeader parse_chunk_header(std::string_view payload) {
  ChunkHeader h;
  std::size_t pos = 0;
  if (payload.empty() || payload[0] != '@') throw ParseError("payload lacks chunk header", 0);
  pos = 1;
  h.part = detail::parse_positive(payload, pos);
  if (pos >= payload.size() || payload[pos] != '/') throw ParseError("expected '/'", pos);
  ++pos;
  h.of = detail::parse_positive(payload, pos);
  if (pos >= payload.size() || payload[pos] != ':') throw ParseError("expected ':'", pos);
  ++pos;
  if (payload.size() < pos + 65) throw ParseError("truncated chunk digest", payload.size());
  h.digest_hex = std::string(payload.substr(pos, 64));
  if (!is_lower_hex_digest(h.digest_hex)) throw ParseError("bad chunk digest", pos);
  pos += 64;
  if (payload[pos] != '\n') throw ParseError("expected newline after chunk header", pos);
  h.length = pos + 1;
  if (h.part > h.of) throw ParseError("chunk part exceeds count", 1);
  return h;
}

/// Canonical bytes of any JSON document, split into payloads of at most
/// max_chunk_bytes (header included).
inline std::vector<std::string> encode_document(const Json& doc,
                                                std::size_t max_chunk_bytes = kDefaultChunkLimit) {
  if (max_chunk_bytes < kMinChunkLimit) {
    fail(ErrorKind::kContract, "max_chunk_bytes must be at least 128");
  }
  const std::string canonical = canonical_dump(doc);
  const std::string digest = sha256_hex(canonical);
  const std::string single = detail::chunk_header(1, 1, digest);
  if (single.size() + canonical.size() <= max_chunk_bytes) return {single + canonical};

  // Header length grows with the digit count of `of`; iterate to a fixed point.
  auto header_len = [](std::size_t of) { return 68 + 2 * detail::digit_count(of); };
  std::size_t of = 2;
  std::size_t capacity = 0;
  for (;;) {
    capacity = max_chunk_bytes - header_len(of);
    const std::size_t n = (canonical.size() + capacity - 1) / capacity;
    const bool stable = detail::digit_count(n) == detail::digit_count(of);
    of = n;
    if (stable) break;
  }
  std::vector<std::string> out;
  out.reserve(of);
  for (std::size_t part = 1; part <= of; ++part) {
    const std::size_t begin = (part - 1) * capacity;
    out.push_back(detail::chunk_header(part, of, digest) + canonical.substr(begin, capacity));
  }
  return out;
}

struct DecodedDocument {
  Json doc;
  std::string canonical;
  std::string digest_hex;
};

inline DecodedDocument decode_document(std::span<const std::string> payloads) {
  if (payloads.empty()) throw IncompleteError(1, 1);
  const ChunkHeader first = parse_chunk_header(payloads[0]);
  DecodedDocument out;
  out.digest_hex = first.digest_hex;
  std::size_t expected = 1;
  for (const auto& p : payloads) {
    const ChunkHeader h = parse_chunk_header(p);
    if (h.of != first.of || h.digest_hex != first.digest_hex) {
      fail(ErrorKind::kIntegrity, "chunk set mixes different documents");
    }
    if (static_cast<std::size_t>(h.part) > expected) throw IncompleteError(static_cast<int>(expected), h.of);
    if (static_cast<std::size_t>(h.part) < expected) {
      fail(ErrorKind::kIntegrity, "duplicate or out-of-order chunk " + std::to_string(h.part));
    }
    out.canonical.append(p, h.length, std::string::npos);
    ++expected;
  }
  if (expected - 1 < static_cast<std::size_t>(first.of)) {
    throw IncompleteError(static_cast<int>(expected), first.of);
  }
  if (sha256_hex(out.canonical) != out.digest_hex) {
    fail(ErrorKind::kIntegrity, "document digest mismatch");
  }
  out.doc = parse_json_bytes(out.canonical);
  const std::string again = canonical_dump(out.doc);
  if (again != out.canonical) {
    const auto diff = std::mismatch(again.begin(), again.end(), out.canonical.begin(),
                                    out.canonical.end());
    throw ParseError("non-canonical encoding",
                     static_cast<std::size_t>(diff.second - out.canonical.begin()));
  }
  return out;
}

inline std::vector<std::string> encode_memo(const SessionMemo& memo,
                                            std::size_t max_chunk_bytes = kDefaultChunkLimit) {
  validate(memo);
  return encode_document(to_json(memo), max_chunk_bytes);
}

inline SessionMemo decode_memo(std::span<const std::string> payloads) {
  return memo_from_json(decode_document(payloads).doc);
}

/// Canonical bytes reassembled from a payload set, for byte comparisons.
inline std::string reassemble(std::span<const std::string> payloads) {
  return decode_document(payloads).canonical;
}

}  // namespace roma
