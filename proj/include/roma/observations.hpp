#pragma once

// Bridge from ledger to statistics: reassembles memos from verified entries
// and flattens them into one row per (session, participant, round).

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "roma/error.hpp"
#include "roma/ledger.hpp"
#include "roma/memo.hpp"

namespace roma {

struct Observation {
  std::string session_id;
  SessionType session_type = SessionType::kSolo;
  std::string participant_hash;
  int round_index = 1;
  Role role = Role::kSolo;
  double motivation_scaled = 1.0;
  double actual_minutes = kDefaultRoundMinutes;

  bool operator==(const Observation&) const = default;
};

struct ObservationTable {
  std::vector<Observation> rows;
  // Latest known cluster per participant, taken from the memos.
  std::map<std::string, Cluster> clusters;
};

/// One reassembled document and the ledger span that carried it.
struct LedgerDocument {
  std::size_t first_index = 0;
  std::size_t last_index = 0;
  DecodedDocument decoded;

  std::string kind() const {
    auto it = decoded.doc.find("kind");
    return it != decoded.doc.end() && it->is_string() ? it->get<std::string>() : "";
  }
};

/// Groups consecutive chunk runs into documents. Payloads that do not form a
/// complete, well-formed chunk run raise the decode error.
inline std::vector<LedgerDocument> collect_documents(std::span<const LedgerEntry> entries) {
  std::vector<LedgerDocument> docs;
  std::size_t i = 0;
  while (i < entries.size()) {
    const ChunkHeader head = parse_chunk_header(entries[i].payload);
    const std::size_t count = static_cast<std::size_t>(head.of);
    if (head.part != 1) throw IncompleteError(1, head.of);
    std::vector<std::string> payloads;
    for (std::size_t k = 0; k < count && i + k < entries.size(); ++k) {
      payloads.push_back(entries[i + k].payload);
    }
    LedgerDocument doc;
    doc.first_index = i;
    doc.last_index = i + payloads.size() - 1;
    doc.decoded = decode_document(payloads);
    docs.push_back(std::move(doc));
    i += payloads.size();
  }
  return docs;
}

inline void append_rows(const SessionMemo& memo, ObservationTable& table) {
  for (const auto& r : memo.rounds) {
    for (std::size_t p = 0; p < memo.participant_hashes.size(); ++p) {
      table.rows.push_back({memo.session_id, memo.session_type, memo.participant_hashes[p], r.index,
                            r.entries[p].role, r.entries[p].motivation, r.actual_minutes});
    }
  }
  for (const auto& [who, c] : memo.clusters) table.clusters[who] = c;
}

/// Refuses to export anything from a ledger that fails verification.
inline ObservationTable export_observations(std::span<const LedgerEntry> entries) {
  const VerifyResult v = verify_chain(entries);
  if (!v.ok) throw CorruptLedgerError(v.first_bad_index);
  ObservationTable table;
  for (const auto& doc : collect_documents(entries)) {
    if (doc.kind() != "session") continue;
    append_rows(memo_from_json(doc.decoded.doc), table);
  }
  return table;
}

inline ObservationTable export_observations(const Ledger& ledger) {
  const VerifyResult v = ledger.verify();
  if (!v.ok) throw CorruptLedgerError(v.first_bad_index);
  return export_observations(ledger.entries());
}

inline ObservationTable table_from_memos(std::span<const SessionMemo> memos) {
  ObservationTable table;
  for (const auto& m : memos) append_rows(m, table);
  return table;
}

}  // namespace roma
