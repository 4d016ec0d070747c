#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>

#include "generators.hpp"
#include "reference_values.hpp"
#include "roma/fixtures.hpp"
#include "roma/observations.hpp"

using namespace roma;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("roma-ledger-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

// Independent linkage check: hex strings and concatenated raw bytes.
bool oracle_verify(const std::vector<LedgerEntry>& entries) {
  std::string prev(32, '\0');
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const std::string ph = sha256_hex(e.payload);
    if (to_hex(e.payload_hash) != ph) return false;
    if (std::string(e.prev_hash.begin(), e.prev_hash.end()) != prev) return false;
    const std::string joined = prev + std::string(e.payload_hash.begin(), e.payload_hash.end());
    if (to_hex(e.entry_hash) != sha256_hex(joined)) return false;
    prev.assign(e.entry_hash.begin(), e.entry_hash.end());
  }
  return true;
}

}  // namespace

TEST_CASE("SHA-256 reference digests") {
  CHECK(sha256_hex("") == oracle::kSha256Empty);
  CHECK(sha256_hex("xalp00") == oracle::kSha256Xalp00);
}

TEST_CASE("appended entries link from the zero genesis hash") {
  Ledger ledger({nullptr, fixed_clock(1700000000), std::nullopt});
  const LedgerEntry a = ledger.append_entry("alpha");
  const LedgerEntry b = ledger.append_entry("beta");
  CHECK(a.index == 0);
  CHECK(a.prev_hash == kGenesisPrevHash);
  CHECK(b.prev_hash == a.entry_hash);
  CHECK(a.entry_hash == sha256_concat(kGenesisPrevHash, sha256("alpha")));
  CHECK(ledger.verify().ok);
  CHECK(ledger.anchored());
  CHECK(oracle_verify(ledger.entries()));
  CHECK(ledger.entries_since(1).size() == 1);
  CHECK(ledger.entries_since(5).empty());
}

TEST_CASE("verify_chain agrees with the independent oracle on random ledgers") {
  gen::Rng rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    auto entries = gen::ledger(rng, static_cast<std::size_t>(gen::uniform_int(rng, 0, 20)));
    CHECK(verify_chain(entries).ok == oracle_verify(entries));
    if (entries.empty()) continue;
    const auto i = static_cast<std::size_t>(gen::uniform_int(rng, 0, static_cast<int>(entries.size()) - 1));
    entries[i].payload.push_back('!');
    const VerifyResult r = verify_chain(entries);
    CHECK_FALSE(r.ok);
    CHECK(r.first_bad_index == i);
    CHECK_FALSE(oracle_verify(entries));
  }
}

TEST_CASE("any single byte flip is located at its own index") {
  gen::Rng rng(42);
  const auto pristine = gen::ledger(rng, 30);
  for (int trial = 0; trial < 300; ++trial) {
    auto entries = pristine;
    const auto i = static_cast<std::size_t>(gen::uniform_int(rng, 0, 29));
    auto& e = entries[i];
    const auto bit = static_cast<std::uint8_t>(1u << gen::uniform_int(rng, 0, 7));
    switch (gen::uniform_int(rng, 0, 3)) {
      case 0: e.payload[static_cast<std::size_t>(gen::uniform_int(rng, 0, static_cast<int>(e.payload.size()) - 1))] ^= static_cast<char>(bit); break;
      case 1: e.payload_hash[static_cast<std::size_t>(gen::uniform_int(rng, 0, 31))] ^= bit; break;
      case 2: e.prev_hash[static_cast<std::size_t>(gen::uniform_int(rng, 0, 31))] ^= bit; break;
      default: e.entry_hash[static_cast<std::size_t>(gen::uniform_int(rng, 0, 31))] ^= bit; break;
    }
    const VerifyResult r = verify_chain(entries);
    CHECK_FALSE(r.ok);
    CHECK(r.first_bad_index == i);
  }
}

TEST_CASE("ledger file survives a restart and detects damage") {
  TempDir dir;
  const auto file = dir.path / "ledger.bin";
  {
    Ledger ledger({nullptr, fixed_clock(1700000000), file});
    for (int i = 0; i < 5; ++i) ledger.append_entry("payload-" + std::to_string(i));
  }
  {
    Ledger reopened({nullptr, fixed_clock(1700000001), file});
    CHECK(reopened.size() == 5);
    CHECK(reopened.verify().ok);
    reopened.append_entry("payload-5");
  }
  const std::string bytes = slurp(file);
  CHECK(load_ledger_file(file).entries.size() == 6);

  SECTION("flipped payload byte") {
    std::string damaged = bytes;
    const auto at = damaged.find("payload-3");
    REQUIRE(at != std::string::npos);
    damaged[at + 8] = 'X';
    spit(file, damaged);
    Ledger ledger({nullptr, {}, file});
    const VerifyResult r = ledger.verify();
    CHECK_FALSE(r.ok);
    CHECK(r.first_bad_index == 3);
    CHECK_THROWS_AS(ledger.append_entry("more"), CorruptLedgerError);
    CHECK_THROWS_AS(export_observations(ledger), CorruptLedgerError);
  }
  SECTION("truncated tail record") {
    spit(file, bytes.substr(0, bytes.size() - 3));
    const auto contents = load_ledger_file(file);
    CHECK(contents.entries.size() == 5);
    REQUIRE(contents.damaged_at.has_value());
    CHECK(*contents.damaged_at == 5);
    CHECK(verify_contents(contents).first_bad_index == 5);
  }
}

TEST_CASE("JSON-lines export round-trips and keeps tamper evidence") {
  gen::Rng rng(43);
  const auto entries = gen::ledger(rng, 12);
  const std::string text = to_jsonl(entries);
  const auto back = from_jsonl(text);
  CHECK(back == entries);
  CHECK(std::count(text.begin(), text.end(), '\n') == 12);

  auto j = parse_json_bytes(text.substr(0, text.find('\n')));
  CHECK(j.contains("payload_b64"));
  j["payload_b64"] = base64_encode("forged");
  auto forged = back;
  forged[0] = entry_from_json(j);
  CHECK(verify_chain(forged).first_bad_index == 0);
  CHECK_THROWS_AS(from_jsonl("{\"index\":0}\n"), Error);
}

TEST_CASE("file chain keeps length-prefixed payloads across reopen") {
  TempDir dir;
  const auto path = dir.path / "chain.log";
  {
    FileChain chain(path);
    chain.append("one");
    chain.append(std::string("t\0o", 3));
  }
  FileChain chain(path);
  const auto ref = chain.append("three");
  CHECK_FALSE(ref.empty());
  CHECK(chain.fetch_all() == std::vector<std::string>{"one", std::string("t\0o", 3), "three"});

  std::ofstream(path, std::ios::binary | std::ios::app) << std::string("\0\0\0\x09" "ab", 6);
  CHECK_THROWS_AS(chain.fetch_all(), Error);
}

TEST_CASE("ledger anchors every payload on its backend") {
  TempDir dir;
  Ledger ledger({std::make_unique<FileChain>(dir.path / "chain.log"), fixed_clock(1), std::nullopt});
  for (int i = 0; i < 4; ++i) ledger.append_entry("p" + std::to_string(i));
  CHECK(ledger.anchored());
  CHECK(ledger.entries()[2].tx_ref != ledger.entries()[3].tx_ref);
}

TEST_CASE("study fixture exports 72 observations through the ledger") {
  Ledger ledger({nullptr, fixed_clock(fixtures::kStudyStart), std::nullopt});
  const auto memos = fixtures::table2_memos();
  CHECK(memos.size() == 8);
  for (const auto& m : memos) ledger.append_payloads(encode_memo(m, kDefaultChunkLimit));
  CHECK(ledger.size() == 28);
  const ObservationTable table = export_observations(ledger);
  CHECK(table.rows.size() == 72);
  CHECK(table.clusters.size() == 4);
  const ObservationTable direct = table_from_memos(memos);
  CHECK(direct.rows == table.rows);
}

TEST_CASE("export skips documents of other kinds") {
  Ledger ledger({nullptr, fixed_clock(1), std::nullopt});
  gen::Rng rng(44);
  const SessionMemo m = gen::memo(rng);
  ledger.append_payloads(encode_memo(m));
  ledger.append_payloads(encode_document(Json{{"kind", "analysis"}, {"version", 1}}));
  const ObservationTable table = export_observations(ledger);
  CHECK(table.rows.size() == 6 * m.participant_hashes.size());
}

TEST_CASE("export refuses a ledger whose chunk runs are broken") {
  Ledger ledger({nullptr, fixed_clock(1), std::nullopt});
  gen::Rng rng(45);
  SessionMemo m = gen::memo(rng);
  m.feedback.begin()->second = std::string(1500, 'z');
  auto payloads = encode_memo(m, 300);
  REQUIRE(payloads.size() > 2);
  payloads.erase(payloads.begin() + 1);
  ledger.append_payloads(payloads);
  CHECK(ledger.verify().ok);
  CHECK_THROWS_AS(export_observations(ledger), IncompleteError);
}
