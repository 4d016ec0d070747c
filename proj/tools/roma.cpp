// roma: service and offline tooling.
//
//   roma serve [--config FILE]
//   roma ledger verify (--data-dir DIR | --jsonl FILE)
//   roma ledger export [--data-dir DIR] [--out FILE]
//   roma analyze (--data-dir DIR | --jsonl FILE) [--json]
//   roma simulate [--seed N] [--fixture random|table2] [--out FILE] [--data-dir DIR]
//   roma config check [--config FILE]

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roma/roma.hpp"
#include "roma/service/config.hpp"
#include "roma/service/coordinator.hpp"
#include "roma/service/http_api.hpp"

namespace {

using namespace roma;

constexpr int kExitOk = 0;
constexpr int kExitCorrupt = 1;
constexpr int kExitError = 2;

httplib::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

std::optional<std::filesystem::path> opt_path(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::filesystem::path(s);
}

std::string read_all(const std::string& path) {
  if (path == "-") {
    std::stringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kNotFound, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_out(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kBackend, "cannot write " + path);
  out << bytes;
}

// Entries from a data directory's ledger.bin or a JSON-lines export.
struct LoadedLedger {
  std::vector<LedgerEntry> entries;
  VerifyResult verify;
};

LoadedLedger load_entries(const std::string& data_dir, const std::string& jsonl) {
  LoadedLedger out;
  if (!jsonl.empty()) {
    out.entries = from_jsonl(read_all(jsonl));
    out.verify = verify_chain(out.entries);
    return out;
  }
  const auto path = std::filesystem::path(data_dir) / "ledger.bin";
  if (!std::filesystem::exists(path)) fail(ErrorKind::kNotFound, "no ledger at " + path.string());
  const LedgerFileContents contents = load_ledger_file(path);
  out.verify = verify_contents(contents);
  out.entries = contents.entries;
  return out;
}

std::string resolve_data_dir(const std::string& data_dir, const std::string& config) {
  if (!data_dir.empty()) return data_dir;
  return service::load_config(opt_path(config)).data_dir;
}

int run_serve(const std::string& config_path) {
  const service::ServiceConfig config = service::load_config(opt_path(config_path));
  service::Coordinator core(config);
  httplib::Server server;
  service::HttpApi api(core);
  api.mount(server);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  const VerifyResult v = core.verify_ledger();
  std::cerr << "ledger: " << core.ledger().size() << " entries, "
            << (v.ok ? "OK" : "CORRUPT at " + std::to_string(v.first_bad_index)) << "\n";
  int port = config.listen_port;
  if (port == 0) {
    port = server.bind_to_any_port(config.listen_host);
  } else if (!server.bind_to_port(config.listen_host, port)) {
    fail(ErrorKind::kConfig, "cannot bind " + config.listen_host + ":" + std::to_string(port));
  }
  std::cerr << "listening on http://" << config.listen_host << ":" << port << "\n";
  server.listen_after_bind();
  return kExitOk;
}

int run_verify(const std::string& data_dir, const std::string& config, const std::string& jsonl) {
  const LoadedLedger l = load_entries(jsonl.empty() ? resolve_data_dir(data_dir, config) : "", jsonl);
  if (l.verify.ok) {
    std::cout << "OK " << l.entries.size() << " entries\n";
    return kExitOk;
  }
  std::cout << "CORRUPT first_bad_index=" << l.verify.first_bad_index << " ("
            << l.entries.size() << " decodable entries)\n";
  return kExitCorrupt;
}

int run_export(const std::string& data_dir, const std::string& config, const std::string& out) {
  const LoadedLedger l = load_entries(resolve_data_dir(data_dir, config), "");
  write_out(out, to_jsonl(l.entries));
  if (!l.verify.ok) {
    std::cerr << "warning: ledger fails verification at entry " << l.verify.first_bad_index << "\n";
    return kExitCorrupt;
  }
  return kExitOk;
}

int run_analyze(const std::string& data_dir, const std::string& config, const std::string& jsonl,
                bool as_json) {
  const LoadedLedger l = load_entries(jsonl.empty() ? resolve_data_dir(data_dir, config) : "", jsonl);
  if (!l.verify.ok) throw CorruptLedgerError(l.verify.first_bad_index);
  const ObservationTable table = export_observations(l.entries);
  const stats::AnalysisReport report = stats::evaluate_hypotheses(table, table.clusters);
  if (as_json) {
    std::cout << stats::encode_report(report) << "\n";
  } else {
    std::cout << stats::render_text(report);
  }
  return kExitOk;
}

int run_simulate(std::uint64_t seed, const std::string& fixture, std::size_t chunk_limit,
                 const std::string& out, const std::string& data_dir) {
  std::vector<SessionMemo> memos;
  if (fixture == "table2") {
    memos = fixtures::table2_memos();
  } else if (fixture == "random") {
    memos = fixtures::simulated_memos(seed);
  } else {
    fail(ErrorKind::kValidation, "fixture must be 'random' or 'table2'");
  }
  LedgerOptions opts;
  opts.clock = fixed_clock(fixtures::kStudyStart);
  if (!data_dir.empty()) {
    std::filesystem::create_directories(data_dir);
    const auto bin = std::filesystem::path(data_dir) / "ledger.bin";
    if (std::filesystem::exists(bin) && std::filesystem::file_size(bin) > 0) {
      fail(ErrorKind::kConflict, bin.string() + " already exists; refusing to append a fixture");
    }
    opts.ledger_file = bin;
    opts.backend = std::make_unique<FileChain>(std::filesystem::path(data_dir) / "chain.log");
  }
  Ledger ledger(std::move(opts));
  for (const auto& m : memos) ledger.append_payloads(encode_memo(m, chunk_limit));
  if (data_dir.empty() || !out.empty()) write_out(out, to_jsonl(ledger.entries()));
  std::cerr << memos.size() << " sessions, " << ledger.size() << " ledger entries\n";
  return kExitOk;
}

int run_config_check(const std::string& config_path) {
  const service::ServiceConfig c = service::load_config(opt_path(config_path));
  std::cout << service::to_json(c).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ROMA pair-programming study service and tools"};
  app.require_subcommand(1);

  std::string config_path;
  std::string data_dir;
  std::string jsonl;
  std::string out;
  bool as_json = false;
  std::uint64_t seed = 1;
  std::string fixture = "random";
  std::size_t chunk_limit = kDefaultChunkLimit;

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("-c,--config", config_path, "Config file (JSON)");

  auto* ledger = app.add_subcommand("ledger", "Ledger tools");
  ledger->require_subcommand(1);
  auto* verify = ledger->add_subcommand("verify", "Recompute the hash chain");
  verify->add_option("-c,--config", config_path, "Config file supplying data_dir");
  verify->add_option("-d,--data-dir", data_dir, "Service data directory");
  verify->add_option("--jsonl", jsonl, "JSON-lines export to verify ('-' for stdin)");
  auto* exp = ledger->add_subcommand("export", "Write ledger entries as JSON lines");
  exp->add_option("-c,--config", config_path, "Config file supplying data_dir");
  exp->add_option("-d,--data-dir", data_dir, "Service data directory");
  exp->add_option("-o,--out", out, "Output file (default stdout)");

  auto* analyze = app.add_subcommand("analyze", "Print the motivation report for a ledger");
  analyze->add_option("-c,--config", config_path, "Config file supplying data_dir");
  analyze->add_option("-d,--data-dir", data_dir, "Service data directory");
  analyze->add_option("--jsonl", jsonl, "JSON-lines export ('-' for stdin)");
  analyze->add_flag("--json", as_json, "Canonical JSON instead of text");

  auto* simulate = app.add_subcommand("simulate", "Generate a 4-participant x 3-session ledger");
  simulate->add_option("-s,--seed", seed, "RNG seed for the random fixture");
  simulate->add_option("-f,--fixture", fixture, "random | table2")->check(CLI::IsMember({"random", "table2"}));
  simulate->add_option("--chunk-limit", chunk_limit, "Max payload bytes per ledger entry")
      ->check(CLI::Range(kMinChunkLimit, std::size_t{100000000}));
  simulate->add_option("-o,--out", out, "JSON-lines output (default stdout)");
  simulate->add_option("-d,--data-dir", data_dir, "Also write ledger.bin and chain.log here");

  auto* config = app.add_subcommand("config", "Configuration tools");
  config->require_subcommand(1);
  auto* check = config->add_subcommand("check", "Validate and print the effective configuration");
  check->add_option("-c,--config", config_path, "Config file (JSON)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(config_path);
    if (*verify) {
      if (!data_dir.empty() && !jsonl.empty()) fail(ErrorKind::kValidation, "use --data-dir or --jsonl, not both");
      return run_verify(data_dir, config_path, jsonl);
    }
    if (*exp) return run_export(data_dir, config_path, out);
    if (*analyze) return run_analyze(data_dir, config_path, jsonl, as_json);
    if (*simulate) return run_simulate(seed, fixture, chunk_limit, out, data_dir);
    if (*check) return run_config_check(config_path);
  } catch (const CorruptLedgerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCorrupt;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
