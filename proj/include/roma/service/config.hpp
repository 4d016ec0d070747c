#pragma once

// Service configuration: one JSON file plus ROMA_<FIELD> environment
// overrides (e.g. ROMA_LISTEN_PORT=9000, ROMA_ADMIN_ALIASES=alice,bob).
// List fields split on ',' except imi_item_texts, which splits on '|'.

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/error.hpp"
#include "roma/matching.hpp"
#include "roma/memo.hpp"
#include "roma/rounds.hpp"

namespace roma::service {

inline const std::vector<std::string> kDefaultImiItemTexts = {
    "I enjoyed this round very much.",
    "This round was fun to do.",
    "I would describe this round as very interesting.",
    "This round did not hold my attention at all.",
    "I thought this round was quite enjoyable.",
    "While working in this round, I was thinking about how much I enjoyed it.",
    "I found the work in this round engaging.",
};

struct ServiceConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::string ledger_backend = "local";  // local | external
  std::string chain_endpoint;
  std::string chain_commitment = "confirmed";
  std::size_t chunk_limit = kDefaultChunkLimit;
  double match_weight_role = 0.5;
  double match_weight_expertise = 0.3;
  double match_weight_availability = 0.2;
  double experience_normalizer_years = 10.0;
  double overlap_normalizer_minutes = 90.0;
  int base_round_minutes = kDefaultRoundMinutes;
  std::int64_t token_lifetime_seconds = 3600;
  std::string data_dir = "roma-data";
  std::int64_t proposal_expiry_seconds = 86400;
  std::vector<std::string> admin_aliases;
  std::string token_secret;  // empty: generated once and kept in data_dir
  std::string id_salt;
  int pbkdf2_iterations = 100000;
  std::vector<std::string> imi_item_texts = kDefaultImiItemTexts;

  MatchParams match_params() const {
    MatchParams p;
    p.weights = {match_weight_role, match_weight_expertise, match_weight_availability};
    p.experience_normalizer_years = experience_normalizer_years;
    p.overlap_normalizer_minutes = overlap_normalizer_minutes;
    return p;
  }

  bool is_admin(const std::string& alias) const {
    for (const auto& a : admin_aliases) {
      if (a == alias) return true;
    }
    return false;
  }
};

inline void validate(const ServiceConfig& c) {
  auto bad = [](const std::string& msg) { fail(ErrorKind::kConfig, msg); };
  if (c.listen_host.empty()) bad("listen_host must not be empty");
  if (c.listen_port < 0 || c.listen_port > 65535) bad("listen_port must be in 0..65535");
  if (c.ledger_backend != "local" && c.ledger_backend != "external") {
    bad("ledger_backend must be 'local' or 'external'");
  }
  if (c.ledger_backend == "external" && c.chain_endpoint.empty()) {
    bad("ledger_backend 'external' needs chain_endpoint");
  }
  if (c.chain_commitment != "processed" && c.chain_commitment != "confirmed" &&
      c.chain_commitment != "finalized") {
    bad("chain_commitment must be processed, confirmed or finalized");
  }
  if (c.chunk_limit < kMinChunkLimit || c.chunk_limit > 100000000) {
    bad("chunk_limit must be in [128, 100000000]");
  }
  try {
    validate(c.match_params().weights);
  } catch (const Error& e) {
    bad(e.what());
  }
  if (!(c.experience_normalizer_years > 0)) bad("experience_normalizer_years must be > 0");
  if (!(c.overlap_normalizer_minutes > 0)) bad("overlap_normalizer_minutes must be > 0");
  if (c.base_round_minutes < kMinRoundMinutes || c.base_round_minutes > kMaxRoundMinutes) {
    bad("base_round_minutes must be in [12, 18]");
  }
  if (c.token_lifetime_seconds < 60 || c.token_lifetime_seconds > 30 * 86400) {
    bad("token_lifetime_seconds must be in [60, 2592000]");
  }
  if (c.data_dir.empty()) bad("data_dir must not be empty");
  if (c.proposal_expiry_seconds < 60) bad("proposal_expiry_seconds must be >= 60");
  if (!c.token_secret.empty() && c.token_secret.size() < 32) {
    bad("token_secret must be at least 32 bytes when set");
  }
  if (c.pbkdf2_iterations < 1000 || c.pbkdf2_iterations > 10000000) {
    bad("pbkdf2_iterations must be in [1000, 10000000]");
  }
  if (c.imi_item_texts.size() != kImiItemCount) bad("imi_item_texts must list 7 items");
}

namespace detail {

// One accessor per field so the file loader, env overrides and dump share a
// single field list.
struct Field {
  const char* name;
  std::function<Json(const ServiceConfig&)> get;
  std::function<void(ServiceConfig&, const Json&)> set;
  std::function<Json(const std::string&)> from_env;
};

inline Json env_string(const std::string& v) { return v; }

inline Json env_int(const std::string& v) {
  std::size_t pos = 0;
  long long n = 0;
  try {
    n = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) fail(ErrorKind::kConfig, "expected an integer, got '" + v + "'");
  return n;
}

inline Json env_double(const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) fail(ErrorKind::kConfig, "expected a number, got '" + v + "'");
  return d;
}

inline Json split_list(const std::string& v, char sep) {
  Json out = Json::array();
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline Json env_list(const std::string& v) { return split_list(v, ','); }

// Item texts may contain commas.
inline Json env_text_list(const std::string& v) { return split_list(v, '|'); }

template <typename T>
Field field(const char* name, T ServiceConfig::*member, Json (*from_env)(const std::string&)) {
  return {name, [member](const ServiceConfig& c) { return Json(c.*member); },
          [member](ServiceConfig& c, const Json& j) { c.*member = j.get<T>(); }, from_env};
}

inline const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      field("listen_host", &ServiceConfig::listen_host, env_string),
      field("listen_port", &ServiceConfig::listen_port, env_int),
      field("ledger_backend", &ServiceConfig::ledger_backend, env_string),
      field("chain_endpoint", &ServiceConfig::chain_endpoint, env_string),
      field("chain_commitment", &ServiceConfig::chain_commitment, env_string),
      field("chunk_limit", &ServiceConfig::chunk_limit, env_int),
      field("match_weight_role", &ServiceConfig::match_weight_role, env_double),
      field("match_weight_expertise", &ServiceConfig::match_weight_expertise, env_double),
      field("match_weight_availability", &ServiceConfig::match_weight_availability, env_double),
      field("experience_normalizer_years", &ServiceConfig::experience_normalizer_years, env_double),
      field("overlap_normalizer_minutes", &ServiceConfig::overlap_normalizer_minutes, env_double),
      field("base_round_minutes", &ServiceConfig::base_round_minutes, env_int),
      field("token_lifetime_seconds", &ServiceConfig::token_lifetime_seconds, env_int),
      field("data_dir", &ServiceConfig::data_dir, env_string),
      field("proposal_expiry_seconds", &ServiceConfig::proposal_expiry_seconds, env_int),
      field("admin_aliases", &ServiceConfig::admin_aliases, env_list),
      field("token_secret", &ServiceConfig::token_secret, env_string),
      field("id_salt", &ServiceConfig::id_salt, env_string),
      field("pbkdf2_iterations", &ServiceConfig::pbkdf2_iterations, env_int),
      field("imi_item_texts", &ServiceConfig::imi_item_texts, env_text_list),
  };
  return all;
}

inline std::string env_name(const char* field) {
  std::string out = "ROMA_";
  for (const char* p = field; *p; ++p) out += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
  return out;
}

inline void apply(ServiceConfig& c, const Field& f, const Json& value, const std::string& origin) {
  try {
    f.set(c, value);
  } catch (const Json::exception&) {
    fail(ErrorKind::kConfig, origin + ": wrong type for '" + f.name + "'");
  }
}

}  // namespace detail

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

/// Applies a JSON object of config fields; unknown keys are rejected.
inline void apply_json(ServiceConfig& c, const Json& j, const std::string& origin = "config") {
  if (!j.is_object()) fail(ErrorKind::kConfig, origin + ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    const detail::Field* match = nullptr;
    for (const auto& f : detail::fields()) {
      if (key == f.name) match = &f;
    }
    if (!match) fail(ErrorKind::kConfig, origin + ": unknown field '" + key + "'");
    detail::apply(c, *match, value, origin);
  }
}

inline void apply_env(ServiceConfig& c, const EnvLookup& env = process_env) {
  for (const auto& f : detail::fields()) {
    const std::string name = detail::env_name(f.name);
    if (auto v = env(name)) detail::apply(c, f, f.from_env(*v), name);
  }
}

/// Defaults, then the file (if any), then environment; validated.
inline ServiceConfig load_config(const std::optional<std::filesystem::path>& file,
                                 const EnvLookup& env = process_env) {
  ServiceConfig c;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) fail(ErrorKind::kConfig, "cannot read config file " + file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    Json j;
    try {
      j = Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
      fail(ErrorKind::kConfig, file->string() + ": " + e.what());
    }
    apply_json(c, j, file->string());
  }
  apply_env(c, env);
  validate(c);
  return c;
}

/// Effective configuration with the token secret redacted.
inline Json to_json(const ServiceConfig& c) {
  Json j = Json::object();
  for (const auto& f : detail::fields()) j[f.name] = f.get(c);
  if (!c.token_secret.empty()) j["token_secret"] = "<redacted>";
  return j;
}

}  // namespace roma::service
