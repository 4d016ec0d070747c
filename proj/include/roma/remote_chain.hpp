#pragma once

// HTTP chain adapter. Speaks a two-call protocol against an external chain
// gateway:
//   POST <endpoint>/append    body = raw payload    -> {"tx": "<reference>"}
//   GET  <endpoint>/payloads                        -> {"payloads": [<base64>...]}
// The commitment level travels in the X-Commitment header. mount_chain_routes
// serves the same protocol over any ChainBackend, which is how a local
// gateway (or a test double) is stood up.

#include <httplib.h>

#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/chain_backend.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"

namespace roma {

struct ChainEndpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

inline ChainEndpoint parse_chain_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || url.substr(0, scheme_end) != "http") {
    fail(ErrorKind::kConfig, "chain endpoint must be an http:// URL");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  ChainEndpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) ep.prefix = std::string(url.substr(path_start));
  while (!ep.prefix.empty() && ep.prefix.back() == '/') ep.prefix.pop_back();
  if (ep.origin.size() <= scheme_end + 3) fail(ErrorKind::kConfig, "chain endpoint lacks a host");
  return ep;
}

class RemoteChain : public ChainBackend {
 public:
  RemoteChain(std::string_view endpoint_url, std::string commitment = "confirmed")
      : endpoint_(parse_chain_endpoint(endpoint_url)),
        commitment_(std::move(commitment)),
        client_(std::make_unique<httplib::Client>(endpoint_.origin)) {
    client_->set_connection_timeout(5);
    client_->set_read_timeout(30);
  }

  std::string append(std::string_view payload) override {
    std::lock_guard lock(mu_);
    httplib::Headers headers{{"X-Commitment", commitment_}};
    auto res = client_->Post(endpoint_.prefix + "/append", headers, std::string(payload),
                             "application/octet-stream");
    if (!res || res->status != 200) fail(ErrorKind::kBackend, "chain append failed" + describe(res));
    try {
      return Json::parse(res->body).at("tx").get<std::string>();
    } catch (const Json::exception&) {
      fail(ErrorKind::kBackend, "chain append returned an unexpected body");
    }
  }

  std::vector<std::string> fetch_all() const override {
    std::lock_guard lock(mu_);
    httplib::Headers headers{{"X-Commitment", commitment_}};
    auto res = client_->Get(endpoint_.prefix + "/payloads", headers);
    if (!res || res->status != 200) fail(ErrorKind::kBackend, "chain fetch failed" + describe(res));
    std::vector<std::string> out;
    try {
      const Json doc = Json::parse(res->body);
      for (const auto& p : doc.at("payloads")) {
        auto bytes = base64_decode(p.get<std::string>());
        if (!bytes) fail(ErrorKind::kBackend, "chain returned invalid base64");
        out.push_back(std::move(*bytes));
      }
    } catch (const Json::exception&) {
      fail(ErrorKind::kBackend, "chain fetch returned an unexpected body");
    }
    return out;
  }

  std::string name() const override { return "remote:" + endpoint_.origin + endpoint_.prefix; }

 private:
  static std::string describe(const httplib::Result& res) {
    if (!res) return " (" + httplib::to_string(res.error()) + ")";
    return " (HTTP " + std::to_string(res->status) + ")";
  }

  ChainEndpoint endpoint_;
  std::string commitment_;
  mutable std::mutex mu_;
  std::unique_ptr<httplib::Client> client_;
};

inline void mount_chain_routes(httplib::Server& server, ChainBackend& backend,
                               const std::string& prefix = "/chain") {
  server.Post(prefix + "/append", [&backend](const httplib::Request& req, httplib::Response& res) {
    try {
      res.set_content(Json{{"tx", backend.append(req.body)}}.dump(), "application/json");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(Json{{"error", e.what()}}.dump(), "application/json");
    }
  });
  server.Get(prefix + "/payloads", [&backend](const httplib::Request&, httplib::Response& res) {
    Json arr = Json::array();
    for (const auto& p : backend.fetch_all()) arr.push_back(base64_encode(p));
    res.set_content(Json{{"payloads", arr}}.dump(), "application/json");
  });
}

}  // namespace roma
