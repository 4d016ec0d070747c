#pragma once

// Compact JWS tokens (HS256) and salted credential hashes.

#include <cstdint>
#include <string>
#include <string_view>

#include "roma/canonical_json.hpp"
#include "roma/crypto.hpp"
#include "roma/error.hpp"

namespace roma::service {

inline constexpr std::string_view kScopeParticipant = "participant";
inline constexpr std::string_view kScopeAdmin = "admin";

struct TokenClaims {
  std::string subject;  // participant hash
  std::string scope;
  std::int64_t issued_at = 0;
  std::int64_t expires_at = 0;

  bool admin() const { return scope == kScopeAdmin; }
};

inline std::string issue_token(std::string_view secret, const TokenClaims& claims) {
  if (claims.expires_at <= claims.issued_at) fail(ErrorKind::kContract, "token must expire after issue");
  const std::string header = canonical_dump(Json{{"alg", "HS256"}, {"typ", "JWT"}});
  const std::string body = canonical_dump(Json{{"sub", claims.subject},
                                               {"scope", claims.scope},
                                               {"iat", claims.issued_at},
                                               {"exp", claims.expires_at}});
  std::string signing_input = base64url_encode(header) + "." + base64url_encode(body);
  const std::string sig = hmac_sha256(secret, signing_input);
  return signing_input + "." + base64url_encode(sig);
}

/// Throws kAuthorization for a malformed, forged or expired token.
inline TokenClaims verify_token(std::string_view secret, std::string_view token, std::int64_t now) {
  auto reject = [](const char* why) -> TokenClaims { fail(ErrorKind::kAuthorization, why); };
  const auto dot1 = token.find('.');
  const auto dot2 = dot1 == std::string_view::npos ? dot1 : token.find('.', dot1 + 1);
  if (dot2 == std::string_view::npos || token.find('.', dot2 + 1) != std::string_view::npos) {
    return reject("malformed token");
  }
  const std::string_view signing_input = token.substr(0, dot2);
  const auto sig = base64url_decode(token.substr(dot2 + 1));
  if (!sig || !constant_time_equal(*sig, hmac_sha256(secret, signing_input))) {
    return reject("invalid token signature");
  }
  const auto header = base64url_decode(token.substr(0, dot1));
  const auto body = base64url_decode(token.substr(dot1 + 1, dot2 - dot1 - 1));
  if (!header || !body) return reject("malformed token");
  TokenClaims c;
  try {
    const Json h = Json::parse(*header);
    if (h.at("alg") != "HS256") return reject("unsupported token algorithm");
    const Json j = Json::parse(*body);
    c.subject = j.at("sub").get<std::string>();
    c.scope = j.at("scope").get<std::string>();
    c.issued_at = j.at("iat").get<std::int64_t>();
    c.expires_at = j.at("exp").get<std::int64_t>();
  } catch (const Json::exception&) {
    return reject("malformed token claims");
  }
  if (now >= c.expires_at) return reject("token expired");
  return c;
}

namespace detail {

inline std::string hex_of(std::string_view bytes) {
  return to_hex(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

}  // namespace detail

/// "pbkdf2-sha256$<iterations>$<salt hex>$<hash hex>"
inline std::string hash_credential(std::string_view credential, int iterations) {
  const std::string salt = random_bytes(16);
  const std::string derived = pbkdf2_sha256(credential, salt, iterations);
  return "pbkdf2-sha256$" + std::to_string(iterations) + "$" + detail::hex_of(salt) + "$" +
         detail::hex_of(derived);
}

inline bool check_credential(std::string_view credential, std::string_view stored) {
  const auto p1 = stored.find('$');
  const auto p2 = stored.find('$', p1 + 1);
  const auto p3 = stored.find('$', p2 + 1);
  if (p1 == std::string_view::npos || p2 == std::string_view::npos || p3 == std::string_view::npos) {
    return false;
  }
  if (stored.substr(0, p1) != "pbkdf2-sha256") return false;
  int iterations = 0;
  try {
    iterations = std::stoi(std::string(stored.substr(p1 + 1, p2 - p1 - 1)));
  } catch (const std::exception&) {
    return false;
  }
  const auto salt = from_hex(stored.substr(p2 + 1, p3 - p2 - 1));
  const auto expected = from_hex(stored.substr(p3 + 1));
  if (!salt || !expected || iterations <= 0) return false;
  const std::string got = pbkdf2_sha256(
      credential, std::string_view(reinterpret_cast<const char*>(salt->data()), salt->size()),
      iterations);
  return constant_time_equal(
      got, std::string_view(reinterpret_cast<const char*>(expected->data()), expected->size()));
}

}  // namespace roma::service
