#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "roma/error.hpp"

namespace roma {

enum class Role { kPilot, kNavigator, kSolo };

enum class SessionType { kPair, kSolo };

/// ROMA personality clusters; numbering follows the framework's table.
enum class Cluster { k1 = 1, k2 = 2, k3 = 3 };

constexpr std::string_view to_string(Role role) {
  switch (role) {
    case Role::kPilot: return "PILOT";
    case Role::kNavigator: return "NAVIGATOR";
    case Role::kSolo: return "SOLO";
  }
  return "?";
}

constexpr std::string_view to_string(SessionType type) {
  return type == SessionType::kPair ? "PAIR" : "SOLO";
}

constexpr std::string_view to_string(Cluster cluster) {
  switch (cluster) {
    case Cluster::k1: return "CLUSTER_1";
    case Cluster::k2: return "CLUSTER_2";
    case Cluster::k3: return "CLUSTER_3";
  }
  return "?";
}

inline Role parse_role(std::string_view text) {
  if (text == "PILOT") return Role::kPilot;
  if (text == "NAVIGATOR") return Role::kNavigator;
  if (text == "SOLO") return Role::kSolo;
  fail(ErrorKind::kValidation, "unknown role '" + std::string(text) + "'");
}

inline SessionType parse_session_type(std::string_view text) {
  if (text == "PAIR") return SessionType::kPair;
  if (text == "SOLO") return SessionType::kSolo;
  fail(ErrorKind::kValidation, "unknown session type '" + std::string(text) + "'");
}

inline Cluster parse_cluster(std::string_view text) {
  if (text == "CLUSTER_1") return Cluster::k1;
  if (text == "CLUSTER_2") return Cluster::k2;
  if (text == "CLUSTER_3") return Cluster::k3;
  fail(ErrorKind::kValidation, "unknown cluster '" + std::string(text) + "'");
}

inline Cluster cluster_from_number(int n) {
  if (n < 1 || n > 3) {
    fail(ErrorKind::kValidation, "cluster number out of range: " + std::to_string(n));
  }
  return static_cast<Cluster>(n);
}

/// Cluster 1 -> Pilot, Cluster 2 -> Navigator, Cluster 3 -> Solo.
constexpr Role preferred_role(Cluster cluster) {
  switch (cluster) {
    case Cluster::k1: return Role::kPilot;
    case Cluster::k2: return Role::kNavigator;
    case Cluster::k3: return Role::kSolo;
  }
  return Role::kSolo;
}

constexpr bool is_pair_role(Role role) { return role != Role::kSolo; }

constexpr Role other_pair_role(Role role) {
  return role == Role::kPilot ? Role::kNavigator : Role::kPilot;
}

}  // namespace roma
