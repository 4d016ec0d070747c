#pragma once

// Role-level motivation aggregates and the H1 / H1-Cor / H2 report.
//
// Unit of analysis: one mean per (participant, role), taken over every round
// the participant spent in that role. Four participants in three roles gives
// the twelve points behind df = (2, 9).

#include <algorithm>
#include <cstddef>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roma/canonical_json.hpp"
#include "roma/error.hpp"
#include "roma/observations.hpp"
#include "roma/roles.hpp"
#include "roma/stats/hypothesis_tests.hpp"

namespace roma::stats {

inline constexpr Role kRoleOrder[] = {Role::kPilot, Role::kNavigator, Role::kSolo};

struct RoleSummary {
  Role role = Role::kPilot;
  std::vector<double> unit_means;  // one per participant, participant-hash order
  double mean = 0.0;
  std::optional<double> sd;
};

struct MotivationByRole {
  std::vector<RoleSummary> roles;  // Pilot, Navigator, Solo; absent roles omitted
  std::map<std::string, std::map<Role, double>> participant_role_means;
  std::vector<std::string> notes;

  const RoleSummary* find(Role r) const {
    for (const auto& s : roles) {
      if (s.role == r) return &s;
    }
    return nullptr;
  }
};

inline MotivationByRole motivation_by_role(const ObservationTable& table) {
  if (table.rows.empty()) fail(ErrorKind::kContract, "observation table is empty");
  std::map<std::string, std::map<Role, std::pair<double, std::size_t>>> acc;
  for (const auto& row : table.rows) {
    auto& cell = acc[row.participant_hash][row.role];
    cell.first += row.motivation_scaled;
    cell.second += 1;
  }
  MotivationByRole out;
  for (const auto& [who, per_role] : acc) {
    for (const auto& [role, cell] : per_role) {
      out.participant_role_means[who][role] = cell.first / static_cast<double>(cell.second);
    }
  }
  for (Role role : kRoleOrder) {
    RoleSummary s;
    s.role = role;
    for (const auto& [who, per_role] : out.participant_role_means) {
      auto it = per_role.find(role);
      if (it != per_role.end()) s.unit_means.push_back(it->second);
    }
    if (s.unit_means.empty()) {
      out.notes.push_back(std::string(to_string(role)) + ": no observations");
      continue;
    }
    const MeanSd ms = mean_sd(s.unit_means);
    s.mean = ms.mean;
    s.sd = ms.sd;
    if (!s.sd) out.notes.push_back(std::string(to_string(role)) + ": single unit, sd undefined");
    out.roles.push_back(std::move(s));
  }
  return out;
}

struct AnalysisReport {
  std::size_t observations = 0;
  std::size_t sessions = 0;
  std::size_t participants = 0;
  std::optional<MotivationByRole> descriptive;

  std::optional<StatResult> h1_anova;
  std::optional<StatResult> h1_kruskal;

  std::optional<StatResult> h1cor_friedman;
  std::optional<StatResult> h1cor_paired_t;
  std::optional<double> h1cor_mean_diff;
  std::size_t h1cor_participants = 0;

  std::size_t h2_cluster1_members = 0;
  std::optional<Role> h2_cluster1_top_role;
  bool h2_tie = false;
  bool h2_supported = false;

  std::vector<std::string> gaps;
};

/// H1: one-way ANOVA and Kruskal-Wallis across role unit means.
/// H1-Cor: Friedman over the participant x role matrix, paired t on each
/// participant's best-role mean minus worst-role mean.
/// H2: supported iff Cluster 1 members' highest-mean role is PILOT.
/// Missing data produces gaps, never a fabricated p-value.
inline AnalysisReport evaluate_hypotheses(const ObservationTable& table,
                                          const std::map<std::string, Cluster>& clusters) {
  AnalysisReport rep;
  rep.observations = table.rows.size();
  std::set<std::string> sessions;
  for (const auto& r : table.rows) sessions.insert(r.session_id);
  rep.sessions = sessions.size();
  if (table.rows.empty()) {
    rep.gaps.push_back("insufficient data: no observations");
    rep.gaps.push_back("h1: insufficient data");
    rep.gaps.push_back("h1cor: insufficient data");
    rep.gaps.push_back("h2: insufficient data");
    return rep;
  }
  rep.descriptive = motivation_by_role(table);
  const MotivationByRole& d = *rep.descriptive;
  rep.participants = d.participant_role_means.size();

  // H1
  std::vector<std::vector<double>> anova_groups;
  std::vector<std::vector<double>> kw_groups;
  for (const auto& s : d.roles) {
    kw_groups.push_back(s.unit_means);
    if (s.unit_means.size() >= 2) anova_groups.push_back(s.unit_means);
    else rep.gaps.push_back("h1.anova: " + std::string(to_string(s.role)) + " has fewer than 2 units");
  }
  if (anova_groups.size() >= 2) rep.h1_anova = one_way_anova(anova_groups);
  else rep.gaps.push_back("h1.anova: insufficient data (need 2 roles with >= 2 units)");
  std::size_t kw_n = 0;
  for (const auto& g : kw_groups) kw_n += g.size();
  if (kw_groups.size() >= 2 && kw_n >= 3) rep.h1_kruskal = kruskal_wallis(kw_groups);
  else rep.gaps.push_back("h1.kruskal: insufficient data (need 2 roles and N >= 3)");

  // H1-Cor
  std::vector<std::vector<double>> matrix;
  for (const auto& [who, per_role] : d.participant_role_means) {
    std::vector<double> row;
    for (const auto& s : d.roles) {
      auto it = per_role.find(s.role);
      if (it == per_role.end()) break;
      row.push_back(it->second);
    }
    if (row.size() == d.roles.size()) matrix.push_back(std::move(row));
  }
  rep.h1cor_participants = matrix.size();
  if (d.roles.size() >= 2 && matrix.size() >= 2) {
    rep.h1cor_friedman = friedman(matrix);
    std::vector<double> hi, lo;
    for (const auto& row : matrix) {
      hi.push_back(*std::max_element(row.begin(), row.end()));
      lo.push_back(*std::min_element(row.begin(), row.end()));
    }
    rep.h1cor_paired_t = paired_t(hi, lo);
    rep.h1cor_mean_diff = rep.h1cor_paired_t->mean_diff;
  } else {
    rep.gaps.push_back("h1cor: insufficient data (need >= 2 participants observed in >= 2 roles)");
  }

  // H2
  std::map<Role, std::vector<double>> c1;
  std::set<std::string> members;
  for (const auto& [who, per_role] : d.participant_role_means) {
    auto it = clusters.find(who);
    if (it == clusters.end() || it->second != Cluster::k1) continue;
    members.insert(who);
    for (const auto& [role, m] : per_role) c1[role].push_back(m);
  }
  rep.h2_cluster1_members = members.size();
  if (members.empty()) {
    rep.gaps.push_back("h2: no Cluster 1 participants observed");
  } else if (c1.size() < 2) {
    rep.gaps.push_back("h2: Cluster 1 observed in fewer than 2 roles");
  } else {
    std::optional<Role> top;
    double best = 0.0;
    bool tie = false;
    for (Role role : kRoleOrder) {
      auto it = c1.find(role);
      if (it == c1.end()) continue;
      const double m = mean_sd(it->second).mean;
      if (!top || m > best) {
        top = role;
        best = m;
        tie = false;
      } else if (m == best) {
        tie = true;
      }
    }
    rep.h2_tie = tie;
    if (tie) {
      rep.gaps.push_back("h2: undecidable, tie for the highest Cluster 1 role mean");
    } else {
      rep.h2_cluster1_top_role = top;
    }
  }
  rep.h2_supported = rep.h2_cluster1_top_role == Role::kPilot;
  return rep;
}

inline Json stat_to_json(const StatResult& r) {
  Json j = {{"df", r.df}, {"p_value", r.p_value}};
  if (std::isinf(r.statistic)) j["statistic"] = r.statistic > 0 ? "+inf" : "-inf";
  else j["statistic"] = r.statistic;
  if (r.ci95) j["ci95"] = {r.ci95->first, r.ci95->second};
  if (r.mean_diff) j["mean_diff"] = *r.mean_diff;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json to_json(const AnalysisReport& rep) {
  Json j;
  j["observations"] = rep.observations;
  j["sessions"] = rep.sessions;
  j["participants"] = rep.participants;
  Json roles = Json::array();
  Json per_participant = Json::object();
  if (rep.descriptive) {
    for (const auto& s : rep.descriptive->roles) {
      Json r = {{"role", std::string(to_string(s.role))},
                {"units", s.unit_means.size()},
                {"mean", s.mean}};
      r["sd"] = s.sd ? Json(*s.sd) : Json(nullptr);
      roles.push_back(r);
    }
    for (const auto& [who, per_role] : rep.descriptive->participant_role_means) {
      Json m = Json::object();
      for (const auto& [role, v] : per_role) m[std::string(to_string(role))] = v;
      per_participant[who] = m;
    }
    j["notes"] = rep.descriptive->notes;
  } else {
    j["notes"] = Json::array();
  }
  j["roles"] = roles;
  j["participant_role_means"] = per_participant;
  auto opt = [](const std::optional<StatResult>& r) { return r ? stat_to_json(*r) : Json(nullptr); };
  j["h1"] = {{"anova", opt(rep.h1_anova)}, {"kruskal", opt(rep.h1_kruskal)}};
  j["h1cor"] = {{"friedman", opt(rep.h1cor_friedman)},
                {"paired_t", opt(rep.h1cor_paired_t)},
                {"participants", rep.h1cor_participants},
                {"mean_diff", rep.h1cor_mean_diff ? Json(*rep.h1cor_mean_diff) : Json(nullptr)}};
  j["h2"] = {{"cluster1_members", rep.h2_cluster1_members},
             {"cluster1_top_role", rep.h2_cluster1_top_role
                                       ? Json(std::string(to_string(*rep.h2_cluster1_top_role)))
                                       : Json(nullptr)},
             {"tie", rep.h2_tie},
             {"supported", rep.h2_supported}};
  j["gaps"] = rep.gaps;
  return j;
}

/// Canonical bytes of the report; identical inputs give identical bytes.
inline std::string encode_report(const AnalysisReport& rep) { return canonical_dump(to_json(rep)); }

namespace detail {

inline std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

inline std::string describe(const char* label, const std::optional<StatResult>& r,
                            const char* symbol) {
  std::string line = std::string("  ") + label + ": ";
  if (!r) return line + "not computed\n";
  line += symbol;
  line += "(";
  for (std::size_t i = 0; i < r->df.size(); ++i) {
    if (i) line += ", ";
    line += std::to_string(r->df[i]);
  }
  line += ") = " + fmt("%.3f", r->statistic) + ", p = " + fmt("%.4f", r->p_value);
  if (r->ci95) {
    line += ", 95% CI [" + fmt("%.3f", r->ci95->first) + ", " + fmt("%.3f", r->ci95->second) + "]";
  }
  if (!r->note.empty()) line += " (" + r->note + ")";
  return line + "\n";
}

}  // namespace detail

inline std::string render_text(const AnalysisReport& rep) {
  using detail::fmt;
  std::string out;
  out += "Observations: " + std::to_string(rep.observations) + " rows, " +
         std::to_string(rep.sessions) + " sessions, " + std::to_string(rep.participants) +
         " participants\n\n";
  out += "Intrinsic motivation by role (1-10 scale, participant-level means)\n";
  out += "  Role        Units   Mean    SD\n";
  if (rep.descriptive) {
    for (const auto& s : rep.descriptive->roles) {
      char line[96];
      std::snprintf(line, sizeof line, "  %-10s  %5zu  %5.2f  %5s\n",
                    std::string(to_string(s.role)).c_str(), s.unit_means.size(), s.mean,
                    s.sd ? fmt("%.2f", *s.sd).c_str() : "n/a");
      out += line;
    }
  }
  out += "\nH1 (motivation differs across roles)\n";
  out += detail::describe("ANOVA", rep.h1_anova, "F");
  out += detail::describe("Kruskal-Wallis", rep.h1_kruskal, "chi2");
  out += "\nH1-Cor (individual differences across roles are consistent)\n";
  out += detail::describe("Friedman", rep.h1cor_friedman, "chi2");
  out += detail::describe("Paired t (max - min role)", rep.h1cor_paired_t, "t");
  if (rep.h1cor_mean_diff) out += "  Mean difference: " + fmt("%.3f", *rep.h1cor_mean_diff) + "\n";
  out += "\nH2 (high Openness prefers Pilot)\n";
  out += "  Cluster 1 members: " + std::to_string(rep.h2_cluster1_members) + "\n";
  out += "  Top role: " +
         (rep.h2_cluster1_top_role ? std::string(to_string(*rep.h2_cluster1_top_role))
                                   : std::string(rep.h2_tie ? "tie" : "n/a")) +
         "\n";
  out += std::string("  Supported: ") + (rep.h2_supported ? "yes" : "no") + "\n";
  if (!rep.gaps.empty()) {
    out += "\nGaps\n";
    for (const auto& g : rep.gaps) out += "  - " + g + "\n";
  }
  return out;
}

}  // namespace roma::stats
