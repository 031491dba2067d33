#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qns/config.hpp"
#include "qns/experiments.hpp"

namespace qns {

/// 17 significant digits: doubles round-trip exactly through the text form.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline const char* diagnostics_csv_version() { return "qns-diagnostics-v1"; }

/// Fixed column order: the balance block first, then the dashboard norms in
/// their documented order.
inline std::vector<std::string> diagnostics_header(const NormExponents& e) {
  std::vector<std::string> h = {"t",          "mass",          "energy",
                                "energy_dissipation", "energy_residual", "bd_entropy",
                                "bd_dissipation",     "bd_residual",     "min_n",
                                "max_n"};
  for (const auto& col : dashboard_columns(e)) h.push_back(col.name);
  return h;
}

inline void write_diagnostics_csv(const std::string& path,
                                  const std::vector<DiagnosticsRecord>& records,
                                  const NormExponents& e) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "# " << diagnostics_csv_version() << "\n";
  const auto header = diagnostics_header(e);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  for (const auto& r : records) {
    out << format_double(r.time) << ',' << format_double(r.mass) << ','
        << format_double(r.energy) << ',' << format_double(r.energy_dissipation) << ','
        << format_double(r.energy_residual) << ',' << format_double(r.bd_entropy) << ','
        << format_double(r.bd_dissipation) << ',' << format_double(r.bd_residual) << ','
        << format_double(r.min_n) << ',' << format_double(r.max_n);
    for (const auto& col : dashboard_columns(e)) out << ',' << format_double(r.*(col.member));
    out << "\n";
  }
}

/// 1D snapshots as human-readable CSV: x, n, then one velocity column.
inline void write_snapshot_csv(const std::string& path, const SimState& s) {
  const Grid& g = s.n.grid();
  if (g.dim() != 1) throw ValidationError("snapshot CSV is for 1D only; use the binary format");
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "x,n,vel0\n";
  for (std::size_t i = 0; i < s.n.size(); ++i) {
    out << format_double(g.coord(i, 0)) << ',' << format_double(s.n[i]) << ','
        << format_double(s.vel.comp(0)[i]) << "\n";
  }
}

/// Flat binary snapshot for 2D/3D (works in 1D too): the 8-byte magic
/// "QNSSNAP1", then int64 dim, int64 points-per-dim, float64 length, float64
/// time, int64 field count (1 + dim), then the fields (n first, then the
/// velocity components) as row-major little-endian float64.
inline void write_snapshot_binary(const std::string& path, const SimState& s) {
  const Grid& g = s.n.grid();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out.write("QNSSNAP1", 8);
  auto put_i64 = [&](std::int64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_i64(g.dim());
  put_i64(g.points_per_dim());
  put_f64(g.length());
  put_f64(s.time);
  put_i64(1 + g.dim());
  out.write(reinterpret_cast<const char*>(s.n.values().data()),
            static_cast<std::streamsize>(s.n.size() * sizeof(double)));
  for (int a = 0; a < g.dim(); ++a)
    out.write(reinterpret_cast<const char*>(s.vel.comp(a).values().data()),
              static_cast<std::streamsize>(s.n.size() * sizeof(double)));
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const SweepReport& r) {
  nlohmann::json j;
  j["kind"] = "epsilon_sweep";
  j["slope_all"] = r.slope_all;
  j["slope_tail"] = r.slope_tail;
  j["max_norms"] = r.max_norms;
  j["baseline_norms"] = r.baseline_norms;
  for (const auto& e : r.entries) {
    nlohmann::json je;
    je["eps"] = e.eps;
    je["dist_n_l2linf"] = e.dist_n_l2linf;
    je["dist_sqrtn_l2h1"] = e.dist_sqrtn_l2h1;
    je["dist_momentum_l2l2"] = e.dist_momentum_l2l2;
    je["quantum_weak_magnitude"] = e.quantum_weak_magnitude;
    je["norms"] = e.bochner;
    j["entries"].push_back(je);
  }
  return j;
}

inline nlohmann::json to_json(const RefinementReport& r) {
  nlohmann::json j;
  j["kind"] = r.parameter_name + "_study";
  j["parameter"] = r.parameter_name;
  for (const auto& lvl : r.levels) {
    nlohmann::json jl;
    jl[r.parameter_name] = lvl.parameter;
    jl["gap_to_previous"] = lvl.gap_to_previous;
    jl["norms"] = lvl.bochner;
    j["levels"].push_back(jl);
  }
  return j;
}

inline nlohmann::json to_json(const IdentityReport& r) {
  nlohmann::json j;
  j["kind"] = "identity_battery";
  j["resolution"] = r.resolution;
  j["max_bohm"] = r.max_bohm;
  j["max_weak_vs_strong"] = r.max_weak_vs_strong;
  j["max_entropy_identity"] = r.max_entropy_identity;
  for (const auto& row : r.rows) {
    nlohmann::json jr;
    jr["profile"] = row.profile;
    jr["bohm"] = row.bohm;
    jr["weak_vs_strong"] = row.weak_vs_strong;
    jr["entropy_identity"] = row.entropy_identity;
    j["rows"].push_back(jr);
  }
  return j;
}

inline nlohmann::json to_json(const BalanceRefinement& r) {
  nlohmann::json j;
  j["kind"] = "balance_refinement";
  j["identified_kappa"] = r.identified_kappa;
  j["dts"] = r.dts;
  j["energy_residuals"] = r.energy_residuals;
  j["bd_residuals"] = r.bd_residuals;
  return j;
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

/// One CSV row per sweep entry.
inline void write_sweep_csv(const std::string& path, const SweepReport& r) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << "eps,dist_n_l2linf,dist_sqrtn_l2h1,dist_momentum_l2l2,quantum_weak_magnitude\n";
  for (const auto& e : r.entries)
    out << format_double(e.eps) << ',' << format_double(e.dist_n_l2linf) << ','
        << format_double(e.dist_sqrtn_l2h1) << ',' << format_double(e.dist_momentum_l2l2) << ','
        << format_double(e.quantum_weak_magnitude) << "\n";
}

/// One CSV row per refinement level.
inline void write_refinement_csv(const std::string& path, const RefinementReport& r) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << r.parameter_name << ",gap_to_previous\n";
  for (const auto& lvl : r.levels)
    out << format_double(lvl.parameter) << ',' << format_double(lvl.gap_to_previous) << "\n";
}

}  // namespace qns
