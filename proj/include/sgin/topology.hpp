#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sgin/core.hpp"

namespace sgin {

inline constexpr double kSpeedOfLightKmS = 299792.458;
inline constexpr double kBoltzmann = 1.380649e-23;
inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthMuKm3S2 = 398600.4418;
inline constexpr double kEarthRotRadS = 7.2921159e-5;

enum class NodeKind { Observation, Leo, Ground };

// Node ids carry their kind in the first character: `o*` observation
// satellites, `g*` ground stations, anything else a LEO relay. This is the
// wire contract for the adjacency CSV, which has no kind column.
inline NodeKind kind_of(const std::string& id) {
  if (!id.empty() && id[0] == 'o') return NodeKind::Observation;
  if (!id.empty() && id[0] == 'g') return NodeKind::Ground;
  return NodeKind::Leo;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

// Free-space path loss (c / (4 pi d f))^2, dimensionless, in (0,1) for any
// realistic geometry. Distance in km, frequency in Hz.
inline double free_space_loss(double distance_km, double freq_hz) {
  if (distance_km <= 0.0) throw std::domain_error("free_space_loss: distance must be positive");
  if (freq_hz <= 0.0) throw std::domain_error("free_space_loss: frequency must be positive");
  const double x = kSpeedOfLightKmS / (4.0 * M_PI * distance_km * freq_hz);
  return x * x;
}

// Inter-satellite link budget. Gains and losses are stored in dB and
// converted to linear factors inside the rate functions; all other
// arithmetic is linear. gamma_s/margin/ebn0 are positive-dB attenuations
// and requirements, k_b is the Boltzmann constant.
struct IslLinkParams {
  double p_tr_w = 4.0;
  double g_tr_db = 36.0;
  double g_re_db = 36.0;
  double gamma_s_db = 2.0;      // total line loss
  double t_sys_k = 1000.0;      // system noise temperature
  double ebn0_req_db = 20.0;
  double margin_db = 3.0;       // link margin M
  double freq_hz = 23e9;
  double k_b = kBoltzmann;
};

inline double isl_rate(const IslLinkParams& p, double distance_km) {
  if (p.p_tr_w <= 0.0 || p.t_sys_k <= 0.0 || p.k_b <= 0.0)
    throw std::domain_error("isl_rate: nonpositive power or noise parameter");
  const double l_pl = free_space_loss(distance_km, p.freq_hz);
  const double num = p.p_tr_w * db_to_linear(p.g_re_db) * db_to_linear(p.g_tr_db) * l_pl *
                     db_to_linear(-p.gamma_s_db);
  const double den =
      p.k_b * p.t_sys_k * db_to_linear(p.ebn0_req_db) * db_to_linear(p.margin_db);
  return num / den;
}

// Satellite-to-ground Shannon rate. The SNR bracket is squared by default;
// snr_square=false falls back to the plain ratio.
struct SgLinkParams {
  double p_tr_w = 8.0;
  double g_tr_db = 25.0;
  double g_re_db = 10.0;
  double gamma_r_db = 3.0;      // rain attenuation
  double n0_w_per_hz = kBoltzmann * 500.0;
  double bandwidth_hz = 1e6;
  double freq_hz = 20e9;
  bool snr_square = true;
};

inline double sg_rate(const SgLinkParams& p, double distance_km) {
  if (p.p_tr_w <= 0.0 || p.n0_w_per_hz <= 0.0 || p.bandwidth_hz <= 0.0)
    throw std::domain_error("sg_rate: nonpositive power, noise or bandwidth");
  const double l_pl = free_space_loss(distance_km, p.freq_hz);
  const double bracket = p.p_tr_w * db_to_linear(p.g_tr_db) * db_to_linear(p.g_re_db) * l_pl *
                         db_to_linear(-p.gamma_r_db) /
                         (p.n0_w_per_hz * p.bandwidth_hz);
  const double snr = p.snr_square ? bracket * bracket : bracket;
  return p.bandwidth_hz * std::log2(1.0 + snr);
}

struct GroundStation {
  std::string id;
  double latitude_deg = 0.0;
  double longitude_deg = 0.0;
};

struct ConstellationSpec {
  int planes = 6;
  int sats_per_plane = 11;
  double altitude_km = 780.0;
  double inclination_deg = 86.4;
  int n_observation = 2;
  double observation_alt_offset_km = 50.0;  // observers fly slightly below
  double elevation_mask_deg = 10.0;
  std::uint64_t seed = 0;                   // seeds the observer draw
  IslLinkParams isl;
  SgLinkParams sg;
};

// One time-slot snapshot: directed link rates in bit/s keyed by (src,dst).
struct SlotTopology {
  int slot = 0;
  std::map<std::pair<std::string, std::string>, double> rate_bps;
};

namespace detail {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

inline Vec3 sub(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 scale(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }

// Circular-orbit position in ECI at time t for a satellite with given RAAN,
// inclination and initial argument of latitude.
inline Vec3 orbit_pos(double radius_km, double raan, double incl, double arg0, double t_s) {
  const double n = std::sqrt(kEarthMuKm3S2 / (radius_km * radius_km * radius_km));
  const double u = arg0 + n * t_s;
  const double cu = std::cos(u), su = std::sin(u);
  const double co = std::cos(raan), so = std::sin(raan);
  const double ci = std::cos(incl), si = std::sin(incl);
  return {radius_km * (co * cu - so * su * ci), radius_km * (so * cu + co * su * ci),
          radius_km * (su * si)};
}

inline Vec3 station_pos(const GroundStation& g, double t_s) {
  const double lat = g.latitude_deg * M_PI / 180.0;
  const double lon = g.longitude_deg * M_PI / 180.0 + kEarthRotRadS * t_s;
  return {kEarthRadiusKm * std::cos(lat) * std::cos(lon),
          kEarthRadiusKm * std::cos(lat) * std::sin(lon), kEarthRadiusKm * std::sin(lat)};
}

inline double elevation_deg(const Vec3& sta, const Vec3& sat) {
  const Vec3 d = sub(sat, sta);
  const double dn = norm(d);
  if (dn == 0.0) return 90.0;
  const double se = dot(scale(sta, 1.0 / norm(sta)), scale(d, 1.0 / dn));
  return std::asin(std::clamp(se, -1.0, 1.0)) * 180.0 / M_PI;
}

}  // namespace detail

inline std::string normalized_station_id(const std::string& id) {
  if (!id.empty() && id[0] == 'g') return id;
  return "g_" + id;
}

// Walker-style snapshot propagator. Positions are sampled mid-slot and held
// for the slot. ISL visibility: intra-plane ring neighbours plus the
// same-index satellite in each adjacent plane. Ground visibility: elevation
// above the mask. Observation satellites are drawn from constellation seats
// (seeded) and fly co-located slightly below their host; they uplink to the
// host and its ring neighbours.
inline std::vector<SlotTopology> propagate(const ConstellationSpec& spec,
                                           const std::vector<GroundStation>& stations,
                                           int horizon_slots, double tau_s) {
  if (spec.planes < 1 || spec.sats_per_plane < 1)
    throw config_error("propagate: constellation must have at least one plane and satellite");
  if (horizon_slots < 1) throw config_error("propagate: horizon must be at least one slot");
  if (tau_s <= 0.0) throw config_error("propagate: slot length must be positive");
  if (spec.n_observation < 0 || spec.n_observation > spec.planes * spec.sats_per_plane)
    throw config_error("propagate: observation count exceeds constellation size");

  const int P = spec.planes, S = spec.sats_per_plane;
  const double radius = kEarthRadiusKm + spec.altitude_km;
  const double incl = spec.inclination_deg * M_PI / 180.0;

  auto sat_id = [](int p, int k) { return "s" + std::to_string(p + 1) + "_" + std::to_string(k + 1); };

  // Seeded draw of observer host seats, without replacement.
  std::vector<int> seats(static_cast<std::size_t>(P) * S);
  for (std::size_t i = 0; i < seats.size(); ++i) seats[i] = static_cast<int>(i);
  Rng rng(spec.seed);
  std::vector<int> hosts;
  for (int j = 0; j < spec.n_observation; ++j) {
    const auto pick = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(seats.size()) - 1));
    hosts.push_back(seats[pick]);
    seats.erase(seats.begin() + static_cast<std::ptrdiff_t>(pick));
  }

  std::vector<SlotTopology> out;
  out.reserve(static_cast<std::size_t>(horizon_slots));
  for (int slot = 1; slot <= horizon_slots; ++slot) {
    const double t = (slot - 0.5) * tau_s;
    SlotTopology st;
    st.slot = slot;

    std::vector<std::vector<detail::Vec3>> pos(P, std::vector<detail::Vec3>(S));
    for (int p = 0; p < P; ++p) {
      const double raan = p * 2.0 * M_PI / P;
      for (int k = 0; k < S; ++k) {
        const double arg0 = k * 2.0 * M_PI / S + p * 2.0 * M_PI / (P * S);
        pos[p][k] = detail::orbit_pos(radius, raan, incl, arg0, t);
      }
    }

    auto add_link = [&](const std::string& a, const std::string& b, double rate) {
      if (rate > 0.0) st.rate_bps[{a, b}] = rate;
    };
    auto add_isl_pair = [&](int p1, int k1, int p2, int k2) {
      const double d = detail::norm(detail::sub(pos[p1][k1], pos[p2][k2]));
      if (d <= 0.0) return;
      const double r = isl_rate(spec.isl, d);
      add_link(sat_id(p1, k1), sat_id(p2, k2), r);
      add_link(sat_id(p2, k2), sat_id(p1, k1), r);
    };

    for (int p = 0; p < P; ++p)
      for (int k = 0; k < S; ++k) {
        if (S > 1) {
          const int kn = (k + 1) % S;
          if (!(S == 2 && k == 1)) add_isl_pair(p, k, p, kn);  // ring, deduped for S=2
        }
        if (P > 1) {
          const int pn = (p + 1) % P;
          if (!(P == 2 && p == 1)) add_isl_pair(p, k, pn, k);
        }
      }

    // Observation uplinks: host plus ring neighbours, one-way into the mesh.
    for (std::size_t j = 0; j < hosts.size(); ++j) {
      const int hp = hosts[j] / S, hk = hosts[j] % S;
      const std::string oid = "o" + std::to_string(j + 1);
      const detail::Vec3 opos =
          detail::scale(pos[hp][hk], (radius - spec.observation_alt_offset_km) / radius);
      auto link_to = [&](int p, int k) {
        const double d = detail::norm(detail::sub(opos, pos[p][k]));
        if (d > 0.0) add_link(oid, sat_id(p, k), isl_rate(spec.isl, d));
      };
      link_to(hp, hk);
      if (S > 1) {
        link_to(hp, (hk + 1) % S);
        if (S > 2) link_to(hp, (hk + S - 1) % S);
      }
    }

    for (const auto& g : stations) {
      const detail::Vec3 gp = detail::station_pos(g, t);
      const std::string gid = normalized_station_id(g.id);
      for (int p = 0; p < P; ++p)
        for (int k = 0; k < S; ++k) {
          if (detail::elevation_deg(gp, pos[p][k]) < spec.elevation_mask_deg) continue;
          const double d = detail::norm(detail::sub(pos[p][k], gp));
          add_link(sat_id(p, k), gid, sg_rate(spec.sg, d));
        }
    }

    out.push_back(std::move(st));
  }
  return out;
}

// --- adjacency CSV: `slot,src,dst,rate_bps`, slots 1-based contiguous ---

inline void save_adjacency(const std::vector<SlotTopology>& slots, std::ostream& os) {
  os << "slot,src,dst,rate_bps\n";
  for (const auto& st : slots) {
    std::ostringstream line;
    for (const auto& [key, rate] : st.rate_bps) {
      line.str("");
      line << st.slot << ',' << key.first << ',' << key.second << ',';
      line.precision(17);
      line << rate << '\n';
      os << line.str();
    }
  }
}

inline void save_adjacency(const std::vector<SlotTopology>& slots, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw parse_error("save_adjacency: cannot open " + path);
  save_adjacency(slots, f);
}

inline std::vector<SlotTopology> load_adjacency(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw parse_error("adjacency CSV: empty file");
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "slot,src,dst,rate_bps")
    throw parse_error("adjacency CSV line 1: expected header 'slot,src,dst,rate_bps'");

  std::map<int, SlotTopology> by_slot;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string slot_s, src, dst, rate_s;
    if (!std::getline(ss, slot_s, ',') || !std::getline(ss, src, ',') ||
        !std::getline(ss, dst, ',') || !std::getline(ss, rate_s))
      throw parse_error("adjacency CSV line " + std::to_string(lineno) + ": expected 4 fields");
    int slot = 0;
    double rate = 0.0;
    try {
      slot = std::stoi(slot_s);
      rate = std::stod(rate_s);
    } catch (const std::exception&) {
      throw parse_error("adjacency CSV line " + std::to_string(lineno) + ": bad number");
    }
    if (slot < 1)
      throw parse_error("adjacency CSV line " + std::to_string(lineno) + ": slot must be >= 1");
    if (rate <= 0.0)
      throw parse_error("adjacency CSV line " + std::to_string(lineno) + ": rate must be positive");
    if (src.empty() || dst.empty() || src == dst)
      throw parse_error("adjacency CSV line " + std::to_string(lineno) + ": bad endpoints");
    auto& st = by_slot[slot];
    st.slot = slot;
    st.rate_bps[{src, dst}] = rate;
  }
  if (by_slot.empty()) throw parse_error("adjacency CSV: no links");
  const int K = by_slot.rbegin()->first;
  std::vector<SlotTopology> out;
  for (int s = 1; s <= K; ++s) {
    auto it = by_slot.find(s);
    if (it == by_slot.end())
      throw parse_error("adjacency CSV: slot " + std::to_string(s) +
                        " missing; slots must be contiguous from 1");
    out.push_back(std::move(it->second));
  }
  return out;
}

inline std::vector<SlotTopology> load_adjacency(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("load_adjacency: cannot open " + path);
  return load_adjacency(f);
}

}  // namespace sgin
