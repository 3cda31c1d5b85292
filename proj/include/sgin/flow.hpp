#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sgin/core.hpp"

namespace sgin {

// Deadline-constrained image flow. `dest` may be a ground node id or "*"
// for any ground station. theta is the compression ratio: a compressed
// flow continues at theta * volume, the remainder is absorbed as loss.
struct Flow {
  std::string id;
  std::string source;
  std::string dest = "*";
  bits_t volume_bits = 0;
  int t_start = 1;
  int t_end = 1;
  double theta = 1.0;

  bool any_dest() const { return dest == "*"; }
};

inline bits_t compressed_bits(bits_t volume, double theta) {
  return static_cast<bits_t>(std::llround(static_cast<double>(volume) * theta));
}

inline void check_flow(const Flow& f) {
  if (f.id.empty()) throw config_error("flow: empty id");
  if (f.source.empty()) throw config_error("flow " + f.id + ": empty source");
  if (f.volume_bits <= 0) throw config_error("flow " + f.id + ": volume must be positive");
  if (f.t_start < 1 || f.t_end < f.t_start)
    throw config_error("flow " + f.id + ": bad time window [" + std::to_string(f.t_start) +
                       "," + std::to_string(f.t_end) + "]");
  if (!(f.theta > 0.0) || f.theta > 1.0)
    throw config_error("flow " + f.id + ": theta must be in (0,1]");
}

// --- flow CSV: `id,src,dst,volume_mbits,t_start,t_end,theta` ---

inline void save_flows(const std::vector<Flow>& flows, std::ostream& os) {
  os << "id,src,dst,volume_mbits,t_start,t_end,theta\n";
  for (const auto& f : flows) {
    os << f.id << ',' << f.source << ',' << f.dest << ',' << f.volume_bits / kBitsPerMbit << ','
       << f.t_start << ',' << f.t_end << ',';
    std::ostringstream th;
    th.precision(17);
    th << f.theta;
    os << th.str() << '\n';
  }
}

inline void save_flows(const std::vector<Flow>& flows, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw parse_error("save_flows: cannot open " + path);
  save_flows(flows, f);
}

inline std::vector<Flow> load_flows(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw parse_error("flow CSV: empty file");
  if (line.size() && line.back() == '\r') line.pop_back();
  if (line != "id,src,dst,volume_mbits,t_start,t_end,theta")
    throw parse_error("flow CSV line 1: expected header 'id,src,dst,volume_mbits,t_start,t_end,theta'");
  std::vector<Flow> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string id, src, dst, vol_s, ts_s, te_s, th_s;
    if (!std::getline(ss, id, ',') || !std::getline(ss, src, ',') || !std::getline(ss, dst, ',') ||
        !std::getline(ss, vol_s, ',') || !std::getline(ss, ts_s, ',') ||
        !std::getline(ss, te_s, ',') || !std::getline(ss, th_s))
      throw parse_error("flow CSV line " + std::to_string(lineno) + ": expected 7 fields");
    Flow f;
    f.id = id;
    f.source = src;
    f.dest = dst;
    try {
      f.volume_bits = static_cast<bits_t>(std::stoll(vol_s)) * kBitsPerMbit;
      f.t_start = std::stoi(ts_s);
      f.t_end = std::stoi(te_s);
      f.theta = std::stod(th_s);
    } catch (const std::exception&) {
      throw parse_error("flow CSV line " + std::to_string(lineno) + ": bad number");
    }
    try {
      check_flow(f);
    } catch (const config_error& e) {
      throw parse_error("flow CSV line " + std::to_string(lineno) + ": " + e.what());
    }
    out.push_back(std::move(f));
  }
  return out;
}

inline std::vector<Flow> load_flows(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw parse_error("load_flows: cannot open " + path);
  return load_flows(f);
}

}  // namespace sgin
