#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "topodyn/certificates.hpp"
#include "topodyn/geometry.hpp"
#include "topodyn/limits.hpp"
#include "topodyn/shifts.hpp"
#include "topodyn/span.hpp"

namespace topodyn {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Deterministic writer. Floating-point values carry 17 significant digits
// (lossless double round-trip); object keys keep insertion order; non-finite
// numbers degrade to null rather than invalid JSON.

inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v,
                           std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline void dump_string(const std::string& s, std::string& out) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

inline void dump_value(const ordered_json& j, std::string& out, int indent,
                       int depth) {
  auto newline = [&](int d) {
    out += '\n';
    out.append(static_cast<std::size_t>(indent) * d, ' ');
  };
  switch (j.type()) {
    case ordered_json::value_t::null: out += "null"; break;
    case ordered_json::value_t::boolean:
      out += j.get<bool>() ? "true" : "false";
      break;
    case ordered_json::value_t::number_integer:
      out += std::to_string(j.get<std::int64_t>());
      break;
    case ordered_json::value_t::number_unsigned:
      out += std::to_string(j.get<std::uint64_t>());
      break;
    case ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      break;
    case ordered_json::value_t::string:
      dump_string(j.get_ref<const std::string&>(), out);
      break;
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        break;
      }
      out += '[';
      bool first = true;
      for (const auto& el : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_value(el, out, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      break;
    }
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        break;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        dump_string(it.key(), out);
        out += ": ";
        dump_value(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      break;
    }
    default: out += "null"; break;
  }
}

}  // namespace detail

inline std::string dump_deterministic(const ordered_json& j, int indent = 2) {
  std::string out;
  detail::dump_value(j, out, indent, 0);
  out += '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Points, balls, stages, certificates.

inline ordered_json point_to_json(const Point& p) {
  ordered_json j;
  j["space"] = std::string(to_string(p.space));
  j["coords"] = p.coords;
  return j;
}

inline Point point_from_json(const ordered_json& j) {
  Point p;
  p.space = parse_space_tag(j.at("space").get<std::string>());
  p.coords = j.at("coords").get<std::vector<double>>();
  return p;
}

inline ordered_json ball_to_json(const Ball& b) {
  ordered_json j;
  j["center"] = point_to_json(b.center);
  j["radius"] = b.radius;
  return j;
}

inline Ball ball_from_json(const ordered_json& j) {
  return Ball{point_from_json(j.at("center")), j.at("radius").get<double>()};
}

inline ordered_json stage_ball_to_json(const StageBall& s) {
  ordered_json j;
  j["center"] = point_to_json(s.ball.center);
  j["radius"] = s.ball.radius;
  j["time"] = s.time;
  j["margin"] = s.margin;
  return j;
}

inline StageBall stage_ball_from_json(const ordered_json& j) {
  StageBall s;
  s.ball.center = point_from_json(j.at("center"));
  s.ball.radius = j.at("radius").get<double>();
  s.time = j.at("time").get<long>();
  s.margin = j.at("margin").get<double>();
  return s;
}

inline ordered_json certificate_to_json(const NestedBallCertificate& cert) {
  ordered_json j;
  j["target"] = point_to_json(cert.target);
  j["initial_ball"] = ball_to_json(cert.initial_ball);
  j["stages"] = ordered_json::array();
  for (const Stage& s : cert.stages) {
    ordered_json sj;
    sj["approach"] = stage_ball_to_json(s.approach);
    if (s.ret) sj["return"] = stage_ball_to_json(*s.ret);
    j["stages"].push_back(sj);
  }
  j["limit_point"] = point_to_json(cert.limit_point);
  j["depth"] = cert.depth;
  return j;
}

inline NestedBallCertificate certificate_from_json(const ordered_json& j) {
  NestedBallCertificate cert;
  cert.target = point_from_json(j.at("target"));
  cert.initial_ball = ball_from_json(j.at("initial_ball"));
  for (const auto& sj : j.at("stages")) {
    Stage stage;
    stage.approach = stage_ball_from_json(sj.at("approach"));
    if (sj.contains("return") && !sj.at("return").is_null())
      stage.ret = stage_ball_from_json(sj.at("return"));
    cert.stages.push_back(stage);
  }
  cert.limit_point = point_from_json(j.at("limit_point"));
  cert.depth = j.at("depth").get<long>();
  return cert;
}

inline ordered_json verification_to_json(const VerificationReport& r) {
  ordered_json j;
  j["all_passed"] = r.all_passed();
  j["checks"] = ordered_json::array();
  for (const CheckResult& c : r.checks) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["margin"] = c.margin;
    if (!c.detail.empty()) cj["detail"] = c.detail;
    j["checks"].push_back(cj);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Shift vectors: sparse entry form, lossless and block-dim aware.

inline ordered_json shift_vector_to_json(const ShiftVector& v) {
  ordered_json j;
  j["blocks"] = v.blocks();
  j["block_dim"] = v.block_dim();
  j["entries"] = ordered_json::array();
  for (std::size_t b = 1; b <= v.blocks(); ++b)
    for (std::size_t c = 1; c <= v.block_dim(); ++c) {
      Complex z = v.get(b, c);
      if (z == Complex{0.0, 0.0}) continue;
      ordered_json e;
      e["block"] = b;
      e["comp"] = c;
      e["re"] = z.real();
      e["im"] = z.imag();
      j["entries"].push_back(e);
    }
  return j;
}

// ---------------------------------------------------------------------------
// Witnesses, verdicts, scans.

inline ordered_json witness_times_to_json(const WitnessTimes& w) {
  ordered_json j;
  j["times"] = w.times;
  j["achieved_distances"] = w.achieved_distances;
  return j;
}

inline ordered_json jwitness_to_json(const JWitness& w) {
  ordered_json j;
  j["start_point"] = point_to_json(w.start_point);
  j["time"] = w.time;
  j["start_distance"] = w.start_distance;
  j["end_distance"] = w.end_distance;
  return j;
}

inline ordered_json salas_to_json(const SalasVerdict& v,
                                  std::size_t trace_limit = 64) {
  ordered_json j;
  j["label"] = std::string(v.label());
  j["satisfied"] = v.satisfied;
  j["horizon"] = v.horizon;
  j["threshold"] = v.threshold;
  j["max_index"] = v.max_index;
  j["max_log_product"] = v.max_log_product;
  std::size_t n = std::min(trace_limit, v.log_partial_products.size());
  j["trace_truncated"] = n < v.log_partial_products.size();
  j["log_partial_products"] = std::vector<double>(
      v.log_partial_products.begin(), v.log_partial_products.begin() + n);
  return j;
}

inline ordered_json scan_report_to_json(const ScanReport& r) {
  ordered_json j;
  j["mode"] = std::string(to_string(r.mode));
  j["horizon"] = r.horizon;
  if (r.resolution)
    j["resolution"] = *r.resolution;
  else
    j["resolution"] = nullptr;
  j["all_hit"] = r.all_hit();
  j["pairs"] = ordered_json::array();
  for (const BallPair& p : r.pairs) {
    ordered_json pj;
    pj["u"] = ball_to_json(p.first);
    pj["v"] = ball_to_json(p.second);
    j["pairs"].push_back(pj);
  }
  j["verdicts"] = ordered_json::array();
  for (const PairVerdict& v : r.verdicts) {
    ordered_json vj;
    vj["pair_index"] = v.pair_index;
    vj["label"] = std::string(v.label());
    vj["hit"] = v.hit;
    if (v.hit) {
      vj["direction"] = std::string(to_string(v.direction));
      vj["time"] = v.time;
      vj["witness"] = point_to_json(v.witness);
      vj["hit_distance"] = v.hit_distance;
    }
    vj["min_distance"] = v.min_distance;
    j["verdicts"].push_back(vj);
  }
  return j;
}

// One line per pair; empty cells where a verdict has no hit data.
inline std::string scan_report_to_csv(const ScanReport& r) {
  std::string out =
      "pair_index,mode,label,direction,time,hit_distance,min_distance\n";
  for (const PairVerdict& v : r.verdicts) {
    out += std::to_string(v.pair_index);
    out += ',';
    out += to_string(r.mode);
    out += ',';
    out += v.label();
    out += ',';
    if (v.hit) {
      out += to_string(v.direction);
      out += ',';
      out += std::to_string(v.time);
      out += ',';
      out += format_double(v.hit_distance);
    } else {
      out += ",,";
    }
    out += ',';
    out += format_double(v.min_distance);
    out += '\n';
  }
  return out;
}

inline ordered_json gdelta_to_json(const GDeltaReport& r) {
  ordered_json j;
  j["holds"] = r.holds;
  j["s_max"] = r.s_max;
  j["n_max"] = r.n_max;
  j["m_max"] = r.m_max;
  j["evidence"] = ordered_json::array();
  for (const GDeltaEntry& e : r.evidence) {
    ordered_json ej;
    ej["s"] = e.s;
    ej["n"] = e.n;
    ej["found"] = e.found;
    if (e.found) ej["m"] = e.m;
    ej["distance"] = e.distance;
    j["evidence"].push_back(ej);
  }
  return j;
}

inline ordered_json complex_to_json(const Complex& z) {
  ordered_json j;
  j["re"] = z.real();
  j["im"] = z.imag();
  return j;
}

inline ordered_json span_basis_to_json(const OrbitSpanBasis& b) {
  ordered_json j;
  j["rank"] = b.rank();
  j["depth"] = b.depth;
  j["seeds"] = ordered_json::array();
  for (const ShiftVector& s : b.seeds) j["seeds"].push_back(shift_vector_to_json(s));
  j["basis"] = ordered_json::array();
  for (const ShiftVector& v : b.basis) j["basis"].push_back(shift_vector_to_json(v));
  return j;
}

inline ordered_json compressed_to_json(const CompressedOperator& c) {
  ordered_json j;
  j["matrix"] = ordered_json::array();
  for (const auto& row : c.matrix) {
    ordered_json rj = ordered_json::array();
    for (const Complex& z : row) rj.push_back(complex_to_json(z));
    j["matrix"].push_back(rj);
  }
  j["column_defects"] = c.column_defects;
  j["invariance_defect"] = c.invariance_defect;
  return j;
}

}  // namespace topodyn
