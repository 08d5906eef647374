#pragma once

#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "asymptotics.hpp"
#include "distance.hpp"
#include "geometry.hpp"
#include "inflap.hpp"
#include "plap.hpp"
#include "version.hpp"

namespace sobex {

using json = nlohmann::json;

// ---------- domain specs ----------

inline json domain_to_json(const DomainSpec& spec) {
  json params;
  struct V {
    json& params;
    void operator()(const Disk& d) const { params["r"] = d.r; }
    void operator()(const Annulus& a) const {
      params["a"] = a.a;
      params["b"] = a.b;
    }
    void operator()(const Rectangle& r) const {
      params["w"] = r.w;
      params["h"] = r.h;
    }
    void operator()(const Diamond& d) const { params["s"] = d.s; }
    void operator()(const Ellipse& e) const {
      params["a"] = e.a;
      params["b"] = e.b;
    }
    void operator()(const Polygon& p) const {
      json verts = json::array();
      for (const auto& v : p.vertices) verts.push_back({v.x, v.y});
      params["vertices"] = std::move(verts);
    }
  };
  std::visit(V{params}, spec.shape());
  return json{{"kind", spec.kind()}, {"params", std::move(params)}};
}

inline DomainSpec domain_from_json(const json& j) {
  if (!j.contains("kind") || !j.contains("params"))
    throw InvalidParams("domain json: requires \"kind\" and \"params\"");
  const std::string kind = j.at("kind").get<std::string>();
  const json& p = j.at("params");
  auto need = [&](const char* key) -> double {
    if (!p.contains(key) || !p.at(key).is_number())
      throw InvalidParams("domain json: missing numeric param \"" +
                          std::string(key) + "\" for kind " + kind);
    return p.at(key).get<double>();
  };
  if (kind == "disk") return make_disk(need("r"));
  if (kind == "annulus") return make_annulus(need("a"), need("b"));
  if (kind == "rectangle") return make_rectangle(need("w"), need("h"));
  if (kind == "diamond") return make_diamond(need("s"));
  if (kind == "ellipse") return make_ellipse(need("a"), need("b"));
  if (kind == "polygon") {
    if (!p.contains("vertices") || !p.at("vertices").is_array())
      throw InvalidParams("domain json: polygon requires \"vertices\" array");
    std::vector<Point> verts;
    for (const auto& v : p.at("vertices")) {
      if (!v.is_array() || v.size() != 2)
        throw InvalidParams("domain json: each vertex must be [x, y]");
      verts.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    return make_polygon(std::move(verts));
  }
  throw InvalidParams("domain json: unknown kind \"" + kind + "\"");
}

inline DomainSpec load_domain(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open domain file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("cannot parse domain file " + path + ": " + e.what());
  }
  return domain_from_json(j);
}

// ---------- numeric rendering ----------

// 17 significant digits: enough for a lossless double round-trip, and stable
// across runs so diffing outputs is meaningful.
inline std::string render(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  return out;
}

inline void close_out(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace detail

// ---------- fields ----------

inline void export_field_csv(const ScalarField& f, const std::string& path) {
  const Grid& g = f.grid();
  auto out = detail::open_out(path);
  out << "x,y,value\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out << render(g.x(i)) << ',' << render(g.y(j)) << ','
          << render(f.at(i, j)) << '\n';
  detail::close_out(out, path);
}

inline void export_grid_csv(const Grid& g, const std::string& path) {
  auto out = detail::open_out(path);
  out << "x,y,interior\n";
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i)
      out << render(g.x(i)) << ',' << render(g.y(j)) << ','
          << (g.mask[g.idx(i, j)] ? '1' : '0') << '\n';
  detail::close_out(out, path);
}

inline json field_to_json(const ScalarField& f) {
  const Grid& g = f.grid();
  return json{{"nx", g.nx},
              {"ny", g.ny},
              {"h", g.h},
              {"origin", {g.origin.x, g.origin.y}},
              {"values", f.values()}};
}

inline void export_field_json(const ScalarField& f, const std::string& path) {
  auto out = detail::open_out(path);
  out << field_to_json(f).dump() << '\n';
  detail::close_out(out, path);
}

// Raw import: the grid's interior mask is not part of the format, so the
// result is the lattice data only.
struct RawField {
  int nx = 0, ny = 0;
  double h = 0.0;
  Point origin;
  std::vector<double> values;
};

inline RawField import_field_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open field file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError("cannot parse field file " + path + ": " + e.what());
  }
  RawField f;
  try {
    f.nx = j.at("nx").get<int>();
    f.ny = j.at("ny").get<int>();
    f.h = j.at("h").get<double>();
    f.origin = {j.at("origin").at(0).get<double>(),
                j.at("origin").at(1).get<double>()};
    f.values = j.at("values").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw IoError("field file " + path + " malformed: " + e.what());
  }
  if (static_cast<std::size_t>(f.nx) * f.ny != f.values.size())
    throw IoError("field file " + path + ": values length != nx*ny");
  return f;
}

// ---------- reports ----------

inline json report_to_json(const SolveReport& rep) {
  const Point am = rep.field.grid().point(rep.argmax_node);
  return json{{"value", rep.value},
              {"iterations", rep.iterations},
              {"final_residual", rep.final_residual},
              {"argmax", {am.x, am.y}}};
}

inline json inf_report_to_json(const InfReport& rep, int puncture) {
  const Point xs = rep.field.grid().point(puncture);
  return json{{"iterations", rep.iterations},
              {"final_update", rep.final_update},
              {"lipschitz_estimate", rep.lipschitz_estimate},
              {"puncture", {xs.x, xs.y}}};
}

// Wall times stay out on purpose: result files must be identical across runs.
inline json study_to_json(const StudyReport& rep) {
  json records = json::array();
  for (const auto& r : rep.records) {
    json rec{{"exponent", r.exponent}, {"ok", r.ok}};
    if (r.ok) {
      rec["value"] = r.value;
      rec["normalized"] = r.normalized;
      rec["argmax"] = {r.argmax.x, r.argmax.y};
    } else {
      rec["message"] = r.message;
    }
    records.push_back(std::move(rec));
  }
  json j{{"records", std::move(records)},
         {"target", rep.target},
         {"monotone", rep.monotone},
         {"within_target", rep.within_target},
         {"incomplete", rep.incomplete}};
  if (rep.extrapolated_limit) j["extrapolated_limit"] = *rep.extrapolated_limit;
  if (std::isfinite(rep.tail_sup_distance))
    j["tail_sup_distance"] = rep.tail_sup_distance;
  if (std::isfinite(rep.argmax_drift)) j["argmax_drift"] = rep.argmax_drift;
  if (!rep.note.empty()) j["note"] = rep.note;
  return j;
}

inline void export_study_csv(const StudyReport& rep, const std::string& path) {
  auto out = detail::open_out(path);
  out << "exponent,value,normalized,argmax_x,argmax_y,ok\n";
  for (const auto& r : rep.records)
    out << render(r.exponent) << ',' << render(r.value) << ','
        << render(r.normalized) << ',' << render(r.argmax.x) << ','
        << render(r.argmax.y) << ',' << (r.ok ? 1 : 0) << '\n';
  detail::close_out(out, path);
}

inline void export_ridge_csv(const RidgeResult& ridge, const Grid& g,
                             const std::string& path) {
  auto out = detail::open_out(path);
  out << "x,y,y1x,y1y,y2x,y2y\n";
  for (const auto& w : ridge.nodes) {
    const Point x = g.point(w.node);
    out << render(x.x) << ',' << render(x.y) << ',' << render(w.y1.x) << ','
        << render(w.y1.y) << ',' << render(w.y2.x) << ',' << render(w.y2.y)
        << '\n';
  }
  detail::close_out(out, path);
}

// ---------- run manifests ----------

struct RunManifest {
  std::string subcommand;
  json config;  // fully resolved: domain json, resolution, solver settings
  std::vector<std::string> outputs;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const RunManifest& m, const std::string& path) {
  json j{{"subcommand", m.subcommand},
         {"config", m.config},
         {"version", version_string},
         {"timestamp", utc_timestamp()},
         {"outputs", m.outputs}};
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::close_out(out, path);
}

}  // namespace sobex
