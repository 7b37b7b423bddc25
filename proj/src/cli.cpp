#include "polydev/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "json.hpp"
#include "polydev/deviation.hpp"
#include "polydev/integrate.hpp"

namespace polydev {
namespace {

std::string read_file(const std::string& path, const char* flag) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw contract_violation(std::string(flag) + ": cannot open '" + path +
                             "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw contract_violation("cannot write '" + path + "'");
  out << content;
  out.flush();
  if (!out) throw contract_violation("short write to '" + path + "'");
}

void emit(const RunConfig& cfg, const std::string& content) {
  if (cfg.out.empty()) {
    std::cout << content;
  } else {
    write_file(cfg.out, content);
    std::cout << "wrote " << cfg.out << "\n";
  }
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

const char* bool_name(bool b) { return b ? "true" : "false"; }

double parse_number(const std::string& s, const char* flag) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw contract_violation(std::string(flag) + ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, const char* flag) {
  try {
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw contract_violation(std::string(flag) + ": bad integer '" + s + "'");
  }
}

std::vector<std::pair<std::string, std::string>> split_pairs(
    const std::string& rest, const char* flag) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0)
      throw contract_violation(std::string(flag) + ": expected key=value, got '" +
                               item + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  if (out.empty())
    throw contract_violation(std::string(flag) + ": no parameters given");
  return out;
}

SupportCurveCoeffs coeffs_from_json(const std::string& text, const char* flag) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    SupportCurveCoeffs c;
    c.a0 = j.at("a0").get<double>();
    if (j.contains("harmonics")) {
      for (const auto& h : j.at("harmonics")) {
        if (!h.is_array() || h.size() != 3)
          throw contract_violation(
              std::string(flag) +
              ": each harmonic must be a [k, a_k, b_k] triple");
        c.harmonics.push_back(
            {h[0].get<double>(), h[1].get<double>(), h[2].get<double>()});
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw contract_violation(std::string(flag) + ": malformed JSON (" +
                             e.what() + ")");
  }
}

ShrinkMode parse_cmode(const std::string& s) {
  if (s == "auto") return ShrinkMode::Auto;
  if (s == "asymptotic") return ShrinkMode::Asymptotic;
  if (s == "empirical") return ShrinkMode::Empirical;
  throw contract_violation(
      "--cmode: expected auto | asymptotic | empirical, got '" + s + "'");
}

DeviationMethod parse_method(const std::string& s) {
  if (s == "auto") return DeviationMethod::Auto;
  if (s == "radial") return DeviationMethod::RadialCoupling;
  if (s == "decomposed") return DeviationMethod::Decomposed;
  throw contract_violation(
      "--method: expected auto | radial | decomposed, got '" + s + "'");
}

const char* method_name(DeviationMethod m) {
  return m == DeviationMethod::Decomposed ? "decomposed" : "radial_coupling";
}

// ---------------------------------------------------------------------------
// report renderers

std::string scaling_row(const ConstructionResult& r) {
  std::string s;
  s += std::to_string(r.n_points) + ",";
  s += std::to_string(r.trials) + ",";
  s += format_double(r.shrink_c) + ",";
  s += format_double(r.mean_delta) + ",";
  s += format_double(r.std_error) + ",";
  s += format_double(r.mean_rescaled) + ",";
  s += format_double(r.bound_ratio_max) + ",";
  s += std::to_string(r.seed) + "\n";
  return s;
}

constexpr const char* kScalingHeader =
    "n_points,trials,shrink_c,mean_delta_s,stderr,rescaled_mean,"
    "bound_ratio_max,seed\n";

std::string scaling_csv(const ScalingReport& rep) {
  std::string s = kScalingHeader;
  for (const ConstructionResult& r : rep.per_n) s += scaling_row(r);
  return s;
}

constexpr const char* kVerifyHeader =
    "identity,lhs,rhs,rel_error,tolerance,pass\n";

std::string verify_csv(const std::vector<IdentityRow>& rows) {
  std::string s = kVerifyHeader;
  for (const IdentityRow& r : rows) {
    s += csv_quote(r.identity) + ",";
    s += format_double(r.lhs) + ",";
    s += format_double(r.rhs) + ",";
    s += format_double(r.rel_error) + ",";
    s += format_double(r.tolerance) + ",";
    s += bool_name(r.pass);
    s += "\n";
  }
  return s;
}

nlohmann::json identity_json(const IdentityRow& r) {
  nlohmann::json j;
  j["identity"] = r.identity;
  j["lhs"] = r.lhs;
  j["rhs"] = r.rhs;
  j["rel_error"] = r.rel_error;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  return j;
}

std::string deficit_csv(const std::vector<DeficitResult>& rows) {
  std::string s = "n_points,trials,mean_deficit,stderr,normalized,target,ratio\n";
  for (const DeficitResult& r : rows) {
    s += std::to_string(r.n_points) + ",";
    s += std::to_string(r.trials) + ",";
    s += format_double(r.mean_deficit) + ",";
    s += format_double(r.std_error) + ",";
    s += format_double(r.normalized) + ",";
    s += format_double(r.target) + ",";
    s += format_double(r.ratio) + "\n";
  }
  return s;
}

nlohmann::json deficit_json(const DeficitResult& r) {
  nlohmann::json j;
  j["n_points"] = r.n_points;
  j["trials"] = r.trials;
  j["mean_deficit"] = r.mean_deficit;
  j["stderr"] = r.std_error;
  j["normalized"] = r.normalized;
  j["target"] = r.target;
  j["ratio"] = r.ratio;
  j["retried_trials"] = r.retried_trials;
  j["seed"] = r.seed;
  return j;
}

nlohmann::json construction_json(const ConstructionResult& r) {
  nlohmann::json j;
  j["n_points"] = r.n_points;
  j["trials"] = r.trials;
  j["shrink_c"] = r.shrink_c;
  j["shrink_mode"] = r.shrink_mode_used == ShrinkMode::Empirical
                         ? "empirical"
                         : "asymptotic";
  j["samples_per_trial"] = r.samples_per_trial;
  j["seed"] = r.seed;
  j["mean_delta_s"] = r.mean_delta;
  j["stderr"] = r.std_error;
  j["rescaled_mean"] = r.mean_rescaled;
  j["min_delta_s"] = r.min_delta;
  j["min_trial"] = r.min_trial;
  j["witness_vertex_count"] = r.witness.vertices.size();
  j["bound_ratio_max"] = r.bound_ratio_max;
  j["bound_ratios"] = r.bound_ratios;
  j["origin_misses"] = r.origin_misses;
  j["decomposed_fallbacks"] = r.decomposed_fallbacks;
  j["short_hull_trials"] = r.short_hull_trials;
  j["retried_trials"] = r.retried_trials;
  return j;
}

/// Log-log scatter of mean deviation vs N with the fitted line and a
/// reference line at the limiting exponent.
std::string svg_loglog(const ScalingReport& rep, double ref_slope) {
  std::vector<double> lx, ly;
  for (const ConstructionResult& r : rep.per_n) {
    lx.push_back(std::log10(static_cast<double>(r.n_points)));
    ly.push_back(std::log10(r.mean_delta));
  }
  double x_lo = *std::min_element(lx.begin(), lx.end());
  double x_hi = *std::max_element(lx.begin(), lx.end());
  double y_lo = *std::min_element(ly.begin(), ly.end());
  double y_hi = *std::max_element(ly.begin(), ly.end());
  const double x_pad = 0.06 * (x_hi - x_lo), y_pad = 0.08 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  const double box_l = 80, box_r = 600, box_t = 40, box_b = 420;
  auto px = [&](double x) {
    return box_l + (x - x_lo) / (x_hi - x_lo) * (box_r - box_l);
  };
  auto py = [&](double y) {
    return box_b - (y - y_lo) / (y_hi - y_lo) * (box_b - box_t);
  };
  char buf[256];
  std::string s;
  auto add = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    s += buf;
  };

  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
       "height=\"480\" viewBox=\"0 0 640 480\">\n";
  s += "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
  add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
      "fill=\"none\" stroke=\"black\"/>\n",
      box_l, box_t, box_r - box_l, box_b - box_t);
  add("<text x=\"%.2f\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">%s, "
      "%s density</text>\n",
      0.5 * (box_l + box_r), rep.body_id.c_str(), rep.density_kind.c_str());
  add("<text x=\"%.2f\" y=\"460\" font-size=\"13\" "
      "text-anchor=\"middle\">N (log scale)</text>\n",
      0.5 * (box_l + box_r));
  add("<text x=\"20\" y=\"%.2f\" font-size=\"13\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 20 %.2f)\">mean deviation (log scale)</text>\n",
      0.5 * (box_t + box_b), 0.5 * (box_t + box_b));

  // x ticks at the schedule points
  for (std::size_t i = 0; i < rep.per_n.size(); ++i) {
    double X = px(lx[i]);
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"black\"/>\n",
        X, box_b, X, box_b + 5);
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
        "text-anchor=\"middle\">%d</text>\n",
        X, box_b + 18, rep.per_n[i].n_points);
  }
  // y ticks at powers of 10
  for (int k = static_cast<int>(std::floor(y_lo)); k <= std::ceil(y_hi); ++k) {
    if (k < y_lo || k > y_hi) continue;
    double Y = py(k);
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
        "stroke=\"black\"/>\n",
        box_l - 5, Y, box_l, Y);
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" "
        "text-anchor=\"end\">1e%d</text>\n",
        box_l - 8, Y + 4, k);
  }

  // fitted line through the centroid with the fitted slope
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= static_cast<double>(lx.size());
  my /= static_cast<double>(ly.size());
  auto line_between = [&](double slope, double x0, double y0,
                          const char* style) {
    double ya = y0 + slope * (x_lo - x0), yb = y0 + slope * (x_hi - x0);
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" %s/>\n",
        px(x_lo), py(ya), px(x_hi), py(yb), style);
  };
  line_between(rep.slope, mx, my, "stroke=\"#1f77b4\" stroke-width=\"1.5\"");
  line_between(ref_slope, lx[0], ly[0] + 0.12,
               "stroke=\"#999999\" stroke-dasharray=\"6 4\"");

  for (std::size_t i = 0; i < lx.size(); ++i)
    add("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"#d62728\"/>\n",
        px(lx[i]), py(ly[i]));

  add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"13\" fill=\"#1f77b4\">fitted "
      "slope %.3f (ref %.1f)</text>\n",
      box_l + 12.0, box_t + 20.0, rep.slope, ref_slope);
  s += "</svg>\n";
  return s;
}

// ---------------------------------------------------------------------------
// subcommand execution

int dispatch(const RunConfig& cfg) {
  if (cfg.format != "csv" && cfg.format != "json")
    throw contract_violation("--format: expected csv or json, got '" +
                             cfg.format + "'");
  if (cfg.workers < 1)
    throw contract_violation("--workers: must be at least 1");
  ConvexBody body = parse_body(cfg.body);
  const int n = body.dim();
  const bool json_out = cfg.format == "json";

  if (cfg.command == "bodyinfo") {
    AffinePrecision prec;
    prec.seed = cfg.seed;
    const double area = surface_area(body);
    const double vol = body_volume(body);
    MonteCarloEstimate asn =
        p_affine_surface_area(body, static_cast<double>(n), prec);
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["dim"] = n;
      j["surface_area"] = area;
      j["volume"] = vol;
      j["as_n"] = asn.value;
      j["as_n_stderr"] = asn.std_error;
      j["isoperimetric_ratio_as_n"] =
          asn.value / sphere_surface(n);  // 1 exactly on ellipsoids
      emit(cfg, j.dump(2) + "\n");
    } else {
      std::string s = "field,value\n";
      s += "body," + csv_quote(body.describe()) + "\n";
      s += "dim," + std::to_string(n) + "\n";
      s += "surface_area," + format_double(area) + "\n";
      s += "volume," + format_double(vol) + "\n";
      s += "as_n," + format_double(asn.value) + "\n";
      s += "as_n_stderr," + format_double(asn.std_error) + "\n";
      emit(cfg, s);
    }
    return 0;
  }

  if (cfg.command == "asp") {
    AffinePrecision prec;
    prec.seed = cfg.seed;
    if (cfg.samples > 0) prec.samples = cfg.samples;
    MonteCarloEstimate est = p_affine_surface_area(body, cfg.p, prec);
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["p"] = cfg.p;
      j["value"] = est.value;
      j["stderr"] = est.std_error;
      j["samples"] = est.samples;
      j["seed"] = cfg.seed;
      emit(cfg, j.dump(2) + "\n");
    } else {
      std::string s = "p,value,stderr,samples,seed\n";
      s += format_double(cfg.p) + "," + format_double(est.value) + "," +
           format_double(est.std_error) + "," + std::to_string(est.samples) +
           "," + std::to_string(cfg.seed) + "\n";
      emit(cfg, s);
    }
    return 0;
  }

  if (cfg.command == "deviate") {
    if (!(cfg.scale > 0.0))
      throw contract_violation("--scale: must be positive");
    Polytope poly = polytope_from_json(read_file(cfg.poly_path, "--poly"));
    const std::int64_t samples = cfg.samples > 0 ? cfg.samples : 200000;
    DeviationEstimate est =
        surface_deviation(body.scaled(cfg.scale), poly, samples, cfg.seed,
                          0xdead1a1, parse_method(cfg.method));
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["scale"] = cfg.scale;
      j["method"] = method_name(est.method_used);
      j["delta_s"] = est.delta.value;
      j["stderr"] = est.delta.std_error;
      j["samples"] = est.delta.samples;
      j["seed"] = cfg.seed;
      j["parts"] = {{"body_outside", est.parts.body_outside},
                    {"poly_outside", est.parts.poly_outside},
                    {"body_inside", est.parts.body_inside},
                    {"poly_inside", est.parts.poly_inside}};
      j["parts_stderr"] = {{"body_outside", est.parts_stderr.body_outside},
                           {"poly_outside", est.parts_stderr.poly_outside},
                           {"body_inside", est.parts_stderr.body_inside},
                           {"poly_inside", est.parts_stderr.poly_inside}};
      if (!est.note.empty()) j["note"] = est.note;
      emit(cfg, j.dump(2) + "\n");
    } else {
      std::string s =
          "delta_s,stderr,body_outside,poly_outside,body_inside,poly_inside,"
          "method,samples,seed\n";
      s += format_double(est.delta.value) + "," +
           format_double(est.delta.std_error) + "," +
           format_double(est.parts.body_outside) + "," +
           format_double(est.parts.poly_outside) + "," +
           format_double(est.parts.body_inside) + "," +
           format_double(est.parts.poly_inside) + "," +
           method_name(est.method_used) + "," + std::to_string(samples) + "," +
           std::to_string(cfg.seed) + "\n";
      emit(cfg, s);
    }
    return 0;
  }

  if (cfg.command == "construct") {
    if (cfg.n_points <= 0)
      throw contract_violation("--n: must be a positive point count");
    Density density = parse_density(body, cfg.density, cfg.seed);
    const int trials = cfg.trials > 0 ? cfg.trials : 100;
    const std::int64_t samples = cfg.samples > 0 ? cfg.samples : 100000;
    ConstructionResult run =
        run_construction(body, density, cfg.n_points, trials,
                         parse_cmode(cfg.cmode), cfg.seed, cfg.workers, samples);
    if (!cfg.witness_out.empty())
      write_file(cfg.witness_out, polytope_to_json(run.witness));
    if (json_out) {
      nlohmann::json j = construction_json(run);
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["density"] = density.label();
      if (!cfg.witness_out.empty()) j["witness_path"] = cfg.witness_out;
      emit(cfg, j.dump(2) + "\n");
    } else {
      emit(cfg, std::string(kScalingHeader) + scaling_row(run));
    }
    return 0;
  }

  if (cfg.command == "scaling") {
    Density density = parse_density(body, cfg.density, cfg.seed);
    const int trials = cfg.trials > 0 ? cfg.trials : 100;
    const std::int64_t samples = cfg.samples > 0 ? cfg.samples : 100000;
    ScalingReport rep =
        scaling_study(body, density, cfg.schedule, trials,
                      parse_cmode(cfg.cmode), cfg.seed, cfg.workers, samples);
    if (!cfg.plot.empty())
      write_file(cfg.plot, svg_loglog(rep, -2.0 / (n - 1)));
    emit(cfg, json_out ? rep.to_json() + "\n" : scaling_csv(rep));
    std::cout << "slope " << format_double(rep.slope) << " +- "
              << format_double(rep.slope_half_width) << " (reference "
              << format_double(-2.0 / (n - 1)) << ")\n";
    return 0;
  }

  if (cfg.command == "verify") {
    IdentityReport rep = verify_identities(body, cfg.seed);
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["all_pass"] = rep.all_pass();
      nlohmann::json rows = nlohmann::json::array();
      for (const IdentityRow& r : rep.rows) rows.push_back(identity_json(r));
      j["rows"] = std::move(rows);
      emit(cfg, j.dump(2) + "\n");
    } else {
      emit(cfg, verify_csv(rep.rows));
    }
    return 0;
  }

  if (cfg.command == "bpcheck") {
    const std::int64_t samples = cfg.samples > 0 ? cfg.samples : 200000;
    IdentityRow row = blaschke_petkantschin_2d(body, samples, cfg.seed);
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["samples"] = samples;
      j["seed"] = cfg.seed;
      j["row"] = identity_json(row);
      emit(cfg, j.dump(2) + "\n");
    } else {
      emit(cfg, verify_csv({row}));
    }
    return 0;
  }

  if (cfg.command == "deficit") {
    Density density = parse_density(body, cfg.density, cfg.seed);
    const int trials = cfg.trials > 0 ? cfg.trials : 200;
    std::vector<DeficitResult> rows;
    if (!cfg.schedule.empty()) {
      rows = deficit_study(body, density, cfg.schedule, trials, cfg.seed,
                           cfg.workers);
    } else if (cfg.n_points > 0) {
      rows.push_back(hull_deficit(body, density, cfg.n_points, trials,
                                  cfg.seed, cfg.workers));
    } else {
      throw contract_violation(
          "deficit: provide --n or a --schedule of point counts");
    }
    if (json_out) {
      nlohmann::json j;
      j["schema_version"] = 1;
      j["body"] = body.describe();
      j["density"] = density.label();
      nlohmann::json arr = nlohmann::json::array();
      for (const DeficitResult& r : rows) arr.push_back(deficit_json(r));
      j["rows"] = std::move(arr);
      emit(cfg, j.dump(2) + "\n");
    } else {
      emit(cfg, deficit_csv(rows));
    }
    return 0;
  }

  throw contract_violation("unknown command '" + cfg.command + "'");
}

}  // namespace

ConvexBody parse_body(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind =
      colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string rest =
      colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (kind == "ball") {
    double r = 0.0;
    int n = 0;
    for (const auto& [key, value] : split_pairs(rest, "--body")) {
      if (key == "r")
        r = parse_number(value, "--body");
      else if (key == "n")
        n = parse_int(value, "--body");
      else
        throw contract_violation("--body: ball takes r=<radius>,n=<dim>, got '" +
                                 key + "'");
    }
    if (r <= 0.0) throw contract_violation("--body: ball radius must be > 0");
    if (n < 2) throw contract_violation("--body: ball dimension must be >= 2");
    return ConvexBody::ball(r, n);
  }

  if (kind == "ellipsoid") {
    std::vector<double> axes;
    for (const auto& [key, value] : split_pairs(rest, "--body")) {
      const char expected = static_cast<char>('a' + axes.size());
      if (key.size() != 1 || key[0] != expected)
        throw contract_violation(
            "--body: ellipsoid axes must be named a,b,c,... in order; got '" +
            key + "'");
      axes.push_back(parse_number(value, "--body"));
    }
    return ConvexBody::ellipsoid(std::move(axes));
  }

  if (kind == "curve2d") {
    if (rest.empty())
      throw contract_violation("--body: curve2d needs a coefficient file path");
    return ConvexBody::support_curve(
        coeffs_from_json(read_file(rest, "--body"), "--body"));
  }

  throw contract_violation("--body: unknown body kind '" + kind +
                           "' (expected ball | ellipsoid | curve2d)");
}

Density parse_density(const ConvexBody& body, const std::string& spec,
                      std::uint64_t seed) {
  if (spec == "uniform") return Density::uniform(body);
  if (spec == "fn") {
    AffinePrecision prec;
    prec.seed = seed;
    return fn_density(body, prec);
  }
  if (spec.rfind("custom:", 0) == 0) {
    SupportCurveCoeffs c = coeffs_from_json(
        read_file(spec.substr(7), "--density"), "--density");
    auto weight = [c](double theta) {
      double v = c.a0;
      for (const auto& h : c.harmonics)
        v += h[1] * std::cos(h[0] * theta) + h[2] * std::sin(h[0] * theta);
      return v;
    };
    return Density::custom_weight(body, weight, "custom");
  }
  throw contract_violation(
      "--density: expected uniform | fn | custom:<path>, got '" + spec + "'");
}

std::string RunConfig::to_json() const {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["command"] = command;
  j["body"] = body;
  j["density"] = density;
  j["poly_path"] = poly_path;
  j["p"] = p;
  j["scale"] = scale;
  j["method"] = method;
  j["cmode"] = cmode;
  j["n_points"] = n_points;
  j["trials"] = trials;
  j["schedule"] = schedule;
  j["samples"] = samples;
  j["seed"] = seed;
  j["workers"] = workers;
  j["format"] = format;
  j["out"] = out;
  j["witness_out"] = witness_out;
  j["plot"] = plot;
  return j.dump(2);
}

RunConfig RunConfig::from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("schema_version", 0) != 1)
      throw contract_violation("config: unsupported schema_version");
    RunConfig c;
    c.command = j.value("command", c.command);
    c.body = j.value("body", c.body);
    c.density = j.value("density", c.density);
    c.poly_path = j.value("poly_path", c.poly_path);
    c.p = j.value("p", c.p);
    c.scale = j.value("scale", c.scale);
    c.method = j.value("method", c.method);
    c.cmode = j.value("cmode", c.cmode);
    c.n_points = j.value("n_points", c.n_points);
    c.trials = j.value("trials", c.trials);
    c.schedule = j.value("schedule", c.schedule);
    c.samples = j.value("samples", c.samples);
    c.seed = j.value("seed", c.seed);
    c.workers = j.value("workers", c.workers);
    c.format = j.value("format", c.format);
    c.out = j.value("out", c.out);
    c.witness_out = j.value("witness_out", c.witness_out);
    c.plot = j.value("plot", c.plot);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw contract_violation(std::string("config: malformed JSON (") +
                             e.what() + ")");
  }
}

int run_command(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("polydev");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

int run_command(int argc, const char* const* argv) {
  RunConfig cfg;
  CLI::App app{
      "Random inscribed polytopes: surface-area deficits, deviations from "
      "shrunken bodies, affine surface areas, and integral-geometry checks"};
  app.require_subcommand(1);

  auto add_body = [&cfg](CLI::App* sub) {
    sub->add_option("--body", cfg.body,
                    "ball:r=<f>,n=<int> | ellipsoid:a=<f>,b=<f>[,c=<f>,...] | "
                    "curve2d:<path.json>")
        ->required();
  };
  auto add_common = [&cfg](CLI::App* sub, bool workers) {
    sub->add_option("--seed", cfg.seed,
                    "master seed; every output is a deterministic function "
                    "of it (default 1729)")
        ->capture_default_str();
    sub->add_option("--format", cfg.format, "csv | json")
        ->capture_default_str();
    sub->add_option("--out", cfg.out, "output path (default: stdout)");
    if (workers)
      sub->add_option("--workers", cfg.workers,
                      "worker threads; outputs do not depend on the count")
          ->capture_default_str();
  };

  CLI::App* info = app.add_subcommand(
      "bodyinfo", "print dimension, areas, volume and as_n of a body");
  add_body(info);
  add_common(info, false);
  info->callback([&cfg] { cfg.command = "bodyinfo"; });

  CLI::App* asp = app.add_subcommand(
      "asp", "p-affine surface area of a body");
  add_body(asp);
  asp->add_option("--p", cfg.p, "exponent (any real except -n; inf allowed)")
      ->required();
  asp->add_option("--samples", cfg.samples,
                  "Monte Carlo samples for n >= 3 (default 2000000)");
  add_common(asp, false);
  asp->callback([&cfg] { cfg.command = "asp"; });

  CLI::App* dev = app.add_subcommand(
      "deviate", "surface-area deviation between a scaled body and a polytope");
  add_body(dev);
  dev->add_option("--poly", cfg.poly_path, "polytope JSON file")->required();
  dev->add_option("--scale", cfg.scale, "body scale factor")
      ->capture_default_str();
  dev->add_option("--method", cfg.method, "auto | radial | decomposed")
      ->capture_default_str();
  dev->add_option("--samples", cfg.samples, "sweep samples (default 200000)");
  add_common(dev, false);
  dev->callback([&cfg] { cfg.command = "deviate"; });

  CLI::App* con = app.add_subcommand(
      "construct",
      "inscribed random polytopes vs the shrunken body at a single N");
  add_body(con);
  con->add_option("--density", cfg.density, "uniform | fn | custom:<path>")
      ->capture_default_str();
  con->add_option("--n", cfg.n_points, "points per polytope")->required();
  con->add_option("--trials", cfg.trials, "trials (default 100)");
  con->add_option("--cmode", cfg.cmode, "auto | asymptotic | empirical")
      ->capture_default_str();
  con->add_option("--samples", cfg.samples,
                  "deviation sweep samples per trial (default 100000)");
  con->add_option("--witness", cfg.witness_out,
                  "write the minimum-deviation polytope JSON here");
  add_common(con, true);
  con->callback([&cfg] { cfg.command = "construct"; });

  CLI::App* sca = app.add_subcommand(
      "scaling", "construction across a schedule of N plus a slope fit");
  add_body(sca);
  sca->add_option("--density", cfg.density, "uniform | fn | custom:<path>")
      ->capture_default_str();
  sca->add_option("--schedule", cfg.schedule,
                  "comma-separated increasing point counts (>= 3, spanning "
                  "at least a factor of 8)")
      ->required()
      ->delimiter(',');
  sca->add_option("--trials", cfg.trials, "trials per N (default 100)");
  sca->add_option("--cmode", cfg.cmode, "auto | asymptotic | empirical")
      ->capture_default_str();
  sca->add_option("--samples", cfg.samples,
                  "deviation sweep samples per trial (default 100000)");
  sca->add_option("--plot", cfg.plot, "write a log-log SVG plot here");
  add_common(sca, true);
  sca->callback([&cfg] { cfg.command = "scaling"; });

  CLI::App* ver = app.add_subcommand(
      "verify", "integral-geometry identity suite for one body");
  add_body(ver);
  add_common(ver, false);
  ver->callback([&cfg] { cfg.command = "verify"; });

  CLI::App* bp = app.add_subcommand(
      "bpcheck", "squared perimeter vs the chord-weight line integral (2-D)");
  add_body(bp);
  bp->add_option("--samples", cfg.samples, "line samples (default 200000)");
  add_common(bp, false);
  bp->callback([&cfg] { cfg.command = "bpcheck"; });

  CLI::App* def = app.add_subcommand(
      "deficit", "mean surface-area deficit of inscribed random polytopes");
  add_body(def);
  def->add_option("--density", cfg.density, "uniform | fn | custom:<path>")
      ->capture_default_str();
  def->add_option("--n", cfg.n_points, "points per polytope (single row)");
  def->add_option("--schedule", cfg.schedule,
                  "comma-separated increasing point counts (>= 3)")
      ->delimiter(',');
  def->add_option("--trials", cfg.trials, "trials per N (default 200)");
  add_common(def, true);
  def->callback([&cfg] { cfg.command = "deficit"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    return dispatch(cfg);
  } catch (const contract_violation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const numerical_failure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace polydev
