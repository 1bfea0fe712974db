#include "glasd/config.hpp"

#include <charconv>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/core.h>

#include "glasd/errors.hpp"
#include "glasd/io.hpp"

namespace glasd {

namespace {

namespace pt = boost::property_tree;

pt::ptree parse_ini(std::string_view text) {
  std::istringstream in{std::string(text)};
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(fmt::format("config parse error: {}", e.message()));
  }
  return tree;
}

std::string strip_comment(const std::string& v) {
  std::string out = v;
  const auto pos = out.find_first_of("#;");
  if (pos != std::string::npos) out.erase(pos);
  while (!out.empty() && (out.back() == ' ' || out.back() == '\t')) out.pop_back();
  return out;
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = strip_comment(raw);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw InvalidArgument(fmt::format("config key '{}': '{}' is not a number", key, v));
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& raw) {
  const std::string v = strip_comment(raw);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw InvalidArgument(fmt::format("config key '{}': '{}' is not a nonnegative integer", key, v));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = strip_comment(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw InvalidArgument(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

std::vector<double> to_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(strip_comment(raw));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first == std::string::npos) throw InvalidArgument(fmt::format("config key '{}': empty item", key));
    out.push_back(to_double(key, item.substr(first, last - first + 1)));
  }
  return out;
}

std::vector<std::string> to_names(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(strip_comment(raw));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    const auto last = item.find_last_not_of(' ');
    if (first != std::string::npos) out.push_back(item.substr(first, last - first + 1));
  }
  return out;
}

void check_keys(const pt::ptree& section, const std::string& name,
                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (!allowed.contains(key)) {
      throw InvalidArgument(fmt::format("unknown key '{}' in section [{}]", key, name));
    }
  }
}

void apply_optimizer_section(const pt::ptree& sec, OptimizerConfig& c) {
  check_keys(sec, "optimizer",
             {"s_init", "p_init", "s_inc", "s_dec", "p_inc", "p_dec", "m", "c", "radius",
              "max_iters", "stagnation_window", "epsilon", "explore"});
  for (const auto& [key, node] : sec) {
    const std::string v = node.data();
    if (key == "s_init") c.s_init = to_double(key, v);
    else if (key == "p_init") c.p_init = to_double(key, v);
    else if (key == "s_inc") c.s_inc = to_double(key, v);
    else if (key == "s_dec") c.s_dec = to_double(key, v);
    else if (key == "p_inc") c.p_inc = to_double(key, v);
    else if (key == "p_dec") c.p_dec = to_double(key, v);
    else if (key == "m") c.m = static_cast<int>(to_uint(key, v));
    else if (key == "c") c.c = to_double(key, v);
    else if (key == "radius") {
      if (strip_comment(v) == "dynamic") c.fixed_radius.reset();
      else c.fixed_radius = to_double(key, v);
    } else if (key == "max_iters") c.max_iterations = to_uint(key, v);
    else if (key == "stagnation_window") c.stagnation_window = to_uint(key, v);
    else if (key == "epsilon") c.epsilon = to_double(key, v);
    else if (key == "explore") c.explore_enabled = to_bool(key, v);
  }
}

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

std::optional<double> parse_threshold(std::string_view s) {
  if (s == "iqr" || s == "iqr-auto") return std::nullopt;
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgument(fmt::format("threshold must be 'iqr' or a positive number, got '{}'", s));
  }
  return v;
}

OptimizerConfig parse_optimizer_config(std::string_view ini_text, const OptimizerConfig& base) {
  const pt::ptree tree = parse_ini(ini_text);
  OptimizerConfig c = base;
  for (const auto& [name, sec] : tree) {
    if (name != "optimizer") {
      throw InvalidArgument(fmt::format("unknown section [{}] in optimizer config", name));
    }
    apply_optimizer_section(sec, c);
  }
  c.validate();
  return c;
}

OptimizerConfig load_optimizer_config(const std::filesystem::path& path,
                                      const OptimizerConfig& base) {
  return parse_optimizer_config(read_text_file(path), base);
}

ScenarioSpec parse_scenario_config(std::string_view ini_text) {
  const pt::ptree tree = parse_ini(ini_text);
  ScenarioSpec s;
  std::vector<std::string> loss_names{"gaussian", "huber", "truncated", "tukey"};
  std::optional<double> threshold;
  double iqr_multiplier = 3.0;
  double pilot_floor = 1e-3;
  std::optional<ContaminationKind> contamination_kind;
  std::map<std::string, std::string> contamination_overrides;

  for (const auto& [name, sec] : tree) {
    if (!sec.data().empty() && sec.empty()) {
      throw InvalidArgument(fmt::format("key '{}' must live inside a section", name));
    }
    if (name == "scenario") {
      check_keys(sec, name, {"seed", "replicates", "starts", "n", "threads", "losses",
                             "threshold", "iqr_multiplier", "pilot_floor"});
      for (const auto& [key, node] : sec) {
        const std::string v = node.data();
        if (key == "seed") s.master_seed = to_uint(key, v);
        else if (key == "replicates") s.replicates = to_uint(key, v);
        else if (key == "starts") s.n_starts = to_uint(key, v);
        else if (key == "n") s.n = to_uint(key, v);
        else if (key == "threads") s.threads = static_cast<unsigned>(to_uint(key, v));
        else if (key == "losses") loss_names = to_names(v);
        else if (key == "threshold") threshold = parse_threshold(strip_comment(v));
        else if (key == "iqr_multiplier") iqr_multiplier = to_double(key, v);
        else if (key == "pilot_floor") pilot_floor = to_double(key, v);
      }
    } else if (name == "structure") {
      check_keys(sec, name, {"kind", "p", "sparsity", "value_lo", "value_hi", "block_fractions",
                             "block_decays", "repair_floor"});
      for (const auto& [key, node] : sec) {
        const std::string v = node.data();
        if (key == "kind") s.structure.kind = parse_structure_kind(strip_comment(v));
        else if (key == "p") s.structure.p = to_uint(key, v);
        else if (key == "sparsity") s.structure.sparsity = to_double(key, v);
        else if (key == "value_lo") s.structure.value_lo = to_double(key, v);
        else if (key == "value_hi") s.structure.value_hi = to_double(key, v);
        else if (key == "block_fractions") s.structure.block_fractions = to_list(key, v);
        else if (key == "block_decays") s.structure.block_decays = to_list(key, v);
        else if (key == "repair_floor") s.structure.repair_floor = to_double(key, v);
      }
    } else if (name == "distribution") {
      check_keys(sec, name, {"kind", "df"});
      for (const auto& [key, node] : sec) {
        const std::string v = node.data();
        if (key == "kind") s.distribution.kind = parse_distribution_kind(strip_comment(v));
        else if (key == "df") s.distribution.df = to_double(key, v);
      }
    } else if (name == "contamination") {
      check_keys(sec, name, {"kind", "fraction", "entry_fraction_lo", "entry_fraction_hi", "shift"});
      for (const auto& [key, node] : sec) {
        if (key == "kind") contamination_kind = parse_contamination_kind(strip_comment(node.data()));
        else contamination_overrides[key] = node.data();
      }
    } else if (name == "optimizer") {
      apply_optimizer_section(sec, s.optimizer);
    } else {
      throw InvalidArgument(fmt::format("unknown section [{}]", name));
    }
  }

  s.contamination = ContaminationSpec::defaults(contamination_kind.value_or(ContaminationKind::kNone));
  for (const auto& [key, v] : contamination_overrides) {
    if (key == "fraction") s.contamination.fraction = to_double(key, v);
    else if (key == "entry_fraction_lo") s.contamination.entry_fraction_lo = to_double(key, v);
    else if (key == "entry_fraction_hi") s.contamination.entry_fraction_hi = to_double(key, v);
    else if (key == "shift") s.contamination.shift = to_double(key, v);
  }

  for (const auto& ln : loss_names) {
    LossSpec l;
    l.kind = parse_loss_kind(ln);
    if (l.kind != LossKind::kGaussian) l.threshold = threshold;
    l.iqr_multiplier = iqr_multiplier;
    l.pilot_shrinkage_floor = pilot_floor;
    s.losses.push_back(l);
  }
  s.validate();
  return s;
}

ScenarioSpec load_scenario_config(const std::filesystem::path& path) {
  return parse_scenario_config(read_text_file(path));
}

Json to_json(const OptimizerConfig& c) {
  Json j;
  j["s_init"] = c.s_init;
  j["p_init"] = opt(c.p_init);
  j["s_inc"] = c.s_inc;
  j["s_dec"] = c.s_dec;
  j["p_inc"] = c.p_inc;
  j["p_dec"] = c.p_dec;
  j["m"] = c.m;
  j["c"] = opt(c.c);
  j["radius"] = c.fixed_radius ? Json(*c.fixed_radius) : Json("dynamic");
  j["max_iters"] = opt(c.max_iterations);
  j["stagnation_window"] = opt(c.stagnation_window);
  j["epsilon"] = c.epsilon;
  j["explore"] = c.explore_enabled;
  j["seed"] = c.seed;
  return j;
}

OptimizerConfig optimizer_from_json(const Json& j) {
  OptimizerConfig c;
  c.s_init = j.at("s_init").get<double>();
  c.p_init = opt_from<double>(j, "p_init");
  c.s_inc = j.at("s_inc").get<double>();
  c.s_dec = j.at("s_dec").get<double>();
  c.p_inc = j.at("p_inc").get<double>();
  c.p_dec = j.at("p_dec").get<double>();
  c.m = j.at("m").get<int>();
  c.c = opt_from<double>(j, "c");
  if (j.at("radius").is_number()) c.fixed_radius = j.at("radius").get<double>();
  c.max_iterations = opt_from<std::size_t>(j, "max_iters");
  c.stagnation_window = opt_from<std::size_t>(j, "stagnation_window");
  c.epsilon = j.at("epsilon").get<double>();
  c.explore_enabled = j.at("explore").get<bool>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.validate();
  return c;
}

Json to_json(const LossSpec& s) {
  Json j;
  j["kind"] = std::string(to_string(s.kind));
  j["threshold"] = s.threshold ? Json(*s.threshold) : Json("iqr");
  j["iqr_multiplier"] = s.iqr_multiplier;
  j["pilot_floor"] = s.pilot_shrinkage_floor;
  return j;
}

LossSpec loss_from_json(const Json& j) {
  LossSpec s;
  s.kind = parse_loss_kind(j.at("kind").get<std::string>());
  if (j.at("threshold").is_number()) s.threshold = j.at("threshold").get<double>();
  s.iqr_multiplier = j.at("iqr_multiplier").get<double>();
  s.pilot_shrinkage_floor = j.at("pilot_floor").get<double>();
  return s;
}

Json to_json(const ScenarioSpec& s) {
  Json j;
  j["seed"] = s.master_seed;
  j["replicates"] = s.replicates;
  j["starts"] = s.n_starts;
  j["n"] = s.n;
  j["threads"] = s.threads;
  Json st;
  st["kind"] = std::string(to_string(s.structure.kind));
  st["p"] = s.structure.p;
  st["sparsity"] = s.structure.sparsity;
  st["value_lo"] = s.structure.value_lo;
  st["value_hi"] = s.structure.value_hi;
  st["block_fractions"] = s.structure.block_fractions;
  st["block_decays"] = s.structure.block_decays;
  st["repair_floor"] = s.structure.repair_floor;
  j["structure"] = st;
  j["distribution"] = {{"kind", std::string(to_string(s.distribution.kind))},
                       {"df", s.distribution.df}};
  j["contamination"] = {{"kind", std::string(to_string(s.contamination.kind))},
                        {"fraction", s.contamination.fraction},
                        {"entry_fraction_lo", s.contamination.entry_fraction_lo},
                        {"entry_fraction_hi", s.contamination.entry_fraction_hi},
                        {"shift", s.contamination.shift}};
  Json losses = Json::array();
  for (const auto& l : s.losses) losses.push_back(to_json(l));
  j["losses"] = losses;
  j["optimizer"] = to_json(s.optimizer);
  return j;
}

ScenarioSpec scenario_from_json(const Json& j) {
  ScenarioSpec s;
  s.master_seed = j.at("seed").get<std::uint64_t>();
  s.replicates = j.at("replicates").get<std::size_t>();
  s.n_starts = j.at("starts").get<std::size_t>();
  s.n = j.at("n").get<std::size_t>();
  s.threads = j.at("threads").get<unsigned>();
  const Json& st = j.at("structure");
  s.structure.kind = parse_structure_kind(st.at("kind").get<std::string>());
  s.structure.p = st.at("p").get<std::size_t>();
  s.structure.sparsity = st.at("sparsity").get<double>();
  s.structure.value_lo = st.at("value_lo").get<double>();
  s.structure.value_hi = st.at("value_hi").get<double>();
  s.structure.block_fractions = st.at("block_fractions").get<std::vector<double>>();
  s.structure.block_decays = st.at("block_decays").get<std::vector<double>>();
  s.structure.repair_floor = st.at("repair_floor").get<double>();
  const Json& d = j.at("distribution");
  s.distribution.kind = parse_distribution_kind(d.at("kind").get<std::string>());
  s.distribution.df = d.at("df").get<double>();
  const Json& c = j.at("contamination");
  s.contamination.kind = parse_contamination_kind(c.at("kind").get<std::string>());
  s.contamination.fraction = c.at("fraction").get<double>();
  s.contamination.entry_fraction_lo = c.at("entry_fraction_lo").get<double>();
  s.contamination.entry_fraction_hi = c.at("entry_fraction_hi").get<double>();
  s.contamination.shift = c.at("shift").get<double>();
  for (const auto& l : j.at("losses")) s.losses.push_back(loss_from_json(l));
  s.optimizer = optimizer_from_json(j.at("optimizer"));
  s.validate();
  return s;
}

Json run_summary_json(const RunRecord& r) {
  Json j;
  j["seed"] = r.seed;
  j["f_best"] = r.f_best;
  j["evaluations"] = r.evaluations;
  j["iterations"] = r.iterations;
  j["accepted_steps"] = r.accepted_steps;
  j["termination"] = std::string(to_string(r.termination));
  j["x_best"] = r.x_best;
  return j;
}

}  // namespace glasd
