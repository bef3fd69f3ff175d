#include "rop/harness/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <type_traits>

namespace rop::harness {

using nlohmann::json;

std::string to_string(CompareMode mode) { return mode == CompareMode::Rop ? "rop" : "srop"; }

CompareMode parse_compare_mode(std::string_view name) {
  if (name == "rop") return CompareMode::Rop;
  if (name == "srop") return CompareMode::Srop;
  throw std::invalid_argument("unknown comparison mode '" + std::string(name) + "'");
}

namespace {

std::string residual_name(ConstraintSpec::ResidualNorm q) {
  return q == ConstraintSpec::ResidualNorm::L1 ? "l1" : "l2";
}

ConstraintSpec::ResidualNorm parse_residual(std::string_view s) {
  if (s == "l1") return ConstraintSpec::ResidualNorm::L1;
  if (s == "l2") return ConstraintSpec::ResidualNorm::L2;
  throw std::invalid_argument("unknown residual reading '" + std::string(s) + "'");
}

// Field lists shared by the writer and the strict reader.

template <class V>
void fields(V& v, SolverConfig& c) {
  v("max_iters", c.max_iters);
  v("primal_tol", c.primal_tol);
  v("feas_tol", c.feas_tol);
  v("step_ratio", c.step_ratio);
  v("over_relaxation", c.over_relaxation);
}

template <class V>
void fields(V& v, CovOptions& o) {
  v("c1", o.constants.c1);
  v("c2", o.constants.c2);
  v("c3", o.constants.c3);
  v("reading", o.reading);
  v("psd_project", o.psd_project);
}

template <class V, class S>
void common(V& v, S& s) {
  v("trials", s.trials);
  v("seed", s.seed);
  v("threads", s.threads);
  v("solver", s.solver);
}

template <class V>
void fields(V& v, PhaseSpec& s) {
  v("p1", s.p1);
  v("p2", s.p2);
  v("r", s.r);
  v("c_grid", s.c_grid);
  v("kinds", s.kinds);
  v("dist", s.dist);
  common(v, s);
}

template <class V>
void fields(V& v, RobustSpec& s) {
  v("p", s.p);
  v("n", s.n);
  v("ranks", s.ranks);
  common(v, s);
}

template <class V>
void fields(V& v, RateSpec& s) {
  v("p", s.p);
  v("r", s.r);
  v("sigma", s.sigma);
  v("n_grid", s.n_grid);
  common(v, s);
}

template <class V>
void fields(V& v, CompareSpec& s) {
  v("mode", s.mode);
  v("p", s.p);
  v("r", s.r);
  v("sigma", s.sigma);
  v("n_grid", s.n_grid);
  common(v, s);
}

template <class V>
void fields(V& v, LowerSpec& s) {
  v("p", s.p);
  v("r", s.r);
  v("n_grid", s.n_grid);
  common(v, s);
}

template <class V>
void fields(V& v, CovSpec& s) {
  v("p", s.p);
  v("r", s.r);
  v("spike", s.spike);
  v("n_grid", s.n_grid);
  v("options", s.options);
  common(v, s);
}

template <class V>
void fields(V& v, CvSpec& s) {
  v("mode", s.mode);
  v("p", s.p);
  v("r", s.r);
  v("sigma", s.sigma);
  v("n_grid", s.n_grid);
  v("folds", s.folds);
  v("splits", s.splits);
  v("grid_points", s.grid_points);
  common(v, s);
}

template <class V>
void fields(V& v, ImageTask& s) {
  v("input", s.input);
  v("rank_budget", s.rank_budget);
  v("measurements", s.measurements);
  common(v, s);
}

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
concept HasFields = std::is_same_v<T, SolverConfig> || std::is_same_v<T, CovOptions>;


template <class T>
json encode_value(const T& value);

struct Writer {
  json out = json::object();
  template <class T>
  void operator()(const char* key, T& field) {
    out[key] = encode_value(field);
  }
};

template <class T>
json encode_value(const T& value) {
  if constexpr (std::is_same_v<T, EnsembleKind> || std::is_same_v<T, Distribution> ||
                std::is_same_v<T, CvMode> || std::is_same_v<T, CompareMode>) {
    return to_string(value);
  } else if constexpr (std::is_same_v<T, ConstraintSpec::ResidualNorm>) {
    return residual_name(value);
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    return value.string();
  } else if constexpr (std::is_same_v<T, std::optional<Index>>) {
    return value ? json(*value) : json(nullptr);
  } else if constexpr (is_vector<T>::value) {
    json a = json::array();
    for (const auto& e : value) a.push_back(encode_value(e));
    return a;
  } else if constexpr (HasFields<T>) {
    Writer w;
    T copy = value;
    fields(w, copy);
    return w.out;
  } else {
    return json(value);
  }
}

[[noreturn]] void type_error(const std::string& key, const char* want) {
  throw std::invalid_argument("config key '" + key + "': expected " + want);
}

template <class T>
T decode_value(const json& j, const std::string& key);

template <class T>
T decode_fields(const json& j, const std::string& key, T base);

template <class T>
T decode_value(const json& j, const std::string& key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) type_error(key, "a boolean");
    return j.get<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) type_error(key, "an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (!j.is_number_unsigned()) type_error(key, "a nonnegative integer");
    }
    return j.get<T>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) type_error(key, "a number");
    return j.get<T>();
  } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
    if (!j.is_string()) type_error(key, "a path string");
    return std::filesystem::path(j.get<std::string>());
  } else if constexpr (std::is_same_v<T, std::optional<Index>>) {
    if (j.is_null()) return std::nullopt;
    return decode_value<Index>(j, key);
  } else if constexpr (is_vector<T>::value) {
    if (!j.is_array()) type_error(key, "an array");
    T out;
    for (const auto& e : j) out.push_back(decode_value<typename T::value_type>(e, key));
    return out;
  } else if constexpr (HasFields<T>) {
    return decode_fields<T>(j, key, T{});
  } else {
    if (!j.is_string()) type_error(key, "a name string");
    const std::string s = j.get<std::string>();
    if constexpr (std::is_same_v<T, EnsembleKind>) return parse_ensemble_kind(s);
    else if constexpr (std::is_same_v<T, Distribution>) return parse_distribution(s);
    else if constexpr (std::is_same_v<T, CvMode>) return parse_cv_mode(s);
    else if constexpr (std::is_same_v<T, CompareMode>) return parse_compare_mode(s);
    else return parse_residual(s);
  }
}

struct Reader {
  const json& in;
  std::string scope;
  std::set<std::string> known;

  template <class T>
  void operator()(const char* key, T& field) {
    known.insert(key);
    if (!in.contains(key)) return;
    const std::string path = scope.empty() ? key : scope + "." + key;
    if constexpr (HasFields<T>) {
      field = decode_fields<T>(in.at(key), path, field);
    } else {
      field = decode_value<T>(in.at(key), path);
    }
  }

  void finish() const {
    for (const auto& [key, value] : in.items()) {
      if (!known.count(key)) {
        throw std::invalid_argument("unknown config key '" + (scope.empty() ? key : scope + "." + key) + "'");
      }
    }
  }
};

template <class T>
T decode_fields(const json& j, const std::string& key, T base) {
  if (!j.is_object()) type_error(key.empty() ? "<root>" : key, "an object");
  Reader r{j, key, {}};
  fields(r, base);
  r.finish();
  return base;
}

template <class S>
json to_json_impl(const S& spec) {
  Writer w;
  S copy = spec;
  fields(w, copy);
  return w.out;
}

template <class S>
S parse_impl(const json& j, S base) {
  S out = decode_fields<S>(j, "", std::move(base));
  out.validate();
  return out;
}

}  // namespace

json to_json(const SolverConfig& cfg) { return to_json_impl(cfg); }
json to_json(const PhaseSpec& spec) { return to_json_impl(spec); }
json to_json(const RobustSpec& spec) { return to_json_impl(spec); }
json to_json(const RateSpec& spec) { return to_json_impl(spec); }
json to_json(const CompareSpec& spec) { return to_json_impl(spec); }
json to_json(const LowerSpec& spec) { return to_json_impl(spec); }
json to_json(const CovSpec& spec) { return to_json_impl(spec); }
json to_json(const CvSpec& spec) { return to_json_impl(spec); }
json to_json(const ImageTask& task) { return to_json_impl(task); }

SolverConfig parse(const json& j, SolverConfig base) { return parse_impl(j, std::move(base)); }
PhaseSpec parse(const json& j, PhaseSpec base) { return parse_impl(j, std::move(base)); }
RobustSpec parse(const json& j, RobustSpec base) { return parse_impl(j, std::move(base)); }
RateSpec parse(const json& j, RateSpec base) { return parse_impl(j, std::move(base)); }
CompareSpec parse(const json& j, CompareSpec base) { return parse_impl(j, std::move(base)); }
LowerSpec parse(const json& j, LowerSpec base) { return parse_impl(j, std::move(base)); }
CovSpec parse(const json& j, CovSpec base) { return parse_impl(j, std::move(base)); }
CvSpec parse(const json& j, CvSpec base) { return parse_impl(j, std::move(base)); }
ImageTask parse(const json& j, ImageTask base) { return parse_impl(j, std::move(base)); }

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
}

}  // namespace rop::harness
