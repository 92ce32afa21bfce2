#pragma once

// Experiment configuration (one JSON document per experiment) and the
// tabular result format shared by every subcommand.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ospc/channel_models.hpp"
#include "ospc/error.hpp"
#include "ospc/mean_field.hpp"
#include "ospc/scheduler.hpp"
#include "ospc/simulator.hpp"

namespace ospc {

using json = nlohmann::json;

struct PfsSettings {
  int users = 50;
  double snr_db_min = -10.0;
  double snr_db_max = 30.0;
  std::size_t points = 60;
};

struct ClassSetting {
  double delay = 1.0;
  double fraction = 1.0;
};

struct SimulationSettings {
  std::size_t users = 50;
  std::int64_t horizon = 100000;
  double n0 = 1.0;
  double spectral_efficiency = 1.0;
  ArrivalLaw arrival;
  std::vector<ClassSetting> classes{{3.0, 1.0}};
  std::optional<double> kappa;  // explicit single-class threshold, overrides classes
  std::optional<std::int64_t> warmup;
  double stability_fraction = 0.1;
};

struct ConvergenceSettings {
  std::vector<std::size_t> users{8, 32, 128};
  std::size_t systems = 100;
  std::int64_t horizon = 10000;
  std::vector<double> spectral_efficiencies{1.0, 4.0};
  double kappa = 0.0;
};

struct ExperimentConfig {
  PathLossLaw pathloss{2.0, 0.01};
  FadingLaw fading = FadingLaw::exp_unit_mean(10);
  RateUnit rate_unit = RateUnit::kNats;
  std::vector<double> spectral_efficiencies{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<double> delays{1.0, 1.25, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0};
  std::vector<double> kappas{0.0, 2.0, 3.0, 4.0};
  PfsSettings pfs;
  SimulationSettings simulation;
  ConvergenceSettings convergence;
  std::uint64_t seed = 1;
  std::optional<std::string> output_path;
  std::string format = "csv";

  SimConfig sim_config() const {
    SimConfig c;
    c.users = simulation.users;
    c.spectral_efficiency = simulation.spectral_efficiency;
    c.pathloss = pathloss;
    c.fading = fading;
    if (simulation.kappa) {
      c.thresholds = ClassThresholds::single(fading, *simulation.kappa);
    } else {
      std::vector<double> d;
      std::vector<double> a;
      for (const auto& cls : simulation.classes) {
        d.push_back(cls.delay);
        a.push_back(cls.fraction);
      }
      c.thresholds = ClassThresholds::from_delays(fading, d, a);
    }
    c.arrival = simulation.arrival;
    c.horizon = simulation.horizon;
    c.n0 = simulation.n0;
    c.seed = seed;
    c.warmup = simulation.warmup;
    return c;
  }

  AnalysisConfig analysis_config(double spectral_efficiency, double kappa = 0.0) const {
    return {spectral_efficiency, ConditionalChannelLaw(pathloss, fading, kappa), rate_unit};
  }

  json to_json() const;
  static ExperimentConfig from_json(const json& doc);
  static ExperimentConfig load(const std::string& path);
};

namespace detail {

/// Object reader that rejects keys it was not asked about.
class ObjectReader {
 public:
  ObjectReader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    require(obj_.is_object(), ErrorKind::kConfigInvalid, where_ + " must be a JSON object");
  }

  ~ObjectReader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : obj_.items()) {
      require(seen_.count(key) > 0, ErrorKind::kConfigInvalid,
              "unknown key '" + key + "' in " + where_);
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }

  template <class T>
  void read(const std::string& key, T& out) {
    if (const json* v = find(key)) {
      try {
        out = v->get<T>();
      } catch (const json::exception& e) {
        fail(ErrorKind::kConfigInvalid, where_ + "." + key + ": " + e.what());
      }
    }
  }

  template <class T>
  void read(const std::string& key, std::optional<T>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
        return;
      }
      T value{};
      read(key, value);
      out = value;
    }
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

inline FadingLaw parse_fading(const json& j) {
  ObjectReader r(j, "fading");
  std::string type = "exp";
  r.read("type", type);
  if (type == "exp") {
    int bands = 1;
    r.read("bands", bands);
    require(bands >= 1, ErrorKind::kConfigInvalid, "fading.bands must be >= 1");
    return FadingLaw::exp_unit_mean(bands);
  }
  if (type == "pareto") {
    double alpha_f = 2.0;
    r.read("alpha_f", alpha_f);
    require(alpha_f > 1.0, ErrorKind::kConfigInvalid, "fading.alpha_f must exceed 1");
    return FadingLaw::pareto_tail(alpha_f);
  }
  if (type == "uniform") {
    double sup = 1.0;
    int bands = 1;
    r.read("sup", sup);
    r.read("bands", bands);
    require(sup > 0.0 && bands >= 1, ErrorKind::kConfigInvalid,
            "fading.sup must be positive and fading.bands >= 1");
    return FadingLaw::bounded_uniform(sup, bands);
  }
  fail(ErrorKind::kConfigInvalid, "fading.type must be one of exp, pareto, uniform");
}

inline json fading_to_json(const FadingLaw& law) {
  return std::visit(
      [](const auto& f) -> json {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ExpUnitMean>) {
          return {{"type", "exp"}, {"bands", f.bands}};
        } else if constexpr (std::is_same_v<T, ParetoTail>) {
          return {{"type", "pareto"}, {"alpha_f", f.alpha_f}};
        } else {
          return {{"type", "uniform"}, {"sup", f.sup}, {"bands", f.bands}};
        }
      },
      law.variant());
}

inline ArrivalLaw parse_arrival(const json& j) {
  ObjectReader r(j, "simulation.arrival");
  std::string type = "constant";
  r.read("type", type);
  try {
    if (type == "constant") return ArrivalLaw::constant();
    if (type == "bernoulli") {
      double p = 0.5;
      r.read("p", p);
      return ArrivalLaw::bernoulli_scaled(p);
    }
    if (type == "uniform") {
      int lo = 0;
      int hi = 2;
      r.read("lo", lo);
      r.read("hi", hi);
      return ArrivalLaw::uniform_discrete(lo, hi);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kConfigInvalid) throw;
    fail(ErrorKind::kConfigInvalid, e.what());
  }
  fail(ErrorKind::kConfigInvalid, "simulation.arrival.type must be constant, bernoulli or uniform");
}

inline json arrival_to_json(const ArrivalLaw& law) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, ConstantArrivals>) {
          return {{"type", "constant"}};
        } else if constexpr (std::is_same_v<T, BernoulliScaled>) {
          return {{"type", "bernoulli"}, {"p", a.p}};
        } else {
          return {{"type", "uniform"}, {"lo", a.lo}, {"hi", a.hi}};
        }
      },
      law.variant());
}

inline void require_positive_all(const std::vector<double>& v, const std::string& what) {
  for (double x : v) {
    require(x > 0.0 && std::isfinite(x), ErrorKind::kConfigInvalid, what + " must be positive");
  }
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  ExperimentConfig c;
  detail::ObjectReader root(doc, "config");

  if (const json* pl = root.find("pathloss")) {
    detail::ObjectReader r(*pl, "pathloss");
    double alpha = 2.0;
    double delta = 0.01;
    r.read("alpha", alpha);
    r.read("delta", delta);
    require(alpha >= 1.0 && std::isfinite(alpha), ErrorKind::kConfigInvalid,
            "pathloss.alpha must be >= 1");
    require(delta > 0.0 && delta < 1.0, ErrorKind::kConfigInvalid,
            "pathloss.delta must lie in (0, 1)");
    c.pathloss = PathLossLaw(alpha, delta);
  }
  if (const json* f = root.find("fading")) c.fading = detail::parse_fading(*f);

  std::string unit = "nats";
  root.read("rate_unit", unit);
  require(unit == "nats" || unit == "bits", ErrorKind::kConfigInvalid,
          "rate_unit must be nats or bits");
  c.rate_unit = unit == "nats" ? RateUnit::kNats : RateUnit::kBits;

  root.read("spectral_efficiencies", c.spectral_efficiencies);
  detail::require_positive_all(c.spectral_efficiencies, "spectral_efficiencies");
  root.read("delays", c.delays);
  for (double d : c.delays) {
    require(d >= 1.0 && std::isfinite(d), ErrorKind::kConfigInvalid, "delays must be >= 1");
  }
  root.read("kappas", c.kappas);
  for (double k : c.kappas) {
    require(k >= 0.0 && std::isfinite(k), ErrorKind::kConfigInvalid, "kappas must be >= 0");
  }

  if (const json* p = root.find("pfs")) {
    detail::ObjectReader r(*p, "pfs");
    r.read("users", c.pfs.users);
    r.read("snr_db_min", c.pfs.snr_db_min);
    r.read("snr_db_max", c.pfs.snr_db_max);
    r.read("points", c.pfs.points);
    require(c.pfs.users >= 1, ErrorKind::kConfigInvalid, "pfs.users must be >= 1");
    require(c.pfs.points >= 2 && c.pfs.snr_db_max > c.pfs.snr_db_min, ErrorKind::kConfigInvalid,
            "pfs SNR grid needs >= 2 points and max > min");
  }

  if (const json* s = root.find("simulation")) {
    detail::ObjectReader r(*s, "simulation");
    auto& sim = c.simulation;
    r.read("users", sim.users);
    r.read("horizon", sim.horizon);
    r.read("n0", sim.n0);
    r.read("spectral_efficiency", sim.spectral_efficiency);
    if (const json* a = r.find("arrival")) sim.arrival = detail::parse_arrival(*a);
    if (const json* classes = r.find("classes")) {
      require(classes->is_array() && !classes->empty(), ErrorKind::kConfigInvalid,
              "simulation.classes must be a non-empty array");
      sim.classes.clear();
      for (const auto& entry : *classes) {
        detail::ObjectReader cr(entry, "simulation.classes[]");
        ClassSetting cls;
        cr.read("delay", cls.delay);
        cr.read("fraction", cls.fraction);
        require(cls.delay >= 1.0, ErrorKind::kConfigInvalid, "class delay must be >= 1");
        require(cls.fraction >= 0.0, ErrorKind::kConfigInvalid, "class fraction must be >= 0");
        sim.classes.push_back(cls);
      }
    }
    r.read("kappa", sim.kappa);
    r.read("warmup", sim.warmup);
    r.read("stability_fraction", sim.stability_fraction);
    require(sim.users >= 1, ErrorKind::kConfigInvalid, "simulation.users must be >= 1");
    require(sim.horizon >= 1, ErrorKind::kConfigInvalid, "simulation.horizon must be >= 1");
    require(sim.n0 > 0.0, ErrorKind::kConfigInvalid, "simulation.n0 must be positive");
    require(sim.spectral_efficiency > 0.0, ErrorKind::kConfigInvalid,
            "simulation.spectral_efficiency must be positive");
    require(!sim.kappa || *sim.kappa >= 0.0, ErrorKind::kConfigInvalid,
            "simulation.kappa must be >= 0");
    double total = 0.0;
    for (const auto& cls : sim.classes) total += cls.fraction;
    require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kConfigInvalid,
            "simulation.classes fractions must sum to 1");
  }

  if (const json* cv = root.find("convergence")) {
    detail::ObjectReader r(*cv, "convergence");
    auto& conv = c.convergence;
    r.read("users", conv.users);
    r.read("systems", conv.systems);
    r.read("horizon", conv.horizon);
    r.read("spectral_efficiencies", conv.spectral_efficiencies);
    r.read("kappa", conv.kappa);
    require(!conv.users.empty(), ErrorKind::kConfigInvalid, "convergence.users must be non-empty");
    for (auto k : conv.users) {
      require(k >= 1, ErrorKind::kConfigInvalid, "convergence.users entries must be >= 1");
    }
    require(conv.systems >= 1 && conv.horizon >= 1, ErrorKind::kConfigInvalid,
            "convergence.systems and convergence.horizon must be >= 1");
    detail::require_positive_all(conv.spectral_efficiencies, "convergence.spectral_efficiencies");
    require(conv.kappa >= 0.0, ErrorKind::kConfigInvalid, "convergence.kappa must be >= 0");
  }

  root.read("seed", c.seed);
  if (const json* out = root.find("output")) {
    detail::ObjectReader r(*out, "output");
    r.read("path", c.output_path);
    r.read("format", c.format);
  }
  require(c.format == "csv" || c.format == "json", ErrorKind::kConfigInvalid,
          "output.format must be csv or json");
  return c;
}

inline json ExperimentConfig::to_json() const {
  json j;
  j["pathloss"] = {{"alpha", pathloss.alpha()}, {"delta", pathloss.delta()}};
  j["fading"] = detail::fading_to_json(fading);
  j["rate_unit"] = std::string(to_string(rate_unit));
  j["spectral_efficiencies"] = spectral_efficiencies;
  j["delays"] = delays;
  j["kappas"] = kappas;
  j["pfs"] = {{"users", pfs.users},
              {"snr_db_min", pfs.snr_db_min},
              {"snr_db_max", pfs.snr_db_max},
              {"points", pfs.points}};
  json classes = json::array();
  for (const auto& cls : simulation.classes) {
    classes.push_back({{"delay", cls.delay}, {"fraction", cls.fraction}});
  }
  j["simulation"] = {{"users", simulation.users},
                     {"horizon", simulation.horizon},
                     {"n0", simulation.n0},
                     {"spectral_efficiency", simulation.spectral_efficiency},
                     {"arrival", detail::arrival_to_json(simulation.arrival)},
                     {"classes", classes},
                     {"kappa", simulation.kappa ? json(*simulation.kappa) : json(nullptr)},
                     {"warmup", simulation.warmup ? json(*simulation.warmup) : json(nullptr)},
                     {"stability_fraction", simulation.stability_fraction}};
  j["convergence"] = {{"users", convergence.users},
                      {"systems", convergence.systems},
                      {"horizon", convergence.horizon},
                      {"spectral_efficiencies", convergence.spectral_efficiencies},
                      {"kappa", convergence.kappa}};
  j["seed"] = seed;
  j["output"] = {{"path", output_path ? json(*output_path) : json(nullptr)}, {"format", format}};
  return j;
}

inline ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::kConfigInvalid, "cannot open config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kConfigInvalid, "config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(doc);
}

// ---------------------------------------------------------------------------
// Result tables

using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  json metadata = json::object();

  void add_row(std::vector<Cell> row) {
    require(row.size() == columns.size(), ErrorKind::kInvalidInput,
            "row width " + std::to_string(row.size()) + " does not match " +
                std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    fail(ErrorKind::kInvalidInput, "no column named " + name);
  }

  /// Numeric value of a cell (NaN for empty or text cells).
  double number(std::size_t row, const std::string& name) const {
    const Cell& c = rows.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    return std::numeric_limits<double>::quiet_NaN();
  }

  std::string to_csv() const;
  json to_json() const;
};

/// Shortest representation that round-trips; independent of the C locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

inline std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return "";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_double(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return v;
        }
      },
      c);
}

inline std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(columns[i]);
  }
  out += "\r\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += csv_escape(cell_text(row[i]));
    }
    out += "\r\n";
  }
  return out;
}

inline json ResultTable::to_json() const {
  json j;
  j["metadata"] = metadata;
  j["columns"] = columns;
  json rows_json = json::array();
  for (const auto& row : rows) {
    json r = json::array();
    for (const auto& c : row) {
      std::visit(
          [&r](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              r.push_back(nullptr);
            } else if constexpr (std::is_same_v<T, double>) {
              r.push_back(std::isfinite(v) ? json(v) : json(nullptr));
            } else {
              r.push_back(v);
            }
          },
          c);
    }
    rows_json.push_back(std::move(r));
  }
  j["rows"] = std::move(rows_json);
  return j;
}

}  // namespace ospc
