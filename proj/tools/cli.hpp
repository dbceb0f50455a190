#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srip/srip.hpp"

namespace srip::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kDimensionError = 3, kRegression = 4 };

struct RunConfig {
  std::string command;
  std::uint64_t seed = 0;
  std::string format = "csv";
  std::string output;
  unsigned threads = 1;

  std::string family = "gaussian";
  std::size_t n = 0;  // 0 = command default
  std::size_t N = 0;
  double nu = 5.0;
  bool real_generator = false;
  bool no_signs = false;
  bool prefix_rows = false;

  std::size_t trials = 0;
  std::size_t L = 4;
  std::size_t d = 4;
  std::size_t points_per = 50;
  double noise = 0.0;
  std::size_t q = 0;
  std::size_t draws = 1000;
  std::vector<double> lambdas{0.9, 0.5};
  std::size_t d2_extra = 0;
  std::string x1, x2, input;
  std::string kind = "operator";
  std::vector<double> eps{0.1, 0.25, 0.5};
  std::vector<std::size_t> ns{64, 1024};
  std::vector<std::string> families;
  std::size_t vectors = 256;
  std::size_t repeats = 5;
};

namespace detail {

inline std::size_t or_default(std::size_t v, std::size_t fallback) { return v ? v : fallback; }

inline EnsembleSpec make_spec(const RunConfig& c, std::size_t n, std::size_t N, std::uint64_t seed) {
  EnsembleSpec s;
  s.family = family_from_string(c.family);
  s.n = n;
  s.N = N;
  s.seed = seed;
  s.params.nu = c.nu;
  s.params.real_generator = c.real_generator;
  s.params.sign_randomization = !c.no_signs;
  s.params.rows = c.prefix_rows ? RowSelection::prefix : RowSelection::random;
  validate(s);
  return s;
}

inline std::vector<Subspace> random_collection(std::size_t N, std::size_t count, std::size_t d, std::uint64_t seed) {
  require(d >= 1 && d <= N, ErrorKind::bad_parameters, "subspace dimension must satisfy 1 <= d <= N");
  Rng rng = make_rng(seed);
  std::vector<Subspace> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_subspace(N, d, rng));
  return out;
}

/// Applies a JSON object of overrides; keys are the long flag names.
inline void apply_config(RunConfig& c, const io::Json& j) {
  require(j.is_object(), ErrorKind::parse_error, "--config must hold a JSON object");
  using Setter = std::function<void(const io::Json&)>;
  const std::map<std::string, Setter> setters = {
      {"seed", [&](const io::Json& v) { c.seed = v.get<std::uint64_t>(); }},
      {"format", [&](const io::Json& v) { c.format = v.get<std::string>(); }},
      {"output", [&](const io::Json& v) { c.output = v.get<std::string>(); }},
      {"threads", [&](const io::Json& v) { c.threads = v.get<unsigned>(); }},
      {"family", [&](const io::Json& v) { c.family = v.get<std::string>(); }},
      {"target-dim", [&](const io::Json& v) { c.n = v.get<std::size_t>(); }},
      {"ambient-dim", [&](const io::Json& v) { c.N = v.get<std::size_t>(); }},
      {"nu", [&](const io::Json& v) { c.nu = v.get<double>(); }},
      {"real-generator", [&](const io::Json& v) { c.real_generator = v.get<bool>(); }},
      {"no-signs", [&](const io::Json& v) { c.no_signs = v.get<bool>(); }},
      {"prefix-rows", [&](const io::Json& v) { c.prefix_rows = v.get<bool>(); }},
      {"trials", [&](const io::Json& v) { c.trials = v.get<std::size_t>(); }},
      {"subspaces", [&](const io::Json& v) { c.L = v.get<std::size_t>(); }},
      {"dim", [&](const io::Json& v) { c.d = v.get<std::size_t>(); }},
      {"points-per", [&](const io::Json& v) { c.points_per = v.get<std::size_t>(); }},
      {"noise", [&](const io::Json& v) { c.noise = v.get<double>(); }},
      {"neighbors", [&](const io::Json& v) { c.q = v.get<std::size_t>(); }},
      {"draws", [&](const io::Json& v) { c.draws = v.get<std::size_t>(); }},
      {"lambdas", [&](const io::Json& v) { c.lambdas = v.get<std::vector<double>>(); }},
      {"d2-extra", [&](const io::Json& v) { c.d2_extra = v.get<std::size_t>(); }},
      {"x1", [&](const io::Json& v) { c.x1 = v.get<std::string>(); }},
      {"x2", [&](const io::Json& v) { c.x2 = v.get<std::string>(); }},
      {"input", [&](const io::Json& v) { c.input = v.get<std::string>(); }},
      {"kind", [&](const io::Json& v) { c.kind = v.get<std::string>(); }},
      {"eps", [&](const io::Json& v) { c.eps = v.get<std::vector<double>>(); }},
      {"ns", [&](const io::Json& v) { c.ns = v.get<std::vector<std::size_t>>(); }},
      {"families", [&](const io::Json& v) { c.families = v.get<std::vector<std::string>>(); }},
      {"vectors", [&](const io::Json& v) { c.vectors = v.get<std::size_t>(); }},
      {"repeats", [&](const io::Json& v) { c.repeats = v.get<std::size_t>(); }},
      {"ensemble",
       [&](const io::Json& v) {
         const EnsembleSpec s = io::spec_from_json(v);
         c.family = std::string(to_string(s.family));
         c.n = s.n;
         c.N = s.N;
         c.seed = s.seed;
         c.nu = s.params.nu;
         c.real_generator = s.params.real_generator;
         c.no_signs = !s.params.sign_randomization;
         c.prefix_rows = s.params.rows == RowSelection::prefix;
       }},
  };
  for (const auto& [key, value] : j.items()) {
    const auto it = setters.find(key);
    require(it != setters.end(), ErrorKind::parse_error, "unknown --config key '" + key + "'");
    try {
      it->second(value);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::parse_error, "--config key '" + key + "': " + e.what());
    }
  }
}

class Emitter {
 public:
  explicit Emitter(const RunConfig& c, std::ostream&) : format_(c.format) {
    if (!c.output.empty()) {
      file_.open(c.output, std::ios::binary);
      require(static_cast<bool>(file_), ErrorKind::parse_error, "cannot write '" + c.output + "'");
    }
  }
  std::ostream& stream(std::ostream& fallback) { return file_.is_open() ? file_ : fallback; }
  bool json() const { return format_ == "json"; }

 private:
  std::string format_;
  std::ofstream file_;
};

inline void emit(const RunConfig& c, std::ostream& out, const io::Table& t) {
  Emitter e(c, out);
  if (e.json())
    io::write_json(e.stream(out), t);
  else
    io::write_csv(e.stream(out), t);
}

/// Several named tables: one JSON object, or CSV sections separated by a blank line.
inline void emit(const RunConfig& c, std::ostream& out, const std::vector<std::pair<std::string, io::Table>>& tables) {
  Emitter e(c, out);
  std::ostream& os = e.stream(out);
  if (e.json()) {
    io::Json obj = io::Json::object();
    for (const auto& [name, t] : tables) obj[name] = io::to_json(t);
    os << obj.dump(2) << '\n';
    return;
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i) os << '\n';
    io::write_csv(os, tables[i].second);
  }
}

inline Subspace load_subspace(const std::string& path) { return io::parse_subspace(io::read_file(path)); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline int cmd_affinity(const RunConfig& c, std::ostream& out, std::ostream&) {
  Subspace x1 = Subspace::from_basis(Matrix::identity(1));
  Subspace x2 = x1;
  if (!c.x1.empty() || !c.x2.empty()) {
    require(!c.x1.empty() && !c.x2.empty(), ErrorKind::bad_parameters, "give both --x1 and --x2");
    x1 = detail::load_subspace(c.x1);
    x2 = detail::load_subspace(c.x2);
  } else {
    std::tie(x1, x2) = random_pair_with_angles(detail::or_default(c.N, 64), c.lambdas, c.d2_extra, c.seed);
  }
  const double aff_sq = affinity_squared(x1, x2);
  const double dist_sq = distance_squared(x1, x2);
  const double residual = std::abs(dist_sq + aff_sq - 0.5 * static_cast<double>(x1.dim() + x2.dim()));
  io::Table t{{"N", "d1", "d2", "aff", "aff_sq", "dist", "dist_sq", "identity_residual"}, {}};
  t.add({io::count_cell(x1.ambient_dim()), io::count_cell(x1.dim()), io::count_cell(x2.dim()),
         std::sqrt(std::max(0.0, aff_sq)), aff_sq, std::sqrt(dist_sq), dist_sq, residual});
  detail::emit(c, out, t);
  return kOk;
}

inline int cmd_gen(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::size_t N = detail::or_default(c.N, 64);
  detail::Emitter e(c, out);
  std::ostream& os = e.stream(out);
  if (c.kind == "operator" || c.kind == "spec") {
    const EnsembleSpec spec = detail::make_spec(c, detail::or_default(c.n, 16), N, c.seed);
    if (c.kind == "spec") {
      os << io::spec_to_json(spec).dump(2) << '\n';
      return kOk;
    }
    const ProjectionOperator op = sample(spec);
    if (e.json()) {
      const Matrix phi = op.densify();
      io::Json rows = io::Json::array();
      for (std::size_t i = 0; i < phi.rows(); ++i) {
        io::Json r = io::Json::array();
        for (double v : phi.row(i)) r.push_back(std::stod(io::format_number(v)));
        rows.push_back(std::move(r));
      }
      os << io::Json{{"spec", io::spec_to_json(spec)}, {"matrix", std::move(rows)}}.dump(2) << '\n';
    } else {
      io::write_operator_csv(os, op);
    }
    return kOk;
  }
  if (c.kind == "subspace") {
    Rng rng = make_rng(c.seed);
    const Subspace s = random_subspace(N, c.d, rng);
    if (e.json())
      os << io::subspace_to_json(s).dump(2) << '\n';
    else
      io::write_subspace_csv(os, s);
    return kOk;
  }
  if (c.kind == "dataset") {
    require(!e.json(), ErrorKind::bad_parameters, "datasets are written as CSV only");
    const UoSDataset ds = synth_uos(N, c.L, std::vector<std::size_t>(c.L, c.d),
                                    std::vector<std::size_t>(c.L, c.points_per), c.noise, c.seed);
    io::write_dataset_csv(os, ds.points, c.L, ds.labels);
    return kOk;
  }
  fail(ErrorKind::bad_parameters, "--kind must be operator, spec, subspace or dataset");
}

inline int cmd_project(const RunConfig& c, std::ostream& out, std::ostream&) {
  require(!c.input.empty(), ErrorKind::bad_parameters, "project needs --input <dataset.csv>");
  require(c.format == "csv", ErrorKind::bad_parameters, "datasets are written as CSV only");
  const io::Dataset ds = io::parse_dataset(io::read_file(c.input));
  require(c.N == 0 || c.N == ds.points.rows(), ErrorKind::dimension_mismatch,
          "--ambient-dim differs from the dataset's N");
  const EnsembleSpec spec = detail::make_spec(c, detail::or_default(c.n, ds.points.rows()), ds.points.rows(), c.seed);
  const Matrix projected = sample(spec).apply(ds.points);
  detail::Emitter e(c, out);
  io::write_dataset_csv(e.stream(out), projected, ds.clusters, ds.labels);
  return kOk;
}

inline int cmd_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const std::size_t N = detail::or_default(c.N, 128);
  const std::size_t n = detail::or_default(c.n, 96);
  const std::size_t trials = detail::or_default(c.trials, 50);
  require(c.L >= 2, ErrorKind::bad_parameters, "verify needs --subspaces >= 2");
  detail::make_spec(c, n, N, c.seed);  // validate once up front

  struct TrialOutput {
    std::vector<std::vector<io::Cell>> pairs;
    io::Cell delta_max;
    std::size_t violated = 0;
    std::size_t over_constant = 0;
    std::size_t over_ceiling = 0;
  };
  std::vector<TrialOutput> results(trials);
  const std::string fam = c.family;
  parallel_for(trials, c.threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(c.seed, t);
    const auto collection = detail::random_collection(N, c.L, c.d, derive_seed(trial_seed, 0));
    const ProjectionOperator op = sample(detail::make_spec(c, n, N, derive_seed(trial_seed, 1)));
    TrialOutput& r = results[t];
    try {
      r.delta_max = discrepancy(op, collection).delta_max;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::rank_collapse) throw;
    }
    for (std::size_t i = 0; i < collection.size(); ++i) {
      for (std::size_t j = i + 1; j < collection.size(); ++j) {
        const auto& xi = collection[i];
        const auto& xj = collection[j];
        const NearIsometryReport iso = measure_near_isometry(op, sum(xi, xj));
        std::optional<PairBoundRecord> rec;
        try {
          rec = verify_pair_bound(op, xi, xj);
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::rank_collapse) throw;
        }
        const double aff_x = affinity_squared(xi, xj);
        io::Cell aff_y, ratio, bound;
        if (rec) {
          aff_y = rec->aff_y_sq;
          const double den = static_cast<double>(std::max(xi.dim(), xj.dim())) - aff_x;
          if (den >= kDegenerateDenominator) ratio = rec->aff_change / den;
          bound = io::optional_cell(rec->bound_ratio);
          if (rec->bound_ratio) {
            if (iso.hypothesis_holds && *rec->bound_ratio > kPairBoundConstant) ++r.over_constant;
            if (*rec->bound_ratio > kRegressionFactor * kPairBoundConstant) ++r.over_ceiling;
          }
        }
        if (!iso.hypothesis_holds) ++r.violated;
        r.pairs.push_back({io::count_cell(t), io::count_cell(i + 1), io::count_cell(j + 1), io::count_cell(xi.dim()),
                           io::count_cell(xj.dim()), aff_x, aff_y, ratio, iso.delta, bound,
                           !iso.hypothesis_holds, io::count_cell(n), io::count_cell(N), fam, trial_seed});
      }
    }
  });

  io::Table pairs{{"trial", "i", "j", "d_i", "d_j", "aff_x_sq", "aff_y_sq", "ratio", "delta", "bound_ratio",
                   "hypothesis_violated", "n", "N", "family", "seed"},
                  {}};
  io::Table summary{{"trial", "seed", "Delta", "hypothesis_violated_pairs"}, {}};
  std::size_t violated = 0, over_constant = 0, over_ceiling = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (auto& row : results[t].pairs) pairs.add(std::move(row));
    summary.add({io::count_cell(t), derive_seed(c.seed, t), results[t].delta_max, io::count_cell(results[t].violated)});
    violated += results[t].violated;
    over_constant += results[t].over_constant;
    over_ceiling += results[t].over_ceiling;
  }
  detail::emit(c, out, {{"pairs", pairs}, {"summary", summary}});

  if (violated)
    err << "warning: " << violated << " of " << pairs.rows.size()
        << " pairs have delta >= 1/4 on their sum space; no bound is claimed for them\n";
  if (over_constant || over_ceiling) {
    err << "regression: " << over_constant << " hypothesis-satisfying pairs exceed C = " << kPairBoundConstant << ", "
        << over_ceiling << " pairs exceed " << kRegressionFactor << "C\n";
    return kRegression;
  }
  return kOk;
}

inline int cmd_line_bound(const RunConfig& c, std::ostream& out, std::ostream& err) {
  LineBoundSweepConfig cfg;
  cfg.trials = detail::or_default(c.trials, 10000);
  cfg.ambient = detail::or_default(c.N, 256);
  cfg.d2 = c.d;
  cfg.n = detail::or_default(c.n, 64);
  cfg.family = family_from_string(c.family);
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  detail::make_spec(c, cfg.n, cfg.ambient, c.seed);
  const auto rows = line_bound_sweep(cfg);

  io::Table t{{"trial", "delta", "hypothesis_violated", "aff_x_sq", "aff_y_sq", "lhs", "bound_ratio"}, {}};
  std::size_t violated = 0, over_constant = 0, over_ceiling = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    t.add({io::count_cell(i), r.delta, !r.hypothesis_holds, r.aff_x_sq, r.aff_y_sq, r.lhs,
           io::optional_cell(r.bound_ratio)});
    violated += !r.hypothesis_holds;
    if (r.bound_ratio) {
      if (r.hypothesis_holds && *r.bound_ratio > kLineBoundConstant) ++over_constant;
      if (*r.bound_ratio > kRegressionFactor * kLineBoundConstant) ++over_ceiling;
    }
  }
  detail::emit(c, out, t);
  if (violated) err << "warning: " << violated << " of " << rows.size() << " trials have delta >= 1/4\n";
  if (over_constant || over_ceiling) {
    err << "regression: " << over_constant << " trials exceed C = " << kLineBoundConstant << ", " << over_ceiling
        << " exceed " << kRegressionFactor << "C\n";
    return kRegression;
  }
  return kOk;
}

inline int cmd_jl_tail(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::size_t N = detail::or_default(c.N, 256);
  const EnsembleSpec spec = detail::make_spec(c, detail::or_default(c.n, 64), N, c.seed);
  Rng rng = make_rng(derive_seed(c.seed, ~std::uint64_t{0}));
  auto x = normal_vector(N, rng);
  const double xn = norm2(x);
  for (auto& v : x) v /= xn;
  const JlTailCurve curve = jl_tail_estimate(spec, x, c.eps, detail::or_default(c.trials, 10000), c.threads);
  io::Table t{{"eps", "exceedance", "trials", "n", "N", "family", "seed"}, {}};
  for (std::size_t i = 0; i < curve.eps.size(); ++i)
    t.add({curve.eps[i], curve.exceedance[i], io::count_cell(curve.trials), io::count_cell(spec.n),
           io::count_cell(N), c.family, c.seed});
  detail::emit(c, out, t);
  return kOk;
}

inline int cmd_cluster(const RunConfig& c, std::ostream& out, std::ostream&) {
  std::optional<io::Dataset> given;
  if (!c.input.empty()) given = io::parse_dataset(io::read_file(c.input));
  const std::size_t N = given ? given->points.rows() : detail::or_default(c.N, 256);
  require(c.N == 0 || c.N == N, ErrorKind::dimension_mismatch, "--ambient-dim differs from the dataset's N");
  const std::size_t L = given ? given->clusters : c.L;
  const std::size_t q = detail::or_default(c.q, default_neighbor_count(c.d));
  if (c.n) detail::make_spec(c, c.n, N, c.seed);

  auto cluster_points = [&](const Matrix& points, std::uint64_t trial_seed, std::span<const std::size_t> labels) {
    Matrix x = normalize_columns(points);
    if (c.n) x = project_points(sample(detail::make_spec(c, c.n, N, derive_seed(trial_seed, 1))), x);
    return tsc(x, L, q, labels);
  };

  if (given && given->labels.empty()) {
    const auto result = cluster_points(given->points, derive_seed(c.seed, 0), {});
    io::Table t{{"point", "cluster"}, {}};
    for (std::size_t i = 0; i < result.assignments.size(); ++i)
      t.add({io::count_cell(i + 1), io::count_cell(result.assignments[i] + 1)});
    detail::emit(c, out, t);
    return kOk;
  }

  const std::size_t trials = detail::or_default(c.trials, given ? 1 : 20);
  std::vector<double> errors(trials);
  parallel_for(trials, c.threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(c.seed, t);
    if (given) {
      errors[t] = *cluster_points(given->points, trial_seed, given->labels).error_rate;
    } else {
      const UoSDataset ds = synth_uos(N, L, std::vector<std::size_t>(L, c.d), std::vector<std::size_t>(L, c.points_per),
                                      c.noise, derive_seed(trial_seed, 0));
      errors[t] = *cluster_points(ds.points, trial_seed, ds.labels).error_rate;
    }
  });
  io::Table t{{"trial", "seed", "error_rate"}, {}};
  for (std::size_t i = 0; i < trials; ++i) t.add({io::count_cell(i), derive_seed(c.seed, i), errors[i]});
  detail::emit(c, out, t);
  return kOk;
}

inline int cmd_detect(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::size_t N = detail::or_default(c.N, 256);
  const std::size_t n = detail::or_default(c.n, 64);
  const std::size_t trials = detail::or_default(c.trials, 1);
  detail::make_spec(c, n, N, c.seed);
  std::vector<DetectionSummary> results(trials);
  parallel_for(trials, c.threads, [&](std::size_t t) {
    const std::uint64_t trial_seed = derive_seed(c.seed, t);
    const auto subspaces = detail::random_collection(N, c.L, c.d, derive_seed(trial_seed, 0));
    const ProjectionOperator op = sample(detail::make_spec(c, n, N, derive_seed(trial_seed, 1)));
    results[t] = detection_trial(op, subspaces, c.draws, derive_seed(trial_seed, 2));
  });
  io::Table t{{"trial", "seed", "draws", "correct", "accuracy"}, {}};
  for (std::size_t i = 0; i < trials; ++i)
    t.add({io::count_cell(i), derive_seed(c.seed, i), io::count_cell(results[i].draws),
           io::count_cell(results[i].correct), results[i].accuracy()});
  detail::emit(c, out, t);
  return kOk;
}

inline int cmd_bench(const RunConfig& c, std::ostream& out, std::ostream&) {
  const std::size_t N = detail::or_default(c.N, 4096);
  std::vector<std::string> names = c.families;
  if (names.empty())
    for (Family f : kRandomFamilies)
      if (f != Family::partial_hadamard || is_power_of_two(N)) names.emplace_back(to_string(f));
  std::vector<EnsembleSpec> specs;
  for (const auto& name : names) {
    RunConfig fc = c;
    fc.family = name;
    for (std::size_t n : c.ns) specs.push_back(detail::make_spec(fc, n, N, c.seed));
  }
  const auto rows = bench_projection(specs, c.vectors, c.repeats);
  io::Table t{{"family", "n", "N", "mean_us", "median_us"}, {}};
  for (const auto& r : rows)
    t.add({std::string(to_string(r.family)), io::count_cell(r.n), io::count_cell(r.N), r.mean_us, r.median_us});
  detail::emit(c, out, t);
  return kOk;
}

// ---------------------------------------------------------------------------

inline int exit_code_for(ErrorKind kind) {
  return kind == ErrorKind::dimension_mismatch ? kDimensionError : kInputError;
}

/// Full command-line entry point; argv[0] is the program name.
inline int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  std::string config_path;
  CLI::App app{"Subspace restricted-isometry toolkit", "srip"};
  app.require_subcommand(1);
  auto* seed_opt = app.add_option("--seed", c.seed, "Master seed (falls back to $SRIP_SEED, then 0)");
  app.add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("-o,--output", c.output, "Output file (default stdout)");
  app.add_option("--threads", c.threads, "Worker threads for Monte-Carlo trials")->check(CLI::Range(1u, 1024u));
  app.add_option("--config", config_path, "JSON object overriding flags (keys are long flag names)");

  auto ensemble_opts = [&](CLI::App* s) {
    s->add_option("--family", c.family, "Ensemble family");
    s->add_option("-n,--target-dim", c.n, "Target dimension n");
    s->add_option("-N,--ambient-dim", c.N, "Ambient dimension N");
    s->add_option("--nu", c.nu, "Student-t degrees of freedom");
    s->add_flag("--real-generator", c.real_generator, "Real Gaussian circulant generator");
    s->add_flag("--no-signs", c.no_signs, "Disable random sign flips");
    s->add_flag("--prefix-rows", c.prefix_rows, "Keep the first n rows instead of random rows");
  };
  auto subspace_opts = [&](CLI::App* s) {
    s->add_option("--subspaces", c.L, "Number of subspaces L");
    s->add_option("--dim", c.d, "Subspace dimension d");
  };
  auto trials_opt = [&](CLI::App* s) { s->add_option("--trials", c.trials, "Monte-Carlo trials"); };

  auto* aff = app.add_subcommand("affinity", "Affinity and distance of two subspaces");
  aff->add_option("--x1", c.x1, "First subspace file (CSV or JSON)");
  aff->add_option("--x2", c.x2, "Second subspace file (CSV or JSON)");
  aff->add_option("-N,--ambient-dim", c.N, "Ambient dimension for a generated pair");
  aff->add_option("--lambdas", c.lambdas, "Principal cosines of a generated pair")->delimiter(',');
  aff->add_option("--d2-extra", c.d2_extra, "Extra dimensions of the second generated subspace");

  auto* gen = app.add_subcommand("gen", "Generate an operator, spec, subspace or dataset");
  gen->add_option("--kind", c.kind, "operator | spec | subspace | dataset");
  ensemble_opts(gen);
  subspace_opts(gen);
  gen->add_option("--points-per", c.points_per, "Points per subspace (dataset)");
  gen->add_option("--noise", c.noise, "Ambient noise level (dataset)");

  auto* project = app.add_subcommand("project", "Project a dataset");
  project->add_option("--input", c.input, "Dataset CSV")->required();
  ensemble_opts(project);

  auto* verify = app.add_subcommand("verify", "Discrepancy and affinity-bound sweep");
  ensemble_opts(verify);
  subspace_opts(verify);
  trials_opt(verify);

  auto* line_bound = app.add_subcommand("line-bound", "One-dimensional affinity-bound sweep");
  ensemble_opts(line_bound);
  line_bound->add_option("--dim", c.d, "Dimension of the fixed subspace");
  trials_opt(line_bound);

  auto* jl = app.add_subcommand("jl-tail", "Norm-distortion exceedance curve");
  ensemble_opts(jl);
  jl->add_option("--eps", c.eps, "Distortion levels")->delimiter(',');
  trials_opt(jl);

  auto* cluster = app.add_subcommand("cluster", "Subspace clustering, ambient or projected");
  ensemble_opts(cluster);
  subspace_opts(cluster);
  trials_opt(cluster);
  cluster->add_option("--input", c.input, "Dataset CSV (default: synthetic data)");
  cluster->add_option("--points-per", c.points_per, "Points per subspace");
  cluster->add_option("--noise", c.noise, "Ambient noise level");
  cluster->add_option("--neighbors", c.q, "Neighbours per point (default max(3, d+1))");

  auto* detect = app.add_subcommand("detect", "Compressed subspace detection");
  ensemble_opts(detect);
  subspace_opts(detect);
  trials_opt(detect);
  detect->add_option("--draws", c.draws, "Noiseless test draws per trial");

  auto* bench = app.add_subcommand("bench", "Projection timing per family");
  bench->add_option("-N,--ambient-dim", c.N, "Ambient dimension N");
  bench->add_option("--ns", c.ns, "Target dimensions")->delimiter(',');
  bench->add_option("--families", c.families, "Families (default: all random)")->delimiter(',');
  bench->add_option("--vectors", c.vectors, "Vectors per repeat");
  bench->add_option("--repeats", c.repeats, "Timed repeats");
  bench->add_option("--nu", c.nu, "Student-t degrees of freedom");

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  std::vector<std::string> args(argv.begin() + (argv.empty() ? 0 : 1), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  for (auto* s : app.get_subcommands())
    if (s->parsed()) c.command = s->get_name();

  try {
    if (seed_opt->count() == 0) {
      if (const char* env = std::getenv("SRIP_SEED")) {
        try {
          std::size_t used = 0;
          c.seed = std::stoull(env, &used, 0);
          require(used == std::string(env).size(), ErrorKind::parse_error, "");
        } catch (const std::exception&) {
          fail(ErrorKind::parse_error, std::string("SRIP_SEED is not an integer: '") + env + "'");
        }
      }
    }
    if (!config_path.empty()) {
      io::Json j;
      try {
        j = io::Json::parse(io::read_file(config_path));
      } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::parse_error, std::string("--config: ") + e.what());
      }
      detail::apply_config(c, j);
    }
    require(c.format == "csv" || c.format == "json", ErrorKind::bad_parameters, "format must be csv or json");
    require(c.threads >= 1, ErrorKind::bad_parameters, "threads must be >= 1");

    if (c.command == "affinity") return cmd_affinity(c, out, err);
    if (c.command == "gen") return cmd_gen(c, out, err);
    if (c.command == "project") return cmd_project(c, out, err);
    if (c.command == "verify") return cmd_verify(c, out, err);
    if (c.command == "line-bound") return cmd_line_bound(c, out, err);
    if (c.command == "jl-tail") return cmd_jl_tail(c, out, err);
    if (c.command == "cluster") return cmd_cluster(c, out, err);
    if (c.command == "detect") return cmd_detect(c, out, err);
    if (c.command == "bench") return cmd_bench(c, out, err);
    fail(ErrorKind::bad_parameters, "unknown command");
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  }
}

}  // namespace srip::cli
