#include "hbo/cli.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <CLI11.hpp>
#include <json.hpp>

#include "hbo/acquisition.hpp"
#include "hbo/baselines.hpp"
#include "hbo/data.hpp"
#include "hbo/error.hpp"
#include "hbo/metrics.hpp"
#include "hbo/prior_io.hpp"
#include "hbo/svg.hpp"
#include "hbo/trace_io.hpp"
#include "text_util.hpp"

namespace hbo::cli {
namespace {

namespace fs = std::filesystem;
namespace pt = boost::property_tree;

[[noreturn]] void config_error(const std::string& what) { fail(ErrorKind::Input, what); }

template <typename T>
T get_value(const pt::ptree& section, const std::string& key, const std::string& where) {
  const auto text = section.get<std::string>(key);
  if constexpr (std::is_same_v<T, std::string>) {
    return text;
  } else if constexpr (std::is_floating_point_v<T>) {
    const auto v = detail::parse_double(text);
    if (!v) config_error(where + ": '" + key + "' is not a number: " + text);
    return *v;
  } else {
    const auto v = detail::parse_int(text);
    if (!v || *v < 0) config_error(where + ": '" + key + "' is not a non-negative integer: " + text);
    return static_cast<T>(*v);
  }
}

void check_positive_counts(const RunConfig& c) {
  if (c.mcmc.H == 0 || c.mcmc.B == 0 || c.bo.M == 0 || c.bo.n_init == 0 || c.bo.n_iter == 0 || c.bo.n_runs == 0 ||
      c.jobs == 0 || c.synth.grid_size == 0 || c.synth.n_snapshots == 0)
    config_error("all counts must be positive");
  if (c.mcmc.H <= c.mcmc.burn_in) config_error("mcmc.H must exceed mcmc.burn_in");
  if (c.bo.n_iter < c.bo.n_init) config_error("bo.n_iter must be at least bo.n_init");
}

void ensure_exists(const fs::path& p, const std::string& what) {
  if (p.empty()) config_error(what + " path is not configured");
  if (!fs::exists(p)) config_error(what + " not found: " + p.string());
}

/// Loads the configured data source and pre-processes it if needed.
Dataset load_configured_dataset(const RunConfig& cfg, const std::optional<fs::path>& bundle_override) {
  Dataset d;
  if (bundle_override || cfg.data.format == "bundle") {
    const auto path = bundle_override ? *bundle_override : cfg.data.bundle;
    ensure_exists(path, "dataset bundle");
    d = load_dataset(path);
  } else if (cfg.data.format == "grid" || cfg.data.format == "station") {
    ensure_exists(cfg.data.tuning, "tuning data");
    if (cfg.data.format == "grid") {
      d.tuning = load_grid_csv(cfg.data.tuning, cfg.data.cell_size_km);
      if (!cfg.data.test.empty()) {
        ensure_exists(cfg.data.test, "test data");
        d.test = load_grid_csv(cfg.data.test, cfg.data.cell_size_km);
      }
    } else {
      const StationFilter filter{cfg.data.min_readings, cfg.data.classification};
      d.tuning = load_station_csv(cfg.data.tuning, filter);
      if (!cfg.data.test.empty()) {
        ensure_exists(cfg.data.test, "test data");
        d.test = load_station_csv(cfg.data.test, filter);
      }
    }
  } else {
    config_error("data.format must be bundle, grid or station (got '" + cfg.data.format + "')");
  }
  if (!d.preprocessed()) preprocess(d);
  return d;
}

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Exceptions are
/// rethrown (the lowest index wins) after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, n));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string to_text(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

/// Writes manifest.csv: method,snapshot_id,run,file
void write_manifest(const fs::path& dir, const std::vector<std::array<std::string, 4>>& rows) {
  std::ostringstream os;
  os << "method,snapshot_id,run,file\n";
  for (const auto& r : rows) os << r[0] << ',' << r[1] << ',' << r[2] << ',' << r[3] << '\n';
  detail::write_file_atomic(dir / "manifest.csv", os.str());
}

std::string safe_file_stem(const std::string& id) {
  std::string out;
  for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '_');
  return out;
}

// ---------------------------------------------------------------- commands

int cmd_train_prior(const RunConfig& cfg, const std::optional<fs::path>& dataset_path, std::ostream& out) {
  const auto dataset = load_configured_dataset(cfg, dataset_path);
  if (dataset.tuning.empty()) config_error("dataset has no tuning snapshots");
  const KernelSpec spec(cfg.kernel);
  const auto tuning = full_observations(dataset.tuning);
  const auto chain = run_chain(spec, tuning, cfg.mcmc);
  auto prior = draw_prior_samples(spec, chain.samples, cfg.mcmc.burn_in, cfg.bo.M, cfg.mcmc.seed);
  prior.provenance.B = cfg.mcmc.B;
  prior.provenance.tuning_hash = tuning_hash(dataset);

  save_prior(cfg.out_dir / "prior.jsonl", prior);
  detail::write_file_atomic(cfg.out_dir / "chain_diagnostics.csv",
                            to_text([&](std::ostream& os) { write_chain_diagnostics(os, chain.diagnostics); }));

  out << "kernel " << spec.name() << ", " << tuning.size() << " tuning snapshots, H=" << cfg.mcmc.H
      << ", burn-in " << cfg.mcmc.burn_in << ", B=" << cfg.mcmc.B << ", seed " << cfg.mcmc.seed << "\n";
  out << std::fixed << std::setprecision(3);
  for (std::size_t k = 0; k < spec.size(); ++k) {
    if (spec.slots()[k].kind == SlotKind::Noise) continue;
    out << "  " << std::left << std::setw(10) << spec.slots()[k].name << std::right
        << " theta acc " << chain.diagnostics.theta[k].rate();
    if (spec.is_gamma_slot(k))
      out << "  shape acc " << chain.diagnostics.eta[k][0].rate() << "  scale acc "
          << chain.diagnostics.eta[k][1].rate();
    out << "\n";
  }
  if (chain.diagnostics.likelihood_failures > 0)
    out << "  likelihood failures: " << chain.diagnostics.likelihood_failures << "\n";
  out << "wrote " << prior.size() << " prior samples to " << (cfg.out_dir / "prior.jsonl").string() << "\n";
  return 0;
}

int cmd_run_bo(const RunConfig& cfg, const fs::path& prior_path, const std::optional<fs::path>& dataset_path,
               std::ostream& out) {
  ensure_exists(prior_path, "prior artifact");
  const auto prior = load_prior(prior_path);
  const KernelSpec spec(cfg.kernel);
  if (!(prior.spec == spec))
    fail(ErrorKind::Spec, "prior was trained for kernel " + std::string(prior.spec.name()) +
                              " but the configuration requests " + std::string(spec.name()));
  const auto dataset = load_configured_dataset(cfg, dataset_path);
  if (dataset.test.empty()) config_error("dataset has no test snapshots");

  const BoConfig bo{cfg.bo.n_init, cfg.bo.n_iter, cfg.bo.seed};
  std::vector<BoTrace> traces(dataset.test.size());
  parallel_for(dataset.test.size(), cfg.jobs, [&](std::size_t i) { traces[i] = run_bo(dataset.test[i], prior, bo); });

  const std::string method = "bo-" + std::string(spec.name());
  std::vector<std::array<std::string, 4>> manifest;
  for (const auto& t : traces) {
    const auto file = "traces/" + safe_file_stem(t.snapshot_id) + ".csv";
    detail::write_file_atomic(cfg.out_dir / file, to_text([&](std::ostream& os) { write_trace_csv(os, t); }));
    manifest.push_back({method, t.snapshot_id, "0", file});
  }
  write_manifest(cfg.out_dir, manifest);
  out << "wrote " << traces.size() << " traces (" << bo.n_iter << " iterations) to " << cfg.out_dir.string() << "\n";
  return 0;
}

int cmd_run_baseline(const RunConfig& cfg, const std::string& kind_name,
                     const std::optional<fs::path>& dataset_path, std::ostream& out) {
  const BaselinePolicy policy{baseline_kind_from_name(kind_name), cfg.bo.n_runs, cfg.bo.seed};
  const auto dataset = load_configured_dataset(cfg, dataset_path);
  if (dataset.test.empty()) config_error("dataset has no test snapshots");

  std::vector<std::vector<BoTrace>> runs(dataset.test.size());
  parallel_for(dataset.test.size(), cfg.jobs,
               [&](std::size_t i) { runs[i] = run_baseline(dataset.test[i], policy, cfg.bo.n_iter); });

  const std::string method = "random-" + std::string(to_string(policy.kind));
  std::vector<std::array<std::string, 4>> manifest;
  for (const auto& per_snapshot : runs) {
    for (std::size_t r = 0; r < per_snapshot.size(); ++r) {
      const auto& t = per_snapshot[r];
      const auto file = "traces/" + safe_file_stem(t.snapshot_id) + "_run" + std::to_string(r) + ".csv";
      detail::write_file_atomic(cfg.out_dir / file, to_text([&](std::ostream& os) { write_trace_csv(os, t); }));
      manifest.push_back({method, t.snapshot_id, std::to_string(r), file});
    }
  }
  write_manifest(cfg.out_dir, manifest);
  out << "wrote " << manifest.size() << " baseline traces to " << cfg.out_dir.string() << "\n";
  return 0;
}

struct MethodTraces {
  std::string method;
  std::vector<BoTrace> traces;
};

std::vector<MethodTraces> read_trace_dir(const fs::path& dir, const Dataset& dataset) {
  const auto manifest_path = dir / "manifest.csv";
  ensure_exists(manifest_path, "trace manifest");
  std::ifstream in(manifest_path);
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::vector<BoTrace>> by_method;
  std::vector<std::string> order;
  std::set<std::string> orphans;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != 4) fail(ErrorKind::Parse, manifest_path.string() + ": malformed row '" + line + "'");
    const Snapshot* s = nullptr;
    for (const auto& t : dataset.test)
      if (t.id == f[1]) s = &t;
    if (!s) {
      orphans.insert(f[1]);
      continue;
    }
    std::ifstream tin(dir / f[3]);
    if (!tin) fail(ErrorKind::Input, "cannot open trace " + (dir / f[3]).string());
    if (!by_method.contains(f[0])) order.push_back(f[0]);
    by_method[f[0]].push_back(read_trace_csv(tin, *s, (dir / f[3]).string()));
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& o : orphans) list += (list.empty() ? "" : ", ") + o;
    fail(ErrorKind::Input, "traces in " + dir.string() + " refer to snapshots missing from the dataset: " + list);
  }
  std::vector<MethodTraces> out;
  for (const auto& m : order) out.push_back({m, std::move(by_method[m])});
  return out;
}

int cmd_evaluate(const RunConfig& cfg, const std::vector<fs::path>& trace_dirs,
                 const std::optional<fs::path>& dataset_path, bool svg, std::ostream& out) {
  if (trace_dirs.empty()) config_error("evaluate needs at least one --traces directory");
  const auto dataset = load_configured_dataset(cfg, dataset_path);
  std::vector<MethodTraces> methods;
  for (const auto& dir : trace_dirs)
    for (auto& m : read_trace_dir(dir, dataset)) methods.push_back(std::move(m));

  struct Curves {
    std::string method;
    MetricCurve ratio, distance, exploration;
  };
  std::vector<Curves> all;
  for (const auto& m : methods) {
    Curves c{m.method, maximum_ratio_curve(m.traces, dataset.test), maximiser_distance_curve(m.traces, dataset.test),
             exploration_curve(m.traces)};
    const auto stem = safe_file_stem(m.method);
    for (const auto& [name, curve] : {std::pair<const char*, const MetricCurve*>{"ratio", &c.ratio},
                                      {"distance", &c.distance},
                                      {"exploration", &c.exploration}}) {
      detail::write_file_atomic(cfg.out_dir / (stem + "_" + name + ".csv"),
                                to_text([&](std::ostream& os) { write_curve_csv(os, *curve); }));
      detail::write_file_atomic(cfg.out_dir / (stem + "_" + name + "_per_snapshot.csv"),
                                to_text([&](std::ostream& os) { write_per_snapshot_csv(os, *curve); }));
    }
    all.push_back(std::move(c));
  }

  // Final-iteration interval table.
  std::ostringstream table;
  table << "method,iteration,snapshots,maximum_ratio,distance_km,flagged\n";
  out << std::left << std::setw(28) << "method" << std::setw(8) << "iter" << std::setw(16) << "ratio"
      << "distance (km)\n";
  for (const auto& c : all) {
    if (c.ratio.size() == 0) continue;
    const std::size_t last = c.ratio.size() - 1;
    std::vector<double> ratios, dists;
    for (const auto& s : c.ratio.per_snapshot) ratios.push_back(s[last]);
    for (const auto& s : c.distance.per_snapshot) dists.push_back(s[last]);
    const auto fmt = [](const std::vector<double>& v, int decimals) {
      if (v.size() < 2) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(decimals) << v.front();
        return os.str();
      }
      return format_interval(summarize_interval(v), decimals);
    };
    const auto r = fmt(ratios, 3);
    const auto d = fmt(dists, 1);
    std::string flagged;
    for (const auto& f : c.ratio.flagged) flagged += (flagged.empty() ? "" : ";") + f;
    table << c.method << ',' << (last + 1) << ',' << c.ratio.n_snapshots << ',' << r << ',' << d << ',' << flagged
          << '\n';
    out << std::setw(28) << c.method << std::setw(8) << (last + 1) << std::setw(16) << r << d << "\n";
  }
  out << std::right;
  detail::write_file_atomic(cfg.out_dir / "summary.csv", table.str());

  if (svg) {
    for (const auto& [name, title, ylabel] :
         {std::tuple<const char*, const char*, const char*>{"ratio", "Maximum ratio", "ratio"},
          {"distance", "Distance to maximiser", "km"},
          {"exploration", "Exploration", "km"}}) {
      std::vector<SvgSeries> series;
      for (const auto& c : all) {
        const MetricCurve& curve = std::string(name) == "ratio"      ? c.ratio
                                   : std::string(name) == "distance" ? c.distance
                                                                     : c.exploration;
        SvgSeries s{c.method, {}, curve.mean, curve.sem};
        for (std::size_t i = 0; i < curve.size(); ++i) s.x.push_back(static_cast<double>(curve.first_iteration + i));
        series.push_back(std::move(s));
      }
      detail::write_file_atomic(cfg.out_dir / (std::string(name) + ".svg"),
                                render_line_chart(title, "iteration", ylabel, series));
    }
  }
  return 0;
}

int cmd_correlation_curve(const RunConfig& cfg, const std::optional<fs::path>& prior_path,
                          const std::optional<std::string>& theta_text, double d_max, std::size_t n_points,
                          std::ostream& out) {
  if (prior_path.has_value() == theta_text.has_value()) config_error("give exactly one of --prior or --theta");
  if (!(d_max > 0.0) || n_points < 2) config_error("--d-max must be positive and --n-points at least 2");
  KernelSpec spec(cfg.kernel);
  std::optional<ThetaVector> theta;
  if (prior_path) {
    ensure_exists(*prior_path, "prior artifact");
    const auto prior = load_prior(*prior_path);
    spec = prior.spec;
    theta = mean_theta(prior);
  } else {
    theta = parse_theta(spec, *theta_text);
  }
  std::ostringstream os;
  os << "d_km,correlation" << (spec.direction_index() ? ",correlation_orthogonal" : "") << "\n";
  for (std::size_t i = 0; i < n_points; ++i) {
    const double d = d_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
    const auto c = correlation_at_distance(spec, *theta, d);
    os << detail::format_double(d) << ',' << detail::format_double(c.along_x);
    if (c.orthogonal) os << ',' << detail::format_double(*c.orthogonal);
    os << '\n';
  }
  detail::write_file_atomic(cfg.out_dir / "correlation.csv", os.str());
  out << "wrote " << n_points << " points to " << (cfg.out_dir / "correlation.csv").string() << "\n";
  return 0;
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  const KernelSpec spec(cfg.kernel);
  const auto theta = parse_theta(spec, cfg.synth.theta);
  SyntheticConfig sc;
  sc.grid_size = cfg.synth.grid_size;
  sc.cell_size_km = cfg.synth.cell_size_km;
  sc.n_snapshots = cfg.synth.n_snapshots;
  sc.seed = cfg.synth.seed;
  sc.log_offset = cfg.synth.log_offset;
  auto snapshots = generate_synthetic(spec, theta, sc);
  const std::size_t n_tuning = cfg.synth.n_tuning == 0 ? snapshots.size() / 2 : cfg.synth.n_tuning;
  if (n_tuning == 0 || n_tuning >= snapshots.size()) config_error("synth.n_tuning must leave both splits non-empty");

  Dataset d;
  for (std::size_t i = 0; i < snapshots.size(); ++i)
    (i < n_tuning ? d.tuning : d.test).push_back(std::move(snapshots[i]));
  nlohmann::json meta{{"generator", "synthetic-gp"},
                      {"kernel", std::string(spec.name())},
                      {"seed", sc.seed},
                      {"grid_size", sc.grid_size},
                      {"cell_size_km", sc.cell_size_km},
                      {"log_offset", sc.log_offset}};
  for (const auto& [name, value] : theta.named()) meta["theta"][name] = value;
  d.metadata_json = meta.dump();
  preprocess(d);
  save_dataset(cfg.out_dir / "dataset.jsonl", d);
  out << "wrote " << d.tuning.size() << " tuning / " << d.test.size() << " test snapshots to "
      << (cfg.out_dir / "dataset.jsonl").string() << "\n";
  return 0;
}

}  // namespace

RunConfig parse_config(std::istream& in, const std::string& source) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_error(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  static const std::map<std::string, std::set<std::string>> kKnown{
      {"kernel", {"family"}},
      {"mcmc",
       {"H", "burn_in", "B", "seed", "width_lengthscale_shape", "width_lengthscale_scale", "width_amplitude_shape",
        "width_amplitude_scale"}},
      {"bo", {"M", "n_init", "n_iter", "seed", "n_runs"}},
      {"data", {"profile", "format", "bundle", "tuning", "test", "cell_size_km", "min_readings", "classification"}},
      {"synth", {"grid_size", "n_snapshots", "n_tuning", "cell_size_km", "log_offset", "seed", "theta"}},
      {"output", {"dir", "jobs"}},
  };
  for (const auto& [section, body] : tree) {
    const auto it = kKnown.find(section);
    if (it == kKnown.end()) config_error(source + ": unknown section [" + section + "]");
    for (const auto& [key, value] : body)
      if (!it->second.contains(key)) config_error(source + ": unknown key '" + key + "' in [" + section + "]");
  }

  RunConfig c;
  auto section = [&](const char* name) -> const pt::ptree* {
    const auto child = tree.get_child_optional(name);
    return child ? &*child : nullptr;
  };
  auto set = [&](const pt::ptree* s, const char* key, auto& target) {
    if (s && s->count(key)) target = get_value<std::decay_t<decltype(target)>>(*s, key, source);
  };

  if (const auto* d = section("data"); d && d->count("profile")) {
    const auto p = d->get<std::string>("profile");
    if (p == "satellite") c.profile = Profile::Satellite;
    else if (p == "station") c.profile = Profile::Station;
    else config_error(source + ": data.profile must be satellite or station");
  }
  if (c.profile == Profile::Station) {
    c.mcmc.H = 2000;
    c.bo.n_init = 5;
    c.data.format = "station";
  } else {
    c.data.format = "bundle";
  }

  if (const auto* k = section("kernel"); k && k->count("family"))
    c.kernel = KernelSpec::from_name(k->get<std::string>("family")).family();

  const auto* m = section("mcmc");
  set(m, "H", c.mcmc.H);
  set(m, "burn_in", c.mcmc.burn_in);
  set(m, "B", c.mcmc.B);
  set(m, "seed", c.mcmc.seed);
  set(m, "width_lengthscale_shape", c.mcmc.widths.lengthscale_shape);
  set(m, "width_lengthscale_scale", c.mcmc.widths.lengthscale_scale);
  set(m, "width_amplitude_shape", c.mcmc.widths.amplitude_shape);
  set(m, "width_amplitude_scale", c.mcmc.widths.amplitude_scale);

  const auto* b = section("bo");
  set(b, "M", c.bo.M);
  set(b, "n_init", c.bo.n_init);
  set(b, "n_iter", c.bo.n_iter);
  set(b, "seed", c.bo.seed);
  set(b, "n_runs", c.bo.n_runs);

  const auto* d = section("data");
  set(d, "format", c.data.format);
  if (d && d->count("bundle")) c.data.bundle = get_value<std::string>(*d, "bundle", source);
  if (d && d->count("tuning")) c.data.tuning = get_value<std::string>(*d, "tuning", source);
  if (d && d->count("test")) c.data.test = get_value<std::string>(*d, "test", source);
  set(d, "cell_size_km", c.data.cell_size_km);
  set(d, "min_readings", c.data.min_readings);
  set(d, "classification", c.data.classification);

  const auto* s = section("synth");
  set(s, "grid_size", c.synth.grid_size);
  set(s, "n_snapshots", c.synth.n_snapshots);
  set(s, "n_tuning", c.synth.n_tuning);
  set(s, "cell_size_km", c.synth.cell_size_km);
  set(s, "log_offset", c.synth.log_offset);
  set(s, "seed", c.synth.seed);
  set(s, "theta", c.synth.theta);

  const auto* o = section("output");
  if (o && o->count("dir")) c.out_dir = get_value<std::string>(*o, "dir", source);
  set(o, "jobs", c.jobs);

  check_positive_counts(c);
  return c;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) config_error("config file not found: " + path.string());
  std::ifstream in(path);
  if (!in) config_error("cannot open config file " + path.string());
  return parse_config(in, path.string());
}

ThetaVector parse_theta(const KernelSpec& spec, const std::string& text) {
  std::map<std::string, double> named;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto trimmed = std::string(detail::trim(item));
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) config_error("theta entry '" + trimmed + "' is not name=value");
    const auto name = std::string(detail::trim(trimmed.substr(0, eq)));
    const auto value = detail::parse_double(trimmed.substr(eq + 1));
    if (!value) config_error("theta entry '" + trimmed + "' has a non-numeric value");
    named[name] = *value;
  }
  return ThetaVector::from_named(spec, named);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hierarchical-prior Bayesian optimisation for sensor placement"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> jobs;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file");
    sub->add_option("--seed", seed, "Seed for this command's randomness");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  std::optional<std::string> dataset, prior, theta, kind_name;
  std::vector<std::string> trace_dirs;
  std::optional<std::size_t> n_runs;
  bool svg = false;
  double d_max = 50.0;
  std::size_t n_points = 101;

  auto* train = app.add_subcommand("train-prior", "Train the hierarchical prior and draw prior samples");
  add_common(train);
  train->add_option("--dataset", dataset, "Dataset bundle (overrides [data])");

  auto* bo = app.add_subcommand("run-bo", "Run importance-weighted EI placement on every test snapshot");
  add_common(bo);
  bo->add_option("--prior", prior, "Prior artifact (prior.jsonl)")->required();
  bo->add_option("--dataset", dataset, "Dataset bundle (overrides [data])");

  auto* base = app.add_subcommand("run-baseline", "Run random placement baselines");
  add_common(base);
  base->add_option("--kind", kind_name, "with-replacement | without-replacement")->required();
  base->add_option("--dataset", dataset, "Dataset bundle (overrides [data])");
  base->add_option("--n-runs", n_runs, "Runs per snapshot (default 100)");

  auto* eval = app.add_subcommand("evaluate", "Compute metric curves and interval tables from traces");
  add_common(eval);
  eval->add_option("--traces", trace_dirs, "Trace directory (repeatable)")->required();
  eval->add_option("--dataset", dataset, "Dataset bundle (overrides [data])");
  eval->add_flag("--svg", svg, "Also write SVG line charts");

  auto* corr = app.add_subcommand("correlation-curve", "Correlation as a function of distance");
  add_common(corr);
  corr->add_option("--prior", prior, "Prior artifact; uses the mean of its samples");
  corr->add_option("--theta", theta, "Explicit theta, e.g. sigma_r1=2.05,l_r1=2,sigma_r2=2.04,l_r2=241");
  corr->add_option("--d-max", d_max, "Largest distance in km");
  corr->add_option("--n-points", n_points, "Number of distances");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset bundle");
  add_common(synth);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (out_dir) cfg.out_dir = *out_dir;
    if (jobs) cfg.jobs = *jobs;
    if (n_runs) cfg.bo.n_runs = *n_runs;
    if (seed) {
      if (train->parsed()) cfg.mcmc.seed = *seed;
      if (synth->parsed()) cfg.synth.seed = *seed;
      if (bo->parsed() || base->parsed()) cfg.bo.seed = *seed;
    }
    check_positive_counts(cfg);
    const auto ds = dataset ? std::optional<fs::path>(*dataset) : std::nullopt;

    if (train->parsed()) return cmd_train_prior(cfg, ds, out);
    if (bo->parsed()) return cmd_run_bo(cfg, *prior, ds, out);
    if (base->parsed()) return cmd_run_baseline(cfg, *kind_name, ds, out);
    if (eval->parsed()) {
      std::vector<fs::path> dirs(trace_dirs.begin(), trace_dirs.end());
      return cmd_evaluate(cfg, dirs, ds, svg, out);
    }
    if (corr->parsed()) {
      const auto p = prior ? std::optional<fs::path>(*prior) : std::nullopt;
      return cmd_correlation_curve(cfg, p, theta, d_max, n_points, out);
    }
    if (synth->parsed()) return cmd_synth(cfg, out);
  } catch (const Error& e) {
    err << to_string(e.kind()) << ": " << e.what() << "\n";
    return e.kind() == ErrorKind::Numerical ? 1 : 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hbo::cli
