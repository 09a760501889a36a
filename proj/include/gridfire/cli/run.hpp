#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridfire/cable/dynamics.hpp"
#include "gridfire/dataset/generate.hpp"
#include "gridfire/grid/case.hpp"
#include "gridfire/risk/clash.hpp"
#include "gridfire/risk/network.hpp"
#include "gridfire/surrogate/pipeline.hpp"
#include "gridfire/wrap/mps.hpp"
#include "gridfire/wrap/plan.hpp"

namespace gridfire::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kSolverError = 3 };

namespace detail {

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  if (text::trim(s).empty()) return out;
  for (auto f : text::split(s, ',')) {
    try {
      out.push_back(text::parse_double(f, 0));
    } catch (const ParseError&) {
      throw InvalidArgument(std::string("bad value in ") + what + ": '" + std::string(f) + "'");
    }
  }
  return out;
}

// Expands a JSON object of flag values into argument tokens. Arrays become
// comma-separated lists, booleans bare flags.
inline std::vector<std::string> config_tokens(const std::string& path) {
  const nlohmann::json doc = grid::read_json_file(path);
  if (!doc.is_object()) throw InvalidArgument("config file must hold a JSON object");
  std::vector<std::string> out;
  for (const auto& [key, value] : doc.items()) {
    if (key == "config") throw InvalidArgument("config files cannot nest --config");
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back("--" + key);
      continue;
    }
    out.push_back("--" + key);
    if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ",";
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      out.push_back(joined);
    } else if (value.is_string()) {
      out.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      out.push_back(value.dump());
    } else {
      throw InvalidArgument("config value for '" + key + "' must be a string, number, boolean or array");
    }
  }
  return out;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

inline void write_text(const std::string& path, const std::string& content) {
  auto out = open_out(path);
  out << content;
  if (!out) throw Error("write to '" + path + "' failed");
}

struct SimFlags {
  double step = 0.01;
  double horizon = 60.0;
  std::size_t segments = 20;
  double gust_length = 3000.0;
  double damping = 0.02;
  double reference_tension = 175e3;

  void add(CLI::App* app) {
    app->add_option("--step", step, "RK4 step (s)");
    app->add_option("--horizon", horizon, "Simulated window (s)");
    app->add_option("--segments", segments, "Segments per span");
    app->add_option("--gust-length", gust_length, "Gust build-up length (m)");
    app->add_option("--damping", damping, "Modal damping ratio");
    app->add_option("--reference-tension", reference_tension, "Tension of a 300 ft span (N)");
  }
  risk::SimConfig config() const {
    risk::SimConfig c;
    c.integration.step = step;
    c.integration.horizon = horizon;
    c.segments = segments;
    c.gust_length = gust_length;
    c.conductor.damping_ratio = damping;
    c.conductor.reference_tension = reference_tension;
    cable::validate(c.integration);
    if (segments < 2) throw InvalidArgument("--segments must be >= 2");
    if (!(gust_length > 0)) throw InvalidArgument("--gust-length must be > 0");
    return c;
  }
};

struct RequestFlags {
  double span_ft = 0, diameter_mm = 0, wind = 0, gust = 0, clearance_ft = 0, direction = 90;
  void add(CLI::App* app, bool required) {
    auto req = [&](CLI::Option* o) { return required ? o->required() : o; };
    req(app->add_option("--span-ft", span_ft, "Span length (ft)"));
    req(app->add_option("--diameter-mm", diameter_mm, "Conductor diameter (mm)"));
    req(app->add_option("--wind", wind, "Sustained wind speed (m/s)"));
    req(app->add_option("--gust", gust, "Gust amplitude (m/s)"));
    req(app->add_option("--clearance-ft", clearance_ft, "Phase clearance (ft)"));
    app->add_option("--direction", direction, "Wind direction relative to the conductor axis (deg)");
  }
  risk::ScoreRequest request() const {
    return risk::ScoreRequest::from_field_units(span_ft, diameter_mm, wind, gust, clearance_ft, direction);
  }
};

struct CaseFlags {
  std::string case_path, weather_path, model_path, risk_path;
  std::optional<double> alpha, shed_penalty;
  std::size_t node_limit = 200000;

  void add(CLI::App* app, bool planning) {
    app->add_option("--case", case_path, "Network case JSON")->required();
    app->add_option("--weather", weather_path, "Weather CSV (station_id,hour,speed_mps,gust_mps,direction_deg)");
    app->add_option("--model", model_path, "Trained surrogate; the simulator scores lines when omitted");
    if (planning) {
      app->add_option("--risk", risk_path, "Precomputed risk CSV (line_id,hour,score)");
      app->add_option("--alpha", alpha, "Served-load floor in [0, 1]");
      app->add_option("--shed-penalty", shed_penalty, "Unserved-energy penalty ($/MWh)");
      app->add_option("--node-limit", node_limit, "Branch-and-bound node limit per hour");
    }
  }

  grid::NetworkCase load() const {
    grid::NetworkCase c = grid::load_case(case_path);
    if (!weather_path.empty()) grid::attach_weather(c, grid::load_weather_csv(weather_path));
    if (alpha) c.config.alpha = *alpha;
    if (shed_penalty) c.config.shed_penalty = *shed_penalty;
    grid::validate(c, true);
    return c;
  }

  risk::RiskMatrix risk(const grid::NetworkCase& c, const risk::SimConfig& sim, std::size_t threads) const {
    if (!risk_path.empty()) return risk::load_risk_csv(c, risk_path);
    risk::RiskSource src;
    src.sim = sim;
    src.threads = threads;
    if (!model_path.empty())
      src.model = std::make_shared<const surrogate::SurrogateModel>(surrogate::load_model(model_path));
    return risk::score_network(c, src);
  }

  wrap::PlanOptions plan_options(std::size_t threads) const {
    wrap::PlanOptions o;
    o.milp.node_limit = node_limit;
    o.threads = threads;
    return o;
  }
};

inline std::string plan_summary(const wrap::PlanSolution& s) {
  std::ostringstream o;
  o << "planner " << s.planner << "  alpha " << text::shortest(s.alpha) << "\n"
    << "total_risk " << text::fixed(s.total_risk, 6) << "\n"
    << "served_mwh " << text::fixed(s.served_mwh, 3) << "\n"
    << "shed_percent " << text::fixed(s.shed_percent, 3) << "\n"
    << "objective " << text::fixed(s.objective, 2) << "  (risk " << text::fixed(s.cost.risk_cost, 2) << ", shed "
    << text::fixed(s.cost.shed_cost, 2) << ", generation " << text::fixed(s.cost.gen_cost, 2) << ")\n"
    << "nodes " << s.stats.nodes << "  lp_iterations " << s.stats.lp_iterations
    << (s.stats.limit_hit ? "  NODE LIMIT HIT" : "") << "\n";
  return o.str();
}

inline std::string metrics_table(const surrogate::TrainReport& rep) {
  std::ostringstream o;
  auto opt = [](const std::optional<double>& v) { return v ? text::fixed(*v, 6) : std::string("n/a"); };
  o << "model " << rep.model.kind() << "  train_rows " << rep.train_rows << "  test_rows " << rep.test_rows << "\n";
  o << "MAE                    " << text::fixed(rep.test.mae, 6) << "\n";
  o << "RMSE                   " << text::fixed(rep.test.rmse, 6) << "\n";
  o << "Relative MAE           " << opt(rep.test.relative_mae) << "\n";
  o << "Relative RMSE (mean)   " << opt(rep.test.relative_rmse_mean) << "\n";
  o << "Relative RMSE (maxmin) " << opt(rep.test.relative_rmse_maxmin) << "\n";
  for (std::size_t k = 0; k < rep.folds.size(); ++k)
    o << "fold " << k + 1 << " MAE " << text::fixed(rep.folds[k].mae, 6) << "\n";
  if (rep.importance) {
    o << "MDI importance:\n";
    for (std::size_t f : rep.importance->ranking())
      o << "  " << dataset::kFeatureLabels[f] << "  " << text::fixed(100.0 * rep.importance->share[f], 2) << "%\n";
  }
  return o.str();
}

}  // namespace detail

// Runs one command line. Output goes to `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace detail;
  CLI::App app{"gridfire: conductor-clash wildfire risk scoring and switching plans"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string config_path;
  auto* seed_opt = app.add_option("--seed", seed, "Seed for every random choice (env GRIDFIRE_SEED)");
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--config", config_path, "JSON file supplying any flag");

  SimFlags sim;
  RequestFlags req;

  auto* simulate = app.add_subcommand("simulate", "Integrate one span and write t,q_nu,q_omega");
  std::string sim_out;
  req.add(simulate, true);
  sim.add(simulate);
  simulate->add_option("--out", sim_out, "CSV path (stdout when omitted)");

  auto* score = app.add_subcommand("score", "Clash score of one span, or of every line-hour of a case");
  RequestFlags score_req;
  CaseFlags score_case;
  std::string score_out;
  score_req.add(score, false);
  sim.add(score);
  score->add_option("--case", score_case.case_path, "Network case JSON (scores every line-hour)");
  score->add_option("--weather", score_case.weather_path, "Weather CSV");
  score->add_option("--model", score_case.model_path, "Trained surrogate (simulator when omitted)");
  score->add_option("--out", score_out, "Risk CSV path for --case (stdout when omitted)");

  auto* gen = app.add_subcommand("gen-dataset", "Score the feature grid into a training CSV");
  std::string gen_out, g_spans, g_diams, g_winds, g_gusts, g_clears, g_dirs;
  gen->add_option("--out", gen_out, "Dataset CSV path")->required();
  gen->add_option("--spans", g_spans, "Span values (ft), comma separated");
  gen->add_option("--diameters", g_diams, "Diameter values (mm)");
  gen->add_option("--winds", g_winds, "Wind speeds (m/s)");
  gen->add_option("--gusts", g_gusts, "Gust amplitudes (m/s)");
  gen->add_option("--clearances", g_clears, "Phase clearances (ft)");
  gen->add_option("--directions", g_dirs, "Directions (deg)");
  sim.add(gen);

  auto* train = app.add_subcommand("train", "Fit a surrogate on a dataset CSV");
  std::string train_data, train_out, train_metrics, train_kind = "ensemble";
  surrogate::TrainConfig tcfg;
  train->add_option("--data", train_data, "Dataset CSV")->required();
  train->add_option("--out", train_out, "Model file")->required();
  train->add_option("--metrics", train_metrics, "Metrics JSON path");
  train->add_option("--model-kind", train_kind, "ensemble, mlr or lasso");
  train->add_option("--trees", tcfg.ensemble.n_trees, "Ensemble size");
  train->add_option("--max-depth", tcfg.ensemble.tree.max_depth, "Tree depth limit");
  train->add_option("--min-leaf", tcfg.ensemble.tree.min_samples_leaf, "Minimum (weighted) rows per leaf");
  train->add_option("--features-per-split", tcfg.ensemble.tree.features_per_split, "Features tried per node");
  train->add_option("--lambda", tcfg.lasso_penalty, "LASSO penalty");
  train->add_option("--test-fraction", tcfg.split.test_fraction, "Held-out fraction");
  train->add_option("--folds", tcfg.split.folds, "Cross-validation folds");
  train->add_flag("--cv", tcfg.cross_validate, "Report k-fold validation metrics");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved surrogate on a dataset CSV");
  std::string eval_data, eval_model, eval_metrics;
  bool eval_test_only = false;
  double eval_fraction = 0.2;
  eval->add_option("--data", eval_data, "Dataset CSV")->required();
  eval->add_option("--model", eval_model, "Model file")->required();
  eval->add_option("--metrics", eval_metrics, "Metrics JSON path");
  eval->add_flag("--test-only", eval_test_only, "Only the held-out rows of the seeded split");
  eval->add_option("--test-fraction", eval_fraction, "Held-out fraction for --test-only");

  auto* plan = app.add_subcommand("plan", "Solve the switching plan of a case");
  CaseFlags plan_case;
  std::string plan_dir;
  plan_case.add(plan, true);
  sim.add(plan);
  plan->add_option("--out", plan_dir, "Output directory (plan.json, gantt.csv, risk.csv)")->required();

  auto* compare = app.add_subcommand("compare", "WRAP against naive PSPS and the regional comparator");
  CaseFlags cmp_case;
  std::string cmp_dir, cmp_weights;
  cmp_case.add(compare, true);
  sim.add(compare);
  compare->add_option("--weights", cmp_weights, "Regional weights to tune over");
  compare->add_option("--out", cmp_dir, "Output directory")->required();

  auto* sweep = app.add_subcommand("sweep-alpha", "Shed/risk trade-off across served-load floors");
  CaseFlags sweep_case;
  std::string sweep_out, sweep_alphas;
  sweep_case.add(sweep, true);
  sim.add(sweep);
  sweep->add_option("--alphas", sweep_alphas, "Alpha values");
  sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

  auto* mps = app.add_subcommand("export-mps", "Write the switching MILP in fixed MPS format");
  CaseFlags mps_case;
  std::string mps_out;
  mps_case.add(mps, true);
  sim.add(mps);
  mps->add_option("--out", mps_out, "MPS path")->required();

  try {
    // Config values go first so explicit flags (parsed later) win.
    for (std::size_t i = 0; i + 1 < args.size(); ++i)
      if (args[i] == "--config" || args[i].rfind("--config=", 0) == 0) {
        const std::string path = args[i] == "--config" ? args[i + 1] : args[i].substr(9);
        auto tokens = config_tokens(path);
        std::size_t sub = 0;
        auto is_subcommand = [&](const std::string& name) {
          for (const auto* s : app.get_subcommands([](CLI::App*) { return true; }))
            if (s->get_name() == name) return true;
          return false;
        };
        while (sub < args.size() && !is_subcommand(args[sub])) ++sub;
        if (sub == args.size()) break;
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub + 1), tokens.begin(), tokens.end());
        break;
      }
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (seed_opt->count() == 0)
    if (const char* env = std::getenv("GRIDFIRE_SEED")) {
      try {
        seed = std::stoull(env);
      } catch (const std::exception&) {
        err << "error: GRIDFIRE_SEED must be a non-negative integer\n";
        return kUsage;
      }
    }

  try {
    if (*simulate) {
      const risk::SimConfig cfg = sim.config();
      const risk::ScoreRequest r = req.request();
      risk::validate(r);
      const auto spec = risk::conductor_for(r, cfg.conductor);
      const auto wind = risk::wind_for(r, cfg);
      const auto coeffs = cable::derive_coefficients(spec);
      std::ofstream file;
      std::ostream* dst = &out;
      if (!sim_out.empty()) {
        file = open_out(sim_out);
        dst = &file;
      }
      *dst << "t,q_nu,q_omega\n";
      cable::integrate_rk4_visit(spec, wind, coeffs, cable::ModalState{}, cfg.integration,
                                 [&](const cable::ModalState& s) {
                                   *dst << text::shortest(s.time) << ',' << text::shortest(s.in_plane) << ','
                                        << text::shortest(s.out_plane) << '\n';
                                 });
      return kOk;
    }
    if (*score) {
      const risk::SimConfig cfg = sim.config();
      if (!score_case.case_path.empty()) {
        const auto c = score_case.load();
        const auto m = score_case.risk(c, cfg, threads);
        if (score_out.empty()) risk::write_risk_csv(m, out);
        else risk::save_risk_csv(m, score_out);
        return kOk;
      }
      for (const char* flag : {"--span-ft", "--diameter-mm", "--wind", "--gust", "--clearance-ft"})
        if (score->count(flag) == 0) throw InvalidArgument(std::string("score needs ") + flag + " (or --case)");
      const risk::ScoreRequest r = score_req.request();
      double v;
      if (!score_case.model_path.empty()) {
        const auto model = surrogate::load_model(score_case.model_path);
        risk::validate(r);
        v = model.predict_field_units(risk::field_features(r));
      } else {
        v = risk::score_line(r, cfg).value;
      }
      out << text::fixed(v, 6) << "\n";
      return kOk;
    }
    if (*gen) {
      dataset::FeatureGrid grid = dataset::default_grid();
      const std::string* lists[] = {&g_spans, &g_diams, &g_winds, &g_gusts, &g_clears, &g_dirs};
      for (std::size_t j = 0; j < dataset::kFeatureCount; ++j)
        if (!lists[j]->empty()) grid.axes[j] = parse_list(*lists[j], dataset::kFeatureNames[j]);
      dataset::GenerateOptions opt;
      opt.sim = sim.config();
      opt.threads = threads;
      const auto ds = dataset::generate(grid, opt);
      dataset::save_csv(ds, gen_out);
      out << "rows " << ds.size() << "\n";
      return kOk;
    }
    if (*train) {
      tcfg.kind = surrogate::parse_model_kind(train_kind);
      tcfg.seed = seed;
      tcfg.split.seed = seed;
      tcfg.ensemble.threads = threads;
      const auto rep = surrogate::train_surrogate(dataset::load_csv(train_data), tcfg);
      surrogate::save_model(rep.model, train_out);
      if (!train_metrics.empty()) write_text(train_metrics, to_json(rep).dump(2) + "\n");
      out << metrics_table(rep);
      return kOk;
    }
    if (*eval) {
      const auto model = surrogate::load_model(eval_model);
      dataset::Dataset ds = dataset::load_csv(eval_data);
      if (eval_test_only) {
        dataset::SplitSpec spec;
        spec.test_fraction = eval_fraction;
        spec.seed = seed;
        ds = ds.subset(dataset::split(ds, spec).test);
      }
      surrogate::TrainReport rep;
      rep.model = model;
      rep.test = surrogate::evaluate(model, ds);
      rep.test_rows = ds.size();
      if (const auto* ens = std::get_if<surrogate::Ensemble>(&model.body)) rep.importance = surrogate::mdi_importance(*ens);
      if (!eval_metrics.empty()) write_text(eval_metrics, to_json(rep).dump(2) + "\n");
      out << metrics_table(rep);
      return kOk;
    }
    if (*plan) {
      const auto c = plan_case.load();
      const auto psi = plan_case.risk(c, sim.config(), threads);
      const auto s = wrap::plan_wrap(c, psi, plan_case.plan_options(threads));
      std::filesystem::create_directories(plan_dir);
      write_text(plan_dir + "/plan.json", to_json(s).dump(2) + "\n");
      auto g = open_out(plan_dir + "/gantt.csv");
      wrap::write_gantt_csv(s, psi, g);
      risk::save_risk_csv(psi, plan_dir + "/risk.csv");
      out << plan_summary(s);
      return s.stats.limit_hit ? kSolverError : kOk;
    }
    if (*compare) {
      const auto c = cmp_case.load();
      const auto psi = cmp_case.risk(c, sim.config(), threads);
      auto weights = cmp_weights.empty() ? wrap::default_tuning_weights() : parse_list(cmp_weights, "--weights");
      const auto cmp = wrap::compare_planners(c, psi, weights, cmp_case.plan_options(threads));
      std::filesystem::create_directories(cmp_dir);
      std::ostringstream table;
      wrap::write_comparison_table(cmp, table);
      write_text(cmp_dir + "/comparison.txt", table.str());
      write_text(cmp_dir + "/comparison.json", to_json(cmp).dump(2) + "\n");
      auto tf = open_out(cmp_dir + "/tuning.csv");
      wrap::write_tuning_csv(cmp.tuning, tf);
      out << table.str();
      const bool limit = cmp.wrap.stats.limit_hit || cmp.naive.stats.limit_hit || cmp.relative.stats.limit_hit;
      return limit ? kSolverError : kOk;
    }
    if (*sweep) {
      const auto c = sweep_case.load();
      const auto psi = sweep_case.risk(c, sim.config(), threads);
      const auto alphas = sweep_alphas.empty() ? wrap::default_alphas() : parse_list(sweep_alphas, "--alphas");
      const auto pts = wrap::alpha_sweep(c, psi, alphas, sweep_case.plan_options(threads));
      if (sweep_out.empty()) wrap::write_sweep_csv(pts, out);
      else {
        auto f = open_out(sweep_out);
        wrap::write_sweep_csv(pts, f);
      }
      return kOk;
    }
    if (*mps) {
      const auto c = mps_case.load();
      const auto psi = mps_case.risk(c, sim.config(), threads);
      const auto p = wrap::build_problem(c, psi);
      wrap::save_mps(p.program, mps_out);
      out << "columns " << p.program.num_vars() << "  rows " << p.program.num_rows() << "  binaries "
          << p.num_binaries() << "\n";
      return kOk;
    }
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kSolverError;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const SchemaError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ValidationError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const MissingWeather& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ModelFormatError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const DegenerateFeature& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const ScoreUnavailable& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const InvalidArgument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace gridfire::cli
