#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "reflekt/reflekt.hpp"

namespace {

using namespace reflekt;

constexpr int kExitOk = 0;
constexpr int kExitCounterexample = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t seed = 0;
  double zero_tol = tol::kZero;
  std::string output;
  int verbosity = 0;
};

RunConfig config;

void log(const std::string& message) {
  if (config.verbosity > 0) std::cerr << "reflekt: " << message << '\n';
}

void emit(const std::string& text) {
  if (config.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw IoError("cannot open output file '" + config.output + "'");
  out << text;
  if (!out) throw IoError("failed writing '" + config.output + "'");
}

void emit(const Json& doc) { emit(doc.dump() + "\n"); }

std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("REFLEKT_SEED");
  if (env == nullptr || *env == '\0') return flag;
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(env, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != std::string(env).size()) throw PreconditionError(std::string("REFLEKT_SEED is not an integer: ") + env);
  return static_cast<std::uint64_t>(v);
}

/// Accepts `[1,2,3]` or `{"v": [1,2,3]}` inline, or a file holding either.
Vec read_vector(const std::string& inline_text, const std::string& path, const char* what) {
  if (inline_text.empty() == path.empty()) {
    throw PreconditionError(std::string("give exactly one of --") + what + " or --input");
  }
  Json doc;
  if (!path.empty()) {
    doc = read_json_file(path);
  } else {
    try {
      doc = Json::parse(inline_text);
    } catch (const Json::exception& e) {
      throw PreconditionError(std::string("invalid JSON for --") + what + ": " + e.what());
    }
  }
  if (doc.is_object()) {
    if (!doc.contains("v")) throw PreconditionError("vector document needs a \"v\" field");
    return vec_from_json(doc.at("v"));
  }
  return vec_from_json(doc);
}

std::vector<Vec> read_points(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::exception& e) {
    throw PreconditionError(std::string("invalid JSON point list: ") + e.what());
  }
  if (!doc.is_array() || doc.empty()) throw PreconditionError("expected a nonempty JSON array of vectors");
  std::vector<Vec> out;
  for (const auto& p : doc) out.push_back(vec_from_json(p));
  return out;
}

std::shared_ptr<const FiniteGroup> load_group(const std::string& spec_text) {
  const GroupSpec spec = parse_group_spec(spec_text);
  auto g = std::make_shared<const FiniteGroup>(enumerate_group(build_root_system(spec)));
  log("group " + spec.str() + " of order " + std::to_string(g->order()));
  return g;
}

/// Shortest decimal text that reads back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json counterexample_json(const Counterexample& c) {
  return Json{{"check", c.check}, {"x", to_json(c.x)}, {"y", to_json(c.y)},
              {"lhs", c.lhs},     {"rhs", c.rhs},      {"detail", c.detail}};
}

Json projection_json(const ProjectionSet& p) {
  Json out;
  out["projections"] = to_json(p.points);
  out["distance"] = p.distance;
  out["chamber_projections"] = to_json(p.chamber_projections);
  out["stabilizer_order"] = p.stabilizer_order;
  return out;
}

// ---------------------------------------------------------------------------

void add_group_commands(CLI::App& app) {
  auto* group = app.add_subcommand("group", "Enumerate a reflection group, orbits and stabilizers");
  group->require_subcommand(1);

  static std::string spec, vec, points, input;
  static std::string format = "json";

  auto* enumerate = group->add_subcommand("enumerate", "Print the root system and all group elements");
  enumerate->add_option("--group", spec, "A:n | B:n | D:n | I2:m | custom:path.json")->required();
  enumerate->callback([] {
    const auto g = load_group(spec);
    Json doc = group_to_json(*g);
    doc["order"] = g->order();
    emit(doc);
  });

  auto* orbit_cmd = group->add_subcommand("orbit", "Orbit of one or more points");
  orbit_cmd->add_option("--group", spec)->required();
  orbit_cmd->add_option("--vec", vec, "generator as [..] or {\"v\": [..]}");
  orbit_cmd->add_option("--points", points, "several generators as [[..], [..]]");
  orbit_cmd->add_option("--input", input, "file holding one vector document");
  orbit_cmd->add_option("--format", format, "json or csv (csv needs n = 2)")->check(CLI::IsMember({"json", "csv"}));
  orbit_cmd->callback([] {
    const auto g = load_group(spec);
    std::vector<Vec> generators;
    if (!points.empty()) {
      if (!vec.empty() || !input.empty()) throw PreconditionError("give only one of --vec, --points or --input");
      generators = read_points(points);
    } else {
      generators.push_back(read_vector(vec, input, "vec"));
    }
    if (format == "csv") {
      if (g->dimension() != 2) throw PreconditionError("csv orbit output needs a planar group");
      std::string out = "x,y,orbit_index\n";
      for (std::size_t i = 0; i < generators.size(); ++i) {
        for (const auto& p : orbit(*g, generators[i])) {
          out += shortest(p[0]) + ',' + shortest(p[1]) + ',' + std::to_string(i) + '\n';
        }
      }
      emit(out);
      return;
    }
    Json orbits = Json::array();
    for (const auto& x : generators) {
      const auto pts = orbit(*g, x);
      orbits.push_back(Json{{"generator", to_json(x)}, {"size", pts.size()}, {"points", to_json(pts)}});
    }
    emit(Json{{"orbits", orbits}});
  });

  auto* stab = group->add_subcommand("stabilizer", "Stabilizer subgroup of a point");
  stab->add_option("--group", spec)->required();
  stab->add_option("--vec", vec);
  stab->add_option("--input", input);
  stab->callback([] {
    const auto g = load_group(spec);
    const Vec x = read_vector(vec, input, "vec");
    const auto s = stabilizer(*g, x, config.zero_tol);
    Json roots = Json::array();
    for (auto i : s.root_subset) roots.push_back(to_json(g->root_system().positive_roots()[i]));
    Json elements = Json::array();
    for (const auto& e : s.elements) elements.push_back(to_json(e.matrix()));
    emit(Json{{"v", to_json(x)},
              {"order", s.order()},
              {"root_subset", s.root_subset},
              {"roots", roots},
              {"orbit_size", g->order() / s.order()},
              {"elements", elements}});
  });
}

void add_chamber_commands(CLI::App& app) {
  auto* chamber = app.add_subcommand("chamber", "Fundamental chamber and group majorization");
  chamber->require_subcommand(1);

  static std::string spec, vec, input, x_text, y_text;

  auto* rep = chamber->add_subcommand("rep", "Canonical chamber representative and the word reaching it");
  rep->add_option("--group", spec)->required();
  rep->add_option("--vec", vec);
  rep->add_option("--input", input);
  rep->callback([] {
    const auto rs = build_root_system(parse_group_spec(spec));
    const auto dec = canonical_representative(rs, read_vector(vec, input, "vec"));
    emit(Json{{"rep", to_json(dec.representative)}, {"word", dec.word()}});
  });

  auto* member = chamber->add_subcommand("member", "Closed fundamental chamber membership");
  member->add_option("--group", spec)->required();
  member->add_option("--vec", vec);
  member->add_option("--input", input);
  member->callback([] {
    const auto rs = build_root_system(parse_group_spec(spec));
    const Vec x = read_vector(vec, input, "vec");
    emit(Json{{"v", to_json(x)}, {"member", in_chamber(rs, x)}});
  });

  auto* maj = chamber->add_subcommand("majorizes", "Whether y lies in the convex hull of the orbit of x");
  maj->add_option("--group", spec)->required();
  maj->add_option("--x", x_text, "dominating vector")->required();
  maj->add_option("--y", y_text, "dominated vector")->required();
  maj->callback([] {
    const auto g = load_group(spec);
    const auto verdict = group_majorizes(*g, read_vector(x_text, "", "x"), read_vector(y_text, "", "y"));
    Json doc{{"x", to_json(verdict.dominant)}, {"y", to_json(verdict.dominated)}, {"majorizes", verdict.holds}};
    if (verdict.holds) {
      doc["orbit_points"] = to_json(verdict.orbit_points);
      doc["weights"] = to_json(verdict.weights);
    }
    emit(doc);
  });
}

void add_project_commands(CLI::App& app) {
  auto* project = app.add_subcommand("project", "Projections onto invariant and sparsity sets");
  project->require_subcommand(1);

  static std::string vec, input, spec, set = "ball", generators;
  static std::size_t s = 0;
  static std::optional<double> ball, box;
  static double radius = 1.0;

  auto* sparse = project->add_subcommand("sparse", "Projection onto {|x|_0 <= s} (intersected with a ball or box)");
  sparse->add_option("--s", s, "sparsity level")->required();
  sparse->add_option("--vec", vec);
  sparse->add_option("--input", input);
  auto* ball_opt = sparse->add_option("--ball", ball, "radius R of the ball constraint");
  sparse->add_option("--box", box, "half width L of the box constraint")->excludes(ball_opt);
  sparse->callback([] {
    const Vec x = read_vector(vec, input, "vec");
    std::optional<ConvexSet> bound;
    if (ball) bound = ball_set(*ball);
    if (box) bound = box_set(*box);
    emit(projection_json(sparse_project(x, s, bound)));
  });

  auto* inv = project->add_subcommand("invariant", "Projection onto a built-in invariant set via the chamber");
  inv->add_option("--group", spec)->required();
  inv->add_option("--vec", vec);
  inv->add_option("--input", input);
  inv->add_option("--set", set, "ball | sphere | box | orbits | hull | hull-union")
      ->check(CLI::IsMember({"ball", "sphere", "box", "orbits", "hull", "hull-union"}));
  inv->add_option("--radius", radius, "radius (ball, sphere) or half width (box)");
  inv->add_option("--generators", generators, "JSON list of generating points for orbits / hull sets");
  inv->callback([] {
    const auto g = load_group(spec);
    const Vec x = read_vector(vec, input, "vec");
    InvariantSetOracle oracle;
    if (set == "ball") {
      oracle = ball_oracle(g, radius);
    } else if (set == "sphere") {
      oracle = sphere_oracle(g, radius);
    } else if (set == "box") {
      oracle = box_oracle(g, radius);
    } else {
      if (generators.empty()) throw PreconditionError("--set " + set + " needs --generators");
      const auto pts = read_points(generators);
      if (set == "orbits") oracle = finite_orbits_oracle(g, pts);
      if (set == "hull") {
        if (pts.size() != 1) throw PreconditionError("--set hull takes exactly one generator");
        oracle = orbit_hull_oracle(g, pts.front());
      }
      if (set == "hull-union") oracle = hull_union_oracle(g, pts);
    }
    emit(projection_json(project_invariant(oracle, x)));
  });
}

void add_verify_commands(CLI::App& app, int& exit_code) {
  auto* verify = app.add_subcommand("verify", "Randomized verification harnesses");
  verify->require_subcommand(1);

  static std::string spec;
  static std::size_t trials = 100;
  static std::uint64_t seed = 0;

  auto add = [&](const char* name, const char* help,
                 std::function<harness::Report(const harness::GroupPtr&, std::size_t, std::uint64_t)> run) {
    auto* cmd = verify->add_subcommand(name, help);
    cmd->add_option("--group", spec)->required();
    cmd->add_option("--trials", trials, "trials per function or set")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed);
    cmd->callback([run = std::move(run), &exit_code] {
      config.seed = effective_seed(seed);
      const auto g = load_group(spec);
      const auto start = std::chrono::steady_clock::now();
      const harness::Report r = run(g, trials, config.seed);
      log(r.check + " finished in " +
          std::to_string(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");
      Json doc{{"check", r.check}, {"group", spec}, {"seed", config.seed},
               {"trials", r.trials}, {"true_cases", r.true_cases}, {"passed", r.passed()}};
      if (r.counterexample) doc["counterexample"] = counterexample_json(*r.counterexample);
      if (!r.failure.empty()) doc["failure"] = r.failure;
      emit(doc);
      if (!r.passed()) {
        std::cerr << "reflekt: " << r.check << " found a counterexample\n";
        exit_code = kExitCounterexample;
      }
    });
  };
  add("thm31", "Subdifferential characterization for convex invariant functions", [](const harness::GroupPtr& g, std::size_t t, std::uint64_t sd) { return harness::run_thm31(g, t, sd); });
  add("thm52", "Proximal normal cone characterization on orbit hulls and hull unions", harness::run_thm52);
  add("thm54", "Proximal subdifferential characterization through epigraphs (n <= 3)", harness::run_thm54);
  add("schur", "Schur convexity of pseudo-convex invariant functions", harness::run_schur);
  add("propA", "Property A on convex sets, hull unions and finite orbits", harness::run_propA);
}

void add_cs_commands(CLI::App& app) {
  auto* cs = app.add_subcommand("cs", "Compressed sensing by iterative hard thresholding");
  cs->require_subcommand(1);

  static std::size_t n = 64, m = 32, s = 4, max_iter = 1000, trials = 20;
  static std::uint64_t seed = 0;
  static double noise = 0.0;
  static std::optional<double> ball;
  static std::string step = "auto", trace_path;
  static std::vector<std::size_t> m_list, s_list;

  auto* solve = cs->add_subcommand("solve", "Solve one planted instance; JSON solution and trace");
  solve->add_option("--n", n)->required();
  solve->add_option("--m", m)->required();
  solve->add_option("--s", s)->required();
  solve->add_option("--seed", seed);
  solve->add_option("--noise", noise, "standard deviation of additive Gaussian noise");
  solve->add_option("--ball", ball, "radius of an additional ball constraint");
  solve->add_option("--step", step, "auto or a positive number");
  solve->add_option("--max-iter", max_iter);
  solve->add_option("--trace", trace_path, "also write the trace as CSV (k,objective,sparsity,step)");
  solve->callback([] {
    config.seed = effective_seed(seed);
    std::optional<ConvexSet> bound;
    if (ball) bound = ball_set(*ball);
    const auto p = generate_problem(n, m, s, config.seed, noise, bound);
    IhtOptions opts;
    opts.max_iter = max_iter;
    if (step != "auto") {
      try {
        std::size_t used = 0;
        opts.step = std::stod(step, &used);
        if (used != step.size()) throw std::invalid_argument(step);
      } catch (const std::exception&) {
        throw PreconditionError("--step must be 'auto' or a number, got '" + step + "'");
      }
    }
    const auto r = iht_solve(p, opts);
    Json rows = Json::array();
    for (const auto& row : r.trace.iterates) {
      rows.push_back(Json{{"k", row.k}, {"objective", row.objective}, {"sparsity", row.sparsity}, {"step", row.step}});
    }
    emit(Json{{"n", n},
              {"m", m},
              {"s", s},
              {"seed", config.seed},
              {"x", to_json(r.x)},
              {"x_true", to_json(*p.x_true)},
              {"relative_error", relative_error(r.x, *p.x_true)},
              {"noise_norm", p.noise_norm},
              {"status", to_string(r.trace.status)},
              {"iterations", r.trace.iterates.size() - 1},
              {"trace", rows}});
    if (!trace_path.empty()) {
      std::ofstream out(trace_path, std::ios::binary);
      if (!out) throw IoError("cannot open trace file '" + trace_path + "'");
      out << trace_csv(r.trace);
      if (!out) throw IoError("failed writing '" + trace_path + "'");
    }
  });

  auto* sweep = cs->add_subcommand("sweep", "Empirical recovery rate per (m, s) cell as CSV");
  sweep->add_option("--n", n)->required();
  sweep->add_option("--m", m_list, "measurement counts, comma separated")->required()->delimiter(',');
  sweep->add_option("--s", s_list, "sparsity levels, comma separated")->required()->delimiter(',');
  sweep->add_option("--trials", trials);
  sweep->add_option("--seed", seed);
  sweep->add_option("--max-iter", max_iter);
  sweep->callback([] {
    config.seed = effective_seed(seed);
    IhtOptions opts;
    opts.max_iter = max_iter;
    emit(sweep_csv(recovery_sweep(n, m_list, s_list, trials, config.seed, opts)));
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflekt: finite reflection groups, symmetric projections and their verification"};
  app.require_subcommand(1);
  app.add_option("--output,-o", config.output, "write machine output to this file instead of stdout");
  app.add_flag("-v,--verbose", config.verbosity, "diagnostics on stderr (repeatable)");
  app.add_option("--zero-tol", config.zero_tol, "wall detection tolerance for stabilizers")
      ->check(CLI::PositiveNumber);

  int exit_code = kExitOk;
  add_group_commands(app);
  add_chamber_commands(app);
  add_project_commands(app);
  add_verify_commands(app, exit_code);
  add_cs_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const CharacterizationFailure& e) {
    emit(Json{{"passed", false}, {"counterexample", counterexample_json(e.counterexample())}});
    std::cerr << "reflekt: " << e.what() << '\n';
    return kExitCounterexample;
  } catch (const PreconditionError& e) {
    std::cerr << "reflekt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "reflekt: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "reflekt: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "reflekt: " << e.what() << '\n';
    return kExitNumerical;
  }
  return exit_code;
}
