// Command line front end: gen, solve-exact, solve-sa, verify, export-gcl, render, experiment.

#include "tsnsynth/annealer.hpp"
#include "tsnsynth/exact.hpp"
#include "tsnsynth/toolkit.hpp"
#include "tsnsynth/verify.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace tsnsynth;

namespace {

struct Common {
  std::uint64_t seed = 1;
  double budget = 10;  // seconds
  std::string config;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "random seed");
  cmd->add_option("--budget", c.budget, "time budget in seconds");
  cmd->add_option("--config", c.config, "JSON config with an \"sa\" section");
}

std::chrono::milliseconds ms(double seconds) { return std::chrono::milliseconds(static_cast<std::int64_t>(seconds * 1000)); }

SystemModel prepared(const std::string& path) {
  SystemModel m = load_model(path);
  auto diags = validate_model(m);
  if (!diags.empty()) throw ModelError(diags.front().code + ": " + diags.front().message);
  if (!prepare_model(m)) throw InfeasibleError("tesla", "", "no key disclosure interval fits the applications");
  return m;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") std::cout << text;
  else write_text(out, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TSN configuration synthesis"};
  app.require_subcommand(1);
  Common common;
  std::string model_path, solution_path, out;

  TestCaseSpec spec;
  bool tiny = false;
  auto* gen = app.add_subcommand("gen", "generate a test case");
  add_common(gen, common);
  gen->add_option("--es", spec.n_es);
  gen->add_option("--sw", spec.n_sw);
  gen->add_option("--tasks", spec.tasks);
  gen->add_option("--secure-prob", spec.secure_prob);
  gen->add_option("--max-size", spec.max_size);
  gen->add_option("--wcet-cap", spec.wcet_cap);
  gen->add_flag("--tiny", tiny, "small instance suited to the exact solver");
  gen->add_option("-o,--out", out);

  auto* exact = app.add_subcommand("solve-exact", "routes, interval and schedule by branch-and-bound");
  add_common(exact, common);
  exact->add_option("-m,--model", model_path)->required();
  exact->add_option("-o,--out", out);

  auto* sa = app.add_subcommand("solve-sa", "simulated annealing with list scheduling");
  add_common(sa, common);
  sa->add_option("-m,--model", model_path)->required();
  sa->add_option("-o,--out", out);
  std::int64_t iterations = 0;
  sa->add_option("--iterations", iterations, "iteration cap (0: time budget only)");

  std::string strictness = "printed";
  auto* ver = app.add_subcommand("verify", "check a solution against every constraint");
  add_common(ver, common);
  ver->add_option("-m,--model", model_path)->required();
  ver->add_option("-s,--solution", solution_path)->required();
  ver->add_option("--strictness", strictness)->check(CLI::IsMember({"printed", "queue"}));

  auto* gcl = app.add_subcommand("export-gcl", "gate control lists of a feasible solution");
  add_common(gcl, common);
  gcl->add_option("-m,--model", model_path)->required();
  gcl->add_option("-s,--solution", solution_path)->required();
  gcl->add_option("-o,--out", out);

  std::string target = "gantt";
  auto* ren = app.add_subcommand("render", "SVG of the schedule or the routes");
  add_common(ren, common);
  ren->add_option("-m,--model", model_path)->required();
  ren->add_option("-s,--solution", solution_path)->required();
  ren->add_option("--target", target)->check(CLI::IsMember({"gantt", "routes"}));
  ren->add_option("-o,--out", out);

  int cases = 10, workers = 1;
  bool with_exact = false, no_toggles = false;
  auto* exp = app.add_subcommand("experiment", "batch runs with security and redundancy toggles");
  add_common(exp, common);
  exp->add_option("--cases", cases);
  exp->add_option("--es", spec.n_es);
  exp->add_option("--sw", spec.n_sw);
  exp->add_option("--tasks", spec.tasks);
  exp->add_option("--max-size", spec.max_size);
  exp->add_option("--wcet-cap", spec.wcet_cap);
  exp->add_option("--workers", workers);
  exp->add_option("--iterations", iterations);
  exp->add_flag("--exact", with_exact, "also run the exact pipeline");
  exp->add_flag("--no-toggles", no_toggles, "only the variant with both measures");
  exp->add_option("-o,--out", out);

  CLI11_PARSE(app, argc, argv);

  SAParams params;
  try {
    if (!common.config.empty()) apply_sa_config(read_text(common.config), params);
    params.seed = common.seed;
    params.time_limit = ms(common.budget);
    if (iterations > 0) params.max_iterations = iterations;

    if (*gen) {
      if (tiny) spec = tiny_spec(common.seed);
      spec.seed = common.seed;
      SystemModel m = generate_case(spec);
      emit(out, model_to_json(m));
    } else if (*exact) {
      SystemModel m = load_model(model_path);
      m = expand_security_model(std::move(m));
      PipelineOptions opts;
      opts.routing.budget = ms(common.budget);
      opts.schedule.time = ms(common.budget);
      const Solution sol = solve_pipeline_exact(m, opts);
      std::cerr << "routing cost " << sol.routing_cost << ", schedule cost " << sol.schedule_cost
                << (sol.optimal ? " (optimal)" : "") << "\n";
      emit(out, solution_to_json(m, sol));
      return sol.feasible() ? 0 : 2;
    } else if (*sa) {
      const SystemModel m = prepared(model_path);
      const SAResult r = anneal(m, params);
      std::cerr << "cost " << r.cost << " after " << r.iterations << " iterations";
      if (r.first_feasible_seconds) std::cerr << ", first feasible at " << *r.first_feasible_seconds << " s";
      std::cerr << "\n";
      emit(out, solution_to_json(m, r.solution));
      return r.solution.feasible() ? 0 : 2;
    } else if (*ver) {
      const SystemModel m = prepared(model_path);
      const Solution sol = solution_from_json(m, read_text(solution_path));
      const VerifyReport rep = verify_solution(m, sol, strictness == "queue" ? Strictness::Queue : Strictness::Printed);
      std::cout << rep.to_text();
      return static_cast<int>(std::min<std::size_t>(rep.violations.size(), 100));
    } else if (*gcl) {
      const SystemModel m = prepared(model_path);
      emit(out, gcl_to_text(export_gcl(m, solution_from_json(m, read_text(solution_path)))));
    } else if (*ren) {
      const SystemModel m = prepared(model_path);
      emit(out, render_svg(m, solution_from_json(m, read_text(solution_path)), target == "gantt" ? RenderTarget::Gantt : RenderTarget::Routes));
    } else if (*exp) {
      ExperimentConfig cfg;
      cfg.sa = params;
      cfg.run_exact = with_exact;
      cfg.toggles = !no_toggles;
      cfg.workers = workers;
      cfg.exact.routing.budget = ms(common.budget);
      cfg.exact.schedule.time = ms(common.budget);
      for (int i = 0; i < cases; ++i) {
        TestCaseSpec c = spec;
        c.seed = common.seed + static_cast<std::uint64_t>(i);
        cfg.cases.push_back(c);
      }
      emit(out, experiment_csv(run_experiment(cfg)));
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible (" << e.stage() << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
