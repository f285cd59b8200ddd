#include "nswx/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

namespace nswx::cli {

using nlohmann::json;

namespace {

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SolverParams params_from(const Options& opt) {
  SolverParams p;
  p.max_iters = opt.max_iters;
  p.gap_tol = opt.tol;
  p.rng_seed = opt.seed;
  return p;
}

bool write_output(const Options& opt, const std::string& text, std::ostream& out, std::ostream& err) {
  if (opt.out.empty()) {
    out << text;
    return true;
  }
  std::ofstream file(opt.out, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << opt.out << "'\n";
    return false;
  }
  file << text;
  return true;
}

// Loads and reports problems on err; nullopt means exit with kExitInputError.
std::optional<LoadedInstance> load_or_report(const std::string& path, std::ostream& err) {
  try {
    LoadedInstance loaded = load_instance(path);
    for (const auto& w : loaded.warnings) err << "warning: " << path << ": " << w << '\n';
    return loaded;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return std::nullopt;
  }
}

// Turns solver failures into one line naming the offending agents by id.
void report_failure(const std::string& path, const std::exception& e, const InstanceFile& file, std::ostream& err) {
  if (const auto* av = dynamic_cast<const AssumptionViolated*>(&e)) {
    err << "error: " << path << ": no allocation gives every agent positive value; unmatched agents:";
    for (int i : av->unmatched_agents()) err << ' ' << file.agent_ids[i];
    err << '\n';
    return;
  }
  err << "error: " << path << ": " << e.what() << '\n';
}

json report_json(const GuaranteeReport& r) {
  return {{"kl_w", r.kl_w},
          {"f_cvx", r.f_cvx_relaxed},
          {"achieved_gap", r.achieved_gap},
          {"opt_upper_bound", r.opt_upper_bound},
          {"dual_bound", r.dual_bound},
          {"f_ncvx", r.f_ncvx_relaxed},
          {"f_ncvx_forest", r.f_ncvx_forest},
          {"f_cvx_restricted", r.f_cvx_star},
          {"restricted_gap", r.restricted_gap},
          {"nsw", r.nsw},
          {"matching_weight", r.matching_weight},
          {"theorem1_bound", r.theorem1_bound},
          {"theorem1_slack", r.theorem1_slack},
          {"acyclic_bound", r.acyclic_bound},
          {"acyclic_slack", r.acyclic_slack},
          {"iterations", r.iterations},
          {"restricted_iterations", r.restricted_iterations},
          {"leftover_items", r.num_leftover_items},
          {"certified", r.certified}};
}

json lemma_json(const LemmaReport& r) {
  json j = {{"lemma", r.lemma},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"tolerance", r.tolerance},
            {"relation", r.sense == Sense::AtLeast ? ">=" : "=="},
            {"hypotheses_hold", r.hypotheses_hold},
            {"pass", r.pass}};
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json allocation_json(const InstanceFile& file, const Instance& inst, const Assignment& a) {
  json items = json::array();
  for (int j = 0; j < inst.num_items(); ++j) {
    items.push_back({{"item", file.item_ids[j]}, {"agent", file.agent_ids[a.owner_of(j)]}});
  }
  return items;
}

}  // namespace

int bench_threads() {
  if (const char* env = std::getenv("NSWX_THREADS")) {
    const int k = std::atoi(env);
    if (k > 0) return k;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_or_report(opt.path, err);
  if (!loaded) return kExitInputError;
  const Instance& inst = loaded->instance;
  RoundingResult result;
  try {
    result = solve_nsw(inst, params_from(opt));
  } catch (const std::exception& e) {
    report_failure(opt.path, e, loaded->file, err);
    return kExitInputError;
  }

  std::string text;
  if (opt.format == "csv") {
    text = "item,agent,value\n";
    for (int j = 0; j < inst.num_items(); ++j) {
      const int i = result.assignment.owner_of(j);
      text += loaded->file.item_ids[j] + "," + loaded->file.agent_ids[i] + "," + num(inst.v(i, j)) + "\n";
    }
  } else {
    json doc = {{"instance", opt.path},
                {"n", inst.num_agents()},
                {"m", inst.num_items()},
                {"weight_scale", inst.raw_weight_sum()},
                {"allocation", allocation_json(loaded->file, inst, result.assignment)},
                {"report", report_json(result.report)}};
    json leftovers = json::array();
    for (int j : result.matching.leftover_items) leftovers.push_back(loaded->file.item_ids[j]);
    doc["leftover_items"] = leftovers;
    text = to_json_text(doc);
  }
  if (!write_output(opt, text, out, err)) return kExitInputError;
  if (!result.report.certified) {
    err << "warning: iteration budget exhausted before the gap reached " << num(opt.tol) << '\n';
    return kExitUncertified;
  }
  return kExitOk;
}

int cmd_verify(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_or_report(opt.path, err);
  if (!loaded) return kExitInputError;
  const Instance& inst = loaded->instance;
  std::vector<LemmaReport> reports;
  try {
    std::optional<OracleResult> oracle;
    if (opt.with_oracle) oracle = brute_force_opt(inst, opt.cap);
    const RoundingResult res = solve_nsw(inst, params_from(opt));
    const GuaranteeReport& g = res.report;
    const double eps = 10.0 * opt.tol;

    reports.push_back(make_report("solver-certificate", opt.tol, g.achieved_gap, 0.0));
    const GapIdentity gi = gap_identity(inst, res.relaxed);
    LemmaReport diff = make_report("gap-identity", gi.gap, gi.kl_w - gi.kl_mu_theta, 1e-9, Sense::Equal);
    diff.note = "f_cvx=" + num(f_cvx(inst, res.relaxed)) + " f_ncvx=" + num(f_ncvx(inst, res.relaxed));
    reports.push_back(diff);
    reports.push_back(make_report("gap-bound", gi.kl_w, gi.gap, 1e-9));
    reports.push_back(make_report("weak-duality", g.dual_bound, g.f_cvx_relaxed, 1e-6));

    LemmaReport forest = make_report("forest", g.f_ncvx_forest, g.f_ncvx_relaxed, 1e-9);
    forest.hypotheses_hold = is_forest(support_graph(res.s_forest, 0.0));
    forest.pass = forest.pass && forest.hypotheses_hold;
    reports.push_back(forest);

    const FractionalSolution pruned = construct_pruned_solution(inst, res.s_star, res.forest.rooted);
    const PrunedSolutionCheck pc = check_pruned_solution(res.s_star, res.forest.rooted, pruned);
    LemmaReport ps = make_report("pruned-sol", 0.0, std::max(pc.max_heavy_q_decrease, pc.max_excess_over_double), 1e-12);
    ps.pass = pc.pass();
    ps.note = std::string("feasible=") + (pc.feasible ? "yes" : "no") + " support_subset=" +
              (pc.support_subset ? "yes" : "no") + " light_items_are_leaves=" + (pc.light_items_are_leaves ? "yes" : "no");
    reports.push_back(ps);
    reports.push_back(check_after_pruning(inst, res.s_star, pruned, eps));
    reports.push_back(check_a_change(inst, res.s_star, pruned, eps));
    reports.push_back(check_frac1(inst, pruned, res.forest.leaf_bundles, eps));
    reports.push_back(check_frac2(inst, pruned, res.forest.leaf_bundles, res.matching.matching_weight, eps));
    reports.push_back(
        check_fractional_matching(inst, pruned, res.forest.leaf_bundles, res.matching.matched_item, eps));
    reports.push_back(make_report("theorem1-acyclic", g.nsw, g.acyclic_bound, opt.tol + 1e-6));
    reports.push_back(make_report("theorem1-certified", g.nsw, g.theorem1_bound, 1e-9));
    if (oracle) {
      reports.push_back(make_report("relaxation", g.opt_upper_bound, oracle->opt, 1e-9));
      reports.push_back(verify_theorem1(inst, res.assignment, oracle->opt, opt.tol));
    }
  } catch (const std::exception& e) {
    report_failure(opt.path, e, loaded->file, err);
    return kExitInputError;
  }

  // A report whose hypotheses fail is informational only.
  bool all_pass = true;
  for (const auto& r : reports) all_pass = all_pass && (r.pass || !r.hypotheses_hold);

  std::string text;
  if (opt.format == "csv") {
    text = "lemma,lhs,rhs,tolerance,hypotheses_hold,pass\n";
    for (const auto& r : reports) {
      text += r.lemma + "," + num(r.lhs) + "," + num(r.rhs) + "," + num(r.tolerance) + "," +
              (r.hypotheses_hold ? "true" : "false") + "," + (r.pass ? "true" : "false") + "\n";
    }
  } else {
    json doc = {{"instance", opt.path}, {"all_pass", all_pass}, {"reports", json::array()}};
    for (const auto& r : reports) doc["reports"].push_back(lemma_json(r));
    text = to_json_text(doc);
  }
  if (!write_output(opt, text, out, err)) return kExitInputError;
  return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_oracle(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_or_report(opt.path, err);
  if (!loaded) return kExitInputError;
  const Instance& inst = loaded->instance;
  OracleResult res;
  try {
    res = brute_force_opt(inst, opt.cap);
  } catch (const std::exception& e) {
    err << "error: " << opt.path << ": " << e.what() << '\n';
    return kExitInputError;
  }
  std::string text;
  if (opt.format == "csv") {
    text = "item,agent\n";
    for (int j = 0; j < inst.num_items(); ++j) {
      text += loaded->file.item_ids[j] + "," + loaded->file.agent_ids[res.assignment.owner_of(j)] + "\n";
    }
  } else {
    json doc = {{"instance", opt.path},
                {"opt", res.opt},
                {"evaluated", res.evaluated},
                {"allocation", allocation_json(loaded->file, inst, res.assignment)}};
    text = to_json_text(doc);
  }
  return write_output(opt, text, out, err) ? kExitOk : kExitInputError;
}

int cmd_gen(const Options& opt, std::ostream& out, std::ostream& err) {
  std::string text;
  try {
    text = dump_instance_file(gen_instance(opt.kind, opt.n, opt.m, opt.seed, GenParams{opt.weights}));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return write_output(opt, text, out, err) ? kExitOk : kExitInputError;
}

int cmd_bench(const Options& opt, std::ostream& out, std::ostream& err) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(opt.path, ec)) {
    err << "error: '" << opt.path << "' is not a directory\n";
    return kExitInputError;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(opt.path, ec)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  struct Row {
    bool ok = false;
    std::string problem;
    int n = 0, m = 0;
    GuaranteeReport report;
    double wall_ms = 0.0;
  };
  std::vector<Row> rows(files.size());
  std::atomic<std::size_t> next{0};
  const SolverParams p = params_from(opt);
  auto work = [&] {
    for (std::size_t k = next++; k < files.size(); k = next++) {
      Row& row = rows[k];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        const LoadedInstance loaded = load_instance(files[k].string());
        const RoundingResult res = solve_nsw(loaded.instance, p);
        row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        row.n = loaded.instance.num_agents();
        row.m = loaded.instance.num_items();
        row.report = res.report;
        row.ok = true;
      } catch (const std::exception& e) {
        row.problem = e.what();
      }
    }
  };
  const int threads = std::min<int>(bench_threads(), std::max<int>(1, static_cast<int>(files.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::vector<std::string> skipped;
  for (std::size_t k = 0; k < files.size(); ++k) {
    if (!rows[k].ok) {
      err << "warning: skipping " << files[k].filename().string() << ": " << rows[k].problem << '\n';
      skipped.push_back(files[k].filename().string());
    }
  }

  std::string text;
  if (opt.format == "json") {
    json doc = {{"rows", json::array()}, {"skipped", skipped}};
    for (std::size_t k = 0; k < files.size(); ++k) {
      if (!rows[k].ok) continue;
      const GuaranteeReport& r = rows[k].report;
      json row = {{"instance", files[k].filename().string()},
                  {"n", rows[k].n},
                  {"m", rows[k].m},
                  {"KL", r.kl_w},
                  {"f_cvx", r.f_cvx_relaxed},
                  {"achieved_gap", r.achieved_gap},
                  {"NSW", r.nsw},
                  {"theorem1_slack", r.theorem1_slack}};
      row["wall_ms"] = opt.no_timing ? json(nullptr) : json(rows[k].wall_ms);
      doc["rows"].push_back(row);
    }
    text = to_json_text(doc);
  } else {
    text = "instance,n,m,KL,f_cvx,achieved_gap,NSW,theorem1_slack,wall_ms\n";
    for (std::size_t k = 0; k < files.size(); ++k) {
      if (!rows[k].ok) continue;
      const GuaranteeReport& r = rows[k].report;
      text += files[k].filename().string() + "," + std::to_string(rows[k].n) + "," + std::to_string(rows[k].m) + "," +
              num(r.kl_w) + "," + num(r.f_cvx_relaxed) + "," + num(r.achieved_gap) + "," + num(r.nsw) + "," +
              num(r.theorem1_slack) + "," + (opt.no_timing ? "NA" : num(rows[k].wall_ms)) + "\n";
    }
    if (!skipped.empty()) {
      text += "#skipped," + std::to_string(skipped.size());
      for (const auto& s : skipped) text += "," + s;
      text += "\n";
    }
  }
  return write_output(opt, text, out, err) ? kExitOk : kExitInputError;
}

}  // namespace nswx::cli
