#include "nswx/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace nswx::cli;
  CLI::App app{"Weighted Nash social welfare: concave relaxation, rounding and verification"};
  app.require_subcommand(1);
  Options opt;

  auto add_solver_flags = [&](CLI::App* sub) {
    sub->add_option("--tol", opt.tol, "Frank-Wolfe gap tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iters", opt.max_iters, "Iteration budget per solve")->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "Seed for the initial vertex noise");
  };
  auto add_output_flags = [&](CLI::App* sub, const std::vector<std::string>& formats) {
    sub->add_option("--out", opt.out, "Write output to this file instead of stdout");
    sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember(formats));
  };

  auto* solve = app.add_subcommand("solve", "Solve the relaxation and round to an integral allocation");
  solve->add_option("instance", opt.path, "Instance JSON file")->required();
  add_solver_flags(solve);
  add_output_flags(solve, {"json", "csv"});

  auto* verify = app.add_subcommand("verify", "Solve and check every guarantee on the instance");
  verify->add_option("instance", opt.path, "Instance JSON file")->required();
  verify->add_flag("--with-oracle", opt.with_oracle, "Also compare against the brute-force optimum");
  verify->add_option("--cap", opt.cap, "Largest n^m the brute-force oracle will enumerate");
  add_solver_flags(verify);
  add_output_flags(verify, {"json", "csv"});

  auto* oracle = app.add_subcommand("oracle", "Brute-force optimum for small instances");
  oracle->add_option("instance", opt.path, "Instance JSON file")->required();
  oracle->add_option("--cap", opt.cap, "Largest n^m to enumerate");
  add_output_flags(oracle, {"json", "csv"});

  auto* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--kind", opt.kind, "Instance family")
      ->check(CLI::IsMember({"uniform", "skewed", "diagonal", "adversarial-light"}));
  gen->add_option("-n", opt.n, "Number of agents")->check(CLI::PositiveNumber);
  gen->add_option("-m", opt.m, "Number of items")->check(CLI::PositiveNumber);
  gen->add_option("--seed", opt.seed, "RNG seed");
  gen->add_option("--weights", opt.weights, "Weight distribution")->check(CLI::IsMember({"dirichlet", "equal"}));
  gen->add_option("--out", opt.out, "Write the instance to this file instead of stdout");

  auto* bench = app.add_subcommand("bench", "Solve every *.json instance in a directory");
  bench->add_option("directory", opt.path, "Directory of instance files")->required();
  bench->add_flag("--no-timing", opt.no_timing, "Print NA instead of wall-clock times");
  add_solver_flags(bench);
  add_output_flags(bench, {"csv", "json"});

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInputError;
  }
  if (bench->parsed() && bench->count("--format") == 0) opt.format = "csv";

  if (solve->parsed()) return cmd_solve(opt, std::cout, std::cerr);
  if (verify->parsed()) return cmd_verify(opt, std::cout, std::cerr);
  if (oracle->parsed()) return cmd_oracle(opt, std::cout, std::cerr);
  if (gen->parsed()) return cmd_gen(opt, std::cout, std::cerr);
  return cmd_bench(opt, std::cout, std::cerr);
}
