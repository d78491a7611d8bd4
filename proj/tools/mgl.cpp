#include <CLI11.hpp>

#include <iostream>

#include "mgl/lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Markov chain geometry lab: spectra, isoperimetry, tail functionals, functional inequalities"};
  app.require_subcommand(1);

  std::string config, out_dir;
  bool witnesses = false;
  auto* analyze = app.add_subcommand("analyze", "Run the analyses requested by a JSON config");
  analyze->add_option("config", config, "Run config (JSON)")->required();
  analyze->add_option("--out", out_dir, "Directory for report.json and CSV sidecars (default: stdout)");
  analyze->add_flag("--emit-witnesses", witnesses, "Include maximizers and witness sets in the report");

  mgl::lab::VerifyOptions vopts;
  double perturb = 0.0;
  std::string verify_json;
  auto* verify = app.add_subcommand("verify", "Run the randomized check corpus; ledger CSV on stdout");
  verify->add_option("--seed", vopts.seed, "Corpus seed")->capture_default_str();
  verify->add_option("--cases", vopts.cases, "Number of cases")->capture_default_str()->check(CLI::PositiveNumber);
  auto* perturb_opt =
      verify->add_option("--perturb-kernel", perturb, "Perturb every kernel by EPS (breaks invariance)")
          ->check(CLI::NonNegativeNumber);
  verify->add_option("--json", verify_json, "Also write the ledger as JSON");

  std::string family, metrics, sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Metrics of a family along its truncation sizes; CSV");
  sweep->add_option("family", family, "Sweep config (JSON)")->required();
  sweep->add_option("--metrics", metrics, "Comma list of gap, kappa2, tau@R")->required();
  sweep->add_option("--out", sweep_out, "CSV file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mgl::lab::kConfigError;
  }

  if (*analyze) return mgl::lab::cmd_analyze(config, out_dir, witnesses, std::cout, std::cerr);
  if (*verify) {
    if (*perturb_opt) vopts.perturb = perturb;
    return mgl::lab::cmd_verify(vopts, verify_json, std::cout, std::cerr);
  }
  return mgl::lab::cmd_sweep(family, metrics, sweep_out, std::cout, std::cerr);
}
