// Command-line front end: mesh-gen, derive, hrf, ppe, run, analyze.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mcirc/config.hpp"
#include "mcirc/error.hpp"
#include "mcirc/pipeline.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cerebral microcirculation simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", mcirc::kVersion);

  std::string config_path, out_dir, run_dir;
  std::optional<std::size_t> cadence;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* opt = sub->add_option("--config", config_path, "configuration file");
    if (config_required) opt->required();
    sub->add_option("--out", out_dir, "output directory (default: out_dir from the config)");
    sub->add_flag("--quiet", quiet, "suppress progress output");
  };
  auto* mesh_gen = app.add_subcommand("mesh-gen", "generate and label the synthetic mesh");
  add_common(mesh_gen, false);
  auto* derive = app.add_subcommand("derive", "evaluate derived vessel parameters");
  add_common(derive, false);
  auto* hrf = app.add_subcommand("hrf", "sample the mollified hemodynamic response");
  add_common(hrf, false);
  auto* ppe = app.add_subcommand("ppe", "solve the arterial pressure and boundary influx");
  add_common(ppe, false);
  auto* run = app.add_subcommand("run", "time-step the coupled TBV/DBV system");
  add_common(run, true);
  run->add_option("--cadence", cadence, "steps between full field snapshots");
  auto* analyze = app.add_subcommand("analyze", "ROI summary, profiles and dB fields of a run");
  analyze->add_option("run_dir", run_dir, "directory written by 'run'")->required();
  analyze->add_option("--out", out_dir, "output directory (default: RUN_DIR/analysis)");
  analyze->add_flag("--quiet", quiet, "suppress progress output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << '\n' << app.help();
    return kExitValidation;
  }

  std::ostream* log = quiet ? nullptr : &std::cerr;
  try {
    if (analyze->parsed()) {
      mcirc::command_analyze(run_dir, out_dir.empty() ? std::filesystem::path(run_dir) / "analysis"
                                                      : std::filesystem::path(out_dir),
                             log);
      return 0;
    }
    mcirc::RunConfig cfg = config_path.empty() ? mcirc::parse_config_text("")
                                               : mcirc::parse_config(config_path);
    if (!out_dir.empty()) cfg.output.dir = out_dir;
    if (cadence) {
      if (*cadence == 0) throw mcirc::ValidationError("--cadence must be positive");
      cfg.output.cadence = *cadence;
    }
    const auto out = cfg.output.dir;
    if (mesh_gen->parsed()) mcirc::command_mesh_gen(cfg, out);
    else if (derive->parsed()) mcirc::command_derive(cfg, out, log);
    else if (hrf->parsed()) mcirc::command_hrf(cfg, out);
    else if (ppe->parsed()) mcirc::command_ppe(cfg, out, log);
    else if (run->parsed()) mcirc::command_run(cfg, out, log);
    return 0;
  } catch (const mcirc::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const mcirc::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}
