#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "eigenflow/commands.hpp"
#include "eigenflow/error.hpp"
#include "eigenflow/parallel.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumerical = 3;

bool is_validation(eigenflow::ErrorKind k) {
  using eigenflow::ErrorKind;
  return k == ErrorKind::ConfigError || k == ErrorKind::InvalidArgument || k == ErrorKind::NotStarShaped ||
         k == ErrorKind::DegenerateBoundary;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace eigenflow;

  CLI::App app{"eigenflow: eigenvalue flows of Schroedinger operators on shrinking star-shaped domains"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 1;
  std::uint64_t seed = 0;
  app.add_option("--threads", threads, "Worker threads")->check(CLI::Range(1, 256));
  app.add_option("--seed", seed, "Seed for mesh sector anchors and randomized acceptance instances");
  app.add_option("--out", out_dir, "Output directory (overrides output.dir)");

  auto with_config = [&](CLI::App* sub) {
    sub->add_option("--config,-c", config_path, "YAML configuration")->required();
    return sub;
  };
  CLI::App* mesh = with_config(app.add_subcommand("mesh", "Mesh the domain; writes mesh.txt and mesh.json"));
  CLI::App* flow = with_config(app.add_subcommand("flow", "Eigenvalue curves over [tau, 1]; writes flow.csv"));
  CLI::App* deriv = with_config(app.add_subcommand("derivative", "Derivatives at target.t0; writes derivative.json"));
  CLI::App* maslov = with_config(app.add_subcommand("maslov", "Maslov index at target.lambda0; writes maslov.json"));
  CLI::App* verify = app.add_subcommand("verify", "Run the acceptance suite; writes verify.json");
  for (CLI::App* sub : {mesh, flow, deriv, maslov, verify}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  set_thread_count(threads);
  cli::RunContext ctx;
  ctx.seed = seed;
  std::string command;
  try {
    nlohmann::json summary;
    if (verify->parsed()) {
      command = "verify";
      ctx.out_dir = out_dir.empty() ? "out" : out_dir;
      bool ok = false;
      summary = cli::cmd_verify(ctx, ok);
      cli::write_metadata(ctx, command, "", threads);
      std::cout << summary["passed"].get<int>() << "/" << summary["total"].get<int>() << " criteria passed\n";
      return ok ? kOk : kNumerical;
    }
    const FlowConfig config = load_config(config_path);
    ctx.out_dir = out_dir.empty() ? config.out_dir : out_dir;
    if (mesh->parsed()) {
      command = "mesh";
      summary = cli::cmd_mesh(config, ctx);
    } else if (flow->parsed()) {
      command = "flow";
      summary = cli::cmd_flow(config, ctx);
    } else if (deriv->parsed()) {
      command = "derivative";
      summary = cli::cmd_derivative(config, ctx);
    } else {
      command = "maslov";
      summary = cli::cmd_maslov(config, ctx);
    }
    cli::write_metadata(ctx, command, config_path, threads);
    std::cout << cli::dump(summary);
    if (command == "maslov" && summary.contains("warning")) std::cerr << "warning: " << summary["warning"].get<std::string>() << "\n";
    return kOk;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_validation(e.kind()) ? kValidation : kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
