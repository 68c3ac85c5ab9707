// Command-line front end: runs a simulated key exchange and emits the JSON
// report, or runs the static verification suite with --verify.
//
// Exit codes: 0 success, 1 invalid configuration or failed verification,
// 2 I/O failure.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qkd/harness.hpp"

namespace {

qkd::RunConfig load_base_config(const std::string& path) {
  if (path.empty()) return qkd::RunConfig{};
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file '" + path + "'");
  nlohmann::json j;
  in >> j;
  return qkd::RunConfig::from_json(j);
}

int run_verification(const qkd::RunConfig& cfg) {
  const std::vector<qkd::CheckResult> checks = qkd::verify(cfg);
  bool all_pass = true;
  for (const qkd::CheckResult& c : checks) {
    std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << '\n';
    all_pass = all_pass && c.pass;
  }
  std::cout << (all_pass ? "verification passed" : "verification FAILED") << '\n';
  return all_pass ? 0 : 1;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot open output file '" + path + "'");
  out << text << '\n';
  if (!out) throw std::ios_base::failure("failed writing '" + path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-trip time-bin key distribution simulator"};
  app.set_version_flag("--version", "qkdsim 1.0.0");

  std::string config_path, eve_str, leg_str, weights_str, mode_str, out_path, csv_path,
      tables_path;
  std::uint64_t rounds = 0, seed = 0;
  double loss = 0.0, misalign = 0.0, dark = 0.0, sacrifice = 0.0;
  unsigned threads = 0;
  bool do_verify = false;

  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_option("--rounds", rounds, "number of protocol rounds");
  app.add_option("--seed", seed, "master random seed");
  app.add_option("--eve", eve_str,
                 "interception variant: off, per_bin_polarization, time_pol_projective");
  app.add_option("--leg", leg_str, "intercepted leg: bob_to_alice, alice_to_bob, both");
  app.add_option("--loss", loss, "per-leg loss probability, [0, 1)");
  app.add_option("--misalign-rad", misalign, "residual polarization misalignment (radians)");
  app.add_option("--dark-prob", dark, "dark count probability per detection cell, [0, 1)");
  app.add_option("--weights", weights_str,
                 "class weights: default, uniform16, class1, or w1,w2,w3");
  app.add_option("--mode", mode_str, "readout mode: standard or extended");
  app.add_option("--sacrifice", sacrifice, "fraction of sifted bits revealed, [0, 1)");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--out", out_path, "report file (default: stdout)");
  app.add_option("--csv-log", csv_path, "per-round CSV log file");
  app.add_option("--export-tables", tables_path, "write the derived decision tables as JSON");
  app.add_flag("--verify", do_verify, "run the static verification suite and exit");

  CLI11_PARSE(app, argc, argv);

  qkd::RunConfig cfg;
  try {
    cfg = load_base_config(config_path);
    if (app.count("--rounds")) cfg.rounds = rounds;
    if (app.count("--seed")) cfg.seed = seed;
    if (app.count("--eve")) cfg.eve.variant = qkd::parse_eve_variant(eve_str);
    if (app.count("--leg")) cfg.eve.leg = qkd::parse_eve_leg(leg_str);
    if (app.count("--loss")) {
      if (loss < 0.0 || loss >= 1.0) throw std::invalid_argument("--loss must lie in [0, 1)");
      cfg.channel.transmittance_per_leg = 1.0 - loss;
    }
    if (app.count("--misalign-rad")) cfg.channel.misalignment_rad = misalign;
    if (app.count("--dark-prob")) cfg.channel.dark_count_prob = dark;
    if (app.count("--weights")) cfg.weights = qkd::parse_weights(weights_str);
    if (app.count("--mode")) cfg.mode = qkd::parse_mode(mode_str);
    if (app.count("--sacrifice")) cfg.sacrifice_fraction = sacrifice;
    if (app.count("--threads")) cfg.threads = threads;
    if (app.count("--out")) cfg.out_path = out_path;
    if (app.count("--csv-log")) cfg.csv_path = csv_path;
    cfg.validate();
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (do_verify) return run_verification(cfg);

    if (!tables_path.empty())
      write_text_file(tables_path,
                      qkd::tables_to_json(qkd::TableSet::prebuilt(cfg.mode)).dump(2));

    const qkd::RunResult result = qkd::run(cfg);
    const std::string report = qkd::report_json(result).dump(2);
    if (cfg.out_path.empty()) {
      std::cout << report << '\n';
    } else {
      write_text_file(cfg.out_path, report);
    }
    if (!cfg.csv_path.empty()) {
      std::ofstream csv(cfg.csv_path);
      if (!csv) throw std::ios_base::failure("cannot open CSV log '" + cfg.csv_path + "'");
      qkd::write_csv(csv, result.records);
      if (!csv) throw std::ios_base::failure("failed writing '" + cfg.csv_path + "'");
    }
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
