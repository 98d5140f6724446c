#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "stacklab/simulator.hpp"

namespace stacklab {

// Flat key=value run configuration. Precedence: CLI flag > config file >
// default.
struct RunConfig {
  std::uint64_t seed = 42;
  Mode mode = Mode::Linear;
  std::string out_dir = "out";

  // dataset generation (desk-scale defaults)
  int episodes = 550;
  int max_inventory = 5;
  std::string dataset_path;  // default: <out_dir>/dataset_<mode>.jsonl

  // snapshots
  std::string encoder_path;   // default: <out_dir>/encoder_<mode>.bin
  std::string model_path;     // default: <out_dir>/mogan_<mode>.bin
  std::string baseline_path;  // default: <out_dir>/baseline_<mode>.bin

  // training
  double lr = 1e-4;
  double gamma = 0.95;
  int lr_step = 500;
  std::string lr_step_unit = "epoch";  // or "step"
  int epochs = 200;
  double lambda_sign = 1.0;
  int val_modulus = 10;  // every val_modulus-th episode is validation
  int encoder_epochs = 400;
  int encoder_jitters = 8;

  // planning
  std::string task = "shortest";
  std::string predictor = "mogan";  // mogan | baseline | oracle
  std::string sizes = "2,3,4,5";
  int samples = 10;
  long plan_budget = 200000;
  double collapse_cutoff = 0.5;

  std::string dataset_file() const;
  std::string encoder_file() const;
  std::string model_file() const;
  std::string baseline_file() const;

  std::string serialize() const;  // key=value lines, stable order
  static RunConfig from_map(const std::map<std::string, std::string>& kv,
                            const RunConfig& base);
  static RunConfig from_map(const std::map<std::string, std::string>& kv) {
    return from_map(kv, RunConfig{});
  }
};

RunConfig load_config(const std::string& path, const RunConfig& base = RunConfig{});
void save_config(const std::string& path, const RunConfig& config);
std::map<std::string, std::string> parse_kv_text(const std::string& text);

}  // namespace stacklab
