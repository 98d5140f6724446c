#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "stacklab/baseline.hpp"
#include "stacklab/config.hpp"
#include "stacklab/dataset.hpp"
#include "stacklab/planner.hpp"
#include "stacklab/predictor.hpp"
#include "stacklab/report.hpp"

namespace fs = std::filesystem;
using namespace stacklab;

namespace {

struct CliOverrides {
  std::string config_path;
  std::map<std::string, std::string> kv;
};

RunConfig resolve_config(const CliOverrides& o) {
  RunConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path, cfg);
  cfg = RunConfig::from_map(o.kv, cfg);  // CLI flags win over the file
  fs::create_directories(cfg.out_dir);
  return cfg;
}

// registers the shared flags; values land in `o.kv` only when the user set
// them, preserving config-file precedence
void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "config file (key=value lines)");
  for (const char* key : {"seed", "mode", "out-dir", "episodes", "max-inventory",
                          "dataset-path", "encoder-path", "model-path", "baseline-path",
                          "lr", "gamma", "lr-step", "lr-step-unit", "epochs",
                          "lambda-sign", "val-modulus", "encoder-epochs",
                          "encoder-jitters", "task", "predictor", "sizes", "samples",
                          "plan-budget", "collapse-cutoff"}) {
    std::string opt = std::string("--") + key;
    std::string canonical = key;
    std::replace(canonical.begin(), canonical.end(), '-', '_');
    cmd->add_option_function<std::string>(
        opt, [&o, canonical](const std::string& v) { o.kv[canonical] = v; });
  }
}

Autoencoder load_encoder_or_die(const RunConfig& cfg) {
  Autoencoder enc;
  load_encoder(cfg.encoder_file(), enc);
  return enc;
}

int cmd_gen_data(const RunConfig& cfg) {
  if (cfg.episodes == 0)
    std::fprintf(stderr, "warning: zero episodes requested, dataset will be empty\n");
  const auto records = generate_dataset(cfg.seed, cfg.episodes, episode_pool(cfg.mode),
                                        cfg.mode, cfg.max_inventory);
  write_jsonl(cfg.dataset_file(), records);
  std::map<int, int> by_size;
  int collapses = 0;
  for (const auto& r : records) {
    by_size[static_cast<int>(r.members.size())] += 1;
    collapses += r.e3;
  }
  std::printf("dataset: %s\n", cfg.dataset_file().c_str());
  std::printf("episodes=%d records=%zu collapses=%d\n", cfg.episodes, records.size(),
              collapses);
  for (const auto& [size, count] : by_size)
    std::printf("  tower_size=%d records=%d\n", size, count);
  return 0;
}

int cmd_train_encoder(const RunConfig& cfg) {
  EncoderTrainConfig ec;
  ec.seed = cfg.seed;
  ec.max_epochs = cfg.encoder_epochs;
  ec.lr = cfg.lr;
  ec.gamma = cfg.gamma;
  ec.lr_step = cfg.lr_step;
  ec.lr_per_optimizer_step = cfg.lr_step_unit == "step";
  const EncoderCorpus corpus = encoder_corpus(cfg.seed, cfg.encoder_jitters);
  Autoencoder model;
  const EncoderTrainResult res = train_autoencoder(model, corpus.train, corpus.val, ec);
  if (!std::isfinite(res.final_train_mse)) {
    std::fprintf(stderr, "error: non-finite loss during encoder training\n");
    return 2;
  }
  save_encoder(cfg.encoder_file(), model,
               "{\"arch\":\"1024-256-256-64-4\",\"seed\":" + std::to_string(cfg.seed) + "}");
  const std::string csv = cfg.out_dir + "/encoder_metrics_" + to_string(cfg.mode) + ".csv";
  std::vector<MetricRow> rows;
  for (const auto& [epoch, train, val] : res.log) {
    rows.push_back({static_cast<int>(epoch), "recon", "train", train});
    rows.push_back({static_cast<int>(epoch), "recon", "val", val});
  }
  write_metrics_csv(csv, rows);
  std::printf("encoder: %s (epochs=%ld)\n", cfg.encoder_file().c_str(), res.epochs);
  std::printf("final reconstruction MSE train=%.6f val=%.6f\n", res.final_train_mse,
              res.final_val_mse);
  return 0;
}

TrainConfig train_config_of(const RunConfig& cfg) {
  TrainConfig tc;
  tc.seed = cfg.seed;
  tc.epochs = cfg.epochs;
  tc.lr = cfg.lr;
  tc.gamma = cfg.gamma;
  tc.lr_step = cfg.lr_step;
  tc.lr_per_optimizer_step = cfg.lr_step_unit == "step";
  tc.lambda_sign = cfg.lambda_sign;
  return tc;
}

int cmd_train_mogan(const RunConfig& cfg) {
  const auto records = read_jsonl(cfg.dataset_file());
  const Autoencoder enc = load_encoder_or_die(cfg);
  const SampleSet samples = build_samples(records, enc, cfg.mode, cfg.val_modulus);
  GraphModel model(GraphModelConfig::for_mode(cfg.mode));
  const TrainLog log = train_graph_model(model, samples, train_config_of(cfg));
  if (log.nan_failure) {
    std::fprintf(stderr, "error: non-finite loss during training\n");
    return 2;
  }
  save_graph_model(cfg.model_file(), model,
                   std::string("{\"mode\":\"") + to_string(cfg.mode) +
                       "\",\"params\":" + std::to_string(model.scalar_count()) + "}");
  write_metrics_csv(cfg.out_dir + "/mogan_metrics_" + to_string(cfg.mode) + ".csv", log.rows);
  write_size_table_csv(cfg.out_dir + "/mogan_val_by_size_" + to_string(cfg.mode) + ".csv",
                       "mogan", log.table);
  std::printf("mogan: %s (params=%zu)\n", cfg.model_file().c_str(), model.scalar_count());
  for (const SizeError& r : log.table)
    std::printf("  size=%d e1=%.3f e2=%.3f e3=%.3f\n", r.tower_size, r.e1_mae, r.e2_mae,
                r.e3_err);
  return 0;
}

int cmd_train_baseline(const RunConfig& cfg) {
  const auto records = read_jsonl(cfg.dataset_file());
  const Autoencoder enc = load_encoder_or_die(cfg);
  const BaselineSampleSet samples =
      build_baseline_samples(records, enc, cfg.mode, cfg.val_modulus);
  BaselineModel model(BaselineConfig::for_mode(cfg.mode));
  const TrainLog log = train_baseline(model, samples, train_config_of(cfg));
  if (log.nan_failure) {
    std::fprintf(stderr, "error: non-finite loss during training\n");
    return 2;
  }
  save_baseline(cfg.baseline_file(), model,
                std::string("{\"mode\":\"") + to_string(cfg.mode) +
                    "\",\"params\":" + std::to_string(model.scalar_count()) + "}");
  write_metrics_csv(cfg.out_dir + "/baseline_metrics_" + to_string(cfg.mode) + ".csv",
                    log.rows);
  write_size_table_csv(cfg.out_dir + "/baseline_val_by_size_" + to_string(cfg.mode) + ".csv",
                       "baseline", log.table);
  std::printf("baseline: %s (params=%zu)\n", cfg.baseline_file().c_str(),
              model.scalar_count());
  return 0;
}

// oracle "errors": recompute the effects from the record scene and compare
// with the stored targets; pipeline self-consistency gives exact zeros
std::vector<SizeError> eval_oracle(const std::vector<InteractionRecord>& records,
                                   Mode mode, int val_modulus) {
  const auto pool = episode_pool(mode);
  std::map<int, SizeError> acc;
  std::map<int, std::array<int, 2>> count;
  OraclePredictor oracle;
  for (const InteractionRecord& rec : records) {
    if (val_modulus > 0 && rec.episode % val_modulus != 0) continue;
    const int k = static_cast<int>(rec.members.size());
    if (k < 1) continue;
    CompoundState compound;
    for (const MemberSnapshot& m : rec.members) {
      Placement p;
      p.spec = pool.at(static_cast<std::size_t>(m.object_id));
      p.pose = m.pose;
      p.slot = m.slot;
      p.step = compound.size() + 1;
      p.release_x = m.pose.x;
      p.release_y = m.pose.y;
      compound.placements.push_back(p);
    }
    CandidateAction action{pool.at(static_cast<std::size_t>(rec.new_id)), rec.slot,
                           rec.orientation};
    const CandidatePrediction pred = oracle.predict(compound, {}, action);
    SizeError& row = acc[k];
    row.tower_size = k;
    for (int i = 0; i < k; ++i) {
      row.e1_mae += (std::abs(pred.per_member[static_cast<std::size_t>(i)].e1[0] -
                              rec.e1[static_cast<std::size_t>(i)][0]) +
                     std::abs(pred.per_member[static_cast<std::size_t>(i)].e1[1] -
                              rec.e1[static_cast<std::size_t>(i)][1])) / 2;
      double d = 0;
      for (int c = 0; c < 4; ++c)
        d += std::abs(pred.per_member[static_cast<std::size_t>(i)].e2[static_cast<std::size_t>(c)] -
                      rec.e2[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
      row.e2_mae += d / 4;
    }
    row.e3_err += std::abs(pred.collapse_prob - rec.e3);
    count[k][0] += k;
    count[k][1] += 1;
  }
  std::vector<SizeError> table;
  for (auto& [size, row] : acc) {
    row.e1_mae /= count[size][0];
    row.e2_mae /= count[size][0];
    row.e3_err /= count[size][1];
    row.n_pairs = count[size][0];
    row.n_records = count[size][1];
    table.push_back(row);
  }
  return table;
}

int cmd_eval(const RunConfig& cfg) {
  const auto records = read_jsonl(cfg.dataset_file());
  std::vector<SizeError> table;
  std::string name = cfg.predictor;
  if (cfg.predictor == "oracle") {
    table = eval_oracle(records, cfg.mode, cfg.val_modulus);
  } else if (cfg.predictor == "mogan") {
    const Autoencoder enc = load_encoder_or_die(cfg);
    const SampleSet samples = build_samples(records, enc, cfg.mode, cfg.val_modulus);
    GraphModel model(GraphModelConfig::for_mode(cfg.mode));
    load_graph_model(cfg.model_file(), model);
    table = eval_graph_model(model, samples);
  } else if (cfg.predictor == "baseline") {
    const Autoencoder enc = load_encoder_or_die(cfg);
    const BaselineSampleSet samples =
        build_baseline_samples(records, enc, cfg.mode, cfg.val_modulus);
    BaselineModel model(BaselineConfig::for_mode(cfg.mode));
    load_baseline(cfg.baseline_file(), model);
    table = eval_baseline(model, samples);
  } else {
    std::fprintf(stderr, "unknown predictor: %s\n", cfg.predictor.c_str());
    return 2;
  }
  const std::string csv =
      cfg.out_dir + "/eval_" + name + "_" + to_string(cfg.mode) + ".csv";
  write_size_table_csv(csv, name, table);
  std::printf("%-6s %12s %12s %12s\n", "size", "e1_mae_dm", "e2_mae_dm", "e3_err");
  for (const SizeError& r : table)
    std::printf("%-6d %12.3f %12.3f %12.3f\n", r.tower_size, r.e1_mae, r.e2_mae, r.e3_err);
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

std::vector<int> parse_sizes(const std::string& sizes) {
  std::vector<int> out;
  std::string cur;
  for (char ch : sizes + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stoi(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

std::vector<ObjectSpec> sample_inventory(Rng& rng, const std::vector<ObjectSpec>& pool,
                                         int n) {
  std::vector<ObjectSpec> available = pool;
  std::vector<ObjectSpec> inventory;
  for (int i = 0; i < n && !available.empty(); ++i) {
    const int pick = rng.index(static_cast<int>(available.size()));
    inventory.push_back(available[static_cast<std::size_t>(pick)]);
    available.erase(available.begin() + pick);
  }
  return inventory;
}

std::string plan_to_json(const Plan& plan, const VerifyReport& report, const Task& task) {
  std::string out = "{\n  \"task\": \"" + std::string(to_string(task.kind)) + "\",\n";
  out += "  \"actions\": [\n";
  for (std::size_t i = 0; i < plan.actions.size(); ++i) {
    const PlanAction& a = plan.actions[i];
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "    {\"object_id\": %d, \"slot\": %d, \"orientation\": \"%s\"}%s\n",
                  a.object_id, a.slot, to_string(a.orientation),
                  i + 1 < plan.actions.size() ? "," : "");
    out += buf;
  }
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "  ],\n  \"predicted_score\": %.6f,\n  \"predicted_height_dm\": %.6f,\n"
                "  \"verified\": {\"executed\": %s, \"success\": %s, \"achieved\": %.6f, "
                "\"optimum\": %.6f}\n}\n",
                plan.predicted_score, plan.predicted_height_dm,
                report.executed ? "true" : "false", report.success ? "true" : "false",
                report.achieved, report.optimum);
  out += buf;
  return out;
}

int cmd_plan(const RunConfig& cfg) {
  // predictor setup
  Autoencoder enc;
  std::unique_ptr<GraphModel> gm;
  std::unique_ptr<BaselineModel> bm;
  std::unique_ptr<EffectPredictor> predictor;
  if (cfg.predictor == "oracle") {
    predictor = std::make_unique<OraclePredictor>();
  } else if (cfg.predictor == "mogan") {
    enc = load_encoder_or_die(cfg);
    gm = std::make_unique<GraphModel>(GraphModelConfig::for_mode(cfg.mode));
    load_graph_model(cfg.model_file(), *gm);
    predictor = std::make_unique<GraphPredictor>(gm.get(), &enc);
  } else if (cfg.predictor == "baseline") {
    enc = load_encoder_or_die(cfg);
    bm = std::make_unique<BaselineModel>(BaselineConfig::for_mode(cfg.mode));
    load_baseline(cfg.baseline_file(), *bm);
    predictor = std::make_unique<BaselinePredictor>(bm.get(), &enc);
  } else {
    std::fprintf(stderr, "unknown predictor: %s\n", cfg.predictor.c_str());
    return 2;
  }

  const bool bridge = cfg.task == "bridge";
  Task task;
  task.mode = cfg.mode;
  if (bridge) {
    task.kind = TaskKind::Tallest;  // scoring is overridden by the bridge shape
    task.bridge = true;
    if (cfg.mode != Mode::Nonlinear) {
      std::fprintf(stderr, "the bridge task needs --mode nonlinear\n");
      return 2;
    }
  } else {
    task.kind = task_kind_from_string(cfg.task);
  }

  const auto pool = episode_pool(cfg.mode);
  std::vector<PlanResultRow> rows;
  std::vector<int> sizes = bridge ? std::vector<int>{6} : parse_sizes(cfg.sizes);
  for (int size : sizes) {
    for (int sample = 0; sample < cfg.samples; ++sample) {
      Rng rng(Rng(cfg.seed).fork(0x51).next_u64() ^
              (static_cast<std::uint64_t>(size) << 32) ^ static_cast<std::uint64_t>(sample));
      std::vector<ObjectSpec> inventory;
      Task t = task;
      std::vector<double> metrics;
      for (int attempt = 0; attempt < 64; ++attempt) {
        inventory = sample_inventory(rng, pool, size);
        if (bridge) break;
        if (t.kind == TaskKind::PairConstraint) {
          t.pair_a = inventory[0].id;
          t.pair_b = inventory[1].id;
          t.pair_maximize = rng.index(2) == 0;
        }
        metrics = achievable_metrics(inventory, t);
        if (!metrics.empty()) break;  // a feasible complete ordering exists
      }
      if (t.kind == TaskKind::SpecificHeight && !metrics.empty())
        t.target_dm = metrics[static_cast<std::size_t>(rng.index(static_cast<int>(metrics.size())))];

      const std::optional<Plan> plan =
          stacklab::search(inventory, t, *predictor, cfg.plan_budget, cfg.collapse_cutoff);
      const VerifyReport report = execute_and_verify(plan, t, inventory);
      PlanResultRow row;
      row.task = bridge ? "bridge" : to_string(t.kind);
      row.size = size;
      row.sample = sample;
      row.predictor = predictor->name();
      row.plan_found = report.plan_found;
      row.success = report.success;
      row.predicted = plan ? plan->predicted_height_dm : 0;
      row.achieved = report.achieved;
      row.optimum = report.optimum;
      row.failure = report.failure;
      rows.push_back(row);
      if (plan) {
        char name[256];
        std::snprintf(name, sizeof(name), "%s/plan_%s_%s_s%d_i%d.json", cfg.out_dir.c_str(),
                      row.task.c_str(), predictor->name(), size, sample);
        std::ofstream out(name, std::ios::binary);
        out << plan_to_json(*plan, report, t);
      }
    }
  }
  const std::string csv = cfg.out_dir + "/plan_results_" + std::string(predictor->name()) +
                          "_" + (bridge ? "bridge" : cfg.task) + ".csv";
  write_plan_results_csv(csv, rows);
  write_success_chart_svg(cfg.out_dir + "/plan_success_" + std::string(predictor->name()) +
                              "_" + (bridge ? "bridge" : cfg.task) + ".svg",
                          rows);
  std::map<int, std::pair<int, int>> by_size;
  for (const PlanResultRow& r : rows) {
    by_size[r.size].first += r.success ? 1 : 0;
    by_size[r.size].second += 1;
  }
  for (const auto& [size, counts] : by_size)
    std::printf("size=%d success=%d/%d\n", size, counts.first, counts.second);
  std::printf("wrote %s\n", csv.c_str());
  return 0;
}

int cmd_report(const RunConfig& cfg, const std::string& results_csv) {
  const auto rows = read_plan_results_csv(results_csv);
  const std::string svg = cfg.out_dir + "/report_success.svg";
  write_success_chart_svg(svg, rows);
  std::map<std::string, std::map<int, std::pair<int, int>>> groups;
  for (const PlanResultRow& r : rows) {
    auto& [succ, total] = groups[r.task + "/" + r.predictor][r.size];
    succ += r.success ? 1 : 0;
    total += 1;
  }
  for (const auto& [label, sizes] : groups) {
    std::printf("%s:", label.c_str());
    for (const auto& [size, counts] : sizes)
      std::printf("  n%d %d/%d", size, counts.first, counts.second);
    std::printf("\n");
  }
  std::printf("wrote %s\n", svg.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compound-object affordance laboratory"};
  app.require_subcommand(1);

  CliOverrides o;
  std::string report_csv;

  CLI::App* gen = app.add_subcommand("gen-data", "run exploration episodes, write JSONL");
  CLI::App* tenc = app.add_subcommand("train-encoder", "train the object autoencoder");
  CLI::App* tmog = app.add_subcommand("train-mogan", "train the graph effect model");
  CLI::App* tbase = app.add_subcommand("train-baseline", "train the feed-forward baseline");
  CLI::App* eval = app.add_subcommand("eval", "per-tower-size validation errors");
  CLI::App* plan = app.add_subcommand("plan", "search, execute and verify plans");
  CLI::App* report = app.add_subcommand("report", "success-rate table and chart from a results CSV");
  for (CLI::App* cmd : {gen, tenc, tmog, tbase, eval, plan, report}) add_common_flags(cmd, o);
  report->add_option("--results", report_csv, "plan results CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const RunConfig cfg = resolve_config(o);
    save_config(cfg.out_dir + "/run_config.txt", cfg);
    if (gen->parsed()) return cmd_gen_data(cfg);
    if (tenc->parsed()) return cmd_train_encoder(cfg);
    if (tmog->parsed()) return cmd_train_mogan(cfg);
    if (tbase->parsed()) return cmd_train_baseline(cfg);
    if (eval->parsed()) return cmd_eval(cfg);
    if (plan->parsed()) return cmd_plan(cfg);
    if (report->parsed()) return cmd_report(cfg, report_csv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
