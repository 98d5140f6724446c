#include "stacklab/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace stacklab {

namespace {
std::string default_path(const std::string& explicit_path, const std::string& out_dir,
                         const std::string& stem, Mode mode, const std::string& ext) {
  if (!explicit_path.empty()) return explicit_path;
  return out_dir + "/" + stem + "_" + to_string(mode) + ext;
}
}  // namespace

std::string RunConfig::dataset_file() const {
  return default_path(dataset_path, out_dir, "dataset", mode, ".jsonl");
}
std::string RunConfig::encoder_file() const {
  return default_path(encoder_path, out_dir, "encoder", mode, ".bin");
}
std::string RunConfig::model_file() const {
  return default_path(model_path, out_dir, "mogan", mode, ".bin");
}
std::string RunConfig::baseline_file() const {
  return default_path(baseline_path, out_dir, "baseline", mode, ".bin");
}

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "seed=" << seed << "\n";
  out << "mode=" << to_string(mode) << "\n";
  out << "out_dir=" << out_dir << "\n";
  out << "episodes=" << episodes << "\n";
  out << "max_inventory=" << max_inventory << "\n";
  out << "dataset_path=" << dataset_path << "\n";
  out << "encoder_path=" << encoder_path << "\n";
  out << "model_path=" << model_path << "\n";
  out << "baseline_path=" << baseline_path << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", lr);
  out << "lr=" << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.10g", gamma);
  out << "gamma=" << buf << "\n";
  out << "lr_step=" << lr_step << "\n";
  out << "lr_step_unit=" << lr_step_unit << "\n";
  out << "epochs=" << epochs << "\n";
  std::snprintf(buf, sizeof(buf), "%.10g", lambda_sign);
  out << "lambda_sign=" << buf << "\n";
  out << "val_modulus=" << val_modulus << "\n";
  out << "encoder_epochs=" << encoder_epochs << "\n";
  out << "encoder_jitters=" << encoder_jitters << "\n";
  out << "task=" << task << "\n";
  out << "predictor=" << predictor << "\n";
  out << "sizes=" << sizes << "\n";
  out << "samples=" << samples << "\n";
  out << "plan_budget=" << plan_budget << "\n";
  std::snprintf(buf, sizeof(buf), "%.10g", collapse_cutoff);
  out << "collapse_cutoff=" << buf << "\n";
  return out.str();
}

RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv,
                              const RunConfig& base) {
  RunConfig c = base;
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };
  if (auto* v = get("seed")) c.seed = std::stoull(*v);
  if (auto* v = get("mode")) c.mode = mode_from_string(*v);
  if (auto* v = get("out_dir")) c.out_dir = *v;
  if (auto* v = get("episodes")) c.episodes = std::stoi(*v);
  if (auto* v = get("max_inventory")) c.max_inventory = std::stoi(*v);
  if (auto* v = get("dataset_path")) c.dataset_path = *v;
  if (auto* v = get("encoder_path")) c.encoder_path = *v;
  if (auto* v = get("model_path")) c.model_path = *v;
  if (auto* v = get("baseline_path")) c.baseline_path = *v;
  if (auto* v = get("lr")) c.lr = std::stod(*v);
  if (auto* v = get("gamma")) c.gamma = std::stod(*v);
  if (auto* v = get("lr_step")) c.lr_step = std::stoi(*v);
  if (auto* v = get("lr_step_unit")) c.lr_step_unit = *v;
  if (auto* v = get("epochs")) c.epochs = std::stoi(*v);
  if (auto* v = get("lambda_sign")) c.lambda_sign = std::stod(*v);
  if (auto* v = get("val_modulus")) c.val_modulus = std::stoi(*v);
  if (auto* v = get("encoder_epochs")) c.encoder_epochs = std::stoi(*v);
  if (auto* v = get("encoder_jitters")) c.encoder_jitters = std::stoi(*v);
  if (auto* v = get("task")) c.task = *v;
  if (auto* v = get("predictor")) c.predictor = *v;
  if (auto* v = get("sizes")) c.sizes = *v;
  if (auto* v = get("samples")) c.samples = std::stoi(*v);
  if (auto* v = get("plan_budget")) c.plan_budget = std::stol(*v);
  if (auto* v = get("collapse_cutoff")) c.collapse_cutoff = std::stod(*v);

  if (c.lr <= 0 || c.gamma <= 0 || c.epochs <= 0 || c.lambda_sign < 0)
    throw std::invalid_argument("hyperparameters must be positive");
  if (c.lr_step_unit != "epoch" && c.lr_step_unit != "step")
    throw std::invalid_argument("lr_step_unit must be epoch or step");
  return c;
}

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line without '=': " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return RunConfig::from_map(parse_kv_text(text), base);
}

void save_config(const std::string& path, const RunConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write config " + path);
  out << config.serialize();
}

}  // namespace stacklab
