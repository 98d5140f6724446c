#include "stacklab/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace stacklab {

BaselineConfig BaselineConfig::for_mode(Mode mode) {
  BaselineConfig cfg;
  cfg.mode = mode;
  if (mode == Mode::Nonlinear) {
    cfg.feat_dim = 7;
    cfg.slot_onehot = true;
    cfg.hidden1 = 140;
    cfg.hidden2 = 120;
  }
  return cfg;
}

BaselineModel::BaselineModel(const BaselineConfig& cfg)
    : config(cfg),
      l1("ff1", cfg.input_dim(), cfg.hidden1),
      l2("ff2", cfg.hidden1, cfg.hidden2),
      l3("ff3", cfg.hidden2, cfg.output_dim()) {}

void BaselineModel::init(Rng& rng) {
  for (Linear* l : {&l1, &l2, &l3}) init_linear(*l, rng);
}

std::vector<Param*> BaselineModel::all_params() {
  std::vector<Param*> out;
  for (Linear* l : {&l1, &l2, &l3})
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

std::size_t BaselineModel::scalar_count() {
  std::size_t n = 0;
  for (Param* p : all_params()) n += p->value.size();
  return n;
}

Tensor baseline_input(const BaselineConfig& cfg,
                      const std::vector<LatentFeature>& members,
                      const std::vector<int>& member_slots,
                      const LatentFeature& new_feat, int new_slot) {
  if (static_cast<int>(members.size()) > kBaselineSlots) throw CompoundTooLarge();
  Tensor input(1, cfg.input_dim());  // padded slots stay exactly zero
  const int stride = cfg.per_object();
  auto put = [&](int slot_index, const LatentFeature& f, int xslot) {
    const std::vector<double> row = f.assemble();
    int at = slot_index * stride;
    for (double v : row) input.at(0, at++) = v;
    if (cfg.slot_onehot) input.at(0, slot_index * stride + cfg.feat_dim + xslot) = 1.0;
  };
  for (std::size_t i = 0; i < members.size(); ++i)
    put(static_cast<int>(i), members[i], member_slots[i]);
  put(kBaselineSlots, new_feat, new_slot);
  return input;
}

BaselineSampleSet build_baseline_samples(const std::vector<InteractionRecord>& records,
                                         const Autoencoder& encoder, Mode mode,
                                         int val_modulus) {
  if (records.empty()) throw EmptyDataset();
  const BaselineConfig cfg = BaselineConfig::for_mode(mode);
  BaselineSampleSet set;
  std::map<std::pair<int, int>, LatentFeature> cache;
  auto feat_of = [&](int id, const NormalizedImage& img, Orientation o) {
    const std::pair<int, int> key{id, static_cast<int>(o)};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    std::optional<int> flag;
    if (mode == Mode::Nonlinear) flag = o == Orientation::Upright ? 0 : 1;
    return cache.emplace(key, encode(encoder, img, flag)).first->second;
  };

  for (const InteractionRecord& rec : records) {
    const int k = static_cast<int>(rec.members.size());
    set.max_tower = std::max(set.max_tower, k);
    std::vector<LatentFeature> members;
    std::vector<int> slots;
    for (const MemberSnapshot& m : rec.members) {
      members.push_back(feat_of(m.object_id, m.image, m.pose.orientation));
      slots.push_back(m.slot);
    }
    BaselineSample s;
    s.input = baseline_input(cfg, members, slots,
                             feat_of(rec.new_id, rec.new_image, rec.orientation), rec.slot);
    s.target = Tensor(1, cfg.output_dim());
    s.sign_target = Tensor(1, cfg.output_dim());
    for (int i = 0; i < k; ++i) {
      const int at = i * 7;
      s.target.at(0, at + 0) = rec.e1[static_cast<std::size_t>(i)][0];
      s.target.at(0, at + 1) = rec.e1[static_cast<std::size_t>(i)][1];
      for (int c = 0; c < 4; ++c)
        s.target.at(0, at + 2 + c) = rec.e2[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      s.target.at(0, at + 6) = rec.e3;
      for (int c = 0; c < 6; ++c) s.sign_target.at(0, at + c) = s.target.at(0, at + c);
    }
    s.episode = rec.episode;
    s.tower_size = k;
    (val_modulus > 0 && rec.episode % val_modulus == 0 ? set.val : set.train)
        .push_back(std::move(s));
  }
  return set;
}

namespace {

int baseline_forward_node(Tape& tape, BaselineModel& model, int x) {
  int h = tape.leaky_relu(model.l1.apply(tape, x));
  h = tape.leaky_relu(model.l2.apply(tape, h));
  return model.l3.apply(tape, h);
}

}  // namespace

Tensor baseline_forward(BaselineModel& model, const Tensor& input) {
  Tape tape;
  const int out = baseline_forward_node(tape, model, tape.constant(input));
  return tape.value(out);
}

EffectEntry baseline_entry(const Tensor& output, int member_index) {
  EffectEntry e;
  const int at = member_index * 7;
  e.e1 = {output.at(0, at), output.at(0, at + 1)};
  for (int c = 0; c < 4; ++c) e.e2[static_cast<std::size_t>(c)] = output.at(0, at + 2 + c);
  return e;
}

double baseline_e3(const Tensor& output, int member_index) {
  return output.at(0, member_index * 7 + 6);
}

TrainLog train_baseline(BaselineModel& model, const BaselineSampleSet& samples,
                        const TrainConfig& config) {
  if (samples.train.empty()) throw EmptyDataset();
  TrainLog log;
  Rng rng(Rng(config.seed).fork(0xBA).next_u64());
  model.init(rng);
  Adam opt;
  std::vector<Param*> params = model.all_params();
  std::vector<int> order(samples.train.size());
  std::iota(order.begin(), order.end(), 0);

  long steps = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng.index(static_cast<int>(i)))]);
    const long sched = config.lr_per_optimizer_step ? steps : epoch;
    const double lr = lr_schedule(config.lr, config.gamma, config.lr_step, sched);
    double total = 0;
    for (int idx : order) {
      const BaselineSample& s = samples.train[static_cast<std::size_t>(idx)];
      Tape tape;
      const int out = baseline_forward_node(tape, model, tape.constant(s.input));
      int loss = tape.mse(out, s.target);
      loss = tape.add_scaled(loss, tape.sign_hinge(out, s.sign_target), config.lambda_sign);
      total += tape.value(loss).v[0];
      tape.backward(loss);
      for (Linear* l : {&model.l1, &model.l2, &model.l3}) l->collect(tape);
      opt.step(params, lr);
      for (Param* p : params) p->zero_grad();
    }
    steps += static_cast<long>(order.size());
    const double train_loss = total / static_cast<double>(order.size());
    double val_total = 0;
    for (const BaselineSample& s : samples.val) {
      Tape tape;
      const int out = baseline_forward_node(tape, model, tape.constant(s.input));
      val_total += tape.value(tape.mse(out, s.target)).v[0];
    }
    log.rows.push_back({epoch, "all", "train", train_loss});
    log.rows.push_back({epoch, "all", "val",
                        samples.val.empty() ? 0 : val_total / static_cast<double>(samples.val.size())});
    if (!std::isfinite(train_loss)) {
      log.nan_failure = true;
      return log;
    }
  }
  log.table = eval_baseline(model, samples);
  return log;
}

std::vector<SizeError> eval_baseline(BaselineModel& model, const BaselineSampleSet& samples) {
  std::map<int, std::array<double, 3>> acc;
  std::map<int, std::array<int, 3>> count;
  for (const BaselineSample& s : samples.val) {
    if (s.tower_size < 1) continue;
    const Tensor out = baseline_forward(model, s.input);
    double e1 = 0, e2 = 0;
    for (int i = 0; i < s.tower_size; ++i) {
      const int at = i * 7;
      e1 += (std::abs(out.at(0, at) - s.target.at(0, at)) +
             std::abs(out.at(0, at + 1) - s.target.at(0, at + 1))) / 2;
      double d = 0;
      for (int c = 0; c < 4; ++c)
        d += std::abs(out.at(0, at + 2 + c) - s.target.at(0, at + 2 + c));
      e2 += d / 4;
    }
    acc[s.tower_size][0] += e1 / s.tower_size;
    acc[s.tower_size][1] += e2 / s.tower_size;
    count[s.tower_size][0] += s.tower_size;
    count[s.tower_size][1] += 1;
    // record-level collapse read-out at the last real slot
    acc[s.tower_size][2] +=
        std::abs(baseline_e3(out, s.tower_size - 1) - s.target.at(0, 6));
    count[s.tower_size][2] += 1;
  }
  std::vector<SizeError> table;
  for (const auto& [size, sums] : acc) {
    SizeError row;
    row.tower_size = size;
    row.e1_mae = sums[0] / count[size][1];
    row.e2_mae = sums[1] / count[size][1];
    row.e3_err = sums[2] / count[size][2];
    row.n_pairs = count[size][0];
    row.n_records = count[size][2];
    table.push_back(row);
  }
  return table;
}

void save_baseline(const std::string& path, BaselineModel& model,
                   const std::string& sidecar_json) {
  std::vector<const Param*> params;
  for (Param* p : model.all_params()) params.push_back(p);
  save_snapshot(path, params, sidecar_json);
}

void load_baseline(const std::string& path, BaselineModel& model) {
  load_snapshot(path, model.all_params());
}

}  // namespace stacklab
