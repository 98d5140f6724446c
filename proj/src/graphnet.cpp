#include "stacklab/graphnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace stacklab {

std::vector<std::pair<int, int>> edge_creation(const CompoundState& compound) {
  std::vector<std::pair<int, int>> edges;
  const auto& ps = compound.placements;
  for (std::size_t i = 0; i + 1 < ps.size(); ++i) {
    const Aabb a = bounding_box(ps[i].spec, ps[i].pose);
    const Aabb b = bounding_box(ps[i + 1].spec, ps[i + 1].pose);
    bool linked = a.intersects(b, 0.001);
    if (!linked) {
      // settle contact graph
      for (int s : ps[i + 1].supports) linked |= s == static_cast<int>(i);
      for (int s : ps[i].supports) linked |= s == static_cast<int>(i + 1);
    }
    if (linked)
      edges.push_back({static_cast<int>(i) + 1, static_cast<int>(i)});  // later -> earlier
  }
  return edges;
}

CompoundGraph build_graph(const CompoundState& compound,
                          const std::vector<LatentFeature>& features, Mode mode) {
  const int k = compound.size();
  if (k == 0) throw EmptyCompound();
  CompoundGraph g;
  if (mode == Mode::Linear) {
    for (int i = 0; i + 1 < k; ++i) g.edges.push_back({i + 1, i});
  } else {
    g.edges = edge_creation(compound);
  }
  const std::vector<double> first = features.at(0).assemble();
  g.node_features = Tensor(k, static_cast<int>(first.size()));
  for (int i = 0; i < k; ++i) {
    const std::vector<double> row = features.at(static_cast<std::size_t>(i)).assemble();
    for (int c = 0; c < g.node_features.cols; ++c)
      g.node_features.at(i, c) = row[static_cast<std::size_t>(c)];
  }
  g.adjacency = adjacency_normalize(k, g.edges);
  return g;
}

GraphModelConfig GraphModelConfig::for_mode(Mode mode) {
  GraphModelConfig cfg;
  cfg.mode = mode;
  if (mode == Mode::Nonlinear) {
    cfg.feat_dim = 7;  // orientation flag appended
    cfg.slot_conditioning = true;
  }
  return cfg;
}

EffectHead::EffectHead(const std::string& name, const GraphModelConfig& cfg, int out,
                       bool sigmoid)
    : g1(name + ".g1", cfg.feat_dim, cfg.gcn1),
      g2(name + ".g2", cfg.gcn1, cfg.gcn2),
      l1(name + ".l1", cfg.decoder_in(), cfg.dec1),
      l2(name + ".l2", cfg.dec1, cfg.dec2),
      l3(name + ".l3", cfg.dec2, out),
      out_dim(out),
      sigmoid_out(sigmoid) {}

std::vector<Param*> EffectHead::params() {
  std::vector<Param*> out;
  for (Linear* l : {&g1, &g2, &l1, &l2, &l3})
    for (Param* p : l->params()) out.push_back(p);
  return out;
}

void EffectHead::collect(const Tape& tape) {
  for (Linear* l : {&g1, &g2, &l1, &l2, &l3}) l->collect(tape);
}

GraphModel::GraphModel(const GraphModelConfig& cfg)
    : config(cfg),
      head_e1("e1", cfg, 2, false),
      head_e2("e2", cfg, 4, false),
      head_e3("e3", cfg, 1, true) {}

void GraphModel::init(Rng& rng) {
  for (EffectHead* h : {&head_e1, &head_e2, &head_e3})
    for (Linear* l : {&h->g1, &h->g2, &h->l1, &h->l2, &h->l3}) init_linear(*l, rng);
}

std::vector<Param*> GraphModel::all_params() {
  std::vector<Param*> out;
  for (EffectHead* h : {&head_e1, &head_e2, &head_e3})
    for (Param* p : h->params()) out.push_back(p);
  return out;
}

std::size_t GraphModel::scalar_count() {
  std::size_t n = 0;
  for (Param* p : all_params()) n += p->value.size();
  return n;
}

int head_forward(Tape& tape, EffectHead& head, const GraphModelConfig& cfg,
                 const CompoundGraph* graph, const Tensor& new_feat, int query_index,
                 int slot) {
  const int k = graph ? graph->node_features.rows : 0;
  if (k > 0 && (query_index < 1 || query_index > k)) throw BadQueryIndex();
  if (k == 0 && query_index != 0) throw BadQueryIndex();

  int agg, query_emb;
  if (k > 0) {
    const int adj = tape.constant(graph->adjacency);
    const int feats = tape.constant(graph->node_features);
    const int h1 = tape.leaky_relu(head.g1.apply(tape, tape.matmul(adj, feats)));
    const int h2 = tape.leaky_relu(head.g2.apply(tape, tape.matmul(adj, h1)));
    agg = tape.mean_max_rows(h2);
    query_emb = tape.select_row(h2, query_index - 1);
  } else {
    agg = tape.constant(Tensor(1, 2 * cfg.gcn2));  // empty-compound path
    query_emb = tape.constant(Tensor(1, cfg.gcn2));
  }
  std::vector<int> parts{tape.constant(new_feat), agg, query_emb};
  if (cfg.slot_conditioning) {
    Tensor onehot(1, 3);
    onehot.at(0, slot) = 1.0;
    parts.push_back(tape.constant(onehot));
  }
  const int dec_in = tape.concat_cols(parts);
  int h = tape.leaky_relu(head.l1.apply(tape, dec_in));
  h = tape.leaky_relu(head.l2.apply(tape, h));
  h = head.l3.apply(tape, h);
  if (head.sigmoid_out) h = tape.sigmoid(h);
  return h;
}

namespace {

Tensor feature_row(const LatentFeature& f) {
  return Tensor::row(f.assemble());
}

int top_member_index(const CompoundState& compound) {
  int best = 0;
  double top = -1;
  for (int i = 0; i < compound.size(); ++i) {
    const Placement& p = compound.placements[static_cast<std::size_t>(i)];
    const double t = p.pose.z + p.spec.height;
    if (t >= top) {
      top = t;
      best = i;
    }
  }
  return best + 1;  // 1-based
}

}  // namespace

ModelPrediction model_forward(GraphModel& model, const CompoundGraph* graph,
                              const LatentFeature& new_feat, int query_index, int slot) {
  const Tensor nf = feature_row(new_feat);
  ModelPrediction pred;
  {
    Tape tape;
    const int out = head_forward(tape, model.head_e1, model.config, graph, nf,
                                 query_index, slot);
    pred.e1 = {tape.value(out).at(0, 0), tape.value(out).at(0, 1)};
  }
  {
    Tape tape;
    const int out = head_forward(tape, model.head_e2, model.config, graph, nf,
                                 query_index, slot);
    for (int i = 0; i < 4; ++i) pred.e2[static_cast<std::size_t>(i)] = tape.value(out).at(0, i);
  }
  {
    Tape tape;
    const int out = head_forward(tape, model.head_e3, model.config, graph, nf,
                                 query_index, slot);
    pred.e3 = tape.value(out).at(0, 0);
  }
  return pred;
}

CandidatePrediction predict_candidate(GraphModel& model, const CompoundState& compound,
                                      const std::vector<LatentFeature>& features,
                                      const LatentFeature& candidate_feat, int slot) {
  CandidatePrediction out;
  const int k = compound.size();
  const Tensor nf = feature_row(candidate_feat);
  if (k == 0) {
    Tape tape;
    const int e3 = head_forward(tape, model.head_e3, model.config, nullptr, nf, 0, slot);
    out.collapse_prob = tape.value(e3).at(0, 0);
    return out;
  }
  const CompoundGraph graph = build_graph(compound, features, model.config.mode);
  for (int q = 1; q <= k; ++q) {
    EffectEntry entry;
    Tape t1;
    const int o1 = head_forward(t1, model.head_e1, model.config, &graph, nf, q, slot);
    entry.e1 = {t1.value(o1).at(0, 0), t1.value(o1).at(0, 1)};
    Tape t2;
    const int o2 = head_forward(t2, model.head_e2, model.config, &graph, nf, q, slot);
    for (int i = 0; i < 4; ++i) entry.e2[static_cast<std::size_t>(i)] = t2.value(o2).at(0, i);
    out.per_member.push_back(entry);
  }
  Tape t3;
  const int o3 = head_forward(t3, model.head_e3, model.config, &graph, nf,
                              top_member_index(compound), slot);
  out.collapse_prob = t3.value(o3).at(0, 0);
  return out;
}

SampleSet build_samples(const std::vector<InteractionRecord>& records,
                        const Autoencoder& encoder, Mode mode, int val_modulus) {
  if (records.empty()) throw EmptyDataset();
  SampleSet set;
  const auto pool = episode_pool(mode);

  // feature cache keyed by (object id, orientation) image identity
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
    const bool val = val_modulus > 0 && rec.episode % val_modulus == 0;

    // reconstruct the compound for graph edges
    CompoundState compound;
    std::vector<LatentFeature> member_feats;
    for (const MemberSnapshot& m : rec.members) {
      Placement p;
      p.spec = pool.at(static_cast<std::size_t>(m.object_id));
      p.pose = m.pose;
      p.slot = m.slot;
      p.step = compound.size() + 1;
      compound.placements.push_back(p);
      member_feats.push_back(feat_of(m.object_id, m.image, m.pose.orientation));
    }
    const LatentFeature new_feat = feat_of(rec.new_id, rec.new_image, rec.orientation);
    const Tensor nf = feature_row(new_feat);

    Tensor feats;
    Tensor adjacency;
    if (k > 0) {
      const CompoundGraph g = build_graph(compound, member_feats, mode);
      feats = g.node_features;
      adjacency = g.adjacency;
    }

    for (int q = 1; q <= k; ++q) {
      QuerySample s;
      s.feats = feats;
      s.adjacency = adjacency;
      s.new_feat = nf;
      s.query_index = q;
      s.slot = rec.slot;
      s.episode = rec.episode;
      s.tower_size = k;
      s.target = Tensor::row({rec.e1[static_cast<std::size_t>(q - 1)][0],
                              rec.e1[static_cast<std::size_t>(q - 1)][1]});
      (val ? set.e1_val : set.e1_train).push_back(s);
      s.target = Tensor::row({rec.e2[static_cast<std::size_t>(q - 1)][0],
                              rec.e2[static_cast<std::size_t>(q - 1)][1],
                              rec.e2[static_cast<std::size_t>(q - 1)][2],
                              rec.e2[static_cast<std::size_t>(q - 1)][3]});
      (val ? set.e2_val : set.e2_train).push_back(std::move(s));
    }

    QuerySample s3;
    s3.feats = feats;
    s3.adjacency = adjacency;
    s3.new_feat = nf;
    s3.query_index = k == 0 ? 0 : top_member_index(compound);
    s3.slot = rec.slot;
    s3.episode = rec.episode;
    s3.tower_size = k;
    s3.target = Tensor::row({static_cast<double>(rec.e3)});
    (val ? set.e3_val : set.e3_train).push_back(std::move(s3));
  }
  return set;
}

namespace {

CompoundGraph graph_view(const QuerySample& s) {
  CompoundGraph g;
  g.node_features = s.feats;
  g.adjacency = s.adjacency;
  return g;
}

double train_epoch_head(EffectHead& head, const GraphModelConfig& cfg,
                        const std::vector<QuerySample>& samples, std::vector<int>& order,
                        Adam& opt, double lr, double lambda_sign, bool sign_loss,
                        Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<std::size_t>(rng.index(static_cast<int>(i)))]);
  double total = 0;
  std::vector<Param*> params = head.params();
  for (int idx : order) {
    const QuerySample& s = samples[static_cast<std::size_t>(idx)];
    const CompoundGraph g = graph_view(s);
    Tape tape;
    const int out = head_forward(tape, head, cfg, s.tower_size > 0 ? &g : nullptr,
                                 s.new_feat, s.query_index, s.slot);
    int loss = tape.mse(out, s.target);
    if (sign_loss)
      loss = tape.add_scaled(loss, tape.sign_hinge(out, s.target), lambda_sign);
    total += tape.value(loss).v[0];
    tape.backward(loss);
    head.collect(tape);
    opt.step(params, lr);
    for (Param* p : params) p->zero_grad();
  }
  return order.empty() ? 0.0 : total / static_cast<double>(order.size());
}

double val_loss_head(EffectHead& head, const GraphModelConfig& cfg,
                     const std::vector<QuerySample>& samples) {
  if (samples.empty()) return 0;
  double total = 0;
  for (const QuerySample& s : samples) {
    const CompoundGraph g = graph_view(s);
    Tape tape;
    const int out = head_forward(tape, head, cfg, s.tower_size > 0 ? &g : nullptr,
                                 s.new_feat, s.query_index, s.slot);
    total += tape.value(tape.mse(out, s.target)).v[0];
  }
  return total / static_cast<double>(samples.size());
}

double mean_abs_err(EffectHead& head, const GraphModelConfig& cfg, const QuerySample& s) {
  const CompoundGraph g = graph_view(s);
  Tape tape;
  const int out = head_forward(tape, head, cfg, s.tower_size > 0 ? &g : nullptr,
                               s.new_feat, s.query_index, s.slot);
  const Tensor& pred = tape.value(out);
  double acc = 0;
  for (std::size_t i = 0; i < pred.v.size(); ++i) acc += std::abs(pred.v[i] - s.target.v[i]);
  return acc / static_cast<double>(pred.v.size());
}

}  // namespace

std::vector<SizeError> eval_graph_model(GraphModel& model, const SampleSet& samples) {
  std::map<int, SizeError> by_size;
  std::map<int, std::array<double, 3>> acc;  // e1 sum, e2 sum, e3 sum
  std::map<int, std::array<int, 3>> count;
  for (const QuerySample& s : samples.e1_val) {
    acc[s.tower_size][0] += mean_abs_err(model.head_e1, model.config, s);
    count[s.tower_size][0] += 1;
  }
  for (const QuerySample& s : samples.e2_val) {
    acc[s.tower_size][1] += mean_abs_err(model.head_e2, model.config, s);
    count[s.tower_size][1] += 1;
  }
  for (const QuerySample& s : samples.e3_val) {
    if (s.tower_size < 1) continue;
    acc[s.tower_size][2] += mean_abs_err(model.head_e3, model.config, s);
    count[s.tower_size][2] += 1;
  }
  std::vector<SizeError> table;
  for (const auto& [size, sums] : acc) {
    if (size < 1) continue;
    SizeError row;
    row.tower_size = size;
    row.e1_mae = count[size][0] ? sums[0] / count[size][0] : 0;
    row.e2_mae = count[size][1] ? sums[1] / count[size][1] : 0;
    row.e3_err = count[size][2] ? sums[2] / count[size][2] : 0;
    row.n_pairs = count[size][0];
    row.n_records = count[size][2];
    table.push_back(row);
  }
  return table;
}

TrainLog train_graph_model(GraphModel& model, const SampleSet& samples,
                           const TrainConfig& config) {
  if (samples.e1_train.empty() && samples.e3_train.empty()) throw EmptyDataset();
  TrainLog log;
  Rng rng(Rng(config.seed).fork(0x6A).next_u64());
  model.init(rng);
  Adam opt1, opt2, opt3;
  const SampleSet& s = samples;

  std::vector<int> order1(s.e1_train.size()), order2(s.e2_train.size()),
      order3(s.e3_train.size());
  std::iota(order1.begin(), order1.end(), 0);
  std::iota(order2.begin(), order2.end(), 0);
  std::iota(order3.begin(), order3.end(), 0);

  long steps = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const long sched = config.lr_per_optimizer_step ? steps : epoch;
    const double lr = lr_schedule(config.lr, config.gamma, config.lr_step, sched);
    const double l1 = train_epoch_head(model.head_e1, model.config, s.e1_train, order1,
                                       opt1, lr, config.lambda_sign, true, rng);
    const double l2 = train_epoch_head(model.head_e2, model.config, s.e2_train, order2,
                                       opt2, lr, config.lambda_sign, true, rng);
    const double l3 = train_epoch_head(model.head_e3, model.config, s.e3_train, order3,
                                       opt3, lr, 0.0, false, rng);
    steps += static_cast<long>(order1.size());
    log.rows.push_back({epoch, "e1", "train", l1});
    log.rows.push_back({epoch, "e2", "train", l2});
    log.rows.push_back({epoch, "e3", "train", l3});
    log.rows.push_back({epoch, "e1", "val", val_loss_head(model.head_e1, model.config, s.e1_val)});
    log.rows.push_back({epoch, "e2", "val", val_loss_head(model.head_e2, model.config, s.e2_val)});
    log.rows.push_back({epoch, "e3", "val", val_loss_head(model.head_e3, model.config, s.e3_val)});
    if (!std::isfinite(l1) || !std::isfinite(l2) || !std::isfinite(l3)) {
      log.nan_failure = true;
      return log;
    }
  }
  log.table = eval_graph_model(model, samples);
  return log;
}

void save_graph_model(const std::string& path, GraphModel& model,
                      const std::string& sidecar_json) {
  std::vector<const Param*> params;
  for (Param* p : model.all_params()) params.push_back(p);
  save_snapshot(path, params, sidecar_json);
}

void load_graph_model(const std::string& path, GraphModel& model) {
  load_snapshot(path, model.all_params());
}

}  // namespace stacklab
